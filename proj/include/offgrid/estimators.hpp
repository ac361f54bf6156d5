// SPDX-License-Identifier: Apache-2.0
//
// offgrid: off-grid aware channel and covariance estimation for hybrid mmWave MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef OFFGRID_ESTIMATORS_HPP
#define OFFGRID_ESTIMATORS_HPP

#include <span>
#include <vector>

#include <offgrid/dictionary.hpp>
#include <offgrid/sensing.hpp>
#include <offgrid/types.hpp>

namespace offgrid
{
/// A selected grid cell plus its continuous offsets. The refined angles are
/// grid_aoa + delta_aoa and grid_aod + delta_aod.
struct SupportEntry
{
    int aoa_index = 0;
    int aod_index = 0;
    double grid_aoa = 0.0;
    double grid_aod = 0.0;
    PerturbationBounds aoa_bounds;
    PerturbationBounds aod_bounds;
    double delta_aoa = 0.0;
    double delta_aod = 0.0;

    double aoa() const { return grid_aoa + delta_aoa; }
    double aod() const { return grid_aod + delta_aod; }
};

SupportEntry make_support_entry(const Grid &grid, int aoa_index, int aod_index);

enum class GradientForm
{
    Exact,          // per-snapshot weighted gradient of the fitting objective
    SummedResidual, // residuals summed over snapshots before weighting
};

struct SolverOptions
{
    double epsilon = 1e-2; // stop once residual energy <= epsilon * measurement energy
    int k_max = 16;
    // First trial step, as a fraction of the widest half-cell of the support; the
    // step is then halved until the objective does not increase.
    double mu0 = 1.0;
    int p_max = 100;
    double tol_step = 1e-7; // radians
    // Also stop once an accepted step lowers the objective by less than this
    // fraction of its current value.
    double tol_objective = 1e-5;
    int max_halvings = 20;
    bool perturbation_enabled = true;
    GradientForm gradient_form = GradientForm::Exact;

    void validate(const Dictionary &dict) const;
};

/// Angle-wise gradient values, one entry per support element.
struct AngleGradient
{
    RVec aoa;
    RVec aod;
};

// Ridge added to the normal equations when a support is numerically rank deficient.
inline constexpr double kRidge = 1e-10;

// ---------------------------------------------------------------------------
// Channel estimation

struct ChannelFit
{
    CMat gains; // k x T
    RVec delta_aoa;
    RVec delta_aod;
    std::vector<double> objective_history; // sum_t ||y_t - B_t alpha_t||^2 at accepted steps
    bool rank_deficient = false;
};

struct ChannelEstimate
{
    std::vector<SupportEntry> support;
    CMat gains;                           // k x T
    std::vector<CVec> h_hat;              // T vectors of length MN
    std::vector<double> residual_history; // relative residual energy, first entry 1
    bool rank_deficient = false;          // an atom was dropped for rank deficiency
};

/// Residuals r_t = y_t - Phi_t sum_l alpha_{l,t} a(theta_l) for the given gains.
std::vector<CVec> channel_residuals(const std::vector<SupportEntry> &support, const CMat &gains,
                                    std::span<const CVec> y, const SensingBlock &sensing);

/// g_l = sum_t Re{alpha_{l,t}^* (Phi_t da_l/dtheta)^H r_t}; the objective
/// sum_t ||r_t||^2 has slope -2 g_l in theta_l at fixed gains.
AngleGradient channel_gradient(const std::vector<SupportEntry> &support, const CMat &gains,
                               std::span<const CVec> residuals, const SensingBlock &sensing);

/// Alternating least-squares gains and bounded gradient steps on all angles of
/// the support, starting from the offsets stored in `support`.
ChannelFit perturb_channel(std::span<const CVec> y, const SensingBlock &sensing,
                           const std::vector<SupportEntry> &support, const SolverOptions &opts);

/// Greedy support selection on the grid plus joint perturbation. With
/// perturbation disabled this is the on-grid DSOMP baseline.
ChannelEstimate ppsomp(const SensingBlock &sensing, const Dictionary &dict, const SolverOptions &opts);

// (1/T) sum_t h_t h_t^H
CMat indirect_covariance(const ChannelEstimate &est);

// ---------------------------------------------------------------------------
// Covariance estimation

struct CovarianceFit
{
    std::vector<CMat> cross_gains; // T Hermitian k x k matrices
    RVec delta_aoa;
    RVec delta_aod;
    std::vector<double> objective_history; // (1/T) sum_t ||R_t - B_t G_t B_t^H||_F^2
    bool rank_deficient = false;
};

struct CovarianceEstimate
{
    std::vector<SupportEntry> support;
    std::vector<CMat> cross_gains;
    CMat r_hat;
    std::vector<double> residual_history;
    bool rank_deficient = false;
};

std::vector<CMat> measurement_covariances(const SensingBlock &sensing);

/// Cross gains G = P R P^H with P the pseudo-inverse of the sensed atoms. Only
/// entries q >= l are evaluated; the lower triangle is mirrored.
CMat cross_gains(const CMat &sensed_atoms, const CMat &measurement_cov);

std::vector<CMat> covariance_residuals(const std::vector<SupportEntry> &support,
                                       std::span<const CMat> cross_gains, std::span<const CMat> r_y,
                                       const SensingBlock &sensing);

/// Gradient of (1/T) sum_t ||E_t||_F^2, E_t = R_t - sum_{l,q} G_{l,q,t} Phi_t a_l a_q^H Phi_t^H,
/// with respect to every angle at fixed (Hermitian) cross gains.
AngleGradient covariance_gradient(const std::vector<SupportEntry> &support, std::span<const CMat> cross_gains,
                                  std::span<const CMat> residual_covs, const SensingBlock &sensing);

CovarianceFit perturb_covariance(std::span<const CMat> r_y, const SensingBlock &sensing,
                                 const std::vector<SupportEntry> &support, const SolverOptions &opts);

/// Greedy covariance pursuit with quadratic-form selection. With perturbation
/// disabled this is the on-grid DCOMP baseline.
CovarianceEstimate ppcomp(const SensingBlock &sensing, const Dictionary &dict, const SolverOptions &opts);

/// (1/T) sum_t sum_{l,q} G_{l,q,t} a_l a_q^H at the refined angles.
CMat synthesize_covariance(const std::vector<SupportEntry> &support, std::span<const CMat> cross_gains,
                           const ArrayGeometry &bs, const ArrayGeometry &ue);
} // namespace offgrid

#endif
