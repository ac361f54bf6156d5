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

#include <offgrid/estimators.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <offgrid/kernels.hpp>

namespace offgrid
{
SupportEntry make_support_entry(const Grid &grid, int aoa_index, int aod_index)
{
    const auto [aoa_bounds, aod_bounds] = perturbation_bounds(grid, aoa_index, aod_index);
    SupportEntry e;
    e.aoa_index = aoa_index;
    e.aod_index = aod_index;
    e.grid_aoa = grid.aoa[aoa_index];
    e.grid_aod = grid.aod[aod_index];
    e.aoa_bounds = aoa_bounds;
    e.aod_bounds = aod_bounds;
    return e;
}

void SolverOptions::validate(const Dictionary &dict) const
{
    if (!(epsilon > 0.0))
        throw std::invalid_argument("SolverOptions: epsilon must be > 0");
    if (k_max < 1 || k_max > dict.columns())
        throw std::invalid_argument("SolverOptions: k_max must be in [1, G_BS * G_UE]");
    if (!(mu0 > 0.0))
        throw std::invalid_argument("SolverOptions: mu0 must be > 0");
    if (p_max < 1)
        throw std::invalid_argument("SolverOptions: p_max must be >= 1");
    if (!(tol_step > 0.0))
        throw std::invalid_argument("SolverOptions: tol_step must be > 0");
    if (!(tol_objective >= 0.0))
        throw std::invalid_argument("SolverOptions: tol_objective must be >= 0");
    if (max_halvings < 1)
        throw std::invalid_argument("SolverOptions: max_halvings must be >= 1");
}

namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

// Offsets of a support, kept separately from the grid so clipping is exact.
struct Offsets
{
    RVec aoa;
    RVec aod;
};

struct SensedAtoms
{
    std::vector<CMat> b;    // Phi_t a_l
    std::vector<CMat> d_rx; // Phi_t da_l/dtheta_rx
    std::vector<CMat> d_tx; // Phi_t da_l/dtheta_tx
};

Offsets offsets_of(const std::vector<SupportEntry> &support)
{
    const Index k = static_cast<Index>(support.size());
    Offsets o{RVec(k), RVec(k)};
    for (Index l = 0; l < k; ++l)
    {
        o.aoa[l] = support[l].delta_aoa;
        o.aod[l] = support[l].delta_aod;
    }
    return o;
}

std::vector<SupportEntry> with_offsets(std::vector<SupportEntry> support, const Offsets &o)
{
    for (std::size_t l = 0; l < support.size(); ++l)
    {
        support[l].delta_aoa = o.aoa[static_cast<Index>(l)];
        support[l].delta_aod = o.aod[static_cast<Index>(l)];
    }
    return support;
}

// Stacked W_s^H of one frame, (M_RF N_RF) x N.
CMat stacked_combiners(const FrameBeamformers &frame)
{
    const Index n_rf = frame.combiners.front().cols();
    CMat w(static_cast<Index>(frame.combiners.size()) * n_rf, frame.combiners.front().rows());
    for (std::size_t s = 0; s < frame.combiners.size(); ++s)
        w.middleRows(static_cast<Index>(s) * n_rf, n_rf) = frame.combiners[s].adjoint();
    return w;
}

// Phi_t [a_1 .. a_k] without forming Phi_t: row block s of column l is
// (a_BS,l^H f_s) W_s^H a_UE,l.
void sense_frame(const FrameBeamformers &frame, const CMat &w_stack, const CMat &a_ue, const CMat &a_bs, CMat &out)
{
    const Index m_rf = frame.precoders.cols();
    const Index n_rf = w_stack.rows() / m_rf;
    const CMat coef = frame.precoders.transpose() * a_bs.conjugate(); // M_RF x k
    out.noalias() = w_stack * a_ue;
    for (Index s = 0; s < m_rf; ++s)
        out.middleRows(s * n_rf, n_rf) *= coef.row(s).asDiagonal();
}

SensedAtoms sense_support(const std::vector<SupportEntry> &support, const Offsets &o, const SensingBlock &sensing,
                          bool derivatives)
{
    const Index k = static_cast<Index>(support.size());
    const int frames = sensing.frames();
    CMat a_ue(sensing.ue.num_antennas(), k), a_bs(sensing.bs.num_antennas(), k);
    CMat da_ue, da_bs;
    if (derivatives)
    {
        da_ue.resize(a_ue.rows(), k);
        da_bs.resize(a_bs.rows(), k);
    }
    for (Index l = 0; l < k; ++l)
    {
        const double aoa = support[l].grid_aoa + o.aoa[l];
        const double aod = support[l].grid_aod + o.aod[l];
        a_ue.col(l) = array_response(aoa, sensing.ue);
        a_bs.col(l) = array_response(aod, sensing.bs);
        if (derivatives)
        {
            da_ue.col(l) = array_response_derivative(aoa, sensing.ue);
            da_bs.col(l) = array_response_derivative(aod, sensing.bs);
        }
    }

    SensedAtoms s;
    s.b.resize(frames);
    if (derivatives)
    {
        s.d_rx.resize(frames);
        s.d_tx.resize(frames);
    }
    for (int t = 0; t < frames; ++t)
    {
        const FrameBeamformers &frame = sensing.beamformers[t];
        const CMat w_stack = stacked_combiners(frame);
        sense_frame(frame, w_stack, a_ue, a_bs, s.b[t]);
        if (derivatives)
        {
            sense_frame(frame, w_stack, da_ue, a_bs, s.d_rx[t]);
            sense_frame(frame, w_stack, a_ue, da_bs, s.d_tx[t]);
        }
    }
    return s;
}

// Cholesky of the Gram matrix B^H B, or nothing when B is numerically rank
// deficient (smallest pivot below 1e-6 of the largest column norm, so that
// cond(B) stays under about 1e6 and the gains stay meaningful).
std::optional<Eigen::LLT<CMat>> gram_factor(const CMat &B)
{
    const CMat gram = B.adjoint() * B;
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success)
        return std::nullopt;
    const double scale = gram.diagonal().real().maxCoeff();
    const double pivot = llt.matrixLLT().diagonal().real().minCoeff();
    if (!(pivot * pivot > 1e-12 * scale))
        return std::nullopt;
    return llt;
}

CMat ridge_normal_inverse(const CMat &B)
{
    CMat G = B.adjoint() * B;
    G.diagonal().array() += kRidge;
    return G.ldlt().solve(B.adjoint());
}

// Least-squares gains per frame; ridge fallback when the sensed atoms lose rank.
CMat solve_gains(const std::vector<CMat> &B, std::span<const CVec> y, bool &deficient)
{
    const Index k = B.empty() ? 0 : B.front().cols();
    CMat gains(k, static_cast<Index>(B.size()));
    for (std::size_t t = 0; t < B.size(); ++t)
    {
        if (const auto llt = gram_factor(B[t]))
            gains.col(static_cast<Index>(t)) = llt->solve(B[t].adjoint() * y[t]);
        else
        {
            deficient = true;
            gains.col(static_cast<Index>(t)) = ridge_normal_inverse(B[t]) * y[t];
        }
    }
    return gains;
}

std::vector<CVec> residuals_from(const std::vector<CMat> &B, const CMat &gains, std::span<const CVec> y)
{
    std::vector<CVec> r;
    r.reserve(y.size());
    for (std::size_t t = 0; t < y.size(); ++t)
        r.push_back(y[t] - B[t] * gains.col(static_cast<Index>(t)));
    return r;
}

double energy(std::span<const CVec> v)
{
    double e = 0.0;
    for (const CVec &x : v)
        e += x.squaredNorm();
    return e;
}

double energy(std::span<const CMat> v)
{
    double e = 0.0;
    for (const CMat &x : v)
        e += x.squaredNorm();
    return e;
}

struct Box
{
    RVec lo_aoa, hi_aoa, lo_aod, hi_aod;
    double width = 0.0; // widest half-cell
};

Box make_box(const std::vector<SupportEntry> &support)
{
    const Index k = static_cast<Index>(support.size());
    Box b{RVec(k), RVec(k), RVec(k), RVec(k), 0.0};
    for (Index l = 0; l < k; ++l)
    {
        const SupportEntry &e = support[l];
        b.lo_aoa[l] = e.aoa_bounds.lower;
        b.hi_aoa[l] = e.aoa_bounds.upper;
        b.lo_aod[l] = e.aod_bounds.lower;
        b.hi_aod[l] = e.aod_bounds.upper;
        b.width = std::max({b.width, 0.5 * (e.aoa_bounds.upper - e.aoa_bounds.lower),
                            0.5 * (e.aod_bounds.upper - e.aod_bounds.lower)});
    }
    return b;
}

// Projected gradient descent on the offsets with a backtracking step. `objective`
// maps offsets to the (reduced) fitting error, `direction` returns a descent
// direction. Only non-increasing steps are accepted.
template <class Objective, class Direction>
Offsets bounded_descent(Offsets x, const Box &box, const SolverOptions &opts, Objective objective,
                        Direction direction, std::vector<double> &history)
{
    double f = objective(x);
    history.push_back(f);
    if (!std::isfinite(f))
        return x;
    double s_prev = kInf;
    for (int p = 0; p < opts.p_max; ++p)
    {
        const Offsets dir = direction(x);
        const double gmax = std::max(dir.aoa.cwiseAbs().maxCoeff(), dir.aod.cwiseAbs().maxCoeff());
        if (!(gmax > 0.0) || !std::isfinite(gmax))
            break;

        double s = std::min(opts.mu0 * box.width, 2.0 * s_prev);
        bool accepted = false;
        Offsets cand;
        double fc = f;
        for (int h = 0; h <= opts.max_halvings; ++h)
        {
            const double mu = s / gmax;
            cand.aoa = (x.aoa + mu * dir.aoa).cwiseMax(box.lo_aoa).cwiseMin(box.hi_aoa);
            cand.aod = (x.aod + mu * dir.aod).cwiseMax(box.lo_aod).cwiseMin(box.hi_aod);
            fc = objective(cand);
            if (fc <= f)
            {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted)
            break;

        const double move = std::max((cand.aoa - x.aoa).cwiseAbs().maxCoeff(), (cand.aod - x.aod).cwiseAbs().maxCoeff());
        const bool stalled = f - fc <= opts.tol_objective * f;
        x = std::move(cand);
        f = fc;
        history.push_back(f);
        s_prev = s;
        if (move < opts.tol_step || stalled)
            break;
    }
    return x;
}

AngleGradient channel_gradient_core(const SensedAtoms &s, const CMat &gains, std::span<const CVec> residuals,
                                    GradientForm form)
{
    const Index k = gains.rows();
    AngleGradient g{RVec::Zero(k), RVec::Zero(k)};
    const std::size_t frames = residuals.size();
    if (form == GradientForm::Exact)
    {
        for (std::size_t t = 0; t < frames; ++t)
        {
            const CVec u_rx = s.d_rx[t].adjoint() * residuals[t];
            const CVec u_tx = s.d_tx[t].adjoint() * residuals[t];
            for (Index l = 0; l < k; ++l)
            {
                const cd a = std::conj(gains(l, static_cast<Index>(t)));
                g.aoa[l] += std::real(a * u_rx[l]);
                g.aod[l] += std::real(a * u_tx[l]);
            }
        }
        return g;
    }

    CVec r_sum = CVec::Zero(residuals.front().size());
    for (const CVec &r : residuals)
        r_sum += r;
    for (Index l = 0; l < k; ++l)
    {
        CVec w_rx = CVec::Zero(r_sum.size());
        CVec w_tx = CVec::Zero(r_sum.size());
        for (std::size_t t = 0; t < frames; ++t)
        {
            w_rx += gains(l, static_cast<Index>(t)) * s.d_rx[t].col(l);
            w_tx += gains(l, static_cast<Index>(t)) * s.d_tx[t].col(l);
        }
        g.aoa[l] = std::real(w_rx.dot(r_sum));
        g.aod[l] = std::real(w_tx.dot(r_sum));
    }
    return g;
}

void check_support(const std::vector<SupportEntry> &support, const char *where)
{
    if (support.empty())
        throw std::invalid_argument(std::string(where) + ": support must not be empty");
}

void check_dims(const SensingBlock &sensing, const Dictionary &dict)
{
    if (!(sensing.bs == dict.bs()) || !(sensing.ue == dict.ue()))
        throw std::invalid_argument("estimator: sensing and dictionary array geometries differ");
    if (sensing.frames() < 1)
        throw std::invalid_argument("estimator: at least one frame is required");
    if (static_cast<int>(sensing.phi.size()) != sensing.frames() ||
        static_cast<int>(sensing.beamformers.size()) != sensing.frames())
        throw std::invalid_argument("estimator: inconsistent sensing block");
}

std::vector<CVec> atoms_of(const std::vector<SupportEntry> &support, const ArrayGeometry &bs,
                           const ArrayGeometry &ue)
{
    std::vector<CVec> atoms;
    atoms.reserve(support.size());
    for (const SupportEntry &e : support)
        atoms.push_back(steering_atom(e.aoa(), e.aod(), bs, ue));
    return atoms;
}
} // namespace

// ---------------------------------------------------------------------------
// Channel estimation

std::vector<CVec> channel_residuals(const std::vector<SupportEntry> &support, const CMat &gains,
                                    std::span<const CVec> y, const SensingBlock &sensing)
{
    if (support.empty())
        return {y.begin(), y.end()};
    const SensedAtoms s = sense_support(support, offsets_of(support), sensing, false);
    return residuals_from(s.b, gains, y);
}

AngleGradient channel_gradient(const std::vector<SupportEntry> &support, const CMat &gains,
                               std::span<const CVec> residuals, const SensingBlock &sensing)
{
    if (support.empty())
        return {RVec(), RVec()};
    const SensedAtoms s = sense_support(support, offsets_of(support), sensing, true);
    return channel_gradient_core(s, gains, residuals, GradientForm::Exact);
}

ChannelFit perturb_channel(std::span<const CVec> y, const SensingBlock &sensing,
                           const std::vector<SupportEntry> &support, const SolverOptions &opts)
{
    check_support(support, "perturb_channel");
    if (static_cast<int>(y.size()) != sensing.frames())
        throw std::invalid_argument("perturb_channel: one measurement vector per frame is required");

    ChannelFit fit;
    Offsets x = offsets_of(support);

    auto objective = [&](const Offsets &o) {
        bool deficient = false;
        const SensedAtoms s = sense_support(support, o, sensing, false);
        const CMat gains = solve_gains(s.b, y, deficient);
        return deficient ? kInf : energy(residuals_from(s.b, gains, y));
    };
    auto direction = [&](const Offsets &o) {
        bool deficient = false;
        const SensedAtoms s = sense_support(support, o, sensing, true);
        const CMat gains = solve_gains(s.b, y, deficient);
        const AngleGradient g = channel_gradient_core(s, gains, residuals_from(s.b, gains, y), opts.gradient_form);
        return Offsets{g.aoa, g.aod};
    };

    if (opts.perturbation_enabled)
        x = bounded_descent(std::move(x), make_box(support), opts, objective, direction, fit.objective_history);

    const SensedAtoms s = sense_support(support, x, sensing, false);
    fit.gains = solve_gains(s.b, y, fit.rank_deficient);
    if (!opts.perturbation_enabled)
        fit.objective_history.push_back(energy(residuals_from(s.b, fit.gains, y)));
    fit.delta_aoa = x.aoa;
    fit.delta_aod = x.aod;
    return fit;
}

ChannelEstimate ppsomp(const SensingBlock &sensing, const Dictionary &dict, const SolverOptions &opts)
{
    opts.validate(dict);
    check_dims(sensing, dict);

    const int frames = sensing.frames();
    const Index dim = dict.psi().rows();
    const std::span<const CVec> y(sensing.y);

    ChannelEstimate est;
    est.gains = CMat(0, frames);
    est.h_hat.assign(frames, CVec::Zero(dim));

    const double total = energy(y);
    if (total == 0.0)
        return est;

    const std::vector<CMat> sensed = kernels::parallel::sense_dictionary(sensing.phi, dict.psi());
    std::vector<CVec> residuals(y.begin(), y.end());
    std::vector<bool> blocked(static_cast<std::size_t>(dict.columns()), false);
    double rel = 1.0;
    est.residual_history.push_back(rel);

    while (static_cast<int>(est.support.size()) < opts.k_max && rel > opts.epsilon)
    {
        const RVec scores = kernels::parallel::linear_scores(sensed, residuals);
        const Index j = kernels::argmax_excluding(scores, blocked);
        if (j < 0 || !(scores[j] > 0.0))
            break;
        blocked[static_cast<std::size_t>(j)] = true;

        std::vector<SupportEntry> candidate = est.support;
        candidate.push_back(make_support_entry(dict.grid(), dict.aoa_index(j), dict.aod_index(j)));

        bool deficient = false;
        solve_gains(sense_support(candidate, offsets_of(candidate), sensing, false).b, y, deficient);
        if (deficient)
        {
            est.rank_deficient = true;
            continue;
        }

        const ChannelFit fit = perturb_channel(y, sensing, candidate, opts);
        est.support = with_offsets(std::move(candidate), Offsets{fit.delta_aoa, fit.delta_aod});
        est.gains = fit.gains;
        residuals = channel_residuals(est.support, est.gains, y, sensing);
        rel = energy(residuals) / total;
        est.residual_history.push_back(rel);
    }

    const std::vector<CVec> atoms = atoms_of(est.support, dict.bs(), dict.ue());
    for (int t = 0; t < frames; ++t)
        for (std::size_t l = 0; l < atoms.size(); ++l)
            est.h_hat[t] += est.gains(static_cast<Index>(l), t) * atoms[l];
    return est;
}

CMat indirect_covariance(const ChannelEstimate &est)
{
    if (est.h_hat.empty())
        throw std::invalid_argument("indirect_covariance: estimate has no snapshots");
    const Index dim = est.h_hat.front().size();
    CMat R = CMat::Zero(dim, dim);
    for (const CVec &h : est.h_hat)
        R.noalias() += h * h.adjoint();
    return R / static_cast<double>(est.h_hat.size());
}

// ---------------------------------------------------------------------------
// Covariance estimation

std::vector<CMat> measurement_covariances(const SensingBlock &sensing)
{
    std::vector<CMat> out;
    out.reserve(sensing.y.size());
    for (const CVec &y : sensing.y)
        out.push_back(y * y.adjoint());
    return out;
}

namespace
{
// Per-frame pieces of the covariance fit at fixed angles: the cross gains and
// B^H E with E = R - B G B^H. With B P = Q U (thin, pivoted), G = P U^-1 S U^-H P^T
// and B^H E = P U^H (Q^H R - S Q^H), S = Q^H R Q, so E is never formed.
struct CovarianceFrame
{
    CMat gamma;
    CMat bh_e;
    bool deficient = false;
};

void mirror_upper(CMat &gamma)
{
    for (Index l = 0; l < gamma.rows(); ++l)
    {
        gamma(l, l) = std::real(gamma(l, l));
        for (Index q = l + 1; q < gamma.cols(); ++q)
            gamma(q, l) = std::conj(gamma(l, q));
    }
}

// R = V diag(lambda) V^H with the numerically zero eigenvalues dropped; the
// measurement covariances are rank one per frame, so products with R get cheap.
struct Factored
{
    const CMat *full = nullptr;
    CMat v;
    RVec lambda;
    double norm2 = 0.0;
};

Factored factor_hermitian(const CMat &R)
{
    Factored f;
    f.full = &R;
    f.norm2 = R.squaredNorm();
    const Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (R + R.adjoint()));
    const RVec &w = eig.eigenvalues();
    const double cutoff = 1e-13 * (w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
    std::vector<Index> keep;
    for (Index i = 0; i < w.size(); ++i)
        if (std::abs(w[i]) > cutoff)
            keep.push_back(i);
    f.v.resize(R.rows(), static_cast<Index>(keep.size()));
    f.lambda.resize(static_cast<Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
    {
        f.v.col(static_cast<Index>(i)) = eig.eigenvectors().col(keep[i]);
        f.lambda[static_cast<Index>(i)] = w[keep[i]];
    }
    return f;
}

std::vector<Factored> factor_all(std::span<const CMat> r)
{
    std::vector<Factored> out;
    out.reserve(r.size());
    for (const CMat &x : r)
        out.push_back(factor_hermitian(x));
    return out;
}

// With G = B^H B = L L^H and C = B^H V: Gamma = G^-1 C Lambda C^H G^-1 and
// B^H E = C Lambda (V^H - C^H G^-1 B^H).
CovarianceFrame covariance_frame(const CMat &B, const Factored &R, bool with_residual)
{
    CovarianceFrame out;
    const auto llt = gram_factor(B);
    if (!llt)
    {
        out.deficient = true;
        const CMat pinv = ridge_normal_inverse(B);
        out.gamma = pinv * *R.full * pinv.adjoint();
        mirror_upper(out.gamma);
        if (with_residual)
            out.bh_e = B.adjoint() * (*R.full - B * out.gamma * B.adjoint());
        return out;
    }

    const CMat C = B.adjoint() * R.v;            // k x r
    const CMat gc = llt->solve(C);               // G^-1 C
    out.gamma = gc * R.lambda.asDiagonal() * gc.adjoint();
    mirror_upper(out.gamma);

    if (with_residual)
    {
        const CMat cl = C * R.lambda.asDiagonal();
        out.bh_e = cl * (R.v.adjoint() - gc.adjoint() * B.adjoint());
    }
    return out;
}
} // namespace

CMat cross_gains(const CMat &sensed_atoms, const CMat &measurement_cov)
{
    return covariance_frame(sensed_atoms, factor_hermitian(measurement_cov), false).gamma;
}

namespace
{
std::vector<CMat> cov_residuals_from(const std::vector<CMat> &B, std::span<const CMat> gamma, std::span<const CMat> r_y)
{
    std::vector<CMat> out;
    out.reserve(r_y.size());
    for (std::size_t t = 0; t < r_y.size(); ++t)
        out.push_back(r_y[t] - B[t] * gamma[t] * B[t].adjoint());
    return out;
}

std::vector<CMat> all_cross_gains(const std::vector<CMat> &B, const std::vector<Factored> &r_y, bool &deficient)
{
    std::vector<CMat> gamma;
    gamma.reserve(B.size());
    for (std::size_t t = 0; t < B.size(); ++t)
    {
        CovarianceFrame f = covariance_frame(B[t], r_y[t], false);
        deficient = deficient || f.deficient;
        gamma.push_back(std::move(f.gamma));
    }
    return gamma;
}

// min over G of ||R - B G B^H||_F^2 = ||R||^2 - ||Q^H R Q||^2 with Q an orthonormal
// basis of range(B). Infinite when some B_t is rank deficient, which keeps the
// descent away from configurations where two atoms merge.
double projected_covariance_error(const std::vector<CMat> &B, const std::vector<Factored> &r_y)
{
    double e = 0.0;
    for (std::size_t t = 0; t < B.size(); ++t)
    {
        const auto llt = gram_factor(B[t]);
        if (!llt)
            return kInf;
        const CMat qv = llt->matrixL().solve(B[t].adjoint() * r_y[t].v); // Q^H V
        const CMat S = qv * r_y[t].lambda.asDiagonal() * qv.adjoint();
        e += std::max(0.0, r_y[t].norm2 - S.squaredNorm());
    }
    return e / static_cast<double>(B.size());
}

// d||E_t||^2 / dtheta_l = -4 Re{ (G_t B_t^H E_t D_t)_{ll} }, averaged over frames.
AngleGradient covariance_gradient_core(const SensedAtoms &s, std::span<const CMat> gamma,
                                       std::span<const CMat> bh_e)
{
    const Index k = gamma.front().rows();
    const std::size_t frames = bh_e.size();
    AngleGradient g{RVec::Zero(k), RVec::Zero(k)};
    for (std::size_t t = 0; t < frames; ++t)
    {
        const CMat m_rx = bh_e[t] * s.d_rx[t];
        const CMat m_tx = bh_e[t] * s.d_tx[t];
        for (Index l = 0; l < k; ++l)
        {
            g.aoa[l] -= 4.0 * std::real(gamma[t].row(l).dot(m_rx.col(l).conjugate()));
            g.aod[l] -= 4.0 * std::real(gamma[t].row(l).dot(m_tx.col(l).conjugate()));
        }
    }
    g.aoa /= static_cast<double>(frames);
    g.aod /= static_cast<double>(frames);
    return g;
}
} // namespace

std::vector<CMat> covariance_residuals(const std::vector<SupportEntry> &support,
                                       std::span<const CMat> cross_gains, std::span<const CMat> r_y,
                                       const SensingBlock &sensing)
{
    if (support.empty())
        return {r_y.begin(), r_y.end()};
    const SensedAtoms s = sense_support(support, offsets_of(support), sensing, false);
    return cov_residuals_from(s.b, cross_gains, r_y);
}

AngleGradient covariance_gradient(const std::vector<SupportEntry> &support, std::span<const CMat> cross_gains,
                                  std::span<const CMat> residual_covs, const SensingBlock &sensing)
{
    if (support.empty())
        return {RVec(), RVec()};
    const SensedAtoms s = sense_support(support, offsets_of(support), sensing, true);
    std::vector<CMat> bh_e;
    bh_e.reserve(residual_covs.size());
    for (std::size_t t = 0; t < residual_covs.size(); ++t)
        bh_e.push_back(s.b[t].adjoint() * residual_covs[t]);
    return covariance_gradient_core(s, cross_gains, bh_e);
}

CovarianceFit perturb_covariance(std::span<const CMat> r_y, const SensingBlock &sensing,
                                 const std::vector<SupportEntry> &support, const SolverOptions &opts)
{
    check_support(support, "perturb_covariance");
    if (static_cast<int>(r_y.size()) != sensing.frames())
        throw std::invalid_argument("perturb_covariance: one covariance per frame is required");

    CovarianceFit fit;
    Offsets x = offsets_of(support);

    const std::vector<Factored> factored = factor_all(r_y);
    auto objective = [&](const Offsets &o) {
        return projected_covariance_error(sense_support(support, o, sensing, false).b, factored);
    };
    auto direction = [&](const Offsets &o) {
        const SensedAtoms s = sense_support(support, o, sensing, true);
        std::vector<CMat> gamma, bh_e;
        gamma.reserve(r_y.size());
        bh_e.reserve(r_y.size());
        for (std::size_t t = 0; t < r_y.size(); ++t)
        {
            CovarianceFrame f = covariance_frame(s.b[t], factored[t], opts.gradient_form == GradientForm::Exact);
            gamma.push_back(std::move(f.gamma));
            bh_e.push_back(std::move(f.bh_e));
        }
        if (opts.gradient_form == GradientForm::SummedResidual)
        {
            const std::vector<CMat> residuals = cov_residuals_from(s.b, gamma, r_y);
            CMat summed = CMat::Zero(residuals.front().rows(), residuals.front().cols());
            for (const CMat &e : residuals)
                summed += e;
            for (std::size_t t = 0; t < r_y.size(); ++t)
                bh_e[t] = s.b[t].adjoint() * summed;
        }
        const AngleGradient g = covariance_gradient_core(s, gamma, bh_e);
        return Offsets{-g.aoa, -g.aod};
    };

    if (opts.perturbation_enabled)
        x = bounded_descent(std::move(x), make_box(support), opts, objective, direction, fit.objective_history);
    else
        fit.objective_history.push_back(objective(x));

    const SensedAtoms s = sense_support(support, x, sensing, false);
    fit.cross_gains = all_cross_gains(s.b, factored, fit.rank_deficient);
    fit.delta_aoa = x.aoa;
    fit.delta_aod = x.aod;
    return fit;
}

CMat synthesize_covariance(const std::vector<SupportEntry> &support, std::span<const CMat> cross_gains,
                           const ArrayGeometry &bs, const ArrayGeometry &ue)
{
    const Index dim = static_cast<Index>(bs.num_antennas()) * ue.num_antennas();
    if (support.empty() || cross_gains.empty())
        return CMat::Zero(dim, dim);
    const Index k = static_cast<Index>(support.size());
    CMat mean_gamma = CMat::Zero(k, k);
    for (const CMat &g : cross_gains)
        mean_gamma += g;
    mean_gamma /= static_cast<double>(cross_gains.size());

    CMat A(dim, k);
    const std::vector<CVec> atoms = atoms_of(support, bs, ue);
    for (Index l = 0; l < k; ++l)
        A.col(l) = atoms[l];
    CMat R = A * mean_gamma * A.adjoint();
    return 0.5 * (R + R.adjoint());
}

CovarianceEstimate ppcomp(const SensingBlock &sensing, const Dictionary &dict, const SolverOptions &opts)
{
    opts.validate(dict);
    check_dims(sensing, dict);

    const Index dim = dict.psi().rows();
    const std::vector<CMat> r_y = measurement_covariances(sensing);

    CovarianceEstimate est;
    est.r_hat = CMat::Zero(dim, dim);
    const double total = energy(std::span<const CMat>(r_y));
    if (total == 0.0)
        return est;

    const std::vector<CMat> sensed = kernels::parallel::sense_dictionary(sensing.phi, dict.psi());
    std::vector<CMat> residual_covs = r_y;
    std::vector<bool> blocked(static_cast<std::size_t>(dict.columns()), false);
    double rel = 1.0;
    est.residual_history.push_back(rel);

    while (static_cast<int>(est.support.size()) < opts.k_max && rel > opts.epsilon)
    {
        const RVec scores = kernels::parallel::quadratic_scores(sensed, residual_covs);
        const Index j = kernels::argmax_excluding(scores, blocked);
        if (j < 0 || !(scores[j] > 0.0))
            break;
        blocked[static_cast<std::size_t>(j)] = true;

        std::vector<SupportEntry> candidate = est.support;
        candidate.push_back(make_support_entry(dict.grid(), dict.aoa_index(j), dict.aod_index(j)));

        bool deficient = false;
        for (const CMat &B : sense_support(candidate, offsets_of(candidate), sensing, false).b)
            if (!gram_factor(B))
                deficient = true;
        if (deficient)
        {
            est.rank_deficient = true;
            continue;
        }

        CovarianceFit fit = perturb_covariance(r_y, sensing, candidate, opts);
        est.support = with_offsets(std::move(candidate), Offsets{fit.delta_aoa, fit.delta_aod});
        est.cross_gains = std::move(fit.cross_gains);
        residual_covs = covariance_residuals(est.support, est.cross_gains, r_y, sensing);
        rel = energy(std::span<const CMat>(residual_covs)) / total;
        est.residual_history.push_back(rel);
    }

    est.r_hat = synthesize_covariance(est.support, est.cross_gains, dict.bs(), dict.ue());
    return est;
}
} // namespace offgrid
