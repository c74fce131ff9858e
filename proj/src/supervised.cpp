#include "sslsurv/supervised.hpp"

#include "fastmath.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sslsurv {

double ThresholdConfig::lambda_delta_for(std::size_t n) const
{
    if (lambda_delta) {
        require(*lambda_delta > 0.0, ErrorKind::invalid_argument,
                "lambda_delta must be positive");
        return *lambda_delta;
    }
    require(n > 0, ErrorKind::invalid_argument, "lambda_delta: n must be positive");
    return std::pow(static_cast<double>(n), -0.25);
}

SupervisedSolver::SupervisedSolver(const Dataset& data, const Link& link,
                                   const Kernel& kernel,
                                   const BandwidthConfig& bw,
                                   SupervisedOptions opts)
    : link_(link), opts_(std::move(opts))
{
    bw.validate();
    const auto& rows = data.labeled_rows();
    const std::size_t n = rows.size();
    const std::size_t p = data.p();
    require(n > 0, ErrorKind::degenerate_data, "no labeled subjects");
    require(p >= 1, ErrorKind::invalid_argument, "need at least one covariate");

    delta_.resize(n);
    Z_.resize(n, p);
    std::vector<double> c(n);
    std::size_t events = 0;
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = rows[r];
        delta_(r) = data.delta(i);
        events += static_cast<std::size_t>(data.delta(i));
        Z_.row(r) = data.Z().row(i);
        c[r] = data.C()(i);
    }
    require(events > 0 && events < n, ErrorKind::degenerate_data,
            "labeled current status is constant (all delta equal)");

    grid_ = c;
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
    knot_of_.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        knot_of_[r] = static_cast<std::size_t>(
            std::lower_bound(grid_.begin(), grid_.end(), c[r]) - grid_.begin());
    }
    const std::size_t M = grid_.size();
    kernel_.resize(M, n);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t r = 0; r < n; ++r) {
            kernel_(m, r) = kernel_density(kernel, c[r] - grid_[m], bw.h_supervised);
        }
    }
}

namespace {

struct ProbitPair
{
    void operator()(double x, double& g, double& gp) const { detail::probit_pair(x, g, gp); }
};

struct LogisticPair
{
    void operator()(double x, double& g, double& gp) const { detail::logistic_pair(x, g, gp); }
};

// f = sum w (delta - g(h + eta)), fp = sum w g'(h + eta); optionally w g'
template <class Pair>
void knot_sums(const double* __restrict w, const double* __restrict eta,
               const double* __restrict delta, double h, Eigen::Index n, double& f,
               double& fp, double* __restrict wgp)
{
    const Pair pair;
    double sf = 0.0;
    double sp = 0.0;
    if (wgp) {
#pragma omp simd reduction(+ : sf, sp)
        for (Eigen::Index r = 0; r < n; ++r) {
            double g;
            double gp;
            pair(h + eta[r], g, gp);
            sf += w[r] * (delta[r] - g);
            sp += w[r] * gp;
            wgp[r] = w[r] * gp;
        }
    } else {
#pragma omp simd reduction(+ : sf, sp)
        for (Eigen::Index r = 0; r < n; ++r) {
            double g;
            double gp;
            pair(h + eta[r], g, gp);
            sf += w[r] * (delta[r] - g);
            sp += w[r] * gp;
        }
    }
    f = sf;
    fp = sp;
}

} // namespace

SupervisedSolver::HSolve SupervisedSolver::solve_h(const RowMatrix& kv,
                                                   const Matrix& Zc,
                                                   const Vector& eta,
                                                   const Vector& h0,
                                                   bool want_derivative) const
{
    const std::size_t M = grid_.size();
    const auto n = static_cast<Eigen::Index>(this->n());
    const std::size_t p = this->p();
    const double bound = opts_.h_clamp;
    const double inner_tol = opts_.tolerance * 1e-3;
    const auto sums = link_.family() == LinkFamily::probit ? &knot_sums<ProbitPair>
                                                           : &knot_sums<LogisticPair>;

    HSolve out{Vector(M), Matrix::Zero(M, p), 0.0, {}};
    Vector wgp(n);
    double* dst = want_derivative ? wgp.data() : nullptr;
    for (std::size_t m = 0; m < M; ++m) {
        const double* w = kv.row(static_cast<Eigen::Index>(m)).data();
        double total = 0.0;
        for (Eigen::Index r = 0; r < n; ++r) {
            total += w[r];
        }
        double h = std::clamp(h0(m), -bound, bound);
        double lo = -bound;
        double hi = bound;
        double f = 0.0;
        double fp = 0.0;
        bool fresh = false; // f and fp belong to the current h
        for (int it = 0; it < 100; ++it) {
            sums(w, eta.data(), delta_.data(), h, n, f, fp, dst);
            fresh = true;
            if (std::abs(f) <= inner_tol * total) {
                break;
            }
            if (f > 0.0) {
                lo = h;
            } else {
                hi = h;
            }
            double next = fp > 0.0 ? h + f / fp : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) {
                next = 0.5 * (lo + hi);
            }
            fresh = next == h;
            const bool stalled = std::abs(next - h) <= 1e-15 * (1.0 + std::abs(h));
            h = next;
            if (stalled) {
                break;
            }
        }
        if (!fresh) {
            sums(w, eta.data(), delta_.data(), h, n, f, fp, dst);
        }
        out.h(m) = h;

        const bool at_bound = (h <= -bound + 1e-9 && f < 0.0) ||
                              (h >= bound - 1e-9 && f > 0.0);
        if (at_bound) {
            out.clamped.push_back(m);
            continue;
        }
        out.residual = std::max(out.residual, std::abs(f));
        if (want_derivative && fp > 0.0) {
            // dh/dbeta = -sum w g' Z / sum w g'
            out.dh.row(m).noalias() = -(Zc.transpose() * wgp).transpose() / fp;
        }
    }
    return out;
}

Eigen::ArrayXd SupervisedSolver::row_index(const Vector& eta, const Vector& h) const
{
    Eigen::ArrayXd x(eta.size());
    for (Eigen::Index r = 0; r < eta.size(); ++r) {
        x(r) = h(knot_of_[r]) + eta(r);
    }
    return x;
}

Vector SupervisedSolver::beta_block(const Matrix& Zc, const Vector& v, const Vector& eta,
                                    const Vector& h) const
{
    Eigen::ArrayXd g;
    Eigen::ArrayXd gp;
    link_.evaluate(row_index(eta, h), g, gp);
    return Zc.transpose() * (v.array() * (delta_.array() - g)).matrix();
}

SupervisedFit SupervisedSolver::fit(const Vector& weights,
                                    const SupervisedFit* warm_start) const
{
    const std::size_t n = this->n();
    const std::size_t p = this->p();
    const std::size_t M = grid_.size();

    Vector v = weights.size() == 0 ? Vector::Ones(n) : weights;
    require(static_cast<std::size_t>(v.size()) == n, ErrorKind::invalid_argument,
            "perturbation weights must have one entry per labeled row");
    for (Eigen::Index r = 0; r < v.size(); ++r) {
        require(std::isfinite(v(r)) && v(r) > 0.0, ErrorKind::invalid_argument,
                "perturbation weights must be positive");
    }
    const double total = v.sum();

    RowMatrix kv = kernel_;
    kv.array().rowwise() *= v.transpose().array();

    // internally h is carried on the centered scale h + beta'Zbar
    const Eigen::RowVectorXd zbar = (v.transpose() * Z_) / total;
    const Matrix Zc = Z_.rowwise() - zbar;

    Vector beta = Vector::Zero(p);
    Vector h0(M);
    if (warm_start && warm_start->beta.size() == static_cast<Eigen::Index>(p) &&
        warm_start->h_grid.size() == M) {
        beta = warm_start->beta;
        const double shift = zbar.dot(beta);
        for (std::size_t m = 0; m < M; ++m) {
            h0(m) = warm_start->h_grid[m] + shift;
        }
    } else {
        for (std::size_t m = 0; m < M; ++m) {
            double num = 0.0;
            double den = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                num += kv(m, r) * delta_(r);
                den += kv(m, r);
            }
            const double local = den > 0.0 ? num / den : 0.5;
            h0(m) = link_.inverse(std::clamp(local, 0.01, 0.99));
        }
    }

    Vector eta = Zc * beta;
    HSolve hs = solve_h(kv, Zc, eta, h0, true);
    Vector F = beta_block(Zc, v, eta, hs.h) / total;

    SupervisedFit out;
    int sweep = 0;
    bool converged = false;
    for (; sweep < opts_.max_sweeps; ++sweep) {
        const double resid = std::max(F.lpNorm<Eigen::Infinity>(), hs.residual / total);
        if (resid < opts_.tolerance) {
            converged = true;
            break;
        }
        // profile Jacobian of the beta block with h = h(beta)
        Eigen::ArrayXd g;
        Eigen::ArrayXd gp;
        link_.evaluate(row_index(eta, hs.h), g, gp);
        Matrix A = Zc;
        for (std::size_t r = 0; r < n; ++r) {
            A.row(static_cast<Eigen::Index>(r)) += hs.dh.row(knot_of_[r]);
        }
        const Matrix J =
            -(Zc.transpose() * ((v.array() * gp).matrix().asDiagonal() * A)) / total;
        const Vector step = J.colPivHouseholderQr().solve(-F);

        const double norm0 = F.norm();
        double scale = 1.0;
        bool accepted = false;
        Vector beta_try;
        HSolve hs_try;
        Vector F_try;
        Vector eta_try;
        for (int halving = 0; halving <= opts_.max_halvings; ++halving) {
            beta_try = beta + scale * step;
            eta_try = Zc * beta_try;
            // first-order prediction of the profiled h as the starting point
            hs_try = solve_h(kv, Zc, eta_try, hs.h + hs.dh * (scale * step), true);
            F_try = beta_block(Zc, v, eta_try, hs_try.h) / total;
            if (F_try.allFinite() && F_try.norm() < norm0) {
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            // a nearly singular profile Jacobian (few labeled rows per knot)
            // makes the Newton step useless; fall back to damped
            // Levenberg-Marquardt steps, which tend to the gradient direction
            const Matrix JtJ = J.transpose() * J;
            const Vector grad = J.transpose() * F;
            double mu = 1e-8 * std::max(JtJ.diagonal().maxCoeff(), 1e-300);
            for (int attempt = 0; attempt < 40 && !accepted; ++attempt, mu *= 4.0) {
                Matrix damped = JtJ;
                damped.diagonal().array() += mu;
                const Vector lm = damped.llt().solve(-grad);
                beta_try = beta + lm;
                eta_try = Zc * beta_try;
                hs_try = solve_h(kv, Zc, eta_try, hs.h + hs.dh * lm, true);
                F_try = beta_block(Zc, v, eta_try, hs_try.h) / total;
                accepted = F_try.allFinite() && F_try.norm() < norm0;
            }
        }
        if (!accepted) {
            // no descent available at machine precision; stop here
            break;
        }
        beta = std::move(beta_try);
        eta = std::move(eta_try);
        hs = std::move(hs_try);
        F = std::move(F_try);
    }

    out.beta = beta;
    out.t_grid = grid_;
    const Vector h_out = hs.h.array() - zbar.dot(beta);
    out.h_grid.assign(h_out.data(), h_out.data() + M);
    out.beta_residual = F.lpNorm<Eigen::Infinity>();
    out.h_residual = hs.residual / total;
    out.residual_norm = std::max(out.beta_residual, out.h_residual);
    out.converged = converged || out.residual_norm < opts_.tolerance;
    out.iterations = sweep;
    out.clamped_knots = hs.clamped;
    const double lambda = opts_.threshold.lambda_delta_for(n);
    for (std::size_t j = 0; j < p; ++j) {
        if (std::abs(beta(j)) > lambda) {
            out.support.push_back(j);
        }
    }
    if (!out.converged && opts_.throw_on_nonconvergence) {
        std::ostringstream msg;
        msg << "supervised fit did not converge after " << sweep
            << " sweeps (residual " << out.residual_norm << ")";
        throw SupervisedNonConvergence(msg.str(), out);
    }
    return out;
}

SupervisedFit fit_supervised(const Dataset& data, const Link& link,
                             const Kernel& kernel, const BandwidthConfig& bw,
                             const SupervisedOptions& opts)
{
    return SupervisedSolver(data, link, kernel, bw, opts).fit();
}

SupervisedFit fit_supervised_perturbed(const Dataset& data, const Link& link,
                                       const Kernel& kernel,
                                       const BandwidthConfig& bw,
                                       const Vector& V,
                                       const SupervisedOptions& opts)
{
    return SupervisedSolver(data, link, kernel, bw, opts).fit(V);
}

std::vector<std::size_t> recover_support(const SupervisedFit& fit,
                                         const ThresholdConfig& config,
                                         std::size_t n)
{
    const double lambda = config.lambda_delta_for(n);
    std::vector<std::size_t> support;
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
        if (std::abs(fit.beta(j)) > lambda) {
            support.push_back(static_cast<std::size_t>(j));
        }
    }
    require(!support.empty(), ErrorKind::degenerate_support,
            "support recovery: no coefficient exceeds lambda_delta");
    return support;
}

std::vector<double> isotonic_projection(const std::vector<double>& values)
{
    // blocks of (mean, size)
    std::vector<double> mean;
    std::vector<std::size_t> size;
    for (double v : values) {
        mean.push_back(v);
        size.push_back(1);
        while (mean.size() > 1 && mean[mean.size() - 2] > mean.back()) {
            const std::size_t s1 = size[size.size() - 2];
            const std::size_t s2 = size.back();
            const double merged =
                (mean[mean.size() - 2] * static_cast<double>(s1) +
                 mean.back() * static_cast<double>(s2)) /
                static_cast<double>(s1 + s2);
            mean.pop_back();
            size.pop_back();
            mean.back() = merged;
            size.back() = s1 + s2;
        }
    }
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t b = 0; b < mean.size(); ++b) {
        out.insert(out.end(), size[b], mean[b]);
    }
    return out;
}

double predict_risk(const SupervisedFit& fit, const Link& link, double t,
                    const Vector& z, bool isotonic)
{
    require(!fit.t_grid.empty() && fit.t_grid.size() == fit.h_grid.size(),
            ErrorKind::invalid_argument, "predict_risk: fit has no h grid");
    require(z.size() == fit.beta.size(), ErrorKind::invalid_argument,
            "predict_risk: covariate dimension mismatch");
    require(t >= fit.t_grid.front() && t <= fit.t_grid.back(), ErrorKind::range,
            "predict_risk: t outside the fitted grid");
    const std::vector<double> h = isotonic ? isotonic_projection(fit.h_grid) : fit.h_grid;
    const auto& grid = fit.t_grid;
    const auto it = std::lower_bound(grid.begin(), grid.end(), t);
    const auto hi = static_cast<std::size_t>(it - grid.begin());
    double ht = 0.0;
    if (grid[hi] == t) {
        ht = h[hi];
    } else {
        const std::size_t lo = hi - 1;
        const double frac = (t - grid[lo]) / (grid[hi] - grid[lo]);
        ht = h[lo] + frac * (h[hi] - h[lo]);
    }
    return link.g(ht + fit.beta.dot(z));
}

} // namespace sslsurv
