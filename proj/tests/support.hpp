#pragma once

// Shared fixtures and literal (slow, obviously correct) reference
// implementations used as oracles by the unit and acceptance tests.

#include "sslsurv/dataset.hpp"
#include "sslsurv/numerics.hpp"
#include "sslsurv/supervised.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace sslsurv::testing {

inline double normal_pdf(double x)
{
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

//! Small random cohort: Z standard normal, C uniform on (0.5, 3.5), surrogate
//! times exponential with rate depending on Z, first n rows labeled.
inline Dataset random_cohort(std::uint64_t seed, std::size_t N, std::size_t n,
                             std::size_t p, std::size_t K)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Subject> rows(N);
    for (std::size_t i = 0; i < N; ++i) {
        Subject& s = rows[i];
        s.id = "s" + std::to_string(i + 1);
        s.labeled = i < n;
        s.Z.resize(static_cast<Eigen::Index>(p));
        for (std::size_t j = 0; j < p; ++j) {
            s.Z(j) = normal(rng);
        }
        s.C = 0.5 + 3.0 * unif(rng);
        const double lin = 0.8 * s.Z(0) - (p > 1 ? 0.5 * s.Z(1) : 0.0);
        const double T = -std::log(unif(rng)) * std::exp(-lin);
        if (s.labeled) {
            s.delta = T <= s.C ? 1 : 0;
        }
        s.X.resize(static_cast<Eigen::Index>(K));
        s.D.resize(K);
        for (std::size_t k = 0; k < K; ++k) {
            const double Tk = T * std::exp(0.3 * normal(rng));
            s.D[k] = Tk <= s.C ? 1 : 0;
            s.X(k) = s.D[k] ? Tk : s.C;
        }
    }
    return Dataset(rows);
}

//! G(t) = sum_i w_i I(C_i >= t) / sum_i w_i by direct summation.
inline double oracle_G(const Dataset& data, const Vector& w, double t)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < data.N(); ++i) {
        const double wi = w.size() ? w(i) : 1.0;
        den += wi;
        if (data.C()(i) >= t) {
            num += wi;
        }
    }
    return num / den;
}

//! Literal double loop over ordered pairs i != j of the smoothed score.
//! Contributors whose G falls below `floor` are dropped, as the default
//! truncating IPCW guard does.
inline Vector oracle_score(const Dataset& data, std::size_t k, const Vector& B,
                           double h, const Vector& w, double floor = 0.01)
{
    const std::size_t N = data.N();
    Vector num = Vector::Zero(static_cast<Eigen::Index>(data.p()));
    double den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) {
                continue;
            }
            const double Xi = data.X()(i, k);
            const double Xj = data.X()(j, k);
            if (!(Xi < Xj) || data.D()(i, k) != 1) {
                continue;
            }
            const double G = oracle_G(data, w, Xi);
            if (G < floor) {
                continue;
            }
            const double vv = (w.size() ? w(i) * w(j) : 1.0);
            const double ipcw = vv / (G * G);
            const Vector zi = data.Z().row(i).transpose();
            const Vector zj = data.Z().row(j).transpose();
            const double u = B.dot(zi) - B.dot(zj);
            num += (zi - zj) * (normal_pdf(u / h) / h) * ipcw;
            den += ipcw;
        }
    }
    return num / den;
}

struct OracleRankCorrelation
{
    double raw = 0.0;
    double normalized = 0.0;
};

inline OracleRankCorrelation oracle_rank_correlation(const Dataset& data, std::size_t k,
                                                     const Vector& beta, const Vector& w,
                                                     double floor = 0.01)
{
    const std::size_t N = data.N();
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            if (i == j) {
                continue;
            }
            const double Xi = data.X()(i, k);
            const double Xj = data.X()(j, k);
            if (!(Xi < Xj) || data.D()(i, k) != 1) {
                continue;
            }
            const double G = oracle_G(data, w, Xi);
            if (G < floor) {
                continue;
            }
            const double ipcw = (w.size() ? w(i) * w(j) : 1.0) / (G * G);
            den += ipcw;
            if (beta.dot(data.Z().row(i).transpose()) >
                beta.dot(data.Z().row(j).transpose())) {
                num += ipcw;
            }
        }
    }
    const double NN = static_cast<double>(N) * static_cast<double>(N);
    return {num / NN, num / den};
}

struct EquationResiduals
{
    double beta_block = 0.0; // sup-norm, divided by sum of weights
    double h_block = 0.0;    // sup-norm over knots, divided by sum of weights
};

//! Plugs (beta, h) into both estimating-equation blocks with the scalar
//! normal cdf and a directly evaluated Gaussian kernel; covariates in the
//! beta block are centered at their weighted labeled mean.
inline EquationResiduals oracle_residuals(const Dataset& data, const SupervisedFit& fit,
                                          double bandwidth, const Vector& V = Vector())
{
    const auto& rows = data.labeled_rows();
    const std::size_t n = rows.size();
    auto knot_value = [&](double c) {
        for (std::size_t m = 0; m < fit.t_grid.size(); ++m) {
            if (fit.t_grid[m] == c) {
                return fit.h_grid[m];
            }
        }
        return std::numeric_limits<double>::quiet_NaN();
    };
    double total = 0.0;
    Vector zbar = Vector::Zero(static_cast<Eigen::Index>(data.p()));
    for (std::size_t r = 0; r < n; ++r) {
        const double v = V.size() ? V(r) : 1.0;
        total += v;
        zbar += v * data.Z().row(rows[r]).transpose();
    }
    zbar /= total;
    Vector beta_eq = Vector::Zero(static_cast<Eigen::Index>(data.p()));
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t i = rows[r];
        const double v = V.size() ? V(r) : 1.0;
        const Vector z = data.Z().row(i).transpose();
        const double resid =
            data.delta(i) - normal_cdf(knot_value(data.C()(i)) + fit.beta.dot(z));
        beta_eq += v * (z - zbar) * resid;
    }
    EquationResiduals out;
    out.beta_block = beta_eq.lpNorm<Eigen::Infinity>() / total;
    for (std::size_t m = 0; m < fit.t_grid.size(); ++m) {
        double eq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t i = rows[r];
            const double v = V.size() ? V(r) : 1.0;
            const Vector z = data.Z().row(i).transpose();
            const double kern =
                normal_pdf((data.C()(i) - fit.t_grid[m]) / bandwidth) / bandwidth;
            eq += v * kern * (data.delta(i) - normal_cdf(fit.h_grid[m] + fit.beta.dot(z)));
        }
        out.h_block = std::max(out.h_block, std::abs(eq) / total);
    }
    return out;
}

inline double sample_mean(const std::vector<double>& x)
{
    double s = 0.0;
    for (double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

inline double sample_sd(const std::vector<double>& x)
{
    const double m = sample_mean(x);
    double s = 0.0;
    for (double v : x) {
        s += (v - m) * (v - m);
    }
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline double sample_median(std::vector<double> x)
{
    std::sort(x.begin(), x.end());
    const std::size_t m = x.size() / 2;
    return x.size() % 2 ? x[m] : 0.5 * (x[m - 1] + x[m]);
}

} // namespace sslsurv::testing
