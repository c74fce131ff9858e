#include "sslsurv/numerics.hpp"

#include "sslsurv/dataset.hpp"
#include "sslsurv/error.hpp"

#include "fastmath.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sslsurv {

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343819;

} // namespace

double Kernel::evaluate(double u) const
{
    return inv_sqrt_2pi * std::exp(-0.5 * u * u);
}

double Kernel::antiderivative(double u) const
{
    return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

double kernel_density(const Kernel& kernel, double u, double h)
{
    require(std::isfinite(u), ErrorKind::invalid_argument,
            "kernel_density: argument must be finite");
    require(std::isfinite(h) && h > 0.0, ErrorKind::invalid_argument,
            "kernel_density: bandwidth must be positive");
    return kernel.evaluate(u / h) / h;
}

double Link::g(double x) const
{
    switch (family_) {
    case LinkFamily::logistic:
        if (x >= 0.0) {
            return 1.0 / (1.0 + std::exp(-x));
        } else {
            const double e = std::exp(x);
            return e / (1.0 + e);
        }
    case LinkFamily::probit:
        return 0.5 * std::erfc(-x / std::numbers::sqrt2);
    }
    return 0.0;
}

double Link::gprime(double x) const
{
    switch (family_) {
    case LinkFamily::logistic: {
        const double e = std::exp(-std::abs(x));
        return e / ((1.0 + e) * (1.0 + e));
    }
    case LinkFamily::probit:
        return inv_sqrt_2pi * std::exp(-0.5 * x * x);
    }
    return 0.0;
}

double Link::inverse(double prob) const
{
    require(prob > 0.0 && prob < 1.0, ErrorKind::invalid_argument,
            "Link::inverse: probability must lie in (0, 1)");
    switch (family_) {
    case LinkFamily::logistic:
        return std::log(prob / (1.0 - prob));
    case LinkFamily::probit:
        return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * prob);
    }
    return 0.0;
}

void Link::evaluate(const Eigen::ArrayXd& x, Eigen::ArrayXd& g,
                    Eigen::ArrayXd& gprime) const
{
    const Eigen::Index n = x.size();
    g.resize(n);
    gprime.resize(n);
    const double* __restrict xs = x.data();
    double* __restrict gs = g.data();
    double* __restrict ps = gprime.data();
    if (family_ == LinkFamily::logistic) {
#pragma omp simd
        for (Eigen::Index i = 0; i < n; ++i) {
            detail::logistic_pair(xs[i], gs[i], ps[i]);
        }
    } else {
        // four independent strided chains per iteration hide the latency of
        // the Chebyshev recurrence
        const Eigen::Index q = n / 4;
#pragma omp simd
        for (Eigen::Index i = 0; i < q; ++i) {
            detail::probit_pair(xs[i], gs[i], ps[i]);
            detail::probit_pair(xs[i + q], gs[i + q], ps[i + q]);
            detail::probit_pair(xs[i + 2 * q], gs[i + 2 * q], ps[i + 2 * q]);
            detail::probit_pair(xs[i + 3 * q], gs[i + 3 * q], ps[i + 3 * q]);
        }
        for (Eigen::Index i = 4 * q; i < n; ++i) {
            detail::probit_pair(xs[i], gs[i], ps[i]);
        }
    }
}

std::string to_string(LinkFamily family)
{
    return family == LinkFamily::logistic ? "logistic" : "probit";
}

LinkFamily link_from_string(const std::string& name)
{
    if (name == "logistic") {
        return LinkFamily::logistic;
    }
    if (name == "probit") {
        return LinkFamily::probit;
    }
    fail(ErrorKind::invalid_argument, "unknown link '" + name + "'");
}

void BandwidthConfig::validate() const
{
    require(std::isfinite(h_supervised) && h_supervised > 0.0,
            ErrorKind::invalid_argument,
            "supervised bandwidth must be positive");
    for (double h : h_score) {
        require(std::isfinite(h) && h > 0.0, ErrorKind::invalid_argument,
                "score bandwidths must be positive");
    }
}

BandwidthConfig auto_bandwidths(const Dataset& data, const Vector& beta_dir)
{
    require(data.n() > 0, ErrorKind::degenerate_data,
            "auto_bandwidths: labeled subset is empty");
    require(beta_dir.size() == static_cast<Eigen::Index>(data.p()),
            ErrorKind::invalid_argument,
            "auto_bandwidths: direction has wrong dimension");

    std::vector<double> c_lab;
    double events = 0.0;
    c_lab.reserve(data.n());
    for (std::size_t i = 0; i < data.N(); ++i) {
        if (data.labeled(i)) {
            c_lab.push_back(data.C()(i));
            events += data.delta(i);
        }
    }
    require(events > 0.0, ErrorKind::degenerate_data,
            "auto_bandwidths: no labeled events");

    BandwidthConfig bw;
    bw.rule = BandwidthRule::automatic;
    bw.h_supervised = sample_sd(c_lab) * std::pow(events, -0.25);

    const Vector index = data.Z() * beta_dir;
    const double sd_index =
        sample_sd(std::span<const double>(index.data(), index.size()));
    bw.h_score.resize(data.K());
    for (std::size_t k = 0; k < data.K(); ++k) {
        const double count = data.D().col(k).cast<double>().sum();
        require(count > 0.0, ErrorKind::degenerate_data,
                "auto_bandwidths: surrogate " + std::to_string(k + 1) +
                    " has no observed events");
        bw.h_score[k] = sd_index * std::pow(count, -0.3);
    }
    bw.validate();
    return bw;
}

double sample_sd(std::span<const double> x)
{
    const std::size_t n = x.size();
    if (n < 2) {
        return 0.0;
    }
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double quantile_linear(std::vector<double> values, double prob)
{
    require(!values.empty(), ErrorKind::invalid_argument,
            "quantile of empty sample");
    require(prob >= 0.0 && prob <= 1.0, ErrorKind::invalid_argument,
            "quantile probability outside [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = prob * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

} // namespace sslsurv
