#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace sslsurv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class KernelFamily { gaussian };

//! Smooth symmetric density used for all kernel smoothing.
class Kernel
{
public:
    explicit Kernel(KernelFamily family = KernelFamily::gaussian)
        : family_(family)
    {}

    KernelFamily family() const noexcept { return family_; }

    double evaluate(double u) const;
    //! Cumulative of the kernel, F(u) = int_{-inf}^u K.
    double antiderivative(double u) const;

private:
    KernelFamily family_;
};

//! h^{-1} K(u / h). Throws invalid_argument for non-finite u or h <= 0.
double kernel_density(const Kernel& kernel, double u, double h);

enum class LinkFamily { logistic, probit };

//! Known link g of P(T <= t | Z) = g(h(t) + beta'Z).
class Link
{
public:
    explicit Link(LinkFamily family = LinkFamily::probit) : family_(family) {}

    LinkFamily family() const noexcept { return family_; }

    double g(double x) const;
    double gprime(double x) const;
    //! g^{-1}(prob) for prob in (0, 1).
    double inverse(double prob) const;
    //! Elementwise g and g' sharing one exponential per element; agrees with
    //! the scalar forms to a few ulp.
    void evaluate(const Eigen::ArrayXd& x, Eigen::ArrayXd& g,
                  Eigen::ArrayXd& gprime) const;

private:
    LinkFamily family_;
};

std::string to_string(LinkFamily family);
LinkFamily link_from_string(const std::string& name);

enum class BandwidthRule { automatic, manual };

struct BandwidthConfig
{
    double h_supervised = 0.0;
    std::vector<double> h_score; // one per surrogate
    BandwidthRule rule = BandwidthRule::automatic;

    void validate() const;
};

class Dataset;

//! Bandwidths from the simulation-study rules:
//!   h  = sd(C over labeled) * (sum delta)^-0.25
//!   h'_k = sd(B'Z over all subjects) * (sum_i Delta_ki)^-0.3
BandwidthConfig auto_bandwidths(const Dataset& data, const Vector& beta_dir);

// -- small utilities ---------------------------------------------------------

//! sign with sign(0) = 0
inline double sign(double x) noexcept
{
    return static_cast<double>((0.0 < x) - (x < 0.0));
}

//! Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> x);

//! Quantile by linear interpolation of order statistics,
//! position h = (n - 1) * prob (zero based).
double quantile_linear(std::vector<double> values, double prob);

} // namespace sslsurv
