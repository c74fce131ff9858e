#pragma once

#include "sslsurv/dataset.hpp"
#include "sslsurv/error.hpp"
#include "sslsurv/numerics.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace sslsurv {

//! Labeled-data estimate (beta_delta, h) of the transformation model.
struct SupervisedFit
{
    Vector beta;
    std::vector<double> t_grid; // distinct labeled follow-up times, ascending
    std::vector<double> h_grid; // h estimate at each t_grid knot
    std::vector<std::size_t> support; // zero-based {j : |beta_j| > lambda_delta}
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;       // max of the two block residuals
    double beta_residual = 0.0;       // sup-norm of the mean-scaled beta block
    double h_residual = 0.0;          // sup-norm of the mean-scaled h block
    std::vector<std::size_t> clamped_knots;
};

struct ThresholdConfig
{
    //! Defaults to n^{-1/4} when unset.
    std::optional<double> lambda_delta;
    //! Candidate soft-thresholding levels; empty means the default CV grid.
    std::vector<double> lambda_soft_grid;

    double lambda_delta_for(std::size_t n) const;
};

struct SupervisedOptions
{
    double tolerance = 1e-8;
    int max_sweeps = 200;
    double h_clamp = 15.0;
    int max_halvings = 30;
    bool throw_on_nonconvergence = true;
    ThresholdConfig threshold;
};

//! Raised when the estimating equations are not solved within max_sweeps;
//! carries the last iterate.
class SupervisedNonConvergence : public Error
{
public:
    SupervisedNonConvergence(const std::string& what, SupervisedFit last)
        : Error(ErrorKind::non_convergence, what), last_(std::move(last))
    {}

    const SupervisedFit& last_fit() const noexcept { return last_; }

private:
    SupervisedFit last_;
};

//! Solves
//!   sum_i V_i (Z_i - Zbar) [delta_i - g{h(C_i) + beta'Z_i}] = 0
//!   sum_i V_i K_h(C_i - t)[delta_i - g{h(t) + beta'Z_i}] = 0,  t in grid
//! over the labeled rows, Zbar the V-weighted labeled mean. Centering makes
//! the fit equivariant under covariate shifts (h absorbs any intercept).
//! The kernel matrix is built once so repeated weighted fits (perturbation
//! resampling) share it.
class SupervisedSolver
{
public:
    SupervisedSolver(const Dataset& data, const Link& link, const Kernel& kernel,
                     const BandwidthConfig& bw, SupervisedOptions opts = {});

    //! weights: one positive entry per labeled row (row order); empty = all ones.
    SupervisedFit fit(const Vector& weights = Vector(),
                      const SupervisedFit* warm_start = nullptr) const;

    std::size_t n() const noexcept { return static_cast<std::size_t>(delta_.size()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(Z_.cols()); }
    const std::vector<double>& grid() const noexcept { return grid_; }

private:
    using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    struct HSolve
    {
        Vector h;
        Matrix dh;      // M x p, derivative of h(t_m) in beta
        double residual = 0.0;
        std::vector<std::size_t> clamped;
    };

    HSolve solve_h(const RowMatrix& kv, const Matrix& Zc, const Vector& eta, const Vector& h0,
                   bool want_derivative) const;
    Vector beta_block(const Matrix& Zc, const Vector& v, const Vector& eta,
                      const Vector& h) const;
    //! h(C_i) + eta_i for every labeled row
    Eigen::ArrayXd row_index(const Vector& eta, const Vector& h) const;

    Link link_;
    SupervisedOptions opts_;
    Vector delta_;
    Matrix Z_;
    std::vector<double> grid_;
    std::vector<std::size_t> knot_of_; // grid index of each labeled row
    RowMatrix kernel_;                 // M x n, K_h(C_i - t_m)
};

SupervisedFit fit_supervised(const Dataset& data, const Link& link,
                             const Kernel& kernel, const BandwidthConfig& bw,
                             const SupervisedOptions& opts = {});

//! Each summand multiplied by V_i; V has one entry per labeled row.
SupervisedFit fit_supervised_perturbed(const Dataset& data, const Link& link,
                                       const Kernel& kernel,
                                       const BandwidthConfig& bw,
                                       const Vector& V,
                                       const SupervisedOptions& opts = {});

//! {j : |beta_j| > lambda_delta}; throws degenerate_support when empty.
std::vector<std::size_t> recover_support(const SupervisedFit& fit,
                                         const ThresholdConfig& config,
                                         std::size_t n);

//! g(h(t) + beta'z), h linearly interpolated on the knots. With `isotonic`
//! the knot values are first projected onto nondecreasing sequences.
double predict_risk(const SupervisedFit& fit, const Link& link, double t,
                    const Vector& z, bool isotonic = false);

//! Pool-adjacent-violators projection onto nondecreasing sequences.
std::vector<double> isotonic_projection(const std::vector<double>& values);

} // namespace sslsurv
