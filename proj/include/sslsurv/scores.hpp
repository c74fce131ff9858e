#pragma once

#include "sslsurv/dataset.hpp"
#include "sslsurv/numerics.hpp"

#include <vector>

namespace sslsurv {

//! Weighted empirical survival of follow-up, G(t) = sum_i w_i I(C_i >= t) / sum_i w_i.
class CensoringSurvival
{
public:
    CensoringSurvival() = default;
    explicit CensoringSurvival(const Vector& C, const Vector& weights = Vector());

    double evaluate(double t) const;
    double operator()(double t) const { return evaluate(t); }

private:
    std::vector<double> sorted_;
    std::vector<double> tail_weight_; // tail_weight_[i] = sum of weights at sorted_[i..]
    double total_ = 1.0;
};

CensoringSurvival fit_censoring(const Dataset& data, const Vector& weights = Vector());

//! What to do with an event whose censoring survival falls below the floor.
enum class IpcwGuard {
    //! drop it, i.e. compare surrogate times truncated at the point where
    //! G drops below the floor
    truncate,
    //! raise ipcw_singularity
    error,
};

struct ScoreOptions
{
    double ipcw_floor = 0.01;
    IpcwGuard guard = IpcwGuard::truncate;
};

//! Kernel-smoothed IPCW rank correlation score of surrogate k at direction
//! Bdir (unit norm), a ratio of double sums over ordered pairs i != j:
//!   sum (Z_i - Z_j) K_h(B'Z_i - B'Z_j) I(X_ki < X_kj) D_ki / G(X_ki)^2
//!   ---------------------------------------------------------------
//!            sum I(X_ki < X_kj) D_ki / G(X_ki)^2
//! With weights V each pair term is multiplied by V_i V_j.
//! The optional `denominator` receives the pair-weight total.
Vector smoothed_score(const Dataset& data, std::size_t k, const Vector& Bdir,
                      const Kernel& kernel, double h, const CensoringSurvival& G,
                      const Vector& weights = Vector(),
                      const ScoreOptions& opts = {}, double* denominator = nullptr);

struct ScoreBundle
{
    Vector S;                       // stacked scores, length K p
    Vector Q;                       // normalized rank correlation per surrogate
    std::vector<double> denominators;
    std::vector<double> bandwidths;
};

//! Scores for every surrogate with a shared G fitted with the same weights.
ScoreBundle stacked_score(const Dataset& data, const Vector& Bdir,
                          const Kernel& kernel, const BandwidthConfig& bw,
                          const Vector& weights = Vector(),
                          const ScoreOptions& opts = {});

struct RankCorrelation
{
    double raw = 0.0;        // N^-2 sum I(b'Z_i > b'Z_j) I(X_ki < X_kj) D_ki / G^2
    double normalized = 0.0; // same numerator over the indicator-only denominator
};

RankCorrelation rank_correlation(const Dataset& data, std::size_t k,
                                 const Vector& beta, const CensoringSurvival& G,
                                 const Vector& weights = Vector(),
                                 const ScoreOptions& opts = {});

//! Sum over surrogates of the normalized rank correlation, G fitted on `data`.
double aggregated_rank_correlation(const Dataset& data, const Vector& beta,
                                   const ScoreOptions& opts = {});

} // namespace sslsurv
