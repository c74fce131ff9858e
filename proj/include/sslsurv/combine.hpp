#pragma once

#include "sslsurv/dataset.hpp"
#include "sslsurv/numerics.hpp"
#include "sslsurv/scores.hpp"
#include "sslsurv/supervised.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace sslsurv {

enum class ProjectionKind {
    drop_j,        // every surrogate block without coordinate j
    keep_k_drop_j, // block k only, without coordinate j
};

//! 0/1 selection of stacked score coordinates. Indices are zero-based.
struct Projection
{
    ProjectionKind kind = ProjectionKind::drop_j;
    std::size_t j = 0;
    std::optional<std::size_t> k;
    Matrix matrix; // rows = retained coordinates, cols = K p
};

//! drop_j: K(p-1) x Kp. keep_k_drop_j: (p-1) x Kp. Throws invalid_argument
//! for out-of-range indices.
Projection build_projection(ProjectionKind kind, std::size_t p, std::size_t K,
                            std::size_t j, std::optional<std::size_t> k = {});

//! Projections averaged for a regime: {P_j : j in support} when comparable,
//! {P_kj : k, j in support} when the unlabeled set is large.
std::vector<Projection> regime_projections(Regime regime, std::size_t p,
                                           std::size_t K,
                                           const std::vector<std::size_t>& support);

struct PerturbationDraw
{
    std::size_t b = 0;
    Vector V;          // perturbation weights over all N subjects (may be dropped)
    Vector beta_delta; // perturbed supervised estimate
    Vector score;      // perturbed stacked score at the perturbed direction
    Vector beta_ssl;   // filled once combination weights exist
    bool ok = true;
};

struct PerturbationOptions
{
    std::size_t B = 200;
    std::uint64_t seed = 1;
    //! test hook: V == 1 for every draw
    bool unit_weights = false;
    bool keep_weights = true;
    double max_failure_fraction = 0.1;
    SupervisedOptions supervised;
    ScoreOptions score;
};

struct PerturbationResult
{
    std::vector<PerturbationDraw> draws; // one per b; failures have ok = false
    std::size_t failures = 0;

    std::vector<const PerturbationDraw*> usable() const;
};

//! Resampling with iid Exp(1) weights (mean 1, variance 1); each b uses its
//! own random substream so draws do not depend on scheduling.
PerturbationResult run_perturbations(const Dataset& data, const Link& link,
                                     const Kernel& kernel,
                                     const BandwidthConfig& bw,
                                     const PerturbationOptions& opts,
                                     const SupervisedFit* warm_start = nullptr);

struct ProjectionSolution
{
    Projection projection;
    Matrix w;     // r x p, column j' regresses beta_{delta, j'} on P S
    Matrix W;     // P' w, Kp x p
    Eigen::Index rank = 0;
};

struct CombinationWeights
{
    Matrix W_comb; // Kp x p
    std::vector<ProjectionSolution> solutions;
    bool rank_deficient = false;
    std::size_t draws_used = 0;
};

//! Least-squares regression of the perturbed supervised estimates on the
//! projected perturbed scores (both centered over draws), solved by complete
//! orthogonal decomposition with relative threshold 1e-10, then averaged
//! over the projections.
CombinationWeights estimate_weights(const PerturbationResult& draws,
                                    const std::vector<Projection>& projections,
                                    const std::vector<std::size_t>& support);

struct SslFit
{
    Vector beta_ssl;
    Vector beta_delta;
    Regime regime = Regime::comparable;
    std::vector<Vector> replicates; // perturbed SSL estimates
    std::optional<Vector> beta_std;
    std::optional<double> lambda_soft_used;
};

//! beta_SSL = beta_delta - W_comb' S.
SslFit combine(const SupervisedFit& fit, const ScoreBundle& bundle,
               const CombinationWeights& W);

// -- draw cache ----------------------------------------------------------------

//! FNV-1a hash of the dataset's CSV text.
std::uint64_t dataset_hash(const Dataset& data);

std::filesystem::path draw_cache_path(const std::filesystem::path& dir,
                                      std::uint64_t data_hash, std::uint64_t seed,
                                      std::size_t B);
void save_draws(const PerturbationResult& result, const std::filesystem::path& path);
std::optional<PerturbationResult> load_draws(const std::filesystem::path& path);

} // namespace sslsurv
