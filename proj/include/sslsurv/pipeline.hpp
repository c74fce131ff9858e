#pragma once

#include "sslsurv/combine.hpp"
#include "sslsurv/dataset.hpp"
#include "sslsurv/inference.hpp"
#include "sslsurv/numerics.hpp"
#include "sslsurv/scores.hpp"
#include "sslsurv/supervised.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace sslsurv {

//! Everything needed to go from a cohort to beta_SSL with intervals.
struct FitConfig
{
    LinkFamily link = LinkFamily::probit;
    Kernel kernel;
    RegimeConfig regime;
    std::optional<BandwidthConfig> bandwidths; // automatic when unset
    ThresholdConfig threshold;
    SupervisedOptions supervised;
    ScoreOptions score;
    std::size_t B = 200;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    bool keep_weights = false;
    std::optional<std::filesystem::path> cache_dir;
};

struct FitResult
{
    Regime regime = Regime::comparable;
    BandwidthConfig bandwidths;
    SupervisedFit supervised;
    std::vector<std::size_t> support;
    ScoreBundle scores;
    PerturbationResult draws;
    CombinationWeights weights;
    SslFit ssl;
    CvResult cv;
    InferenceReport ssl_report;
    InferenceReport supervised_report;
    //! norm-preserving soft-thresholded perturbations (same lambda as beta_std)
    std::vector<Vector> std_replicates;
};

FitResult fit_ssl(const Dataset& data, const FitConfig& config);

} // namespace sslsurv
