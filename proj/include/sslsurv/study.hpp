#pragma once

#include "sslsurv/dataset.hpp"
#include "sslsurv/numerics.hpp"
#include "sslsurv/pipeline.hpp"
#include "sslsurv/simulate.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sslsurv {

//! Monte Carlo study over simulated cohorts.
struct StudyConfig
{
    ErrorScenario scenario = ErrorScenario::A_low;
    std::size_t n = 500;
    std::size_t N = 1000;
    std::size_t reps = 100;
    std::size_t B = 200;
    std::uint64_t seed = 1;
    RegimeConfig regime;
    std::optional<BandwidthConfig> bandwidths;
    ThresholdConfig threshold;
    double alpha = 0.05;
    double max_failure_fraction = 0.05;
    //! When set, metrics.csv, metrics.json and replicates.log are written here.
    std::optional<std::filesystem::path> output_dir;
    //! Called once per finished replicate (from a worker thread, serialized).
    std::function<void(std::size_t done, std::size_t total)> progress;

    void validate() const;
};

//! Outcome of one simulated cohort.
struct ReplicateRecord
{
    std::size_t rep = 0;
    std::uint64_t data_seed = 0;
    std::uint64_t fit_seed = 0;
    bool ok = false;
    std::string message;
    Regime regime = Regime::comparable;
    Vector beta_delta;
    Vector beta_ssl;
    Vector beta_std;  // zero when every coordinate is thresholded away
    Vector ase;       // sd of the std-transformed perturbations
    std::vector<bool> covered;
    double lambda_soft = 0.0;
};

struct MetricsRow
{
    std::size_t coord = 0; // one-based
    double bias_delta_x100 = 0.0;
    double bias_ssl_x100 = 0.0;
    double mse_delta = 0.0;
    double mse_ssl = 0.0;
    double re = 0.0;
    double ese = 0.0;
    double ase = 0.0;
    double covp = 0.0;
};

struct MetricsTable
{
    std::vector<MetricsRow> rows;
    std::size_t replicates_used = 0;
    std::size_t failures = 0;
    double censoring_upper = 0.0;
    Vector beta0;
    StudyConfig config;
    std::vector<ReplicateRecord> records;
};

//! Seeds for replicate r, derived by counter from the study seed.
std::uint64_t replicate_data_seed(std::uint64_t seed, std::size_t rep);
std::uint64_t replicate_fit_seed(std::uint64_t seed, std::size_t rep);

//! Fits one simulated cohort; never throws for per-replicate numerical
//! failures (they are reported in the record).
ReplicateRecord run_replicate(const StudyConfig& config, double censoring_upper,
                              std::size_t rep);

//! Aggregates replicate records into per-coordinate metrics.
MetricsTable summarize(const StudyConfig& config, const Vector& beta0,
                       double censoring_upper, std::vector<ReplicateRecord> records);

//! Runs every replicate (in parallel), aggregates deterministically and
//! writes the outputs. Aborts when more than 5% of replicates fail.
MetricsTable run_study(const StudyConfig& config);

std::string metrics_csv(const MetricsTable& table);
std::string replicate_log(const MetricsTable& table);
void write_study_outputs(const MetricsTable& table, const std::filesystem::path& dir);

} // namespace sslsurv
