#pragma once

#include "sslsurv/dataset.hpp"
#include "sslsurv/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sslsurv {

//! Normal mixture D N(mu_minus, sigma_minus^2) + (1 - D) N(mu_plus, sigma_plus^2),
//! D ~ Bernoulli(mix_prob).
struct MixtureParams
{
    double mu_minus = 0.0;
    double sigma_minus = 1.0;
    double mu_plus = 0.0;
    double sigma_plus = 1.0;
    double mix_prob = 0.5;
};

enum class ErrorScenario { A_low, B_high };

std::string to_string(ErrorScenario scenario);
ErrorScenario scenario_from_string(const std::string& name);

//! Surrogate error laws for the two built-in scenarios (K = 2).
std::vector<MixtureParams> scenario_mixtures(ErrorScenario scenario);

//! (0.7, 0.7, 0.7, -0.5, -0.5, -0.5, 0.3, 0.3, 0.3, 0)
Vector default_beta0();

struct SimulationSpec
{
    std::size_t n = 500;
    std::size_t N = 1000;
    double covariate_correlation = 0.2;
    ErrorScenario scenario = ErrorScenario::A_low;
    //! Overrides the scenario when non-empty; its size sets K.
    std::vector<MixtureParams> mixtures;
    Vector beta0 = default_beta0();
    double target_event_rate = 0.5;
    std::uint64_t seed = 1;

    std::size_t p() const { return static_cast<std::size_t>(beta0.size()); }
    std::vector<MixtureParams> error_laws() const;
    void validate() const;
};

//! Truth behind a simulated cohort. P(T <= t | Z) = Phi(3 log(t / 4) + beta0'Z).
struct GroundTruth
{
    Vector beta0;
    double censoring_upper = 0.0; // C ~ Uniform(0, a)
    std::uint64_t seed = 0;
    std::string scenario;
    LinkFamily link = LinkFamily::probit;

    static double h0(double t);
};

//! Upper limit a of Uniform(0, a) censoring giving P(T <= C) = target rate.
//! Bisection on a stratified Monte Carlo estimate (2e5 draws).
double calibrate_censoring(const SimulationSpec& spec);

//! P(T <= C) averaged over the Monte Carlo draws used by calibration.
double censoring_event_rate(const SimulationSpec& spec, double a);

//! Simulated cohort; the first n rows are labeled. Calibrates `a` unless
//! supplied.
std::pair<Dataset, GroundTruth> generate(const SimulationSpec& spec,
                                         std::optional<double> a = {});

//! Latent draws, exposed for property checks on the generator.
struct LatentDraws
{
    Matrix Z;
    Vector T;
    Vector C;
    Matrix Tsur; // raw surrogate times, N x K
};

LatentDraws generate_latent(const SimulationSpec& spec, double a);

} // namespace sslsurv
