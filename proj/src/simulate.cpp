#include "sslsurv/simulate.hpp"

#include "sslsurv/error.hpp"
#include "sslsurv/parallel.hpp"

#include <cmath>
#include <random>

namespace sslsurv {

namespace {

constexpr std::size_t calibration_draws = 200000;
constexpr double a_lower = 1e-6;
constexpr double a_upper = 1e6;

// T = 4 exp((eta + eps) / 3) with eta = -beta0'Z.
double event_time(double neg_index, double eps)
{
    return 4.0 * std::exp((neg_index + eps) / 3.0);
}

// Stratified draws of log(T / 4) * 3 = -beta0'Z + eps, which is normal with
// variance beta0' Sigma beta0 + 1.
std::vector<double> calibration_times(const SimulationSpec& spec)
{
    const double rho = spec.covariate_correlation;
    const Vector& b = spec.beta0;
    const double var_index = (1.0 - rho) * b.squaredNorm() + rho * b.sum() * b.sum();
    const double sd = std::sqrt(var_index + 1.0);

    auto gen = substream(spec.seed, 0xca1b);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Link probit(LinkFamily::probit);
    std::vector<double> times(calibration_draws);
    for (std::size_t i = 0; i < calibration_draws; ++i) {
        double u = (static_cast<double>(i) + unif(gen)) /
                   static_cast<double>(calibration_draws);
        u = std::clamp(u, 1e-300, 1.0 - 1e-16);
        times[i] = 4.0 * std::exp(sd * probit.inverse(u) / 3.0);
    }
    return times;
}

double rate_given_times(const std::vector<double>& times, double a)
{
    // P(T <= C | T) = (1 - T / a)_+ for C ~ Uniform(0, a)
    double acc = 0.0;
    for (double t : times) {
        if (t < a) {
            acc += 1.0 - t / a;
        }
    }
    return acc / static_cast<double>(times.size());
}

} // namespace

std::string to_string(ErrorScenario scenario)
{
    return scenario == ErrorScenario::A_low ? "A" : "B";
}

ErrorScenario scenario_from_string(const std::string& name)
{
    if (name == "A" || name == "a" || name == "A_low") {
        return ErrorScenario::A_low;
    }
    if (name == "B" || name == "b" || name == "B_high") {
        return ErrorScenario::B_high;
    }
    fail(ErrorKind::invalid_argument, "unknown scenario '" + name + "'");
}

std::vector<MixtureParams> scenario_mixtures(ErrorScenario scenario)
{
    if (scenario == ErrorScenario::A_low) {
        return {{0.2, 0.3, -0.1, 0.1, 0.5}, {0.0, 0.2, 0.3, 0.1, 0.5}};
    }
    return {{1.0, 1.5, -0.5, 0.5, 0.5}, {0.0, 1.0, 1.5, 0.5, 0.5}};
}

Vector default_beta0()
{
    Vector b(10);
    b << 0.7, 0.7, 0.7, -0.5, -0.5, -0.5, 0.3, 0.3, 0.3, 0.0;
    return b;
}

std::vector<MixtureParams> SimulationSpec::error_laws() const
{
    return mixtures.empty() ? scenario_mixtures(scenario) : mixtures;
}

void SimulationSpec::validate() const
{
    require(n >= 1 && N >= 1 && n <= N, ErrorKind::invalid_argument,
            "simulation: need 1 <= n <= N");
    require(beta0.size() >= 1, ErrorKind::invalid_argument,
            "simulation: beta0 must be nonempty");
    require(covariate_correlation >= 0.0 && covariate_correlation < 1.0,
            ErrorKind::invalid_argument,
            "simulation: covariate correlation must lie in [0, 1)");
    require(target_event_rate > 0.0 && target_event_rate < 1.0,
            ErrorKind::invalid_argument,
            "simulation: target event rate must lie in (0, 1)");
    for (const auto& m : error_laws()) {
        require(m.sigma_minus > 0.0 && m.sigma_plus > 0.0,
                ErrorKind::invalid_argument,
                "simulation: mixture standard deviations must be positive");
        require(m.mix_prob >= 0.0 && m.mix_prob <= 1.0,
                ErrorKind::invalid_argument,
                "simulation: mixture probability must lie in [0, 1]");
    }
}

double GroundTruth::h0(double t)
{
    return 3.0 * std::log(t / 4.0);
}

double censoring_event_rate(const SimulationSpec& spec, double a)
{
    spec.validate();
    return rate_given_times(calibration_times(spec), a);
}

double calibrate_censoring(const SimulationSpec& spec)
{
    spec.validate();
    const auto times = calibration_times(spec);
    const double target = spec.target_event_rate;
    // rate is increasing in a; bisect on log(a)
    double lo = std::log(a_lower);
    double hi = std::log(a_upper);
    if (rate_given_times(times, std::exp(hi)) < target ||
        rate_given_times(times, std::exp(lo)) > target) {
        fail(ErrorKind::calibration,
             "censoring calibration: target event rate is not attainable with "
             "a in (1e-6, 1e6)");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rate_given_times(times, std::exp(mid)) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::exp(0.5 * (lo + hi));
}

LatentDraws generate_latent(const SimulationSpec& spec, double a)
{
    spec.validate();
    const std::size_t N = spec.N;
    const std::size_t p = spec.p();
    const auto laws = spec.error_laws();
    const std::size_t K = laws.size();
    const double rho = spec.covariate_correlation;
    const double shared = std::sqrt(rho);
    const double own = std::sqrt(1.0 - rho);

    LatentDraws out{Matrix(N, p), Vector(N), Vector(N), Matrix(N, K)};
    parallel_for(N, [&](std::size_t i) {
        auto gen = substream(spec.seed, 1, i);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double common = normal(gen);
        double index = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double z = shared * common + own * normal(gen);
            out.Z(i, j) = z;
            index += spec.beta0(j) * z;
        }
        const double T = event_time(-index, normal(gen));
        out.T(i) = T;
        out.C(i) = a * unif(gen);
        for (std::size_t k = 0; k < K; ++k) {
            const MixtureParams& m = laws[k];
            const bool minus = unif(gen) < m.mix_prob;
            const double z = normal(gen);
            const double eps = minus ? m.mu_minus + m.sigma_minus * z
                                     : m.mu_plus + m.sigma_plus * z;
            out.Tsur(i, k) = T * std::exp(eps);
        }
    });
    // C must be strictly positive
    for (std::size_t i = 0; i < N; ++i) {
        if (out.C(i) <= 0.0) {
            out.C(i) = std::numeric_limits<double>::min();
        }
    }
    return out;
}

std::pair<Dataset, GroundTruth> generate(const SimulationSpec& spec,
                                         std::optional<double> a_opt)
{
    spec.validate();
    const double a = a_opt ? *a_opt : calibrate_censoring(spec);
    require(a > 0.0 && std::isfinite(a), ErrorKind::invalid_argument,
            "generate: censoring upper limit must be positive");
    LatentDraws lat = generate_latent(spec, a);
    const std::size_t N = spec.N;
    const auto K = static_cast<std::size_t>(lat.Tsur.cols());

    std::vector<std::string> ids(N);
    std::vector<std::uint8_t> labeled(N);
    std::vector<int> delta(N, -1);
    Matrix X(N, K);
    IntMatrix D(N, K);
    for (std::size_t i = 0; i < N; ++i) {
        ids[i] = "s" + std::to_string(i + 1);
        labeled[i] = i < spec.n ? 1 : 0;
        if (labeled[i]) {
            delta[i] = lat.T(i) <= lat.C(i) ? 1 : 0;
        }
        for (std::size_t k = 0; k < K; ++k) {
            const bool event = lat.Tsur(i, k) <= lat.C(i);
            D(i, k) = event ? 1 : 0;
            X(i, k) = event ? lat.Tsur(i, k) : lat.C(i);
        }
    }
    GroundTruth truth;
    truth.beta0 = spec.beta0;
    truth.censoring_upper = a;
    truth.seed = spec.seed;
    truth.scenario = spec.mixtures.empty() ? to_string(spec.scenario) : "custom";
    truth.link = LinkFamily::probit;
    Dataset data(std::move(ids), std::move(labeled), std::move(delta),
                 std::move(lat.C), std::move(lat.Z), std::move(X), std::move(D));
    return {std::move(data), std::move(truth)};
}

} // namespace sslsurv
