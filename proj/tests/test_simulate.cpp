#include "support.hpp"

#include "sslsurv/error.hpp"
#include "sslsurv/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace sslsurv;

TEST_CASE("scenario parameters and true coefficients")
{
    const auto a = scenario_mixtures(ErrorScenario::A_low);
    REQUIRE(a.size() == 2);
    CHECK(a[0].mu_minus == 0.2);
    CHECK(a[0].sigma_minus == 0.3);
    CHECK(a[0].mu_plus == -0.1);
    CHECK(a[0].sigma_plus == 0.1);
    CHECK(a[1].mu_minus == 0.0);
    CHECK(a[1].sigma_minus == 0.2);
    CHECK(a[1].mu_plus == 0.3);
    CHECK(a[1].sigma_plus == 0.1);
    CHECK(a[0].mix_prob == 0.5);
    const auto b = scenario_mixtures(ErrorScenario::B_high);
    REQUIRE(b.size() == 2);
    CHECK(b[0].mu_minus == 1.0);
    CHECK(b[0].sigma_minus == 1.5);
    CHECK(b[0].mu_plus == -0.5);
    CHECK(b[0].sigma_plus == 0.5);
    CHECK(b[1].mu_minus == 0.0);
    CHECK(b[1].sigma_minus == 1.0);
    CHECK(b[1].mu_plus == 1.5);
    CHECK(b[1].sigma_plus == 0.5);

    const Vector beta0 = default_beta0();
    REQUIRE(beta0.size() == 10);
    const double expected[] = {0.7, 0.7, 0.7, -0.5, -0.5, -0.5, 0.3, 0.3, 0.3, 0.0};
    for (int j = 0; j < 10; ++j) {
        CHECK(beta0(j) == expected[j]);
    }
    CHECK(GroundTruth::h0(4.0) == 0.0);
    CHECK(GroundTruth::h0(4.0 * std::exp(1.0)) == doctest::Approx(3.0));
    double prev = -1e300;
    for (double t = 0.01; t < 100.0; t *= 1.3) {
        CHECK(GroundTruth::h0(t) > prev);
        prev = GroundTruth::h0(t);
    }
    CHECK(scenario_from_string("A") == ErrorScenario::A_low);
    CHECK(scenario_from_string("B") == ErrorScenario::B_high);
    CHECK_THROWS_AS(scenario_from_string("C"), Error);
}

TEST_CASE("censoring calibration")
{
    SimulationSpec spec;
    spec.seed = 21;
    const double a = calibrate_censoring(spec);
    CHECK(std::abs(censoring_event_rate(spec, a) - 0.5) < 0.005);
    CHECK(calibrate_censoring(spec) == a);

    // fresh draw of 1e5 subjects from the generator
    SimulationSpec fresh = spec;
    fresh.seed = 987654;
    fresh.N = 100000;
    fresh.n = 100000;
    const LatentDraws lat = generate_latent(fresh, a);
    double events = 0.0;
    for (Eigen::Index i = 0; i < lat.T.size(); ++i) {
        events += lat.T(i) <= lat.C(i) ? 1.0 : 0.0;
    }
    const double rate = events / static_cast<double>(lat.T.size());
    CHECK(rate >= 0.48);
    CHECK(rate <= 0.52);

    SimulationSpec doubled = spec;
    doubled.seed = 2 * spec.seed;
    CHECK(std::abs(calibrate_censoring(doubled) - a) < 0.01);

    SimulationSpec impossible = spec;
    impossible.target_event_rate = 0.9999999;
    try {
        calibrate_censoring(impossible);
        FAIL("expected calibration failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::calibration);
    }
    SimulationSpec invalid = spec;
    invalid.target_event_rate = 1.0;
    CHECK_THROWS_AS(calibrate_censoring(invalid), Error);
    invalid = spec;
    invalid.n = spec.N + 1;
    CHECK_THROWS_AS(invalid.validate(), Error);
}

TEST_CASE("generated cohort layout")
{
    SimulationSpec spec;
    spec.n = 500;
    spec.N = 10000;
    spec.seed = 8;
    const auto [data, truth] = generate(spec);
    CHECK(data.N() == 10000);
    CHECK(data.n() == 500);
    CHECK(data.p() == 10);
    CHECK(data.K() == 2);
    CHECK(truth.beta0 == default_beta0());
    CHECK(truth.link == LinkFamily::probit);
    for (std::size_t i = 0; i < data.N(); ++i) {
        CHECK(data.labeled(i) == (i < 500));
        for (std::size_t k = 0; k < data.K(); ++k) {
            CHECK(data.X()(i, k) <= data.C()(i));
        }
    }
    double events = 0.0;
    for (auto r : data.labeled_rows()) {
        events += data.delta(r);
    }
    // 4 binomial standard errors at n = 500
    CHECK(std::abs(events / 500.0 - 0.5) < 4.0 * std::sqrt(0.25 / 500.0));
    const LatentDraws latent = generate_latent(spec, truth.censoring_upper);
    const double all_events = (latent.T.array() <= latent.C.array()).cast<double>().mean();
    CHECK(std::abs(all_events - 0.5) < 4.0 * std::sqrt(0.25 / 10000.0));

    // equicorrelated covariates; a sample correlation has sd about (1 - r^2) / sqrt(N)
    const double r_sd = (1.0 - 0.04) / std::sqrt(10000.0);
    double mean_r = 0.0;
    const Matrix& Z = data.Z();
    const Eigen::RowVectorXd mean = Z.colwise().mean();
    const Matrix centered = Z.rowwise() - mean;
    const Matrix cov = centered.transpose() * centered / static_cast<double>(Z.rows() - 1);
    for (int j = 0; j < 10; ++j) {
        CHECK(std::abs(cov(j, j) - 1.0) < 0.05);
        for (int l = 0; l < j; ++l) {
            const double r = cov(j, l) / std::sqrt(cov(j, j) * cov(l, l));
            CHECK(std::abs(r - 0.2) < 4.0 * r_sd);
            mean_r += r / 45.0;
        }
    }
    CHECK(std::abs(mean_r - 0.2) < 0.01);

    // identical seeds give identical cohorts; a supplied a skips calibration
    const auto again = generate(spec, truth.censoring_upper);
    CHECK(again.first == data);
    SimulationSpec other = spec;
    other.seed = 9;
    CHECK(!(generate(other, truth.censoring_upper).first == data));
}

TEST_CASE("risk is increasing in the true index")
{
    SimulationSpec spec;
    spec.n = 50000;
    spec.N = 50000;
    spec.seed = 31;
    const double a = calibrate_censoring(spec);
    const LatentDraws lat = generate_latent(spec, a);
    const Vector index = lat.Z * spec.beta0;
    std::vector<std::size_t> order(static_cast<std::size_t>(index.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return index(x) < index(y); });
    std::vector<double> times(lat.T.data(), lat.T.data() + lat.T.size());
    std::sort(times.begin(), times.end());
    for (double prob : {0.25, 0.5, 0.75}) {
        const double t = times[static_cast<std::size_t>(prob * times.size())];
        double prev = -1.0;
        const std::size_t bins = 5;
        for (std::size_t b = 0; b < bins; ++b) {
            const std::size_t lo = b * order.size() / bins;
            const std::size_t hi = (b + 1) * order.size() / bins;
            double hit = 0.0;
            for (std::size_t r = lo; r < hi; ++r) {
                hit += lat.T(order[r]) <= t ? 1.0 : 0.0;
            }
            const double risk = hit / static_cast<double>(hi - lo);
            CHECK(risk > prev);
            prev = risk;
        }
    }
}

TEST_CASE("surrogates follow the single index")
{
    for (auto scenario : {ErrorScenario::A_low, ErrorScenario::B_high}) {
        SimulationSpec spec;
        spec.n = 20000;
        spec.N = 20000;
        spec.scenario = scenario;
        spec.seed = 4;
        const LatentDraws lat = generate_latent(spec, 10.0);
        const Vector index = lat.Z * spec.beta0;
        for (Eigen::Index k = 0; k < lat.Tsur.cols(); ++k) {
            // disjoint pairs (2m, 2m + 1): earlier surrogate time goes with the
            // larger risk index
            double agree = 0.0;
            double pairs = 0.0;
            for (Eigen::Index m = 0; m + 1 < index.size(); m += 2) {
                const bool first_earlier = lat.Tsur(m, k) < lat.Tsur(m + 1, k);
                const bool first_higher = index(m) > index(m + 1);
                agree += first_earlier == first_higher ? 1.0 : 0.0;
                pairs += 1.0;
            }
            CHECK(agree / pairs > 0.5 + 3.0 * 0.5 / std::sqrt(pairs));
        }
    }
}
