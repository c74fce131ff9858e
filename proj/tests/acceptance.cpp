// Acceptance checks: one PASS/FAIL line per criterion.
//
//   sslsurv_acceptance [--out DIR] [--only 1,5,...] [--reuse]
//
// --reuse reads study metrics written by an earlier run from DIR instead of
// recomputing them (development convenience; ctest always recomputes).

#include "support.hpp"

#include "sslsurv/combine.hpp"
#include "sslsurv/error.hpp"
#include "sslsurv/inference.hpp"
#include "sslsurv/json_io.hpp"
#include "sslsurv/parallel.hpp"
#include "sslsurv/scores.hpp"
#include "sslsurv/simulate.hpp"
#include "sslsurv/study.hpp"
#include "sslsurv/supervised.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sslsurv;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool pass = true;
    std::string detail;
};

//! Collects named checks and renders a one-line summary.
class Checks
{
public:
    void expect(bool ok, const std::string& what)
    {
        if (!ok) {
            pass_ = false;
            failed_.push_back(what);
        }
    }
    void note(const std::string& s) { notes_.push_back(s); }

    Outcome outcome() const
    {
        Outcome o;
        o.pass = pass_;
        std::string d;
        for (const auto& n : notes_) {
            d += (d.empty() ? "" : "; ") + n;
        }
        if (!failed_.empty()) {
            d += " | failed:";
            for (const auto& f : failed_) {
                d += " " + f;
            }
        }
        o.detail = d;
        return o;
    }

private:
    bool pass_ = true;
    std::vector<std::string> notes_;
    std::vector<std::string> failed_;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string coord_list(const std::vector<double>& v, const char* f = "%.3f")
{
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + fmt(f, v[i]);
    }
    return s + ")";
}

// -- Monte Carlo studies -------------------------------------------------------

struct StudyRun
{
    std::string name;
    StudyConfig config;
};

MetricsTable load_metrics(const fs::path& path)
{
    std::ifstream in(path);
    const Json doc = Json::parse(in);
    MetricsTable t;
    t.replicates_used = doc.at("replicates_used").get<std::size_t>();
    t.failures = doc.at("failures").get<std::size_t>();
    t.beta0 = vector_from_json(doc.at("beta0"));
    for (const auto& r : doc.at("metrics")) {
        MetricsRow row;
        row.coord = r.at("coord").get<std::size_t>();
        row.bias_delta_x100 = r.at("bias_delta_x100").get<double>();
        row.bias_ssl_x100 = r.at("bias_ssl_x100").get<double>();
        row.mse_delta = r.at("mse_delta").get<double>();
        row.mse_ssl = r.at("mse_ssl").get<double>();
        row.re = r.at("re").is_number() ? r.at("re").get<double>() : INFINITY;
        row.ese = r.at("ese").get<double>();
        row.ase = r.at("ase").get<double>();
        row.covp = r.at("covp").get<double>();
        t.rows.push_back(row);
    }
    return t;
}

class Studies
{
public:
    Studies(fs::path out, bool reuse) : out_(std::move(out)), reuse_(reuse) {}

    const MetricsTable& get(const StudyRun& run)
    {
        auto it = cache_.find(run.name);
        if (it != cache_.end()) {
            return it->second;
        }
        const fs::path dir = out_ / run.name;
        if (reuse_ && fs::exists(dir / "metrics.json")) {
            std::fprintf(stderr, "[%s] reusing %s\n", run.name.c_str(),
                         (dir / "metrics.json").c_str());
            return cache_.emplace(run.name, load_metrics(dir / "metrics.json")).first->second;
        }
        StudyConfig cfg = run.config;
        cfg.output_dir = dir;
        const auto start = std::chrono::steady_clock::now();
        const std::string name = run.name;
        cfg.progress = [name, start](std::size_t done, std::size_t total) {
            const double secs = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
            std::fprintf(stderr, "[%s] %zu/%zu replicates (%.0f s)\n", name.c_str(), done,
                         total, secs);
        };
        return cache_.emplace(run.name, run_study(cfg)).first->second;
    }

private:
    fs::path out_;
    bool reuse_;
    std::map<std::string, MetricsTable> cache_;
};

StudyRun study(const std::string& name, ErrorScenario scenario, std::size_t N,
               std::size_t reps, Regime regime = Regime::automatic)
{
    StudyRun r;
    r.name = name;
    r.config.scenario = scenario;
    r.config.n = 500;
    r.config.N = N;
    r.config.reps = reps;
    r.config.B = 200;
    r.config.seed = 20240601;
    r.config.regime.regime = regime;
    return r;
}

const StudyRun& run_A1000()
{
    static const StudyRun r = study("A_N1000", ErrorScenario::A_low, 1000, 100);
    return r;
}
const StudyRun& run_B1000()
{
    static const StudyRun r = study("B_N1000", ErrorScenario::B_high, 1000, 100);
    return r;
}
const StudyRun& run_A10000()
{
    static const StudyRun r = study("A_N10000", ErrorScenario::A_low, 10000, 100);
    return r;
}
const StudyRun& run_A4000_smoke()
{
    // n/N = 0.125 would resolve to the comparable regime; the smoke variant
    // stands in for the large-unlabeled setting, so the regime is fixed
    static const StudyRun r =
        study("A_N4000_smoke", ErrorScenario::A_low, 4000, 25, Regime::large_unlabeled);
    return r;
}

std::string table_line(const MetricsTable& t)
{
    return "reps used " + std::to_string(t.replicates_used) + ", failures " +
           std::to_string(t.failures);
}

// -- criteria ------------------------------------------------------------------

Outcome criterion_bias(Studies& studies)
{
    Checks c;
    const MetricsTable& t = studies.get(run_A1000());
    std::vector<double> bd;
    std::vector<double> bs;
    for (const auto& row : t.rows) {
        bd.push_back(row.bias_delta_x100 / 100.0);
        bs.push_back(row.bias_ssl_x100 / 100.0);
        c.expect(std::abs(row.bias_delta_x100) / 100.0 < 0.05,
                 "bias_delta b" + std::to_string(row.coord));
        c.expect(std::abs(row.bias_ssl_x100) / 100.0 < 0.05,
                 "bias_ssl b" + std::to_string(row.coord));
    }
    c.note("A, N=1000, " + table_line(t));
    c.note("bias_delta " + coord_list(bd));
    c.note("bias_ssl " + coord_list(bs));
    return c.outcome();
}

double mean_re_nonzero(const MetricsTable& t)
{
    double s = 0.0;
    int m = 0;
    for (const auto& row : t.rows) {
        if (t.beta0(static_cast<Eigen::Index>(row.coord - 1)) != 0.0) {
            s += row.re;
            ++m;
        }
    }
    return s / m;
}

std::vector<double> re_column(const MetricsTable& t)
{
    std::vector<double> v;
    for (const auto& row : t.rows) {
        v.push_back(row.re);
    }
    return v;
}

Outcome criterion_efficiency_comparable(Studies& studies)
{
    Checks c;
    const MetricsTable& a = studies.get(run_A1000());
    const MetricsTable& b = studies.get(run_B1000());
    const double ra = mean_re_nonzero(a);
    const double rb = mean_re_nonzero(b);
    c.expect(ra > 1.1, "scenario A mean RE > 1.1");
    c.expect(rb > 0.9, "scenario B mean RE > 0.9");
    c.note("A mean RE " + fmt("%.3f", ra) + " " + coord_list(re_column(a), "%.2f"));
    c.note("B mean RE " + fmt("%.3f", rb) + " " + coord_list(re_column(b), "%.2f") + ", " +
           table_line(b));
    return c.outcome();
}

Outcome criterion_efficiency_large(Studies& studies)
{
    Checks c;
    const MetricsTable& big = studies.get(run_A10000());
    for (const auto& row : big.rows) {
        if (big.beta0(static_cast<Eigen::Index>(row.coord - 1)) != 0.0) {
            c.expect(row.re > 1.5, "RE b" + std::to_string(row.coord) + " > 1.5");
        }
    }
    c.expect(big.rows[9].re > 10.0, "RE b10 > 10");
    c.note("N=10000 RE " + coord_list(re_column(big), "%.2f") + ", " + table_line(big));
    const MetricsTable& smoke = studies.get(run_A4000_smoke());
    c.expect(smoke.rows[9].re > 5.0, "smoke RE b10 > 5");
    c.note("N=4000 smoke RE b10 " + fmt("%.2f", smoke.rows[9].re) + ", " + table_line(smoke));
    return c.outcome();
}

Outcome criterion_coverage(Studies& studies)
{
    Checks c;
    for (const StudyRun* run : {&run_A1000(), &run_A10000()}) {
        const MetricsTable& t = studies.get(*run);
        std::vector<double> cov;
        std::vector<double> ratio;
        for (const auto& row : t.rows) {
            const std::string tag = run->name + " b" + std::to_string(row.coord);
            cov.push_back(row.covp);
            const double r = row.ase / row.ese;
            ratio.push_back(r);
            if (t.beta0(static_cast<Eigen::Index>(row.coord - 1)) != 0.0) {
                c.expect(row.covp >= 0.90 && row.covp <= 0.99, tag + " CovP");
            }
            c.expect(r >= 0.8 && r <= 1.25, tag + " ASE/ESE");
        }
        if (run->config.N == 10000) {
            c.expect(t.rows[9].covp >= 0.97, run->name + " b10 CovP >= 0.97");
        }
        c.note(run->name + " CovP " + coord_list(cov, "%.2f") + " ASE/ESE " +
               coord_list(ratio, "%.2f"));
    }
    return c.outcome();
}

Outcome criterion_oracle()
{
    Checks c;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::size_t N = 20 + 3 * seed; // 23 .. 50
        const Dataset data = testing::random_cohort(1000 + seed, N, N / 3, 4, 2);
        Vector B = Vector::LinSpaced(4, 1.0, -0.1 * static_cast<double>(seed));
        B.normalize();
        std::mt19937_64 rng(seed);
        std::exponential_distribution<double> expo(1.0);
        Vector w(static_cast<Eigen::Index>(N));
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            w(i) = expo(rng);
        }
        for (const Vector& weights : {Vector(), w}) {
            const CensoringSurvival G = fit_censoring(data, weights);
            auto rel = [](double a, double b) {
                return std::abs(a - b) / std::max(1.0, std::abs(b));
            };
            for (std::size_t i = 0; i < N; ++i) {
                for (double t : {data.C()(i), data.X()(i, 0), data.X()(i, 1), data.C()(i) + 1e-9}) {
                    worst = std::max(worst, rel(G(t), testing::oracle_G(data, weights, t)));
                }
            }
            for (std::size_t k = 0; k < 2; ++k) {
                const double h = 0.25 + 0.3 * static_cast<double>(k);
                const Vector S = smoothed_score(data, k, B, Kernel(), h, G, weights);
                const Vector ref = testing::oracle_score(data, k, B, h, weights);
                for (Eigen::Index j = 0; j < S.size(); ++j) {
                    worst = std::max(worst, rel(S(j), ref(j)));
                }
                const auto q = rank_correlation(data, k, B, G, weights);
                const auto qref = testing::oracle_rank_correlation(data, k, B, weights);
                worst = std::max(worst, rel(q.raw, qref.raw));
                worst = std::max(worst, rel(q.normalized, qref.normalized));
            }
        }
    }
    c.expect(worst <= 1e-12, "max discrepancy <= 1e-12");
    c.note("10 seeds, N in [23,50], weighted and unweighted; max discrepancy " +
           fmt("%.2e", worst));
    return c.outcome();
}

Outcome criterion_score_properties()
{
    Checks c;
    // mean of S_k(B0) over 200 scenario-A cohorts (n = 500, N = 1000)
    const std::size_t reps = 200;
    const Vector B0 = default_beta0().normalized();
    SimulationSpec base;
    base.n = 500;
    base.N = 1000;
    base.seed = 77;
    const double a = calibrate_censoring(base);
    std::vector<Vector> scores(reps);
    parallel_for(reps, [&](std::size_t r) {
        SimulationSpec spec = base;
        spec.seed = splitmix64(0x5c0e + r);
        const Dataset data = generate(spec, a).first;
        const BandwidthConfig bw = auto_bandwidths(data, B0);
        scores[r] = stacked_score(data, B0, Kernel(), bw).S;
    });
    const Eigen::Index Kp = scores[0].size();
    double worst_z = 0.0;
    std::vector<double> zs;
    for (Eigen::Index j = 0; j < Kp; ++j) {
        std::vector<double> col;
        for (const auto& s : scores) {
            col.push_back(s(j));
        }
        const double z = testing::sample_mean(col) /
                         (testing::sample_sd(col) / std::sqrt(static_cast<double>(reps)));
        worst_z = std::max(worst_z, std::abs(z));
        zs.push_back(z);
        if (std::abs(z) >= 3.0) {
            c.expect(false, "S mean coord " + std::to_string(j + 1));
        }
    }
    c.note("S(B0) mean z-scores " + coord_list(zs, "%.1f") + ", max |z| " +
           fmt("%.2f", worst_z) + " (200 cohorts, n=500, N=1000)");

    // |B'S_k(B)| at the supervised direction shrinks with the sample size
    auto collinearity = [](std::size_t n, std::uint64_t seed_base) {
        const std::size_t reps = 50;
        std::vector<double> stat(reps);
        SimulationSpec spec;
        spec.n = n;
        spec.N = n;
        spec.seed = seed_base;
        const double a = calibrate_censoring(spec);
        parallel_for(reps, [&](std::size_t r) {
            SimulationSpec s = spec;
            s.seed = splitmix64(seed_base + r);
            const Dataset data = generate(s, a).first;
            Vector e1 = Vector::Zero(10);
            e1(0) = 1.0;
            const BandwidthConfig bw0 = auto_bandwidths(data, e1);
            const SupervisedFit fit =
                fit_supervised(data, Link(LinkFamily::probit), Kernel(), bw0);
            const Vector Bhat = fit.beta.normalized();
            BandwidthConfig bw = auto_bandwidths(data, Bhat);
            bw.h_supervised = bw0.h_supervised;
            const ScoreBundle sb = stacked_score(data, Bhat, Kernel(), bw);
            double acc = 0.0;
            for (std::size_t k = 0; k < data.K(); ++k) {
                acc += std::abs(Bhat.dot(sb.S.segment(static_cast<Eigen::Index>(k * 10), 10)));
            }
            stat[r] = acc / static_cast<double>(data.K());
        });
        return testing::sample_median(stat);
    };
    const double m500 = collinearity(500, 0xc011);
    const double m2000 = collinearity(2000, 0xc012);
    c.expect(m2000 < m500, "median |B'S| at n=N=2000 < n=N=500");
    c.note("median |B'S_k(B)|: n=N=500 " + fmt("%.4g", m500) + ", n=N=2000 " +
           fmt("%.4g", m2000));
    return c.outcome();
}

Outcome criterion_supervised()
{
    Checks c;
    double worst_beta = 0.0;
    double worst_h = 0.0;
    double worst_equiv = 0.0;
    int fits = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SimulationSpec spec;
        spec.n = 500;
        spec.N = 500;
        spec.seed = 300 + seed;
        const Dataset data = generate(spec).first;
        Vector e1 = Vector::Zero(10);
        e1(0) = 1.0;
        const BandwidthConfig bw = auto_bandwidths(data, e1);
        const Link probit(LinkFamily::probit);
        std::mt19937_64 rng(seed);
        std::exponential_distribution<double> expo(1.0);
        Vector V(500);
        for (Eigen::Index i = 0; i < V.size(); ++i) {
            V(i) = expo(rng);
        }
        for (const Vector& weights : {Vector(), V}) {
            const SupervisedFit fit =
                weights.size() ? fit_supervised_perturbed(data, probit, Kernel(), bw, weights)
                               : fit_supervised(data, probit, Kernel(), bw);
            c.expect(fit.converged, "converged");
            const auto res = testing::oracle_residuals(data, fit, bw.h_supervised, weights);
            worst_beta = std::max(worst_beta, res.beta_block);
            worst_h = std::max(worst_h, res.h_block);
            ++fits;
        }
        const SupervisedFit fit = fit_supervised(data, probit, Kernel(), bw);
        const Eigen::Index j = static_cast<Eigen::Index>(seed % 10);
        const double shift = 0.5 * static_cast<double>(seed) - 1.2;
        Matrix Z = data.Z();
        Z.col(j).array() += shift;
        const SupervisedFit moved = fit_supervised(data.with_covariates(Z), probit, Kernel(), bw);
        worst_equiv = std::max(worst_equiv, (moved.beta - fit.beta).lpNorm<Eigen::Infinity>());
        for (std::size_t m = 0; m < fit.h_grid.size(); ++m) {
            worst_equiv = std::max(worst_equiv, std::abs(moved.h_grid[m] -
                                                         (fit.h_grid[m] - fit.beta(j) * shift)));
        }
    }
    c.expect(worst_beta < 1e-6, "beta block residual < 1e-6");
    c.expect(worst_h < 1e-6, "h block residual < 1e-6");
    c.expect(worst_equiv < 1e-6, "affine equivariance < 1e-6");
    c.note(std::to_string(fits) + " fits; residuals beta " + fmt("%.1e", worst_beta) + ", h " +
           fmt("%.1e", worst_h) + "; equivariance " + fmt("%.1e", worst_equiv));
    return c.outcome();
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

Outcome criterion_transforms()
{
    Checks c;
    int checks = 0;
    auto expect = [&](bool ok, const std::string& what) {
        ++checks;
        c.expect(ok, what);
    };
    // soft_threshold_std
    const Vector s = soft_threshold_std(vec({1.0, 0.01}), 0.001);
    expect(s(1) == 0.0 && std::abs(s(0) - 1.00005) < 1e-6, "soft (1,0.01)");
    const Vector neg = soft_threshold_std(vec({-0.5, 2.0}), 0.01);
    expect(neg(0) < 0.0 && std::abs(neg(0) / neg(1) - (-0.48 / 1.995)) < 1e-14, "soft sign");
    const Vector dense = vec({0.7, -0.2, 0.05});
    expect((soft_threshold_std(dense, 1e-14) - dense).lpNorm<Eigen::Infinity>() < 1e-12,
           "soft lambda->0");
    bool all_zero = false;
    try {
        soft_threshold_std(vec({0.1, -0.1}), 0.5);
    } catch (const Error& e) {
        all_zero = e.kind() == ErrorKind::all_zero;
    }
    expect(all_zero, "soft all-zero error");
    expect(std::abs(soft_threshold_std(dense, 0.003).norm() - dense.norm()) < 1e-10,
           "soft norm preservation");

    // recenter_sign_preserving
    const std::vector<Vector> centred{vec({0.2, -0.4}), vec({0.4, -0.6})};
    const auto same = recenter_sign_preserving(centred, vec({0.3, -0.5}));
    expect((same[1] - centred[1]).lpNorm<Eigen::Infinity>() < 1e-15, "recenter unchanged");
    const auto z = recenter_sign_preserving({vec({0.0}), vec({0.5})}, vec({3.0}));
    expect(z[0](0) == 0.0, "recenter zero stays zero");
    const auto r = recenter_sign_preserving({vec({0.3}), vec({0.9})}, vec({0.2}));
    expect(r[0](0) == 0.0 && std::abs(r[1](0) - 0.5) < 1e-15, "recenter 0.3 - 0.4");

    // ci_recentered_quantile
    std::vector<Vector> reps;
    for (double x : {7.0, 1.0, 11.0, 2.0, 4.0}) {
        reps.push_back(vec({x}));
    }
    const auto [lo, hi] = ci_recentered_quantile(reps, vec({6.0}), vec({1.0}), 0.2, 5);
    expect(std::abs(lo - 2.4) < 1e-14 && std::abs(hi - 10.4) < 1e-14, "ci 5 replicates");
    const std::vector<Vector> flat(25, vec({3.0}));
    const auto [f1, f2] = ci_recentered_quantile(flat, vec({1.5}), vec({1.0}), 0.05);
    expect(f1 == 1.5 && f2 == 1.5, "ci constant replicates");
    const auto [l2, h2] = ci_recentered_quantile(reps, vec({6.0}), vec({2.0}), 0.2, 5);
    expect(l2 == 2.0 * lo && h2 == 2.0 * hi, "ci scales with contrast");

    // projections
    auto mat = [](std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m(static_cast<Eigen::Index>(rows.size()),
                 static_cast<Eigen::Index>(rows.begin()->size()));
        Eigen::Index i = 0;
        for (const auto& row : rows) {
            Eigen::Index j = 0;
            for (double v : row) {
                m(i, j++) = v;
            }
            ++i;
        }
        return m;
    };
    expect(build_projection(ProjectionKind::drop_j, 3, 1, 1).matrix == mat({{1, 0, 0}, {0, 0, 1}}),
           "P_2 p=3 K=1");
    expect(build_projection(ProjectionKind::keep_k_drop_j, 2, 2, 0, 1).matrix == mat({{0, 0, 0, 1}}),
           "P_21 p=2 K=2");
    expect(build_projection(ProjectionKind::drop_j, 2, 2, 0).matrix ==
               mat({{0, 1, 0, 0}, {0, 0, 0, 1}}),
           "P_1 p=2 K=2");
    c.note(std::to_string(checks) + " fixtures");
    return c.outcome();
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome criterion_determinism(const fs::path& out)
{
    Checks c;
    StudyConfig base;
    base.n = 200;
    base.N = 800;
    base.reps = 4;
    base.B = 40;
    base.seed = 99;
    int compared = 0;
    for (Regime regime : {Regime::comparable, Regime::large_unlabeled}) {
        base.regime.regime = regime;
        std::vector<std::string> outputs;
        for (const char* workers : {"1", "4", "1"}) {
            setenv("SSLSURV_WORKERS", workers, 1);
            StudyConfig cfg = base;
            cfg.output_dir = out / "determinism" / (to_string(regime) + "_" + workers +
                                                    "_" + std::to_string(outputs.size()));
            run_study(cfg);
            std::string all;
            for (const char* f : {"metrics.csv", "metrics.json", "replicates.log"}) {
                all += slurp(*cfg.output_dir / f);
            }
            outputs.push_back(all);
        }
        unsetenv("SSLSURV_WORKERS");
        c.expect(!outputs[0].empty(), "outputs written");
        c.expect(outputs[0] == outputs[1], to_string(regime) + " 1 vs 4 workers");
        c.expect(outputs[0] == outputs[2], to_string(regime) + " rerun");
        compared += 2;
    }
    c.note(std::to_string(compared) + " byte comparisons of metrics.csv/json and replicates.log");
    return c.outcome();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    std::string out = "acceptance_out";
    std::string only;
    bool reuse = false;
    app.add_option("--out", out, "directory for study outputs");
    app.add_option("--only", only, "comma-separated criteria to run");
    app.add_flag("--reuse", reuse, "reuse study metrics from an earlier run");
    CLI11_PARSE(app, argc, argv);

    std::set<int> selected;
    if (!only.empty()) {
        std::stringstream ss(only);
        std::string item;
        while (std::getline(ss, item, ',')) {
            selected.insert(std::stoi(item));
        }
    }
    Studies studies(out, reuse);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"bias (scenario A, N=1000)", [&] { return criterion_bias(studies); }},
        {"efficiency, comparable regime", [&] { return criterion_efficiency_comparable(studies); }},
        {"efficiency, large unlabeled regime", [&] { return criterion_efficiency_large(studies); }},
        {"coverage and ASE/ESE", [&] { return criterion_coverage(studies); }},
        {"oracle equivalence", [] { return criterion_oracle(); }},
        {"score properties", [] { return criterion_score_properties(); }},
        {"supervised estimating equations", [] { return criterion_supervised(); }},
        {"transform fixtures", [] { return criterion_transforms(); }},
        {"determinism", [&] { return criterion_determinism(out); }},
    };
    // cheap criteria first so their results show up early
    const int order[] = {5, 7, 8, 9, 6, 1, 2, 4, 3};
    std::map<int, Outcome> results;
    for (int id : order) {
        if (!selected.empty() && !selected.count(id)) {
            continue;
        }
        const auto& [name, fn] = criteria[static_cast<std::size_t>(id - 1)];
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        std::printf("criterion %d [%s]: %s - %s\n", id, name.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
        results[id] = o;
    }
    std::printf("summary:");
    bool all = true;
    for (const auto& [id, o] : results) {
        std::printf(" %d=%s", id, o.pass ? "PASS" : "FAIL");
        all = all && o.pass;
    }
    std::printf("\n");
    return all ? 0 : 1;
}
