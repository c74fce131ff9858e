// Command-line front end: simulate cohorts, fit, re-run inference and
// reproduce the simulation tables.

#include "sslsurv/dataset.hpp"
#include "sslsurv/error.hpp"
#include "sslsurv/inference.hpp"
#include "sslsurv/json_io.hpp"
#include "sslsurv/pipeline.hpp"
#include "sslsurv/simulate.hpp"
#include "sslsurv/study.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace sslsurv;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_numerical = 3;

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::invalid_argument,
            "cannot write '" + path + "'");
    out << text;
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_file(path, text);
    }
}

std::string sidecar_path(const std::string& csv)
{
    const auto dot = csv.rfind('.');
    const auto slash = csv.find_last_of('/');
    const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
    return (has_ext ? csv.substr(0, dot) : csv) + ".truth.json";
}

struct SimulateArgs
{
    std::size_t n = 500;
    std::size_t N = 1000;
    std::string scenario = "A";
    std::uint64_t seed = 1;
    std::optional<double> a;
    std::string out;
};

int run_simulate(const SimulateArgs& args)
{
    SimulationSpec spec;
    spec.n = args.n;
    spec.N = args.N;
    spec.scenario = scenario_from_string(args.scenario);
    spec.seed = args.seed;
    const auto [data, truth] = generate(spec, args.a);
    save_dataset(data, args.out);
    write_file(sidecar_path(args.out), to_json(truth).dump(2) + "\n");
    return exit_ok;
}

struct FitArgs
{
    std::string data;
    std::string link = "probit";
    std::string regime = "auto";
    double rho = 0.1;
    std::size_t B = 200;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    std::optional<double> lambda_delta;
    std::optional<double> h;
    std::vector<double> h_score;
    std::string guard = "truncate";
    std::string out;
    std::string csv;
    std::string cache_dir;
};

int run_fit(const FitArgs& args)
{
    const Dataset data = load_dataset(args.data);
    FitConfig fc;
    fc.link = link_from_string(args.link);
    fc.regime.regime = regime_from_string(args.regime);
    fc.regime.rho_threshold = args.rho;
    fc.B = args.B;
    fc.seed = args.seed;
    fc.alpha = args.alpha;
    fc.threshold.lambda_delta = args.lambda_delta;
    fc.score.guard = args.guard == "error" ? IpcwGuard::error : IpcwGuard::truncate;
    if (args.h || !args.h_score.empty()) {
        require(args.h.has_value() && !args.h_score.empty(), ErrorKind::invalid_argument,
                "--bandwidth and --score-bandwidths must be given together");
        BandwidthConfig bw;
        bw.h_supervised = *args.h;
        bw.h_score = args.h_score;
        fc.bandwidths = bw;
    }
    if (!args.cache_dir.empty()) {
        fc.cache_dir = args.cache_dir;
    }
    const FitResult result = fit_ssl(data, fc);
    emit(args.out, to_json(result).dump(2) + "\n");
    if (!args.csv.empty()) {
        write_file(args.csv, inference_csv(result.ssl_report));
    }
    return exit_ok;
}

struct InferArgs
{
    std::string fit;
    double alpha = 0.05;
    std::string regime;
    std::optional<double> lambda_soft;
    std::string out;
    std::string csv;
};

int run_infer(const InferArgs& args)
{
    std::ifstream in(args.fit, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::parse, "cannot open '" + args.fit + "'");
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::exception& e) {
        fail(ErrorKind::parse, "'" + args.fit + "' is not valid JSON: " + e.what());
    }
    SslFit fit = ssl_fit_from_json(doc.contains("ssl") ? doc["ssl"] : doc);
    Regime regime = args.regime.empty() ? fit.regime : regime_from_string(args.regime);
    require(regime != Regime::automatic, ErrorKind::invalid_argument,
            "infer needs an explicit regime");
    if (args.lambda_soft) {
        fit.lambda_soft_used = args.lambda_soft;
    }
    const InferenceReport report = infer(fit, regime, args.alpha);
    emit(args.out, to_json(report).dump(2) + "\n");
    if (!args.csv.empty()) {
        write_file(args.csv, inference_csv(report));
    }
    return exit_ok;
}

struct ReproduceArgs
{
    int table = 1;
    std::string scenario = "A";
    std::size_t reps = 100;
    bool full = false;
    std::uint64_t seed = 1;
    std::size_t B = 200;
    std::size_t n = 500;
    std::vector<std::size_t> N;
    std::string regime = "auto";
    std::string out = "results";
    bool quiet = false;
};

void print_summary(const MetricsTable& t, int table)
{
    std::printf("scenario %s  n=%zu  N=%zu  replicates=%zu  failures=%zu\n",
                to_string(t.config.scenario).c_str(), t.config.n, t.config.N,
                t.replicates_used, t.failures);
    if (table == 1) {
        std::printf("%-6s %12s %12s %10s %10s %9s\n", "coord", "bias_d_x100",
                    "bias_ssl_x100", "mse_d", "mse_ssl", "RE");
        for (const auto& r : t.rows) {
            std::printf("b%-5zu %12.3f %12.3f %10.5f %10.5f %9.3f\n", r.coord,
                        r.bias_delta_x100, r.bias_ssl_x100, r.mse_delta, r.mse_ssl, r.re);
        }
    } else {
        std::printf("%-6s %10s %10s %8s\n", "coord", "ESE", "ASE", "CovP");
        for (const auto& r : t.rows) {
            std::printf("b%-5zu %10.5f %10.5f %8.3f\n", r.coord, r.ese, r.ase, r.covp);
        }
    }
}

int run_reproduce(const ReproduceArgs& args)
{
    std::vector<std::size_t> Ns = args.N;
    if (Ns.empty()) {
        Ns = {1000, 10000};
    }
    for (std::size_t N : Ns) {
        StudyConfig cfg;
        cfg.scenario = scenario_from_string(args.scenario);
        cfg.n = args.n;
        cfg.N = N;
        cfg.reps = args.full ? 500 : args.reps;
        cfg.B = args.B;
        cfg.seed = args.seed;
        cfg.regime.regime = regime_from_string(args.regime);
        char dir[64];
        std::snprintf(dir, sizeof dir, "/table%d_%s_N%zu", args.table,
                      args.scenario.c_str(), N);
        cfg.output_dir = args.out + dir;
        if (!args.quiet) {
            cfg.progress = [N](std::size_t done, std::size_t total) {
                std::fprintf(stderr, "\r[N=%zu] replicate %zu/%zu", N, done, total);
                if (done == total) {
                    std::fprintf(stderr, "\n");
                }
            };
        }
        const MetricsTable t = run_study(cfg);
        print_summary(t, args.table);
        std::printf("outputs: %s\n\n", cfg.output_dir->string().c_str());
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Semi-supervised transformation-model estimation with surrogate event times"};
    app.require_subcommand(1);

    const std::vector<std::string> scenarios{"A", "B"};
    const std::vector<std::string> links{"probit", "logistic"};
    const std::vector<std::string> regimes{"auto", "comparable", "large_unlabeled"};

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "simulate a cohort (CSV plus ground-truth JSON)");
    s->add_option("--n", sim.n, "labeled subjects")->capture_default_str();
    s->add_option("--N", sim.N, "total subjects")->capture_default_str();
    s->add_option("--scenario", sim.scenario, "surrogate error scenario")
        ->check(CLI::IsMember(scenarios))->capture_default_str();
    s->add_option("--seed", sim.seed)->capture_default_str();
    s->add_option("--a", sim.a, "censoring upper limit (calibrated when omitted)");
    s->add_option("--out", sim.out, "output CSV")->required();

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "fit a cohort CSV and emit fit + inference JSON");
    f->add_option("data", fit.data, "cohort CSV")->required();
    f->add_option("--link", fit.link)->check(CLI::IsMember(links))->capture_default_str();
    f->add_option("--regime", fit.regime)->check(CLI::IsMember(regimes))->capture_default_str();
    f->add_option("--rho", fit.rho, "n/N cutover for the automatic regime")
        ->check(CLI::Range(0.0, 1.0))->capture_default_str();
    f->add_option("--B", fit.B, "perturbation draws")->check(CLI::PositiveNumber)
        ->capture_default_str();
    f->add_option("--seed", fit.seed)->capture_default_str();
    f->add_option("--alpha", fit.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    f->add_option("--lambda-delta", fit.lambda_delta, "support threshold (default n^-1/4)");
    f->add_option("--bandwidth", fit.h, "supervised bandwidth");
    f->add_option("--score-bandwidths", fit.h_score, "score bandwidths, one per surrogate");
    f->add_option("--ipcw-guard", fit.guard)
        ->check(CLI::IsMember({"truncate", "error"}))->capture_default_str();
    f->add_option("--out", fit.out, "JSON output (stdout when omitted)");
    f->add_option("--csv", fit.csv, "inference table CSV");
    f->add_option("--cache-dir", fit.cache_dir, "reuse perturbation draws across runs");

    InferArgs inf;
    auto* i = app.add_subcommand("infer", "recompute intervals from a fit JSON");
    i->add_option("fit", inf.fit, "JSON written by `fit`")->required();
    i->add_option("--alpha", inf.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    i->add_option("--regime", inf.regime)
        ->check(CLI::IsMember({"comparable", "large_unlabeled"}));
    i->add_option("--lambda-soft", inf.lambda_soft)->check(CLI::PositiveNumber);
    i->add_option("--out", inf.out, "JSON output (stdout when omitted)");
    i->add_option("--csv", inf.csv, "inference table CSV");

    ReproduceArgs rep;
    auto* r = app.add_subcommand("reproduce", "Monte Carlo reproduction of the simulation tables");
    r->add_option("--table", rep.table)->check(CLI::IsMember({1, 2}))->required();
    r->add_option("--scenario", rep.scenario)->check(CLI::IsMember(scenarios))
        ->capture_default_str();
    r->add_option("--reps", rep.reps)->check(CLI::PositiveNumber)->capture_default_str();
    r->add_flag("--full", rep.full, "500 replicates");
    r->add_option("--seed", rep.seed)->capture_default_str();
    r->add_option("--B", rep.B)->check(CLI::PositiveNumber)->capture_default_str();
    r->add_option("--n", rep.n)->capture_default_str();
    r->add_option("--N", rep.N, "total sizes (default: 1000 and 10000)");
    r->add_option("--regime", rep.regime)->check(CLI::IsMember(regimes))
        ->capture_default_str();
    r->add_option("--out", rep.out, "output directory")->capture_default_str();
    r->add_flag("--quiet", rep.quiet, "no progress output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return exit_usage;
    }

    try {
        if (*s) {
            return run_simulate(sim);
        }
        if (*f) {
            return run_fit(fit);
        }
        if (*i) {
            return run_infer(inf);
        }
        return run_reproduce(rep);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_data_error() ? exit_data : exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}
