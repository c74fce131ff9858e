#include "sslsurv/study.hpp"

#include "sslsurv/error.hpp"
#include "sslsurv/json_io.hpp"
#include "sslsurv/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>

namespace sslsurv {

void StudyConfig::validate() const
{
    require(reps >= 1, ErrorKind::invalid_argument, "reps must be at least 1");
    require(n >= 2 && N >= n, ErrorKind::invalid_argument, "need 2 <= n <= N");
    require(B >= 2, ErrorKind::invalid_argument, "B must be at least 2");
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::invalid_argument,
            "alpha must lie in (0, 1)");
    require(max_failure_fraction >= 0.0 && max_failure_fraction < 1.0,
            ErrorKind::invalid_argument, "failure fraction must lie in [0, 1)");
}

std::uint64_t replicate_data_seed(std::uint64_t seed, std::size_t rep)
{
    return splitmix64(splitmix64(seed) ^ (0xda7aULL + 2 * rep));
}

std::uint64_t replicate_fit_seed(std::uint64_t seed, std::size_t rep)
{
    return splitmix64(splitmix64(seed) ^ (0xf17ULL + 2 * rep + 1));
}

namespace {

SimulationSpec simulation_spec(const StudyConfig& config, std::uint64_t seed)
{
    SimulationSpec spec;
    spec.n = config.n;
    spec.N = config.N;
    spec.scenario = config.scenario;
    spec.seed = seed;
    return spec;
}

} // namespace

ReplicateRecord run_replicate(const StudyConfig& config, double censoring_upper,
                              std::size_t rep)
{
    ReplicateRecord rec;
    rec.rep = rep;
    rec.data_seed = replicate_data_seed(config.seed, rep);
    rec.fit_seed = replicate_fit_seed(config.seed, rep);
    try {
        const auto [data, truth] =
            generate(simulation_spec(config, rec.data_seed), censoring_upper);
        FitConfig fc;
        fc.link = truth.link;
        fc.regime = config.regime;
        fc.bandwidths = config.bandwidths;
        fc.threshold = config.threshold;
        fc.B = config.B;
        fc.seed = rec.fit_seed;
        fc.alpha = config.alpha;
        const FitResult fit = fit_ssl(data, fc);

        const auto p = truth.beta0.size();
        rec.regime = fit.regime;
        rec.beta_delta = fit.ssl.beta_delta;
        rec.beta_ssl = fit.ssl.beta_ssl;
        rec.beta_std = fit.ssl.beta_std.value_or(Vector::Zero(p));
        rec.lambda_soft = fit.cv.lambda;
        rec.ase.resize(p);
        rec.covered.resize(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) {
            std::vector<double> col;
            col.reserve(fit.std_replicates.size());
            for (const auto& r : fit.std_replicates) {
                col.push_back(r(j));
            }
            rec.ase(j) = sample_sd(col);
            const auto& row = fit.ssl_report.rows[static_cast<std::size_t>(j)];
            rec.covered[static_cast<std::size_t>(j)] =
                row.lower <= truth.beta0(j) && truth.beta0(j) <= row.upper;
        }
        rec.ok = true;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::invalid_argument) {
            throw;
        }
        rec.ok = false;
        rec.message = e.what();
    }
    return rec;
}

MetricsTable summarize(const StudyConfig& config, const Vector& beta0,
                       double censoring_upper, std::vector<ReplicateRecord> records)
{
    MetricsTable table;
    table.config = config;
    table.config.progress = nullptr;
    table.beta0 = beta0;
    table.censoring_upper = censoring_upper;
    std::vector<const ReplicateRecord*> ok;
    for (const auto& r : records) {
        if (r.ok) {
            ok.push_back(&r);
        } else {
            ++table.failures;
        }
    }
    table.replicates_used = ok.size();
    require(!ok.empty(), ErrorKind::non_convergence, "every replicate failed");

    const double m = static_cast<double>(ok.size());
    for (Eigen::Index j = 0; j < beta0.size(); ++j) {
        MetricsRow row;
        row.coord = static_cast<std::size_t>(j) + 1;
        double bd = 0.0, bs = 0.0, md = 0.0, ms = 0.0, ase = 0.0, cov = 0.0;
        std::vector<double> std_col;
        for (const auto* r : ok) {
            const double ed = r->beta_delta(j) - beta0(j);
            const double es = r->beta_ssl(j) - beta0(j);
            bd += ed;
            bs += es;
            md += ed * ed;
            ms += es * es;
            ase += r->ase(j);
            cov += r->covered[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
            std_col.push_back(r->beta_std(j));
        }
        row.bias_delta_x100 = 100.0 * bd / m;
        row.bias_ssl_x100 = 100.0 * bs / m;
        row.mse_delta = md / m;
        row.mse_ssl = ms / m;
        row.re = row.mse_ssl > 0.0 ? row.mse_delta / row.mse_ssl
                                   : std::numeric_limits<double>::infinity();
        row.ese = sample_sd(std_col);
        row.ase = ase / m;
        row.covp = cov / m;
        table.rows.push_back(row);
    }
    table.records = std::move(records);
    return table;
}

MetricsTable run_study(const StudyConfig& config)
{
    config.validate();
    SimulationSpec base = simulation_spec(config, config.seed);
    const double a = calibrate_censoring(base);

    std::vector<ReplicateRecord> records(config.reps);
    std::mutex progress_mutex;
    std::size_t done = 0;
    parallel_for(config.reps, [&](std::size_t r) {
        records[r] = run_replicate(config, a, r);
        if (config.progress) {
            std::lock_guard lock(progress_mutex);
            config.progress(++done, config.reps);
        }
    });

    std::size_t failures = 0;
    for (const auto& r : records) {
        failures += r.ok ? 0 : 1;
    }
    MetricsTable table = summarize(config, base.beta0, a, std::move(records));
    if (config.output_dir) {
        write_study_outputs(table, *config.output_dir);
    }
    if (static_cast<double>(failures) >
        config.max_failure_fraction * static_cast<double>(config.reps)) {
        fail(ErrorKind::non_convergence,
             std::to_string(failures) + " of " + std::to_string(config.reps) +
                 " replicates failed");
    }
    return table;
}

namespace {

std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::string fmt_vector(const Vector& v)
{
    std::string out;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        out += (j ? " " : "") + fmt(v(j));
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::invalid_argument,
            "cannot write '" + path.string() + "'");
    out << text;
}

} // namespace

std::string metrics_csv(const MetricsTable& table)
{
    std::string out = "coord,bias_delta_x100,bias_ssl_x100,mse_delta,mse_ssl,re,ese,ase,covp\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.coord) + "," + fmt(r.bias_delta_x100) + "," +
               fmt(r.bias_ssl_x100) + "," + fmt(r.mse_delta) + "," + fmt(r.mse_ssl) +
               "," + fmt(r.re) + "," + fmt(r.ese) + "," + fmt(r.ase) + "," +
               fmt(r.covp) + "\n";
    }
    return out;
}

std::string replicate_log(const MetricsTable& table)
{
    std::string out;
    for (const auto& r : table.records) {
        out += "rep=" + std::to_string(r.rep + 1) +
               " data_seed=" + std::to_string(r.data_seed) +
               " fit_seed=" + std::to_string(r.fit_seed);
        if (!r.ok) {
            out += " status=failed reason=\"" + r.message + "\"\n";
            continue;
        }
        out += " status=ok regime=" + to_string(r.regime) +
               " lambda_soft=" + fmt(r.lambda_soft) +
               " beta_delta=[" + fmt_vector(r.beta_delta) + "]" +
               " beta_ssl=[" + fmt_vector(r.beta_ssl) + "]" +
               " beta_std=[" + fmt_vector(r.beta_std) + "]\n";
    }
    return out;
}

void write_study_outputs(const MetricsTable& table, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_text(dir / "metrics.csv", metrics_csv(table));
    write_text(dir / "metrics.json", to_json(table).dump(2) + "\n");
    write_text(dir / "replicates.log", replicate_log(table));
}

} // namespace sslsurv
