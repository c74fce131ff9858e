#include "sslsurv/json_io.hpp"

#include "sslsurv/error.hpp"

#include <cstdio>

namespace sslsurv {

namespace {

Json matrix_json(const Matrix& m)
{
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        rows.push_back(to_json(Vector(m.row(r).transpose())));
    }
    return rows;
}

Json one_based(const std::vector<std::size_t>& idx)
{
    Json out = Json::array();
    for (auto i : idx) {
        out.push_back(i + 1);
    }
    return out;
}

} // namespace

Json to_json(const Vector& v)
{
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

Json to_json(const SupervisedFit& fit)
{
    return Json{{"beta", to_json(fit.beta)},
                {"t_grid", fit.t_grid},
                {"h_grid", fit.h_grid},
                {"support", one_based(fit.support)},
                {"converged", fit.converged},
                {"iterations", fit.iterations},
                {"residual_norm", fit.residual_norm},
                {"beta_residual", fit.beta_residual},
                {"h_residual", fit.h_residual},
                {"clamped_knots", one_based(fit.clamped_knots)}};
}

Json to_json(const ScoreBundle& bundle)
{
    return Json{{"S", to_json(bundle.S)},
                {"Q", to_json(bundle.Q)},
                {"denominators", bundle.denominators},
                {"bandwidths", bundle.bandwidths}};
}

Json to_json(const CombinationWeights& weights)
{
    Json sols = Json::array();
    for (const auto& s : weights.solutions) {
        Json js{{"kind", s.projection.kind == ProjectionKind::drop_j ? "drop_j"
                                                                     : "keep_k_drop_j"},
                {"j", s.projection.j + 1},
                {"rank", s.rank}};
        if (s.projection.k) {
            js["k"] = *s.projection.k + 1;
        }
        sols.push_back(std::move(js));
    }
    return Json{{"W_comb", matrix_json(weights.W_comb)},
                {"projections", std::move(sols)},
                {"rank_deficient", weights.rank_deficient},
                {"draws_used", weights.draws_used}};
}

Json to_json(const SslFit& fit)
{
    Json reps = Json::array();
    for (const auto& r : fit.replicates) {
        reps.push_back(to_json(r));
    }
    Json out{{"beta_ssl", to_json(fit.beta_ssl)},
             {"beta_delta", to_json(fit.beta_delta)},
             {"regime", to_string(fit.regime)},
             {"replicates", std::move(reps)},
             {"beta_std", nullptr},
             {"lambda_soft_used", nullptr}};
    if (fit.beta_std) {
        out["beta_std"] = to_json(*fit.beta_std);
    }
    if (fit.lambda_soft_used) {
        out["lambda_soft_used"] = *fit.lambda_soft_used;
    }
    return out;
}

Json to_json(const InferenceReport& report)
{
    Json rows = Json::array();
    for (std::size_t j = 0; j < report.rows.size(); ++j) {
        const auto& r = report.rows[j];
        rows.push_back(Json{{"coord", j + 1},
                            {"estimate", r.estimate},
                            {"se", r.se},
                            {"lower", r.lower},
                            {"upper", r.upper},
                            {"p_value", r.p_value},
                            {"conservative", r.conservative}});
    }
    Json out{{"method", to_string(report.method)},
             {"level", report.level},
             {"lambda_soft", nullptr},
             {"rows", std::move(rows)}};
    if (report.lambda_soft) {
        out["lambda_soft"] = *report.lambda_soft;
    }
    return out;
}

Json to_json(const GroundTruth& truth)
{
    return Json{{"beta0", to_json(truth.beta0)},
                {"a", truth.censoring_upper},
                {"seed", truth.seed},
                {"scenario", truth.scenario},
                {"link", to_string(truth.link)}};
}

Json to_json(const StudyConfig& config)
{
    Json out{{"scenario", to_string(config.scenario)},
             {"n", config.n},
             {"N", config.N},
             {"reps", config.reps},
             {"B", config.B},
             {"seed", config.seed},
             {"regime", to_string(config.regime.regime)},
             {"rho_threshold", config.regime.rho_threshold},
             {"alpha", config.alpha},
             {"bandwidths", nullptr},
             {"lambda_delta", nullptr},
             {"lambda_soft_grid", config.threshold.lambda_soft_grid}};
    if (config.bandwidths) {
        out["bandwidths"] = Json{{"h_supervised", config.bandwidths->h_supervised},
                                 {"h_score", config.bandwidths->h_score}};
    }
    if (config.threshold.lambda_delta) {
        out["lambda_delta"] = *config.threshold.lambda_delta;
    }
    return out;
}

Json to_json(const MetricsTable& table)
{
    Json rows = Json::array();
    for (const auto& r : table.rows) {
        rows.push_back(Json{{"coord", r.coord},
                            {"bias_delta_x100", r.bias_delta_x100},
                            {"bias_ssl_x100", r.bias_ssl_x100},
                            {"mse_delta", r.mse_delta},
                            {"mse_ssl", r.mse_ssl},
                            {"re", r.re},
                            {"ese", r.ese},
                            {"ase", r.ase},
                            {"covp", r.covp}});
    }
    return Json{{"config", to_json(table.config)},
                {"beta0", to_json(table.beta0)},
                {"censoring_upper", table.censoring_upper},
                {"replicates_used", table.replicates_used},
                {"failures", table.failures},
                {"metrics", std::move(rows)}};
}

Json to_json(const FitResult& result)
{
    return Json{{"regime", to_string(result.regime)},
                {"bandwidths", Json{{"h_supervised", result.bandwidths.h_supervised},
                                    {"h_score", result.bandwidths.h_score}}},
                {"supervised", to_json(result.supervised)},
                {"support", one_based(result.support)},
                {"scores", to_json(result.scores)},
                {"perturbation_failures", result.draws.failures},
                {"weights", to_json(result.weights)},
                {"ssl", to_json(result.ssl)},
                {"cv", Json{{"lambda", result.cv.lambda},
                            {"grid", result.cv.grid},
                            {"scores", result.cv.scores},
                            {"fallback", result.cv.fallback}}},
                {"inference", Json{{"ssl", to_json(result.ssl_report)},
                                   {"supervised", to_json(result.supervised_report)}}}};
}

Vector vector_from_json(const Json& j)
{
    require(j.is_array(), ErrorKind::parse, "expected a numeric array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        require(j[i].is_number(), ErrorKind::parse, "expected a numeric array");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

SslFit ssl_fit_from_json(const Json& j)
{
    try {
        SslFit fit;
        fit.beta_ssl = vector_from_json(j.at("beta_ssl"));
        fit.beta_delta = vector_from_json(j.at("beta_delta"));
        fit.regime = regime_from_string(j.at("regime").get<std::string>());
        for (const auto& r : j.at("replicates")) {
            fit.replicates.push_back(vector_from_json(r));
            require(fit.replicates.back().size() == fit.beta_ssl.size(), ErrorKind::parse,
                    "replicate has wrong dimension");
        }
        if (j.contains("beta_std") && !j["beta_std"].is_null()) {
            fit.beta_std = vector_from_json(j["beta_std"]);
        }
        if (j.contains("lambda_soft_used") && !j["lambda_soft_used"].is_null()) {
            fit.lambda_soft_used = j["lambda_soft_used"].get<double>();
        }
        return fit;
    } catch (const Json::exception& e) {
        fail(ErrorKind::parse, std::string("malformed fit JSON: ") + e.what());
    }
}

std::string inference_csv(const InferenceReport& report)
{
    std::string out = "coord,Est,SE,CI_lower,CI_upper,PVal,conservative\n";
    char buf[256];
    for (std::size_t j = 0; j < report.rows.size(); ++j) {
        const auto& r = report.rows[j];
        std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g,%.10g,%.10g,%.4g,%d\n", j + 1,
                      r.estimate, r.se, r.lower, r.upper, r.p_value,
                      r.conservative ? 1 : 0);
        out += buf;
    }
    return out;
}

} // namespace sslsurv
