#include "sslsurv/inference.hpp"

#include "sslsurv/error.hpp"
#include "sslsurv/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

namespace sslsurv {

std::vector<Vector> perturbed_ssl(PerturbationResult& draws,
                                  const CombinationWeights& W)
{
    std::vector<Vector> out;
    for (auto& d : draws.draws) {
        if (!d.ok) {
            continue;
        }
        require(W.W_comb.rows() == d.score.size() &&
                    W.W_comb.cols() == d.beta_delta.size(),
                ErrorKind::invalid_argument, "perturbed_ssl: dimension mismatch");
        d.beta_ssl = d.beta_delta - W.W_comb.transpose() * d.score;
        out.push_back(d.beta_ssl);
    }
    return out;
}

namespace {

std::pair<double, double> recentered_interval(const std::vector<double>& values,
                                              double centre, double alpha)
{
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    const double shift = centre - mean;
    return {quantile_linear(values, alpha / 2.0) + shift,
            quantile_linear(values, 1.0 - alpha / 2.0) + shift};
}

std::pair<double, double> raw_interval(const std::vector<double>& values, double alpha)
{
    return {quantile_linear(values, alpha / 2.0),
            quantile_linear(values, 1.0 - alpha / 2.0)};
}

// smallest alpha (resolution 1e-4) whose interval excludes zero
double invert_interval(const std::function<std::pair<double, double>(double)>& ci)
{
    auto excludes_zero = [&](double a) {
        const auto [lo, hi] = ci(a);
        return lo > 0.0 || hi < 0.0;
    };
    if (!excludes_zero(1.0)) {
        return 1.0;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        if (excludes_zero(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

std::vector<double> column(const std::vector<Vector>& reps, Eigen::Index j)
{
    std::vector<double> out;
    out.reserve(reps.size());
    for (const auto& r : reps) {
        out.push_back(r(j));
    }
    return out;
}

void check_alpha(double alpha)
{
    require(alpha > 0.0 && alpha <= 1.0, ErrorKind::invalid_argument,
            "alpha must lie in (0, 1]");
}

} // namespace

std::pair<double, double>
ci_recentered_quantile(const std::vector<Vector>& replicates, const Vector& point,
                       const Vector& v, double alpha, std::size_t min_replicates)
{
    check_alpha(alpha);
    require(replicates.size() >= std::max<std::size_t>(min_replicates, 1),
            ErrorKind::too_few_replicates,
            "need at least " + std::to_string(min_replicates) + " replicates");
    require(v.size() == point.size(), ErrorKind::invalid_argument,
            "contrast has wrong dimension");
    std::vector<double> values;
    values.reserve(replicates.size());
    for (const auto& r : replicates) {
        values.push_back(v.dot(r));
    }
    return recentered_interval(values, v.dot(point), alpha);
}

Vector soft_threshold_std(const Vector& beta, double lambda_soft)
{
    require(lambda_soft > 0.0 && std::isfinite(lambda_soft),
            ErrorKind::invalid_argument, "lambda_soft must be positive");
    Vector soft(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double a = std::abs(beta(j));
        soft(j) = a > 0.0 ? sign(beta(j)) * std::max(a - lambda_soft / a, 0.0) : 0.0;
    }
    const double norm = soft.norm();
    require(norm > 0.0, ErrorKind::all_zero,
            "soft-thresholding removed every coordinate");
    return soft * (beta.norm() / norm);
}

std::vector<Vector> soft_threshold_replicates(const std::vector<Vector>& replicates,
                                              double lambda_soft)
{
    std::vector<Vector> out;
    out.reserve(replicates.size());
    for (const auto& r : replicates) {
        try {
            out.push_back(soft_threshold_std(r, lambda_soft));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::all_zero) {
                throw;
            }
            out.push_back(Vector::Zero(r.size()));
        }
    }
    return out;
}

std::vector<Vector> recenter_sign_preserving(const std::vector<Vector>& std_replicates,
                                             const Vector& std_point)
{
    if (std_replicates.empty()) {
        return {};
    }
    const Eigen::Index p = std_point.size();
    Vector mean = Vector::Zero(p);
    for (const auto& r : std_replicates) {
        require(r.size() == p, ErrorKind::invalid_argument,
                "replicate has wrong dimension");
        mean += r;
    }
    mean /= static_cast<double>(std_replicates.size());
    const Vector shift = std_point - mean;
    std::vector<Vector> out;
    out.reserve(std_replicates.size());
    for (const auto& r : std_replicates) {
        Vector c(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double s = sign(r(j));
            c(j) = s * std::max(std::abs(r(j)) + s * shift(j), 0.0);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<double> default_lambda_grid(std::size_t n)
{
    require(n >= 2, ErrorKind::invalid_argument, "lambda grid needs n >= 2");
    const double nn = static_cast<double>(n);
    const double lo = std::log(2.0 / nn);
    const double hi = std::log(0.5 / std::sqrt(nn));
    constexpr std::size_t count = 20;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                    static_cast<double>(count - 1));
    }
    return grid;
}

CvResult cv_lambda_soft(const Dataset& data, const SslFit& fit,
                        const std::vector<double>& grid_in, std::uint64_t seed,
                        const ScoreOptions& opts)
{
    constexpr std::size_t folds = 5;
    CvResult out;
    out.grid = grid_in.empty() ? default_lambda_grid(data.n()) : grid_in;
    std::sort(out.grid.begin(), out.grid.end());
    const std::size_t N = data.N();
    require(N >= folds, ErrorKind::invalid_argument,
            "cross-validation needs at least 5 subjects");

    std::vector<std::size_t> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    auto gen = substream(seed, 0xcf01d);
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<std::vector<std::size_t>> held(folds);
    std::vector<std::vector<bool>> in_fold(folds, std::vector<bool>(N, false));
    for (std::size_t r = 0; r < N; ++r) {
        held[r % folds].push_back(perm[r]);
        in_fold[r % folds][perm[r]] = true;
    }
    for (auto& h : held) {
        std::sort(h.begin(), h.end());
    }

    // training-fold censoring survival, held-out rank correlation
    std::vector<Dataset> test_sets;
    std::vector<CensoringSurvival> train_G;
    for (std::size_t f = 0; f < folds; ++f) {
        Vector c_train(static_cast<Eigen::Index>(N - held[f].size()));
        Eigen::Index pos = 0;
        for (std::size_t i = 0; i < N; ++i) {
            if (!in_fold[f][i]) {
                c_train(pos++) = data.C()(i);
            }
        }
        train_G.emplace_back(c_train);
        test_sets.push_back(data.subset(held[f]));
    }

    out.scores.assign(out.grid.size(), -std::numeric_limits<double>::infinity());
    parallel_for(out.grid.size(), [&](std::size_t g) {
        Vector beta_std;
        try {
            beta_std = soft_threshold_std(fit.beta_ssl, out.grid[g]);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::all_zero) {
                throw;
            }
            return;
        }
        double total = 0.0;
        std::size_t used = 0;
        for (std::size_t f = 0; f < folds; ++f) {
            double agg = 0.0;
            try {
                for (std::size_t k = 0; k < data.K(); ++k) {
                    agg += rank_correlation(test_sets[f], k, beta_std, train_G[f],
                                            Vector(), opts).normalized;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::degenerate_pairs) {
                    throw;
                }
                continue;
            }
            total += agg;
            ++used;
        }
        if (used > 0) {
            out.scores[g] = total / static_cast<double>(used);
        }
    });

    std::size_t best = out.grid.size();
    for (std::size_t g = 0; g < out.grid.size(); ++g) {
        if (std::isfinite(out.scores[g]) &&
            (best == out.grid.size() || out.scores[g] > out.scores[best])) {
            best = g;
        }
    }
    if (best == out.grid.size()) {
        out.fallback = true;
        out.lambda = std::sqrt(out.grid.front() * out.grid.back());
    } else {
        out.lambda = out.grid[best];
    }
    return out;
}

std::string to_string(CiMethod method)
{
    return method == CiMethod::recentered_quantile ? "recentered_quantile"
                                                   : "soft_std_quantile";
}

InferenceReport infer_recentered(const Vector& point,
                                 const std::vector<Vector>& replicates,
                                 double alpha)
{
    check_alpha(alpha);
    require(!replicates.empty(), ErrorKind::too_few_replicates,
            "inference needs replicates");
    InferenceReport rep;
    rep.method = CiMethod::recentered_quantile;
    rep.level = 1.0 - alpha;
    for (Eigen::Index j = 0; j < point.size(); ++j) {
        const std::vector<double> values = column(replicates, j);
        CoordinateSummary row;
        row.estimate = point(j);
        row.se = sample_sd(values);
        std::tie(row.lower, row.upper) = recentered_interval(values, point(j), alpha);
        row.p_value = invert_interval(
            [&](double a) { return recentered_interval(values, point(j), a); });
        rep.rows.push_back(row);
    }
    return rep;
}

InferenceReport infer(const SslFit& fit, Regime regime, double alpha)
{
    check_alpha(alpha);
    require(!fit.replicates.empty(), ErrorKind::too_few_replicates,
            "inference needs replicates");
    require(regime != Regime::automatic, ErrorKind::invalid_argument,
            "regime must be resolved before inference");
    if (regime == Regime::comparable) {
        return infer_recentered(fit.beta_ssl, fit.replicates, alpha);
    }
    require(fit.lambda_soft_used.has_value(), ErrorKind::invalid_argument,
            "soft-thresholded inference needs lambda_soft");
    const double lambda = *fit.lambda_soft_used;
    const Vector point = soft_threshold_std(fit.beta_ssl, lambda);
    const auto std_reps = soft_threshold_replicates(fit.replicates, lambda);
    const auto centred = recenter_sign_preserving(std_reps, point);

    InferenceReport rep;
    rep.method = CiMethod::soft_std_quantile;
    rep.level = 1.0 - alpha;
    rep.lambda_soft = lambda;
    for (Eigen::Index j = 0; j < point.size(); ++j) {
        const std::vector<double> values = column(centred, j);
        CoordinateSummary row;
        row.estimate = point(j);
        row.se = sample_sd(column(std_reps, j));
        std::tie(row.lower, row.upper) = raw_interval(values, alpha);
        row.p_value = invert_interval([&](double a) { return raw_interval(values, a); });
        row.conservative = point(j) == 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace sslsurv
