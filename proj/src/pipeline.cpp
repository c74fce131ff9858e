#include "sslsurv/pipeline.hpp"

#include "sslsurv/error.hpp"

namespace sslsurv {

FitResult fit_ssl(const Dataset& data, const FitConfig& config)
{
    FitResult out;
    const Link link(config.link);
    out.regime = resolve_regime(data, config.regime);

    // the supervised bandwidth does not depend on the direction
    if (config.bandwidths) {
        out.bandwidths = *config.bandwidths;
        out.bandwidths.rule = BandwidthRule::manual;
        out.bandwidths.validate();
        require(out.bandwidths.h_score.size() == data.K(), ErrorKind::invalid_argument,
                "need one score bandwidth per surrogate");
    } else {
        out.bandwidths = auto_bandwidths(data, Vector::Unit(static_cast<Eigen::Index>(data.p()), 0));
    }

    SupervisedOptions sup = config.supervised;
    sup.threshold = config.threshold;
    const SupervisedSolver solver(data, link, config.kernel, out.bandwidths, sup);
    out.supervised = solver.fit();
    out.support = recover_support(out.supervised, config.threshold, data.n());

    const double norm = out.supervised.beta.norm();
    require(norm > 0.0, ErrorKind::degenerate_data, "supervised estimate is zero");
    const Vector direction = out.supervised.beta / norm;
    if (!config.bandwidths) {
        const double h_sup = out.bandwidths.h_supervised;
        out.bandwidths = auto_bandwidths(data, direction);
        out.bandwidths.h_supervised = h_sup;
    }
    out.scores = stacked_score(data, direction, config.kernel, out.bandwidths,
                               Vector(), config.score);

    PerturbationOptions popts;
    popts.B = config.B;
    popts.seed = config.seed;
    popts.keep_weights = config.keep_weights;
    popts.supervised = sup;
    popts.score = config.score;
    std::optional<std::filesystem::path> cache_file;
    if (config.cache_dir) {
        cache_file = draw_cache_path(*config.cache_dir, dataset_hash(data),
                                     config.seed, config.B);
        if (auto cached = load_draws(*cache_file)) {
            out.draws = std::move(*cached);
        }
    }
    if (out.draws.draws.empty()) {
        out.draws = run_perturbations(data, link, config.kernel, out.bandwidths,
                                      popts, &out.supervised);
        if (cache_file) {
            std::filesystem::create_directories(cache_file->parent_path());
            save_draws(out.draws, *cache_file);
        }
    }

    const auto projections =
        regime_projections(out.regime, data.p(), data.K(), out.support);
    out.weights = estimate_weights(out.draws, projections, out.support);
    out.ssl = combine(out.supervised, out.scores, out.weights);
    out.ssl.regime = out.regime;
    out.ssl.replicates = perturbed_ssl(out.draws, out.weights);

    out.cv = cv_lambda_soft(data, out.ssl, config.threshold.lambda_soft_grid,
                            config.seed, config.score);
    out.ssl.lambda_soft_used = out.cv.lambda;
    try {
        out.ssl.beta_std = soft_threshold_std(out.ssl.beta_ssl, out.cv.lambda);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::all_zero) {
            throw;
        }
    }
    out.std_replicates = soft_threshold_replicates(out.ssl.replicates, out.cv.lambda);

    out.ssl_report = infer(out.ssl, out.regime, config.alpha);
    std::vector<Vector> sup_reps;
    for (const auto* d : out.draws.usable()) {
        sup_reps.push_back(d->beta_delta);
    }
    out.supervised_report = infer_recentered(out.supervised.beta, sup_reps, config.alpha);
    return out;
}

} // namespace sslsurv
