#include "sslsurv/combine.hpp"

#include "sslsurv/error.hpp"
#include "sslsurv/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace sslsurv {

Projection build_projection(ProjectionKind kind, std::size_t p, std::size_t K,
                            std::size_t j, std::optional<std::size_t> k)
{
    require(p >= 1 && K >= 1, ErrorKind::invalid_argument,
            "projection: p and K must be positive");
    require(j < p, ErrorKind::invalid_argument, "projection: j out of range");
    Projection out;
    out.kind = kind;
    out.j = j;
    const auto cols = static_cast<Eigen::Index>(K * p);
    if (kind == ProjectionKind::drop_j) {
        out.matrix = Matrix::Zero(static_cast<Eigen::Index>(K * (p - 1)), cols);
        Eigen::Index row = 0;
        for (std::size_t kk = 0; kk < K; ++kk) {
            for (std::size_t c = 0; c < p; ++c) {
                if (c != j) {
                    out.matrix(row++, static_cast<Eigen::Index>(kk * p + c)) = 1.0;
                }
            }
        }
        return out;
    }
    require(k.has_value() && *k < K, ErrorKind::invalid_argument,
            "projection: k out of range");
    out.k = k;
    out.matrix = Matrix::Zero(static_cast<Eigen::Index>(p - 1), cols);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < p; ++c) {
        if (c != j) {
            out.matrix(row++, static_cast<Eigen::Index>(*k * p + c)) = 1.0;
        }
    }
    return out;
}

std::vector<Projection> regime_projections(Regime regime, std::size_t p,
                                           std::size_t K,
                                           const std::vector<std::size_t>& support)
{
    require(!support.empty(), ErrorKind::degenerate_support,
            "combination needs a nonempty support");
    require(regime != Regime::automatic, ErrorKind::invalid_argument,
            "regime must be resolved before building projections");
    std::vector<Projection> out;
    if (regime == Regime::comparable) {
        for (std::size_t j : support) {
            out.push_back(build_projection(ProjectionKind::drop_j, p, K, j));
        }
    } else {
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t j : support) {
                out.push_back(build_projection(ProjectionKind::keep_k_drop_j, p, K, j, k));
            }
        }
    }
    return out;
}

std::vector<const PerturbationDraw*> PerturbationResult::usable() const
{
    std::vector<const PerturbationDraw*> out;
    for (const auto& d : draws) {
        if (d.ok) {
            out.push_back(&d);
        }
    }
    return out;
}

PerturbationResult run_perturbations(const Dataset& data, const Link& link,
                                     const Kernel& kernel,
                                     const BandwidthConfig& bw,
                                     const PerturbationOptions& opts,
                                     const SupervisedFit* warm_start)
{
    require(opts.B >= 2, ErrorKind::invalid_argument, "need B >= 2 perturbations");
    const std::size_t N = data.N();
    const auto& labeled = data.labeled_rows();
    SupervisedOptions sup_opts = opts.supervised;
    sup_opts.throw_on_nonconvergence = true;
    const SupervisedSolver solver(data, link, kernel, bw, sup_opts);

    PerturbationResult out;
    out.draws.resize(opts.B);
    parallel_for(opts.B, [&](std::size_t b) {
        PerturbationDraw& draw = out.draws[b];
        draw.b = b;
        Vector V(static_cast<Eigen::Index>(N));
        if (opts.unit_weights) {
            V.setOnes();
        } else {
            auto gen = substream(opts.seed, 0x7e57, b);
            std::exponential_distribution<double> expo(1.0);
            for (std::size_t i = 0; i < N; ++i) {
                double v = expo(gen);
                // Exp(1) can return exactly zero with negligible probability
                V(i) = v > 0.0 ? v : std::numeric_limits<double>::min();
            }
        }
        try {
            Vector v_lab(static_cast<Eigen::Index>(labeled.size()));
            for (std::size_t r = 0; r < labeled.size(); ++r) {
                v_lab(r) = V(labeled[r]);
            }
            const SupervisedFit fit = solver.fit(v_lab, warm_start);
            const double norm = fit.beta.norm();
            require(norm > 0.0, ErrorKind::degenerate_data,
                    "perturbed estimate is zero");
            const Vector dir = fit.beta / norm;
            draw.beta_delta = fit.beta;
            draw.score = stacked_score(data, dir, kernel, bw, V, opts.score).S;
            draw.ok = draw.beta_delta.allFinite() && draw.score.allFinite();
        } catch (const Error&) {
            draw.ok = false;
        }
        if (opts.keep_weights) {
            draw.V = std::move(V);
        }
    });
    for (const auto& d : out.draws) {
        out.failures += d.ok ? 0 : 1;
    }
    const double frac = static_cast<double>(out.failures) / static_cast<double>(opts.B);
    if (frac > opts.max_failure_fraction) {
        fail(ErrorKind::non_convergence,
             std::to_string(out.failures) + " of " + std::to_string(opts.B) +
                 " perturbation fits failed");
    }
    return out;
}

CombinationWeights estimate_weights(const PerturbationResult& draws,
                                    const std::vector<Projection>& projections,
                                    const std::vector<std::size_t>& support)
{
    require(!support.empty(), ErrorKind::degenerate_support,
            "combination needs a nonempty support");
    require(!projections.empty(), ErrorKind::invalid_argument,
            "no projections given");
    const auto use = draws.usable();
    require(!use.empty(), ErrorKind::too_few_replicates, "no usable draws");
    const auto p = use.front()->beta_delta.size();
    const auto Kp = use.front()->score.size();
    const auto B = static_cast<Eigen::Index>(use.size());
    require(B >= p + 1, ErrorKind::too_few_replicates,
            "need at least p + 1 usable draws for the weight regression");
    const ProjectionKind kind = projections.front().kind;
    for (const auto& P : projections) {
        require(P.kind == kind, ErrorKind::invalid_argument,
                "projections must all be of one kind");
        require(P.matrix.cols() == Kp, ErrorKind::invalid_argument,
                "projection width does not match the score");
    }

    Matrix Y(B, p);
    Matrix S(B, Kp);
    for (Eigen::Index b = 0; b < B; ++b) {
        Y.row(b) = use[b]->beta_delta.transpose();
        S.row(b) = use[b]->score.transpose();
    }
    Y.rowwise() -= Y.colwise().mean();
    S.rowwise() -= S.colwise().mean();

    CombinationWeights out;
    out.W_comb = Matrix::Zero(Kp, p);
    out.draws_used = static_cast<std::size_t>(B);
    for (const auto& P : projections) {
        const Matrix Xp = S * P.matrix.transpose();
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
        cod.setThreshold(1e-10);
        cod.compute(Xp);
        ProjectionSolution sol;
        sol.projection = P;
        sol.rank = cod.rank();
        sol.w = cod.rank() == 0 ? Matrix::Zero(Xp.cols(), p) : Matrix(cod.solve(Y));
        sol.W = P.matrix.transpose() * sol.w;
        out.rank_deficient = out.rank_deficient || sol.rank < Xp.cols();
        out.W_comb += sol.W;
        out.solutions.push_back(std::move(sol));
    }
    out.W_comb /= static_cast<double>(projections.size());
    return out;
}

SslFit combine(const SupervisedFit& fit, const ScoreBundle& bundle,
               const CombinationWeights& W)
{
    require(W.W_comb.rows() == bundle.S.size() && W.W_comb.cols() == fit.beta.size(),
            ErrorKind::invalid_argument, "combine: dimension mismatch");
    SslFit out;
    out.beta_delta = fit.beta;
    out.beta_ssl = fit.beta - W.W_comb.transpose() * bundle.S;
    return out;
}

// -- draw cache ----------------------------------------------------------------

std::uint64_t dataset_hash(const Dataset& data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : format_dataset(data)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::filesystem::path draw_cache_path(const std::filesystem::path& dir,
                                      std::uint64_t data_hash, std::uint64_t seed,
                                      std::size_t B)
{
    char name[96];
    std::snprintf(name, sizeof name, "draws_%016llx_%llu_%zu.bin",
                  static_cast<unsigned long long>(data_hash),
                  static_cast<unsigned long long>(seed), B);
    return dir / name;
}

namespace {

constexpr std::uint64_t cache_magic = 0x53534c5344525731ULL; // "SSLSDRW1"

template <class T>
void put(std::ofstream& out, const T& v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::ifstream& in, T& v)
{
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

void put_vector(std::ofstream& out, const Vector& v)
{
    put(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

bool get_vector(std::ifstream& in, Vector& v)
{
    std::uint64_t n = 0;
    if (!get(in, n) || n > (1ULL << 32)) {
        return false;
    }
    v.resize(static_cast<Eigen::Index>(n));
    return static_cast<bool>(in.read(reinterpret_cast<char*>(v.data()),
                                     static_cast<std::streamsize>(n * sizeof(double))));
}

} // namespace

void save_draws(const PerturbationResult& result, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::invalid_argument,
            "cannot write draw cache '" + path.string() + "'");
    put(out, cache_magic);
    put(out, static_cast<std::uint64_t>(result.draws.size()));
    for (const auto& d : result.draws) {
        put(out, static_cast<std::uint64_t>(d.b));
        put(out, static_cast<std::uint8_t>(d.ok ? 1 : 0));
        put_vector(out, d.beta_delta);
        put_vector(out, d.score);
    }
}

std::optional<PerturbationResult> load_draws(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::uint64_t magic = 0;
    std::uint64_t count = 0;
    if (!get(in, magic) || magic != cache_magic || !get(in, count)) {
        return std::nullopt;
    }
    PerturbationResult out;
    out.draws.resize(count);
    for (auto& d : out.draws) {
        std::uint64_t b = 0;
        std::uint8_t ok = 0;
        if (!get(in, b) || !get(in, ok) || !get_vector(in, d.beta_delta) ||
            !get_vector(in, d.score)) {
            return std::nullopt;
        }
        d.b = b;
        d.ok = ok != 0;
        out.failures += d.ok ? 0 : 1;
    }
    return out;
}

} // namespace sslsurv
