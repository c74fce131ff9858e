#include "sslsurv/scores.hpp"

#include "sslsurv/error.hpp"
#include "sslsurv/parallel.hpp"

#include "fastmath.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sslsurv {

CensoringSurvival::CensoringSurvival(const Vector& C, const Vector& weights)
{
    const auto N = static_cast<std::size_t>(C.size());
    require(N >= 1, ErrorKind::invalid_argument, "censoring survival needs data");
    require(weights.size() == 0 || static_cast<std::size_t>(weights.size()) == N,
            ErrorKind::invalid_argument, "censoring weights have wrong length");
    std::vector<std::size_t> order(N);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return C(a) < C(b); });
    sorted_.resize(N);
    tail_weight_.assign(N + 1, 0.0);
    for (std::size_t r = 0; r < N; ++r) {
        sorted_[r] = C(order[r]);
    }
    for (std::size_t r = N; r-- > 0;) {
        const double w = weights.size() ? weights(order[r]) : 1.0;
        require(w >= 0.0 && std::isfinite(w), ErrorKind::invalid_argument,
                "censoring weights must be nonnegative");
        tail_weight_[r] = tail_weight_[r + 1] + w;
    }
    total_ = tail_weight_[0];
    require(total_ > 0.0, ErrorKind::invalid_argument,
            "censoring weights sum to zero");
}

double CensoringSurvival::evaluate(double t) const
{
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(sorted_.begin(), sorted_.end(), t) - sorted_.begin());
    return tail_weight_[idx] / total_;
}

CensoringSurvival fit_censoring(const Dataset& data, const Vector& weights)
{
    return CensoringSurvival(data.C(), weights);
}

namespace {

// Subjects ordered by X_k; for each event subject i the comparable partners
// j (X_kj > X_ki) form the suffix [start, N) of that order.
struct PairLayout
{
    std::vector<std::size_t> order;   // subject at each sorted position
    Vector weight_sorted;             // V at each sorted position
    std::vector<std::size_t> subject; // contributing subject
    std::vector<std::size_t> start;   // first sorted position with larger X
    std::vector<double> ipcw;         // V_i / G(X_i)^2
    std::vector<double> tail;         // tail[pos] = sum of V over sorted positions >= pos
    double denominator = 0.0;
};

PairLayout layout_pairs(const Dataset& data, std::size_t k,
                        const CensoringSurvival& G, const Vector& weights,
                        const ScoreOptions& opts)
{
    const std::size_t N = data.N();
    require(k < data.K(), ErrorKind::invalid_argument,
            "surrogate index out of range");
    require(weights.size() == 0 || static_cast<std::size_t>(weights.size()) == N,
            ErrorKind::invalid_argument, "score weights have wrong length");
    const auto X = data.X().col(static_cast<Eigen::Index>(k));
    const auto D = data.D().col(static_cast<Eigen::Index>(k));

    PairLayout lay;
    lay.order.resize(N);
    std::iota(lay.order.begin(), lay.order.end(), 0);
    std::stable_sort(lay.order.begin(), lay.order.end(),
                     [&](std::size_t a, std::size_t b) { return X(a) < X(b); });
    lay.weight_sorted.resize(static_cast<Eigen::Index>(N));
    for (std::size_t r = 0; r < N; ++r) {
        const double w = weights.size() ? weights(lay.order[r]) : 1.0;
        require(std::isfinite(w) && w > 0.0, ErrorKind::invalid_argument,
                "score weights must be positive");
        lay.weight_sorted(r) = w;
    }
    lay.tail.assign(N + 1, 0.0);
    for (std::size_t r = N; r-- > 0;) {
        lay.tail[r] = lay.tail[r + 1] + lay.weight_sorted(r);
    }

    std::size_t next_larger = 0;
    for (std::size_t r = 0; r < N; ++r) {
        const std::size_t i = lay.order[r];
        if (next_larger <= r) {
            next_larger = r + 1;
            while (next_larger < N && X(lay.order[next_larger]) <= X(i)) {
                ++next_larger;
            }
        }
        if (D(i) != 1 || next_larger >= N) {
            continue;
        }
        const double g = G.evaluate(X(i));
        if (g <= 0.0) {
            fail(ErrorKind::ipcw_singularity,
                 "censoring survival is zero at surrogate time of subject " +
                     data.id(i));
        }
        if (g < opts.ipcw_floor) {
            if (opts.guard == IpcwGuard::error) {
                fail(ErrorKind::ipcw_singularity,
                     "censoring survival below floor at surrogate time of "
                     "subject " + data.id(i));
            }
            continue;
        }
        const double a = lay.weight_sorted(r) / (g * g);
        lay.subject.push_back(i);
        lay.start.push_back(next_larger);
        lay.ipcw.push_back(a);
        lay.denominator += a * lay.tail[next_larger];
    }
    return lay;
}

constexpr std::size_t tile_size = 64;

// Gaussian kernel terms with squared scaled distance beyond this are below
// 5e-18 of the peak and are dropped.
constexpr double kernel_cutoff_sq = 80.0;

// Returns sum_j w_j and adds a w_j to c_j, w_j = v_j exp(-((u_j - ui) / h)^2 / 2);
// terms past the cutoff are exact zeros, which keeps subnormals out.
double pair_sweep(const double* __restrict u, const double* __restrict v,
                  double* __restrict c, Eigen::Index len, double ui, double inv_h,
                  double a)
{
    double s0 = 0.0;
#pragma omp simd reduction(+ : s0)
    for (Eigen::Index j = 0; j < len; ++j) {
        const double d = (u[j] - ui) * inv_h;
        const double q = d * d;
        const double e = detail::exp_clamped(-0.5 * q);
        const double w = (q < kernel_cutoff_sq ? e : 0.0) * v[j];
        s0 += w;
        c[j] += a * w;
    }
    return s0;
}

} // namespace

Vector smoothed_score(const Dataset& data, std::size_t k, const Vector& Bdir,
                      const Kernel& kernel, double h, const CensoringSurvival& G,
                      const Vector& weights, const ScoreOptions& opts,
                      double* denominator)
{
    const std::size_t N = data.N();
    const std::size_t p = data.p();
    require(static_cast<std::size_t>(Bdir.size()) == p,
            ErrorKind::invalid_argument, "score direction has wrong dimension");
    require(std::abs(Bdir.norm() - 1.0) < 1e-8, ErrorKind::invalid_argument,
            "score direction must have unit norm");
    require(std::isfinite(h) && h > 0.0, ErrorKind::invalid_argument,
            "score bandwidth must be positive");
    require(kernel.family() == KernelFamily::gaussian, ErrorKind::invalid_argument,
            "unsupported kernel family");

    const PairLayout lay = layout_pairs(data, k, G, weights, opts);
    if (denominator) {
        *denominator = lay.denominator;
    }
    require(lay.denominator > 0.0, ErrorKind::degenerate_pairs,
            "no comparable pairs for surrogate " + std::to_string(k + 1));

    // sorted copies: index, weight, covariates (column major, contiguous in j)
    const Vector index = data.Z() * Bdir;
    Eigen::ArrayXd u_sorted(static_cast<Eigen::Index>(N));
    Matrix z_sorted(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < N; ++r) {
        u_sorted(r) = index(lay.order[r]);
        z_sorted.row(r) = data.Z().row(lay.order[r]);
    }
    const Eigen::ArrayXd v_sorted = lay.weight_sorted.array();

    const double inv_h = 1.0 / h;
    const std::size_t contributors = lay.subject.size();
    const std::size_t tiles = (contributors + tile_size - 1) / tile_size;
    std::vector<Vector> partial(tiles, Vector::Zero(p));

    // sum_i a_i sum_j w_ij Z_j = Z' c with c_j = sum_i a_i w_ij, so each
    // pair costs one multiply-add; Z enters once per tile
    parallel_for(tiles, [&](std::size_t t) {
        const std::size_t first = t * tile_size;
        const std::size_t end = std::min(contributors, first + tile_size);
        const auto lo = static_cast<Eigen::Index>(lay.start[first]);
        const auto span = static_cast<Eigen::Index>(N) - lo;
        Eigen::ArrayXd c = Eigen::ArrayXd::Zero(span);
        Vector acc = Vector::Zero(p);
        for (std::size_t q = first; q < end; ++q) {
            const std::size_t i = lay.subject[q];
            const auto s = static_cast<Eigen::Index>(lay.start[q]);
            const double a = lay.ipcw[q];
            const double s0 = pair_sweep(u_sorted.data() + s, v_sorted.data() + s,
                                         c.data() + (s - lo),
                                         static_cast<Eigen::Index>(N) - s, index(i),
                                         inv_h, a);
            acc.noalias() += (a * s0) * data.Z().row(i).transpose();
        }
        acc.noalias() -= z_sorted.middleRows(lo, span).transpose() * c.matrix();
        partial[t] = acc;
    });

    Vector num = Vector::Zero(p);
    for (const auto& part : partial) {
        num += part;
    }
    // Gaussian normalization of K_h folded in once
    const double scale = kernel_density(kernel, 0.0, h);
    return num * (scale / lay.denominator);
}

ScoreBundle stacked_score(const Dataset& data, const Vector& Bdir,
                          const Kernel& kernel, const BandwidthConfig& bw,
                          const Vector& weights, const ScoreOptions& opts)
{
    const std::size_t K = data.K();
    const std::size_t p = data.p();
    require(bw.h_score.size() == K, ErrorKind::invalid_argument,
            "need one score bandwidth per surrogate");
    const CensoringSurvival G = fit_censoring(data, weights);
    ScoreBundle out;
    out.S.resize(static_cast<Eigen::Index>(K * p));
    out.Q.resize(static_cast<Eigen::Index>(K));
    out.denominators.resize(K);
    out.bandwidths = bw.h_score;
    for (std::size_t k = 0; k < K; ++k) {
        out.S.segment(static_cast<Eigen::Index>(k * p), static_cast<Eigen::Index>(p)) =
            smoothed_score(data, k, Bdir, kernel, bw.h_score[k], G, weights, opts,
                           &out.denominators[k]);
        out.Q(k) = rank_correlation(data, k, Bdir, G, weights, opts).normalized;
    }
    return out;
}

namespace {

// Fenwick tree over value ranks
class Fenwick
{
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0.0) {}

    void add(std::size_t pos, double w)
    {
        for (std::size_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) {
            tree_[i] += w;
        }
    }

    // sum over positions [0, pos)
    double prefix(std::size_t pos) const
    {
        double s = 0.0;
        for (std::size_t i = pos; i > 0; i -= i & (~i + 1)) {
            s += tree_[i];
        }
        return s;
    }

private:
    std::vector<double> tree_;
};

} // namespace

RankCorrelation rank_correlation(const Dataset& data, std::size_t k,
                                 const Vector& beta, const CensoringSurvival& G,
                                 const Vector& weights, const ScoreOptions& opts)
{
    const std::size_t N = data.N();
    require(static_cast<std::size_t>(beta.size()) == data.p(),
            ErrorKind::invalid_argument, "coefficient vector has wrong dimension");
    const PairLayout lay = layout_pairs(data, k, G, weights, opts);
    require(lay.denominator > 0.0, ErrorKind::degenerate_pairs,
            "no comparable pairs for surrogate " + std::to_string(k + 1));

    const Vector index = data.Z() * beta;
    std::vector<double> values(index.data(), index.data() + N);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    auto rank_of = [&](double u) {
        return static_cast<std::size_t>(
            std::lower_bound(values.begin(), values.end(), u) - values.begin());
    };

    // walk contributors from the largest X down, inserting partners with
    // strictly larger X before each query
    Fenwick tree(values.size());
    std::size_t inserted_from = N;
    double num = 0.0;
    for (std::size_t c = lay.subject.size(); c-- > 0;) {
        while (inserted_from > lay.start[c]) {
            --inserted_from;
            const std::size_t j = lay.order[inserted_from];
            tree.add(rank_of(index(j)), lay.weight_sorted(inserted_from));
        }
        const std::size_t i = lay.subject[c];
        num += lay.ipcw[c] * tree.prefix(rank_of(index(i)));
    }
    RankCorrelation out;
    out.raw = num / (static_cast<double>(N) * static_cast<double>(N));
    out.normalized = num / lay.denominator;
    return out;
}

double aggregated_rank_correlation(const Dataset& data, const Vector& beta,
                                   const ScoreOptions& opts)
{
    const CensoringSurvival G = fit_censoring(data);
    double total = 0.0;
    for (std::size_t k = 0; k < data.K(); ++k) {
        total += rank_correlation(data, k, beta, G, Vector(), opts).normalized;
    }
    return total;
}

} // namespace sslsurv
