#include "linkmine/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "linkmine/util.hpp"

namespace linkmine {

namespace {

constexpr double kMonotoneTol = 1e-9;

using Row = std::vector<SparseDtm::Entry>;

double row_norm_sq(const Row& row) {
    double s = 0.0;
    for (const auto& e : row) s += e.value * e.value;
    return s;
}

// ||x - c||^2 via ||x||^2 + ||c||^2 - 2<x,c>, clamped at zero.
double dist_sq(const Row& row, double row_norm, const std::vector<double>& c,
               double c_norm) {
    double dot = 0.0;
    for (const auto& e : row) dot += e.value * c[e.col];
    const double d = row_norm + c_norm - 2.0 * dot;
    return d > 0.0 ? d : 0.0;
}

struct FitContext {
    const SparseDtm& m;
    std::vector<std::size_t> fit_docs;  // non-empty rows, ascending
    std::vector<double> norms;          // ||x||^2 per fit doc
};

FitContext make_context(const SparseDtm& m) {
    FitContext ctx{m, {}, {}};
    for (std::size_t d = 0; d < m.rows.size(); ++d) {
        if (!m.rows[d].empty()) {
            ctx.fit_docs.push_back(d);
            ctx.norms.push_back(row_norm_sq(m.rows[d]));
        }
    }
    return ctx;
}

std::vector<double> centroid_norms(const std::vector<std::vector<double>>& cs) {
    std::vector<double> norms(cs.size());
    for (std::size_t j = 0; j < cs.size(); ++j) {
        double s = 0.0;
        for (double v : cs[j]) s += v * v;
        norms[j] = s;
    }
    return norms;
}

// Index of the nearest centroid, ties to the lowest index.
std::size_t nearest(const Row& row, double row_norm,
                    const std::vector<std::vector<double>>& cs,
                    const std::vector<double>& cnorms, double* out_dist = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cs.size(); ++j) {
        const double d = dist_sq(row, row_norm, cs[j], cnorms[j]);
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    if (out_dist) *out_dist = best_d;
    return best;
}

std::vector<std::vector<double>> seed_kmeanspp(const FitContext& ctx,
                                               std::size_t k, Rng& rng) {
    const std::size_t n = ctx.fit_docs.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(k);
    std::vector<bool> chosen(n, false);

    auto densify = [&](std::size_t fit_idx) {
        std::vector<double> c(ctx.m.vocab.size(), 0.0);
        for (const auto& e : ctx.m.rows[ctx.fit_docs[fit_idx]]) c[e.col] = e.value;
        return c;
    };

    std::size_t first = rng.next_index(n);
    chosen[first] = true;
    centroids.push_back(densify(first));

    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    while (centroids.size() < k) {
        const auto& latest = centroids.back();
        double latest_norm = 0.0;
        for (double v : latest) latest_norm += v * v;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = dist_sq(ctx.m.rows[ctx.fit_docs[i]], ctx.norms[i],
                                     latest, latest_norm);
            if (d < min_d[i]) min_d[i] = d;
            if (!chosen[i]) total += min_d[i];
        }
        std::size_t pick = n;  // sentinel
        if (total > 0.0) {
            // D^2-weighted draw by prefix scan.
            const double u = rng.next_double() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i]) continue;
                acc += min_d[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {  // floating-point edge: take the last candidate
                for (std::size_t i = n; i-- > 0;) {
                    if (!chosen[i]) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            // All remaining points coincide with a centroid; pick uniformly
            // among the unchosen.
            std::vector<std::size_t> pool;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) pool.push_back(i);
            }
            pick = pool[rng.next_index(pool.size())];
        }
        chosen[pick] = true;
        centroids.push_back(densify(pick));
    }
    return centroids;
}

struct LloydOutcome {
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> assign;  // over fit docs
    double wcss = 0.0;
    std::vector<double> history;  // objective after each step
    std::size_t iterations = 0;
    bool converged = false;
};

// One assignment pass plus empty-cluster repair. Seized documents are
// forced into the empty cluster, which with duplicate points can override
// the ties-to-lowest rule (unsatisfiable otherwise).
void assign_and_repair(const FitContext& ctx,
                       std::vector<std::vector<double>>& centroids,
                       std::vector<std::size_t>& assign,
                       std::vector<double>& dists) {
    const std::size_t n = ctx.fit_docs.size();
    const std::size_t k = centroids.size();
    auto cnorms = centroid_norms(centroids);
    assign.resize(n);
    dists.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        assign[i] = nearest(ctx.m.rows[ctx.fit_docs[i]], ctx.norms[i], centroids,
                            cnorms, &dists[i]);
    }
    for (std::size_t repair = 0; repair < k; ++repair) {
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t a : assign) ++sizes[a];
        std::size_t empty = k;
        for (std::size_t j = 0; j < k; ++j) {
            if (sizes[j] == 0) {
                empty = j;
                break;
            }
        }
        if (empty == k) break;
        // Farthest point whose cluster can spare it; ties to lowest index.
        std::size_t victim = n;
        double worst = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (sizes[assign[i]] < 2) continue;
            if (dists[i] > worst) {
                worst = dists[i];
                victim = i;
            }
        }
        if (victim == n) break;  // nothing to seize (duplicate-heavy data)
        centroids[empty].assign(ctx.m.vocab.size(), 0.0);
        for (const auto& e : ctx.m.rows[ctx.fit_docs[victim]]) {
            centroids[empty][e.col] = e.value;
        }
        assign[victim] = empty;
        dists[victim] = 0.0;
    }
}

void update_centroids(const FitContext& ctx,
                      const std::vector<std::size_t>& assign, std::size_t k,
                      std::vector<std::vector<double>>& centroids) {
    const std::size_t dim = ctx.m.vocab.size();
    for (auto& c : centroids) c.assign(dim, 0.0);
    std::vector<std::size_t> sizes(k, 0);
    // Accumulation in ascending document order keeps sums bit-stable.
    for (std::size_t i = 0; i < ctx.fit_docs.size(); ++i) {
        const std::size_t j = assign[i];
        ++sizes[j];
        for (const auto& e : ctx.m.rows[ctx.fit_docs[i]]) {
            centroids[j][e.col] += e.value;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (sizes[j] == 0) continue;  // repaired before update in practice
        const double inv = 1.0 / static_cast<double>(sizes[j]);
        for (double& v : centroids[j]) v *= inv;
    }
}

double cost(const FitContext& ctx,
            const std::vector<std::vector<double>>& centroids,
            const std::vector<std::size_t>& assign) {
    auto cnorms = centroid_norms(centroids);
    double total = 0.0;
    for (std::size_t i = 0; i < ctx.fit_docs.size(); ++i) {
        total += dist_sq(ctx.m.rows[ctx.fit_docs[i]], ctx.norms[i],
                         centroids[assign[i]], cnorms[assign[i]]);
    }
    return total;
}

LloydOutcome lloyd(const FitContext& ctx,
                   std::vector<std::vector<double>> centroids,
                   std::size_t max_iter, double tol) {
    LloydOutcome out;
    const std::size_t k = centroids.size();
    std::vector<std::size_t> assign, prev_assign;
    std::vector<double> dists;
    double prev_wcss = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= max_iter; ++it) {
        out.iterations = it;
        assign_and_repair(ctx, centroids, assign, dists);
        const double wcss_pre =
            std::accumulate(dists.begin(), dists.end(), 0.0);
        if (wcss_pre > prev_wcss + kMonotoneTol * (1.0 + prev_wcss)) {
            throw std::logic_error("lloyd: cost increased across iterations");
        }
        if (it > 1 && assign == prev_assign) {
            out.converged = true;
            out.wcss = wcss_pre;
            out.history.push_back(wcss_pre);
            break;
        }
        update_centroids(ctx, assign, k, centroids);
        const double wcss_post = cost(ctx, centroids, assign);
        out.wcss = wcss_post;
        out.history.push_back(wcss_post);
        const bool small_gain =
            prev_wcss - wcss_post < tol && it > 1;
        prev_wcss = wcss_post;
        prev_assign = assign;
        if (small_gain) {
            out.converged = true;
            // Final assignment pass restores the nearest-centroid invariant.
            assign_and_repair(ctx, centroids, assign, dists);
            out.wcss = std::accumulate(dists.begin(), dists.end(), 0.0);
            out.history.push_back(out.wcss);
            break;
        }
    }
    if (!out.converged) {
        assign_and_repair(ctx, centroids, assign, dists);
        out.wcss = std::accumulate(dists.begin(), dists.end(), 0.0);
        out.history.push_back(out.wcss);
    }
    out.centroids = std::move(centroids);
    out.assign = std::move(assign);
    return out;
}

ClusteringResult finish_result(const FitContext& ctx, LloydOutcome&& fit,
                               std::size_t k, std::uint64_t seed) {
    ClusteringResult r;
    r.k = k;
    r.seed = seed;
    r.iterations = fit.iterations;
    r.converged = fit.converged;
    r.wcss_history = std::move(fit.history);
    r.centroids = std::move(fit.centroids);
    r.assignments.assign(ctx.m.n_docs(), 0);
    r.cluster_wcss.assign(k, 0.0);

    auto cnorms = centroid_norms(r.centroids);
    for (std::size_t i = 0; i < ctx.fit_docs.size(); ++i) {
        const std::size_t d = ctx.fit_docs[i];
        const std::size_t j = fit.assign[i];
        r.assignments[d] = j;
        r.cluster_wcss[j] += dist_sq(ctx.m.rows[d], ctx.norms[i],
                                     r.centroids[j], cnorms[j]);
    }
    r.total_wcss =
        std::accumulate(r.cluster_wcss.begin(), r.cluster_wcss.end(), 0.0);
    // Zero rows: no cost contribution, nearest-centroid assignment.
    for (std::size_t d = 0; d < ctx.m.n_docs(); ++d) {
        if (!ctx.m.rows[d].empty()) continue;
        r.zero_docs.push_back(d);
        static const Row empty_row;
        r.assignments[d] = nearest(empty_row, 0.0, r.centroids, cnorms);
    }
    return r;
}

LloydOutcome best_of_restarts(const FitContext& ctx, std::size_t k,
                              std::size_t restarts, const Rng& seed_source,
                              std::uint64_t salt_base, std::size_t max_iter,
                              double tol) {
    LloydOutcome best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (std::size_t rs = 0; rs < restarts; ++rs) {
        Rng rng(seed_source.derive(salt_base + rs));
        auto outcome = lloyd(ctx, seed_kmeanspp(ctx, k, rng), max_iter, tol);
        if (outcome.wcss < best.wcss) best = std::move(outcome);
    }
    return best;
}

// Splits the max-WCSS cluster of a (k-1)-solution by adding its farthest
// member as a new centroid. Guarantees the warm-started k-run starts at
// or below the previous cost.
std::vector<std::vector<double>> split_centroids(const FitContext& ctx,
                                                 const LloydOutcome& prev) {
    auto centroids = prev.centroids;
    auto cnorms = centroid_norms(centroids);
    const std::size_t k_prev = centroids.size();
    std::vector<double> wcss(k_prev, 0.0);
    std::vector<double> dists(ctx.fit_docs.size(), 0.0);
    for (std::size_t i = 0; i < ctx.fit_docs.size(); ++i) {
        const std::size_t j = prev.assign[i];
        dists[i] = dist_sq(ctx.m.rows[ctx.fit_docs[i]], ctx.norms[i],
                           centroids[j], cnorms[j]);
        wcss[j] += dists[i];
    }
    const std::size_t worst_cluster = static_cast<std::size_t>(
        std::max_element(wcss.begin(), wcss.end()) - wcss.begin());
    std::size_t far_doc = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < ctx.fit_docs.size(); ++i) {
        if (prev.assign[i] != worst_cluster) continue;
        if (dists[i] > far_d) {
            far_d = dists[i];
            far_doc = i;
        }
    }
    std::vector<double> extra(ctx.m.vocab.size(), 0.0);
    for (const auto& e : ctx.m.rows[ctx.fit_docs[far_doc]]) {
        extra[e.col] = e.value;
    }
    centroids.push_back(std::move(extra));
    return centroids;
}

}  // namespace

ClusteringResult kmeans(const SparseDtm& m, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter, double tol) {
    if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
    if (max_iter == 0) throw std::invalid_argument("kmeans: max_iter must be >= 1");
    if (tol < 0.0) throw std::invalid_argument("kmeans: tol must be >= 0");
    FitContext ctx = make_context(m);
    if (k > ctx.fit_docs.size()) {
        throw std::invalid_argument(
            "kmeans: k exceeds the number of non-empty documents (" +
            std::to_string(ctx.fit_docs.size()) + ")");
    }
    Rng rng(seed);
    auto outcome = lloyd(ctx, seed_kmeanspp(ctx, k, rng), max_iter, tol);
    return finish_result(ctx, std::move(outcome), k, seed);
}

double total_wcss(const SparseDtm& m, const ClusteringResult& r) {
    if (r.assignments.size() != m.n_docs()) {
        throw std::invalid_argument("total_wcss: assignment count != n_docs");
    }
    for (const auto& c : r.centroids) {
        if (c.size() != m.vocab.size()) {
            throw std::invalid_argument("total_wcss: centroid dimension mismatch");
        }
    }
    std::vector<bool> is_zero(m.n_docs(), false);
    for (std::size_t d : r.zero_docs) is_zero[d] = true;
    auto cnorms = centroid_norms(r.centroids);
    double total = 0.0;
    for (std::size_t d = 0; d < m.n_docs(); ++d) {
        if (is_zero[d]) continue;
        const std::size_t j = r.assignments[d];
        if (j >= r.centroids.size()) {
            throw std::invalid_argument("total_wcss: assignment out of range");
        }
        total += dist_sq(m.rows[d], row_norm_sq(m.rows[d]), r.centroids[j],
                         cnorms[j]);
    }
    if (std::abs(total - r.total_wcss) > kMonotoneTol * (1.0 + total)) {
        throw std::logic_error("total_wcss: result does not match its matrix");
    }
    return total;
}

ElbowScanResult elbow_scan(const SparseDtm& m, std::size_t k_min,
                           std::size_t k_max, std::size_t restarts,
                           std::uint64_t seed, std::size_t max_iter,
                           double tol) {
    if (k_min == 0 || k_min > k_max) {
        throw std::invalid_argument("elbow_scan: bad k range");
    }
    if (restarts == 0) {
        throw std::invalid_argument("elbow_scan: restarts must be >= 1");
    }
    FitContext ctx = make_context(m);
    if (k_max > ctx.fit_docs.size()) {
        throw std::invalid_argument(
            "elbow_scan: k range exceeds the number of non-empty documents");
    }
    ElbowScanResult out;
    out.curve.restarts = restarts;
    out.curve.seed = seed;
    Rng seed_source(seed);
    std::optional<LloydOutcome> prev_best;
    for (std::size_t k = k_min; k <= k_max; ++k) {
        auto best = best_of_restarts(ctx, k, restarts, seed_source,
                                     k * 1000003ULL, max_iter, tol);
        if (prev_best && prev_best->centroids.size() == k - 1) {
            auto warm = lloyd(ctx, split_centroids(ctx, *prev_best), max_iter, tol);
            if (warm.wcss < best.wcss) best = std::move(warm);
        }
        // Curve values come from the finished result so curve and best
        // stay bitwise aligned; the re-accumulated objective can differ
        // from lloyd's running sum in the last ulps.
        ClusteringResult finished = finish_result(ctx, LloydOutcome(best), k, seed);
        out.curve.points.push_back({k, finished.total_wcss});
        out.best.push_back(std::move(finished));
        prev_best = std::move(best);
    }
    return out;
}

ElbowChoice detect_elbow(const ElbowCurve& curve) {
    const auto& pts = curve.points;
    if (pts.size() < 3) {
        throw std::invalid_argument("detect_elbow: need at least 3 points");
    }
    const double k0 = static_cast<double>(pts.front().k);
    const double k1 = static_cast<double>(pts.back().k);
    double w_min = pts.front().wcss, w_max = pts.front().wcss;
    for (const auto& p : pts) {
        w_min = std::min(w_min, p.wcss);
        w_max = std::max(w_max, p.wcss);
    }
    ElbowChoice choice;
    if (w_max - w_min <= 0.0) {
        // Flat curve: no information, fall back to the smallest interior k.
        choice.k = pts[1].k;
        choice.degenerate = true;
        return choice;
    }
    auto nx = [&](const ElbowCurve::Point& p) {
        return (static_cast<double>(p.k) - k0) / (k1 - k0);
    };
    auto ny = [&](const ElbowCurve::Point& p) {
        return (p.wcss - w_min) / (w_max - w_min);
    };
    const double x1 = nx(pts.front()), y1 = ny(pts.front());
    const double x2 = nx(pts.back()), y2 = ny(pts.back());
    const double chord = std::hypot(x2 - x1, y2 - y1);
    std::size_t best_k = pts[1].k;
    double best_d = -1.0;
    for (const auto& p : pts) {
        const double d =
            std::abs((y2 - y1) * nx(p) - (x2 - x1) * ny(p) + x2 * y1 - y2 * x1) /
            chord;
        if (d > best_d + 1e-15) {
            best_d = d;
            best_k = p.k;
        }
    }
    choice.k = best_k;
    choice.max_distance = best_d;
    if (best_d <= 1e-9) {
        // All points sit on the chord.
        choice.k = pts[1].k;
        choice.degenerate = true;
    }
    return choice;
}

std::vector<std::size_t> cluster_sizes(const ClusteringResult& r) {
    std::vector<std::size_t> sizes(r.k, 0);
    for (std::size_t a : r.assignments) ++sizes[a];
    return sizes;
}

TagCloud tag_cloud(const SparseDtm& m, const ClusteringResult& r,
                   std::size_t cluster, std::size_t top_n) {
    if (cluster >= r.k) {
        throw std::invalid_argument("tag_cloud: cluster index out of range");
    }
    if (top_n == 0) throw std::invalid_argument("tag_cloud: top_n must be >= 1");
    if (r.assignments.size() != m.n_docs()) {
        throw std::invalid_argument("tag_cloud: result does not match matrix");
    }
    std::vector<double> mass(m.vocab.size(), 0.0);
    for (std::size_t d = 0; d < m.n_docs(); ++d) {
        if (r.assignments[d] != cluster) continue;
        for (const auto& e : m.rows[d]) mass[e.col] += e.value;
    }
    std::vector<std::uint32_t> cols;
    for (std::uint32_t c = 0; c < mass.size(); ++c) {
        if (mass[c] > 0.0) cols.push_back(c);
    }
    std::sort(cols.begin(), cols.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (mass[a] != mass[b]) return mass[a] > mass[b];
        return m.vocab.terms[a] < m.vocab.terms[b];
    });
    TagCloud cloud;
    cloud.cluster = cluster;
    for (std::size_t i = 0; i < cols.size() && i < top_n; ++i) {
        cloud.terms.push_back({m.vocab.terms[cols[i]], mass[cols[i]]});
    }
    return cloud;
}

std::vector<TagCloud> subtract_common_terms(const std::vector<TagCloud>& clouds,
                                            double commonality) {
    if (!(commonality > 0.0 && commonality <= 1.0)) {
        throw std::invalid_argument(
            "subtract_common_terms: commonality must be in (0, 1]");
    }
    if (clouds.size() < 2) {
        throw std::invalid_argument(
            "subtract_common_terms: needs at least 2 clouds (with one cloud "
            "every term is common)");
    }
    std::unordered_map<std::string, std::size_t> appearances;
    for (const auto& cloud : clouds) {
        for (const auto& t : cloud.terms) ++appearances[t.term];
    }
    const double cutoff = commonality * static_cast<double>(clouds.size());
    std::vector<TagCloud> out;
    out.reserve(clouds.size());
    for (const auto& cloud : clouds) {
        TagCloud adjusted;
        adjusted.cluster = cloud.cluster;
        for (const auto& t : cloud.terms) {
            if (static_cast<double>(appearances[t.term]) < cutoff) {
                adjusted.terms.push_back(t);
            }
        }
        out.push_back(std::move(adjusted));
    }
    return out;
}

std::string tag_cloud_to_json(const TagCloud& cloud) {
    nlohmann::ordered_json j;
    j["cluster"] = cloud.cluster;
    auto terms = nlohmann::ordered_json::array();
    for (const auto& t : cloud.terms) {
        nlohmann::ordered_json e;
        e["term"] = t.term;
        e["weight"] = t.weight;
        terms.push_back(e);
    }
    j["terms"] = terms;
    return j.dump(2) + "\n";
}

}  // namespace linkmine
