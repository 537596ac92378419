#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linkmine/textpipe.hpp"

namespace linkmine {

struct ClusteringResult {
    std::size_t k = 0;
    // k dense centroids over the vocabulary dimension.
    std::vector<std::vector<double>> centroids;
    // Per-document cluster index in [0, k); covers every document,
    // including all-zero rows assigned after fitting.
    std::vector<std::size_t> assignments;
    // WCSS over fitted (non-empty) documents; zero rows are assigned but
    // reported separately and carry no cost.
    std::vector<double> cluster_wcss;
    double total_wcss = 0.0;
    // Objective after each Lloyd step, non-increasing by construction;
    // the last entry matches total_wcss up to rounding.
    std::vector<double> wcss_history;
    std::uint64_t seed = 0;
    std::size_t iterations = 0;
    bool converged = false;
    // Documents excluded from fitting (all-zero rows), ascending.
    std::vector<std::size_t> zero_docs;
};

struct ElbowCurve {
    struct Point {
        std::size_t k;
        double wcss;
    };
    std::vector<Point> points;  // k strictly increasing
    std::size_t restarts = 0;
    std::uint64_t seed = 0;
};

struct ElbowScanResult {
    ElbowCurve curve;
    // Best clustering found for each scanned k, aligned with curve.points.
    std::vector<ClusteringResult> best;
};

struct ElbowChoice {
    std::size_t k = 0;
    double max_distance = 0.0;  // normalized chord distance at the knee
    // Set when the curve is (near-)collinear and the choice is a
    // low-confidence fallback to the smallest interior k.
    bool degenerate = false;
};

struct TagCloud {
    std::size_t cluster = 0;
    struct Term {
        std::string term;
        double weight;
    };
    // Weights non-increasing; ties broken lexicographically.
    std::vector<Term> terms;
};

// Lloyd iterations from k-means++ seeding, deterministic under seed.
// Empty clusters are repaired by seizing the point farthest from its
// centroid; all-zero rows are excluded from fitting and assigned to their
// nearest centroid afterwards. Throws std::invalid_argument when k is 0
// or exceeds the number of non-empty documents.
ClusteringResult kmeans(const SparseDtm& m, std::size_t k, std::uint64_t seed,
                        std::size_t max_iter = 100, double tol = 1e-9);

// Recomputes the fitted-document WCSS for r against m and checks it
// matches r.total_wcss within 1e-9. Throws on dimension mismatch.
double total_wcss(const SparseDtm& m, const ClusteringResult& r);

// Best-of-restarts WCSS per k, plus a warm start from the previous k's
// best solution with one split centroid, which keeps the curve
// non-increasing. Deterministic under seed.
ElbowScanResult elbow_scan(const SparseDtm& m, std::size_t k_min,
                           std::size_t k_max, std::size_t restarts,
                           std::uint64_t seed, std::size_t max_iter = 100,
                           double tol = 1e-9);

// k maximizing perpendicular distance to the first-to-last chord after
// min-max normalizing both axes; ties go to the smallest k. Requires at
// least 3 points.
ElbowChoice detect_elbow(const ElbowCurve& curve);

// Counts per cluster index; sums to the number of assigned documents.
std::vector<std::size_t> cluster_sizes(const ClusteringResult& r);

// Top terms of one cluster by aggregate DTM mass; zero-weight terms are
// omitted, so fewer than top_n entries may come back.
TagCloud tag_cloud(const SparseDtm& m, const ClusteringResult& r,
                   std::size_t cluster, std::size_t top_n);

// Removes terms present in >= commonality * k of the clouds and re-ranks
// the rest. Rejected for a single cloud (everything would be common).
std::vector<TagCloud> subtract_common_terms(const std::vector<TagCloud>& clouds,
                                            double commonality);

std::string tag_cloud_to_json(const TagCloud& cloud);

}  // namespace linkmine
