#include "toponet/tdafeat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "toponet/errors.hpp"
#include "toponet/rng.hpp"

namespace toponet::tdafeat {

namespace {

double sq_dist(const Point2& a, const Point2& b) {
    const double db = a.birth - b.birth;
    const double dd = a.death - b.death;
    return db * db + dd * dd;
}

int nearest_centroid(const Point2& p, const std::vector<Point2>& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = sq_dist(p, centroids[c]);
        if (d < best_d) {  // strict: ties keep the lower cluster index
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

ClusteredDiagram kmeans_single(const std::vector<Point2>& points, int k, std::uint64_t seed) {
    ClusteredDiagram out;
    out.points = points;
    if (points.empty()) return out;  // empty-diagram signal, not an error

    const std::size_t n = points.size();
    std::set<std::pair<double, double>> distinct;
    for (const auto& p : points) distinct.emplace(p.birth, p.death);
    const int target_k = std::min<int>(k, static_cast<int>(distinct.size()));

    // k-means++ seeding: first center uniform, then squared-distance weighted.
    Rng rng(seed);
    std::vector<Point2> centroids;
    centroids.push_back(points[rng.next_index(n)]);
    std::vector<double> min_dist(n);
    while (static_cast<int>(centroids.size()) < target_k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& c : centroids) d = std::min(d, sq_dist(points[i], c));
            min_dist[i] = d;
            total += d;
        }
        if (total == 0.0) break;  // only duplicates of existing centers remain
        const double r = rng.next_double() * total;
        double acc = 0.0;
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            acc += min_dist[i];
            if (acc > r) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points[chosen]);
    }

    out.effective_k = static_cast<int>(centroids.size());
    out.assignment.assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            out.assignment[i] = nearest_centroid(points[i], centroids);
            inertia += sq_dist(points[i], centroids[static_cast<std::size_t>(out.assignment[i])]);
        }
        out.inertia_history.push_back(inertia);

        std::vector<Point2> next(centroids.size(), Point2{0.0, 0.0});
        std::vector<int> count(centroids.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& c = next[static_cast<std::size_t>(out.assignment[i])];
            c.birth += points[i].birth;
            c.death += points[i].death;
            ++count[static_cast<std::size_t>(out.assignment[i])];
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < centroids.size(); ++c) {
            if (count[c] == 0) continue;  // empty cluster keeps its centroid
            next[c].birth /= count[c];
            next[c].death /= count[c];
            shift = std::max(shift, std::sqrt(sq_dist(next[c], centroids[c])));
            centroids[c] = next[c];
        }
        if (shift < 1e-6) break;
    }

    // Final assignment against the settled centroids.
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.assignment[i] = nearest_centroid(points[i], centroids);
        inertia += sq_dist(points[i], centroids[static_cast<std::size_t>(out.assignment[i])]);
    }
    out.inertia_history.push_back(inertia);
    out.centroids = std::move(centroids);
    out.labels.assign(out.centroids.size(), PersistenceLabel::Absent);
    return out;
}

}  // namespace

ClusteredDiagram kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed) {
    if (k < 1) throw ConfigError("kmeans requires K >= 1");
    // Best of several seeded restarts; single Lloyd runs land in local optima
    // often enough to add visible noise to downstream descriptors.
    constexpr int kRestarts = 8;
    ClusteredDiagram best;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < kRestarts; ++r) {
        ClusteredDiagram candidate = kmeans_single(points, k, derive_seed(seed, static_cast<std::uint64_t>(r)));
        const double inertia =
            candidate.inertia_history.empty() ? 0.0 : candidate.inertia_history.back();
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best = std::move(candidate);
        }
        if (points.empty()) break;
    }
    return best;
}

void label_clusters_by_persistence(ClusteredDiagram& clustered) {
    const int k = clustered.effective_k;
    if (k == 0) return;

    std::vector<double> mean_lifespan(static_cast<std::size_t>(k), 0.0);
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < clustered.points.size(); ++i) {
        const auto c = static_cast<std::size_t>(clustered.assignment[i]);
        mean_lifespan[c] += std::abs(clustered.points[i].death - clustered.points[i].birth);
        ++count[c];
    }
    for (std::size_t c = 0; c < mean_lifespan.size(); ++c) {
        if (count[c] > 0) mean_lifespan[c] /= count[c];
    }

    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return mean_lifespan[static_cast<std::size_t>(a)] < mean_lifespan[static_cast<std::size_t>(b)];
    });

    clustered.labels.assign(static_cast<std::size_t>(k), PersistenceLabel::Absent);
    const PersistenceLabel ladder[3] = {PersistenceLabel::Less, PersistenceLabel::Moderate,
                                        PersistenceLabel::High};
    for (std::size_t rank = 0; rank < order.size() && rank < 3; ++rank) {
        clustered.labels[static_cast<std::size_t>(order[rank])] = ladder[rank];
    }
}

std::array<double, 6> diagram_features(const std::vector<Point2>& points, int k,
                                       std::uint64_t seed) {
    std::array<double, 6> out{};
    if (points.empty()) return out;

    ClusteredDiagram clustered = kmeans(points, k, seed);
    label_clusters_by_persistence(clustered);

    const double total = static_cast<double>(points.size());
    std::vector<int> count(static_cast<std::size_t>(clustered.effective_k), 0);
    for (const int a : clustered.assignment) ++count[static_cast<std::size_t>(a)];

    for (int c = 0; c < clustered.effective_k; ++c) {
        const auto label = clustered.labels[static_cast<std::size_t>(c)];
        if (label == PersistenceLabel::Absent) continue;
        const auto slot = static_cast<std::size_t>(label);
        const auto& centroid = clustered.centroids[static_cast<std::size_t>(c)];
        out[slot] = count[static_cast<std::size_t>(c)] / total;
        // Perpendicular distance of (b, d) to the diagonal d = b.
        out[slot + 3] = std::abs(centroid.death - centroid.birth) / std::sqrt(2.0);
    }
    return out;
}

const std::array<const char*, 12>& TopoFeatureVector::names() {
    static const std::array<const char*, 12> kNames = {
        "dim0_frac_less", "dim0_frac_moderate", "dim0_frac_high",
        "dim0_dist_less", "dim0_dist_moderate", "dim0_dist_high",
        "dim1_frac_less", "dim1_frac_moderate", "dim1_frac_high",
        "dim1_dist_less", "dim1_dist_moderate", "dim1_dist_high"};
    return kNames;
}

TopoFeatureVector topo_feature_vector(const persistence::PersistenceDiagram& dg0,
                                      const persistence::PersistenceDiagram& exdg1,
                                      std::uint64_t seed, const FeatureOptions& options) {
    auto to_points = [&](const std::vector<persistence::PersistencePoint>& raw) {
        std::vector<Point2> pts;
        for (const auto& p : persistence::finite_points(raw, options.keep_diagonal)) {
            pts.push_back({p.birth, p.death});
        }
        return pts;
    };

    const auto f0 = diagram_features(to_points(dg0.dim0), options.k, derive_seed(seed, 0));
    const auto f1 = diagram_features(to_points(exdg1.dim1), options.k, derive_seed(seed, 1));

    TopoFeatureVector out;
    std::copy(f0.begin(), f0.end(), out.values.begin());
    std::copy(f1.begin(), f1.end(), out.values.begin() + 6);
    return out;
}

}  // namespace toponet::tdafeat
