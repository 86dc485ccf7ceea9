#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "toponet/persistence.hpp"

namespace toponet::tdafeat {

// Persistence-ordered cluster labels.
enum class PersistenceLabel { Less = 0, Moderate = 1, High = 2, Absent = 3 };

struct Point2 {
    double birth = 0.0;
    double death = 0.0;
};

struct ClusteredDiagram {
    std::vector<Point2> points;
    std::vector<int> assignment;            // cluster index per point
    std::vector<Point2> centroids;          // effective_k entries
    std::vector<PersistenceLabel> labels;   // per cluster; set by labeling
    int effective_k = 0;                    // min(K, distinct points)
    std::vector<double> inertia_history;    // one entry per Lloyd iteration
};

// Seeded k-means++ followed by Lloyd iterations (centroid shift < 1e-6 or 100
// iterations). Duplicate-only inputs collapse to fewer clusters.
ClusteredDiagram kmeans(const std::vector<Point2>& points, int k, std::uint64_t seed);

// Orders clusters by mean |death - birth| (ascending) and assigns
// less/moderate/high; ties keep the lower cluster index first. With fewer
// than three clusters the trailing labels stay absent.
void label_clusters_by_persistence(ClusteredDiagram& clustered);

// The six per-diagram descriptors, canonical order:
// [frac_less, frac_moderate, frac_high, dist_less, dist_moderate, dist_high]
// where dist is the centroid's perpendicular distance to the diagonal.
// Empty diagrams produce six zeros.
std::array<double, 6> diagram_features(const std::vector<Point2>& points, int k,
                                       std::uint64_t seed);

struct TopoFeatureVector {
    std::array<double, 12> values{};
    static const std::array<const char*, 12>& names();
};

struct FeatureOptions {
    int k = 3;
    bool keep_diagonal = false;
};

// Twelve descriptors: six from the dim-0 diagram followed by six from the
// dim-1 diagram. Essential points are excluded; diagonal points follow the
// keep_diagonal flag.
TopoFeatureVector topo_feature_vector(const persistence::PersistenceDiagram& dg0,
                                      const persistence::PersistenceDiagram& exdg1,
                                      std::uint64_t seed, const FeatureOptions& options = {});

}  // namespace toponet::tdafeat
