#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "toponet/errors.hpp"
#include "toponet/tdafeat.hpp"

using namespace toponet;
using tdafeat::ClusteredDiagram;
using tdafeat::PersistenceLabel;
using tdafeat::Point2;

namespace {

std::set<std::set<int>> partition_of(const ClusteredDiagram& clustered) {
    std::set<std::set<int>> out;
    for (int c = 0; c < clustered.effective_k; ++c) {
        std::set<int> members;
        for (std::size_t i = 0; i < clustered.assignment.size(); ++i) {
            if (clustered.assignment[i] == c) members.insert(static_cast<int>(i));
        }
        if (!members.empty()) out.insert(members);
    }
    return out;
}

// Exhaustive K-means oracle: tries every assignment of points to 3 clusters
// and returns the partition with minimal within-cluster squared distance
// (centroids at cluster means).
std::pair<std::set<std::set<int>>, double> brute_force_kmeans3(const std::vector<Point2>& pts) {
    const int n = static_cast<int>(pts.size());
    int best_assign = -1;
    double best_inertia = std::numeric_limits<double>::infinity();
    const int combos = static_cast<int>(std::pow(3, n));
    for (int code = 0; code < combos; ++code) {
        double sum_b[3] = {0, 0, 0};
        double sum_d[3] = {0, 0, 0};
        int count[3] = {0, 0, 0};
        int c = code;
        for (int i = 0; i < n; ++i) {
            const int a = c % 3;
            c /= 3;
            sum_b[a] += pts[static_cast<std::size_t>(i)].birth;
            sum_d[a] += pts[static_cast<std::size_t>(i)].death;
            ++count[a];
        }
        double inertia = 0.0;
        c = code;
        for (int i = 0; i < n; ++i) {
            const int a = c % 3;
            c /= 3;
            const double cb = sum_b[a] / count[a];
            const double cd = sum_d[a] / count[a];
            const double db = pts[static_cast<std::size_t>(i)].birth - cb;
            const double dd = pts[static_cast<std::size_t>(i)].death - cd;
            inertia += db * db + dd * dd;
        }
        if (inertia < best_inertia) {
            best_inertia = inertia;
            best_assign = code;
        }
    }
    std::set<std::set<int>> partition;
    std::set<int> members[3];
    int c = best_assign;
    for (int i = 0; i < n; ++i) {
        members[c % 3].insert(i);
        c /= 3;
    }
    for (const auto& m : members) {
        if (!m.empty()) partition.insert(m);
    }
    return {partition, best_inertia};
}

}  // namespace

TEST_CASE("identical points collapse to a single cluster") {
    const std::vector<Point2> pts(3, Point2{1.0, 2.0});
    const auto clustered = tdafeat::kmeans(pts, 3, 5);
    CHECK(clustered.effective_k == 1);
    CHECK(clustered.assignment == std::vector<int>{0, 0, 0});
    CHECK(clustered.centroids[0].birth == 1.0);
    CHECK(clustered.centroids[0].death == 2.0);
}

TEST_CASE("seeded Lloyd reaches the brute-force optimum on three bands") {
    const std::vector<Point2> pts = {{0, 0.1}, {0, 0.12}, {0, 1.0}, {0, 1.05}, {0, 3.0}, {0, 3.1}};
    const auto [best_partition, best_inertia] = brute_force_kmeans3(pts);
    CHECK(best_partition ==
          std::set<std::set<int>>{{0, 1}, {2, 3}, {4, 5}});

    const auto clustered = tdafeat::kmeans(pts, 3, 42);
    CHECK(partition_of(clustered) == best_partition);
    CHECK(clustered.inertia_history.back() == doctest::Approx(best_inertia).epsilon(1e-9));
}

TEST_CASE("K = 1 gives the arithmetic mean centroid") {
    const std::vector<Point2> pts = {{1, 2}, {3, 4}, {5, 9}};
    const auto clustered = tdafeat::kmeans(pts, 1, 0);
    REQUIRE(clustered.effective_k == 1);
    CHECK(clustered.centroids[0].birth == doctest::Approx(3.0));
    CHECK(clustered.centroids[0].death == doctest::Approx(5.0));
}

TEST_CASE("kmeans rejects K < 1 and signals empty input") {
    CHECK_THROWS_AS(tdafeat::kmeans({{0, 1}}, 0, 1), ConfigError);
    const auto empty = tdafeat::kmeans({}, 3, 1);
    CHECK(empty.effective_k == 0);
    CHECK(empty.points.empty());
}

TEST_CASE("inertia never increases across Lloyd iterations") {
    std::vector<Point2> pts;
    for (int i = 0; i < 40; ++i) {
        pts.push_back({std::sin(0.7 * i) * 3.0, std::cos(1.3 * i) * 2.0});
    }
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto clustered = tdafeat::kmeans(pts, 3, seed);
        for (std::size_t i = 1; i < clustered.inertia_history.size(); ++i) {
            CHECK(clustered.inertia_history[i] <= clustered.inertia_history[i - 1] + 1e-9);
        }
    }
}

TEST_CASE("labels follow mean lifespan in ascending order") {
    const std::vector<Point2> pts = {{0, 0.1}, {0, 1.0}, {0, 3.0}};
    auto clustered = tdafeat::kmeans(pts, 3, 9);
    REQUIRE(clustered.effective_k == 3);
    tdafeat::label_clusters_by_persistence(clustered);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto label = clustered.labels[static_cast<std::size_t>(clustered.assignment[i])];
        if (pts[i].death == 0.1) CHECK(label == PersistenceLabel::Less);
        if (pts[i].death == 1.0) CHECK(label == PersistenceLabel::Moderate);
        if (pts[i].death == 3.0) CHECK(label == PersistenceLabel::High);
    }
}

TEST_CASE("extended points use the absolute lifespan") {
    // (7,4) lives 3: clustered against a short-lived point it lands on top.
    const std::vector<Point2> pts = {{7, 4}, {1, 1.1}};
    auto clustered = tdafeat::kmeans(pts, 2, 4);
    REQUIRE(clustered.effective_k == 2);
    tdafeat::label_clusters_by_persistence(clustered);
    const auto label_of_loop = clustered.labels[static_cast<std::size_t>(clustered.assignment[0])];
    const auto label_of_noise = clustered.labels[static_cast<std::size_t>(clustered.assignment[1])];
    CHECK(label_of_loop == PersistenceLabel::Moderate);
    CHECK(label_of_noise == PersistenceLabel::Less);
}

TEST_CASE("lifespan ties resolve toward the lower cluster index") {
    const std::vector<Point2> pts = {{0, 1}, {10, 11}};  // both lifespans exactly 1
    auto clustered = tdafeat::kmeans(pts, 2, 3);
    REQUIRE(clustered.effective_k == 2);
    tdafeat::label_clusters_by_persistence(clustered);
    CHECK(clustered.labels[0] == PersistenceLabel::Less);
    CHECK(clustered.labels[1] == PersistenceLabel::Moderate);
}

TEST_CASE("diagram features: fractions, diagonal distance, empty convention") {
    const auto thirds = tdafeat::diagram_features({{0, 0.1}, {0, 1.0}, {0, 3.0}}, 3, 8);
    CHECK(thirds[0] == doctest::Approx(1.0 / 3.0));
    CHECK(thirds[1] == doctest::Approx(1.0 / 3.0));
    CHECK(thirds[2] == doctest::Approx(1.0 / 3.0));

    // centroid (1,3) sits 2/sqrt(2) = sqrt(2) from the diagonal
    const auto lone = tdafeat::diagram_features({{1, 3}}, 3, 8);
    CHECK(lone[0] == 1.0);
    CHECK(lone[3] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(lone[1] == 0.0);
    CHECK(lone[4] == 0.0);

    const auto empty = tdafeat::diagram_features({}, 3, 8);
    for (const double v : empty) CHECK(v == 0.0);
}

TEST_CASE("fractions sum to one for nonempty diagrams") {
    std::vector<Point2> pts;
    for (int i = 0; i < 25; ++i) pts.push_back({0.1 * i, 0.1 * i + (i % 5) * 0.6});
    const auto f = tdafeat::diagram_features(pts, 3, 77);
    CHECK(f[0] + f[1] + f[2] == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 3; i < 6; ++i) CHECK(f[static_cast<std::size_t>(i)] >= 0.0);
}

TEST_CASE("uniform scaling scales distances and keeps fractions") {
    std::vector<Point2> pts = {{0, 0.2}, {0.1, 0.35}, {0, 2.0}, {0.2, 2.2}, {1, 6}, {1.2, 6.3}};
    const auto base = tdafeat::diagram_features(pts, 3, 13);

    std::vector<Point2> doubled;
    for (const auto& p : pts) doubled.push_back({2.0 * p.birth, 2.0 * p.death});
    const auto scaled = tdafeat::diagram_features(doubled, 3, 13);
    for (int i = 0; i < 3; ++i) {
        CHECK(scaled[static_cast<std::size_t>(i)] == base[static_cast<std::size_t>(i)]);
        CHECK(scaled[static_cast<std::size_t>(i + 3)] ==
              doctest::Approx(2.0 * base[static_cast<std::size_t>(i + 3)]).epsilon(1e-12));
    }

    std::vector<Point2> tripled;
    for (const auto& p : pts) tripled.push_back({3.0 * p.birth, 3.0 * p.death});
    const auto scaled3 = tdafeat::diagram_features(tripled, 3, 13);
    for (int i = 0; i < 3; ++i) {
        CHECK(scaled3[static_cast<std::size_t>(i)] == base[static_cast<std::size_t>(i)]);
        CHECK(scaled3[static_cast<std::size_t>(i + 3)] ==
              doctest::Approx(3.0 * base[static_cast<std::size_t>(i + 3)]).epsilon(1e-12));
    }
}

TEST_CASE("feature vector concatenates dim-0 then dim-1 blocks") {
    persistence::PersistenceDiagram dg0;
    for (const double d : {1.0, 1.1, 5.0, 5.2, 9.0, 9.3}) {
        dg0.dim0.push_back({0.0, d, 0, false});
    }
    persistence::PersistenceDiagram exdg1;  // empty

    const auto vec = tdafeat::topo_feature_vector(dg0, exdg1, 3);
    CHECK(vec.values[0] == doctest::Approx(1.0 / 3.0));
    CHECK(vec.values[1] == doctest::Approx(1.0 / 3.0));
    CHECK(vec.values[2] == doctest::Approx(1.0 / 3.0));
    // cluster centroids (0,1.05), (0,5.1), (0,9.15) over sqrt(2)
    CHECK(vec.values[3] == doctest::Approx(1.05 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(vec.values[4] == doctest::Approx(5.1 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(vec.values[5] == doctest::Approx(9.15 / std::sqrt(2.0)).epsilon(1e-12));
    for (int i = 6; i < 12; ++i) CHECK(vec.values[static_cast<std::size_t>(i)] == 0.0);
}

TEST_CASE("empty diagrams produce twelve zeros") {
    const auto vec = tdafeat::topo_feature_vector({}, {}, 99);
    for (const double v : vec.values) CHECK(v == 0.0);
}

TEST_CASE("essential and diagonal points are filtered before clustering") {
    persistence::PersistenceDiagram dg0;
    dg0.dim0.push_back({1.0, persistence::kInfiniteDeath, 0, true});
    dg0.dim0.push_back({2.0, 2.0, 0, false});  // diagonal
    dg0.dim0.push_back({2.0, 4.0, 0, false});
    const auto vec = tdafeat::topo_feature_vector(dg0, {}, 5);
    CHECK(vec.values[0] == 1.0);  // single survivor in the less cluster
    CHECK(vec.values[3] == doctest::Approx(2.0 / std::sqrt(2.0)));

    tdafeat::FeatureOptions keep;
    keep.keep_diagonal = true;
    const auto kept = tdafeat::topo_feature_vector(dg0, {}, 5, keep);
    CHECK(kept.values[0] + kept.values[1] + kept.values[2] == doctest::Approx(1.0));
    CHECK(kept.values[0] < 1.0);  // two points now split across clusters
}

TEST_CASE("feature extraction is deterministic given the seed") {
    persistence::PersistenceDiagram dg0;
    persistence::PersistenceDiagram exdg1;
    for (int i = 0; i < 9; ++i) {
        dg0.dim0.push_back({0.05 * i, 0.05 * i + 0.3 + 0.2 * (i % 3), 0, false});
        exdg1.dim1.push_back({0.4 + 0.1 * i, 0.1 * i, 1, false});
    }
    const auto a = tdafeat::topo_feature_vector(dg0, exdg1, 1234);
    const auto b = tdafeat::topo_feature_vector(dg0, exdg1, 1234);
    CHECK(a.values == b.values);
}
