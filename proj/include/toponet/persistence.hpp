#pragma once

#include <limits>
#include <string>
#include <vector>

#include "toponet/corrnet.hpp"

namespace toponet::persistence {

inline constexpr double kInfiniteDeath = std::numeric_limits<double>::infinity();

// Sublevel filter on a weighted graph: f(e) = w(e), f(v) = min incident f(e).
struct FilteredGraph {
    struct Edge {
        int u = 0;
        int v = 0;  // u < v
        double value = 0.0;
    };
    std::vector<std::string> vertex_ids;
    std::vector<double> vertex_values;
    std::vector<Edge> edges;

    std::size_t vertex_count() const { return vertex_ids.size(); }
};

struct PersistencePoint {
    double birth = 0.0;
    double death = 0.0;  // kInfiniteDeath for essential dim-0 classes
    int dimension = 0;
    bool essential = false;

    bool is_diagonal() const { return !essential && birth == death; }
};

struct PersistenceDiagram {
    std::vector<PersistencePoint> dim0;
    std::vector<PersistencePoint> dim1;
};

struct FiltrationOptions {
    // The min-over-incident-edges rule says nothing about isolated vertices;
    // they get the neutral correlation level.
    double isolated_vertex_value = 0.0;
};

FilteredGraph build_filtration(const corrnet::VisualNetwork& network,
                               const FiltrationOptions& options = {});

// Dimension-0 ordinary diagram by a union-find sweep and the elder rule.
// Zero-persistence (birth == death) points are recorded; the caller filters.
PersistenceDiagram compute_dg0(const FilteredGraph& fg);

// Dimension-1 extended diagram. The boundary-matrix reduction below is the
// production algorithm at this scale.
PersistenceDiagram compute_exdg1(const FilteredGraph& fg, std::size_t oracle_bound = 512);

// Full extended-filtration column reduction over F2 (ascending sublevel pass,
// then the descending superlevel pass via the cone construction). Returns
// dim-0 ordinary + essential points and dim-1 extended points.
PersistenceDiagram extended_persistence_oracle(const FilteredGraph& fg,
                                               std::size_t oracle_bound = 512);

// Points eligible for feature extraction: finite death, and off-diagonal
// unless keep_diagonal is set. Essential points are excluded.
std::vector<PersistencePoint> finite_points(const std::vector<PersistencePoint>& points,
                                            bool keep_diagonal = false);

// Verifies |dim0| = |V|, essential count = components, and
// |dim1| = |E| - |V| + components; throws NumericalError on violation.
void check_cardinalities(const FilteredGraph& fg, const PersistenceDiagram& diagram);

}  // namespace toponet::persistence
