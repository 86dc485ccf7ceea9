#include "toponet/persistence.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "toponet/errors.hpp"

namespace toponet::persistence {

namespace {

struct DisjointSet {
    std::vector<int> parent;
    std::vector<int> size;

    explicit DisjointSet(int n) : parent(n), size(n, 1) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    int find(int x) {
        while (x != parent[x]) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    // Plain union; the elder-rule bookkeeping lives with the caller.
    int unite(int a, int b) {
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        return a;
    }
};

std::pair<std::string, std::string> edge_id(const FilteredGraph& fg, const FilteredGraph::Edge& e) {
    const auto& a = fg.vertex_ids[static_cast<std::size_t>(e.u)];
    const auto& b = fg.vertex_ids[static_cast<std::size_t>(e.v)];
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void validate_filtration(const FilteredGraph& fg) {
    const int n = static_cast<int>(fg.vertex_count());
    if (fg.vertex_values.size() != fg.vertex_count()) {
        throw DataError("filtration: vertex value count does not match vertex count");
    }
    std::vector<double> min_incident(static_cast<std::size_t>(n), kInfiniteDeath);
    for (const auto& e : fg.edges) {
        if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n || e.u == e.v) {
            throw DataError("filtration: edge endpoints out of range");
        }
        min_incident[static_cast<std::size_t>(e.u)] =
            std::min(min_incident[static_cast<std::size_t>(e.u)], e.value);
        min_incident[static_cast<std::size_t>(e.v)] =
            std::min(min_incident[static_cast<std::size_t>(e.v)], e.value);
    }
    for (int v = 0; v < n; ++v) {
        if (min_incident[static_cast<std::size_t>(v)] != kInfiniteDeath &&
            fg.vertex_values[static_cast<std::size_t>(v)] != min_incident[static_cast<std::size_t>(v)]) {
            throw DataError("filtration: vertex '" + fg.vertex_ids[static_cast<std::size_t>(v)] +
                            "' violates the min-incident-edge rule");
        }
    }
}

int component_count(const FilteredGraph& fg) {
    DisjointSet ds(static_cast<int>(fg.vertex_count()));
    int components = static_cast<int>(fg.vertex_count());
    for (const auto& e : fg.edges) {
        const int ru = ds.find(e.u);
        const int rv = ds.find(e.v);
        if (ru != rv) {
            ds.unite(ru, rv);
            --components;
        }
    }
    return components;
}

// ----- extended persistence reduction -------------------------------------

struct Column {
    std::vector<int> rows;  // sorted ascending; F2 coefficients

    int low() const { return rows.empty() ? -1 : rows.back(); }

    void add(const Column& other) {
        std::vector<int> merged;
        merged.reserve(rows.size() + other.rows.size());
        std::set_symmetric_difference(rows.begin(), rows.end(), other.rows.begin(),
                                      other.rows.end(), std::back_inserter(merged));
        rows = std::move(merged);
    }
};

struct CellRef {
    int dim = 0;    // 0 vertex, 1 edge
    int index = 0;  // into vertex_ids or edges
};

}  // namespace

FilteredGraph build_filtration(const corrnet::VisualNetwork& network,
                               const FiltrationOptions& options) {
    FilteredGraph fg;
    fg.vertex_ids = network.vertices;
    fg.vertex_values.assign(fg.vertex_ids.size(), kInfiniteDeath);
    fg.edges.reserve(network.edges.size());
    for (const auto& e : network.edges) {
        const int u = std::min(e.i, e.j);
        const int v = std::max(e.i, e.j);
        fg.edges.push_back({u, v, e.weight});
        fg.vertex_values[static_cast<std::size_t>(u)] =
            std::min(fg.vertex_values[static_cast<std::size_t>(u)], e.weight);
        fg.vertex_values[static_cast<std::size_t>(v)] =
            std::min(fg.vertex_values[static_cast<std::size_t>(v)], e.weight);
    }
    for (auto& value : fg.vertex_values) {
        if (value == kInfiniteDeath) value = options.isolated_vertex_value;
    }
    return fg;
}

PersistenceDiagram compute_dg0(const FilteredGraph& fg) {
    validate_filtration(fg);
    const int n = static_cast<int>(fg.vertex_count());

    // Sweep order: edges by filter value, ties broken by lexicographic id pair.
    std::vector<int> edge_order(fg.edges.size());
    std::iota(edge_order.begin(), edge_order.end(), 0);
    std::sort(edge_order.begin(), edge_order.end(), [&](int a, int b) {
        const auto& ea = fg.edges[static_cast<std::size_t>(a)];
        const auto& eb = fg.edges[static_cast<std::size_t>(b)];
        if (ea.value != eb.value) return ea.value < eb.value;
        return edge_id(fg, ea) < edge_id(fg, eb);
    });

    DisjointSet ds(n);
    std::vector<double> birth_value(static_cast<std::size_t>(n));
    std::vector<int> birth_vertex(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) {
        birth_value[static_cast<std::size_t>(v)] = fg.vertex_values[static_cast<std::size_t>(v)];
        birth_vertex[static_cast<std::size_t>(v)] = v;
    }

    // Vertex births need no explicit events: endpoints satisfy f(v) <= f(e),
    // so every singleton already exists when its first edge arrives.
    PersistenceDiagram out;
    for (const int ei : edge_order) {
        const auto& e = fg.edges[static_cast<std::size_t>(ei)];
        const int ru = ds.find(e.u);
        const int rv = ds.find(e.v);
        if (ru == rv) continue;  // closes a loop; dimension 1 handles it

        // Elder rule: the younger component (larger birth, then larger birth
        // vertex id on ties) dies at this edge.
        auto older = [&](int a, int b) {
            if (birth_value[static_cast<std::size_t>(a)] != birth_value[static_cast<std::size_t>(b)])
                return birth_value[static_cast<std::size_t>(a)] < birth_value[static_cast<std::size_t>(b)];
            return fg.vertex_ids[static_cast<std::size_t>(birth_vertex[static_cast<std::size_t>(a)])] <
                   fg.vertex_ids[static_cast<std::size_t>(birth_vertex[static_cast<std::size_t>(b)])];
        };
        const int survivor = older(ru, rv) ? ru : rv;
        const int victim = survivor == ru ? rv : ru;
        out.dim0.push_back({birth_value[static_cast<std::size_t>(victim)], e.value, 0, false});

        const int root = ds.unite(ru, rv);
        birth_value[static_cast<std::size_t>(root)] = birth_value[static_cast<std::size_t>(survivor)];
        birth_vertex[static_cast<std::size_t>(root)] = birth_vertex[static_cast<std::size_t>(survivor)];
    }

    for (int v = 0; v < n; ++v) {
        if (ds.find(v) == v) {
            out.dim0.push_back({birth_value[static_cast<std::size_t>(v)], kInfiniteDeath, 0, true});
        }
    }
    std::sort(out.dim0.begin(), out.dim0.end(), [](const PersistencePoint& a, const PersistencePoint& b) {
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.death < b.death;
    });
    return out;
}

PersistenceDiagram extended_persistence_oracle(const FilteredGraph& fg, std::size_t oracle_bound) {
    validate_filtration(fg);
    if (fg.vertex_count() > oracle_bound) {
        throw OracleBoundError("graph has " + std::to_string(fg.vertex_count()) +
                               " vertices, oracle bound is " + std::to_string(oracle_bound));
    }
    const int n = static_cast<int>(fg.vertex_count());
    const int m = static_cast<int>(fg.edges.size());
    PersistenceDiagram out;
    if (n == 0) return out;

    // Ascending pass: sublevel order, vertices before edges on equal values.
    std::vector<CellRef> asc;
    asc.reserve(static_cast<std::size_t>(n + m));
    for (int v = 0; v < n; ++v) asc.push_back({0, v});
    for (int e = 0; e < m; ++e) asc.push_back({1, e});
    auto cell_value_asc = [&](const CellRef& c) {
        return c.dim == 0 ? fg.vertex_values[static_cast<std::size_t>(c.index)]
                          : fg.edges[static_cast<std::size_t>(c.index)].value;
    };
    auto cell_id = [&](const CellRef& c) {
        if (c.dim == 0) {
            return std::make_pair(fg.vertex_ids[static_cast<std::size_t>(c.index)], std::string());
        }
        return edge_id(fg, fg.edges[static_cast<std::size_t>(c.index)]);
    };
    std::sort(asc.begin(), asc.end(), [&](const CellRef& a, const CellRef& b) {
        const double fa = cell_value_asc(a);
        const double fb = cell_value_asc(b);
        if (fa != fb) return fa < fb;
        if (a.dim != b.dim) return a.dim < b.dim;
        return cell_id(a) < cell_id(b);
    });

    // Descending pass: superlevel order. Vertices take the max of incident
    // edge values here so each superlevel set is a subcomplex.
    std::vector<double> upstar(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) upstar[static_cast<std::size_t>(v)] = fg.vertex_values[static_cast<std::size_t>(v)];
    {
        std::vector<bool> touched(static_cast<std::size_t>(n), false);
        for (const auto& e : fg.edges) {
            for (const int v : {e.u, e.v}) {
                auto& value = upstar[static_cast<std::size_t>(v)];
                if (!touched[static_cast<std::size_t>(v)]) {
                    value = e.value;
                    touched[static_cast<std::size_t>(v)] = true;
                } else {
                    value = std::max(value, e.value);
                }
            }
        }
    }
    std::vector<CellRef> desc = asc;
    auto cell_value_desc = [&](const CellRef& c) {
        return c.dim == 0 ? upstar[static_cast<std::size_t>(c.index)]
                          : fg.edges[static_cast<std::size_t>(c.index)].value;
    };
    std::sort(desc.begin(), desc.end(), [&](const CellRef& a, const CellRef& b) {
        const double fa = cell_value_desc(a);
        const double fb = cell_value_desc(b);
        if (fa != fb) return fa > fb;
        if (a.dim != b.dim) return a.dim < b.dim;  // cone(v) precedes cone(e) it bounds
        return cell_id(a) < cell_id(b);
    });

    // Global column order: ascending cells, the cone apex, cone cells.
    const int n_asc = n + m;
    const int omega = n_asc;
    const int total = n_asc + 1 + n_asc;
    std::vector<int> asc_pos_vertex(static_cast<std::size_t>(n));
    std::vector<int> asc_pos_edge(static_cast<std::size_t>(m));
    for (int i = 0; i < n_asc; ++i) {
        const auto& c = asc[static_cast<std::size_t>(i)];
        (c.dim == 0 ? asc_pos_vertex[static_cast<std::size_t>(c.index)]
                    : asc_pos_edge[static_cast<std::size_t>(c.index)]) = i;
    }
    std::vector<int> cone_pos_vertex(static_cast<std::size_t>(n));
    std::vector<int> cone_pos_edge(static_cast<std::size_t>(m));
    for (int i = 0; i < n_asc; ++i) {
        const auto& c = desc[static_cast<std::size_t>(i)];
        (c.dim == 0 ? cone_pos_vertex[static_cast<std::size_t>(c.index)]
                    : cone_pos_edge[static_cast<std::size_t>(c.index)]) = omega + 1 + i;
    }

    std::vector<Column> columns(static_cast<std::size_t>(total));
    for (int e = 0; e < m; ++e) {
        const auto& edge = fg.edges[static_cast<std::size_t>(e)];
        auto& col = columns[static_cast<std::size_t>(asc_pos_edge[static_cast<std::size_t>(e)])];
        col.rows = {asc_pos_vertex[static_cast<std::size_t>(edge.u)],
                    asc_pos_vertex[static_cast<std::size_t>(edge.v)]};
        std::sort(col.rows.begin(), col.rows.end());
    }
    for (int v = 0; v < n; ++v) {
        auto& col = columns[static_cast<std::size_t>(cone_pos_vertex[static_cast<std::size_t>(v)])];
        col.rows = {asc_pos_vertex[static_cast<std::size_t>(v)], omega};
        std::sort(col.rows.begin(), col.rows.end());
    }
    for (int e = 0; e < m; ++e) {
        const auto& edge = fg.edges[static_cast<std::size_t>(e)];
        auto& col = columns[static_cast<std::size_t>(cone_pos_edge[static_cast<std::size_t>(e)])];
        col.rows = {asc_pos_edge[static_cast<std::size_t>(e)],
                    cone_pos_vertex[static_cast<std::size_t>(edge.u)],
                    cone_pos_vertex[static_cast<std::size_t>(edge.v)]};
        std::sort(col.rows.begin(), col.rows.end());
    }

    // Standard F2 column reduction.
    std::vector<int> pivot_owner(static_cast<std::size_t>(total), -1);
    std::vector<std::pair<int, int>> pairs;  // (birth column, death column)
    for (int j = 0; j < total; ++j) {
        auto& col = columns[static_cast<std::size_t>(j)];
        while (col.low() >= 0 && pivot_owner[static_cast<std::size_t>(col.low())] >= 0) {
            col.add(columns[static_cast<std::size_t>(pivot_owner[static_cast<std::size_t>(col.low())])]);
        }
        if (col.low() >= 0) {
            pivot_owner[static_cast<std::size_t>(col.low())] = j;
            pairs.emplace_back(col.low(), j);
        }
    }

    // Read off the diagram. Pairs between a cell and its killer:
    //   ascending vertex + ascending edge  -> finite dim-0 point
    //   ascending vertex + cone edge       -> essential dim-0 point
    //   ascending edge + cone triangle     -> extended dim-1 point
    std::vector<bool> paired(static_cast<std::size_t>(total), false);
    auto classify_asc = [&](int pos) { return asc[static_cast<std::size_t>(pos)]; };
    for (const auto& [birth_col, death_col] : pairs) {
        paired[static_cast<std::size_t>(birth_col)] = true;
        paired[static_cast<std::size_t>(death_col)] = true;
        if (birth_col >= n_asc) continue;  // pairs internal to the cone
        const CellRef birth_cell = classify_asc(birth_col);
        if (birth_cell.dim == 0) {
            const double birth = fg.vertex_values[static_cast<std::size_t>(birth_cell.index)];
            if (death_col < n_asc) {
                const CellRef death_cell = classify_asc(death_col);
                out.dim0.push_back({birth,
                                    fg.edges[static_cast<std::size_t>(death_cell.index)].value, 0,
                                    false});
            } else {
                out.dim0.push_back({birth, kInfiniteDeath, 0, true});
            }
        } else {
            // An ascending edge can only be killed by a cone triangle, whose
            // descending value is the weight of its base edge.
            const CellRef death_cell = desc[static_cast<std::size_t>(death_col - omega - 1)];
            out.dim1.push_back({fg.edges[static_cast<std::size_t>(birth_cell.index)].value,
                                fg.edges[static_cast<std::size_t>(death_cell.index)].value, 1,
                                false});
        }
    }
    // The one globally unpaired ascending vertex is the oldest component.
    for (int j = 0; j < n_asc; ++j) {
        if (!paired[static_cast<std::size_t>(j)] && classify_asc(j).dim == 0) {
            out.dim0.push_back(
                {fg.vertex_values[static_cast<std::size_t>(classify_asc(j).index)], kInfiniteDeath, 0, true});
        }
    }

    auto point_order = [](const PersistencePoint& a, const PersistencePoint& b) {
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.death < b.death;
    };
    std::sort(out.dim0.begin(), out.dim0.end(), point_order);
    std::sort(out.dim1.begin(), out.dim1.end(), point_order);
    return out;
}

PersistenceDiagram compute_exdg1(const FilteredGraph& fg, std::size_t oracle_bound) {
    PersistenceDiagram full = extended_persistence_oracle(fg, oracle_bound);
    PersistenceDiagram out;
    out.dim1 = std::move(full.dim1);
    return out;
}

std::vector<PersistencePoint> finite_points(const std::vector<PersistencePoint>& points,
                                            bool keep_diagonal) {
    std::vector<PersistencePoint> out;
    for (const auto& p : points) {
        if (p.essential || p.death == kInfiniteDeath) continue;
        if (!keep_diagonal && p.birth == p.death) continue;
        out.push_back(p);
    }
    return out;
}

void check_cardinalities(const FilteredGraph& fg, const PersistenceDiagram& diagram) {
    const int components = component_count(fg);
    const auto v = static_cast<long>(fg.vertex_count());
    const auto e = static_cast<long>(fg.edges.size());

    long essential = 0;
    for (const auto& p : diagram.dim0) {
        if (p.essential) ++essential;
    }
    if (static_cast<long>(diagram.dim0.size()) != v) {
        throw NumericalError("diagram cardinality violated: |dim0| = " +
                             std::to_string(diagram.dim0.size()) + ", |V| = " + std::to_string(v));
    }
    if (essential != components) {
        throw NumericalError("diagram cardinality violated: essential count " +
                             std::to_string(essential) + ", components " +
                             std::to_string(components));
    }
    const long expected_loops = e - v + components;
    if (static_cast<long>(diagram.dim1.size()) != expected_loops) {
        throw NumericalError("diagram cardinality violated: |dim1| = " +
                             std::to_string(diagram.dim1.size()) + ", expected " +
                             std::to_string(expected_loops));
    }
}

}  // namespace toponet::persistence
