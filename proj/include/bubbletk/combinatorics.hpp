#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bubbletk/cluster.hpp"

namespace bubbletk {

using Edge = std::array<int, 2>;
using Triangle = std::array<int, 3>;

/// Two-dimensional complex on q vertices, closed under taking faces.
struct IncidenceComplex {
    int q = 0;
    std::set<Edge> edges;
    std::set<Triangle> triangles;
    std::vector<std::string> diagnostics;

    void add_edge(int a, int b) { edges.insert({std::min(a, b), std::max(a, b)}); }
    void add_triangle(int a, int b, int c) {
        Triangle t{a, b, c};
        std::sort(t.begin(), t.end());
        triangles.insert(t);
        add_edge(t[0], t[1]);
        add_edge(t[0], t[2]);
        add_edge(t[1], t[2]);
    }
    bool operator==(const IncidenceComplex& o) const {
        return q == o.q && edges == o.edges && triangles == o.triangles;
    }
};

/// Full 2-skeleton of the simplex on q vertices.
inline IncidenceComplex complete_complex(int q) {
    IncidenceComplex c;
    c.q = q;
    for (int a = 0; a < q; ++a)
        for (int b = a + 1; b < q; ++b) {
            c.add_edge(a, b);
            for (int d = b + 1; d < q; ++d) c.add_triangle(a, b, d);
        }
    return c;
}

/// Interfaces and triple sets detected by sampling. Pairs whose parameters
/// violate |c_ij|^2 = 1 + k_ij^2 are probed on their actual carrier and, when
/// found non-empty, recorded in `diagnostics`.
inline IncidenceComplex extract_complex(const Cluster& cl, std::size_t samples, std::uint64_t seed) {
    IncidenceComplex c;
    c.q = cl.q();
    for (int i = 0; i < c.q; ++i)
        for (int j = i + 1; j < c.q; ++j) {
            if (std::abs(cl.pair_defect(i, j)) < tol::geo) {
                if (interface_nonempty(cl, i, j, samples, seed).found) c.add_edge(i, j);
            } else if (probe_meeting(cl, {i, j}, samples, seed).found) {
                c.add_edge(i, j);
                c.diagnostics.push_back("malformed non-empty interface (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
            }
        }
    if (cl.n() >= 2)
        for (int i = 0; i < c.q; ++i)
            for (int j = i + 1; j < c.q; ++j)
                for (int k = j + 1; k < c.q; ++k)
                    if (triple_set_nonempty(cl, i, j, k, samples, seed).found) c.add_triangle(i, j, k);
    return c;
}

/// Exact variant based on the minimum-norm feasibility oracle.
inline IncidenceComplex extract_complex_exact(const Cluster& cl, double margin = tol::mem) {
    IncidenceComplex c;
    c.q = cl.q();
    for (int i = 0; i < c.q; ++i)
        for (int j = i + 1; j < c.q; ++j)
            if (meeting_nonempty_exact(cl, {i, j}, margin)) c.add_edge(i, j);
    if (cl.n() >= 2)
        for (int i = 0; i < c.q; ++i)
            for (int j = i + 1; j < c.q; ++j)
                for (int k = j + 1; k < c.q; ++k)
                    if (meeting_nonempty_exact(cl, {i, j, k}, margin)) c.add_triangle(i, j, k);
    return c;
}

enum class Field { GF2, Q };

namespace detail {

inline int rank_gf2(std::vector<std::vector<std::uint64_t>> rows, int cols) {
    int rank = 0;
    const int words = (cols + 63) / 64;
    for (int col = 0; col < cols && rank < static_cast<int>(rows.size()); ++col) {
        const int w = col / 64;
        const std::uint64_t bit = 1ULL << (col % 64);
        int piv = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r)
            if (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(w)] & bit) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(rows[static_cast<std::size_t>(rank)], rows[static_cast<std::size_t>(piv)]);
        for (int r = 0; r < static_cast<int>(rows.size()); ++r)
            if (r != rank && (rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(w)] & bit))
                for (int x = 0; x < words; ++x)
                    rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(x)] ^=
                        rows[static_cast<std::size_t>(rank)][static_cast<std::size_t>(x)];
        ++rank;
    }
    return rank;
}

/// Fraction-free (Bareiss) elimination over the integers.
inline int rank_q(std::vector<std::vector<boost::multiprecision::cpp_int>> a) {
    using boost::multiprecision::cpp_int;
    const int rows = static_cast<int>(a.size());
    if (rows == 0) return 0;
    const int cols = static_cast<int>(a[0].size());
    cpp_int prev = 1;
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int piv = -1;
        for (int r = rank; r < rows; ++r)
            if (a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] != 0) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(a[static_cast<std::size_t>(rank)], a[static_cast<std::size_t>(piv)]);
        const auto& pr = a[static_cast<std::size_t>(rank)];
        for (int r = rank + 1; r < rows; ++r) {
            auto& row = a[static_cast<std::size_t>(r)];
            for (int c = col + 1; c < cols; ++c)
                row[static_cast<std::size_t>(c)] =
                    (pr[static_cast<std::size_t>(col)] * row[static_cast<std::size_t>(c)] -
                     row[static_cast<std::size_t>(col)] * pr[static_cast<std::size_t>(c)]) /
                    prev;
            row[static_cast<std::size_t>(col)] = 0;
        }
        prev = pr[static_cast<std::size_t>(col)];
        ++rank;
    }
    return rank;
}

template <class T>
std::vector<std::vector<T>> boundary_rows(const IncidenceComplex& c, int dim) {
    std::map<Edge, int> eidx;
    for (const auto& e : c.edges) eidx.emplace(e, static_cast<int>(eidx.size()));
    std::vector<std::vector<T>> rows;
    if (dim == 1) {
        for (const auto& e : c.edges) {
            std::vector<T> r(static_cast<std::size_t>(c.q), T(0));
            r[static_cast<std::size_t>(e[1])] = T(1);
            r[static_cast<std::size_t>(e[0])] = T(-1);
            rows.push_back(std::move(r));
        }
    } else {
        for (const auto& t : c.triangles) {
            std::vector<T> r(eidx.size(), T(0));
            r[static_cast<std::size_t>(eidx.at({t[1], t[2]}))] = T(1);
            r[static_cast<std::size_t>(eidx.at({t[0], t[2]}))] = T(-1);
            r[static_cast<std::size_t>(eidx.at({t[0], t[1]}))] = T(1);
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

inline std::vector<std::vector<std::uint64_t>> pack_gf2(const std::vector<std::vector<int>>& rows, int cols) {
    std::vector<std::vector<std::uint64_t>> out;
    for (const auto& r : rows) {
        std::vector<std::uint64_t> w(static_cast<std::size_t>((cols + 63) / 64), 0);
        for (int c = 0; c < cols; ++c)
            if (r[static_cast<std::size_t>(c)] % 2) w[static_cast<std::size_t>(c / 64)] |= 1ULL << (c % 64);
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace detail

/// Rank of the first homology group of the complex over the chosen field.
inline int homology_h1(const IncidenceComplex& c, Field field = Field::GF2) {
    const int ne = static_cast<int>(c.edges.size());
    int r1 = 0, r2 = 0;
    if (field == Field::GF2) {
        r1 = detail::rank_gf2(detail::pack_gf2(detail::boundary_rows<int>(c, 1), c.q), c.q);
        r2 = detail::rank_gf2(detail::pack_gf2(detail::boundary_rows<int>(c, 2), ne), ne);
    } else {
        using boost::multiprecision::cpp_int;
        r1 = detail::rank_q(detail::boundary_rows<cpp_int>(c, 1));
        r2 = detail::rank_q(detail::boundary_rows<cpp_int>(c, 2));
    }
    return ne - r1 - r2;
}

struct WeightedEdge {
    int a = 0, b = 0;
    double w = 1.0;
};

/// Undirected graph with strictly positive edge weights.
class WeightedGraph {
public:
    WeightedGraph(int vertices, std::vector<WeightedEdge> edges) : v_(vertices), edges_(std::move(edges)) {
        require(v_ >= 1, ErrorCode::OutOfRange, "graph needs at least one vertex");
        std::set<Edge> seen;
        for (const auto& e : edges_) {
            require(e.a >= 0 && e.b >= 0 && e.a < v_ && e.b < v_ && e.a != e.b, ErrorCode::OutOfRange,
                    "graph edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") is invalid");
            require(e.w > 0.0, ErrorCode::OutOfRange, "graph weights must be positive");
            require(seen.insert({std::min(e.a, e.b), std::max(e.a, e.b)}).second, ErrorCode::OutOfRange,
                    "duplicate graph edge");
        }
    }

    int vertices() const { return v_; }
    const std::vector<WeightedEdge>& edges() const { return edges_; }

    std::vector<std::vector<int>> adjacency(int skip = -1) const {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(v_));
        for (const auto& e : edges_) {
            if (e.a == skip || e.b == skip) continue;
            adj[static_cast<std::size_t>(e.a)].push_back(e.b);
            adj[static_cast<std::size_t>(e.b)].push_back(e.a);
        }
        return adj;
    }

    /// Connectivity of the graph with vertex `skip` deleted.
    bool connected(int skip = -1) const {
        const auto adj = adjacency(skip);
        int start = skip == 0 ? 1 : 0;
        if (start >= v_) return true;
        std::vector<char> seen(static_cast<std::size_t>(v_), 0);
        std::vector<int> stack{start};
        seen[static_cast<std::size_t>(start)] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int w : adj[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    ++count;
                    stack.push_back(w);
                }
        }
        return count == v_ - (skip >= 0 ? 1 : 0);
    }

private:
    int v_;
    std::vector<WeightedEdge> edges_;
};

/// L_A = sum_{i<j} A^{ij} e_ij e_ij^T.
inline Matrix laplacian(const WeightedGraph& g) {
    Matrix l = Matrix::Zero(g.vertices(), g.vertices());
    for (const auto& e : g.edges()) {
        l(e.a, e.a) += e.w;
        l(e.b, e.b) += e.w;
        l(e.a, e.b) -= e.w;
        l(e.b, e.a) -= e.w;
    }
    return l;
}

inline bool is_positive_definite_on_zero_sum(const WeightedGraph& g, double tol = 1e-10) {
    if (g.vertices() == 1) return true;
    const Matrix h = zero_sum_basis(g.vertices());
    const Matrix restricted = h.transpose() * laplacian(g) * h;
    Eigen::SelfAdjointEigenSolver<Matrix> es(restricted);
    return es.eigenvalues().minCoeff() > tol * std::max(1.0, es.eigenvalues().maxCoeff());
}

/// Solves L_A a = e_s - e_t with a in the zero-sum subspace.
inline Vector max_principle_solve(const WeightedGraph& g, int s, int t) {
    const int v = g.vertices();
    require(s >= 0 && t >= 0 && s < v && t < v && s != t, ErrorCode::OutOfRange, "source/sink out of range");
    require(g.connected(), ErrorCode::PreconditionFailed, "graph is not connected");
    require(g.connected(s), ErrorCode::PreconditionFailed, "removing the source disconnects the graph");
    const Matrix l = laplacian(g) + Matrix::Constant(v, v, 1.0 / v);
    Vector rhs = Vector::Zero(v);
    rhs[s] = 1.0;
    rhs[t] = -1.0;
    Vector a = l.ldlt().solve(rhs);
    a.array() -= a.mean();
    for (int i = 0; i < v; ++i)
        require(i == s || a[s] > a[i], ErrorCode::PreconditionFailed,
                "source value is not strictly maximal at vertex " + std::to_string(i));
    return a;
}

struct OrientedValue {
    int i = 0, j = 0;
    double value = 0.0;  // A^{ij}; A^{ji} = -A^{ij}
};

struct PotentialResult {
    bool ok = false;
    Vector potential;          // zero-sum, A^{ij} = a_i - a_j
    std::vector<int> cycle;    // witnessing cycle, closed (first == last)
    double cycle_sum = 0.0;
};

/// Integrates A^{ij} = a_i - a_j along a BFS spanning tree and checks every
/// fundamental cycle.
inline PotentialResult recover_potential(int vertices, const std::vector<OrientedValue>& values, double tol = 1e-9) {
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(vertices));
    for (const auto& e : values) {
        require(e.i >= 0 && e.j >= 0 && e.i < vertices && e.j < vertices && e.i != e.j, ErrorCode::OutOfRange,
                "edge value index out of range");
        adj[static_cast<std::size_t>(e.i)].push_back({e.j, e.value});
        adj[static_cast<std::size_t>(e.j)].push_back({e.i, -e.value});
    }
    std::vector<int> parent(static_cast<std::size_t>(vertices), -1), depth(static_cast<std::size_t>(vertices), -1);
    Vector a = Vector::Zero(vertices);
    std::queue<int> bfs;
    bfs.push(0);
    depth[0] = 0;
    while (!bfs.empty()) {
        const int u = bfs.front();
        bfs.pop();
        for (const auto& [w, val] : adj[static_cast<std::size_t>(u)])
            if (depth[static_cast<std::size_t>(w)] < 0) {
                depth[static_cast<std::size_t>(w)] = depth[static_cast<std::size_t>(u)] + 1;
                parent[static_cast<std::size_t>(w)] = u;
                a[w] = a[u] - val;
                bfs.push(w);
            }
    }
    for (int u = 0; u < vertices; ++u)
        require(depth[static_cast<std::size_t>(u)] >= 0, ErrorCode::PreconditionFailed, "graph is not connected");
    PotentialResult res;
    for (const auto& e : values) {
        const double mismatch = e.value - (a[e.i] - a[e.j]);
        if (std::abs(mismatch) <= tol) continue;
        // Cycle: i -> j along the edge, then back through the tree.
        std::vector<int> up_i{e.i}, up_j{e.j};
        int x = e.i, y = e.j;
        while (x != y) {
            if (depth[static_cast<std::size_t>(x)] >= depth[static_cast<std::size_t>(y)]) {
                x = parent[static_cast<std::size_t>(x)];
                up_i.push_back(x);
            } else {
                y = parent[static_cast<std::size_t>(y)];
                up_j.push_back(y);
            }
        }
        up_j.pop_back();
        res.cycle = {e.i};
        for (int v : up_j) res.cycle.push_back(v);
        for (auto it = up_i.rbegin(); it != up_i.rend(); ++it) res.cycle.push_back(*it);
        // Sum of A along the cycle equals the mismatch of the closing edge.
        res.cycle_sum = mismatch;
        res.ok = false;
        return res;
    }
    a.array() -= a.mean();
    res.ok = true;
    res.potential = a;
    return res;
}

/// Simple graph on at most 8 vertices.
struct SimpleGraph {
    int v = 0;
    std::vector<Edge> edges;

    std::vector<int> degrees() const {
        std::vector<int> d(static_cast<std::size_t>(v), 0);
        for (const auto& e : edges) {
            ++d[static_cast<std::size_t>(e[0])];
            ++d[static_cast<std::size_t>(e[1])];
        }
        return d;
    }
    WeightedGraph weighted() const {
        std::vector<WeightedEdge> we;
        for (const auto& e : edges) we.push_back({e[0], e[1], 1.0});
        return WeightedGraph(v, we);
    }
};

enum class GraphFilter { TwoConnected, MinDegree3, TriangleCover };

inline std::string_view graph_filter_name(GraphFilter f) {
    switch (f) {
        case GraphFilter::TwoConnected: return "two_connected";
        case GraphFilter::MinDegree3: return "min_degree_3";
        case GraphFilter::TriangleCover: return "triangle_cover";
    }
    return "?";
}

namespace detail {

inline int pair_index(int a, int b, int v) {
    if (a > b) std::swap(a, b);
    return a * v - a * (a + 1) / 2 + (b - a - 1);
}

inline std::uint32_t edge_code(const SimpleGraph& g) {
    std::uint32_t code = 0;
    for (const auto& e : g.edges) code |= 1u << pair_index(e[0], e[1], g.v);
    return code;
}

inline SimpleGraph decode(std::uint32_t code, int v) {
    SimpleGraph g;
    g.v = v;
    for (int a = 0; a < v; ++a)
        for (int b = a + 1; b < v; ++b)
            if (code & (1u << pair_index(a, b, v))) g.edges.push_back({a, b});
    return g;
}

}  // namespace detail

/// Canonical edge code: the minimum over all relabelings that list vertices in
/// non-increasing degree order. Isomorphic graphs get the same code.
inline std::uint32_t canonical_code(const SimpleGraph& g) {
    const int v = g.v;
    const auto deg = g.degrees();
    std::vector<int> order(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return deg[static_cast<std::size_t>(a)] > deg[static_cast<std::size_t>(b)];
    });
    std::vector<std::pair<int, int>> classes;  // [begin, end) in `order`
    for (int i = 0; i < v;) {
        int j = i;
        while (j < v && deg[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] ==
                            deg[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])
            ++j;
        classes.push_back({i, j});
        i = j;
    }
    std::vector<std::vector<char>> adj(static_cast<std::size_t>(v), std::vector<char>(static_cast<std::size_t>(v), 0));
    for (const auto& e : g.edges)
        adj[static_cast<std::size_t>(e[0])][static_cast<std::size_t>(e[1])] =
            adj[static_cast<std::size_t>(e[1])][static_cast<std::size_t>(e[0])] = 1;
    std::uint32_t best = ~0u;
    std::vector<int> perm = order;  // perm[new label] = old vertex
    std::function<void(std::size_t)> rec = [&](std::size_t cls) {
        if (cls == classes.size()) {
            std::uint32_t code = 0;
            for (int a = 0; a < v; ++a)
                for (int b = a + 1; b < v; ++b)
                    if (adj[static_cast<std::size_t>(perm[static_cast<std::size_t>(a)])]
                           [static_cast<std::size_t>(perm[static_cast<std::size_t>(b)])])
                        code |= 1u << detail::pair_index(a, b, v);
            best = std::min(best, code);
            return;
        }
        auto first = perm.begin() + classes[cls].first;
        auto last = perm.begin() + classes[cls].second;
        std::sort(first, last);
        do {
            rec(cls + 1);
        } while (std::next_permutation(first, last));
    };
    rec(0);
    return best;
}

inline bool is_two_connected(const SimpleGraph& g) {
    if (g.v < 3) return false;
    const WeightedGraph w = g.weighted();
    if (!w.connected()) return false;
    for (int s = 0; s < g.v; ++s)
        if (!w.connected(s)) return false;
    return true;
}

inline bool has_min_degree(const SimpleGraph& g, int d) {
    const auto deg = g.degrees();
    return std::all_of(deg.begin(), deg.end(), [d](int x) { return x >= d; });
}

/// Every edge lies in some triangle.
inline bool is_triangle_covered(const SimpleGraph& g) {
    std::set<Edge> es(g.edges.begin(), g.edges.end());
    for (const auto& e : g.edges) {
        bool found = false;
        for (int c = 0; c < g.v && !found; ++c)
            found = c != e[0] && c != e[1] && es.count({std::min(c, e[0]), std::max(c, e[0])}) &&
                    es.count({std::min(c, e[1]), std::max(c, e[1])});
        if (!found) return false;
    }
    return true;
}

inline bool passes(const SimpleGraph& g, GraphFilter f) {
    switch (f) {
        case GraphFilter::TwoConnected: return is_two_connected(g);
        case GraphFilter::MinDegree3: return has_min_degree(g, 3);
        case GraphFilter::TriangleCover: return is_triangle_covered(g);
    }
    return false;
}

/// All graphs on q vertices up to isomorphism passing every filter, sorted by
/// (edge count, canonical code). Generated by single-edge augmentation.
inline std::vector<SimpleGraph> enumerate_graphs(int q, const std::vector<GraphFilter>& filters = {}) {
    require(q >= 1 && q <= 8, ErrorCode::OutOfRange, "enumerate_graphs: q must be in [1, 8]");
    const int pairs = q * (q - 1) / 2;
    std::vector<std::pair<int, std::uint32_t>> all;
    std::set<std::uint32_t> level{0u};
    for (int m = 0; m <= pairs; ++m) {
        std::set<std::uint32_t> next;
        for (std::uint32_t code : level) {
            all.push_back({m, code});
            for (int b = 0; b < pairs; ++b)
                if (!(code & (1u << b))) next.insert(canonical_code(detail::decode(code | (1u << b), q)));
        }
        level.swap(next);
    }
    std::vector<SimpleGraph> out;
    for (const auto& [m, code] : all) {
        SimpleGraph g = detail::decode(code, q);
        if (std::all_of(filters.begin(), filters.end(), [&](GraphFilter f) { return passes(g, f); }))
            out.push_back(std::move(g));
    }
    return out;
}

inline std::string to_dot(const SimpleGraph& g, const std::string& name = "G") {
    std::string s = "graph " + name + " {\n";
    for (int i = 0; i < g.v; ++i) s += "  " + std::to_string(i) + ";\n";
    for (const auto& e : g.edges) s += "  " + std::to_string(e[0]) + " -- " + std::to_string(e[1]) + ";\n";
    return s + "}\n";
}

inline SimpleGraph one_skeleton(const IncidenceComplex& c) {
    SimpleGraph g;
    g.v = c.q;
    g.edges.assign(c.edges.begin(), c.edges.end());
    return g;
}

/// Planar centers and radii of the ring cells, in ring order.
struct RingGeometry {
    Matrix centers;  // (q-1) x 2
    Vector radii;
};

struct RingVerdict {
    bool feasible = false;
    double angle_excess = 0.0;   // degrees: (q-1)*120 - (q-3)*180
    std::vector<double> theta;   // degrees, theta_{i,i+1} then theta_{i+1,i} per ring edge
    bool planar_checked = false;
    bool planar_ok = false;
    std::string note;
};

/// Regular heptagon ring: seven equal cells whose centers sit at unit distance
/// from the origin, with radius equal to the neighbor distance.
inline RingGeometry heptagon_ring() {
    RingGeometry g;
    g.centers.resize(7, 2);
    for (int m = 0; m < 7; ++m) {
        const double a = 2.0 * M_PI * m / 7.0;
        g.centers(m, 0) = std::cos(a);
        g.centers(m, 1) = std::sin(a);
    }
    g.radii = Vector::Constant(7, 2.0 * std::sin(M_PI / 7.0));
    return g;
}

/// Angle-sum test for bubble rings with q-1 ring cells of curvature k_i > 0
/// against the central cell. For q >= 8 an optional planar geometry is checked:
/// adjacent circles must meet at 120 degrees (distance^2 = r_i^2 + r_j^2 - r_i r_j)
/// and every interior polygon angle must exceed its two theta angles.
inline RingVerdict ring_feasibility(int q, const Vector& k, const std::optional<RingGeometry>& geometry = std::nullopt,
                                    double tol = 1e-9) {
    require(q >= 4, ErrorCode::OutOfRange, "ring_feasibility: q must be at least 4");
    require(k.size() == q - 1, ErrorCode::DimensionMismatch, "ring_feasibility: need q-1 ring curvatures");
    require((k.array() > 0.0).all(), ErrorCode::OutOfRange, "ring_feasibility: curvatures must be positive");
    const int m = q - 1;
    RingVerdict v;
    const double deg = 180.0 / M_PI;
    for (int i = 0; i < m; ++i) {
        const int j = (i + 1) % m;
        const double ri = 1.0 / k[i], rj = 1.0 / k[j];
        const double d = std::sqrt(ri * ri + rj * rj - ri * rj);
        // Angle at center i, opposite side r_j.
        const double ti = std::acos(std::clamp((ri * ri + d * d - rj * rj) / (2.0 * ri * d), -1.0, 1.0)) * deg;
        const double tj = std::acos(std::clamp((rj * rj + d * d - ri * ri) / (2.0 * rj * d), -1.0, 1.0)) * deg;
        v.theta.push_back(ti);
        v.theta.push_back(tj);
    }
    v.angle_excess = m * 120.0 - (q - 3) * 180.0;
    if (v.angle_excess >= -tol) {
        v.feasible = false;
        v.note = "angle lower bound meets or exceeds the polygon angle sum";
        return v;
    }
    v.feasible = true;
    if (!geometry) {
        v.note = "angle bound does not exclude a ring";
        return v;
    }
    const RingGeometry& g = *geometry;
    require(g.centers.rows() == m && g.centers.cols() == 2 && g.radii.size() == m, ErrorCode::DimensionMismatch,
            "ring geometry has wrong shape");
    v.planar_checked = true;
    v.planar_ok = true;
    for (int i = 0; i < m && v.planar_ok; ++i) {
        if (std::abs(g.radii[i] - 1.0 / k[i]) > 1e-9 * (1.0 + g.radii[i])) {
            v.planar_ok = false;
            v.note = "radius of ring cell " + std::to_string(i) + " disagrees with 1/k";
            break;
        }
        const int j = (i + 1) % m;
        const double ri = g.radii[i], rj = g.radii[j];
        const double d = (g.centers.row(i) - g.centers.row(j)).norm();
        if (std::abs(d * d - (ri * ri + rj * rj - ri * rj)) > 1e-9 * (1.0 + d * d)) {
            v.planar_ok = false;
            v.note = "cells " + std::to_string(i) + "," + std::to_string(j) + " do not meet at 120 degrees";
        }
    }
    double turn = 0.0;
    for (int i = 0; i < m && v.planar_ok; ++i) {
        const Eigen::RowVector2d prev = g.centers.row((i + m - 1) % m) - g.centers.row(i);
        const Eigen::RowVector2d next = g.centers.row((i + 1) % m) - g.centers.row(i);
        const double cross = prev[0] * next[1] - prev[1] * next[0];
        turn += cross;
        const double interior = std::acos(std::clamp(prev.dot(next) / (prev.norm() * next.norm()), -1.0, 1.0)) * deg;
        const double need = v.theta[static_cast<std::size_t>(2 * i)] +
                            v.theta[static_cast<std::size_t>(2 * ((i + m - 1) % m) + 1)];
        if (interior <= need + tol) {
            v.planar_ok = false;
            v.note = "interior angle at ring cell " + std::to_string(i) + " is too small";
        }
    }
    if (v.planar_ok) {
        // All cross products must share a sign for a convex polygon.
        for (int i = 0; i < m && v.planar_ok; ++i) {
            const Eigen::RowVector2d prev = g.centers.row((i + m - 1) % m) - g.centers.row(i);
            const Eigen::RowVector2d next = g.centers.row((i + 1) % m) - g.centers.row(i);
            if ((prev[0] * next[1] - prev[1] * next[0]) * turn <= 0.0) {
                v.planar_ok = false;
                v.note = "ring polygon is not convex";
            }
        }
    }
    v.feasible = v.planar_ok;
    if (v.planar_ok) v.note = "planar ring geometry verified";
    return v;
}

}  // namespace bubbletk
