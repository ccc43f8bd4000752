#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "bubbletk/cluster.hpp"
#include "bubbletk/combinatorics.hpp"
#include "bubbletk/measure.hpp"
#include "bubbletk/projections.hpp"

namespace bubbletk {

using Json = nlohmann::json;

inline Json to_json(const Vector& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline Json to_json(const Matrix& m) {
    Json a = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
    return a;
}

inline Json to_json(const Cluster& cl, const Json& meta = Json::object()) {
    return Json{{"space", "S"},
                {"n", cl.n()},
                {"q", cl.q()},
                {"centers", to_json(cl.centers())},
                {"curvatures", to_json(cl.curvatures())},
                {"meta", meta}};
}

namespace detail {

inline const Json& field(const Json& j, const char* key) {
    require(j.is_object() && j.contains(key), ErrorCode::SchemaViolation,
            std::string("cluster JSON: missing field '") + key + "'");
    return j.at(key);
}

inline Vector vector_from(const Json& j, const char* what) {
    require(j.is_array(), ErrorCode::SchemaViolation, std::string("cluster JSON: '") + what + "' must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        require(j[i].is_number(), ErrorCode::SchemaViolation,
                std::string("cluster JSON: non-numeric entry in '") + what + "'");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

}  // namespace detail

/// Parses and validates a cluster document; the zero-sum convention is
/// enforced by the Cluster constructor.
inline Cluster cluster_from_json(const Json& j) {
    const Json& space = detail::field(j, "space");
    require(space.is_string() && space.get<std::string>() == "S", ErrorCode::SchemaViolation,
            "cluster JSON: 'space' must be \"S\"");
    const Json& jn = detail::field(j, "n");
    const Json& jq = detail::field(j, "q");
    require(jn.is_number_integer() && jq.is_number_integer(), ErrorCode::SchemaViolation,
            "cluster JSON: 'n' and 'q' must be integers");
    const int n = jn.get<int>();
    const int q = jq.get<int>();
    const Json& jc = detail::field(j, "centers");
    require(jc.is_array() && static_cast<int>(jc.size()) == q, ErrorCode::SchemaViolation,
            "cluster JSON: 'centers' must hold q rows");
    Matrix c(q, n + 1);
    for (int i = 0; i < q; ++i) {
        const Vector row = detail::vector_from(jc[static_cast<std::size_t>(i)], "centers");
        require(row.size() == n + 1, ErrorCode::SchemaViolation, "cluster JSON: center rows must have length n+1");
        c.row(i) = row.transpose();
    }
    const Vector k = detail::vector_from(detail::field(j, "curvatures"), "curvatures");
    require(k.size() == q, ErrorCode::SchemaViolation, "cluster JSON: 'curvatures' must have length q");
    if (j.contains("meta"))
        require(j.at("meta").is_object(), ErrorCode::SchemaViolation, "cluster JSON: 'meta' must be an object");
    return Cluster(c, k);
}

inline Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("invalid JSON: ") + e.what());
    }
}

inline Cluster load_cluster(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::SchemaViolation, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return cluster_from_json(parse_json(ss.str()));
}

inline void save_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::SchemaViolation, "cannot write " + path);
    out << j.dump(2) << '\n';
}

inline Json to_json(const MeasureReport& r) {
    return Json{{"value", r.value},
                {"std_error", r.std_error},
                {"samples", r.samples},
                {"seed", r.seed},
                {"normalization", r.normalization == Normalization::Sphere ? "S" : "R"}};
}

inline Json to_json(const IncidenceComplex& c) {
    Json e = Json::array(), t = Json::array();
    for (const auto& x : c.edges) e.push_back({x[0], x[1]});
    for (const auto& x : c.triangles) t.push_back({x[0], x[1], x[2]});
    return Json{{"q", c.q}, {"edges", e}, {"triangles", t}, {"diagnostics", c.diagnostics}};
}

inline Json to_json(const EuclideanView& v) {
    return Json{{"space", "R"},
                {"n", v.n()},
                {"q", v.q()},
                {"pole", to_json(v.pole())},
                {"pole_cell", v.pole_cell()},
                {"frame", to_json(v.frame())},
                {"euclid_centers", to_json(v.euclid_centers())},
                {"euclid_curvatures", to_json(v.euclid_curvatures())},
                {"spherical_offsets", to_json(v.spherical_offsets())},
                {"parent", to_json(v.parent())}};
}

}  // namespace bubbletk
