#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "bubbletk/construct.hpp"
#include "bubbletk/io.hpp"
#include "bubbletk/plot.hpp"

using namespace bubbletk;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

Cluster banded(double t) {
    Matrix c = Matrix::Zero(3, 3);
    c(0, 0) = 0.5;
    c(1, 0) = -0.5;
    return Cluster(c, vec({t, t, -2.0 * t}));
}

ErrorCode code_of_parse(const std::string& text) {
    try {
        cluster_from_json(parse_json(text));
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no exception";
    return ErrorCode::OutOfRange;
}

std::size_t count(const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
}

PlaneSpec equatorial(int dim) { return {Vector::Zero(dim), Vector::Unit(dim, 0), Vector::Unit(dim, 1)}; }

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Json, ClusterRoundTripIsExact) {
    const Cluster cl = bubble_from_curvatures(3, vec({0.4, -0.1, 0.2, -0.5}));
    const Json j = to_json(cl, Json{{"origin", "test"}});
    EXPECT_EQ(j.at("space"), "S");
    EXPECT_EQ(j.at("n"), 3);
    EXPECT_EQ(j.at("q"), 4);
    EXPECT_EQ(j.at("meta").at("origin"), "test");
    EXPECT_EQ(cluster_from_json(parse_json(j.dump())), cl);
}

TEST(Json, FileRoundTrip) {
    const Cluster cl = equal_volume_bubble(2, 3);
    const std::string path = ::testing::TempDir() + "bubbletk_io_roundtrip.json";
    save_json(to_json(cl), path);
    EXPECT_EQ(load_cluster(path), cl);
    EXPECT_THROW(load_cluster(path + ".missing"), Error);
}

TEST(Json, SchemaViolations) {
    const std::string good = to_json(equal_volume_bubble(1, 2)).dump();
    EXPECT_NO_THROW(cluster_from_json(parse_json(good)));
    EXPECT_EQ(code_of_parse("{not json"), ErrorCode::SchemaViolation);
    EXPECT_EQ(code_of_parse(R"({"n":1,"q":2,"centers":[[0.5,0],[-0.5,0]],"curvatures":[0,0]})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(code_of_parse(R"({"space":"R","n":1,"q":2,"centers":[[0.5,0],[-0.5,0]],"curvatures":[0,0]})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(code_of_parse(R"({"space":"S","n":1.5,"q":2,"centers":[[0.5,0],[-0.5,0]],"curvatures":[0,0]})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(code_of_parse(R"({"space":"S","n":1,"q":2,"centers":[[0.5,0,1],[-0.5,0,1]],"curvatures":[0,0]})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(code_of_parse(R"({"space":"S","n":1,"q":2,"centers":[[0.5,0],[-0.5,0]],"curvatures":[0]})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(code_of_parse(R"({"space":"S","n":1,"q":2,"centers":[[0.5,"x"],[-0.5,0]],"curvatures":[0,0]})"),
              ErrorCode::SchemaViolation);
    EXPECT_EQ(code_of_parse(R"({"space":"S","n":1,"q":2,"centers":[[0.5,0],[-0.5,0]],"curvatures":[0,0],"meta":3})"),
              ErrorCode::SchemaViolation);
}

TEST(Json, ReportsAndViews) {
    const Json r = to_json(MeasureReport{0.25, 0.01, 100, 7, Normalization::Sphere});
    EXPECT_EQ(r.at("value"), 0.25);
    EXPECT_EQ(r.at("samples"), 100);
    EXPECT_EQ(r.at("normalization"), "S");
    const EuclideanView v = to_euclidean(equal_volume_bubble(2, 3));
    const Json jv = to_json(v);
    EXPECT_EQ(jv.at("space"), "R");
    EXPECT_EQ(jv.at("euclid_centers").size(), 3u);
    EXPECT_EQ(cluster_from_json(jv.at("parent")), v.parent());
}

TEST(Svg, SphereSliceIsDeterministicAndColoredByCell) {
    const Cluster cl = equal_volume_bubble(2, 3);
    const std::string a = plot_sphere_slice(cl, equatorial(3));
    EXPECT_EQ(a, plot_sphere_slice(cl, equatorial(3)));
    EXPECT_EQ(a.rfind("<svg", 0), 0u);
    EXPECT_NE(a.find("<title>sphere slice, n=2, q=3</title>"), std::string::npos);
    // The equator of the standard triple bubble is split into three arcs with
    // three crossing points.
    EXPECT_EQ(count(a, "<polyline"), 3u);
    EXPECT_EQ(count(a, "<circle"), 3u);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(count(a, detail::palette(c)), 1u);
}

TEST(Svg, MatchesStoredFixture) {
    const std::string svg = plot_sphere_slice(equal_volume_bubble(2, 3), equatorial(3), PlotOptions{360, 240, 1.25});
    const std::string path = std::string(BUBBLETK_FIXTURE_DIR) + "/triple_bubble_slice.svg";
    const std::string stored = read_file(path);
    ASSERT_FALSE(stored.empty()) << "missing fixture " << path;
    EXPECT_EQ(svg, stored);
}

TEST(Svg, EmptyInterfacesDrawNothing) {
    // Pair (0, 1) of the banded cluster is well formed but empty; the other
    // pairs are malformed and skipped.
    const PlaneSpec pl = equatorial(2);
    const PlotOptions opt{400, 480, 4.0};
    const std::string empty = plot_euclidean_slice(to_euclidean(banded(0.1)), pl, opt);
    EXPECT_EQ(count(empty, "<polyline"), 0u);
    const std::string thin = plot_euclidean_slice(to_euclidean(banded(-0.05)), pl, opt);
    EXPECT_GE(count(thin, std::string("stroke=\"") + detail::palette(0) + "\""), 1u);
}

TEST(Svg, DegeneratePlanes) {
    const Cluster cl = equal_volume_bubble(2, 3);
    const auto code = [&](const PlaneSpec& pl) {
        try {
            plot_sphere_slice(cl, pl);
        } catch (const Error& e) {
            return e.code();
        }
        ADD_FAILURE() << "no exception";
    return ErrorCode::OutOfRange;
    };
    EXPECT_EQ(code({vec({0, 0, 2}), vec({1, 0, 0}), vec({0, 1, 0})}), ErrorCode::DegeneratePlane);
    EXPECT_EQ(code({vec({0, 0, 0}), vec({1, 0, 0}), vec({2, 0, 0})}), ErrorCode::DegeneratePlane);
    EXPECT_EQ(code({vec({0, 0}), vec({1, 0}), vec({0, 1})}), ErrorCode::DimensionMismatch);
}
