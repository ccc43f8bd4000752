// bubbletk command-line front end.
//
// Exit codes: 0 success, 1 a verification check failed, 2 input or usage error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bubbletk/bubbletk.hpp"

using namespace bubbletk;

namespace {

struct VerificationFailure {
    std::string check;
};

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(out);
    require(static_cast<bool>(f), ErrorCode::SchemaViolation, "cannot write " + out);
    f << text;
    if (!text.empty() && text.back() != '\n') f << '\n';
}

void emit_json(const Json& j, const std::string& out) { emit(j.dump(2), out); }

std::string csv_reports(const std::vector<std::pair<std::string, MeasureReport>>& rows) {
    std::string s = "quantity,value,std_error,samples,seed\n";
    for (const auto& [name, r] : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%llu", r.value, r.std_error, r.samples,
                      static_cast<unsigned long long>(r.seed));
        s += name + "," + buf + "\n";
    }
    return s;
}

struct Common {
    std::string in;
    std::string out;
    std::uint64_t seed = default_seed;
    std::size_t samples = 0;
    double tol = 0.0;
    std::string format = "json";
};

void add_io(CLI::App* app, Common& c, bool input = true) {
    if (input) app->add_option("--in,-i", c.in, "input cluster JSON")->required();
    app->add_option("-o,--out", c.out, "output file (default stdout)");
    app->add_option("--seed", c.seed, "random seed");
}

Json check_entry(const std::string& name, bool pass, double value, double bound, const std::string& note = "") {
    Json j{{"name", name}, {"pass", pass}, {"value", value}, {"bound", bound}};
    if (!note.empty()) j["note"] = note;
    return j;
}

/// Unit direction orthogonal to every c_i, if the cluster has one.
std::optional<Vector> symmetry_axis(const Cluster& cl) {
    Eigen::JacobiSVD<Matrix> svd(cl.centers(), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const Eigen::Index d = cl.n() + 1;
    const double thr = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > thr) ++rank;
    if (rank >= d) return std::nullopt;
    Vector nrm = svd.matrixV().col(d - 1);
    for (Eigen::Index i = 0; i < d; ++i)
        if (std::abs(nrm[i]) > 1e-12) {
            if (nrm[i] < 0) nrm = -nrm;
            break;
        }
    return nrm;
}

Json run_checks(const Cluster& cl, const std::vector<std::string>& checks, std::size_t samples, std::uint64_t seed,
                double tol, bool& all_pass, std::string& first_fail) {
    Json out = Json::array();
    auto record = [&](Json j) {
        if (!j.value("pass", false) && !j.contains("skipped")) {
            all_pass = false;
            if (first_fail.empty()) first_fail = j["name"];
        }
        out.push_back(std::move(j));
    };
    const std::size_t ns = samples ? samples : default_interface_samples;
    for (const auto& name : checks) {
        if (name == "gram") {
            const auto r = is_standard_bubble(cl, tol > 0 ? tol : 1e-9);
            record(check_entry(name, r.standard, r.deviation, tol > 0 ? tol : 1e-9));
        } else if (name == "stationarity") {
            const auto r = stationarity_report(cl, 2000, seed);
            record(check_entry(name, r.max_normal_sum < 1e-9, r.max_normal_sum, 1e-9,
                               std::to_string(r.triple_points) + " triple points sampled"));
        } else if (name == "lagrange") {
            if (cl.n() < 2) {
                record(Json{{"name", name}, {"pass", true}, {"skipped", "n < 2"}});
                continue;
            }
            CounterRng rng(derive_seed(seed, 0xC11), 0);
            const MobiusField f{rng.on_sphere(cl.n() + 1)};
            const auto a = first_variation_area(cl, f, ns, seed);
            const auto fd = perimeter_derivative_fd(cl, f, 1e-3, ns, seed);
            const double diff = std::abs(a.delta_a.value - fd.value);
            const double bound = 3.0 * std::hypot(a.delta_a.std_error, fd.std_error) + 1e-4;
            Json j = check_entry(name, diff < bound && a.identity_gap < 1e-12, diff, bound);
            j["identity_gap"] = a.identity_gap;
            record(j);
        } else if (name == "jacobi") {
            double worst = 0.0;
            CounterRng rng(derive_seed(seed, 0xC12), 0);
            for (int i = 0; i < cl.q(); ++i)
                for (int j = i + 1; j < cl.q(); ++j) {
                    if (std::abs(cl.pair_defect(i, j)) > tol::geo) continue;
                    const Vector theta = rng.on_sphere(cl.n() + 1);
                    const double exact = (cl.n() - 1) * theta.dot(cl.quasi_center(i, j));
                    worst = std::max(worst, std::abs(jacobi_fd(cl, i, j, theta, 1e-4) - exact));
                }
            record(check_entry(name, worst < 1e-4, worst, 1e-4));
        } else if (name == "skew-q0") {
            const auto axis = symmetry_axis(cl);
            if (!axis || cl.n() < 2) {
                record(Json{{"name", name}, {"pass", true}, {"skipped", "cluster has no symmetry hyperplane"}});
                continue;
            }
            CounterRng rng(derive_seed(seed, 0xC13), 0);
            Vector a = rng.gaussian(cl.q());
            a.array() -= a.mean();
            const auto r = index_form_q0(cl, SkewField{a, *axis}, ns, seed);
            const double bound = 3.0 * r.value.std_error + 1e-12;
            record(check_entry(name, std::abs(r.value.value) < bound, std::abs(r.value.value), bound));
        } else if (name == "isotropy") {
            const EuclideanView v = to_euclidean(cl);
            const double bound = suggest_bounding_radius(v, 20000, seed);
            for (Moment m : {Moment::NormalCenter, Moment::Isotropy}) {
                const auto r = surface_moment(v, m, bound, ns, seed);
                double worst = 0.0;
                bool pass = true;
                for (Eigen::Index e = 0; e < r.value.size(); ++e) {
                    const double z = std::abs(r.value(e)) - 3.0 * r.std_error(e) - 1e-12;
                    worst = std::max(worst, std::abs(r.value(e)));
                    pass = pass && z < 0;
                }
                record(check_entry(std::string("isotropy:") + moment_name(m), pass, worst, r.std_error.maxCoeff() * 3));
            }
        } else {
            throw Error(ErrorCode::SchemaViolation, "unknown check '" + name + "'");
        }
    }
    return out;
}

Json cone_json(const BlowUpCone& c) {
    Json pairs = Json::array();
    for (const auto& e : c.cone_interfaces) pairs.push_back({e[0], e[1]});
    return Json{{"point", to_json(c.point)},  {"cells", c.cells},
                {"d", c.d},                   {"type", cone_type_name(c.type)},
                {"normals", to_json(c.normals)}, {"cone_interfaces", pairs}};
}

Json ring_json(const RingVerdict& v) {
    return Json{{"feasible", v.feasible},       {"angle_excess_deg", v.angle_excess},
                {"theta_deg", v.theta},         {"planar_checked", v.planar_checked},
                {"planar_ok", v.planar_ok},     {"note", v.note}};
}

GraphFilter parse_filter(const std::string& s) {
    if (s == "two_connected") return GraphFilter::TwoConnected;
    if (s == "min_degree_3") return GraphFilter::MinDegree3;
    if (s == "triangle_cover") return GraphFilter::TriangleCover;
    throw Error(ErrorCode::SchemaViolation, "unknown graph filter '" + s + "'");
}

IncidenceComplex complex_from_json(const Json& j) {
    IncidenceComplex c;
    require(j.contains("q") && j.contains("edges"), ErrorCode::SchemaViolation, "complex JSON needs q and edges");
    c.q = j.at("q").get<int>();
    for (const auto& e : j.at("edges")) c.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    if (j.contains("triangles"))
        for (const auto& t : j.at("triangles")) c.add_triangle(t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>());
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bubbletk: spherical Voronoi multi-bubble toolkit"};
    app.require_subcommand(1);
    Common c;

    // construct
    auto* construct = app.add_subcommand("construct", "build a standard bubble");
    std::string mode = "equal";
    int n = 2, q = 3, max_iter = 15;
    std::vector<double> kv, vv;
    double tol_v = 1e-4;
    construct->add_option("--mode", mode, "equal | curv | vol")->check(CLI::IsMember({"equal", "curv", "vol"}));
    construct->add_option("--n", n, "sphere dimension");
    construct->add_option("--q", q, "number of cells");
    construct->add_option("--k", kv, "curvatures (curv mode)")->delimiter(',');
    construct->add_option("--v", vv, "target volumes (vol mode)")->delimiter(',');
    construct->add_option("--samples", c.samples, "Monte Carlo samples (vol mode)");
    construct->add_option("--max-iter", max_iter, "Newton iterations (vol mode)");
    construct->add_option("--tol", tol_v, "volume tolerance (vol mode)");
    add_io(construct, c, false);

    // transform
    auto* transform = app.add_subcommand("transform", "apply a Möbius transformation");
    std::vector<double> theta;
    double t = 0.0;
    std::vector<double> rot;
    transform->add_option("--boost", theta, "boost direction theta")->delimiter(',');
    transform->add_option("--t", t, "boost parameter");
    transform->add_option("--rotate", rot, "rotation: axis_a,axis_b,angle")->delimiter(',');
    add_io(transform, c);

    // project
    auto* project = app.add_subcommand("project", "stereographic Euclidean view");
    int pole_cell = -1;
    std::vector<double> pole;
    project->add_option("--pole-cell", pole_cell, "cell that should contain the pole");
    project->add_option("--pole", pole, "explicit pole")->delimiter(',');
    add_io(project, c);

    // measure
    auto* measure = app.add_subcommand("measure", "Monte Carlo volumes and perimeters");
    measure->add_option("--samples", c.samples, "samples per quantity");
    measure->add_option("--format", c.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    add_io(measure, c);

    // verify
    auto* verify = app.add_subcommand("verify", "run verification checks");
    std::vector<std::string> checks{"gram"};
    verify->add_option("--checks", checks, "gram,stationarity,lagrange,jacobi,skew-q0,isotropy")->delimiter(',');
    verify->add_option("--samples", c.samples, "samples per interface");
    verify->add_option("--tol", c.tol, "tolerance for the gram check");
    add_io(verify, c);

    // graph
    auto* graph = app.add_subcommand("graph", "incidence complexes and graphs");
    graph->require_subcommand(1);
    auto* g_extract = graph->add_subcommand("extract", "incidence complex of a cluster");
    g_extract->add_option("--samples", c.samples, "samples per probe");
    g_extract->add_option("--format", c.format, "json | dot")->check(CLI::IsMember({"json", "dot"}));
    add_io(g_extract, c);
    auto* g_hom = graph->add_subcommand("homology", "rank of H1 of a complex or cluster");
    std::string field = "GF2";
    g_hom->add_option("--field", field, "GF2 | Q")->check(CLI::IsMember({"GF2", "Q"}));
    g_hom->add_option("--samples", c.samples, "samples per probe (cluster input)");
    add_io(g_hom, c);
    auto* g_enum = graph->add_subcommand("enumerate", "graphs up to isomorphism");
    std::vector<std::string> filters;
    g_enum->add_option("--q", q, "vertex count")->required();
    g_enum->add_option("--filter", filters, "two_connected | min_degree_3 | triangle_cover")->delimiter(',');
    g_enum->add_option("--format", c.format, "dot | json")->check(CLI::IsMember({"json", "dot"}));
    g_enum->add_option("-o,--out", c.out, "output file");
    auto make_ring = [&](CLI::App* a, std::vector<double>& ks, bool& hept) {
        a->add_option("--q", q, "cell count including the hub")->required();
        a->add_option("--k", ks, "ring curvatures k_iq (q-1 values)")->delimiter(',');
        a->add_flag("--heptagon", hept, "check the regular heptagon geometry (q = 8)");
        a->add_option("-o,--out", c.out, "output file");
    };
    std::vector<double> ring_k;
    bool heptagon = false;
    auto* g_ring = graph->add_subcommand("ring-test", "bubble-ring angle test");
    make_ring(g_ring, ring_k, heptagon);
    auto* ring = app.add_subcommand("ring-test", "bubble-ring angle test");
    make_ring(ring, ring_k, heptagon);

    // blowup
    auto* blowup = app.add_subcommand("blowup", "tangent cone at a boundary point");
    std::vector<double> point;
    blowup->add_option("--point", point, "point on S^n")->delimiter(',')->required();
    add_io(blowup, c);

    // plot
    auto* plot = app.add_subcommand("plot", "SVG cross-section");
    std::string view = "sphere";
    std::vector<double> origin, u, v;
    PlotOptions popt;
    plot->add_option("--view", view, "sphere | euclid")->check(CLI::IsMember({"sphere", "euclid"}));
    plot->add_option("--origin", origin, "plane origin")->delimiter(',');
    plot->add_option("--u", u, "first plane direction")->delimiter(',');
    plot->add_option("--v", v, "second plane direction")->delimiter(',');
    plot->add_option("--resolution", popt.resolution, "samples per curve");
    plot->add_option("--extent", popt.extent, "half-width of the window");
    plot->add_option("--pole-cell", pole_cell, "pole cell for the euclid view");
    add_io(plot, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (construct->parsed()) {
            Json meta{{"mode", mode}};
            Cluster cl = equal_volume_bubble(std::max(n, 1), 2);
            if (mode == "equal") {
                cl = equal_volume_bubble(n, q);
            } else if (mode == "curv") {
                require(!kv.empty(), ErrorCode::SchemaViolation, "--k is required in curv mode");
                cl = bubble_from_curvatures(n, to_vector(kv));
            } else {
                require(!vv.empty(), ErrorCode::SchemaViolation, "--v is required in vol mode");
                VolumeSolverOptions opt;
                if (c.samples) opt.mc_samples = c.samples;
                opt.seed = c.seed;
                opt.max_iter = max_iter;
                opt.tol_v = tol_v;
                const auto sol = bubble_from_volumes(n, to_vector(vv), opt);
                cl = sol.cluster;
                Json trace = Json::array();
                for (const auto& s : sol.trace)
                    trace.push_back({{"iteration", s.iteration}, {"residual", s.residual}, {"damping", s.damping}});
                meta["solver"] = {{"converged", sol.converged}, {"trace", trace}, {"seed", c.seed},
                                  {"samples", opt.mc_samples}, {"diagnostic", sol.diagnostic}};
                if (!sol.converged) {
                    emit_json(to_json(cl, meta), c.out);
                    throw VerificationFailure{"volume solver: " + sol.diagnostic};
                }
            }
            emit_json(to_json(cl, meta), c.out);
        } else if (transform->parsed()) {
            const Cluster cl = load_cluster(c.in);
            const int d = cl.n() + 1;
            Json meta = Json::object();
            Cluster res = cl;
            if (!theta.empty()) {
                res = apply_mobius(res, bubbletk::boost(to_vector(theta), t));
                meta["boost"] = {{"theta", theta}, {"t", t}};
            }
            if (!rot.empty()) {
                require(rot.size() == 3, ErrorCode::SchemaViolation, "--rotate expects axis_a,axis_b,angle");
                res = apply_mobius(res, spatial_rotation(plane_rotation(d, static_cast<int>(rot[0]),
                                                                        static_cast<int>(rot[1]), rot[2])));
                meta["rotate"] = rot;
            }
            emit_json(to_json(res, meta), c.out);
        } else if (project->parsed()) {
            const Cluster cl = load_cluster(c.in);
            const EuclideanView ev = !pole.empty() ? to_euclidean_at(cl, to_vector(pole))
                                     : pole_cell >= 0 ? to_euclidean(cl, pole_cell)
                                                      : to_euclidean(cl);
            emit_json(to_json(ev), c.out);
        } else if (measure->parsed()) {
            const Cluster cl = load_cluster(c.in);
            const auto vol = cell_volumes(cl, c.samples ? c.samples : default_volume_samples, c.seed);
            const auto per = perimeter(cl, c.samples ? c.samples : default_interface_samples, c.seed);
            if (c.format == "csv") {
                std::vector<std::pair<std::string, MeasureReport>> rows;
                for (int i = 0; i < cl.q(); ++i) rows.push_back({"volume_" + std::to_string(i), vol[static_cast<std::size_t>(i)]});
                for (const auto& p : per.pairs)
                    rows.push_back({"perimeter_" + std::to_string(p.i) + "_" + std::to_string(p.j), p.report});
                rows.push_back({"perimeter_total", per.total});
                emit(csv_reports(rows), c.out);
            } else {
                Json jv = Json::array(), jp = Json::array();
                for (const auto& r : vol) jv.push_back(to_json(r));
                for (const auto& p : per.pairs) {
                    Json e = to_json(p.report);
                    e["i"] = p.i;
                    e["j"] = p.j;
                    e["well_formed"] = p.well_formed;
                    jp.push_back(e);
                }
                emit_json({{"volumes", jv}, {"perimeter", {{"pairs", jp}, {"total", to_json(per.total)}}},
                           {"warnings", per.warnings}, {"seed", c.seed}},
                          c.out);
            }
        } else if (verify->parsed()) {
            const Cluster cl = load_cluster(c.in);
            bool ok = true;
            std::string failed;
            const Json res = run_checks(cl, checks, c.samples, c.seed, c.tol, ok, failed);
            emit_json({{"checks", res}, {"pass", ok}, {"seed", c.seed}}, c.out);
            if (!ok) throw VerificationFailure{failed};
        } else if (g_extract->parsed()) {
            const Cluster cl = load_cluster(c.in);
            const auto cx = extract_complex(cl, c.samples ? c.samples : default_probe_samples(cl.n()), c.seed);
            if (c.format == "dot")
                emit(to_dot(one_skeleton(cx), "incidence"), c.out);
            else
                emit_json(to_json(cx), c.out);
        } else if (g_hom->parsed()) {
            std::ifstream f(c.in);
            require(static_cast<bool>(f), ErrorCode::SchemaViolation, "cannot open " + c.in);
            std::stringstream ss;
            ss << f.rdbuf();
            const Json j = parse_json(ss.str());
            const IncidenceComplex cx =
                j.contains("space") ? extract_complex(cluster_from_json(j),
                                                      c.samples ? c.samples : 4096u * static_cast<std::size_t>(j.at("n").get<int>()),
                                                      c.seed)
                                    : complex_from_json(j);
            const int h1 = homology_h1(cx, field == "Q" ? Field::Q : Field::GF2);
            emit_json({{"field", field}, {"h1", h1}, {"complex", to_json(cx)}}, c.out);
        } else if (g_enum->parsed()) {
            std::vector<GraphFilter> fs;
            for (const auto& s : filters) fs.push_back(parse_filter(s));
            const auto graphs = enumerate_graphs(q, fs);
            if (c.format == "dot") {
                std::string s;
                for (std::size_t i = 0; i < graphs.size(); ++i) s += to_dot(graphs[i], "G" + std::to_string(i));
                emit(s, c.out);
            } else {
                Json arr = Json::array();
                for (const auto& g : graphs) {
                    Json es = Json::array();
                    for (const auto& e : g.edges) es.push_back({e[0], e[1]});
                    arr.push_back({{"vertices", g.v}, {"edges", es}});
                }
                emit_json({{"q", q}, {"filters", filters}, {"count", graphs.size()}, {"graphs", arr}}, c.out);
            }
        } else if (g_ring->parsed() || ring->parsed()) {
            Vector k = ring_k.empty() ? Vector::Ones(q - 1) : to_vector(ring_k);
            std::optional<RingGeometry> geo;
            if (heptagon) {
                require(q == 8, ErrorCode::PreconditionFailed, "--heptagon needs q = 8");
                geo = heptagon_ring();
                if (ring_k.empty()) k = geo->radii.cwiseInverse();
            }
            emit_json(ring_json(ring_feasibility(q, k, geo)), c.out);
        } else if (blowup->parsed()) {
            const Cluster cl = load_cluster(c.in);
            emit_json(cone_json(blow_up(cl, to_vector(point))), c.out);
        } else if (plot->parsed()) {
            const Cluster cl = load_cluster(c.in);
            const int dim = view == "sphere" ? cl.n() + 1 : cl.n();
            PlaneSpec pl;
            pl.origin = origin.empty() ? Vector::Zero(dim) : to_vector(origin);
            pl.u = u.empty() ? Vector::Unit(dim, 0) : to_vector(u);
            pl.v = v.empty() ? Vector::Unit(dim, 1) : to_vector(v);
            const std::string svg =
                view == "sphere"
                    ? plot_sphere_slice(cl, pl, popt)
                    : plot_euclidean_slice(pole_cell >= 0 ? to_euclidean(cl, pole_cell) : to_euclidean(cl), pl, popt);
            emit(svg, c.out);
        }
    } catch (const VerificationFailure& f) {
        std::cerr << "verification failed: " << f.check << '\n';
        return 1;
    } catch (const Error& e) {
        std::cerr << Json{{"error", std::string(error_code_name(e.code()))}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << Json{{"error", "schema_violation"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }
    return 0;
}
