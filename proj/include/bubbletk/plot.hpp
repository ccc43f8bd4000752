#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "bubbletk/cluster.hpp"
#include "bubbletk/measure.hpp"
#include "bubbletk/projections.hpp"

namespace bubbletk {

/// Affine 2D plane origin + s u + t v. The spanning vectors are
/// orthonormalized (Gram-Schmidt) before use.
struct PlaneSpec {
    Vector origin;
    Vector u;
    Vector v;
};

struct PlotOptions {
    int resolution = 720;   // samples along each curve
    int size = 480;         // SVG width and height in pixels
    double extent = 1.25;   // half-width of the plotted window in plane units
};

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    std::string s(buf);
    return s == "-0.000" ? "0.000" : s;
}

inline const char* palette(int idx) {
    static const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                                   "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"};
    return colors[idx % 10];
}

inline std::pair<Vector, Vector> orthonormal_plane(const PlaneSpec& pl, Eigen::Index dim) {
    require(pl.origin.size() == dim && pl.u.size() == dim && pl.v.size() == dim, ErrorCode::DimensionMismatch,
            "plot: plane vectors have wrong dimension");
    const double nu = pl.u.norm();
    require(nu > 1e-12, ErrorCode::DegeneratePlane, "plot: first plane vector is zero");
    Vector e1 = pl.u / nu;
    Vector e2 = pl.v - pl.v.dot(e1) * e1;
    require(e2.norm() > 1e-9 * std::max(1.0, pl.v.norm()), ErrorCode::DegeneratePlane,
            "plot: plane vectors are linearly dependent");
    return {e1, e2 / e2.norm()};
}

struct SvgCanvas {
    int size;
    double extent;
    std::string body;

    double sx(double s) const { return (s + extent) / (2.0 * extent) * size; }
    double sy(double t) const { return (extent - t) / (2.0 * extent) * size; }

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* color, double width) {
        if (pts.size() < 2) return;
        body += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"" + fmt(width) +
                "\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i) body += ' ';
            body += fmt(sx(pts[i].first)) + "," + fmt(sy(pts[i].second));
        }
        body += "\"/>\n";
    }

    void dot(double s, double t, const char* color) {
        body += "<circle cx=\"" + fmt(sx(s)) + "\" cy=\"" + fmt(sy(t)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }

    std::string finish(const std::string& title) const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) + "\" height=\"" +
               std::to_string(size) + "\" viewBox=\"0 0 " + std::to_string(size) + " " + std::to_string(size) +
               "\">\n<title>" + title + "</title>\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body +
               "</svg>\n";
    }
};

/// Splits a sampled closed or open curve into runs where `keep` holds.
inline std::vector<std::vector<std::pair<double, double>>> runs(const std::vector<std::pair<double, double>>& pts,
                                                         const std::vector<char>& keep, bool closed) {
    std::vector<std::vector<std::pair<double, double>>> out;
    std::vector<std::pair<double, double>> cur;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (keep[i]) {
            cur.push_back(pts[i]);
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) {
        if (closed && keep.front() && !out.empty() && keep.size() == pts.size()) {
            cur.insert(cur.end(), out.front().begin(), out.front().end());
            out.front() = cur;
        } else {
            out.push_back(cur);
        }
    }
    return out;
}

}  // namespace detail

/// Slice of S^n by a 2D plane: the resulting circle is drawn in arcs colored
/// by cell, with dots where the slice crosses an interface.
inline std::string plot_sphere_slice(const Cluster& cl, const PlaneSpec& plane, const PlotOptions& opt = {}) {
    const auto [e1, e2] = detail::orthonormal_plane(plane, cl.n() + 1);
    const Vector o = plane.origin - plane.origin.dot(e1) * e1 - plane.origin.dot(e2) * e2;
    const double r2 = 1.0 - o.squaredNorm();
    require(r2 > 1e-12, ErrorCode::DegeneratePlane, "plot: plane does not cut the sphere");
    const double r = std::sqrt(r2);
    detail::SvgCanvas cv{opt.size, opt.extent, {}};
    const int m = opt.resolution;
    std::vector<std::pair<double, double>> pts;
    std::vector<int> cell;
    for (int s = 0; s < m; ++s) {
        const double a = 2.0 * M_PI * s / m;
        pts.push_back({r * std::cos(a), r * std::sin(a)});
        cell.push_back(cell_index_lowest(cl, o + r * std::cos(a) * e1 + r * std::sin(a) * e2));
    }
    for (int c = 0; c < cl.q(); ++c) {
        std::vector<char> keep(static_cast<std::size_t>(m));
        for (int s = 0; s < m; ++s) {
            // Each sample owns the half-open step to its successor.
            keep[static_cast<std::size_t>(s)] = cell[static_cast<std::size_t>(s)] == c ||
                                                cell[static_cast<std::size_t>((s + m - 1) % m)] == c;
        }
        for (const auto& run : detail::runs(pts, keep, true)) cv.polyline(run, detail::palette(c), 4.0);
    }
    for (int s = 0; s < m; ++s)
        if (cell[static_cast<std::size_t>(s)] != cell[static_cast<std::size_t>((s + 1) % m)]) {
            const double a = 2.0 * M_PI * (s + 0.5) / m;
            cv.dot(r * std::cos(a), r * std::sin(a), "black");
        }
    return cv.finish("sphere slice, n=" + std::to_string(cl.n()) + ", q=" + std::to_string(cl.q()));
}

/// Slice of the Euclidean picture by a 2D plane of R^n: each interface
/// carrier is cut by the plane and drawn where it bounds both of its cells.
/// Empty interfaces draw nothing.
inline std::string plot_euclidean_slice(const EuclideanView& view, const PlaneSpec& plane, const PlotOptions& opt = {}) {
    const auto [e1, e2] = detail::orthonormal_plane(plane, view.n());
    const Vector o = plane.origin - plane.origin.dot(e1) * e1 - plane.origin.dot(e2) * e2;
    detail::SvgCanvas cv{opt.size, opt.extent, {}};
    const int m = opt.resolution;
    int pair_idx = 0;
    for (int i = 0; i < view.q(); ++i)
        for (int j = i + 1; j < view.q(); ++j, ++pair_idx) {
            if (std::abs(view.parent().pair_defect(i, j)) > tol::geo) continue;
            const EuclideanCarrier c = view.carrier(i, j);
            std::vector<std::pair<double, double>> pts;
            std::vector<Vector> xs;
            bool closed = false;
            if (c.is_plane) {
                // Line {s e1 + t e2 : <a, o + s e1 + t e2> = b} inside the window.
                const double a1 = c.normal.dot(e1), a2 = c.normal.dot(e2);
                const double b = c.offset - c.normal.dot(o);
                const double an = std::hypot(a1, a2);
                if (an < 1e-12) continue;
                const double s0 = a1 * b / (an * an), t0 = a2 * b / (an * an);
                const double span = 2.0 * opt.extent;
                for (int s = 0; s <= m; ++s) {
                    const double w = -span + 2.0 * span * s / m;
                    const double ps = s0 - a2 / an * w, pt = t0 + a1 / an * w;
                    pts.push_back({ps, pt});
                    xs.push_back(o + ps * e1 + pt * e2);
                }
            } else {
                const Vector d = c.center - o;
                const double cs = d.dot(e1), ct = d.dot(e2);
                const double h2 = (d - cs * e1 - ct * e2).squaredNorm();
                const double rr = c.radius * c.radius - h2;
                if (rr <= 0.0) continue;
                const double r = std::sqrt(rr);
                closed = true;
                for (int s = 0; s < m; ++s) {
                    const double a = 2.0 * M_PI * s / m;
                    const double ps = cs + r * std::cos(a), pt = ct + r * std::sin(a);
                    pts.push_back({ps, pt});
                    xs.push_back(o + ps * e1 + pt * e2);
                }
            }
            std::vector<char> keep(pts.size());
            for (std::size_t s = 0; s < pts.size(); ++s)
                keep[s] = detail::in_closure(view.functionals(xs[s]), i, j) ? 1 : 0;
            for (const auto& run : detail::runs(pts, keep, closed))
                cv.polyline(run, detail::palette(pair_idx), 2.5);
        }
    return cv.finish("euclidean slice, n=" + std::to_string(view.n()) + ", q=" + std::to_string(view.q()));
}

}  // namespace bubbletk
