#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace bubbletk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Default tolerances. All of them can be overridden per call.
namespace tol {
inline constexpr double lorentz = 1e-9;
inline constexpr double geo = 1e-9;
inline constexpr double tie = 1e-9;
inline constexpr double mem = 1e-7;
inline constexpr double rank_rel = 1e-10;
}  // namespace tol

enum class ErrorCode {
    DimensionMismatch,
    ZeroVector,
    ConventionViolation,
    GramMismatch,
    RankDeficient,
    NotOrthochronous,
    NotLorentz,
    NotOnSphere,
    MalformedPair,
    DegenerateIntersection,
    InteriorPoint,
    OutOfRange,
    NoValidPole,
    SymmetryViolated,
    UnboundedInterface,
    NotOnInterface,
    PreconditionFailed,
    NonConvergence,
    SchemaViolation,
    DegeneratePlane,
};

inline std::string_view error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::ZeroVector: return "zero_vector";
        case ErrorCode::ConventionViolation: return "convention_violation";
        case ErrorCode::GramMismatch: return "gram_mismatch";
        case ErrorCode::RankDeficient: return "rank_deficient";
        case ErrorCode::NotOrthochronous: return "not_orthochronous";
        case ErrorCode::NotLorentz: return "not_lorentz";
        case ErrorCode::NotOnSphere: return "not_on_sphere";
        case ErrorCode::MalformedPair: return "malformed_pair";
        case ErrorCode::DegenerateIntersection: return "degenerate_intersection";
        case ErrorCode::InteriorPoint: return "interior_point";
        case ErrorCode::OutOfRange: return "out_of_range";
        case ErrorCode::NoValidPole: return "no_valid_pole";
        case ErrorCode::SymmetryViolated: return "symmetry_violated";
        case ErrorCode::UnboundedInterface: return "unbounded_interface";
        case ErrorCode::NotOnInterface: return "not_on_interface";
        case ErrorCode::PreconditionFailed: return "precondition_failed";
        case ErrorCode::NonConvergence: return "non_convergence";
        case ErrorCode::SchemaViolation: return "schema_violation";
        case ErrorCode::DegeneratePlane: return "degenerate_plane";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

/// Surface area of the unit m-sphere S^m in R^{m+1}: 2 pi^{(m+1)/2} / Gamma((m+1)/2).
inline double sphere_area(int m) {
    const double h = 0.5 * (m + 1);
    return 2.0 * std::pow(M_PI, h) / std::tgamma(h);
}

/// Volume of the unit ball in R^d.
inline double ball_volume(int d) {
    return d == 0 ? 1.0 : sphere_area(d - 1) / d;
}

/// Orthonormal basis of the zero-sum subspace E^{(q-1)} of R^q (Helmert columns).
inline Matrix zero_sum_basis(int q) {
    Matrix h = Matrix::Zero(q, q - 1);
    for (int j = 0; j < q - 1; ++j) {
        const double m = j + 1;
        const double s = 1.0 / std::sqrt(m * (m + 1));
        for (int i = 0; i <= j; ++i) h(i, j) = s;
        h(j + 1, j) = -m * s;
    }
    return h;
}

/// Orthogonal projector onto E^{(q-1)}: I - (1/q) 11^T.
inline Matrix zero_sum_projector(int q) {
    return Matrix::Identity(q, q) - Matrix::Constant(q, q, 1.0 / q);
}

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace bubbletk
