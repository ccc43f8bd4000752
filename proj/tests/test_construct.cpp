#include <gtest/gtest.h>

#include "bubbletk/construct.hpp"

using namespace bubbletk;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// CC^T should equal P/2 + kk^T, with P the projector orthogonal to (1, ..., 1).
double factorization_gap(const Cluster& cl) {
    const int q = cl.q();
    const Matrix p = Matrix::Identity(q, q) - Matrix::Constant(q, q, 1.0 / q);
    const Vector& k = cl.curvatures();
    return max_abs(cl.centers() * cl.centers().transpose() - 0.5 * p - k * k.transpose());
}

}  // namespace

TEST(EqualVolume, UnitSimplexWithZeroCurvature) {
    for (int n = 1; n <= 5; ++n)
        for (int q = 2; q <= n + 2; ++q) {
            const Cluster cl = equal_volume_bubble(n, q);
            EXPECT_EQ(cl.curvatures(), Vector(Vector::Zero(q)));
            for (int i = 0; i < q; ++i)
                for (int j = i + 1; j < q; ++j) EXPECT_NEAR(cl.quasi_center(i, j).norm(), 1.0, 1e-14);
            EXPECT_LT(cl.centers().colwise().sum().cwiseAbs().maxCoeff(), 1e-15);
        }
    EXPECT_THROW(equal_volume_bubble(2, 5), Error);
    EXPECT_THROW(equal_volume_bubble(0, 2), Error);
}

TEST(FromCurvatures, FactorizationAndWellFormedPairs) {
    CounterRng rng(31, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        const int q = 2 + trial % (n + 1);
        Vector k = rng.gaussian(q);
        k.array() -= k.mean();
        for (const Cluster& cl : {bubble_from_curvatures(n, k), bubble_from_curvatures_smooth(n, k)}) {
            EXPECT_LT(factorization_gap(cl), 1e-12);
            for (int i = 0; i < q; ++i)
                for (int j = i + 1; j < q; ++j) EXPECT_NEAR(cl.pair_defect(i, j), 0.0, 1e-12);
        }
    }
}

TEST(FromCurvatures, ZeroCurvatureGivesEqualVolumeUpToRotation) {
    const Cluster a = bubble_from_curvatures(3, Vector::Zero(4));
    const Cluster b = equal_volume_bubble(3, 4);
    EXPECT_LT(max_abs(a.centers() * a.centers().transpose() - b.centers() * b.centers().transpose()), 1e-14);
}

TEST(FromCurvatures, SignConventionIsDeterministic) {
    const Vector k = vec({0.2, -0.3, 0.4, -0.3});
    const Cluster a = bubble_from_curvatures(3, k), b = bubble_from_curvatures(3, k);
    EXPECT_EQ(a, b);
    EXPECT_THROW(bubble_from_curvatures(3, vec({0.2, 0.1, 0.0, 0.0})), Error);
}

TEST(FromCurvatures, SmoothVariantIsContinuousInK) {
    const Vector base = vec({0.0, 0.0, 0.0});
    const Vector dir = vec({1.0, -0.5, -0.5});
    double worst = 0.0;
    for (int s = -5; s <= 5; ++s) {
        const Cluster a = bubble_from_curvatures_smooth(2, base + 1e-4 * s * dir);
        const Cluster b = bubble_from_curvatures_smooth(2, base + 1e-4 * (s + 1) * dir);
        worst = std::max(worst, max_abs(a.centers() - b.centers()));
    }
    EXPECT_LT(worst, 1e-3);
}

TEST(FromVolumes, TwoCellCapMatchesArchimedes) {
    // v_0 = (1 - kappa / sqrt(1 + kappa^2)) / 2 on S^2, so v_0 = 0.3 gives kappa = 0.4 / sqrt(0.84).
    VolumeSolverOptions opt;
    opt.mc_samples = 200000;
    const VolumeSolution sol = bubble_from_volumes(2, vec({0.3, 0.7}), opt);
    ASSERT_TRUE(sol.converged) << sol.diagnostic;
    EXPECT_NEAR(sol.cluster.curvature(0, 1), 0.4 / std::sqrt(0.84), 5e-3);
    EXPECT_LT(sol.trace.back().residual, opt.tol_v);
}

TEST(FromVolumes, TripleBubbleHitsTargetsOnFreshSamples) {
    VolumeSolverOptions opt;
    opt.mc_samples = 200000;
    const Vector target = vec({0.5, 0.3, 0.2});
    const VolumeSolution sol = bubble_from_volumes(2, target, opt);
    ASSERT_TRUE(sol.converged) << sol.diagnostic;
    EXPECT_TRUE(is_standard_bubble(sol.cluster).standard);
    const auto v = cell_volumes(sol.cluster, 200000, 999);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(v[static_cast<std::size_t>(i)].value, target[i], 5e-3);
    // Larger cells have smaller curvature parameter.
    EXPECT_LT(sol.cluster.curvature(0), sol.cluster.curvature(2));
}

TEST(FromVolumes, ReportsNonConvergenceAndBadInput) {
    VolumeSolverOptions opt;
    opt.mc_samples = 20000;
    opt.max_iter = 0;
    const VolumeSolution sol = bubble_from_volumes(2, vec({0.6, 0.2, 0.2}), opt);
    EXPECT_FALSE(sol.converged);
    EXPECT_FALSE(sol.diagnostic.empty());
    EXPECT_THROW(bubble_from_volumes(2, vec({0.6, 0.6, -0.2}), opt), Error);
    EXPECT_THROW(bubble_from_volumes(2, vec({0.3, 0.3, 0.3}), opt), Error);
}

TEST(Rotations, OrthogonalAndSeeded) {
    const Matrix r = random_rotation(5, 3);
    EXPECT_LT(max_abs(r * r.transpose() - Matrix::Identity(5, 5)), 1e-13);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    EXPECT_EQ(r, random_rotation(5, 3));
    EXPECT_NE(r, random_rotation(5, 4));
    const Matrix pr = plane_rotation(3, 0, 1, M_PI / 2);
    EXPECT_LT((pr * vec({1, 0, 0}) - vec({0, 1, 0})).norm(), 1e-15);
    EXPECT_THROW(plane_rotation(3, 1, 1, 0.3), Error);
}

TEST(ApplyMobius, RotationRotatesCentersAndKeepsStandardness) {
    const Cluster cl = bubble_from_curvatures(3, vec({0.4, -0.1, 0.2, -0.5}));
    const Matrix r = random_rotation(4, 8);
    const Cluster rot = apply_mobius(cl, spatial_rotation(r));
    EXPECT_LT(max_abs(rot.centers() - cl.centers() * r.transpose()), 1e-14);
    EXPECT_LT(max_abs(rot.curvatures() - cl.curvatures()), 1e-15);
    const Cluster boosted = apply_mobius(cl, boost(vec({0, 0, 1, 0}), 1.2));
    EXPECT_TRUE(is_standard_bubble(boosted).standard);
    EXPECT_THROW(apply_mobius(cl, boost(vec({0, 1, 0}), 1.0)), Error);
}

TEST(Perpendicular, CentersAvoidTheLastAxis) {
    const Vector k = vec({0.3, -0.2, 0.1, -0.2});
    const Cluster cl = perpendicular_bubble(3, k);
    EXPECT_LT(cl.centers().col(3).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(cl.curvatures(), k);
    EXPECT_LT(factorization_gap(cl), 1e-12);
    EXPECT_THROW(perpendicular_bubble(2, k), Error);
}
