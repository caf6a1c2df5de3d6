#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "rowsolve/errors.hpp"
#include "rowsolve/problems.hpp"
#include "test_util.hpp"

using namespace rowsolve;
using testutil::to_eigen;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("rowsolve_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Eigen::JacobiSVD<Eigen::MatrixXd> svd_of(const MatrixStore& a)
{
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a.to_eigen(), Eigen::ComputeThinU | Eigen::ComputeThinV);
}

}  // namespace

TEST(SyntheticUdv, RankAndConditionBound)
{
    const auto a = synthetic_udv(60, 20, 8, 5.0, 3);
    EXPECT_EQ(a.rows(), 60u);
    EXPECT_EQ(a.cols(), 20u);
    const Eigen::VectorXd s = svd_of(a).singularValues();
    for (Eigen::Index k = 0; k < 8; ++k) {
        EXPECT_GE(s(k), 1.0 - 1e-12);
        EXPECT_LE(s(k), 5.0 + 1e-12);
    }
    for (Eigen::Index k = 8; k < 20; ++k) EXPECT_LT(s(k), 1e-12);
}

TEST(SyntheticUdv, DeterministicPerSeed)
{
    const auto p = synthetic_udv(30, 10, 5, 3.0, 7), q = synthetic_udv(30, 10, 5, 3.0, 7);
    EXPECT_EQ(p.to_eigen(), q.to_eigen());
    EXPECT_NE(p.to_eigen(), synthetic_udv(30, 10, 5, 3.0, 8).to_eigen());
}

TEST(SyntheticUdv, InvalidArguments)
{
    EXPECT_THROW(synthetic_udv(10, 5, 0, 2.0, 1), UsageError);
    EXPECT_THROW(synthetic_udv(10, 5, 6, 2.0, 1), UsageError);
    EXPECT_THROW(synthetic_udv(10, 5, 3, 1.0, 1), UsageError);
}

TEST(NoisyRhs, Decomposition)
{
    const auto a = synthetic_udv(40, 10, 6, 4.0, 2);
    const NoisyRhs r = noisy_rhs(a, 0.3, 11);
    const Eigen::MatrixXd e = a.to_eigen();
    const Eigen::VectorXd b = to_eigen(r.b), xs = to_eigen(r.x_star), noise = to_eigen(r.noise);

    EXPECT_NEAR(noise.norm(), 1.0, 1e-12);
    EXPECT_LT((e.transpose() * noise).norm(), 1e-10);
    EXPECT_LT((b - e * xs - 0.3 * noise).norm(), 1e-12 * b.norm());
    // x* is the minimum-norm least-squares solution of A x = b
    EXPECT_LT((xs - testutil::pinv_solve(e, b)).norm(), 1e-9 * xs.norm());
    EXPECT_LT((xs - testutil::range_project(e.transpose(), xs)).norm(), 1e-10 * xs.norm());
}

TEST(NoisyRhs, ZeroDeltaIsConsistent)
{
    const auto a = synthetic_udv(20, 8, 8, 2.0, 1);
    const NoisyRhs r = noisy_rhs(a, 0.0, 1);
    EXPECT_TRUE(r.noise.empty());
    EXPECT_LT((a.to_eigen() * to_eigen(r.x_star) - to_eigen(r.b)).norm(), 1e-12 * to_eigen(r.b).norm());
}

TEST(NoisyRhs, FullRowRankHasNoNullSpace)
{
    const auto a = synthetic_udv(5, 8, 5, 2.0, 1);
    EXPECT_THROW(noisy_rhs(a, 0.1, 1), DataError);
}

TEST(Example1, Shape)
{
    const ProblemInstance p = example1(20, 0.1, 4);
    EXPECT_EQ(p.a.rows(), 600u);
    EXPECT_EQ(p.a.cols(), 20u);
    ASSERT_TRUE(p.x_star);
    EXPECT_NEAR(p.b_n_norm, 0.1, 1e-12);
    const Eigen::VectorXd s = svd_of(p.a).singularValues();
    EXPECT_GT(s(9), 1e-8);
    EXPECT_LT(s(10), 1e-10);
    EXPECT_EQ(p.descriptor["generator"], "example1");
    EXPECT_THROW(example1(5, 0.1, 1), UsageError);
}

TEST(Tomography, AxisAlignedRay)
{
    // horizontal ray through the centres of pixel row 2 of a 4 x 4 grid
    const auto ray = tomo_ray(4, 0.0, 0.5);
    ASSERT_EQ(ray.size(), 4u);
    for (std::size_t q = 0; q < 4; ++q) {
        EXPECT_EQ(ray[q].first, 8 + q);
        EXPECT_NEAR(ray[q].second, 1.0, 1e-12);
    }
}

TEST(Tomography, VerticalRay)
{
    const auto ray = tomo_ray(4, std::numbers::pi / 2, -0.5);
    ASSERT_EQ(ray.size(), 4u);
    double len = 0.0;
    for (const auto& [pix, l] : ray) {
        EXPECT_EQ(pix % 4, 2u);
        len += l;
    }
    EXPECT_NEAR(len, 4.0, 1e-12);
}

TEST(Tomography, RayLengthsSumToChord)
{
    for (double theta : {0.1, 0.7, 1.3, 2.2, 3.0})
        for (double t : {-5.0, -2.1, 0.0, 0.3, 4.9}) {
            double len = 0.0;
            for (const auto& [pix, l] : tomo_ray(8, theta, t)) {
                EXPECT_LT(pix, 64u);
                EXPECT_GT(l, 0.0);
                len += l;
            }
            EXPECT_NEAR(len, tomo_chord_length(8, theta, t), 1e-10);
        }
    EXPECT_NEAR(tomo_chord_length(4, std::numbers::pi / 4, 0.0), 4.0 * std::numbers::sqrt2, 1e-12);
    EXPECT_EQ(tomo_chord_length(4, 0.0, 3.0), 0.0);
}

TEST(Tomography, OperatorShapeAndRank)
{
    const TomoOperator op = tomo_line_matrix(16, 24, 24);
    EXPECT_EQ(op.a.rows(), 576u);
    EXPECT_EQ(op.a.cols(), 256u);
    EXPECT_FALSE(op.a.is_dense());
    EXPECT_LE(op.a.nnz(), 576u * 2u * 16u);
    const Eigen::VectorXd s = svd_of(op.a).singularValues();
    EXPECT_GT(s(255), 1e-8 * s(0));
}

TEST(Tomography, DiskPhantom)
{
    const auto p = disk_phantom(16);
    ASSERT_EQ(p.size(), 256u);
    double mass = 0.0;
    for (double v : p) {
        EXPECT_TRUE(v == 0.0 || v == 1.0);
        mass += v;
    }
    // area of a radius-4 disk, counted by pixel centres
    EXPECT_NEAR(mass, std::numbers::pi * 16.0, 8.0);
    EXPECT_EQ(p[8 * 16 + 8], 1.0);
    EXPECT_EQ(p[0], 0.0);
}

TEST(Tomography, InstanceIsInconsistentWithUnitNoise)
{
    const ProblemInstance inst = tomography(8, 12, 12, 5);
    ASSERT_TRUE(inst.x_star);
    EXPECT_EQ(inst.descriptor["tau"], 8);
    const Eigen::MatrixXd e = inst.a.to_eigen();
    const Eigen::VectorXd noise = to_eigen(inst.b) - e * to_eigen(*inst.x_star);
    EXPECT_NEAR(noise.norm(), 1.0, 1e-10);
    EXPECT_LT((e.transpose() * noise).norm(), 1e-9);
    EXPECT_NEAR(inst.b_n_norm, 1.0, 1e-10);
}

TEST(Tomography, Deterministic)
{
    const auto p = tomography(8, 10, 10, 2), q = tomography(8, 10, 10, 2);
    EXPECT_EQ(p.b, q.b);
    EXPECT_NE(p.b, tomography(8, 10, 10, 3).b);
}

TEST(InstanceIo, RoundTrip)
{
    const fs::path dir = scratch_dir("instance");
    const ProblemInstance p = example1(12, 0.2, 9);
    write_instance(p, dir);
    EXPECT_TRUE(fs::exists(dir / "A.mtx"));
    const ProblemInstance q = read_instance(dir);
    EXPECT_EQ(q.a.rows(), p.a.rows());
    EXPECT_LT((q.a.to_eigen() - p.a.to_eigen()).norm(), 1e-15 * p.a.to_eigen().norm());
    EXPECT_EQ(q.b, p.b);
    ASSERT_TRUE(q.x_star);
    EXPECT_EQ(*q.x_star, *p.x_star);
    EXPECT_DOUBLE_EQ(q.b_n_norm, p.b_n_norm);
    EXPECT_EQ(q.descriptor["generator"], "example1");
    fs::remove_all(dir);
}

TEST(InstanceIo, MissingDirectory)
{
    EXPECT_THROW(read_instance("/nonexistent/rowsolve"), UsageError);
}

TEST(InstanceIo, ColumnsCsv)
{
    const fs::path dir = scratch_dir("columns");
    const std::vector<std::vector<double>> cols{{1.5, -2.0, 0.1}, {3.0, 4.0, 1e-300}};
    write_columns_csv(cols, dir / "c.csv");
    EXPECT_EQ(read_columns_csv(dir / "c.csv"), cols);
    write_vector_csv(cols[0], dir / "v.csv");
    EXPECT_EQ(read_vector_csv(dir / "v.csv"), cols[0]);

    std::ofstream(dir / "bad.csv") << "1,2\n3\n";
    EXPECT_THROW(read_columns_csv(dir / "bad.csv"), ParseError);
    try {
        read_columns_csv(dir / "bad.csv");
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    fs::remove_all(dir);
}

TEST(InstanceIo, Pgm)
{
    const fs::path dir = scratch_dir("pgm");
    write_pgm(std::vector<double>{0.0, 1.0, 0.5, 2.0}, 2, 2, dir / "p.pgm");
    std::ifstream in(dir / "p.pgm");
    std::string magic;
    std::size_t w = 0, h = 0, maxv = 0;
    in >> magic >> w >> h >> maxv;
    EXPECT_EQ(magic, "P2");
    EXPECT_EQ(w, 2u);
    EXPECT_EQ(h, 2u);
    EXPECT_EQ(maxv, 255u);
    std::vector<int> px(4);
    for (int& v : px) in >> v;
    // top image row is the largest y
    EXPECT_EQ(px, (std::vector<int>{128, 255, 0, 255}));
    fs::remove_all(dir);
}
