#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rowsolve/errors.hpp"
#include "rowsolve/matrix.hpp"
#include "test_util.hpp"

using namespace rowsolve;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "rowsolve_test_matrix";
    fs::create_directories(dir);
    return dir / name;
}

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

std::size_t parse_error_line(const fs::path& p)
{
    try {
        mm_read(p);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST(FrobeniusNorm, Identity)
{
    EXPECT_EQ(frobenius_norm_sq(MatrixStore::dense_from_rows({{1, 0}, {0, 1}})), 2.0);
}

TEST(FrobeniusNorm, Zero)
{
    EXPECT_EQ(frobenius_norm_sq(MatrixStore::dense(3, 4, std::vector<double>(12, 0.0))), 0.0);
}

TEST(FrobeniusNorm, SumOfSquares)
{
    const auto a = MatrixStore::dense_from_rows({{1, 2}, {2, 0}, {0, 3}});
    EXPECT_EQ(frobenius_norm_sq(a), 1.0 + 4.0 + 4.0 + 9.0);
    EXPECT_EQ(frobenius_norm_sq(a.to_csr()), 18.0);
}

TEST(Matvec, Identity)
{
    const auto i3 = MatrixStore::dense_from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const std::vector<double> v{1, 2, 3};
    EXPECT_EQ(matvec(i3, v), v);
}

TEST(Matvec, SingleRow)
{
    const auto a = MatrixStore::dense_from_rows({{1, 1}});
    const std::vector<double> v{2, 5};
    EXPECT_EQ(matvec(a, v), std::vector<double>{7});
}

TEST(Matvec, CsrTransposedMatchesDense)
{
    const auto d = MatrixStore::dense_from_rows({{0, 2}, {3, 0}});
    const auto s = d.to_csr();
    const std::vector<double> v{1, 1};
    EXPECT_EQ(matvec(s, v, true), (std::vector<double>{3, 2}));
    EXPECT_EQ(matvec(s, v, true), matvec(d, v, true));
}

TEST(Matvec, DimensionMismatchIsUsageError)
{
    const auto a = MatrixStore::dense_from_rows({{1, 2}, {3, 4}, {5, 6}});
    const std::vector<double> v{1, 2, 3};
    EXPECT_THROW(matvec(a, v), UsageError);
    EXPECT_NO_THROW(matvec(a, v, true));
}

TEST(Matvec, NormalProductMatchesExplicitGram)
{
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd a = testutil::gaussian(17, 6, gen);
        const Eigen::VectorXd v = testutil::gaussian_vec(6, gen);
        const auto m = MatrixStore::from_eigen(a);
        const auto av = matvec(m, testutil::to_std(v));
        const auto atav = matvec(m, av, true);
        const Eigen::VectorXd oracle = (a.transpose() * a) * v;
        EXPECT_LT(testutil::rel_diff(atav, testutil::to_std(oracle)), 1e-12);
    }
}

TEST(MatrixStore, CsrDenseAgreeOnAllKernels)
{
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u;
    Eigen::MatrixXd a = testutil::gaussian(23, 9, gen);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (u(gen) < 0.6) a(i, j) = 0.0;
    const auto d = MatrixStore::from_eigen(a);
    const auto s = d.to_csr();
    ASSERT_EQ(s.layout(), Layout::csr);
    const auto x = testutil::to_std(testutil::gaussian_vec(9, gen));
    const auto y = testutil::to_std(testutil::gaussian_vec(23, gen));
    EXPECT_LT(testutil::rel_diff(matvec(d, x), matvec(s, x)), 1e-14);
    EXPECT_LT(testutil::rel_diff(matvec(d, y, true), matvec(s, y, true)), 1e-14);

    const std::vector<std::size_t> rows{2, 5, 6, 17}, cols{0, 4, 8};
    std::vector<double> od(rows.size()), os(rows.size());
    d.row_block_times(rows, x, od);
    s.row_block_times(rows, x, os);
    EXPECT_LT(testutil::rel_diff(od, os), 1e-14);

    const std::vector<double> r{1.5, -2.0, 0.25, 3.0};
    std::vector<double> td(9), ts(9);
    d.row_block_transpose_times(rows, r, td);
    s.row_block_transpose_times(rows, r, ts);
    EXPECT_LT(testutil::rel_diff(td, ts), 1e-14);

    const std::vector<double> z{0.5, -1.0, 2.0};
    std::vector<double> cd(23), cs(23);
    d.col_block_times(cols, z, cd);
    s.col_block_times(cols, z, cs);
    EXPECT_LT(testutil::rel_diff(cd, cs), 1e-14);

    std::vector<double> ctd(3), cts(3);
    d.col_block_transpose_times(cols, y, ctd);
    s.col_block_transpose_times(cols, y, cts);
    EXPECT_LT(testutil::rel_diff(ctd, cts), 1e-14);

    EXPECT_DOUBLE_EQ(d.block_frobenius_sq(Axis::rows, rows), s.block_frobenius_sq(Axis::rows, rows));
    EXPECT_DOUBLE_EQ(d.block_frobenius_sq(Axis::cols, cols), s.block_frobenius_sq(Axis::cols, cols));
    EXPECT_TRUE(d.block(Axis::rows, rows).isApprox(s.block(Axis::rows, rows)));
}

TEST(MatrixStore, BlockProductsMatchEigen)
{
    std::mt19937_64 gen(8);
    const Eigen::MatrixXd a = testutil::gaussian(12, 7, gen);
    const auto m = MatrixStore::from_eigen(a);
    const std::vector<std::size_t> rows{1, 4, 9};
    const auto x = testutil::gaussian_vec(7, gen);
    std::vector<double> out(3);
    m.row_block_times(rows, testutil::to_std(x), out);
    for (std::size_t q = 0; q < rows.size(); ++q)
        EXPECT_NEAR(out[q], a.row(static_cast<Eigen::Index>(rows[q])).dot(x), 1e-13);
}

TEST(MatrixStore, CsrValidation)
{
    EXPECT_NO_THROW(MatrixStore::csr(2, 2, {0, 1, 2}, {1, 0}, {2.0, 3.0}));
    EXPECT_THROW(MatrixStore::csr(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), UsageError);  // not monotone
    EXPECT_THROW(MatrixStore::csr(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), UsageError);  // unsorted row
    EXPECT_THROW(MatrixStore::csr(2, 2, {0, 1, 2}, {0, 2}, {1.0, 1.0}), UsageError);  // column out of range
    EXPECT_THROW(MatrixStore::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), UsageError);
}

TEST(ThinSvd, Identity)
{
    const auto f = thin_svd(MatrixStore::dense_from_rows({{1, 0}, {0, 1}}));
    ASSERT_EQ(f.rank, 2u);
    EXPECT_NEAR(f.sigma(0), 1.0, 1e-15);
    EXPECT_NEAR(f.sigma(1), 1.0, 1e-15);
}

TEST(ThinSvd, ColumnVector)
{
    const auto f = thin_svd(MatrixStore::dense_from_rows({{1}, {1}}));
    ASSERT_EQ(f.rank, 1u);
    EXPECT_NEAR(f.sigma(0), std::sqrt(2.0), 1e-15);
}

TEST(ThinSvd, RankDeficient)
{
    // Gram matrix [[2,2],[2,2]] has eigenvalues 4 and 0
    const auto f = thin_svd(MatrixStore::dense_from_rows({{1, 1}, {1, 1}}));
    ASSERT_EQ(f.rank, 1u);
    EXPECT_NEAR(f.sigma(0), 2.0, 1e-14);
}

TEST(ThinSvd, NonfiniteIsDataError)
{
    const auto a = MatrixStore::dense_from_rows({{1, std::numeric_limits<double>::quiet_NaN()}});
    EXPECT_THROW(thin_svd(a), DataError);
}

TEST(ThinSvd, ReconstructionAndOrthonormality)
{
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<int> dim(1, 200);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = dim(gen), n = std::min(dim(gen) / 2 + 1, 100);
        const int r = std::uniform_int_distribution<int>(1, std::min(m, n))(gen);
        const Eigen::MatrixXd a = trial % 2 ? testutil::gaussian(m, n, gen) : testutil::random_rank(m, n, r, gen);
        const auto f = thin_svd(MatrixStore::from_eigen(a));
        const Eigen::Index k = static_cast<Eigen::Index>(f.rank);
        const Eigen::MatrixXd rec = f.U * f.sigma.asDiagonal() * f.V.transpose();
        EXPECT_LE((a - rec).norm(), 1e-10 * a.norm()) << m << "x" << n;
        EXPECT_LE((f.U.transpose() * f.U - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-10);
        EXPECT_LE((f.V.transpose() * f.V - Eigen::MatrixXd::Identity(k, k)).norm(), 1e-10);
        if (trial % 2 == 0) EXPECT_EQ(f.rank, static_cast<std::size_t>(r));
    }
}

TEST(MatrixMarket, RoundTripIdentity)
{
    const auto i2 = MatrixStore::dense_from_rows({{1, 0}, {0, 1}});
    const fs::path p = temp_file("i2.mtx");
    mm_write(i2, p);
    const auto back = mm_read(p);
    EXPECT_EQ(back.to_eigen(), i2.to_eigen());
}

TEST(MatrixMarket, RoundTripSparseExact)
{
    std::mt19937_64 gen(3);
    const auto a = MatrixStore::from_triplets(5, 4, {{0, 1, 0.1}, {2, 3, -1.0 / 3.0}, {4, 0, 1e-300}, {3, 3, 12345.678}});
    const fs::path p = temp_file("sp.mtx");
    mm_write(a, p);
    const auto back = mm_read(p);
    ASSERT_EQ(back.layout(), Layout::csr);
    EXPECT_EQ(back.to_eigen(), a.to_eigen());
    const auto d = MatrixStore::from_eigen(testutil::gaussian(3, 3, gen));
    mm_write(d, p);
    EXPECT_EQ(mm_read(p).to_eigen(), d.to_eigen());
}

TEST(MatrixMarket, SingleCoordinateEntry)
{
    const fs::path p = temp_file("one.mtx");
    write_text(p, "%%MatrixMarket matrix coordinate real general\n% comment\n3 2 1\n3 2 5\n");
    const auto a = mm_read(p);
    EXPECT_EQ(a.layout(), Layout::csr);
    EXPECT_EQ(a.nnz(), 1u);
    EXPECT_EQ(a(2, 1), 5.0);
}

TEST(MatrixMarket, DuplicateEntryReportsLine)
{
    const fs::path p = temp_file("dup.mtx");
    write_text(p, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n");
    EXPECT_THROW(mm_read(p), ParseError);
    EXPECT_EQ(parse_error_line(p), 4u);
}

TEST(MatrixMarket, MalformedHeader)
{
    const fs::path p = temp_file("bad.mtx");
    write_text(p, "%%NotMatrixMarket\n1 1 1\n1 1 1\n");
    EXPECT_EQ(parse_error_line(p), 1u);
}

TEST(MatrixMarket, OutOfBounds)
{
    const fs::path p = temp_file("oob.mtx");
    write_text(p, "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
    EXPECT_EQ(parse_error_line(p), 3u);
}

TEST(MatrixMarket, WrongEntryCount)
{
    const fs::path p = temp_file("count.mtx");
    write_text(p, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n");
    EXPECT_THROW(mm_read(p), ParseError);
}
