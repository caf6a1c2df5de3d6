#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rowsolve {

enum class Layout { dense, csr };
enum class Axis { rows, cols };

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Immutable real matrix, stored either dense (column-major) or sparse.
///
/// Indices are 0-based in memory; Matrix Market files on disk are 1-based
/// and converted on read/write. A sparse matrix keeps both its CSR arrays
/// and a CSC copy so that row blocks and column blocks are both cheap to
/// traverse and the transposed product can be evaluated as a gather.
class MatrixStore {
public:
    MatrixStore() = default;

    static MatrixStore dense(std::size_t rows, std::size_t cols, std::vector<double> col_major);
    static MatrixStore dense_from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static MatrixStore from_eigen(const Eigen::MatrixXd& m);

    /// Validates monotone row pointers and strictly increasing column
    /// indices inside each row.
    static MatrixStore csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, std::vector<double> values);

    /// Builds CSR from unordered triplets. Duplicate coordinates are rejected.
    static MatrixStore from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    Layout layout() const noexcept { return layout_; }
    bool is_dense() const noexcept { return layout_ == Layout::dense; }
    std::size_t nnz() const;

    double operator()(std::size_t i, std::size_t j) const;

    MatrixStore to_dense() const;
    MatrixStore to_csr() const;
    Eigen::MatrixXd to_eigen() const;

    // Dense storage (column-major, rows*cols).
    std::span<const double> dense_values() const { return values_; }

    // CSR arrays.
    std::span<const std::size_t> row_ptr() const { return row_ptr_; }
    std::span<const std::size_t> col_idx() const { return col_idx_; }
    std::span<const double> csr_values() const { return values_; }

    // CSC arrays (sparse layout only).
    std::span<const std::size_t> col_ptr() const { return col_ptr_; }
    std::span<const std::size_t> row_idx() const { return row_idx_; }
    std::span<const double> csc_values() const { return csc_values_; }

    // Block kernels used by the row-action steps. Every output entry is a
    // left-to-right sum over the block (or over the row/column) so dense and
    // sparse storage produce the same bits.

    /// out = A(rows, :) * x, out.size() == rows.size()
    void row_block_times(std::span<const std::size_t> rows, std::span<const double> x,
                         std::span<double> out) const;
    /// out = A(rows, :)^T * r, out.size() == cols()
    void row_block_transpose_times(std::span<const std::size_t> rows, std::span<const double> r,
                                   std::span<double> out) const;
    /// out = A(:, cols) * z, out.size() == rows()
    void col_block_times(std::span<const std::size_t> cols, std::span<const double> z,
                         std::span<double> out) const;
    /// out = A(:, cols)^T * y, out.size() == cols.size()
    void col_block_transpose_times(std::span<const std::size_t> cols, std::span<const double> y,
                                   std::span<double> out) const;

    double block_frobenius_sq(Axis axis, std::span<const std::size_t> idx) const;
    Eigen::MatrixXd block(Axis axis, std::span<const std::size_t> idx) const;

private:
    void build_csc();

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Layout layout_ = Layout::dense;
    std::vector<double> values_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<std::size_t> col_ptr_;
    std::vector<std::size_t> row_idx_;
    std::vector<double> csc_values_;
};

struct SvdFactor {
    Eigen::MatrixXd U;      // m x r
    Eigen::VectorXd sigma;  // descending, all > cut
    Eigen::MatrixXd V;      // n x r
    std::size_t rank = 0;

    double sigma_max() const { return rank ? sigma(0) : 0.0; }
    double sigma_min() const { return rank ? sigma(static_cast<Eigen::Index>(rank) - 1) : 0.0; }
};

double frobenius_norm_sq(const MatrixStore& m);

/// Mv, or M^T v when transposed. Runs the OpenMP kernel when available.
std::vector<double> matvec(const MatrixStore& m, std::span<const double> v, bool transposed = false);

/// Thin SVD with numerical-rank truncation. rank_tol is relative to sigma_1;
/// a negative value selects the default max(m, n) * machine epsilon.
SvdFactor thin_svd(const MatrixStore& m, double rank_tol = -1.0);

MatrixStore mm_read(const std::filesystem::path& path);
void mm_write(const MatrixStore& m, const std::filesystem::path& path);

}  // namespace rowsolve
