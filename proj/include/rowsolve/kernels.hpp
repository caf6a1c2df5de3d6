#pragma once

// Whole-matrix kernels. Each kernel exists twice: a serial reference and an
// OpenMP version that partitions the *outputs* across threads. Both sum every
// output entry in the same left-to-right order, so their results are
// bitwise identical; tests/test_kernels.cpp holds them to that.

#include <cstddef>
#include <span>
#include <vector>

#include "rowsolve/matrix.hpp"

namespace rowsolve {

/// Dense symmetric matrix (Gram matrix). Stored row-major; by symmetry row k
/// is also column k, so column slices are contiguous.
class GramMatrix {
public:
    GramMatrix() = default;
    explicit GramMatrix(std::size_t dim) : dim_(dim), values_(dim * dim, 0.0) {}

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values_[i * dim_ + j]; }
    std::span<const double> column(std::size_t j) const { return {values_.data() + j * dim_, dim_}; }
    std::span<const double> values() const { return values_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

enum class KernelPolicy { serial, parallel };

namespace kernels {

namespace serial {
void gemv(const MatrixStore& a, std::span<const double> x, std::span<double> y);
void gemv_t(const MatrixStore& a, std::span<const double> y, std::span<double> x);
GramMatrix gram_cols(const MatrixStore& a);  // A^T A
GramMatrix gram_rows(const MatrixStore& a);  // A A^T
}  // namespace serial

namespace parallel {
void gemv(const MatrixStore& a, std::span<const double> x, std::span<double> y);
void gemv_t(const MatrixStore& a, std::span<const double> y, std::span<double> x);
GramMatrix gram_cols(const MatrixStore& a);
GramMatrix gram_rows(const MatrixStore& a);
}  // namespace parallel

void gemv(const MatrixStore& a, std::span<const double> x, std::span<double> y,
          KernelPolicy policy = KernelPolicy::parallel);
void gemv_t(const MatrixStore& a, std::span<const double> y, std::span<double> x,
            KernelPolicy policy = KernelPolicy::parallel);
GramMatrix gram_cols(const MatrixStore& a, KernelPolicy policy = KernelPolicy::parallel);
GramMatrix gram_rows(const MatrixStore& a, KernelPolicy policy = KernelPolicy::parallel);

/// Number of OpenMP threads the parallel kernels may use (1 without OpenMP).
int max_threads();
bool have_openmp();

}  // namespace kernels

// Small dense vector helpers with fixed summation order.
double dot(std::span<const double> a, std::span<const double> b);
double norm_sq(std::span<const double> a);
double norm(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace rowsolve
