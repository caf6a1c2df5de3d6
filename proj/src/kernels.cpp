#include "rowsolve/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef ROWSOLVE_HAVE_OPENMP
#include <omp.h>
#endif

namespace rowsolve {

namespace {

// Rows handled per OpenMP chunk in the dense gemv. Each chunk sweeps all
// columns so every y[i] still accumulates in column order.
constexpr std::size_t kRowChunk = 256;

double sparse_dot(std::span<const std::size_t> ia, std::span<const double> va, std::span<const std::size_t> ib,
                  std::span<const double> vb)
{
    double s = 0.0;
    std::size_t p = 0, q = 0;
    while (p < ia.size() && q < ib.size()) {
        if (ia[p] < ib[q]) {
            ++p;
        } else if (ib[q] < ia[p]) {
            ++q;
        } else {
            s += va[p] * vb[q];
            ++p;
            ++q;
        }
    }
    return s;
}

// Row-major copy of a dense column-major matrix.
std::vector<double> transpose_dense(const MatrixStore& a)
{
    const std::size_t m = a.rows(), n = a.cols();
    const auto v = a.dense_values();
    std::vector<double> t(m * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) t[i * n + j] = v[j * m + i];
    return t;
}

// Entry (i, l) of the Gram matrix of "vectors" 0..count-1. Vectors are
// either contiguous dense rows of a buffer or sparse index/value slices.
struct VectorSet {
    const MatrixStore& a;
    bool by_column;  // true: columns of A (A^T A); false: rows of A (A A^T)
    std::vector<double> row_major;

    VectorSet(const MatrixStore& a_, bool by_column_) : a(a_), by_column(by_column_)
    {
        if (a.is_dense() && !by_column) row_major = transpose_dense(a);
    }

    std::size_t count() const { return by_column ? a.cols() : a.rows(); }

    double dot(std::size_t i, std::size_t l) const
    {
        if (a.is_dense()) {
            const std::size_t len = by_column ? a.rows() : a.cols();
            const double* x = by_column ? a.dense_values().data() + i * len : row_major.data() + i * len;
            const double* y = by_column ? a.dense_values().data() + l * len : row_major.data() + l * len;
            double s = 0.0;
            for (std::size_t k = 0; k < len; ++k) s += x[k] * y[k];
            return s;
        }
        const auto ptr = by_column ? a.col_ptr() : a.row_ptr();
        const auto idx = by_column ? a.row_idx() : a.col_idx();
        const auto val = by_column ? a.csc_values() : a.csr_values();
        auto slice_i = idx.subspan(ptr[i], ptr[i + 1] - ptr[i]);
        auto slice_l = idx.subspan(ptr[l], ptr[l + 1] - ptr[l]);
        return sparse_dot(slice_i, val.subspan(ptr[i], slice_i.size()), slice_l, val.subspan(ptr[l], slice_l.size()));
    }
};

GramMatrix gram_serial(const VectorSet& vs)
{
    const std::size_t d = vs.count();
    GramMatrix g(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t l = i; l < d; ++l) {
            const double s = vs.dot(i, l);
            g(i, l) = s;
            g(l, i) = s;
        }
    }
    return g;
}

GramMatrix gram_parallel(const VectorSet& vs)
{
    const auto d = static_cast<long long>(vs.count());
    GramMatrix g(vs.count());
#pragma omp parallel for schedule(dynamic, 8)
    for (long long ii = 0; ii < d; ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        for (std::size_t l = i; l < vs.count(); ++l) {
            const double s = vs.dot(i, l);
            g(i, l) = s;
            g(l, i) = s;
        }
    }
    return g;
}

}  // namespace

namespace kernels {

namespace serial {

void gemv(const MatrixStore& a, std::span<const double> x, std::span<double> y)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (a.is_dense()) {
        const double* v = a.dense_values().data();
        std::fill(y.begin(), y.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = x[j];
            const double* col = v + j * m;
            for (std::size_t i = 0; i < m; ++i) y[i] += col[i] * xj;
        }
        return;
    }
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto val = a.csr_values();
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) s += val[p] * x[ci[p]];
        y[i] = s;
    }
}

void gemv_t(const MatrixStore& a, std::span<const double> y, std::span<double> x)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (a.is_dense()) {
        const double* v = a.dense_values().data();
        for (std::size_t j = 0; j < n; ++j) {
            const double* col = v + j * m;
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += col[i] * y[i];
            x[j] = s;
        }
        return;
    }
    // Scatter over rows in ascending order.
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto val = a.csr_values();
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double yi = y[i];
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) x[ci[p]] += val[p] * yi;
    }
}

GramMatrix gram_cols(const MatrixStore& a) { return gram_serial(VectorSet(a, true)); }
GramMatrix gram_rows(const MatrixStore& a) { return gram_serial(VectorSet(a, false)); }

}  // namespace serial

namespace parallel {

void gemv(const MatrixStore& a, std::span<const double> x, std::span<double> y)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (a.is_dense()) {
        const double* v = a.dense_values().data();
        const auto chunks = static_cast<long long>((m + kRowChunk - 1) / kRowChunk);
#pragma omp parallel for schedule(static)
        for (long long c = 0; c < chunks; ++c) {
            const std::size_t lo = static_cast<std::size_t>(c) * kRowChunk;
            const std::size_t hi = std::min(m, lo + kRowChunk);
            for (std::size_t i = lo; i < hi; ++i) y[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double xj = x[j];
                const double* col = v + j * m;
                for (std::size_t i = lo; i < hi; ++i) y[i] += col[i] * xj;
            }
        }
        return;
    }
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto val = a.csr_values();
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        double s = 0.0;
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) s += val[p] * x[ci[p]];
        y[i] = s;
    }
}

void gemv_t(const MatrixStore& a, std::span<const double> y, std::span<double> x)
{
    const std::size_t m = a.rows(), n = a.cols();
    if (a.is_dense()) {
        const double* v = a.dense_values().data();
#pragma omp parallel for schedule(static)
        for (long long jj = 0; jj < static_cast<long long>(n); ++jj) {
            const auto j = static_cast<std::size_t>(jj);
            const double* col = v + j * m;
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += col[i] * y[i];
            x[j] = s;
        }
        return;
    }
    // Gather through the CSC copy: rows ascending, same order as the scatter.
    const auto cp = a.col_ptr();
    const auto ri = a.row_idx();
    const auto val = a.csc_values();
#pragma omp parallel for schedule(static)
    for (long long jj = 0; jj < static_cast<long long>(n); ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        double s = 0.0;
        for (std::size_t p = cp[j]; p < cp[j + 1]; ++p) s += val[p] * y[ri[p]];
        x[j] = s;
    }
}

GramMatrix gram_cols(const MatrixStore& a) { return gram_parallel(VectorSet(a, true)); }
GramMatrix gram_rows(const MatrixStore& a) { return gram_parallel(VectorSet(a, false)); }

}  // namespace parallel

void gemv(const MatrixStore& a, std::span<const double> x, std::span<double> y, KernelPolicy policy)
{
    policy == KernelPolicy::parallel ? parallel::gemv(a, x, y) : serial::gemv(a, x, y);
}

void gemv_t(const MatrixStore& a, std::span<const double> y, std::span<double> x, KernelPolicy policy)
{
    policy == KernelPolicy::parallel ? parallel::gemv_t(a, y, x) : serial::gemv_t(a, y, x);
}

GramMatrix gram_cols(const MatrixStore& a, KernelPolicy policy)
{
    return policy == KernelPolicy::parallel ? parallel::gram_cols(a) : serial::gram_cols(a);
}

GramMatrix gram_rows(const MatrixStore& a, KernelPolicy policy)
{
    return policy == KernelPolicy::parallel ? parallel::gram_rows(a) : serial::gram_rows(a);
}

int max_threads()
{
#ifdef ROWSOLVE_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

bool have_openmp()
{
#ifdef ROWSOLVE_HAVE_OPENMP
    return true;
#else
    return false;
#endif
}

}  // namespace kernels

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm_sq(std::span<const double> a) { return dot(a, a); }

double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace rowsolve
