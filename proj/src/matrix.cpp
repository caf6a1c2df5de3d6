#include "rowsolve/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "rowsolve/errors.hpp"
#include "rowsolve/kernels.hpp"

namespace rowsolve {

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw UsageError(what);
}

}  // namespace

MatrixStore MatrixStore::dense(std::size_t rows, std::size_t cols, std::vector<double> col_major)
{
    require(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
    require(col_major.size() == rows * cols, "dense value count does not match dimensions");
    MatrixStore m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.layout_ = Layout::dense;
    m.values_ = std::move(col_major);
    return m;
}

MatrixStore MatrixStore::dense_from_rows(std::initializer_list<std::initializer_list<double>> rows)
{
    const std::size_t m = rows.size();
    require(m >= 1, "matrix needs at least one row");
    const std::size_t n = rows.begin()->size();
    std::vector<double> v(m * n);
    std::size_t i = 0;
    for (const auto& row : rows) {
        require(row.size() == n, "ragged row list");
        std::size_t j = 0;
        for (double x : row) v[j++ * m + i] = x;
        ++i;
    }
    return dense(m, n, std::move(v));
}

MatrixStore MatrixStore::from_eigen(const Eigen::MatrixXd& e)
{
    std::vector<double> v(e.data(), e.data() + e.size());
    return dense(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()), std::move(v));
}

MatrixStore MatrixStore::csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                             std::vector<std::size_t> col_idx, std::vector<double> values)
{
    require(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
    require(row_ptr.size() == rows + 1, "row pointer array must have rows+1 entries");
    require(row_ptr.front() == 0, "row pointers must start at 0");
    require(col_idx.size() == values.size(), "column index and value arrays differ in length");
    require(row_ptr.back() == values.size(), "last row pointer must equal nnz");
    for (std::size_t i = 0; i < rows; ++i) {
        require(row_ptr[i] <= row_ptr[i + 1], "row pointers must be nondecreasing");
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            require(col_idx[p] < cols, "column index out of range");
            require(p == row_ptr[i] || col_idx[p - 1] < col_idx[p],
                    "column indices must be strictly increasing within a row");
        }
    }
    MatrixStore m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.layout_ = Layout::csr;
    m.row_ptr_ = std::move(row_ptr);
    m.col_idx_ = std::move(col_idx);
    m.values_ = std::move(values);
    m.build_csc();
    return m;
}

MatrixStore MatrixStore::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
{
    require(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& t = entries[k];
        require(t.row < rows && t.col < cols, "triplet index out of range");
        if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col)
            throw UsageError("duplicate triplet entry");
        ++row_ptr[t.row + 1];
        col_idx.push_back(t.col);
        values.push_back(t.value);
    }
    for (std::size_t i = 0; i < rows; ++i) row_ptr[i + 1] += row_ptr[i];
    return csr(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

void MatrixStore::build_csc()
{
    col_ptr_.assign(cols_ + 1, 0);
    for (std::size_t c : col_idx_) ++col_ptr_[c + 1];
    for (std::size_t j = 0; j < cols_; ++j) col_ptr_[j + 1] += col_ptr_[j];
    row_idx_.resize(col_idx_.size());
    csc_values_.resize(col_idx_.size());
    std::vector<std::size_t> next(col_ptr_.begin(), col_ptr_.end() - 1);
    // Rows are visited in ascending order, so each CSC column is sorted.
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
            const std::size_t q = next[col_idx_[p]]++;
            row_idx_[q] = i;
            csc_values_[q] = values_[p];
        }
    }
}

std::size_t MatrixStore::nnz() const
{
    if (layout_ == Layout::csr) return values_.size();
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
}

double MatrixStore::operator()(std::size_t i, std::size_t j) const
{
    if (layout_ == Layout::dense) return values_[j * rows_ + i];
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

MatrixStore MatrixStore::to_dense() const
{
    if (layout_ == Layout::dense) return *this;
    std::vector<double> v(rows_ * cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) v[col_idx_[p] * rows_ + i] = values_[p];
    return dense(rows_, cols_, std::move(v));
}

MatrixStore MatrixStore::to_csr() const
{
    if (layout_ == Layout::csr) return *this;
    std::vector<std::size_t> row_ptr(rows_ + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double v = values_[j * rows_ + i];
            if (v != 0.0) {
                col_idx.push_back(j);
                values.push_back(v);
            }
        }
        row_ptr[i + 1] = values.size();
    }
    return csr(rows_, cols_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

Eigen::MatrixXd MatrixStore::to_eigen() const
{
    const auto d = to_dense();
    return Eigen::Map<const Eigen::MatrixXd>(d.values_.data(), static_cast<Eigen::Index>(rows_),
                                             static_cast<Eigen::Index>(cols_));
}

void MatrixStore::row_block_times(std::span<const std::size_t> rows, std::span<const double> x,
                                  std::span<double> out) const
{
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        double s = 0.0;
        if (layout_ == Layout::dense) {
            for (std::size_t j = 0; j < cols_; ++j) s += values_[j * rows_ + i] * x[j];
        } else {
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
        }
        out[k] = s;
    }
}

void MatrixStore::row_block_transpose_times(std::span<const std::size_t> rows, std::span<const double> r,
                                            std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    if (layout_ == Layout::dense) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double* col = values_.data() + j * rows_;
            double s = 0.0;
            for (std::size_t k = 0; k < rows.size(); ++k) s += col[rows[k]] * r[k];
            out[j] = s;
        }
    } else {
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const std::size_t i = rows[k];
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) out[col_idx_[p]] += values_[p] * r[k];
        }
    }
}

void MatrixStore::col_block_times(std::span<const std::size_t> cols, std::span<const double> z,
                                  std::span<double> out) const
{
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const std::size_t j = cols[k];
        const double zk = z[k];
        if (layout_ == Layout::dense) {
            const double* col = values_.data() + j * rows_;
            for (std::size_t i = 0; i < rows_; ++i) out[i] += col[i] * zk;
        } else {
            for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) out[row_idx_[p]] += csc_values_[p] * zk;
        }
    }
}

void MatrixStore::col_block_transpose_times(std::span<const std::size_t> cols, std::span<const double> y,
                                            std::span<double> out) const
{
    for (std::size_t k = 0; k < cols.size(); ++k) {
        const std::size_t j = cols[k];
        double s = 0.0;
        if (layout_ == Layout::dense) {
            const double* col = values_.data() + j * rows_;
            for (std::size_t i = 0; i < rows_; ++i) s += col[i] * y[i];
        } else {
            for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) s += csc_values_[p] * y[row_idx_[p]];
        }
        out[k] = s;
    }
}

double MatrixStore::block_frobenius_sq(Axis axis, std::span<const std::size_t> idx) const
{
    double s = 0.0;
    for (std::size_t k : idx) {
        if (axis == Axis::rows) {
            if (layout_ == Layout::dense) {
                for (std::size_t j = 0; j < cols_; ++j) s += values_[j * rows_ + k] * values_[j * rows_ + k];
            } else {
                for (std::size_t p = row_ptr_[k]; p < row_ptr_[k + 1]; ++p) s += values_[p] * values_[p];
            }
        } else {
            if (layout_ == Layout::dense) {
                for (std::size_t i = 0; i < rows_; ++i) s += values_[k * rows_ + i] * values_[k * rows_ + i];
            } else {
                for (std::size_t p = col_ptr_[k]; p < col_ptr_[k + 1]; ++p) s += csc_values_[p] * csc_values_[p];
            }
        }
    }
    return s;
}

Eigen::MatrixXd MatrixStore::block(Axis axis, std::span<const std::size_t> idx) const
{
    const auto count = static_cast<Eigen::Index>(idx.size());
    if (axis == Axis::rows) {
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(count, static_cast<Eigen::Index>(cols_));
        for (Eigen::Index k = 0; k < count; ++k) {
            const std::size_t i = idx[static_cast<std::size_t>(k)];
            if (layout_ == Layout::dense) {
                for (std::size_t j = 0; j < cols_; ++j) b(k, static_cast<Eigen::Index>(j)) = values_[j * rows_ + i];
            } else {
                for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
                    b(k, static_cast<Eigen::Index>(col_idx_[p])) = values_[p];
            }
        }
        return b;
    }
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_), count);
    for (Eigen::Index k = 0; k < count; ++k) {
        const std::size_t j = idx[static_cast<std::size_t>(k)];
        if (layout_ == Layout::dense) {
            for (std::size_t i = 0; i < rows_; ++i) b(static_cast<Eigen::Index>(i), k) = values_[j * rows_ + i];
        } else {
            for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p)
                b(static_cast<Eigen::Index>(row_idx_[p]), k) = csc_values_[p];
        }
    }
    return b;
}

double frobenius_norm_sq(const MatrixStore& m)
{
    const auto v = m.is_dense() ? m.dense_values() : m.csr_values();
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

std::vector<double> matvec(const MatrixStore& m, std::span<const double> v, bool transposed)
{
    const std::size_t in = transposed ? m.rows() : m.cols();
    const std::size_t out = transposed ? m.cols() : m.rows();
    if (v.size() != in)
        throw UsageError("matvec: vector length " + std::to_string(v.size()) + " does not match " +
                         std::to_string(in));
    std::vector<double> r(out);
    if (transposed)
        kernels::gemv_t(m, v, r);
    else
        kernels::gemv(m, v, r);
    return r;
}

SvdFactor thin_svd(const MatrixStore& m, double rank_tol)
{
    const Eigen::MatrixXd a = m.to_eigen();
    if (!a.allFinite()) throw DataError("thin_svd: matrix has nonfinite entries");
    if (rank_tol < 0.0)
        rank_tol = static_cast<double>(std::max(m.rows(), m.cols())) * std::numeric_limits<double>::epsilon();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    SvdFactor f;
    const double cut = s.size() > 0 ? rank_tol * s(0) : 0.0;
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cut && s(r) > 0.0) ++r;
    f.rank = static_cast<std::size_t>(r);
    f.sigma = s.head(r);
    f.U = svd.matrixU().leftCols(r);
    f.V = svd.matrixV().leftCols(r);
    return f;
}

// ---------------------------------------------------------------------------
// Matrix Market

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno)
{
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        return true;
    }
    return false;
}

template <class T>
std::vector<T> parse_fields(const std::string& line, std::size_t count, std::size_t lineno)
{
    std::istringstream ss(line);
    std::vector<T> out(count);
    for (auto& v : out)
        if (!(ss >> v)) throw ParseError("expected " + std::to_string(count) + " fields", lineno);
    std::string extra;
    if (ss >> extra) throw ParseError("unexpected trailing field '" + extra + "'", lineno);
    return out;
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

MatrixStore mm_read(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open matrix file " + path.string());

    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty file", 1);
    ++lineno;
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lower(object) != "matrix")
        throw ParseError("missing %%MatrixMarket matrix header", lineno);
    format = lower(format);
    field = lower(field);
    if (format != "coordinate" && format != "array") throw ParseError("unknown format '" + format + "'", lineno);
    if (field != "real" && field != "integer" && field != "double")
        throw ParseError("unsupported field '" + field + "'", lineno);
    if (lower(symmetry) != "general") throw ParseError("only general symmetry is supported", lineno);

    if (!next_content_line(in, line, lineno)) throw ParseError("missing size line", lineno + 1);

    if (format == "array") {
        const auto dims = parse_fields<long long>(line, 2, lineno);
        if (dims[0] < 1 || dims[1] < 1) throw ParseError("dimensions must be positive", lineno);
        const auto m = static_cast<std::size_t>(dims[0]);
        const auto n = static_cast<std::size_t>(dims[1]);
        std::vector<double> v;
        v.reserve(m * n);
        while (v.size() < m * n && next_content_line(in, line, lineno)) v.push_back(parse_fields<double>(line, 1, lineno)[0]);
        if (v.size() != m * n) throw ParseError("expected " + std::to_string(m * n) + " array entries", lineno);
        if (next_content_line(in, line, lineno)) throw ParseError("extra data after array entries", lineno);
        return MatrixStore::dense(m, n, std::move(v));
    }

    const auto dims = parse_fields<long long>(line, 3, lineno);
    if (dims[0] < 1 || dims[1] < 1 || dims[2] < 0) throw ParseError("invalid size line", lineno);
    const auto m = static_cast<std::size_t>(dims[0]);
    const auto n = static_cast<std::size_t>(dims[1]);
    const auto nnz = static_cast<std::size_t>(dims[2]);
    std::vector<Triplet> entries;
    entries.reserve(nnz);
    std::vector<std::size_t> entry_line;
    entry_line.reserve(nnz);
    while (entries.size() < nnz && next_content_line(in, line, lineno)) {
        std::istringstream ss(line);
        long long i = 0, j = 0;
        double v = 0.0;
        if (!(ss >> i >> j >> v)) throw ParseError("expected 'row col value'", lineno);
        std::string extra;
        if (ss >> extra) throw ParseError("unexpected trailing field '" + extra + "'", lineno);
        if (i < 1 || j < 1 || static_cast<std::size_t>(i) > m || static_cast<std::size_t>(j) > n)
            throw ParseError("index (" + std::to_string(i) + "," + std::to_string(j) + ") out of bounds", lineno);
        entries.push_back({static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1), v});
        entry_line.push_back(lineno);
    }
    if (entries.size() != nnz) throw ParseError("expected " + std::to_string(nnz) + " entries", lineno);
    if (next_content_line(in, line, lineno)) throw ParseError("extra data after coordinate entries", lineno);

    std::vector<std::size_t> order(entries.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = entries[a];
        const auto& y = entries[b];
        return x.row != y.row ? x.row < y.row : (x.col != y.col ? x.col < y.col : a < b);
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& x = entries[order[k - 1]];
        const auto& y = entries[order[k]];
        if (x.row == y.row && x.col == y.col)
            throw ParseError("duplicate entry (" + std::to_string(y.row + 1) + "," + std::to_string(y.col + 1) + ")",
                             entry_line[order[k]]);
    }
    return MatrixStore::from_triplets(m, n, std::move(entries));
}

void mm_write(const MatrixStore& m, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write matrix file " + path.string());
    if (m.is_dense()) {
        out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
        for (double v : m.dense_values()) out << format_double(v) << '\n';
    } else {
        out << "%%MatrixMarket matrix coordinate real general\n"
            << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
        const auto rp = m.row_ptr();
        const auto ci = m.col_idx();
        const auto v = m.csr_values();
        for (std::size_t i = 0; i < m.rows(); ++i)
            for (std::size_t p = rp[i]; p < rp[i + 1]; ++p)
                out << i + 1 << ' ' << ci[p] + 1 << ' ' << format_double(v[p]) << '\n';
    }
    if (!out) throw UsageError("failed writing matrix file " + path.string());
}

}  // namespace rowsolve
