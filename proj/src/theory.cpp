#include "rowsolve/theory.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "rowsolve/errors.hpp"
#include "rowsolve/kernels.hpp"

namespace rowsolve::theory {

namespace {

constexpr Eigen::Index kDenseSvdLimit = 64;

Eigen::VectorXd to_eigen(std::span<const double> v)
{
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

nlohmann::json RateReport::to_json() const
{
    return {{"rho1", rho1},
            {"rho2", rho2},
            {"rho", rho()},
            {"beta_max_rows", beta_max_rows},
            {"beta_max_cols", beta_max_cols},
            {"beta_min_rows", beta_min_rows},
            {"sigma_min_sq", sigma_min_sq},
            {"frob_sq", frob_sq},
            {"s", s},
            {"t", t},
            {"degenerate", degenerate}};
}

double block_sigma_max_sq(const Eigen::MatrixXd& block)
{
    if (block.size() == 0) return 0.0;
    if (std::min(block.rows(), block.cols()) <= kDenseSvdLimit) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
        const double s = svd.singularValues()(0);
        return s * s;
    }
    // Power iteration on the smaller Gram matrix.
    const Eigen::MatrixXd g = block.rows() <= block.cols() ? Eigen::MatrixXd(block * block.transpose())
                                                           : Eigen::MatrixXd(block.transpose() * block);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(g.rows()) / std::sqrt(static_cast<double>(g.rows()));
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd w = g * v;
        const double nw = w.norm();
        if (nw == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / nw;
        if (std::abs(next - lambda) <= 1e-10 * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

double block_sigma_min_sq(const Eigen::MatrixXd& block)
{
    if (block.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0.0;
    const double cut = static_cast<double>(std::max(block.rows(), block.cols())) *
                       std::numeric_limits<double>::epsilon() * s(0);
    double smin = s(0);
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > cut) smin = s(k);
    return smin * smin;
}

double beta_max(const MatrixStore& a, const Partition& p, Axis axis)
{
    double best = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const Eigen::MatrixXd b = a.block(axis, p.block(k));
        const double f = b.squaredNorm();
        if (f == 0.0) continue;
        best = std::max(best, block_sigma_max_sq(b) / f);
    }
    return best;
}

RateReport convergence_rates(const MatrixStore& a, const Partition& rows, const Partition& cols)
{
    if (rows.universe_size() != a.rows() || cols.universe_size() != a.cols())
        throw UsageError("partitions do not match the matrix dimensions");
    RateReport r;
    r.frob_sq = frobenius_norm_sq(a);
    if (r.frob_sq == 0.0) throw DataError("convergence_rates: zero matrix");
    const SvdFactor svd = thin_svd(a);
    r.sigma_min_sq = svd.sigma_min() * svd.sigma_min();
    r.s = rows.size();
    r.t = cols.size();

    double beta_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Eigen::MatrixXd b = a.block(Axis::rows, rows.block(k));
        const double f = b.squaredNorm();
        if (f == 0.0) continue;
        r.beta_max_rows = std::max(r.beta_max_rows, block_sigma_max_sq(b) / f);
        beta_min = std::min(beta_min, block_sigma_min_sq(b) / f);
    }
    r.beta_min_rows = beta_min;
    r.beta_max_cols = beta_max(a, cols, Axis::cols);

    const double ratio = r.sigma_min_sq / r.frob_sq;
    r.rho1 = 1.0 - ratio / r.beta_max_rows;
    r.rho2 = 1.0 - ratio / r.beta_max_cols;
    // Rounding can push an exact 0 slightly negative.
    r.rho1 = std::max(0.0, r.rho1);
    r.rho2 = std::max(0.0, r.rho2);
    r.degenerate = std::abs(r.rho1 - r.rho2) <= 1e-12 * std::max(r.rho1, r.rho2);
    return r;
}

double omega_constant(const RateReport& report, double x0_err_sq, double y0_err_sq, std::size_t s,
                      double frob_sq)
{
    if (report.degenerate)
        throw UnsupportedCase("omega is undefined when rho1 == rho2 (degenerate rates)");
    if (x0_err_sq < 0.0 || y0_err_sq < 0.0 || frob_sq <= 0.0)
        throw UsageError("omega_constant: error norms must be nonnegative and ||A||_F^2 positive");
    if (y0_err_sq == 0.0) return x0_err_sq;
    return x0_err_sq + static_cast<double>(s) / std::abs(report.rho1 - report.rho2) * y0_err_sq /
                           (frob_sq * report.beta_min_rows);
}

long long iteration_bound(double rho, double omega, double epsilon, double beta)
{
    if (!(rho >= 0.0 && rho < 1.0)) throw UsageError("iteration_bound: rho must lie in [0, 1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw UsageError("iteration_bound: epsilon must lie in (0, 1)");
    if (!(beta > 0.0 && beta < 1.0)) throw UsageError("iteration_bound: beta must lie in (0, 1)");
    if (!(omega > 0.0)) throw UsageError("iteration_bound: omega must be positive");
    const double k = std::log(omega / (epsilon * (1.0 - beta))) / (1.0 - rho);
    if (k <= 0.0) return 0;
    // Guard ceil() against k landing a few ulps above an integer.
    const double nearest = std::round(k);
    if (std::abs(k - nearest) <= 1e-12 * std::max(1.0, k)) return static_cast<long long>(nearest);
    return static_cast<long long>(std::ceil(k));
}

std::vector<double> min_norm_lsq(const SvdFactor& svd, std::span<const double> b)
{
    if (svd.rank == 0) {
        std::clog << "warning: min_norm_lsq on a zero matrix, returning the zero solution\n";
        return std::vector<double>(static_cast<std::size_t>(svd.V.rows()), 0.0);
    }
    const Eigen::VectorXd c = (svd.U.transpose() * to_eigen(b)).cwiseQuotient(svd.sigma);
    return to_std(svd.V * c);
}

std::vector<double> min_norm_lsq(const MatrixStore& a, std::span<const double> b)
{
    if (b.size() != a.rows()) throw UsageError("min_norm_lsq: right-hand side length mismatch");
    SvdFactor svd = thin_svd(a);
    if (svd.rank == 0) svd.V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.cols()), 0);
    return min_norm_lsq(svd, b);
}

RangeNullSplit range_null_split(const SvdFactor& svd, std::span<const double> b)
{
    const Eigen::VectorXd be = to_eigen(b);
    Eigen::VectorXd br = Eigen::VectorXd::Zero(be.size());
    if (svd.rank > 0) br = svd.U * (svd.U.transpose() * be);
    RangeNullSplit out;
    out.range = to_std(br);
    out.null.resize(b.size());
    // b_N is formed as b - b_R so the two parts sum back to b exactly up to one rounding.
    for (std::size_t i = 0; i < b.size(); ++i) out.null[i] = b[i] - out.range[i];
    return out;
}

RangeNullSplit range_null_split(const MatrixStore& a, std::span<const double> b)
{
    if (b.size() != a.rows()) throw UsageError("range_null_split: right-hand side length mismatch");
    return range_null_split(thin_svd(a), b);
}

nlohmann::json LemmaReport::to_json() const
{
    return {{"trials", trials},
            {"lower_violations", lower_violations},
            {"upper_violations", upper_violations},
            {"worst_lower_margin", worst_lower_margin},
            {"worst_upper_margin", worst_upper_margin},
            {"sigma_min", sigma_min},
            {"sigma_max", sigma_max},
            {"passed", passed()}};
}

LemmaReport lemma_checks(const MatrixStore& a, std::size_t trials, RngStream& rng)
{
    constexpr double slack = 1e-10;
    const SvdFactor svd = thin_svd(a);
    LemmaReport rep;
    rep.trials = trials;
    rep.sigma_min = svd.sigma_min();
    rep.sigma_max = svd.sigma_max();
    rep.worst_lower_margin = std::numeric_limits<double>::infinity();
    rep.worst_upper_margin = std::numeric_limits<double>::infinity();
    if (svd.rank == 0) throw DataError("lemma_checks: zero matrix");

    std::vector<double> v(a.cols()), u(a.rows()), atu(a.cols()), aatu(a.rows());
    for (std::size_t t = 0; t < trials; ++t) {
        // u = A v lies in R(A).
        for (auto& x : v) x = rng.normal();
        kernels::gemv(a, v, u);
        kernels::gemv_t(a, u, atu);
        {
            const double lhs = norm(atu);
            const double rhs = rep.sigma_min * norm(u);
            const double scale = std::max(lhs, rhs);
            const double margin = scale > 0.0 ? (lhs - rhs) / scale : 0.0;
            rep.worst_lower_margin = std::min(rep.worst_lower_margin, margin);
            if (margin < -slack) ++rep.lower_violations;
        }
        // Arbitrary u.
        for (auto& x : u) x = rng.normal();
        kernels::gemv_t(a, u, atu);
        kernels::gemv(a, atu, aatu);
        {
            const double lhs = norm(aatu);
            const double rhs = rep.sigma_max * norm(atu);
            const double scale = std::max(lhs, rhs);
            const double margin = scale > 0.0 ? (rhs - lhs) / scale : 0.0;
            rep.worst_upper_margin = std::min(rep.worst_upper_margin, margin);
            if (margin < -slack) ++rep.upper_violations;
        }
    }
    return rep;
}

}  // namespace rowsolve::theory
