#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rowsolve/matrix.hpp"
#include "rowsolve/partition.hpp"

namespace rowsolve::theory {

/// Contraction constants of the multiple-row iterations for a fixed matrix
/// and pair of partitions.
struct RateReport {
    double rho1 = 0.0;            // x-iteration rate (row blocks)
    double rho2 = 0.0;            // y-iteration rate (column blocks)
    double beta_max_rows = 0.0;   // max_i sigma_max^2(A_Ii) / ||A_Ii||_F^2
    double beta_max_cols = 0.0;   // max_j sigma_max^2(A_Jj) / ||A_Jj||_F^2
    double beta_min_rows = 0.0;   // min_i sigma_min^2(A_Ii) / ||A_Ii||_F^2 (nonzero sigma)
    double sigma_min_sq = 0.0;    // smallest nonzero singular value of A, squared
    double frob_sq = 0.0;
    std::size_t s = 0;            // row block count
    std::size_t t = 0;            // column block count
    bool degenerate = false;      // rho1 == rho2 within 1e-12 relative

    double rho() const { return rho1 > rho2 ? rho1 : rho2; }
    nlohmann::json to_json() const;
};

/// Squared largest singular value of a block: dense SVD when the smaller
/// dimension is <= 64, power iteration (tol 1e-10, cap 1e4) otherwise.
double block_sigma_max_sq(const Eigen::MatrixXd& block);
/// Squared smallest singular value above the numerical-rank cut (0 for a zero block).
double block_sigma_min_sq(const Eigen::MatrixXd& block);

/// max over blocks of sigma_max^2 / ||block||_F^2 (blocks with zero norm skipped).
double beta_max(const MatrixStore& a, const Partition& p, Axis axis);

RateReport convergence_rates(const MatrixStore& a, const Partition& rows, const Partition& cols);

/// omega = ||x0 - x*||^2 + s / |rho1 - rho2| * ||y0 - b_N||^2 / (||A||_F^2 beta_min).
/// Throws UnsupportedCase when the report is degenerate.
double omega_constant(const RateReport& report, double x0_err_sq, double y0_err_sq, std::size_t s,
                      double frob_sq);

/// ceil((1 - rho)^-1 ln(omega / (eps (1 - beta)))), floored at 0.
long long iteration_bound(double rho, double omega, double epsilon, double beta);

/// x* = A^+ b through the thin SVD.
std::vector<double> min_norm_lsq(const MatrixStore& a, std::span<const double> b);
std::vector<double> min_norm_lsq(const SvdFactor& svd, std::span<const double> b);

struct RangeNullSplit {
    std::vector<double> range;  // b_R = A A^+ b
    std::vector<double> null;   // b_N = b - b_R
};

RangeNullSplit range_null_split(const MatrixStore& a, std::span<const double> b);
RangeNullSplit range_null_split(const SvdFactor& svd, std::span<const double> b);

struct LemmaReport {
    std::size_t trials = 0;
    std::size_t lower_violations = 0;   // ||A^T u|| >= sigma_min ||u||, u in R(A)
    std::size_t upper_violations = 0;   // ||A A^T u|| <= sigma_max ||A^T u||
    double worst_lower_margin = 0.0;    // min of (lhs - rhs) / scale
    double worst_upper_margin = 0.0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;

    bool passed() const { return lower_violations == 0 && upper_violations == 0; }
    nlohmann::json to_json() const;
};

/// Random spot checks of the two singular-value inequalities used in the
/// convergence proofs, with 1e-10 relative slack.
LemmaReport lemma_checks(const MatrixStore& a, std::size_t trials, RngStream& rng);

}  // namespace rowsolve::theory
