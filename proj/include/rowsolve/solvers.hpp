#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rowsolve/kernels.hpp"
#include "rowsolve/matrix.hpp"
#include "rowsolve/partition.hpp"
#include "rowsolve/trace.hpp"

namespace rowsolve {

enum class Method { rmr, rmr_homogeneous, ermr, cyclic_extended, rek, gek, reabk };
enum class ExecMode { automatic, cached, matvec };

std::string to_string(Method m);
Method parse_method(const std::string& name);
std::string to_string(ExecMode m);
ExecMode parse_exec_mode(const std::string& name);

/// Precomputed Gram matrices A^T A and A A^T for the recursive residual
/// updates, or nothing in matvec mode.
class BlockCache {
public:
    static BlockCache cached(const MatrixStore& a, bool with_ata = true, bool with_aat = true,
                             KernelPolicy policy = KernelPolicy::parallel);
    static BlockCache matvec() { return BlockCache(); }

    bool is_cached() const noexcept { return cached_; }
    bool has_ata() const noexcept { return ata_.dim() > 0; }
    bool has_aat() const noexcept { return aat_.dim() > 0; }
    const GramMatrix& ata() const { return ata_; }  // n x n
    const GramMatrix& aat() const { return aat_; }  // m x m

private:
    bool cached_ = false;
    GramMatrix ata_;
    GramMatrix aat_;
};

/// Read-only view of the system being solved.
struct LinearSystem {
    const MatrixStore& a;
    std::span<const double> b;
    const BlockCache& cache;
    double frob_sq;

    LinearSystem(const MatrixStore& a_, std::span<const double> b_, const BlockCache& cache_);
};

/// Iterates and auxiliary residuals. For the multiple-row family,
/// r_hat == -A^T y and r_tilde == b - y - A x after every step.
struct SolverState {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> r_hat;
    std::vector<double> r_tilde;
    std::size_t k = 0;
    std::size_t skips = 0;
    std::size_t cyclic_row = 0;
    std::size_t cyclic_col = 0;
    RngStream rng;

    // step scratch, sized on first use
    std::vector<double> work_m;
    std::vector<double> work_n;
    std::vector<double> work_block;

    /// x0 = 0 and y0 = b unless given; residuals computed exactly.
    static SolverState initial(const LinearSystem& sys, RngStream rng, std::optional<std::vector<double>> x0 = {},
                               std::optional<std::vector<double>> y0 = {});

    /// Recomputes r_hat and r_tilde from x and y. Returns the drift of the
    /// stored values: max of ||r_hat + A^T y|| / (1 + ||A^T y||) and
    /// ||r_tilde - (b - y - A x)|| / (1 + ||b||).
    double refresh_residuals(const LinearSystem& sys);
};

// ---------------------------------------------------------------------------
// Half steps on explicit blocks. Each returns false when the denominator
// guard fires (state left unchanged, skip counted).

// block_norm_sq is ||A_block||_F^2 for the guard; negative means compute it.

/// y <- y - (zeta^T A^T y / ||A zeta||^2) A zeta with zeta = r_hat restricted
/// to cols. Also applies r_tilde -= (y_new - y_old).
bool y_block_update(SolverState& st, const LinearSystem& sys, std::span<const std::size_t> cols,
                    double block_norm_sq = -1.0);
/// x <- x + (eta^T r_tilde / ||A^T eta||^2) A^T eta with eta = r_tilde restricted to rows.
bool x_block_update(SolverState& st, const LinearSystem& sys, std::span<const std::size_t> rows,
                    double block_norm_sq = -1.0);

// ---------------------------------------------------------------------------
// Full steps (sample, then update). Partitions must carry weights.

void rmr_step(SolverState& st, const LinearSystem& sys, const Partition& rows);
void rmr_homogeneous_step(SolverState& st, const LinearSystem& sys, const Partition& cols);
/// consistent_mode pins y to 0 and skips the column draw, so the step is
/// bitwise the RMR step for the same stream.
void ermr_step(SolverState& st, const LinearSystem& sys, const Partition& rows, const Partition& cols,
               bool consistent_mode = false);

struct AdaptiveSteps {
    double alpha_hat = 0.0;    // ||zeta||^2 ||A_:,J||_F^2 / ||A zeta||^2
    double alpha_tilde = 0.0;  // ||eta||^2 ||A_I,:||_F^2 / ||A^T eta||^2
};

/// Averaged-block step sizes that reproduce the ERMR update for the given
/// blocks. alpha_hat uses the current y; alpha_tilde uses the y obtained
/// after the column half step, as the x half step does. Computed directly
/// from block products, independent of the cached Gram matrices.
AdaptiveSteps adaptive_step_sizes(const SolverState& st, const LinearSystem& sys, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols);

enum class IndexRule { cyclic, weighted };

struct RekOptions {
    IndexRule rule = IndexRule::weighted;
    /// false: x update uses y^(k) as in the cyclic extended scheme;
    /// true: y is updated first and x uses y^(k+1).
    bool x_uses_updated_y = false;
};

/// Single row / single column extended Kaczmarz step. For the weighted rule
/// `rows` and `cols` must be weighted tau = 1 partitions; the column index is
/// drawn before the row index.
void rek_step(SolverState& st, const LinearSystem& sys, const Partition& rows, const Partition& cols,
              const RekOptions& opts);
/// Applies the REK update for explicit indices.
void rek_update(SolverState& st, const LinearSystem& sys, std::size_t row, std::size_t col, bool x_uses_updated_y);

/// Gaussian sketch step; zeta ~ N(0, I_n) is drawn before eta ~ N(0, I_m).
void gek_step(SolverState& st, const LinearSystem& sys);

/// Averaged block step with constant step size alpha; the x half uses y^(k).
void reabk_step(SolverState& st, const LinearSystem& sys, const Partition& rows, const Partition& cols, double alpha);
void reabk_update(SolverState& st, const LinearSystem& sys, std::span<const std::size_t> rows, double row_norm_sq,
                  std::span<const std::size_t> cols, double col_norm_sq, double alpha);

// ---------------------------------------------------------------------------
// Driver

struct SolverConfig {
    Method method = Method::ermr;
    std::size_t tau_rows = 1;
    std::size_t tau_cols = 1;
    std::size_t max_iters = 100000;
    std::optional<double> rse_tol;
    std::optional<double> residual_tol;  // on ||A^T(b - Ax)|| / ||A^T b||, checked at recorded rows
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    ExecMode exec = ExecMode::automatic;
    std::optional<double> reabk_alpha;  // absent: 1.75 / max(beta_max_rows, beta_max_cols)
    bool consistent_mode = false;
    bool rek_updated_y = false;  // rek / cyclic_extended: x update uses y^(k+1)
    std::size_t trace_stride = 100;
    std::size_t recompute_every = 10000;
    bool record_residual = true;
    std::optional<std::vector<double>> x0;
    std::optional<std::vector<double>> y0;

    nlohmann::json to_json() const;
    void validate() const;
};

/// Execution mode picked for `automatic`: cached when m <= 4000.
ExecMode resolve_exec_mode(ExecMode requested, std::size_t rows);

/// Methods that maintain r_hat / r_tilde by recursion.
bool uses_recursions(Method m);

/// Per-configuration setup shared by many trials: weighted partitions, the
/// Gram cache and the REABK step size. Read-only once built, so trials may
/// run concurrently against one session.
class SolverSession {
public:
    SolverSession(SolverConfig config, const MatrixStore& a, std::vector<double> b);
    SolverSession(const SolverSession&) = delete;
    SolverSession& operator=(const SolverSession&) = delete;

    const SolverConfig& config() const noexcept { return config_; }
    const LinearSystem& system() const noexcept { return sys_; }
    const Partition& row_partition() const noexcept { return rows_; }
    const Partition& col_partition() const noexcept { return cols_; }
    ExecMode exec_mode() const noexcept { return exec_; }
    std::optional<double> reabk_alpha() const noexcept { return alpha_; }

    SolverState initial_state(std::uint64_t trial) const;
    void step(SolverState& st) const;

    /// Runs one trial to a stopping rule. x_star enables RSE tracking.
    RunTrace run(std::uint64_t trial, std::optional<std::span<const double>> x_star = {}) const;

private:
    SolverConfig config_;
    const MatrixStore& a_;
    std::vector<double> b_;
    ExecMode exec_;
    BlockCache cache_;
    LinearSystem sys_;
    Partition rows_;
    Partition cols_;
    std::optional<double> alpha_;
    double atb_norm_ = 0.0;
};

RunTrace run(const SolverConfig& config, const MatrixStore& a, std::span<const double> b,
             std::optional<std::span<const double>> x_star = {});

/// ||A^T (b - A x)||
double normal_residual(const MatrixStore& a, std::span<const double> b, std::span<const double> x);

}  // namespace rowsolve
