#include "rowsolve/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "rowsolve/errors.hpp"
#include "rowsolve/theory.hpp"

namespace rowsolve {

namespace {

constexpr double kGuardAbs = 1e-30;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// A step whose denominator is this small is a projection onto (numerically)
// nothing; skip it rather than divide.
bool guarded(double numer, double denom, double numer_scale)
{
    return numer == 0.0 || !(denom > std::max(kGuardAbs, kEps * numer_scale));
}

void ensure(std::vector<double>& v, std::size_t n)
{
    if (v.size() != n) v.assign(n, 0.0);
}

std::span<const std::size_t> one(const std::size_t& idx) { return {&idx, 1}; }

struct MethodName {
    Method m;
    const char* name;
};
constexpr MethodName kMethods[] = {
    {Method::rmr, "rmr"},         {Method::rmr_homogeneous, "rmr_homogeneous"},
    {Method::ermr, "ermr"},       {Method::cyclic_extended, "cyclic_extended"},
    {Method::rek, "rek"},         {Method::gek, "gek"},
    {Method::reabk, "reabk"},
};

}  // namespace

std::string to_string(Method m)
{
    for (const auto& e : kMethods)
        if (e.m == m) return e.name;
    return "unknown";
}

Method parse_method(const std::string& name)
{
    for (const auto& e : kMethods)
        if (name == e.name) return e.m;
    throw UsageError("unknown method '" + name + "'");
}

std::string to_string(ExecMode m)
{
    switch (m) {
    case ExecMode::automatic: return "auto";
    case ExecMode::cached: return "cached";
    case ExecMode::matvec: return "matvec";
    }
    return "unknown";
}

ExecMode parse_exec_mode(const std::string& name)
{
    if (name == "auto" || name == "automatic") return ExecMode::automatic;
    if (name == "cached") return ExecMode::cached;
    if (name == "matvec") return ExecMode::matvec;
    throw UsageError("unknown exec mode '" + name + "'");
}

ExecMode resolve_exec_mode(ExecMode requested, std::size_t rows)
{
    if (requested != ExecMode::automatic) return requested;
    return rows <= 4000 ? ExecMode::cached : ExecMode::matvec;
}

bool uses_recursions(Method m)
{
    return m == Method::rmr || m == Method::rmr_homogeneous || m == Method::ermr;
}

BlockCache BlockCache::cached(const MatrixStore& a, bool with_ata, bool with_aat, KernelPolicy policy)
{
    BlockCache c;
    c.cached_ = true;
    if (with_ata) c.ata_ = kernels::gram_cols(a, policy);
    if (with_aat) c.aat_ = kernels::gram_rows(a, policy);
    return c;
}

LinearSystem::LinearSystem(const MatrixStore& a_, std::span<const double> b_, const BlockCache& cache_)
    : a(a_), b(b_), cache(cache_), frob_sq(frobenius_norm_sq(a_))
{
    if (b.size() != a.rows()) throw UsageError("right-hand side length does not match matrix rows");
}

// ---------------------------------------------------------------------------

SolverState SolverState::initial(const LinearSystem& sys, RngStream rng, std::optional<std::vector<double>> x0,
                                 std::optional<std::vector<double>> y0)
{
    const std::size_t m = sys.a.rows(), n = sys.a.cols();
    SolverState st;
    st.rng = rng;
    st.x = x0 ? std::move(*x0) : std::vector<double>(n, 0.0);
    st.y = y0 ? std::move(*y0) : std::vector<double>(sys.b.begin(), sys.b.end());
    if (st.x.size() != n) throw UsageError("x0 length does not match matrix columns");
    if (st.y.size() != m) throw UsageError("y0 length does not match matrix rows");
    st.r_hat.assign(n, 0.0);
    st.r_tilde.assign(m, 0.0);
    st.refresh_residuals(sys);
    return st;
}

double SolverState::refresh_residuals(const LinearSystem& sys)
{
    const std::size_t m = sys.a.rows(), n = sys.a.cols();
    std::vector<double> aty(n), ax(m);
    kernels::gemv_t(sys.a, y, aty);
    kernels::gemv(sys.a, x, ax);

    double dh = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double exact = -aty[j];
        dh += (r_hat[j] - exact) * (r_hat[j] - exact);
        r_hat[j] = exact;
    }
    double dt = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double exact = sys.b[i] - y[i] - ax[i];
        dt += (r_tilde[i] - exact) * (r_tilde[i] - exact);
        r_tilde[i] = exact;
    }
    return std::max(std::sqrt(dh) / (1.0 + norm(aty)), std::sqrt(dt) / (1.0 + norm(sys.b)));
}

// ---------------------------------------------------------------------------
// Half steps

bool y_block_update(SolverState& st, const LinearSystem& sys, std::span<const std::size_t> cols,
                    double block_norm_sq)
{
    const std::size_t m = sys.a.rows(), n = sys.a.cols(), t = cols.size();
    if (block_norm_sq < 0.0) block_norm_sq = sys.a.block_frobenius_sq(Axis::cols, cols);

    ensure(st.work_block, t);
    std::span<double> z(st.work_block.data(), t);
    double g1 = 0.0;
    for (std::size_t q = 0; q < t; ++q) {
        z[q] = st.r_hat[cols[q]];
        g1 += z[q] * z[q];
    }

    ensure(st.work_m, m);
    ensure(st.work_n, n);
    std::span<double> w(st.work_m);
    const bool cached = sys.cache.is_cached();

    double g2 = 0.0;
    if (cached) {
        // v = Ahat(:, J) z, g2 = z^T Ahat(J, J) z
        std::span<double> v(st.work_n);
        std::fill(v.begin(), v.end(), 0.0);
        for (std::size_t q = 0; q < t; ++q) axpy(z[q], sys.cache.ata().column(cols[q]), v);
        for (std::size_t q = 0; q < t; ++q) g2 += z[q] * v[cols[q]];
    } else {
        sys.a.col_block_times(cols, z, w);
        g2 = norm_sq(w);
    }
    if (guarded(g1, g2, g1 * block_norm_sq)) {
        ++st.skips;
        return false;
    }
    const double g3 = g1 / g2;

    if (cached) {
        axpy(-g3, st.work_n, st.r_hat);
        sys.a.col_block_times(cols, z, w);
    } else {
        std::span<double> atw(st.work_n);
        kernels::gemv_t(sys.a, w, atw);
        axpy(-g3, atw, st.r_hat);
    }
    axpy(g3, w, st.y);
    axpy(-g3, w, st.r_tilde);
    return true;
}

bool x_block_update(SolverState& st, const LinearSystem& sys, std::span<const std::size_t> rows,
                    double block_norm_sq)
{
    const std::size_t m = sys.a.rows(), n = sys.a.cols(), t = rows.size();
    if (block_norm_sq < 0.0) block_norm_sq = sys.a.block_frobenius_sq(Axis::rows, rows);

    ensure(st.work_block, t);
    std::span<double> e(st.work_block.data(), t);
    double g4 = 0.0;
    for (std::size_t q = 0; q < t; ++q) {
        e[q] = st.r_tilde[rows[q]];
        g4 += e[q] * e[q];
    }

    ensure(st.work_m, m);
    ensure(st.work_n, n);
    std::span<double> u(st.work_n);
    const bool cached = sys.cache.is_cached();

    double g5 = 0.0;
    if (cached) {
        // v = Atilde(:, I) e, g5 = e^T Atilde(I, I) e
        std::span<double> v(st.work_m);
        std::fill(v.begin(), v.end(), 0.0);
        for (std::size_t q = 0; q < t; ++q) axpy(e[q], sys.cache.aat().column(rows[q]), v);
        for (std::size_t q = 0; q < t; ++q) g5 += e[q] * v[rows[q]];
    } else {
        sys.a.row_block_transpose_times(rows, e, u);
        g5 = norm_sq(u);
    }
    if (guarded(g4, g5, g4 * block_norm_sq)) {
        ++st.skips;
        return false;
    }
    const double g6 = g4 / g5;

    if (cached) {
        axpy(-g6, st.work_m, st.r_tilde);
        sys.a.row_block_transpose_times(rows, e, u);
    } else {
        std::span<double> au(st.work_m);
        kernels::gemv(sys.a, u, au);
        axpy(-g6, au, st.r_tilde);
    }
    axpy(g6, u, st.x);
    return true;
}

// ---------------------------------------------------------------------------
// Full steps

void rmr_step(SolverState& st, const LinearSystem& sys, const Partition& rows)
{
    const std::size_t i = rows.sample(st.rng);
    x_block_update(st, sys, rows.block(i), rows.block_norms_sq()[i]);
    ++st.k;
}

void rmr_homogeneous_step(SolverState& st, const LinearSystem& sys, const Partition& cols)
{
    const std::size_t j = cols.sample(st.rng);
    y_block_update(st, sys, cols.block(j), cols.block_norms_sq()[j]);
    ++st.k;
}

void ermr_step(SolverState& st, const LinearSystem& sys, const Partition& rows, const Partition& cols,
               bool consistent_mode)
{
    if (!consistent_mode) {
        const std::size_t j = cols.sample(st.rng);
        y_block_update(st, sys, cols.block(j), cols.block_norms_sq()[j]);
    }
    const std::size_t i = rows.sample(st.rng);
    x_block_update(st, sys, rows.block(i), rows.block_norms_sq()[i]);
    ++st.k;
}

AdaptiveSteps adaptive_step_sizes(const SolverState& st, const LinearSystem& sys, std::span<const std::size_t> rows,
                                  std::span<const std::size_t> cols)
{
    const std::size_t m = sys.a.rows(), n = sys.a.cols();
    AdaptiveSteps out;

    // column half: zeta = -(A^T y) on J
    std::vector<double> zeta(cols.size());
    sys.a.col_block_transpose_times(cols, st.y, zeta);
    for (double& v : zeta) v = -v;
    std::vector<double> az(m);
    sys.a.col_block_times(cols, zeta, az);
    const double zz = norm_sq(zeta), azz = norm_sq(az);
    const double fj = sys.a.block_frobenius_sq(Axis::cols, cols);

    std::vector<double> y1 = st.y;
    if (!guarded(zz, azz, zz * fj)) {
        out.alpha_hat = zz * fj / azz;
        axpy(zz / azz, az, y1);  // zeta^T A^T y = -||zeta||^2
    }

    // row half with y^(k+1)
    std::vector<double> ax(rows.size());
    sys.a.row_block_times(rows, st.x, ax);
    std::vector<double> eta(rows.size());
    for (std::size_t q = 0; q < rows.size(); ++q) eta[q] = sys.b[rows[q]] - y1[rows[q]] - ax[q];
    std::vector<double> ate(n);
    sys.a.row_block_transpose_times(rows, eta, ate);
    const double ee = norm_sq(eta), atee = norm_sq(ate);
    const double fi = sys.a.block_frobenius_sq(Axis::rows, rows);
    if (!guarded(ee, atee, ee * fi)) out.alpha_tilde = ee * fi / atee;
    return out;
}

// ---------------------------------------------------------------------------
// Baselines

namespace {

bool rek_y_single(SolverState& st, const LinearSystem& sys, std::size_t col)
{
    const double nrm = sys.a.block_frobenius_sq(Axis::cols, one(col));
    if (nrm == 0.0) {
        ++st.skips;
        return false;
    }
    double c = 0.0;
    sys.a.col_block_transpose_times(one(col), st.y, {&c, 1});
    if (c == 0.0) return true;
    ensure(st.work_m, sys.a.rows());
    const double coef = -c / nrm;
    sys.a.col_block_times(one(col), {&coef, 1}, st.work_m);
    axpy(1.0, st.work_m, st.y);
    return true;
}

bool rek_x_single(SolverState& st, const LinearSystem& sys, std::size_t row)
{
    const double nrm = sys.a.block_frobenius_sq(Axis::rows, one(row));
    if (nrm == 0.0) {
        ++st.skips;
        return false;
    }
    double ax = 0.0;
    sys.a.row_block_times(one(row), st.x, {&ax, 1});
    const double coef = (sys.b[row] - st.y[row] - ax) / nrm;
    if (coef == 0.0) return true;
    ensure(st.work_n, sys.a.cols());
    sys.a.row_block_transpose_times(one(row), {&coef, 1}, st.work_n);
    axpy(1.0, st.work_n, st.x);
    return true;
}

}  // namespace

void rek_update(SolverState& st, const LinearSystem& sys, std::size_t row, std::size_t col, bool x_uses_updated_y)
{
    if (x_uses_updated_y) {
        rek_y_single(st, sys, col);
        rek_x_single(st, sys, row);
    } else {
        rek_x_single(st, sys, row);
        rek_y_single(st, sys, col);
    }
}

void rek_step(SolverState& st, const LinearSystem& sys, const Partition& rows, const Partition& cols,
              const RekOptions& opts)
{
    std::size_t row = 0, col = 0;
    if (opts.rule == IndexRule::cyclic) {
        row = st.cyclic_row;
        col = st.cyclic_col;
        st.cyclic_row = (st.cyclic_row + 1) % sys.a.rows();
        st.cyclic_col = (st.cyclic_col + 1) % sys.a.cols();
    } else {
        if (rows.size() != sys.a.rows() || cols.size() != sys.a.cols())
            throw UsageError("weighted REK needs single-index partitions");
        col = cols.block(cols.sample(st.rng))[0];
        row = rows.block(rows.sample(st.rng))[0];
    }
    rek_update(st, sys, row, col, opts.x_uses_updated_y);
    ++st.k;
}

void gek_step(SolverState& st, const LinearSystem& sys)
{
    const std::size_t m = sys.a.rows(), n = sys.a.cols();
    std::vector<double> zeta(n), eta(m);
    for (double& v : zeta) v = st.rng.normal();
    for (double& v : eta) v = st.rng.normal();

    std::vector<double> az(m);
    kernels::gemv(sys.a, zeta, az);
    const double num_y = dot(az, st.y), den_y = norm_sq(az);
    if (guarded(num_y, den_y, norm_sq(zeta) * sys.frob_sq)) {
        ++st.skips;
    } else {
        axpy(-num_y / den_y, az, st.y);
    }

    std::vector<double> ax(m), ate(n);
    kernels::gemv(sys.a, st.x, ax);
    double num_x = 0.0;
    for (std::size_t i = 0; i < m; ++i) num_x += eta[i] * (sys.b[i] - st.y[i] - ax[i]);
    kernels::gemv_t(sys.a, eta, ate);
    const double den_x = norm_sq(ate);
    if (guarded(num_x, den_x, norm_sq(eta) * sys.frob_sq)) {
        ++st.skips;
    } else {
        axpy(num_x / den_x, ate, st.x);
    }
    ++st.k;
}

void reabk_update(SolverState& st, const LinearSystem& sys, std::span<const std::size_t> rows, double row_norm_sq,
                  std::span<const std::size_t> cols, double col_norm_sq, double alpha)
{
    const std::size_t m = sys.a.rows(), n = sys.a.cols();
    ensure(st.work_m, m);
    ensure(st.work_n, n);

    // x direction first: it uses y^(k)
    std::vector<double> res(rows.size());
    sys.a.row_block_times(rows, st.x, res);
    for (std::size_t q = 0; q < rows.size(); ++q) res[q] = sys.b[rows[q]] - st.y[rows[q]] - res[q];
    sys.a.row_block_transpose_times(rows, res, st.work_n);

    if (col_norm_sq > 0.0) {
        std::vector<double> t(cols.size());
        sys.a.col_block_transpose_times(cols, st.y, t);
        sys.a.col_block_times(cols, t, st.work_m);
        axpy(-alpha / col_norm_sq, st.work_m, st.y);
    } else {
        ++st.skips;
    }
    if (row_norm_sq > 0.0) {
        axpy(alpha / row_norm_sq, st.work_n, st.x);
    } else {
        ++st.skips;
    }
}

void reabk_step(SolverState& st, const LinearSystem& sys, const Partition& rows, const Partition& cols, double alpha)
{
    const std::size_t j = cols.sample(st.rng);
    const std::size_t i = rows.sample(st.rng);
    reabk_update(st, sys, rows.block(i), rows.block_norms_sq()[i], cols.block(j), cols.block_norms_sq()[j], alpha);
    ++st.k;
}

// ---------------------------------------------------------------------------
// Driver

nlohmann::json SolverConfig::to_json() const
{
    nlohmann::json j;
    j["method"] = to_string(method);
    j["tau_rows"] = tau_rows;
    j["tau_cols"] = tau_cols;
    j["max_iters"] = max_iters;
    j["rse_tol"] = rse_tol ? nlohmann::json(*rse_tol) : nlohmann::json(nullptr);
    j["residual_tol"] = residual_tol ? nlohmann::json(*residual_tol) : nlohmann::json(nullptr);
    j["seed"] = seed;
    j["exec"] = to_string(exec);
    j["reabk_alpha"] = reabk_alpha ? nlohmann::json(*reabk_alpha) : nlohmann::json("auto");
    j["consistent_mode"] = consistent_mode;
    j["rek_updated_y"] = rek_updated_y;
    j["trace_stride"] = trace_stride;
    j["recompute_every"] = recompute_every;
    j["x0"] = x0 ? "given" : "zero";
    j["y0"] = y0 ? "given" : "default";
    return j;
}

void SolverConfig::validate() const
{
    if (tau_rows == 0 || tau_cols == 0) throw UsageError("block sizes must be positive");
    if (trace_stride == 0) throw UsageError("trace stride must be positive");
    if (recompute_every == 0) throw UsageError("recompute interval must be positive");
    if (rse_tol && !(*rse_tol > 0.0)) throw UsageError("rse_tol must be positive");
    if (residual_tol && !(*residual_tol > 0.0)) throw UsageError("residual_tol must be positive");
    if (reabk_alpha && !(*reabk_alpha > 0.0)) throw UsageError("reabk_alpha must be positive");
    if (consistent_mode && method != Method::ermr) throw UsageError("consistent_mode applies to ermr only");
    if (consistent_mode && y0) throw UsageError("consistent_mode pins y to 0; y0 cannot be given");
}

namespace {

BlockCache make_cache(const SolverConfig& c, const MatrixStore& a, ExecMode exec)
{
    if (!uses_recursions(c.method) || exec != ExecMode::cached) return BlockCache::matvec();
    const bool need_ata = c.method != Method::rmr && !c.consistent_mode;
    const bool need_aat = c.method != Method::rmr_homogeneous;
    return BlockCache::cached(a, need_ata, need_aat);
}

bool needs_rows(Method m)
{
    return m == Method::rmr || m == Method::ermr || m == Method::reabk || m == Method::rek;
}

bool needs_cols(Method m)
{
    return m == Method::rmr_homogeneous || m == Method::ermr || m == Method::reabk || m == Method::rek;
}

const SolverConfig& checked(const SolverConfig& c)
{
    c.validate();
    return c;
}

}  // namespace

SolverSession::SolverSession(SolverConfig config, const MatrixStore& a, std::vector<double> b)
    : config_(checked(config)),
      a_(a),
      b_(std::move(b)),
      exec_(resolve_exec_mode(config_.exec, a.rows())),
      cache_(make_cache(config_, a, exec_)),
      sys_(a_, b_, cache_)
{
    const Method m = config_.method;
    const bool single = m == Method::rek;
    if (needs_rows(m))
        rows_ = attach_norms(contiguous_partition(a.rows(), single ? 1 : config_.tau_rows), a, Axis::rows);
    if (needs_cols(m))
        cols_ = attach_norms(contiguous_partition(a.cols(), single ? 1 : config_.tau_cols), a, Axis::cols);
    if (m == Method::reabk) {
        alpha_ = config_.reabk_alpha
                     ? *config_.reabk_alpha
                     : 1.75 / std::max(theory::beta_max(a, rows_, Axis::rows), theory::beta_max(a, cols_, Axis::cols));
    }
    std::vector<double> atb(a.cols());
    kernels::gemv_t(a, b_, atb);
    atb_norm_ = norm(atb);
}

SolverState SolverSession::initial_state(std::uint64_t trial) const
{
    std::optional<std::vector<double>> y0 = config_.y0;
    if (config_.method == Method::rmr || config_.consistent_mode) y0 = std::vector<double>(a_.rows(), 0.0);
    return SolverState::initial(sys_, RngStream(config_.seed, trial), config_.x0, std::move(y0));
}

void SolverSession::step(SolverState& st) const
{
    switch (config_.method) {
    case Method::rmr: rmr_step(st, sys_, rows_); break;
    case Method::rmr_homogeneous: rmr_homogeneous_step(st, sys_, cols_); break;
    case Method::ermr: ermr_step(st, sys_, rows_, cols_, config_.consistent_mode); break;
    case Method::cyclic_extended:
        rek_step(st, sys_, rows_, cols_, {IndexRule::cyclic, config_.rek_updated_y});
        break;
    case Method::rek: rek_step(st, sys_, rows_, cols_, {IndexRule::weighted, config_.rek_updated_y}); break;
    case Method::gek: gek_step(st, sys_); break;
    case Method::reabk: reabk_step(st, sys_, rows_, cols_, *alpha_); break;
    }
}

RunTrace SolverSession::run(std::uint64_t trial, std::optional<std::span<const double>> x_star) const
{
    if (config_.rse_tol && !x_star) throw UsageError("rse_tol needs an oracle solution");
    if (x_star && x_star->size() != a_.cols()) throw UsageError("oracle solution length does not match columns");

    SolverState st = initial_state(trial);
    const bool recursions = uses_recursions(config_.method);
    const double xs_norm = x_star ? norm(*x_star) : 0.0;
    const bool absolute = x_star && xs_norm == 0.0;

    RunTrace tr;
    using clock = std::chrono::steady_clock;
    clock::duration elapsed{};

    auto rse_now = [&]() -> std::optional<double> {
        if (!x_star) return std::nullopt;
        double s = 0.0;
        for (std::size_t j = 0; j < st.x.size(); ++j) {
            const double d = st.x[j] - (*x_star)[j];
            s += d * d;
        }
        return absolute ? std::sqrt(s) : std::sqrt(s) / xs_norm;
    };

    while (st.k < config_.max_iters) {
        const auto t0 = clock::now();
        step(st);
        elapsed += clock::now() - t0;
        const std::size_t k = st.k;

        if (recursions && k % config_.recompute_every == 0) tr.max_drift = std::max(tr.max_drift, st.refresh_residuals(sys_));

        const auto rse = rse_now();
        bool hit = config_.rse_tol && rse && *rse <= *config_.rse_tol;
        const bool record = hit || k % config_.trace_stride == 0 || k == config_.max_iters;
        if (!record) continue;

        TraceRow row;
        row.k = k;
        row.elapsed_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(elapsed).count();
        row.rse = rse;
        row.skips = st.skips;
        if (config_.record_residual || config_.residual_tol) {
            row.residual = normal_residual(a_, b_, st.x);
            if (config_.residual_tol) {
                const double rel = atb_norm_ > 0.0 ? row.residual / atb_norm_ : row.residual;
                hit = hit || rel <= *config_.residual_tol;
            }
        } else {
            row.residual = std::numeric_limits<double>::quiet_NaN();
        }
        tr.rows.push_back(row);
        if (hit) {
            tr.stop = StopReason::tolerance;
            break;
        }
    }

    tr.iterations = st.k;
    tr.skips = st.skips;
    tr.metadata["method"] = to_string(config_.method);
    tr.metadata["config"] = config_.to_json();
    tr.metadata["seed"] = config_.seed;
    tr.metadata["trial"] = trial;
    tr.metadata["exec"] = recursions ? to_string(exec_) : "direct";
    if (alpha_) tr.metadata["reabk_alpha"] = *alpha_;
    tr.metadata["rows"] = a_.rows();
    tr.metadata["cols"] = a_.cols();
    tr.metadata["stop"] = to_string(tr.stop);
    tr.metadata["iterations"] = tr.iterations;
    tr.metadata["skips"] = tr.skips;
    tr.metadata["max_drift"] = tr.max_drift;
    tr.metadata["rse_absolute"] = absolute;
    tr.x = std::move(st.x);
    tr.y = std::move(st.y);
    return tr;
}

RunTrace run(const SolverConfig& config, const MatrixStore& a, std::span<const double> b,
             std::optional<std::span<const double>> x_star)
{
    SolverConfig c = config;
    SolverSession session(c, a, std::vector<double>(b.begin(), b.end()));
    return session.run(config.trial, x_star);
}

double normal_residual(const MatrixStore& a, std::span<const double> b, std::span<const double> x)
{
    std::vector<double> r(a.rows()), g(a.cols());
    kernels::gemv(a, x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    kernels::gemv_t(a, r, g);
    return norm(g);
}

}  // namespace rowsolve
