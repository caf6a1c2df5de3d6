#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rowsolve/solvers.hpp"
#include "rowsolve/trace.hpp"

namespace rowsolve {

struct Stats {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct EnsembleRow {
    std::size_t k = 0;
    std::optional<Stats> rse;
    Stats residual;
};

/// Per-iteration order statistics over trials. Grid points are the union of
/// the trials' recorded iterations; at each point a trial contributes its
/// latest row at or before k (its first row if it has none yet), so traces
/// that stopped early are carried forward at their final value.
struct TrialEnsemble {
    std::string method;
    std::size_t stride = 0;
    std::size_t trials = 0;
    std::vector<RunTrace> traces;
    std::vector<EnsembleRow> rows;

    /// Index of the row with the smallest median RSE.
    std::optional<std::size_t> argmin_median_rse() const;
};

/// Median of an even count is the mean of the two middle values.
Stats order_stats(std::vector<double> values);

TrialEnsemble aggregate(std::vector<RunTrace> traces, std::string method = {});

/// Ensemble CSV. Columns:
/// method,k,trials,rse_median,rse_min,rse_max,residual_median,residual_min,residual_max
/// RSE columns are empty when no oracle solution was available.
void write_ensemble(std::span<const TrialEnsemble> ensembles, const std::filesystem::path& path);
std::vector<TrialEnsemble> read_ensemble(const std::filesystem::path& path);

/// Worker count for trial-level parallelism: the OpenMP thread count,
/// capped by the ROWSOLVE_THREADS environment variable when set.
int worker_count();

/// Runs trials 0..count-1 of one session; result i is trial i regardless of
/// scheduling.
std::vector<RunTrace> run_trials(const SolverSession& session, std::size_t count,
                                 std::optional<std::span<const double>> x_star = {}, int workers = 0);

}  // namespace rowsolve
