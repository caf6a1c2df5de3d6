#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace rowsolve {

struct TraceRow {
    std::size_t k = 0;
    std::int64_t elapsed_ns = 0;
    std::optional<double> rse;  // absent when no oracle solution is known
    double residual = 0.0;      // ||A^T (b - A x)||
    std::size_t skips = 0;      // cumulative guarded no-op half steps

    bool operator==(const TraceRow&) const = default;
};

enum class StopReason { tolerance, max_iters };

std::string to_string(StopReason r);

/// One solver run: rows at the recording stride plus the final iteration,
/// and a metadata object (method, configuration echo, seed, instance
/// descriptor, stop reason, drift statistics).
struct RunTrace {
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<TraceRow> rows;
    StopReason stop = StopReason::max_iters;
    std::size_t iterations = 0;
    std::size_t skips = 0;
    double max_drift = 0.0;  // worst recursion drift seen at the periodic recomputes
    std::vector<double> x;   // final iterate (not serialized to the CSV)
    std::vector<double> y;

    std::size_t stride() const;
    std::optional<std::size_t> argmin_rse() const;
};

/// CSV with header `k,elapsed_ns,rse,residual,skips` and a sidecar
/// `<path>.meta.json`. Absent RSE is written as an empty field.
void write_trace(const RunTrace& trace, const std::filesystem::path& path);
RunTrace read_trace(const std::filesystem::path& path);

std::filesystem::path meta_path(const std::filesystem::path& trace_path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace rowsolve
