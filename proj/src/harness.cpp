#include "rowsolve/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <set>

#ifdef ROWSOLVE_HAVE_OPENMP
#include <omp.h>
#endif

#include "rowsolve/errors.hpp"
#include "rowsolve/kernels.hpp"

namespace rowsolve {

namespace {

constexpr const char* kEnsembleHeader =
    "method,k,trials,rse_median,rse_min,rse_max,residual_median,residual_min,residual_max";

const TraceRow& row_at(const RunTrace& t, std::size_t k)
{
    auto it = std::upper_bound(t.rows.begin(), t.rows.end(), k,
                               [](std::size_t v, const TraceRow& r) { return v < r.k; });
    return it == t.rows.begin() ? t.rows.front() : *std::prev(it);
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Stats order_stats(std::vector<double> v)
{
    if (v.empty()) throw UsageError("order statistics of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double med = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    return {med, v.front(), v.back()};
}

std::optional<std::size_t> TrialEnsemble::argmin_median_rse() const
{
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].rse) continue;
        if (!best || rows[r].rse->median < rows[*best].rse->median) best = r;
    }
    return best;
}

TrialEnsemble aggregate(std::vector<RunTrace> traces, std::string method)
{
    if (traces.empty()) throw UsageError("aggregate needs at least one trace");
    TrialEnsemble e;
    e.stride = traces.front().stride();
    for (const auto& t : traces)
        if (t.stride() != e.stride) throw UsageError("traces have different strides");
    if (method.empty() && traces.front().metadata.contains("method"))
        method = traces.front().metadata["method"].get<std::string>();
    e.method = std::move(method);
    e.trials = traces.size();

    std::set<std::size_t> grid;
    for (const auto& t : traces)
        for (const auto& r : t.rows) grid.insert(r.k);

    for (std::size_t k : grid) {
        EnsembleRow row;
        row.k = k;
        std::vector<double> rse, res;
        bool all_rse = true;
        for (const auto& t : traces) {
            if (t.rows.empty()) continue;
            const TraceRow& r = row_at(t, k);
            if (r.rse)
                rse.push_back(*r.rse);
            else
                all_rse = false;
            res.push_back(r.residual);
        }
        if (all_rse && !rse.empty()) row.rse = order_stats(rse);
        row.residual = order_stats(res);
        e.rows.push_back(row);
    }
    e.traces = std::move(traces);
    return e;
}

void write_ensemble(std::span<const TrialEnsemble> ensembles, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << kEnsembleHeader << '\n';
    for (const auto& e : ensembles) {
        for (const auto& r : e.rows) {
            out << e.method << ',' << r.k << ',' << e.trials << ',';
            if (r.rse)
                out << format_double(r.rse->median) << ',' << format_double(r.rse->min) << ','
                    << format_double(r.rse->max);
            else
                out << ",,";
            out << ',' << format_double(r.residual.median) << ',' << format_double(r.residual.min) << ','
                << format_double(r.residual.max) << '\n';
        }
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<TrialEnsemble> read_ensemble(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || line != kEnsembleHeader)
        throw ParseError(path.string() + ": unexpected ensemble header", lineno);

    std::vector<TrialEnsemble> out;
    std::map<std::string, std::size_t> index;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 9) throw ParseError(path.string() + ": expected 9 fields", lineno);
        try {
            auto [it, fresh] = index.try_emplace(f[0], out.size());
            if (fresh) {
                out.emplace_back();
                out.back().method = f[0];
            }
            TrialEnsemble& e = out[it->second];
            e.trials = std::stoul(f[2]);
            EnsembleRow r;
            r.k = std::stoul(f[1]);
            if (!f[3].empty()) r.rse = Stats{parse_double(f[3]), parse_double(f[4]), parse_double(f[5])};
            r.residual = {parse_double(f[6]), parse_double(f[7]), parse_double(f[8])};
            e.rows.push_back(r);
        } catch (const std::exception& ex) {
            throw ParseError(path.string() + ": " + ex.what(), lineno);
        }
    }
    return out;
}

int worker_count()
{
    int n = kernels::max_threads();
    if (const char* env = std::getenv("ROWSOLVE_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return std::max(n, 1);
}

std::vector<RunTrace> run_trials(const SolverSession& session, std::size_t count,
                                 std::optional<std::span<const double>> x_star, int workers)
{
    if (workers <= 0) workers = worker_count();
    std::vector<RunTrace> out(count);
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<long long>(count);
#ifdef ROWSOLVE_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
    for (long long t = 0; t < n; ++t) {
        try {
            out[t] = session.run(static_cast<std::uint64_t>(t), x_star);
        } catch (...) {
            errors[t] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace rowsolve
