#include "rowsolve/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rowsolve/errors.hpp"

namespace rowsolve {

namespace {

constexpr const char* kHeader = "k,elapsed_ns,rse,residual,skips";

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <class Int>
Int parse_int(std::string_view s, std::size_t line)
{
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ParseError("bad integer '" + std::string(s) + "'", line);
    return v;
}

}  // namespace

std::string to_string(StopReason r)
{
    return r == StopReason::tolerance ? "tolerance" : "max_iters";
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s)
{
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty())
        throw DataError("bad number '" + std::string(s) + "'");
    return v;
}

std::size_t RunTrace::stride() const
{
    if (metadata.contains("config") && metadata["config"].contains("trace_stride"))
        return metadata["config"]["trace_stride"].get<std::size_t>();
    return 0;
}

std::optional<std::size_t> RunTrace::argmin_rse() const
{
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].rse) continue;
        if (!best || *rows[r].rse < *rows[*best].rse) best = r;
    }
    return best;
}

std::filesystem::path meta_path(const std::filesystem::path& trace_path)
{
    return std::filesystem::path(trace_path.string() + ".meta.json");
}

void write_trace(const RunTrace& trace, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << kHeader << '\n';
    for (const auto& r : trace.rows) {
        out << r.k << ',' << r.elapsed_ns << ',' << (r.rse ? format_double(*r.rse) : "") << ','
            << format_double(r.residual) << ',' << r.skips << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());

    std::ofstream meta(meta_path(path), std::ios::binary);
    if (!meta) throw DataError("cannot write " + meta_path(path).string());
    meta << trace.metadata.dump(2) << '\n';
}

RunTrace read_trace(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    RunTrace tr;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header", 1);
    ++lineno;
    if (line != kHeader) throw ParseError(path.string() + ": unexpected header '" + line + "'", lineno);
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw ParseError(path.string() + ": expected 5 fields", lineno);
        TraceRow r;
        r.k = parse_int<std::size_t>(f[0], lineno);
        r.elapsed_ns = parse_int<std::int64_t>(f[1], lineno);
        try {
            if (!f[2].empty()) r.rse = parse_double(f[2]);
            r.residual = parse_double(f[3]);
        } catch (const ParseError&) {
            throw;
        } catch (const DataError& e) {
            throw ParseError(path.string() + ": " + e.what(), lineno);
        }
        r.skips = parse_int<std::size_t>(f[4], lineno);
        tr.rows.push_back(r);
    }

    const auto mp = meta_path(path);
    if (std::filesystem::exists(mp)) {
        std::ifstream meta(mp, std::ios::binary);
        try {
            tr.metadata = nlohmann::json::parse(meta);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(mp.string() + ": " + e.what());
        }
        if (tr.metadata.contains("stop"))
            tr.stop = tr.metadata["stop"] == "tolerance" ? StopReason::tolerance : StopReason::max_iters;
        if (tr.metadata.contains("iterations")) tr.iterations = tr.metadata["iterations"].get<std::size_t>();
        if (tr.metadata.contains("skips")) tr.skips = tr.metadata["skips"].get<std::size_t>();
        if (tr.metadata.contains("max_drift")) tr.max_drift = tr.metadata["max_drift"].get<double>();
    } else if (!tr.rows.empty()) {
        tr.iterations = tr.rows.back().k;
        tr.skips = tr.rows.back().skips;
    }
    return tr;
}

}  // namespace rowsolve
