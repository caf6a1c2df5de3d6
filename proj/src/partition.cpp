#include "rowsolve/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rowsolve/errors.hpp"

namespace rowsolve {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream)))
{
}

double RngStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal()
{
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
}

Partition::Partition(std::size_t universe, std::vector<std::vector<std::size_t>> blocks) : universe_(universe)
{
    if (universe == 0) throw UsageError("partition universe must be positive");
    std::vector<char> seen(universe, 0);
    offsets_.push_back(0);
    for (const auto& b : blocks) {
        if (b.empty()) throw UsageError("partition blocks must be nonempty");
        for (std::size_t i : b) {
            if (i >= universe) throw UsageError("partition index " + std::to_string(i) + " out of range");
            if (seen[i]) throw UsageError("partition blocks overlap at index " + std::to_string(i));
            seen[i] = 1;
            indices_.push_back(i);
        }
        offsets_.push_back(indices_.size());
    }
    if (indices_.size() != universe) throw UsageError("partition blocks do not cover the universe");
}

double Partition::probability(std::size_t k) const
{
    if (!has_weights() || total_weight() <= 0.0) return 0.0;
    return norms_sq_[k] / total_weight();
}

Partition Partition::with_weights(std::vector<double> weights) const
{
    if (weights.size() != size()) throw UsageError("one weight per block required");
    Partition p = *this;
    p.norms_sq_ = std::move(weights);
    p.support_.clear();
    p.cumulative_.clear();
    double running = 0.0;
    for (std::size_t k = 0; k < p.norms_sq_.size(); ++k) {
        const double w = p.norms_sq_[k];
        if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("block weights must be finite and nonnegative");
        if (w == 0.0) continue;
        running += w;
        p.support_.push_back(k);
        p.cumulative_.push_back(running);
    }
    return p;
}

std::size_t Partition::sample(RngStream& rng) const
{
    if (!has_weights()) throw UsageError("partition has no weights attached");
    if (support_.empty()) throw DataError("cannot sample: all block weights are zero");
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

Partition contiguous_partition(std::size_t universe_size, std::size_t tau)
{
    if (tau == 0 || tau > universe_size)
        throw UsageError("block size tau must satisfy 1 <= tau <= " + std::to_string(universe_size));
    std::vector<std::vector<std::size_t>> blocks;
    for (std::size_t start = 0; start < universe_size; start += tau) {
        std::vector<std::size_t> b;
        for (std::size_t i = start; i < std::min(universe_size, start + tau); ++i) b.push_back(i);
        blocks.push_back(std::move(b));
    }
    return Partition(universe_size, std::move(blocks));
}

Partition attach_norms(const Partition& p, const MatrixStore& a, Axis axis)
{
    const std::size_t dim = axis == Axis::rows ? a.rows() : a.cols();
    if (p.universe_size() != dim)
        throw UsageError("partition of size " + std::to_string(p.universe_size()) + " does not match matrix " +
                         (axis == Axis::rows ? "rows (" : "cols (") + std::to_string(dim) + ")");
    std::vector<double> w(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) w[k] = a.block_frobenius_sq(axis, p.block(k));
    return p.with_weights(std::move(w));
}

std::size_t sample_block(const Partition& p, RngStream& rng) { return p.sample(rng); }

}  // namespace rowsolve
