#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "rowsolve/matrix.hpp"

namespace rowsolve {

/// Deterministic random stream. A (seed, stream) pair selects an independent
/// substream; trial t of a benchmark uses stream t. The engine is the
/// standard mt19937_64 (its output sequence is fixed by the C++ standard);
/// the uniform and Gaussian transforms are done here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0);

    std::uint64_t next_u64() { return engine_(); }
    double uniform();  // [0, 1), 53 random bits
    double normal();   // Box-Muller

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

/// Ordered disjoint cover of {0, ..., universe-1} by index blocks, with
/// optional per-block weights (squared Frobenius norms) for sampling.
class Partition {
public:
    Partition() = default;
    /// Validates that blocks are nonempty, disjoint and cover the universe.
    Partition(std::size_t universe, std::vector<std::vector<std::size_t>> blocks);

    std::size_t universe_size() const noexcept { return universe_; }
    std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::span<const std::size_t> block(std::size_t k) const
    {
        return std::span<const std::size_t>(indices_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
    }

    bool has_weights() const noexcept { return !norms_sq_.empty(); }
    std::span<const double> block_norms_sq() const { return norms_sq_; }
    double total_weight() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
    double probability(std::size_t k) const;
    /// Block indices with positive weight, in order; the sampling support.
    std::span<const std::size_t> support() const { return support_; }
    std::span<const double> cumulative() const { return cumulative_; }

    /// Copy with weights set to the given per-block values.
    Partition with_weights(std::vector<double> weights) const;

    /// Draws a block with probability weight/total. Throws DataError if all
    /// weights are zero, UsageError if no weights were attached.
    std::size_t sample(RngStream& rng) const;

private:
    std::size_t universe_ = 0;
    std::vector<std::size_t> indices_;
    std::vector<std::size_t> offsets_;
    std::vector<double> norms_sq_;
    std::vector<std::size_t> support_;
    std::vector<double> cumulative_;  // over support_, strictly increasing
};

/// Blocks {k*tau, ..., (k+1)*tau - 1}; the last block takes the remainder.
Partition contiguous_partition(std::size_t universe_size, std::size_t tau);

/// Weights each block by ||A_block||_F^2 along the given axis.
Partition attach_norms(const Partition& p, const MatrixStore& a, Axis axis);

std::size_t sample_block(const Partition& p, RngStream& rng);

}  // namespace rowsolve
