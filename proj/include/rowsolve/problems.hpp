#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rowsolve/matrix.hpp"

namespace rowsolve {

struct ProblemInstance {
    MatrixStore a;
    std::vector<double> b;
    std::optional<std::vector<double>> x_star;
    double b_n_norm = 0.0;  // ||b_N||, the inconsistency level
    nlohmann::json descriptor = nlohmann::json::object();
};

/// A = U D V^T with U (m x r), V (n x r) orthonormalised Gaussian matrices
/// and D = diag(1 + (kappa - 1) * uniform). Throws UsageError unless
/// 1 <= r <= min(m, n) and kappa > 1.
MatrixStore synthetic_udv(std::size_t m, std::size_t n, std::size_t r, double kappa, std::uint64_t seed);

struct NoisyRhs {
    std::vector<double> b;
    std::vector<double> x_star;
    std::vector<double> noise;  // unit vector in N(A^T); empty when delta == 0
};

/// b = A x* + delta * bhat with x* = A^+ btilde for Gaussian btilde and bhat
/// a unit vector in N(A^T). DataError when delta > 0 and N(A^T) = {0}.
NoisyRhs noisy_rhs(const MatrixStore& a, double delta, std::uint64_t seed);

/// Unit vector in N(A^T): a Gaussian draw orthogonalised twice against the
/// retained left singular vectors.
std::vector<double> null_space_direction(const SvdFactor& svd, std::size_t rows, std::uint64_t seed);

/// Preset m = 30n, r = n/2, kappa = n/10.
ProblemInstance example1(std::size_t n, double delta, std::uint64_t seed);

/// Parallel-beam line-integral operator on the pixel grid [0, N]^2. Angles
/// theta_a = a * pi / num_angles; ray offsets spread uniformly across the
/// grid diagonal. Entry (ray, pixel) is the intersection length; pixels are
/// flattened row-major (index = row * N + col, row along y).
struct TomoOperator {
    MatrixStore a;
    std::vector<double> phantom;  // centred disk of radius N/4, value 1
    std::size_t n = 0;
};

TomoOperator tomo_line_matrix(std::size_t n, std::size_t num_angles, std::size_t rays_per_angle);

/// One ray as (pixel, length) pairs in traversal order.
/// The ray is {c + t * normal + s * dir}, dir = (cos theta, sin theta), c the grid centre.
std::vector<std::pair<std::size_t, double>> tomo_ray(std::size_t n, double theta, double offset);
/// Length of the ray inside the grid square.
double tomo_chord_length(std::size_t n, double theta, double offset);

std::vector<double> disk_phantom(std::size_t n);

/// b = A x* + bhat, bhat a unit vector in N(A^T).
std::vector<double> tomo_noisy_rhs(const MatrixStore& a, std::span<const double> x_star, std::uint64_t seed);

ProblemInstance tomography(std::size_t n, std::size_t num_angles, std::size_t rays_per_angle, std::uint64_t seed);

// Instance I/O: A.mtx, b.csv, xstar.csv (when known), instance.json.
void write_instance(const ProblemInstance& inst, const std::filesystem::path& dir);
ProblemInstance read_instance(const std::filesystem::path& dir);

/// Comma-separated columns without header; one row per line.
void write_columns_csv(std::span<const std::vector<double>> columns, const std::filesystem::path& path);
std::vector<std::vector<double>> read_columns_csv(const std::filesystem::path& path);
void write_vector_csv(std::span<const double> v, const std::filesystem::path& path);
std::vector<double> read_vector_csv(const std::filesystem::path& path);

/// Plain (ASCII) PGM, values mapped linearly from [lo, hi] to 0..255.
void write_pgm(std::span<const double> image, std::size_t width, std::size_t height,
               const std::filesystem::path& path, double lo = 0.0, double hi = 1.0);

}  // namespace rowsolve
