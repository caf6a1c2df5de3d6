#include "rowsolve/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/QR>

#include "rowsolve/errors.hpp"
#include "rowsolve/kernels.hpp"
#include "rowsolve/partition.hpp"
#include "rowsolve/theory.hpp"
#include "rowsolve/trace.hpp"

namespace rowsolve {

namespace {

Eigen::MatrixXd orthonormal_gaussian(std::size_t rows, std::size_t cols, RngStream& rng)
{
    Eigen::MatrixXd g(rows, cols);
    for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

}  // namespace

MatrixStore synthetic_udv(std::size_t m, std::size_t n, std::size_t r, double kappa, std::uint64_t seed)
{
    if (m == 0 || n == 0) throw UsageError("synthetic_udv: dimensions must be positive");
    if (r == 0 || r > std::min(m, n)) throw UsageError("synthetic_udv: need 1 <= r <= min(m, n)");
    if (!(kappa > 1.0)) throw UsageError("synthetic_udv: kappa must exceed 1");
    RngStream rng(seed, 0);
    const Eigen::MatrixXd u = orthonormal_gaussian(m, r, rng);
    const Eigen::MatrixXd v = orthonormal_gaussian(n, r, rng);
    Eigen::VectorXd d(r);
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = 1.0 + (kappa - 1.0) * rng.uniform();
    return MatrixStore::from_eigen(u * d.asDiagonal() * v.transpose());
}

std::vector<double> null_space_direction(const SvdFactor& svd, std::size_t rows, std::uint64_t seed)
{
    if (svd.rank >= rows) throw DataError("null space of A^T is trivial; cannot build noise direction");
    RngStream rng(seed, 2);
    Eigen::VectorXd g(rows);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = rng.normal();
    const double g0 = g.norm();
    for (int pass = 0; pass < 2; ++pass) g -= svd.U * (svd.U.transpose() * g);
    const double gn = g.norm();
    if (!(gn > 1e-8 * g0)) throw DataError("noise draw fell inside R(A)");
    g /= gn;
    return {g.data(), g.data() + g.size()};
}

NoisyRhs noisy_rhs(const MatrixStore& a, double delta, std::uint64_t seed)
{
    if (!(delta >= 0.0)) throw UsageError("noise level must be nonnegative");
    const std::size_t m = a.rows();
    RngStream rng(seed, 1);
    std::vector<double> bt(m);
    for (double& v : bt) v = rng.normal();

    const SvdFactor svd = thin_svd(a);
    NoisyRhs out;
    out.x_star = theory::min_norm_lsq(svd, bt);
    out.b = matvec(a, out.x_star);
    if (delta > 0.0) {
        out.noise = null_space_direction(svd, m, seed);
        axpy(delta, out.noise, out.b);
    }
    return out;
}

ProblemInstance example1(std::size_t n, double delta, std::uint64_t seed)
{
    if (n < 11) throw UsageError("example1 needs n >= 11 so that kappa = n/10 exceeds 1");
    const std::size_t m = 30 * n, r = n / 2;
    const double kappa = static_cast<double>(n) / 10.0;
    ProblemInstance inst;
    inst.a = synthetic_udv(m, n, r, kappa, seed);
    NoisyRhs rhs = noisy_rhs(inst.a, delta, seed);
    inst.b = std::move(rhs.b);
    inst.x_star = std::move(rhs.x_star);
    inst.b_n_norm = delta;
    inst.descriptor = {{"generator", "example1"}, {"n", n},         {"m", m},       {"rank", r},
                       {"kappa", kappa},          {"delta", delta}, {"seed", seed}};
    return inst;
}

// ---------------------------------------------------------------------------
// Tomography

namespace {

struct Ray {
    double p0[2];
    double d[2];
};

Ray make_ray(std::size_t n, double theta, double offset)
{
    const double c = static_cast<double>(n) / 2.0;
    double cs = std::cos(theta), sn = std::sin(theta);
    if (std::abs(cs) < 1e-12) cs = 0.0;
    if (std::abs(sn) < 1e-12) sn = 0.0;
    return {{c - offset * sn, c + offset * cs}, {cs, sn}};
}

// Parameter interval of the ray inside [0, N]^2; empty when lo >= hi.
std::pair<double, double> clip(const Ray& r, double side)
{
    double lo = -HUGE_VAL, hi = HUGE_VAL;
    for (int ax = 0; ax < 2; ++ax) {
        if (r.d[ax] != 0.0) {
            const double s1 = (0.0 - r.p0[ax]) / r.d[ax], s2 = (side - r.p0[ax]) / r.d[ax];
            lo = std::max(lo, std::min(s1, s2));
            hi = std::min(hi, std::max(s1, s2));
        } else if (!(r.p0[ax] > 0.0 && r.p0[ax] < side)) {
            return {1.0, 0.0};
        }
    }
    return {lo, hi};
}

}  // namespace

double tomo_chord_length(std::size_t n, double theta, double offset)
{
    const auto [lo, hi] = clip(make_ray(n, theta, offset), static_cast<double>(n));
    return hi > lo ? hi - lo : 0.0;
}

std::vector<std::pair<std::size_t, double>> tomo_ray(std::size_t n, double theta, double offset)
{
    const Ray r = make_ray(n, theta, offset);
    const double side = static_cast<double>(n);
    const auto [lo, hi] = clip(r, side);
    std::vector<std::pair<std::size_t, double>> out;
    if (!(hi > lo)) return out;

    // Siddon: parameters where the ray crosses grid lines, sorted; each
    // segment between consecutive crossings lies in one pixel.
    std::vector<double> s{lo, hi};
    for (int ax = 0; ax < 2; ++ax) {
        if (r.d[ax] == 0.0) continue;
        for (std::size_t g = 0; g <= n; ++g) {
            const double v = (static_cast<double>(g) - r.p0[ax]) / r.d[ax];
            if (v > lo && v < hi) s.push_back(v);
        }
    }
    std::sort(s.begin(), s.end());
    for (std::size_t q = 0; q + 1 < s.size(); ++q) {
        const double len = s[q + 1] - s[q];
        if (len < 1e-14) continue;
        const double mid = 0.5 * (s[q] + s[q + 1]);
        const double px = r.p0[0] + mid * r.d[0], py = r.p0[1] + mid * r.d[1];
        const auto ix = std::min(static_cast<std::size_t>(std::max(px, 0.0)), n - 1);
        const auto iy = std::min(static_cast<std::size_t>(std::max(py, 0.0)), n - 1);
        const std::size_t pix = iy * n + ix;
        if (!out.empty() && out.back().first == pix)
            out.back().second += len;
        else
            out.emplace_back(pix, len);
    }
    return out;
}

std::vector<double> disk_phantom(std::size_t n)
{
    std::vector<double> img(n * n, 0.0);
    const double c = static_cast<double>(n) / 2.0, rad = static_cast<double>(n) / 4.0;
    for (std::size_t iy = 0; iy < n; ++iy)
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double dx = static_cast<double>(ix) + 0.5 - c, dy = static_cast<double>(iy) + 0.5 - c;
            if (dx * dx + dy * dy <= rad * rad) img[iy * n + ix] = 1.0;
        }
    return img;
}

TomoOperator tomo_line_matrix(std::size_t n, std::size_t num_angles, std::size_t rays_per_angle)
{
    if (n < 4) throw UsageError("tomography grid needs N >= 4");
    if (num_angles == 0 || rays_per_angle == 0) throw UsageError("need at least one angle and one ray");
    const double h = static_cast<double>(n) / std::numbers::sqrt2;
    const double step = 2.0 * h / static_cast<double>(rays_per_angle);

    std::vector<Triplet> entries;
    std::size_t row = 0;
    for (std::size_t a = 0; a < num_angles; ++a) {
        const double theta = static_cast<double>(a) * std::numbers::pi / static_cast<double>(num_angles);
        for (std::size_t r = 0; r < rays_per_angle; ++r, ++row) {
            const double t = -h + (static_cast<double>(r) + 0.5) * step;
            auto cells = tomo_ray(n, theta, t);
            std::sort(cells.begin(), cells.end());
            for (const auto& [pix, len] : cells) entries.push_back({row, pix, len});
        }
    }
    TomoOperator op;
    op.a = MatrixStore::from_triplets(num_angles * rays_per_angle, n * n, std::move(entries));
    op.phantom = disk_phantom(n);
    op.n = n;
    return op;
}

std::vector<double> tomo_noisy_rhs(const MatrixStore& a, std::span<const double> x_star, std::uint64_t seed)
{
    std::vector<double> b = matvec(a, x_star);
    axpy(1.0, null_space_direction(thin_svd(a), a.rows(), seed), b);
    return b;
}

ProblemInstance tomography(std::size_t n, std::size_t num_angles, std::size_t rays_per_angle, std::uint64_t seed)
{
    TomoOperator op = tomo_line_matrix(n, num_angles, rays_per_angle);
    ProblemInstance inst;
    inst.a = std::move(op.a);
    inst.b = tomo_noisy_rhs(inst.a, op.phantom, seed);
    inst.x_star = std::move(op.phantom);
    inst.b_n_norm = 1.0;
    inst.descriptor = {{"generator", "tomography"}, {"N", n},        {"angles", num_angles},
                       {"rays", rays_per_angle},    {"seed", seed}, {"tau", n}};
    return inst;
}

// ---------------------------------------------------------------------------
// I/O

void write_columns_csv(std::span<const std::vector<double>> columns, const std::filesystem::path& path)
{
    if (columns.empty()) throw UsageError("no columns to write");
    const std::size_t rows = columns.front().size();
    for (const auto& c : columns)
        if (c.size() != rows) throw UsageError("columns differ in length");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_double(columns[j][i]);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::vector<double>> read_columns_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::vector<std::vector<double>> cols;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> vals;
        std::size_t start = 0;
        for (;;) {
            const std::size_t pos = line.find(',', start);
            const std::string_view f = std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start);
            try {
                vals.push_back(parse_double(f));
            } catch (const DataError& e) {
                throw ParseError(path.string() + ": " + e.what(), lineno);
            }
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (cols.empty()) cols.resize(vals.size());
        if (vals.size() != cols.size()) throw ParseError(path.string() + ": ragged row", lineno);
        for (std::size_t j = 0; j < vals.size(); ++j) cols[j].push_back(vals[j]);
    }
    if (cols.empty()) throw DataError(path.string() + ": no data");
    return cols;
}

void write_vector_csv(std::span<const double> v, const std::filesystem::path& path)
{
    const std::vector<std::vector<double>> cols{std::vector<double>(v.begin(), v.end())};
    write_columns_csv(cols, path);
}

std::vector<double> read_vector_csv(const std::filesystem::path& path)
{
    auto cols = read_columns_csv(path);
    if (cols.size() != 1) throw DataError(path.string() + ": expected a single column");
    return std::move(cols.front());
}

void write_instance(const ProblemInstance& inst, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    mm_write(inst.a, dir / "A.mtx");
    write_vector_csv(inst.b, dir / "b.csv");
    if (inst.x_star) write_vector_csv(*inst.x_star, dir / "xstar.csv");
    nlohmann::json j = inst.descriptor;
    j["b_n_norm"] = inst.b_n_norm;
    j["rows"] = inst.a.rows();
    j["cols"] = inst.a.cols();
    std::ofstream out(dir / "instance.json", std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / "instance.json").string());
    out << j.dump(2) << '\n';
}

ProblemInstance read_instance(const std::filesystem::path& dir)
{
    ProblemInstance inst;
    inst.a = mm_read(dir / "A.mtx");
    inst.b = read_vector_csv(dir / "b.csv");
    if (inst.b.size() != inst.a.rows()) throw DataError("b.csv length does not match A");
    if (std::filesystem::exists(dir / "xstar.csv")) {
        inst.x_star = read_vector_csv(dir / "xstar.csv");
        if (inst.x_star->size() != inst.a.cols()) throw DataError("xstar.csv length does not match A");
    }
    if (std::filesystem::exists(dir / "instance.json")) {
        std::ifstream in(dir / "instance.json", std::ios::binary);
        try {
            inst.descriptor = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("instance.json: " + std::string(e.what()));
        }
        if (inst.descriptor.contains("b_n_norm")) inst.b_n_norm = inst.descriptor["b_n_norm"].get<double>();
    }
    return inst;
}

void write_pgm(std::span<const double> image, std::size_t width, std::size_t height,
               const std::filesystem::path& path, double lo, double hi)
{
    if (image.size() != width * height) throw UsageError("image size does not match dimensions");
    if (!(hi > lo)) throw UsageError("pgm range must be nonempty");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P2\n" << width << ' ' << height << "\n255\n";
    // top image row is the largest y
    for (std::size_t r = 0; r < height; ++r) {
        const std::size_t iy = height - 1 - r;
        for (std::size_t ix = 0; ix < width; ++ix) {
            const double v = std::clamp((image[iy * width + ix] - lo) / (hi - lo), 0.0, 1.0);
            out << (ix ? " " : "") << static_cast<int>(std::lround(255.0 * v));
        }
        out << '\n';
    }
}

}  // namespace rowsolve
