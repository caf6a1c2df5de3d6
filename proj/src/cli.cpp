#include "rowsolve/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "rowsolve/errors.hpp"
#include "rowsolve/harness.hpp"
#include "rowsolve/kernels.hpp"
#include "rowsolve/problems.hpp"
#include "rowsolve/solvers.hpp"
#include "rowsolve/theory.hpp"

namespace rowsolve {

namespace {

namespace fs = std::filesystem;

struct InputOpts {
    std::string instance;
    std::string matrix;
    std::string rhs;
    std::string xstar;
    bool oracle = false;

    void add(CLI::App* app)
    {
        app->add_option("--instance", instance, "Instance directory written by `gen`")->check(CLI::ExistingDirectory);
        app->add_option("--matrix", matrix, "Matrix Market file")->check(CLI::ExistingFile);
        app->add_option("--rhs", rhs, "Right-hand side CSV (one column per system)")->check(CLI::ExistingFile);
        app->add_option("--xstar", xstar, "Oracle solution CSV (enables RSE)")->check(CLI::ExistingFile);
        app->add_flag("--oracle", oracle, "Compute x* = pinv(A) b by SVD when no oracle is given");
    }
};

struct Loaded {
    MatrixStore a;
    std::vector<std::vector<double>> rhs;
    std::vector<std::optional<std::vector<double>>> xstar;
    nlohmann::json descriptor = nlohmann::json::object();
};

Loaded load(const InputOpts& in, bool need_rhs)
{
    Loaded l;
    if (!in.instance.empty()) {
        if (!in.matrix.empty() || !in.rhs.empty()) throw UsageError("--instance excludes --matrix/--rhs");
        ProblemInstance inst = read_instance(in.instance);
        l.a = std::move(inst.a);
        l.rhs.push_back(std::move(inst.b));
        l.xstar.push_back(std::move(inst.x_star));
        l.descriptor = std::move(inst.descriptor);
    } else {
        if (in.matrix.empty()) throw UsageError("need --instance or --matrix");
        l.a = mm_read(in.matrix);
        if (!in.rhs.empty()) {
            l.rhs = read_columns_csv(in.rhs);
            for (const auto& b : l.rhs)
                if (b.size() != l.a.rows()) throw DataError("right-hand side length does not match matrix rows");
        }
        l.xstar.resize(l.rhs.size());
        l.descriptor = {{"matrix", in.matrix}, {"rhs", in.rhs}};
    }
    if (need_rhs && l.rhs.empty()) throw UsageError("need a right-hand side (--rhs or --instance)");
    if (!in.xstar.empty()) {
        auto cols = read_columns_csv(in.xstar);
        if (cols.size() != l.rhs.size()) throw DataError("oracle column count does not match right-hand sides");
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j].size() != l.a.cols()) throw DataError("oracle length does not match matrix columns");
            l.xstar[j] = std::move(cols[j]);
        }
    }
    if (in.oracle) {
        const SvdFactor svd = thin_svd(l.a);
        for (std::size_t j = 0; j < l.rhs.size(); ++j)
            if (!l.xstar[j]) l.xstar[j] = theory::min_norm_lsq(svd, l.rhs[j]);
    }
    return l;
}

struct SolverOpts {
    std::size_t tau_rows = 0;
    std::size_t tau_cols = 0;
    std::size_t max_iters = 100000;
    std::optional<double> rse_tol;
    std::optional<double> residual_tol;
    std::uint64_t seed = 0;
    std::string exec = "auto";
    std::optional<double> alpha;
    bool consistent = false;
    bool rek_updated_y = false;
    std::size_t stride = 100;
    std::size_t recompute = 10000;
    bool no_rates = false;

    void add(CLI::App* app)
    {
        app->add_option("--tau-rows", tau_rows, "Row block size (default: instance tau, else 1)");
        app->add_option("--tau-cols", tau_cols, "Column block size (default: instance tau, else 1)");
        app->add_option("--max-iters", max_iters, "Iteration budget")->capture_default_str();
        app->add_option("--rse-tol", rse_tol, "Stop when ||x - x*|| / ||x*|| falls below");
        app->add_option("--residual-tol", residual_tol, "Stop when ||A^T(b - Ax)|| / ||A^T b|| falls below");
        app->add_option("--seed", seed, "Random seed")->capture_default_str();
        app->add_option("--exec", exec, "auto | cached | matvec")->capture_default_str();
        app->add_option("--alpha", alpha, "REABK step size (default 1.75 / beta_max)");
        app->add_flag("--consistent", consistent, "ERMR with y pinned to 0");
        app->add_flag("--rek-updated-y", rek_updated_y, "REK/cyclic: x update uses the new y");
        app->add_option("--stride", stride, "Trace stride")->capture_default_str();
        app->add_option("--recompute", recompute, "Residual recompute interval")->capture_default_str();
        app->add_flag("--no-rates", no_rates, "Skip the rate report in trace metadata");
    }

    SolverConfig config(Method m, const nlohmann::json& descriptor) const
    {
        const std::size_t def = descriptor.contains("tau") ? descriptor["tau"].get<std::size_t>() : 1;
        SolverConfig c;
        c.method = m;
        c.tau_rows = tau_rows ? tau_rows : def;
        c.tau_cols = tau_cols ? tau_cols : def;
        c.max_iters = max_iters;
        c.rse_tol = rse_tol;
        c.residual_tol = residual_tol;
        c.seed = seed;
        c.exec = parse_exec_mode(exec);
        c.reabk_alpha = alpha;
        c.consistent_mode = consistent;
        c.rek_updated_y = rek_updated_y;
        c.trace_stride = stride;
        c.recompute_every = recompute;
        return c;
    }
};

nlohmann::json rates_json(const MatrixStore& a, std::size_t tau_rows, std::size_t tau_cols)
{
    const Partition rows = attach_norms(contiguous_partition(a.rows(), tau_rows), a, Axis::rows);
    const Partition cols = attach_norms(contiguous_partition(a.cols(), tau_cols), a, Axis::cols);
    return theory::convergence_rates(a, rows, cols).to_json();
}

fs::path indexed(const fs::path& p, std::size_t j, std::size_t count)
{
    if (count == 1) return p;
    fs::path q = p;
    q.replace_filename(p.stem().string() + ".rhs" + std::to_string(j) + p.extension().string());
    return q;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// Fills options that were not given on the command line from a flat
// key=value file. Keys are long option names; '_' and '-' are interchangeable.
void apply_config(CLI::App* sub, const std::string& path)
{
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(path);
    } catch (const CLI::Error& e) {
        throw UsageError(path + ": " + e.what());
    }
    for (const auto& item : items) {
        if (!item.parents.empty() || item.name == "++" || item.name == "--")
            throw UsageError(path + ": sections are not supported (key '" + item.fullname() + "')");
        std::string key = item.name;
        std::replace(key.begin(), key.end(), '_', '-');
        CLI::Option* op = sub->get_option_no_throw("--" + key);
        if (op == nullptr || key == "config") throw UsageError(path + ": unknown key '" + item.name + "'");
        if (op->count() > 0) continue;
        op->add_result(item.inputs);
        try {
            op->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError(path + ": " + item.name + ": " + e.what());
        }
    }
}

void write_json(std::ostream& out, const nlohmann::json& j)
{
    out << j.dump(2) << '\n';
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Randomized row-action solvers for least-squares problems"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a problem instance");
    gen->require_subcommand(1);
    std::string out_dir;
    std::uint64_t gen_seed = 0;
    std::size_t gen_n = 50, gen_m = 0, gen_rank = 0, grid = 16, angles = 24, rays = 24;
    double delta = 0.0, kappa = 2.0;
    bool pgm = false;

    auto* g_ex1 = gen->add_subcommand("example1", "m = 30n, r = n/2, kappa = n/10 synthetic preset");
    g_ex1->add_option("--n", gen_n, "Columns")->capture_default_str();
    g_ex1->add_option("--delta", delta, "Noise level")->capture_default_str();
    auto* g_udv = gen->add_subcommand("udv", "Synthetic A = U D V^T");
    g_udv->add_option("--m", gen_m, "Rows")->required();
    g_udv->add_option("--n", gen_n, "Columns")->required();
    g_udv->add_option("--rank", gen_rank, "Rank")->required();
    g_udv->add_option("--kappa", kappa, "Condition bound")->capture_default_str();
    g_udv->add_option("--delta", delta, "Noise level")->capture_default_str();
    auto* g_tomo = gen->add_subcommand("tomo", "Parallel-beam tomography with a disk phantom");
    g_tomo->add_option("--N", grid, "Grid size")->capture_default_str();
    g_tomo->add_option("--angles", angles, "Number of angles")->capture_default_str();
    g_tomo->add_option("--rays", rays, "Rays per angle")->capture_default_str();
    g_tomo->add_flag("--pgm", pgm, "Also write phantom.pgm");
    for (auto* sub : {g_ex1, g_udv, g_tomo}) {
        sub->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
        sub->add_option("--out", out_dir, "Output directory")->required();
    }

    // solve
    auto* solve = app.add_subcommand("solve", "Run one method once");
    InputOpts s_in;
    SolverOpts s_opts;
    std::string s_method = "ermr", s_out, s_xout, s_pgm;
    std::uint64_t s_trial = 0;
    s_in.add(solve);
    s_opts.add(solve);
    solve->add_option("--method", s_method, "rmr | rmr_homogeneous | ermr | cyclic_extended | rek | gek | reabk")
        ->capture_default_str();
    solve->add_option("--trial", s_trial, "Trial substream")->capture_default_str();
    solve->add_option("--out", s_out, "Trace CSV path")->required();
    solve->add_option("--x-out", s_xout, "Write final x (one column per right-hand side)");
    solve->add_option("--pgm", s_pgm, "Write the reconstruction as PGM (tomography instances)");

    // bench
    auto* bench = app.add_subcommand("bench", "Run several methods over many trials");
    InputOpts b_in;
    SolverOpts b_opts;
    std::string b_methods = "rmr,ermr", b_out, b_trace_dir;
    std::size_t trials = 10;
    b_in.add(bench);
    b_opts.add(bench);
    bench->add_option("--methods", b_methods, "Comma-separated method list")->capture_default_str();
    bench->add_option("--trials", trials, "Trials per method")->capture_default_str();
    bench->add_option("--out", b_out, "Ensemble CSV path")->required();
    bench->add_option("--trace-dir", b_trace_dir, "Also write every trial's trace here");

    // rates
    auto* rates = app.add_subcommand("rates", "Print convergence constants");
    InputOpts r_in;
    std::size_t r_tau_rows = 0, r_tau_cols = 0;
    std::optional<double> r_eps, r_beta;
    r_in.add(rates);
    rates->add_option("--tau-rows", r_tau_rows, "Row block size");
    rates->add_option("--tau-cols", r_tau_cols, "Column block size");
    rates->add_option("--epsilon", r_eps, "Target squared error for the iteration bound");
    rates->add_option("--beta", r_beta, "Confidence for the iteration bound");

    // lemmas
    auto* lemmas = app.add_subcommand("lemmas", "Check the singular-value inequalities on random vectors");
    InputOpts l_in;
    std::size_t l_trials = 100;
    std::uint64_t l_seed = 0;
    l_in.add(lemmas);
    lemmas->add_option("--trials", l_trials, "Trials per inequality")->capture_default_str();
    lemmas->add_option("--seed", l_seed, "Random seed")->capture_default_str();

    std::string config_file;
    for (auto* sub : {g_ex1, g_udv, g_tomo, solve, bench, rates, lemmas})
        sub->add_option("--config", config_file, "key=value file; command-line flags take precedence")
            ->check(CLI::ExistingFile);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        if (!rev.empty()) rev.pop_back();
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return 1;
    }

    try {
        if (!config_file.empty())
            for (auto* sub : {g_ex1, g_udv, g_tomo, solve, bench, rates, lemmas})
                if (sub->parsed()) apply_config(sub, config_file);

        if (gen->parsed()) {
            ProblemInstance inst;
            if (g_ex1->parsed()) {
                inst = example1(gen_n, delta, gen_seed);
            } else if (g_udv->parsed()) {
                inst.a = synthetic_udv(gen_m, gen_n, gen_rank, kappa, gen_seed);
                NoisyRhs rhs = noisy_rhs(inst.a, delta, gen_seed);
                inst.b = std::move(rhs.b);
                inst.x_star = std::move(rhs.x_star);
                inst.b_n_norm = delta;
                inst.descriptor = {{"generator", "udv"}, {"m", gen_m},     {"n", gen_n},       {"rank", gen_rank},
                                   {"kappa", kappa},     {"delta", delta}, {"seed", gen_seed}};
            } else {
                inst = tomography(grid, angles, rays, gen_seed);
            }
            write_instance(inst, out_dir);
            if (pgm) write_pgm(*inst.x_star, grid, grid, fs::path(out_dir) / "phantom.pgm");
            out << "wrote " << out_dir << " (" << inst.a.rows() << " x " << inst.a.cols() << ")\n";
            return 0;
        }

        if (solve->parsed()) {
            const Loaded l = load(s_in, true);
            const SolverConfig cfg = s_opts.config(parse_method(s_method), l.descriptor);
            const nlohmann::json rj =
                s_opts.no_rates ? nlohmann::json(nullptr) : rates_json(l.a, cfg.tau_rows, cfg.tau_cols);
            std::vector<std::vector<double>> xs;
            for (std::size_t j = 0; j < l.rhs.size(); ++j) {
                SolverSession session(cfg, l.a, l.rhs[j]);
                std::optional<std::span<const double>> oracle;
                if (l.xstar[j]) oracle = std::span<const double>(*l.xstar[j]);
                RunTrace tr = session.run(s_trial, oracle);
                tr.metadata["instance"] = l.descriptor;
                tr.metadata["rates"] = rj;
                tr.metadata["rhs_column"] = j;
                const fs::path p = indexed(s_out, j, l.rhs.size());
                write_trace(tr, p);
                out << p.string() << ": " << to_string(tr.stop) << " after " << tr.iterations << " iterations";
                if (!tr.rows.empty() && tr.rows.back().rse) out << ", rse " << format_double(*tr.rows.back().rse);
                out << '\n';
                xs.push_back(std::move(tr.x));
            }
            if (!s_xout.empty()) write_columns_csv(xs, s_xout);
            if (!s_pgm.empty()) {
                if (!l.descriptor.contains("N")) throw UsageError("--pgm needs a tomography instance");
                const auto n = l.descriptor["N"].get<std::size_t>();
                write_pgm(xs.front(), n, n, s_pgm);
            }
            return 0;
        }

        if (bench->parsed()) {
            const Loaded l = load(b_in, true);
            if (l.rhs.size() != 1) throw UsageError("bench takes a single right-hand side");
            if (trials == 0) throw UsageError("--trials must be positive");
            std::optional<std::span<const double>> oracle;
            if (l.xstar[0]) oracle = std::span<const double>(*l.xstar[0]);
            if (!b_trace_dir.empty()) fs::create_directories(b_trace_dir);
            std::vector<TrialEnsemble> ens;
            for (const std::string& name : split_list(b_methods)) {
                const Method m = parse_method(name);
                const SolverConfig cfg = b_opts.config(m, l.descriptor);
                const nlohmann::json rj =
                    b_opts.no_rates ? nlohmann::json(nullptr) : rates_json(l.a, cfg.tau_rows, cfg.tau_cols);
                SolverSession session(cfg, l.a, l.rhs[0]);
                std::vector<RunTrace> traces = run_trials(session, trials, oracle);
                for (std::size_t t = 0; t < traces.size(); ++t) {
                    traces[t].metadata["instance"] = l.descriptor;
                    traces[t].metadata["rates"] = rj;
                    if (!b_trace_dir.empty())
                        write_trace(traces[t], fs::path(b_trace_dir) / (name + "_trial" + std::to_string(t) + ".csv"));
                }
                ens.push_back(aggregate(std::move(traces), name));
                out << name << ": " << trials << " trials\n";
            }
            if (ens.empty()) throw UsageError("--methods is empty");
            write_ensemble(ens, b_out);
            return 0;
        }

        if (rates->parsed()) {
            const Loaded l = load(r_in, false);
            const std::size_t def = l.descriptor.contains("tau") ? l.descriptor["tau"].get<std::size_t>() : 1;
            const std::size_t tr = r_tau_rows ? r_tau_rows : def, tc = r_tau_cols ? r_tau_cols : def;
            const Partition rows = attach_norms(contiguous_partition(l.a.rows(), tr), l.a, Axis::rows);
            const Partition cols = attach_norms(contiguous_partition(l.a.cols(), tc), l.a, Axis::cols);
            const theory::RateReport rep = theory::convergence_rates(l.a, rows, cols);
            nlohmann::json j = rep.to_json();
            if (r_eps || r_beta) {
                if (!(r_eps && r_beta)) throw UsageError("--epsilon and --beta go together");
                if (l.rhs.empty()) throw UsageError("the iteration bound needs a right-hand side");
                // x0 = 0, y0 = b: ||x0 - x*||^2 = ||x*||^2 and ||y0 - b_N||^2 = ||b_R||^2
                const SvdFactor svd = thin_svd(l.a);
                const std::vector<double> xs = theory::min_norm_lsq(svd, l.rhs[0]);
                const auto split = theory::range_null_split(svd, l.rhs[0]);
                const double omega = theory::omega_constant(rep, norm_sq(xs), norm_sq(split.range), rep.s, rep.frob_sq);
                j["omega"] = omega;
                j["iteration_bound"] = theory::iteration_bound(rep.rho(), omega, *r_eps, *r_beta);
            }
            write_json(out, j);
            return 0;
        }

        if (lemmas->parsed()) {
            const Loaded l = load(l_in, false);
            RngStream rng(l_seed, 0);
            write_json(out, theory::lemma_checks(l.a, l_trials, rng).to_json());
            return 0;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    } catch (const UnsupportedCase& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

int cli_main(int argc, char** argv)
{
    return cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace rowsolve
