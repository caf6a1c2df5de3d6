#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rowsolve/cli.hpp"
#include "rowsolve/errors.hpp"
#include "rowsolve/harness.hpp"
#include "rowsolve/problems.hpp"
#include "test_util.hpp"

using namespace rowsolve;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("rowsolve_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

RunTrace make_trace(std::size_t stride, std::vector<std::pair<std::size_t, double>> rows)
{
    RunTrace t;
    t.metadata["config"]["trace_stride"] = stride;
    for (const auto& [k, v] : rows) {
        TraceRow r;
        r.k = k;
        r.rse = v;
        r.residual = 10.0 * v;
        t.rows.push_back(r);
    }
    return t;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr)
{
    args.insert(args.begin(), "rowsolve");
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST(TraceIo, EmptyTraceIsHeaderOnly)
{
    const fs::path dir = scratch_dir("empty");
    RunTrace t;
    t.metadata["method"] = "ermr";
    write_trace(t, dir / "t.csv");
    EXPECT_EQ(slurp(dir / "t.csv"), "k,elapsed_ns,rse,residual,skips\n");
    EXPECT_TRUE(fs::exists(meta_path(dir / "t.csv")));
    const RunTrace r = read_trace(dir / "t.csv");
    EXPECT_TRUE(r.rows.empty());
    EXPECT_EQ(r.metadata["method"], "ermr");
    fs::remove_all(dir);
}

TEST(TraceIo, AbsentRseIsEmptyField)
{
    const fs::path dir = scratch_dir("absent");
    RunTrace t;
    TraceRow row;
    row.k = 100;
    row.elapsed_ns = 5;
    row.residual = 0.25;
    t.rows.push_back(row);
    write_trace(t, dir / "t.csv");
    EXPECT_EQ(slurp(dir / "t.csv"), "k,elapsed_ns,rse,residual,skips\n100,5,,0.25,0\n");
    const RunTrace r = read_trace(dir / "t.csv");
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_FALSE(r.rows[0].rse.has_value());
    fs::remove_all(dir);
}

TEST(TraceIo, RoundTripIsExact)
{
    const fs::path dir = scratch_dir("roundtrip");
    std::mt19937_64 gen(1);
    const auto a = MatrixStore::from_eigen(testutil::gaussian(30, 6, gen));
    const std::vector<double> b = testutil::to_std(testutil::gaussian_vec(30, gen));
    const std::vector<double> xs(6, 0.1);
    SolverConfig c;
    c.max_iters = 420;
    c.trace_stride = 20;
    const RunTrace t = run(c, a, b, std::span<const double>(xs));
    write_trace(t, dir / "t.csv");
    const RunTrace r = read_trace(dir / "t.csv");
    EXPECT_EQ(r.rows, t.rows);
    EXPECT_EQ(r.stride(), 20u);
    EXPECT_EQ(r.metadata["method"], "ermr");
    EXPECT_EQ(r.metadata["stop"], "max_iters");
    fs::remove_all(dir);
}

TEST(TraceIo, MalformedRowsReportLine)
{
    const fs::path dir = scratch_dir("malformed");
    std::ofstream(dir / "t.csv") << "k,elapsed_ns,rse,residual,skips\n1,2,3,4,0\n2,x,3,4,0\n";
    try {
        read_trace(dir / "t.csv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    std::ofstream(dir / "h.csv") << "k,rse\n";
    EXPECT_THROW(read_trace(dir / "h.csv"), ParseError);
    fs::remove_all(dir);
}

TEST(FormatDouble, ShortestRoundTrip)
{
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1e-300), "1e-300");
    for (double v : {1.0 / 3.0, 2.5e-17, -7.25, 123456789.0}) EXPECT_EQ(parse_double(format_double(v)), v);
    EXPECT_TRUE(std::isnan(parse_double(format_double(std::nan("")))));
}

TEST(OrderStats, Examples)
{
    const Stats s = order_stats({1.0, 2.0, 3.0});
    EXPECT_EQ(s.median, 2.0);
    EXPECT_EQ(s.min, 1.0);
    EXPECT_EQ(s.max, 3.0);
    EXPECT_EQ(order_stats({4.0, 1.0, 3.0, 2.0}).median, 2.5);
    EXPECT_EQ(order_stats({7.0}).median, 7.0);
}

TEST(Aggregate, ThreeTrials)
{
    std::vector<RunTrace> ts{make_trace(1, {{1, 1.0}}), make_trace(1, {{1, 2.0}}), make_trace(1, {{1, 3.0}})};
    const TrialEnsemble e = aggregate(ts, "ermr");
    ASSERT_EQ(e.rows.size(), 1u);
    EXPECT_EQ(e.trials, 3u);
    EXPECT_EQ(e.rows[0].rse->median, 2.0);
    EXPECT_EQ(e.rows[0].rse->min, 1.0);
    EXPECT_EQ(e.rows[0].rse->max, 3.0);
    EXPECT_EQ(e.rows[0].residual.median, 20.0);
}

TEST(Aggregate, EarlyStopCarriedForward)
{
    std::vector<RunTrace> ts{make_trace(10, {{10, 4.0}, {20, 1.0}, {30, 0.5}}), make_trace(10, {{10, 2.0}, {13, 1e-9}})};
    const TrialEnsemble e = aggregate(ts, "ermr");
    std::vector<std::size_t> ks;
    for (const auto& r : e.rows) ks.push_back(r.k);
    EXPECT_EQ(ks, (std::vector<std::size_t>{10, 13, 20, 30}));
    EXPECT_EQ(e.rows[0].rse->median, 3.0);
    EXPECT_EQ(e.rows[1].rse->max, 4.0);         // first trial still at its k=10 row
    EXPECT_EQ(e.rows[3].rse->min, 1e-9);        // second trial carried forward
    EXPECT_EQ(e.argmin_median_rse(), 3u);
}

TEST(Aggregate, StrideMismatchRejected)
{
    std::vector<RunTrace> ts{make_trace(10, {{10, 1.0}}), make_trace(20, {{20, 1.0}})};
    EXPECT_THROW(aggregate(ts), UsageError);
}

TEST(EnsembleIo, RoundTrip)
{
    const fs::path dir = scratch_dir("ensemble");
    std::vector<TrialEnsemble> es;
    es.push_back(aggregate({make_trace(10, {{10, 4.0}, {20, 1.0}}), make_trace(10, {{10, 2.0}, {20, 0.25}})}, "rmr"));
    RunTrace no_rse;
    no_rse.metadata["config"]["trace_stride"] = 10;
    no_rse.rows.push_back(TraceRow{10, 0, std::nullopt, 0.5, 0});
    es.push_back(aggregate({no_rse}, "gek"));
    write_ensemble(es, dir / "e.csv");
    const std::string text = slurp(dir / "e.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "method,k,trials,rse_median,rse_min,rse_max,residual_median,residual_min,residual_max");
    const auto back = read_ensemble(dir / "e.csv");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].method, "rmr");
    EXPECT_EQ(back[0].trials, 2u);
    ASSERT_EQ(back[0].rows.size(), 2u);
    EXPECT_EQ(back[0].rows[1].rse->median, 0.625);
    EXPECT_EQ(back[1].method, "gek");
    EXPECT_FALSE(back[1].rows[0].rse.has_value());
    EXPECT_EQ(back[1].rows[0].residual.max, 0.5);
    fs::remove_all(dir);
}

TEST(RunTrials, IndependentOfWorkerCount)
{
    const ProblemInstance inst = example1(12, 0.1, 2);
    SolverConfig c;
    c.tau_rows = c.tau_cols = 4;
    c.max_iters = 500;
    c.trace_stride = 50;
    SolverSession s(c, inst.a, inst.b);
    const auto p = run_trials(s, 6, std::span<const double>(*inst.x_star), 1);
    const auto q = run_trials(s, 6, std::span<const double>(*inst.x_star), 4);
    ASSERT_EQ(p.size(), 6u);
    for (std::size_t t = 0; t < 6; ++t) {
        EXPECT_EQ(p[t].x, q[t].x);
        EXPECT_EQ(p[t].metadata["trial"], t);
        EXPECT_EQ(p[t].x, s.run(t, std::span<const double>(*inst.x_star)).x);
    }
    EXPECT_NE(p[0].x, p[1].x);
    EXPECT_GE(worker_count(), 1);
}

TEST(Cli, ExitCodes)
{
    EXPECT_EQ(run_cli({"--help"}), 0);
    EXPECT_EQ(run_cli({}), 1);
    EXPECT_EQ(run_cli({"solve", "--method", "ermr"}), 1);
    EXPECT_EQ(run_cli({"frobnicate"}), 1);

    const fs::path dir = scratch_dir("cli");
    std::ofstream(dir / "zero.mtx") << "%%MatrixMarket matrix coordinate real general\n2 2 0\n";
    std::ofstream(dir / "b.csv") << "1\n2\n";
    EXPECT_EQ(run_cli({"solve", "--matrix", (dir / "zero.mtx").string(), "--rhs", (dir / "b.csv").string(), "--out",
                       (dir / "t.csv").string()}),
              2);
    std::ofstream(dir / "bad.mtx") << "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
    EXPECT_EQ(run_cli({"solve", "--matrix", (dir / "bad.mtx").string(), "--rhs", (dir / "b.csv").string(), "--out",
                       (dir / "t.csv").string()}),
              2);
    fs::remove_all(dir);
}

TEST(Cli, GenSolveBench)
{
    const fs::path dir = scratch_dir("flow");
    ASSERT_EQ(run_cli({"gen", "example1", "--n", "12", "--delta", "0.1", "--seed", "3", "--out",
                       (dir / "inst").string()}),
              0);
    ASSERT_EQ(run_cli({"solve", "--instance", (dir / "inst").string(), "--method", "ermr", "--tau-rows", "4",
                       "--tau-cols", "4", "--max-iters", "2000", "--rse-tol", "1e-8", "--out",
                       (dir / "t.csv").string(), "--x-out", (dir / "x.csv").string()}),
              0);
    const RunTrace t = read_trace(dir / "t.csv");
    EXPECT_EQ(t.metadata["stop"], "tolerance");
    EXPECT_LE(*t.rows.back().rse, 1e-8);
    EXPECT_TRUE(t.metadata.contains("rates"));
    EXPECT_EQ(read_vector_csv(dir / "x.csv").size(), 12u);

    ASSERT_EQ(run_cli({"bench", "--instance", (dir / "inst").string(), "--methods", "rmr,ermr,gek", "--trials", "3",
                       "--max-iters", "300", "--stride", "50", "--out", (dir / "e.csv").string(), "--trace-dir",
                       (dir / "traces").string()}),
              0);
    const auto es = read_ensemble(dir / "e.csv");
    ASSERT_EQ(es.size(), 3u);
    EXPECT_EQ(es[2].method, "gek");
    EXPECT_EQ(es[0].rows.back().k, 300u);
    EXPECT_TRUE(fs::exists(dir / "traces" / "ermr_trial2.csv"));

    std::string out;
    EXPECT_EQ(run_cli({"rates", "--instance", (dir / "inst").string(), "--tau-rows", "4", "--tau-cols", "4"}, &out), 0);
    EXPECT_NE(out.find("rho"), std::string::npos);

    std::ofstream(dir / "c.ini") << "method = rmr\nmax_iters = 40\nstride = 10\n";
    ASSERT_EQ(run_cli({"solve", "--config", (dir / "c.ini").string(), "--instance", (dir / "inst").string(),
                       "--max-iters", "30", "--out", (dir / "c.csv").string()}),
              0);
    const RunTrace ct = read_trace(dir / "c.csv");
    EXPECT_EQ(ct.metadata["method"], "rmr");
    EXPECT_EQ(ct.iterations, 30u);
    std::ofstream(dir / "bad.ini") << "bogus = 1\n";
    EXPECT_EQ(run_cli({"solve", "--config", (dir / "bad.ini").string(), "--instance", (dir / "inst").string(),
                       "--out", (dir / "c.csv").string()}),
              1);
    fs::remove_all(dir);
}

TEST(Cli, MultipleRightHandSides)
{
    const fs::path dir = scratch_dir("multi");
    std::ofstream(dir / "a.mtx") << "%%MatrixMarket matrix array real general\n3 2\n1\n0\n1\n0\n1\n1\n";
    std::ofstream(dir / "b.csv") << "1,2\n1,0\n2,2\n";
    ASSERT_EQ(run_cli({"solve", "--matrix", (dir / "a.mtx").string(), "--rhs", (dir / "b.csv").string(), "--tau-rows",
                       "3", "--tau-cols", "2", "--max-iters", "50", "--out", (dir / "t.csv").string()}),
              0);
    const RunTrace t1 = read_trace(dir / "t.rhs1.csv");
    EXPECT_EQ(t1.metadata["rhs_column"], 1);
    EXPECT_TRUE(fs::exists(dir / "t.rhs0.csv"));
    fs::remove_all(dir);
}
