#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "relaybuf/experiments.hpp"
#include "relaybuf/performance.hpp"

using namespace relaybuf;

namespace {

SystemParams paper_base() {
    SystemParams p;
    p.geometry = {1.0, 3.0, 4.0};
    p.alpha = 3.0;
    p.noise_power = 1e-4;
    p.source_power = 1e-4 * db_to_linear(25.0);
    p.rate_bpcu = 1.5;
    p.harvest_mean = 0.1;
    p.buffer = {BufferSpec::Kind::StabilityFactor, 1.1};
    p.mode = SignallingMode::Incremental;
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("git_blob_sha1 matches git's object ids") {
    // $ printf abc | git hash-object --stdin
    CHECK(git_blob_sha1("abc") == "f2ba8f84ab5c1bce84a7b441cb1959cfc7093b7f");
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("cmd_curve reproduces the snr sweep row by row") {
    SweepSpec spec;
    spec.base = paper_base();
    spec.variable = SweepVariable::SourceSnrDb;
    for (double x = 10.0; x <= 45.01; x += 2.5) spec.grid.push_back(x);
    spec.schemes = {PolicyKind::Ibep, PolicyKind::Dt};
    spec.metric = Metric::Outage;

    const CurveTable table = cmd_curve(spec);
    CHECK(table.rows.size() == 15);
    CHECK(table.labels == std::vector<std::string>{"ibep", "dt"});
    for (const CurveRow& row : table.rows) {
        // DT column is the closed form 1 - e^{-W2 Gamma} at each grid point
        SystemParams p = spec.base;
        p.source_power = p.noise_power * db_to_linear(row.x);
        const DerivedConstants c = derive_constants(p);
        CHECK(row.cells[1].has_analytic);
        CHECK(row.cells[1].analytic ==
              doctest::Approx(-std::expm1(-c.w2 * c.gamma_th)).epsilon(1e-12));
        CHECK(row.cells[0].error.empty());
    }
}

TEST_CASE("cmd_curve rejects bad specs and records per-point errors") {
    SweepSpec spec;
    spec.base = paper_base();
    spec.grid = {10.0, 20.0};
    CHECK_THROWS_AS(cmd_curve(spec), ConfigError);  // empty scheme list

    spec.schemes = {PolicyKind::Ibep};
    spec.grid = {10.0, 10.0};
    CHECK_THROWS_AS(cmd_curve(spec), ConfigError);  // not strictly monotone

    // a d_rd grid point beyond d_sd fails in-row, not globally
    spec.variable = SweepVariable::DRd;
    spec.grid = {3.0, 4.5};
    const CurveTable t = cmd_curve(spec);
    CHECK(t.rows[0].cells[0].has_analytic);
    CHECK(!t.rows[1].cells[0].has_analytic);
    CHECK(!t.rows[1].cells[0].error.empty());
}

TEST_CASE("phi sweep: IBEP and IOFP coincide on the unstable side") {
    SweepSpec spec;
    spec.base = paper_base();
    spec.variable = SweepVariable::Phi;
    for (double x = 0.5; x <= 2.001; x += 0.05) spec.grid.push_back(x);
    spec.schemes = {PolicyKind::Ibep, PolicyKind::Iofp};
    const CurveTable table = cmd_curve(spec);
    for (const CurveRow& row : table.rows) {
        if (row.x > 1.0) continue;
        CHECK(row.cells[0].analytic == row.cells[1].analytic);
    }
}

TEST_CASE("csv writer is deterministic and carries the content hash") {
    SweepSpec spec;
    spec.base = paper_base();
    spec.variable = SweepVariable::SourceSnrDb;
    spec.grid = {15.0, 25.0, 35.0};
    spec.schemes = {PolicyKind::Dt};
    const CurveTable table = cmd_curve(spec);
    const std::string a = curve_to_csv(table, true);
    const std::string b = curve_to_csv(table, true);
    CHECK(a == b);
    CHECK(a.find("# hash: ") != std::string::npos);
    CHECK(a.find("dt_analytic") != std::string::npos);
    // non-reproducible output embeds a timestamp header line
    const std::string c = curve_to_csv(table, false);
    CHECK(c.find("# generated: ") != std::string::npos);
}

TEST_CASE("optimize_rate behaves like a grid argmax") {
    const SystemParams base = paper_base();

    SUBCASE("dt optimum is locally optimal on the grid") {
        const RateOptimum r = optimize_rate(base, PolicyKind::Dt, 25.0);
        SystemParams p = base;
        p.mode = mode_of(PolicyKind::Dt);
        auto tau_at = [&](double r0) {
            p.rate_bpcu = r0;
            const DerivedConstants c = derive_constants(p);
            return throughput(c, analytic_outage(c, PolicyKind::Dt).p_out,
                              PolicyKind::Dt);
        };
        CHECK(r.tau_star >= tau_at(r.r0_star - 0.05) - 1e-15);
        CHECK(r.tau_star >= tau_at(r.r0_star + 0.05) - 1e-15);
    }

    SUBCASE("vanishing w2 pushes the optimum to the top of the grid") {
        const RateOptimum r = optimize_rate(base, PolicyKind::Dt, 200.0);
        CHECK(r.r0_star == doctest::Approx(8.0).epsilon(1e-12));
    }

    SUBCASE("incremental beats non-incremental at the optimum") {
        const RateOptimum inc = optimize_rate(base, PolicyKind::Ibep, 25.0);
        const RateOptimum ninc = optimize_rate(base, PolicyKind::Nibep, 25.0);
        CHECK(inc.tau_star >= ninc.tau_star);
    }
}

TEST_CASE("figures: analytic-only tables have the advertised shape") {
    namespace fs = std::filesystem;
    const std::string out = (fs::temp_directory_path() / "relaybuf_figtest").string();
    fs::remove_all(out);

    SUBCASE("fig4 sweeps rate over [0.1, 4.0] for all six schemes") {
        const FigureResult r = cmd_figure("fig4", out, std::nullopt, true);
        CHECK(r.table.rows.size() == 40);
        CHECK(r.table.labels.size() == 6);
        CHECK(r.table.rows.front().x == doctest::Approx(0.1));
        CHECK(r.table.rows.back().x == doctest::Approx(4.0));
        bool has_dt = false;
        for (const std::string& l : r.table.labels) has_dt = has_dt || l == "dt";
        CHECK(has_dt);
        for (const std::string& f : r.files_written) CHECK(fs::exists(f));
    }

    SUBCASE("fig5 varies d_rd with d_sd fixed") {
        const FigureResult r = cmd_figure("fig5", out, std::nullopt, true);
        CHECK(r.table.rows.front().x == doctest::Approx(0.5));
        CHECK(r.table.rows.back().x == doctest::Approx(3.5));
        // every point valid: d_sr = 4 - d_rd stays positive on this grid
        for (const CurveRow& row : r.table.rows)
            for (const CurveCell& cell : row.cells) CHECK(cell.error.empty());
    }

    SUBCASE("fig7 carries scheme x snr columns") {
        const FigureResult r = cmd_figure("fig7", out, std::nullopt, true);
        CHECK(r.table.labels.size() == 6);  // {ibep, iofp} x {25, 30, 35}
        CHECK(r.table.labels[0] == "ibep_snr25");
        for (const CurveRow& row : r.table.rows) {
            if (row.x > 1.0) continue;
            CHECK(row.cells[0].analytic == row.cells[1].analytic);
        }
    }

    SUBCASE("unknown figure name") {
        CHECK_THROWS_AS(cmd_figure("fig9", out, std::nullopt, true), ConfigError);
    }
}

TEST_CASE("fig3 reproduces the qualitative scheme orderings at high SNR") {
    namespace fs = std::filesystem;
    const std::string out = (fs::temp_directory_path() / "relaybuf_fig3test").string();
    const auto t0 = std::chrono::steady_clock::now();
    const FigureResult r = cmd_figure("fig3", out, std::nullopt, true);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs <= 5.0);  // analytic-only figure budget

    CHECK(r.table.rows.size() == 15);
    // columns: ibep iofp nibep niofp hu dt
    for (const CurveRow& row : r.table.rows) {
        if (row.x < 30.0) continue;
        const double ibep = row.cells[0].analytic;
        const double iofp = row.cells[1].analytic;
        const double hu = row.cells[4].analytic;
        const double dt = row.cells[5].analytic;
        INFO("snr_db=", row.x);
        CHECK(ibep <= iofp);  // best-effort beats on-off
        CHECK(iofp <= hu);    // buffered schemes beat harvest-use
        CHECK(hu <= dt);      // any relaying beats direct transmission
    }
}

TEST_CASE("figure sweeps reproduce the reported scheme behaviors") {
    namespace fs = std::filesystem;
    const std::string out = (fs::temp_directory_path() / "relaybuf_trend").string();

    // throughput vs rate: buffered and harvest-use coincide at tiny rates,
    // separate strongly at moderate ones, and incremental beats non-inc
    const CurveTable f4 = cmd_figure("fig4", out, std::nullopt, true).table;
    const auto& r01 = f4.rows.front();  // R0 = 0.1
    CHECK(r01.cells[0].analytic ==
          doctest::Approx(r01.cells[4].analytic).epsilon(0.01));
    const CurveRow& r15 = f4.rows[14];  // R0 = 1.5
    CHECK(r15.cells[0].analytic > r15.cells[4].analytic);  // ibep > hu
    CHECK(r15.cells[4].analytic > r15.cells[5].analytic);  // hu > dt
    CHECK(f4.rows[9].cells[0].analytic > f4.rows[9].cells[2].analytic);  // inc > ninc

    // relay placement: both architectures have an interior optimum
    const CurveTable f5 = cmd_figure("fig5", out, std::nullopt, true).table;
    for (std::size_t cidx : {0u, 4u}) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < f5.rows.size(); ++i)
            if (f5.rows[i].cells[cidx].analytic > f5.rows[best].cells[cidx].analytic)
                best = i;
        CHECK(best > 0);
        CHECK(best < f5.rows.size() - 1);
    }

    // harvest sweep: throughput nondecreasing, HU approaches the on-off
    // buffered scheme for generous harvesting
    const CurveTable f6 = cmd_figure("fig6", out, std::nullopt, true).table;
    for (std::size_t i = 1; i < f6.rows.size(); ++i)
        CHECK(f6.rows[i].cells[0].analytic >=
              f6.rows[i - 1].cells[0].analytic - 1e-12);
    const double gap_low =
        std::abs(f6.rows.front().cells[4].analytic - f6.rows.front().cells[1].analytic);
    const double gap_high =
        std::abs(f6.rows.back().cells[4].analytic - f6.rows.back().cells[1].analytic);
    CHECK(gap_high < 0.5 * gap_low);

    // optimized-rate sweep: the incremental advantage grows with SNR
    const CurveTable f8 = cmd_figure("fig8", out, std::nullopt, true).table;
    const double gap_10 =
        f8.rows.front().cells[0].analytic - f8.rows.front().cells[2].analytic;
    const double gap_45 =
        f8.rows.back().cells[0].analytic - f8.rows.back().cells[2].analytic;
    CHECK(gap_45 > gap_10 + 1.0);
}

TEST_CASE("fig2 emits pdf curves with simulated histograms") {
    namespace fs = std::filesystem;
    const std::string out = (fs::temp_directory_path() / "relaybuf_fig2test").string();
    fs::remove_all(out);
    SimSpec sim{200000, 0, 3};
    const FigureResult r = cmd_figure("fig2", out, sim, true);
    // pdf + cdf column per {policy} x {25, 35 dB}
    CHECK(r.table.labels.size() == 8);
    CHECK(r.table.labels[0] == "ibep_snr25_pdf");
    CHECK(r.table.labels[1] == "ibep_snr25_cdf");
    CHECK(r.table.with_sim);
    // IOFP pdf vanishes towards the origin while the IBEP pdf peaks there
    const CurveRow& first = r.table.rows.front();
    CHECK(first.cells[2].analytic < 0.5 * first.cells[0].analytic);
    // ... and rises towards its mode at M (M/dx ~ 1.4 at 25 dB)
    CHECK(first.cells[2].analytic < r.table.rows[1].cells[2].analytic);
    // cdf columns are monotone and end near 1
    double prev = 0.0;
    for (const CurveRow& row : r.table.rows) {
        CHECK(row.cells[1].analytic >= prev);
        prev = row.cells[1].analytic;
    }
    CHECK(prev > 0.99);
    // histogram roughly integrates to one
    double mass = 0.0;
    const double dx = r.table.rows[1].x - r.table.rows[0].x;
    for (const CurveRow& row : r.table.rows) mass += row.cells[0].sim * dx;
    CHECK(mass > 0.9);
    CHECK(mass <= 1.0 + 1e-9);
    const std::string svg = slurp(r.files_written[1]);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("thread count never changes results") {
    SweepSpec spec;
    spec.base = paper_base();
    spec.variable = SweepVariable::SourceSnrDb;
    spec.grid = {20.0, 25.0, 30.0};
    spec.schemes = {PolicyKind::Ibep, PolicyKind::Iofp, PolicyKind::Dt};
    spec.sim = SimSpec{50000, 2000, 9};

    setenv("RELAYBUF_THREADS", "1", 1);
    const CurveTable serial = cmd_curve(spec);
    unsetenv("RELAYBUF_THREADS");
    const CurveTable parallel = cmd_curve(spec);

    CHECK(serial.content_hash == parallel.content_hash);
    for (std::size_t r = 0; r < serial.rows.size(); ++r)
        for (std::size_t c = 0; c < serial.rows[r].cells.size(); ++c) {
            CHECK(serial.rows[r].cells[c].analytic ==
                  parallel.rows[r].cells[c].analytic);
            CHECK(serial.rows[r].cells[c].sim == parallel.rows[r].cells[c].sim);
        }
}

TEST_CASE("log-y svg renders decade labels and per-curve polylines") {
    SweepSpec spec;
    spec.base = paper_base();
    spec.variable = SweepVariable::SourceSnrDb;
    spec.grid = {20.0, 30.0, 40.0};
    spec.schemes = {PolicyKind::Ibep, PolicyKind::Dt};
    const CurveTable table = cmd_curve(spec);
    const std::string svg = curve_to_svg(table, "outage", true);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find(">1e") != std::string::npos);  // log-axis tick labels
    std::size_t polylines = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++polylines;
        pos += 9;
    }
    CHECK(polylines == 2);
}

TEST_CASE("fig7 with simulation is deterministic across invocations") {
    namespace fs = std::filesystem;
    const std::string out_a = (fs::temp_directory_path() / "relaybuf_f7a").string();
    const std::string out_b = (fs::temp_directory_path() / "relaybuf_f7b").string();
    const SimSpec sim{20000, 1000, 11};
    const FigureResult a = cmd_figure("fig7", out_a, sim, true);
    const FigureResult b = cmd_figure("fig7", out_b, sim, true);
    CHECK(a.table.content_hash == b.table.content_hash);
    CHECK(slurp(a.files_written[0]) == slurp(b.files_written[0]));
}

TEST_CASE("cmd_validate passes at the default scenario and reports structure") {
    const ValidationReport report = cmd_validate(paper_base(), 300000, 42);
    for (const ValidationCheck& c : report.checks) {
        INFO(c.name, " measured=", c.measured, " bound=", c.bound);
        CHECK(c.pass);
    }
    CHECK(report.all_pass());
    const std::string table = report.to_table();
    CHECK(table.find("outage_ibep") != std::string::npos);
    CHECK(table.find("overall: PASS") != std::string::npos);
}

TEST_CASE("cmd_validate switches to the unstable-branch checks for phi <= 1") {
    SystemParams p = paper_base();
    p.buffer = {BufferSpec::Kind::StabilityFactor, 0.9};
    const ValidationReport report = cmd_validate(p, 1200000, 7);
    bool saw_absorption = false, saw_ks = false;
    for (const ValidationCheck& c : report.checks) {
        if (c.name.rfind("absorption_", 0) == 0) {
            saw_absorption = true;
            CHECK(c.pass);
        }
        if (c.name.rfind("ks_", 0) == 0) saw_ks = true;
    }
    CHECK(saw_absorption);
    CHECK(!saw_ks);
}
