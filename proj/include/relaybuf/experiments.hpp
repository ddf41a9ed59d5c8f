#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relaybuf/params.hpp"
#include "relaybuf/simkernel.hpp"

namespace relaybuf {

enum class SweepVariable { SourceSnrDb, RateBpcu, DRd, HarvestMeanDb, Phi };
enum class Metric { Outage, Throughput };

SweepVariable sweep_variable_from_string(const std::string& name);
Metric metric_from_string(const std::string& name);

struct SimSpec {
    std::uint64_t n_slots = 0;
    std::uint64_t burn_in = 0;  // 0 = auto (1e4 stable, 1e5 unstable)
    std::uint64_t seed = 1;
};

struct SweepSpec {
    SweepVariable variable = SweepVariable::SourceSnrDb;
    std::vector<double> grid;  // nonempty, strictly monotone
    std::vector<PolicyKind> schemes;
    SystemParams base;
    Metric metric = Metric::Outage;
    std::optional<SimSpec> sim;
};

struct CurveCell {
    double analytic = 0.0;
    double sim = 0.0;
    double sim_se = 0.0;
    bool has_analytic = false;
    bool has_sim = false;
    std::string error;  // per-point failure, run continues
};

struct CurveRow {
    double x = 0.0;
    std::vector<CurveCell> cells;  // one per column label
};

/// Sweep result: one cell column per curve label. For plain scheme sweeps the
/// labels are the scheme names; figure tables may carry composite labels
/// (e.g. scheme x SNR). CSV schema: x, then <label>_analytic[,_sim,_sim_se].
struct CurveTable {
    std::vector<std::string> labels;
    std::vector<CurveRow> rows;
    bool with_sim = false;
    std::string x_name = "x";
    std::string resolved_config;  // one-line JSON of the base scenario
    std::string content_hash;     // git-style SHA-1 of the data block
};

/// Evaluate a sweep. Constants are re-derived per grid point and scheme (M
/// floats when the buffer pins phi); points run in parallel with per-task RNG
/// substreams so thread count never changes results. Per-point errors are
/// recorded in-row.
CurveTable cmd_curve(const SweepSpec& spec);

/// Render a table to CSV text. The metadata header carries the resolved
/// config and content hash, plus a timestamp line unless reproducible.
std::string curve_to_csv(const CurveTable& table, bool reproducible);

/// Hash of the table's CSV data block (the value embedded in the header).
std::string curve_content_hash(const CurveTable& table);

/// Minimal SVG line chart of a table (log-y optional). Analytic columns are
/// polylines, sim columns markers.
std::string curve_to_svg(const CurveTable& table, const std::string& title, bool log_y);

struct FigureResult {
    CurveTable table;
    std::vector<std::string> files_written;
};

const std::vector<std::string>& figure_names();

/// Reproduce one of the built-in figures into out_dir (<name>.csv, <name>.svg).
/// Presets are data: embedded scenario configs using the default geometry
/// S(0,0) R(1,0) D(4,0), alpha 3, sigma^2 -40 dB, 1/lambda1 -10 dB, phi 1.1,
/// R0 1.5, SNR 25 dB, each figure overriding its swept axis.
FigureResult cmd_figure(const std::string& name, const std::string& out_dir,
                        std::optional<SimSpec> sim, bool reproducible);

struct RateOptimum {
    double r0_star = 0.0;
    double tau_star = 0.0;
};

/// Grid search R0 in [0.05, 8.0] step 0.05 maximizing throughput at the given
/// source SNR; ties break toward the smaller rate.
RateOptimum optimize_rate(const SystemParams& base, PolicyKind scheme, double snr_db);

struct ValidationCheck {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;
    bool all_pass() const;
    std::string to_table() const;
};

/// Run every applicable analytic-vs-simulation invariant at the given
/// scenario: per-scheme outage and throughput agreement within 3 standard
/// errors, slot-level throughput identity, stationary-law KS bounds (or the
/// unstable-branch absorption checks when phi <= 1), Q = -Z1, buffer-full
/// fraction, energy conservation, Lambert-W residuals, degenerate-limit
/// continuity and the qualitative scheme orderings.
ValidationReport cmd_validate(const SystemParams& params, std::uint64_t n_slots,
                              std::uint64_t seed);

/// Worker-pool size: min(hardware, RELAYBUF_THREADS when set), at least 1.
unsigned thread_pool_size();

/// Run fn(i) for i in [0, n) on the worker pool. Results must be written to
/// per-index slots; tasks may not throw (wrap and record errors internally).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Hex SHA-1 of "blob <len>\0" + content, as git computes object ids.
std::string git_blob_sha1(const std::string& content);

}  // namespace relaybuf
