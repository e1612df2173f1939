#pragma once
// Configuration-driven experiment harness: convergence-rate suites for the
// block estimation error, the centered risk gap, and block concentration,
// plus rate fitting and CSV/SVG reporting.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "coblock/graphon.hpp"

namespace coblock {

struct ExperimentConfig {
    StepGraphon graphon;
    std::vector<int> n_grid;           // increasing
    double ratio = 1.0;                // m = round(ratio * n)
    int K = 2;
    int d = 0;
    int family = 1;
    int reps = 1;
    std::uint64_t master_seed = 0;
    std::vector<std::string> candidates;  // strategy names, in run order
    double epsilon = 0.0;                 // 0 = scheduled quantization epsilon
    std::string out = "out";

    void validate() const;
};

// Flat `key = value` text; '#' starts a comment. Keys: graphon_file,
// graphon_values (rows separated by ';'), graphon_row_breaks,
// graphon_col_breaks, n_grid, ratio, K, d, family, reps, master_seed,
// candidates, epsilon, out.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct RateRow {
    std::string experiment;
    int n = 0;
    int m = 0;
    int rep = 0;
    std::string candidate;
    int K = 0;
    int d = 0;
    int family = 0;
    double error = 0.0;
    double runtime_ms = 0.0;  // kept at 0 in rows so outputs are seed-deterministic

    bool operator==(const RateRow&) const = default;
};

struct RateResult {
    std::vector<RateRow> rows;           // ordered by (n, rep, candidate index)
    std::vector<int> ns;                 // distinct sizes, increasing
    std::vector<double> per_n_median;    // median over reps of per-rep max error
    double slope = 0.0;
    double slope_stderr = 0.0;
    double wall_ms = 0.0;                // measured, not part of the artifacts
};

RateResult run_theorem1_experiment(const ExperimentConfig& config, int jobs = 1);
RateResult run_theorem2_experiment(const ExperimentConfig& config, int jobs = 1);
RateResult run_lemma1_experiment(const ExperimentConfig& config, int jobs = 1);

// OLS of log(err) on log(n); needs >= 3 points and positive errors.
std::pair<double, double> fit_rate_exponent(const std::vector<double>& ns,
                                            const std::vector<double>& errs);

// Writes results.csv, summary.csv, and rate.svg under dir.
void emit_report(const RateResult& result, const std::string& dir);

std::string write_results_csv(const std::vector<RateRow>& rows);
std::vector<RateRow> parse_results_csv(const std::string& text);

// Recomputes the per-n summary (median of per-rep max) and the fitted
// slope from raw rows; used by `report` and by the runners.
RateResult summarize_rows(std::vector<RateRow> rows);

}  // namespace coblock
