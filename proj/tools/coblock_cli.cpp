// Command-line front end: sampling, model fitting, and the
// convergence-rate verification suites.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "coblock/bench.hpp"
#include "coblock/estimators.hpp"
#include "coblock/graphon.hpp"
#include "coblock/population.hpp"
#include "coblock/rng.hpp"

using namespace coblock;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    int jobs = 1;
};

ExperimentConfig resolve_config(const GlobalOpts& g) {
    ExperimentConfig cfg =
        g.config_path.empty() ? parse_config("") : load_config(g.config_path);
    if (g.seed_set) cfg.master_seed = g.seed;
    if (!g.out.empty()) cfg.out = g.out;
    return cfg;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + p.string());
    out << s;
}

std::string matrix_csv(const Eigen::MatrixXd& M) {
    std::ostringstream s;
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) s << ',';
            s << format_g17(M(i, j));
        }
        s << '\n';
    }
    return s.str();
}

void report_result(const RateResult& res, const ExperimentConfig& cfg,
                   const char* label) {
    emit_report(res, cfg.out);
    std::cout << label << ": " << res.rows.size() << " rows -> " << cfg.out << "\n";
    std::cout << "per-n medians of per-rep maxima (lower bound on the sup):\n";
    for (size_t i = 0; i < res.ns.size(); ++i)
        std::cout << "  n=" << res.ns[i] << "  " << format_g17(res.per_n_median[i])
                  << "\n";
    std::cout << "fitted slope " << format_g17(res.slope) << " (stderr "
              << format_g17(res.slope_stderr) << "), wall "
              << static_cast<long long>(res.wall_ms) << " ms\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"step-graphon co-clustering toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "config file (key = value lines)");
    auto* seed_opt = app.add_option("--seed", g.seed, "master seed override");
    app.add_option("--out", g.out, "output directory override");
    app.add_option("--jobs", g.jobs, "worker thread count")->check(CLI::PositiveNumber);

    auto* cmd_sample = app.add_subcommand("sample", "draw one bipartite sample");
    auto* cmd_fit = app.add_subcommand("fit", "fit the configured model family");
    auto* cmd_th1 = app.add_subcommand("verify-th1", "block estimation-error rate suite");
    auto* cmd_th2 = app.add_subcommand("verify-th2", "centered risk-gap rate suite");
    auto* cmd_lem = app.add_subcommand("lemma-suite", "block concentration rate suite");
    auto* cmd_rep = app.add_subcommand("report", "rebuild summary.csv and rate.svg");
    std::string results_path;
    cmd_rep->add_option("--results", results_path, "existing results.csv");

    try {
        app.parse(argc, argv);
        g.seed_set = seed_opt->count() > 0;
        const ExperimentConfig cfg = resolve_config(g);

        if (*cmd_sample) {
            const int n = cfg.n_grid.front();
            const int m = std::max(1, static_cast<int>(std::llround(cfg.ratio * n)));
            const BipartiteSample s = sample_bipartite(cfg.graphon, m, n, cfg.master_seed);
            std::filesystem::create_directories(cfg.out);
            const std::filesystem::path base(cfg.out);
            write_text(base / "graphon.txt", write_step_graphon(cfg.graphon));
            std::ostringstream xs, ys;
            for (double v : s.x) xs << format_g17(v) << '\n';
            for (double v : s.y) ys << format_g17(v) << '\n';
            write_text(base / "x.txt", xs.str());
            write_text(base / "y.txt", ys.str());
            write_text(base / "A.csv", matrix_csv(s.A));
            write_text(base / "W.csv", matrix_csv(s.W));
            std::cout << "sample " << m << "x" << n << " -> " << cfg.out << "\n";
        } else if (*cmd_fit) {
            const int n = cfg.n_grid.front();
            const int m = std::max(1, static_cast<int>(std::llround(cfg.ratio * n)));
            const BipartiteSample s = sample_bipartite(cfg.graphon, m, n, cfg.master_seed);
            std::vector<double> trace;
            if (cfg.family == 1) {
                const CoClusterLabels init =
                    spectral_cocluster(s.A, cfg.K, derive_seed(cfg.master_seed, {9}));
                const BlockmodelFit fit = fit_blockmodel_als(s.A, cfg.K, init, 50);
                trace = fit.risk_trace;
                std::filesystem::create_directories(cfg.out);
                write_text(std::filesystem::path(cfg.out) / "theta.csv",
                           matrix_csv(fit.theta));
            } else {
                const DotProductFit fit = fit_dot_product_model(
                    s.A, cfg.K, cfg.d, model_family_from_int(cfg.family),
                    derive_seed(cfg.master_seed, {9}), 50);
                trace = fit.risk_trace;
                std::filesystem::create_directories(cfg.out);
                write_text(std::filesystem::path(cfg.out) / "theta.csv",
                           matrix_csv(fit.theta));
            }
            std::cout << "risk trace:";
            for (double r : trace) std::cout << ' ' << format_g17(r);
            std::cout << "\n";
        } else if (*cmd_th1) {
            report_result(run_theorem1_experiment(cfg, g.jobs), cfg, "verify-th1");
        } else if (*cmd_th2) {
            report_result(run_theorem2_experiment(cfg, g.jobs), cfg, "verify-th2");
        } else if (*cmd_lem) {
            report_result(run_lemma1_experiment(cfg, g.jobs), cfg, "lemma-suite");
        } else if (*cmd_rep) {
            const std::string path = results_path.empty()
                                         ? (std::filesystem::path(cfg.out) / "results.csv").string()
                                         : results_path;
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open: " + path);
            std::ostringstream buf;
            buf << in.rdbuf();
            const RateResult res = summarize_rows(parse_results_csv(buf.str()));
            emit_report(res, cfg.out);
            std::cout << "report: " << res.rows.size() << " rows, slope "
                      << format_g17(res.slope) << " -> " << cfg.out << "\n";
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
