#include "coblock/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "coblock/estimators.hpp"
#include "coblock/geometry.hpp"
#include "coblock/population.hpp"
#include "coblock/rng.hpp"

namespace coblock {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, char extra = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == extra || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split_list(s)) out.push_back(std::stod(tok));
    return out;
}

StepGraphon default_graphon() {
    Eigen::MatrixXd theta(4, 4);
    theta << 0.9, 0.1, 0.2, 0.3,
             0.1, 0.8, 0.3, 0.2,
             0.2, 0.3, 0.7, 0.1,
             0.3, 0.2, 0.1, 0.6;
    return blockmodel_graphon(theta);
}

// Runs fn(task) for task in [0, n_tasks) on up to `jobs` threads. Results
// must be written to preassigned slots so ordering is thread-independent.
void run_tasks(int n_tasks, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n_tasks));
    if (jobs == 1) {
        for (int t = 0; t < n_tasks; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (int w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int t = next.fetch_add(1);
                if (t >= n_tasks) return;
                try {
                    fn(t);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::vector<int> random_labels(int count, int K, SplitRng& rng) {
    std::vector<int> lab(count);
    for (int i = 0; i < count; ++i) lab[i] = static_cast<int>(rng.next_below(K));
    return lab;
}

std::vector<int> degree_quantile_labels(const Eigen::MatrixXd& A, bool rows, int K) {
    const Eigen::VectorXd deg = rows ? Eigen::VectorXd(A.rowwise().sum())
                                     : Eigen::VectorXd(A.colwise().sum().transpose());
    const int count = static_cast<int>(deg.size());
    std::vector<int> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return deg(a) < deg(b); });
    std::vector<int> lab(count);
    for (int r = 0; r < count; ++r)
        lab[order[r]] = static_cast<int>((static_cast<long long>(r) * K) / count);
    return lab;
}

// Sign patterns of the trailing singular vectors of the conditional-mean
// matrix, split at the per-column median: a labeling correlated with the
// unobserved W rather than with A.
CoClusterLabels adversarial_labels(const Eigen::MatrixXd& W, int K,
                                   std::uint64_t seed) {
    int bits = 1;
    while ((1 << bits) < K) ++bits;
    const int r = bits + 1;
    const TruncatedSvd svd = truncated_svd(W, std::min<int>(r, std::min(W.rows(), W.cols())), seed);
    auto threshold = [&](const Eigen::MatrixXd& U) {
        const int count = static_cast<int>(U.rows());
        std::vector<int> lab(count, 0);
        for (int b = 0; b < bits; ++b) {
            const int col = std::min<int>(b + 1, static_cast<int>(U.cols()) - 1);
            std::vector<double> v(count);
            for (int i = 0; i < count; ++i) v[i] = U(i, col);
            std::vector<double> sorted = v;
            std::nth_element(sorted.begin(), sorted.begin() + count / 2, sorted.end());
            const double med = sorted[count / 2];
            for (int i = 0; i < count; ++i)
                if (v[i] > med) lab[i] += (1 << b);
        }
        for (int i = 0; i < count; ++i) lab[i] %= K;
        return lab;
    };
    CoClusterLabels out;
    out.K = K;
    out.S = threshold(svd.U);
    out.T = threshold(svd.V);
    return out;
}

CoClusterLabels make_candidate(const std::string& name, const BipartiteSample& s,
                               int K, std::uint64_t seed) {
    if (name == "spectral") return spectral_cocluster(s.A, K, seed);
    if (name == "random") {
        SplitRng rng(derive_seed(seed, {7}));
        CoClusterLabels lab;
        lab.K = K;
        lab.S = random_labels(s.m(), K, rng);
        lab.T = random_labels(s.n(), K, rng);
        return lab;
    }
    if (name == "degree") {
        CoClusterLabels lab;
        lab.K = K;
        lab.S = degree_quantile_labels(s.A, true, K);
        lab.T = degree_quantile_labels(s.A, false, K);
        return lab;
    }
    if (name == "adversarial") return adversarial_labels(s.W, K, seed);
    throw std::invalid_argument("unknown candidate strategy: " + name);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

int row_count_for(const ExperimentConfig& cfg, int n) {
    return std::max(1, static_cast<int>(std::llround(cfg.ratio * n)));
}

double theorem2_epsilon(const ExperimentConfig& cfg, int n) {
    if (cfg.epsilon > 0.0) return cfg.epsilon;
    const double K = cfg.K, d = cfg.d;
    const double raw = std::pow(K * K * std::pow(std::max(d, 1.0), d / 2.0) *
                                    std::log(static_cast<double>(n)) / std::sqrt(n),
                                1.0 / (1.0 + d));
    return std::min(1.0, raw);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n_grid.empty()) throw std::invalid_argument("config: n_grid empty");
    for (size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1])
            throw std::invalid_argument("config: n_grid must be increasing");
    if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
    if (ratio <= 0.0) throw std::invalid_argument("config: ratio must be positive");
    if (K < 1) throw std::invalid_argument("config: K must be >= 1");
    if (static_cast<double>(K) > std::sqrt(static_cast<double>(n_grid.front())))
        throw std::invalid_argument("config: K exceeds sqrt(min n_grid)");
    if (family < 1 || family > 4) throw std::invalid_argument("config: family in 1..4");
    if (d < 0) throw std::invalid_argument("config: d must be >= 0");
    if (family == 1 && d != 0)
        throw std::invalid_argument("config: family 1 requires d = 0");
    if (family == 2 && d != 1)
        throw std::invalid_argument("config: family 2 requires d = 1");
    if ((family == 3 || family == 4) && d < 1)
        throw std::invalid_argument("config: families 3-4 require d >= 1");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value, got: " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    const std::string gfile = take("graphon_file");
    const std::string gvals = take("graphon_values");
    const std::string grb = take("graphon_row_breaks");
    const std::string gcb = take("graphon_col_breaks");
    if (!gfile.empty()) {
        cfg.graphon = load_step_graphon(gfile);
    } else if (!gvals.empty()) {
        std::vector<std::vector<double>> rows;
        std::string cur;
        std::istringstream rs(gvals);
        while (std::getline(rs, cur, ';')) rows.push_back(parse_doubles(cur));
        if (rows.empty() || rows[0].empty())
            throw std::invalid_argument("config: graphon_values empty");
        Eigen::MatrixXd vals(rows.size(), rows[0].size());
        for (size_t a = 0; a < rows.size(); ++a) {
            if (rows[a].size() != rows[0].size())
                throw std::invalid_argument("config: ragged graphon_values");
            for (size_t b = 0; b < rows[a].size(); ++b) vals(a, b) = rows[a][b];
        }
        std::vector<double> rb, cb;
        if (!grb.empty()) {
            rb = parse_doubles(grb);
        } else {
            for (int a = 0; a <= vals.rows(); ++a)
                rb.push_back(static_cast<double>(a) / vals.rows());
        }
        if (!gcb.empty()) {
            cb = parse_doubles(gcb);
        } else {
            for (int b = 0; b <= vals.cols(); ++b)
                cb.push_back(static_cast<double>(b) / vals.cols());
        }
        cfg.graphon = make_step_graphon(rb, cb, vals);
    } else {
        cfg.graphon = default_graphon();
    }

    if (auto v = take("n_grid"); !v.empty()) {
        cfg.n_grid.clear();
        for (const auto& tok : split_list(v)) cfg.n_grid.push_back(std::stoi(tok));
    } else {
        cfg.n_grid = {100, 200, 400, 800, 1600};
    }
    if (auto v = take("ratio"); !v.empty()) cfg.ratio = std::stod(v);
    if (auto v = take("K"); !v.empty()) cfg.K = std::stoi(v);
    if (auto v = take("d"); !v.empty()) cfg.d = std::stoi(v);
    if (auto v = take("family"); !v.empty()) cfg.family = std::stoi(v);
    if (auto v = take("reps"); !v.empty()) cfg.reps = std::stoi(v);
    if (auto v = take("master_seed"); !v.empty()) cfg.master_seed = std::stoull(v);
    if (auto v = take("candidates"); !v.empty()) cfg.candidates = split_list(v);
    if (auto v = take("epsilon"); !v.empty()) cfg.epsilon = std::stod(v);
    if (auto v = take("out"); !v.empty()) cfg.out = v;
    if (!kv.empty())
        throw std::invalid_argument("config: unknown key: " + kv.begin()->first);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::pair<double, double> fit_rate_exponent(const std::vector<double>& ns,
                                            const std::vector<double>& errs) {
    if (ns.size() != errs.size() || ns.size() < 3)
        throw std::invalid_argument("fit_rate_exponent: need >= 3 matched points");
    const int k = static_cast<int>(ns.size());
    std::vector<double> lx(k), ly(k);
    for (int i = 0; i < k; ++i) {
        if (!(ns[i] > 0.0) || !(errs[i] > 0.0))
            throw std::invalid_argument("fit_rate_exponent: nonpositive input");
        lx[i] = std::log(ns[i]);
        ly[i] = std::log(errs[i]);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < k; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    const double slope = sxy / sxx;
    double rss = 0.0;
    for (int i = 0; i < k; ++i) {
        const double r = ly[i] - my - slope * (lx[i] - mx);
        rss += r * r;
    }
    const double stderr_ = k > 2 ? std::sqrt(rss / (k - 2) / sxx) : 0.0;
    return {slope, stderr_};
}

RateResult summarize_rows(std::vector<RateRow> rows) {
    RateResult res;
    res.rows = std::move(rows);
    // Per (n, rep): max over candidates; per n: median of those maxima.
    std::map<int, std::map<int, double>> per_n_rep;
    for (const auto& r : res.rows) {
        auto& slot = per_n_rep[r.n];
        auto it = slot.find(r.rep);
        if (it == slot.end())
            slot[r.rep] = r.error;
        else
            it->second = std::max(it->second, r.error);
    }
    for (const auto& [n, reps] : per_n_rep) {
        std::vector<double> maxima;
        for (const auto& [rep, e] : reps) maxima.push_back(e);
        res.ns.push_back(n);
        res.per_n_median.push_back(std::max(median(std::move(maxima)), 1e-18));
    }
    if (res.ns.size() >= 3) {
        std::vector<double> nd(res.ns.begin(), res.ns.end());
        std::tie(res.slope, res.slope_stderr) = fit_rate_exponent(nd, res.per_n_median);
    }
    return res;
}

namespace {

struct TaskGrid {
    std::vector<std::pair<int, int>> tasks;  // (n index, rep)
};

TaskGrid make_grid(const ExperimentConfig& cfg) {
    TaskGrid g;
    for (size_t ni = 0; ni < cfg.n_grid.size(); ++ni)
        for (int rep = 0; rep < cfg.reps; ++rep)
            g.tasks.emplace_back(static_cast<int>(ni), rep);
    return g;
}

RateResult run_grid(const ExperimentConfig& cfg, int jobs,
                    const std::function<std::vector<RateRow>(int n, int rep)>& body) {
    cfg.validate();
    const auto grid = make_grid(cfg);
    std::vector<std::vector<RateRow>> slots(grid.tasks.size());
    const auto t0 = std::chrono::steady_clock::now();
    run_tasks(static_cast<int>(grid.tasks.size()), jobs, [&](int t) {
        const auto [ni, rep] = grid.tasks[t];
        slots[t] = body(cfg.n_grid[ni], rep);
    });
    std::vector<RateRow> rows;
    for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
    RateResult res = summarize_rows(std::move(rows));
    res.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    return res;
}

}  // namespace

RateResult run_theorem1_experiment(const ExperimentConfig& cfg, int jobs) {
    std::vector<std::string> cands = cfg.candidates;
    if (cands.empty()) cands = {"spectral", "random", "degree", "adversarial"};
    return run_grid(cfg, jobs, [&](int n, int rep) {
        const int m = row_count_for(cfg, n);
        const std::uint64_t rep_seed =
            derive_seed(cfg.master_seed, {1, static_cast<std::uint64_t>(n),
                                          static_cast<std::uint64_t>(rep)});
        const BipartiteSample s = sample_bipartite(cfg.graphon, m, n, rep_seed);
        std::vector<RateRow> rows;
        for (size_t ci = 0; ci < cands.size(); ++ci) {
            const std::uint64_t cand_seed = derive_seed(rep_seed, {ci + 1});
            CoClusterLabels lab;
            try {
                lab = make_candidate(cands[ci], s, cfg.K, cand_seed);
                const BlockSummary bs = block_summary(s.A, lab);
                const MatchResult col =
                    match_population_cocluster(cfg.graphon, s, lab.T, cfg.K, Side::Column);
                const MatchResult row =
                    match_population_cocluster(cfg.graphon, s, lab.S, cfg.K, Side::Row);
                const BlockedGraphon pop =
                    blocked_graphon(cfg.graphon, row.alloc, col.alloc);
                const double err = (bs.phi - pop.phi).norm() +
                                   (bs.pi_col - pop.pi_col).norm() +
                                   (bs.pi_row - pop.pi_row).norm();
                rows.push_back({"th1", n, m, rep, cands[ci], cfg.K, cfg.d, cfg.family,
                                err, 0.0});
            } catch (const std::exception& e) {
                throw std::runtime_error("th1 n=" + std::to_string(n) +
                                         " rep=" + std::to_string(rep) + " candidate=" +
                                         cands[ci] + ": " + e.what());
            }
        }
        return rows;
    });
}

namespace {

struct Th2Candidate {
    GeneralLatent row, col;
    Theta theta;
};

Th2Candidate make_th2_candidate(const std::string& name, const BipartiteSample& s,
                                const ExperimentConfig& cfg, std::uint64_t seed) {
    const ModelFamily fam = model_family_from_int(cfg.family);
    Th2Candidate c;
    if (name == "fitted") {
        if (fam == ModelFamily::Blockmodel) {
            const CoClusterLabels lab = spectral_cocluster(s.A, cfg.K, seed);
            c.row = latent_from_labels(lab.S, cfg.K);
            c.col = latent_from_labels(lab.T, cfg.K);
            c.theta = block_summary(s.A, lab).theta_hat;
        } else {
            const DotProductFit fit =
                fit_dot_product_model(s.A, cfg.K, cfg.d, fam, seed, 6);
            c.row = fit.row;
            c.col = fit.col;
            c.theta = fit.theta;
        }
        return c;
    }
    if (name == "random") {
        SplitRng rng(derive_seed(seed, {11}));
        c.row.K = c.col.K = cfg.K;
        c.row.d = c.col.d = cfg.d;
        c.row.labels = random_labels(s.m(), cfg.K, rng);
        c.col.labels = random_labels(s.n(), cfg.K, rng);
        c.row.vectors.resize(s.m(), cfg.d);
        c.col.vectors.resize(s.n(), cfg.d);
        for (int i = 0; i < s.m(); ++i) {
            Eigen::VectorXd v(cfg.d);
            for (int k = 0; k < cfg.d; ++k) v(k) = rng.next_double();
            c.row.vectors.row(i) = project_to_domain(v).transpose();
        }
        for (int j = 0; j < s.n(); ++j) {
            Eigen::VectorXd v(cfg.d);
            for (int k = 0; k < cfg.d; ++k) v(k) = rng.next_double();
            c.col.vectors.row(j) = project_to_domain(v).transpose();
        }
        c.theta.resize(cfg.K, cfg.K);
        for (int u = 0; u < cfg.K; ++u)
            for (int v = 0; v < cfg.K; ++v) c.theta(u, v) = rng.next_double();
        if (fam == ModelFamily::DotProduct) c.theta = Eigen::MatrixXd::Ones(1, 1);
        return c;
    }
    throw std::invalid_argument("unknown candidate strategy: " + name);
}

}  // namespace

RateResult run_theorem2_experiment(const ExperimentConfig& cfg, int jobs) {
    if (cfg.d > 2) throw std::invalid_argument("run_theorem2_experiment: d <= 2");
    if (cfg.family == 3)
        throw std::invalid_argument("run_theorem2_experiment: family in {1,2,4}");
    const ModelFamily fam = model_family_from_int(cfg.family);
    std::vector<std::string> cands = cfg.candidates;
    if (cands.empty()) cands = {"fitted", "random"};
    return run_grid(cfg, jobs, [&](int n, int rep) {
        const int m = row_count_for(cfg, n);
        const std::uint64_t rep_seed =
            derive_seed(cfg.master_seed, {2, static_cast<std::uint64_t>(n),
                                          static_cast<std::uint64_t>(rep)});
        const BipartiteSample s = sample_bipartite(cfg.graphon, m, n, rep_seed);
        const CenteringConstants cc = centering_constants(s, cfg.graphon);
        const double eps = theorem2_epsilon(cfg, n);
        std::vector<RateRow> rows;
        for (size_t ci = 0; ci < cands.size(); ++ci) {
            const std::uint64_t cand_seed = derive_seed(rep_seed, {ci + 1});
            try {
                const Th2Candidate c = make_th2_candidate(cands[ci], s, cfg, cand_seed);
                const double r_a = empirical_risk(s.A, c.row, c.col, c.theta, fam);
                double err;
                if (cfg.d == 0) {
                    // No latent vectors: match directly over the K labels.
                    const MatchResult mcol = match_population_cocluster(
                        cfg.graphon, s, c.col.labels, cfg.K, Side::Column);
                    const auto pieces = realize_partition(mcol.alloc);
                    std::vector<double> breaks;
                    std::vector<int> plabels;
                    for (const auto& p : pieces) {
                        breaks.push_back(p.lo);
                        plabels.push_back(p.label);
                    }
                    breaks.push_back(1.0);
                    PopulationLatentMap tau{breaks, plabels,
                                            Eigen::MatrixXd(plabels.size(), 0), cfg.K, 0};
                    const double r_w = population_risk_mixed(cfg.graphon, s.x, c.row,
                                                             tau, c.theta, fam);
                    err = std::abs(r_a - r_w - cc.c1 - cc.c2);
                } else {
                    const EpsilonCover cover = epsilon_cover(cfg.d, eps);
                    const int nc = cover.size();
                    const QuantizedLatent qcol = quantize_latents_indexed(c.col, cover);
                    std::vector<int> col_class(s.n());
                    for (int j = 0; j < s.n(); ++j)
                        col_class[j] = qcol.latent.labels[j] * nc + qcol.cover_index[j];
                    const int kbar = cfg.K * nc;
                    const MatchResult mcol = match_population_cocluster(
                        cfg.graphon, s, col_class, kbar, Side::Column);
                    const auto pieces = realize_partition(mcol.alloc);
                    std::vector<double> breaks;
                    std::vector<int> plabels;
                    Eigen::MatrixXd pvecs(pieces.size(), cfg.d);
                    for (size_t p = 0; p < pieces.size(); ++p) {
                        breaks.push_back(pieces[p].lo);
                        plabels.push_back(pieces[p].label / nc);
                        pvecs.row(p) = cover.points.row(pieces[p].label % nc);
                    }
                    breaks.push_back(1.0);
                    PopulationLatentMap tau{breaks, plabels, pvecs, cfg.K, cfg.d};
                    const double r_w = population_risk_mixed(cfg.graphon, s.x, c.row,
                                                             tau, c.theta, fam);
                    const double psi = psi_cdf_distance(latent_distribution(c.col),
                                                        latent_distribution(tau), 16);
                    err = std::abs(r_a - r_w - cc.c1 - cc.c2) +
                          psi / (static_cast<double>(cfg.K) * cfg.d);
                }
                rows.push_back({"th2", n, m, rep, cands[ci], cfg.K, cfg.d, cfg.family,
                                err, 0.0});
            } catch (const std::exception& e) {
                throw std::runtime_error("th2 n=" + std::to_string(n) +
                                         " rep=" + std::to_string(rep) + " candidate=" +
                                         cands[ci] + ": " + e.what());
            }
        }
        return rows;
    });
}

RateResult run_lemma1_experiment(const ExperimentConfig& cfg, int jobs) {
    const int n_candidates = 200;
    return run_grid(cfg, jobs, [&](int n, int rep) {
        const int m = row_count_for(cfg, n);
        const std::uint64_t rep_seed =
            derive_seed(cfg.master_seed, {3, static_cast<std::uint64_t>(n),
                                          static_cast<std::uint64_t>(rep)});
        const BipartiteSample s = sample_bipartite(cfg.graphon, m, n, rep_seed);
        double worst = 0.0;
        for (int c = 0; c < n_candidates; ++c) {
            SplitRng rng(derive_seed(rep_seed, {static_cast<std::uint64_t>(c) + 1}));
            CoClusterLabels lab;
            lab.K = cfg.K;
            lab.S = random_labels(m, cfg.K, rng);
            lab.T = random_labels(n, cfg.K, rng);
            const Eigen::MatrixXd phi_a = block_summary(s.A, lab).phi;
            const Eigen::MatrixXd phi_w = block_summary(s.W, lab).phi;
            worst = std::max(worst, (phi_a - phi_w).squaredNorm());
        }
        return std::vector<RateRow>{{"lemma1", n, m, rep, "max200", cfg.K, cfg.d,
                                     cfg.family, worst, 0.0}};
    });
}

std::string write_results_csv(const std::vector<RateRow>& rows) {
    std::ostringstream out;
    out << "experiment,n,m,rep,candidate,K,d,family,error,runtime_ms\n";
    for (const auto& r : rows)
        out << r.experiment << ',' << r.n << ',' << r.m << ',' << r.rep << ','
            << r.candidate << ',' << r.K << ',' << r.d << ',' << r.family << ','
            << format_g17(r.error) << ',' << format_g17(r.runtime_ms) << '\n';
    return out.str();
}

std::vector<RateRow> parse_results_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) ||
        trim(line) != "experiment,n,m,rep,candidate,K,d,family,error,runtime_ms")
        throw std::invalid_argument("results csv: bad header");
    std::vector<RateRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        std::istringstream ls(line);
        while (std::getline(ls, cur, ',')) f.push_back(cur);
        if (f.size() != 10) throw std::invalid_argument("results csv: bad row: " + line);
        rows.push_back({f[0], std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), f[4],
                        std::stoi(f[5]), std::stoi(f[6]), std::stoi(f[7]),
                        std::stod(f[8]), std::stod(f[9])});
    }
    return rows;
}

namespace {

std::string render_svg(const RateResult& res) {
    const double W = 640, H = 480, L = 70, R = 20, T = 20, B = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : res.rows) {
        if (!(r.error > 0.0)) continue;
        const double lx = std::log10(static_cast<double>(r.n));
        const double ly = std::log10(r.error);
        pts.emplace_back(lx, ly);
        xmin = std::min(xmin, lx);
        xmax = std::max(xmax, lx);
        ymin = std::min(ymin, ly);
        ymax = std::max(ymax, ly);
    }
    if (pts.empty()) return "";
    if (xmax - xmin < 1e-9) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-9) ymax = ymin + 1.0;
    auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
      << H << "\">\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
      << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
      << H - B << "\" stroke=\"black\"/>\n";
    for (const auto& [lx, ly] : pts)
        s << "<circle cx=\"" << px(lx) << "\" cy=\"" << py(ly)
          << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
    if (res.ns.size() >= 3) {
        // Fitted line through the per-n medians in natural-log space.
        double mx = 0.0, my = 0.0;
        for (size_t i = 0; i < res.ns.size(); ++i) {
            mx += std::log(static_cast<double>(res.ns[i]));
            my += std::log(res.per_n_median[i]);
        }
        mx /= res.ns.size();
        my /= res.ns.size();
        auto fit_ly = [&](double lx10) {
            const double lnx = lx10 * std::log(10.0);
            return (my + res.slope * (lnx - mx)) / std::log(10.0);
        };
        s << "<line x1=\"" << px(xmin) << "\" y1=\"" << py(fit_ly(xmin)) << "\" x2=\""
          << px(xmax) << "\" y2=\"" << py(fit_ly(xmax))
          << "\" stroke=\"crimson\" stroke-width=\"2\"/>\n";
    }
    s << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 12)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << "log10 n</text>\n";
    s << "<text x=\"18\" y=\"" << (H / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
      << "transform=\"rotate(-90 18 " << (H / 2) << ")\">log10 error</text>\n";
    s << "<text x=\"" << (W - R) << "\" y=\"" << (T + 14)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"13\">slope "
      << format_g17(res.slope) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + p.string());
    out << content;
}

}  // namespace

void emit_report(const RateResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_file(base / "results.csv", write_results_csv(result.rows));

    std::ostringstream sum;
    sum << "n,median_error\n";
    for (size_t i = 0; i < result.ns.size(); ++i)
        sum << result.ns[i] << ',' << format_g17(result.per_n_median[i]) << '\n';
    sum << "slope," << format_g17(result.slope) << '\n';
    sum << "slope_stderr," << format_g17(result.slope_stderr) << '\n';
    write_file(base / "summary.csv", sum.str());

    const std::string svg = render_svg(result);
    if (!svg.empty()) write_file(base / "rate.svg", svg);
}

}  // namespace coblock
