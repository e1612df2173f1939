#include "coblock/graphon.hpp"
#include "coblock/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace coblock {

namespace {

int find_cell(const std::vector<double>& breaks, double v, const char* axis) {
    if (v < 0.0 || v > 1.0)
        throw std::invalid_argument(std::string("coordinate outside [0,1] on ") +
                                    axis + " axis");
    if (v >= 1.0) return static_cast<int>(breaks.size()) - 2;
    auto it = std::upper_bound(breaks.begin(), breaks.end(), v);
    return static_cast<int>(it - breaks.begin()) - 1;
}

void validate_breaks(const std::vector<double>& breaks, const char* name) {
    if (breaks.size() < 2)
        throw std::invalid_argument(std::string(name) + ": need at least 2 break points");
    if (breaks.front() != 0.0 || breaks.back() != 1.0)
        throw std::invalid_argument(std::string(name) + ": breaks must start at 0 and end at 1");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i] > breaks[i - 1]))
            throw std::invalid_argument(std::string(name) + ": breaks must be strictly increasing");
}

}  // namespace

int StepGraphon::row_cell(double x) const { return find_cell(row_breaks, x, "row"); }
int StepGraphon::col_cell(double y) const { return find_cell(col_breaks, y, "column"); }

double StepGraphon::eval(double x, double y) const {
    return values(row_cell(x), col_cell(y));
}

StepGraphon make_step_graphon(const std::vector<double>& row_breaks,
                              const std::vector<double>& col_breaks,
                              const Eigen::MatrixXd& values) {
    validate_breaks(row_breaks, "row_breaks");
    validate_breaks(col_breaks, "col_breaks");
    if (values.rows() != static_cast<Eigen::Index>(row_breaks.size()) - 1 ||
        values.cols() != static_cast<Eigen::Index>(col_breaks.size()) - 1)
        throw std::invalid_argument("values shape does not match break lists");
    for (Eigen::Index a = 0; a < values.rows(); ++a)
        for (Eigen::Index b = 0; b < values.cols(); ++b)
            if (!(values(a, b) >= 0.0 && values(a, b) <= 1.0))
                throw std::invalid_argument("graphon value outside [0,1] at cell (" +
                                            std::to_string(a) + "," + std::to_string(b) + ")");
    return StepGraphon{row_breaks, col_breaks, values};
}

StepGraphon constant_graphon(double p) {
    Eigen::MatrixXd v(1, 1);
    v(0, 0) = p;
    return make_step_graphon({0.0, 1.0}, {0.0, 1.0}, v);
}

StepGraphon blockmodel_graphon(const Eigen::MatrixXd& theta) {
    const int kr = static_cast<int>(theta.rows());
    const int kc = static_cast<int>(theta.cols());
    std::vector<double> rb(kr + 1), cb(kc + 1);
    for (int i = 0; i <= kr; ++i) rb[i] = static_cast<double>(i) / kr;
    for (int j = 0; j <= kc; ++j) cb[j] = static_cast<double>(j) / kc;
    rb.back() = 1.0;
    cb.back() = 1.0;
    return make_step_graphon(rb, cb, theta);
}

BipartiteSample sample_bipartite(const StepGraphon& g, int m, int n,
                                 std::uint64_t seed) {
    if (m < 1 || n < 1)
        throw std::invalid_argument("sample_bipartite: m and n must be >= 1");
    SplitRng root(seed);
    SplitRng rx = root.split(1), ry = root.split(2), ra = root.split(3);

    BipartiteSample s;
    s.seed = seed;
    s.x.resize(m);
    s.y.resize(n);
    for (int i = 0; i < m; ++i) s.x[i] = rx.next_double();
    for (int j = 0; j < n; ++j) s.y[j] = ry.next_double();
    s.W = conditional_mean_matrix(g, s.x, s.y);
    s.A.resize(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            s.A(i, j) = (ra.next_double() < s.W(i, j)) ? 1.0 : 0.0;
    return s;
}

Eigen::MatrixXd conditional_mean_matrix(const StepGraphon& g,
                                        const std::vector<double>& x,
                                        const std::vector<double>& y) {
    const int m = static_cast<int>(x.size());
    const int n = static_cast<int>(y.size());
    std::vector<int> xc(m), yc(n);
    for (int i = 0; i < m; ++i) xc[i] = g.row_cell(x[i]);
    for (int j = 0; j < n; ++j) yc[j] = g.col_cell(y[j]);
    Eigen::MatrixXd W(m, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) W(i, j) = g.values(xc[i], yc[j]);
    return W;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string write_step_graphon(const StepGraphon& g) {
    std::ostringstream out;
    out << "row_breaks\n";
    for (std::size_t i = 0; i < g.row_breaks.size(); ++i)
        out << format_g17(g.row_breaks[i]) << (i + 1 < g.row_breaks.size() ? ' ' : '\n');
    out << "col_breaks\n";
    for (std::size_t i = 0; i < g.col_breaks.size(); ++i)
        out << format_g17(g.col_breaks[i]) << (i + 1 < g.col_breaks.size() ? ' ' : '\n');
    out << "values\n";
    for (Eigen::Index a = 0; a < g.values.rows(); ++a)
        for (Eigen::Index b = 0; b < g.values.cols(); ++b)
            out << format_g17(g.values(a, b)) << (b + 1 < g.values.cols() ? ' ' : '\n');
    return out.str();
}

StepGraphon read_step_graphon(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::vector<double> rb, cb, vals;
    std::vector<double>* target = nullptr;
    while (in >> tok) {
        if (tok == "row_breaks") { target = &rb; continue; }
        if (tok == "col_breaks") { target = &cb; continue; }
        if (tok == "values") { target = &vals; continue; }
        if (!target)
            throw std::invalid_argument("graphon text: data before any section header");
        target->push_back(std::stod(tok));
    }
    if (rb.size() < 2 || cb.size() < 2)
        throw std::invalid_argument("graphon text: missing break sections");
    const Eigen::Index lx = static_cast<Eigen::Index>(rb.size()) - 1;
    const Eigen::Index ly = static_cast<Eigen::Index>(cb.size()) - 1;
    if (static_cast<Eigen::Index>(vals.size()) != lx * ly)
        throw std::invalid_argument("graphon text: values section has wrong length");
    Eigen::MatrixXd v(lx, ly);
    for (Eigen::Index a = 0; a < lx; ++a)
        for (Eigen::Index b = 0; b < ly; ++b) v(a, b) = vals[a * ly + b];
    return make_step_graphon(rb, cb, v);
}

void save_step_graphon(const StepGraphon& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << write_step_graphon(g);
}

StepGraphon load_step_graphon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graphon file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return read_step_graphon(ss.str());
}

}  // namespace coblock
