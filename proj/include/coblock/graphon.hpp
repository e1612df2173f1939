#pragma once
// Step graphons on [0,1]^2 and bipartite Bernoulli sampling from them.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace coblock {

// Piecewise-constant kernel on [0,1]^2. Cells are half-open
// [row_breaks[a], row_breaks[a+1]) x [col_breaks[b], col_breaks[b+1));
// the coordinate value 1 belongs to the last cell.
struct StepGraphon {
    std::vector<double> row_breaks;  // length Lx+1, 0 = first, 1 = last
    std::vector<double> col_breaks;  // length Ly+1
    Eigen::MatrixXd values;          // Lx x Ly, entries in [0,1]

    int n_row_cells() const { return static_cast<int>(values.rows()); }
    int n_col_cells() const { return static_cast<int>(values.cols()); }

    double row_width(int a) const { return row_breaks[a + 1] - row_breaks[a]; }
    double col_width(int b) const { return col_breaks[b + 1] - col_breaks[b]; }

    int row_cell(double x) const;
    int col_cell(double y) const;
    double eval(double x, double y) const;
};

StepGraphon make_step_graphon(const std::vector<double>& row_breaks,
                              const std::vector<double>& col_breaks,
                              const Eigen::MatrixXd& values);

// Constant graphon w == p.
StepGraphon constant_graphon(double p);

// K x K blockmodel with equal-width blocks on both axes.
StepGraphon blockmodel_graphon(const Eigen::MatrixXd& theta);

struct BipartiteSample {
    std::vector<double> x;  // m latent row coordinates, sampling order
    std::vector<double> y;  // n latent column coordinates
    Eigen::MatrixXd W;      // m x n conditional means, W(i,j) = w(x_i, y_j)
    Eigen::MatrixXd A;      // m x n binary adjacency
    std::uint64_t seed = 0;

    int m() const { return static_cast<int>(x.size()); }
    int n() const { return static_cast<int>(y.size()); }
};

BipartiteSample sample_bipartite(const StepGraphon& g, int m, int n,
                                 std::uint64_t seed);

Eigen::MatrixXd conditional_mean_matrix(const StepGraphon& g,
                                        const std::vector<double>& x,
                                        const std::vector<double>& y);

// Plain-text serialization: sections row_breaks / col_breaks / values,
// whitespace-separated decimals at 17 significant digits.
std::string write_step_graphon(const StepGraphon& g);
StepGraphon read_step_graphon(const std::string& text);
void save_step_graphon(const StepGraphon& g, const std::string& path);
StepGraphon load_step_graphon(const std::string& path);

// 17-significant-digit decimal rendering used by all text outputs.
std::string format_g17(double v);

}  // namespace coblock
