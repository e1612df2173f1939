#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>
#include <random>

#include "coblock/estimators.hpp"
#include "coblock/graphon.hpp"
#include "oracles.hpp"

using namespace coblock;

TEST_CASE("truncated SVD matches a dense decomposition") {
    std::mt19937_64 gen(301);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd A(30, 22);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 22; ++j) A(i, j) = gauss(gen);
    const int K = 5;
    const TruncatedSvd t = truncated_svd(A, K, 99);
    Eigen::JacobiSVD<Eigen::MatrixXd> full(A, Eigen::ComputeThinU | Eigen::ComputeThinV);

    for (int k = 0; k < K; ++k)
        CHECK(t.s(k) == doctest::Approx(full.singularValues()(k)).epsilon(1e-7));
    CHECK((t.U.transpose() * t.U - Eigen::MatrixXd::Identity(K, K)).norm() < 1e-7);
    CHECK((t.V.transpose() * t.V - Eigen::MatrixXd::Identity(K, K)).norm() < 1e-7);
    // Triplet residuals at the requested tolerance.
    CHECK((A * t.V - t.U * t.s.asDiagonal()).norm() <= 1e-6 * t.s(0));
}

TEST_CASE("truncated SVD reconstructs a low-rank matrix exactly") {
    std::mt19937_64 gen(302);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd B(25, 3), C(3, 18);
    for (int i = 0; i < 25; ++i)
        for (int k = 0; k < 3; ++k) B(i, k) = gauss(gen);
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 18; ++j) C(k, j) = gauss(gen);
    const Eigen::MatrixXd A = B * C;
    const TruncatedSvd t = truncated_svd(A, 3, 5);
    CHECK((A - t.U * t.s.asDiagonal() * t.V.transpose()).norm() < 1e-8 * A.norm());
}

TEST_CASE("truncated SVD is deterministic in the seed") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Random(12, 12);
    const TruncatedSvd a = truncated_svd(A, 4, 7);
    const TruncatedSvd b = truncated_svd(A, 4, 7);
    CHECK(a.U == b.U);
    CHECK(a.s == b.s);
    CHECK(a.V == b.V);
}

TEST_CASE("k-means recovers well-separated clusters") {
    std::mt19937_64 gen(303);
    std::normal_distribution<double> gauss(0.0, 0.05);
    Eigen::MatrixXd pts(60, 2);
    std::vector<int> truth(60);
    const double centers[3][2] = {{0, 0}, {5, 0}, {0, 5}};
    for (int i = 0; i < 60; ++i) {
        truth[i] = i % 3;
        pts(i, 0) = centers[truth[i]][0] + gauss(gen);
        pts(i, 1) = centers[truth[i]][1] + gauss(gen);
    }
    const std::vector<int> got = kmeans_labels(pts, 3, 11);
    CHECK(oracles::same_up_to_permutation(truth, got, 3));
}

TEST_CASE("spectral co-clustering exactly recovers a noise-free blockmodel") {
    Eigen::MatrixXd theta(3, 3);
    theta << 0.9, 0.1, 0.5, 0.1, 0.8, 0.3, 0.5, 0.3, 0.2;
    const int m = 60, n = 75;
    std::vector<int> S(m), T(n);
    Eigen::MatrixXd W(m, n);
    for (int i = 0; i < m; ++i) S[i] = (i * 3) / m;
    for (int j = 0; j < n; ++j) T[j] = (j * 3) / n;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) W(i, j) = theta(S[i], T[j]);
    const CoClusterLabels got = spectral_cocluster(W, 3, 21);
    CHECK(oracles::same_up_to_permutation(S, got.S, 3));
    CHECK(oracles::same_up_to_permutation(T, got.T, 3));
}

TEST_CASE("blockmodel ALS: non-increasing risk, exact fit on planted data") {
    Eigen::MatrixXd theta(2, 2);
    theta << 0.9, 0.2, 0.2, 0.7;
    const StepGraphon g = blockmodel_graphon(theta);
    const BipartiteSample s = sample_bipartite(g, 80, 80, 31);
    const CoClusterLabels init = spectral_cocluster(s.A, 2, 32);
    const BlockmodelFit fit = fit_blockmodel_als(s.A, 2, init, 30);
    for (size_t i = 1; i < fit.risk_trace.size(); ++i)
        CHECK(fit.risk_trace[i] <= fit.risk_trace[i - 1] + 1e-12);

    // Noise-free: fitting W recovers theta up to permutation.
    const CoClusterLabels winit = spectral_cocluster(s.W, 2, 33);
    const BlockmodelFit wfit = fit_blockmodel_als(s.W, 2, winit, 30);
    std::vector<double> got{wfit.theta(0, 0), wfit.theta(1, 1)};
    std::sort(got.begin(), got.end());
    CHECK(got[0] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(got[1] == doctest::Approx(0.9).epsilon(1e-9));
}

TEST_CASE("dot-product fits: non-increasing risk for families 2-4") {
    const StepGraphon g = oracles::random_step_graphon(3, 3, 305);
    const BipartiteSample s = sample_bipartite(g, 50, 50, 41);
    struct Case {
        int K, d;
        ModelFamily fam;
    };
    for (const Case c : {Case{2, 1, ModelFamily::DegreeCorrected},
                         Case{1, 2, ModelFamily::DotProduct},
                         Case{2, 2, ModelFamily::DotProductBlock}}) {
        const DotProductFit fit = fit_dot_product_model(s.A, c.K, c.d, c.fam, 43, 15);
        REQUIRE(fit.risk_trace.size() >= 2);
        for (size_t i = 1; i < fit.risk_trace.size(); ++i)
            CHECK(fit.risk_trace[i] <= fit.risk_trace[i - 1] + 1e-12);
        // Fitted parameters stay inside the domain.
        for (int i = 0; i < fit.row.size(); ++i)
            CHECK_NOTHROW(check_in_domain(fit.row.vectors.row(i).transpose()));
        for (int j = 0; j < fit.col.size(); ++j)
            CHECK_NOTHROW(check_in_domain(fit.col.vectors.row(j).transpose()));
    }
}

TEST_CASE("dot-product fit rejects invalid family/dimension combinations") {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(10, 10);
    CHECK_THROWS_AS(fit_dot_product_model(A, 2, 2, ModelFamily::DegreeCorrected, 1, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_dot_product_model(A, 2, 1, ModelFamily::DotProduct, 1, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_dot_product_model(A, 2, 0, ModelFamily::DotProductBlock, 1, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_dot_product_model(A, 2, 1, ModelFamily::Blockmodel, 1, 5),
                    std::invalid_argument);
}

TEST_CASE("projection onto the latent domain") {
    Eigen::VectorXd v(2);
    v << -0.5, 2.0;
    const Eigen::VectorXd p = project_to_domain(v);
    CHECK_NOTHROW(check_in_domain(p));
    CHECK(p(0) == 0.0);

    Eigen::VectorXd w(2);
    w << 0.9, 0.9;  // norm > 1, rescaled onto the ball
    const Eigen::VectorXd q = project_to_domain(w);
    CHECK_NOTHROW(check_in_domain(q));
    CHECK(q.norm() == doctest::Approx(1.0));

    Eigen::VectorXd in(2);
    in << 0.3, 0.4;  // interior points are fixed
    CHECK((project_to_domain(in) - in).norm() == 0.0);
}
