#include <gtest/gtest.h>

#include <numeric>

#include "moleda/embed/kernel.hpp"
#include "moleda/embed/lsp.hpp"
#include "moleda/embed/spectral.hpp"
#include "moleda/embed/tsne.hpp"
#include "moleda/error.hpp"
#include "oracles/fixtures.hpp"

using namespace moleda::embed;
using moleda::testing::random_bits;
using moleda::testing::random_normal;
using moleda::testing::sign_fixed;

namespace {

std::string code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const moleda::Error& e) {
        return e.code();
    }
    return "";
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

}  // namespace

TEST(Kernel, RbfDiagonalIsOne) {
    const KernelMatrix k = build_kernel(random_normal(20, 4, 1), {KernelKind::Rbf, 0.3});
    for (Eigen::Index i = 0; i < k.n(); ++i) EXPECT_EQ(k.values(i, i), 1.0);
    EXPECT_FALSE(k.centered);
}

TEST(Kernel, RbfMatchesDefinition) {
    const Eigen::MatrixXd x = random_normal(10, 3, 2);
    const KernelMatrix k = build_kernel(x, {KernelKind::Rbf, {}});
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            if (i == j) continue;
            EXPECT_NEAR(k.values(i, j), std::exp(-(x.row(i) - x.row(j)).squaredNorm() / 3.0), 1e-14);
        }
    }
}

TEST(Kernel, LinearOnOrthonormalBasisIsIdentity) {
    const KernelMatrix k = build_kernel(Eigen::MatrixXd::Identity(5, 5), {KernelKind::Linear, {}});
    EXPECT_EQ(k.values, Eigen::MatrixXd::Identity(5, 5));
}

TEST(Kernel, TanimotoMatchesSetDefinition) {
    const Eigen::MatrixXd x = random_bits(12, 64, 0.3, 4);
    const KernelMatrix k = build_kernel(x, {KernelKind::Tanimoto, {}});
    for (int i = 0; i < 12; ++i) {
        EXPECT_EQ(k.values(i, i), 1.0);
        for (int j = 0; j < 12; ++j) {
            if (i == j) continue;
            double both = 0, either = 0;
            for (int c = 0; c < 64; ++c) {
                both += x(i, c) * x(j, c);
                either += std::max(x(i, c), x(j, c));
            }
            EXPECT_NEAR(k.values(i, j), either > 0 ? both / either : 1.0, 1e-15);
        }
    }
}

TEST(Kernel, GramMatricesArePositiveSemidefinite) {
    const Eigen::MatrixXd fps = random_bits(50, 2048, 0.05, 9);
    EXPECT_GE(min_eigenvalue(build_kernel(fps, {KernelKind::Tanimoto, {}}).values), -1e-8);
    EXPECT_GE(min_eigenvalue(build_kernel(fps, {KernelKind::Rbf, {}}).values), -1e-8);
}

TEST(Kernel, Errors) {
    EXPECT_EQ(code_of([] { to_matrix({{1.0, 2.0}, {1.0}}); }), "mixed_lengths");
    EXPECT_EQ(code_of([] { build_kernel(random_normal(4, 3, 1), {KernelKind::Tanimoto, {}}); }), "tanimoto_on_dense");
    EXPECT_EQ(code_of([] { build_kernel(random_normal(4, 3, 1), {KernelKind::Rbf, -1.0}); }), "invalid_gamma");
    const KernelMatrix c = center(build_kernel(random_normal(4, 3, 1), {KernelKind::Linear, {}}));
    EXPECT_EQ(code_of([&] { center(c); }), "already_centered");
}

TEST(Center, ConstantMatrixVanishes) {
    KernelMatrix k{Eigen::MatrixXd::Constant(6, 6, 2.5), false};
    EXPECT_LE(center(k).values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Center, IdentityByHand) {
    // H is idempotent, so H·I·H = H: 2/3 on the diagonal, -1/3 elsewhere
    const KernelMatrix c = center(KernelMatrix{Eigen::MatrixXd::Identity(3, 3), false});
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
    EXPECT_LE((c.values - h * h).cwiseAbs().maxCoeff(), 1e-15);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(c.values(i, j), i == j ? 2.0 / 3.0 : -1.0 / 3.0, 1e-15);
    }
    EXPECT_TRUE(c.centered);
}

TEST(Center, MatchesExplicitProduct) {
    const KernelMatrix k = build_kernel(random_normal(9, 3, 5), {KernelKind::Rbf, {}});
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(9, 9) - Eigen::MatrixXd::Constant(9, 9, 1.0 / 9.0);
    EXPECT_LE((center(k).values - h * k.values * h).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Center, RowSumsVanishAndSymmetric) {
    for (KernelKind kind : {KernelKind::Rbf, KernelKind::Tanimoto, KernelKind::Linear}) {
        const KernelMatrix c = center(build_kernel(random_bits(50, 2048, 0.05, 3), {kind, {}}));
        EXPECT_LE(c.values.rowwise().sum().cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LE((c.values - c.values.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Pca, DiagonalCovarianceDataIsReproduced) {
    Eigen::MatrixXd x(4, 2);
    x << 3, 0, -3, 0, 0, 1, 0, -1;
    const Embedding e = pca(x);
    EXPECT_LE((sign_fixed(e.coords) - sign_fixed(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, CollinearDataHasNoSecondDimension) {
    Eigen::MatrixXd x(5, 3);
    for (int i = 0; i < 5; ++i) x.row(i) << i, 2.0 * i, -0.5 * i;
    const Embedding e = pca(x);
    const double mean = e.coords.col(1).mean();
    EXPECT_LE((e.coords.col(1).array() - mean).square().mean(), 1e-10);
}

TEST(Pca, MatchesCovarianceEigenvectors) {
    const Eigen::MatrixXd x = random_normal(10, 6, 7);
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
    Eigen::MatrixXd loadings(6, 2);
    loadings.col(0) = eig.eigenvectors().col(5);
    loadings.col(1) = eig.eigenvectors().col(4);
    loadings = sign_fixed(loadings);
    const Eigen::MatrixXd expected = centered * loadings;
    const Embedding e = pca(x);
    EXPECT_LE((e.coords - expected).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GE(e.coords.col(0).squaredNorm(), e.coords.col(1).squaredNorm());
}

TEST(Pca, DegenerateData) {
    EXPECT_EQ(code_of([] { pca(Eigen::MatrixXd::Constant(5, 3, 1.0)); }), "degenerate_data");
}

TEST(Kpca, LinearKernelMatchesPca) {
    const Eigen::MatrixXd x = random_normal(30, 5, 3);
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const Embedding k = kpca(center(build_kernel(centered, {KernelKind::Linear, {}})));
    const Embedding p = pca(centered);
    EXPECT_LE((sign_fixed(k.coords) - sign_fixed(p.coords)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Kpca, DuplicatePointsCoincide) {
    Eigen::MatrixXd x = random_normal(20, 4, 8);
    x.row(7) = x.row(3);
    const Embedding e = kpca(center(build_kernel(x, {KernelKind::Rbf, {}})));
    EXPECT_LE((e.coords.row(7) - e.coords.row(3)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Kpca, ZeroKernelIsRankDeficient) {
    KernelMatrix z{Eigen::MatrixXd::Zero(5, 5), true};
    EXPECT_EQ(code_of([&] { kpca(z); }), "rank_deficient");
}

TEST(Kpca, PermutationInvariant) {
    const Eigen::MatrixXd x = random_normal(25, 4, 12);
    std::vector<int> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp(25, 4);
    for (int i = 0; i < 25; ++i) xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    const Embedding a = kpca(center(build_kernel(x, {KernelKind::Rbf, {}})));
    const Embedding b = kpca(center(build_kernel(xp, {KernelKind::Rbf, {}})));
    Eigen::MatrixXd back(25, 2);
    for (int i = 0; i < 25; ++i) back.row(perm[static_cast<std::size_t>(i)]) = b.coords.row(i);
    EXPECT_LE((sign_fixed(a.coords) - sign_fixed(back)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FrameTest, FitsUnitBox) {
    Coords raw(3, 2);
    raw << 0, 0, 4, 1, 2, 3;
    const Frame f = Frame::fit(raw);
    const Coords u = f.to_unit(raw);
    EXPECT_DOUBLE_EQ(u.col(0).maxCoeff() - u.col(0).minCoeff(), 2.0);
    EXPECT_DOUBLE_EQ(u(1, 0), 1.0);
    EXPECT_DOUBLE_EQ(u(0, 1), -0.75);
    const Eigen::Vector2d back = f.to_raw(u(2, 0), u(2, 1));
    EXPECT_NEAR(back(0), 2.0, 1e-15);
    EXPECT_NEAR(back(1), 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(diameter(u), 2.0);
}

TEST(Tsne, DeterministicAndDescending) {
    const Eigen::MatrixXd x = random_normal(40, 5, 1);
    TsneParams p;
    p.perplexity = 8;
    p.iters = 400;
    p.exaggeration_iters = 100;
    const TsneResult a = tsne(x, p);
    const TsneResult b = tsne(x, p);
    EXPECT_EQ(a.embedding.coords, b.embedding.coords);
    EXPECT_LE(a.kl_final, a.kl_after_exaggeration);
    EXPECT_TRUE(a.embedding.coords.allFinite());
    EXPECT_EQ(a.embedding.method, Method::Tsne);
}

TEST(Tsne, IdenticalPointsAreMutualNearestNeighbours) {
    for (std::uint64_t seed : {4u, 5u, 6u}) {
        Eigen::MatrixXd x = random_normal(10, 3, seed);
        x.row(9) = x.row(2);
        TsneParams p;
        p.perplexity = 3;
        p.seed = seed;
        const TsneResult r = tsne(x, p);
        const Coords& y = r.embedding.coords;
        const double pair = (y.row(9) - y.row(2)).norm();
        for (int i = 0; i < 9; ++i) {
            if (i == 2) continue;
            EXPECT_LT(pair, (y.row(i) - y.row(2)).norm()) << "seed " << seed << " point " << i;
            EXPECT_LT(pair, (y.row(i) - y.row(9)).norm()) << "seed " << seed << " point " << i;
        }
        EXPECT_LE(r.kl_final, r.kl_after_exaggeration);
    }
}

TEST(Tsne, AffinityEntropyMatchesPerplexity) {
    const Eigen::MatrixXd x = random_normal(30, 4, 2);
    Eigen::MatrixXd d2(30, 30);
    for (int i = 0; i < 30; ++i)
        for (int j = 0; j < 30; ++j) d2(i, j) = (x.row(i) - x.row(j)).squaredNorm();
    const Eigen::MatrixXd p = conditional_affinities(d2, 7.0);
    for (int i = 0; i < 30; ++i) {
        EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
        EXPECT_EQ(p(i, i), 0.0);
        double h = 0.0;
        for (int j = 0; j < 30; ++j) {
            if (p(i, j) > 0) h -= p(i, j) * std::log(p(i, j));
        }
        EXPECT_NEAR(h, std::log(7.0), 1e-5);
    }
}

TEST(Tsne, Errors) {
    TsneParams p;
    EXPECT_EQ(code_of([&] { tsne(random_normal(50, 3, 1), p); }), "perplexity_too_large");
    EXPECT_EQ(code_of([&] { tsne(random_normal(3, 3, 1), p); }), "too_few_points");
    p.perplexity = -1;
    EXPECT_EQ(code_of([&] { tsne(random_normal(50, 3, 1), p); }), "invalid_perplexity");
}

TEST(Lsp, AllControlsReproduceTargets) {
    const Eigen::MatrixXd x = random_normal(15, 3, 1);
    std::vector<LspControl> controls;
    for (std::size_t i = 0; i < 15; ++i) controls.push_back({i, 0.1 * static_cast<double>(i), std::sin(static_cast<double>(i))});
    const Embedding e = lsp(x, controls, 4);
    for (const auto& c : controls) {
        EXPECT_NEAR(e.coords(static_cast<Eigen::Index>(c.index), 0), c.x, 1e-6);
        EXPECT_NEAR(e.coords(static_cast<Eigen::Index>(c.index), 1), c.y, 1e-6);
    }
}

TEST(Lsp, FreePointSurroundedByControlsIsNeighbourMean) {
    const Eigen::MatrixXd x = random_normal(12, 3, 6);
    const auto graph = knn_graph(x, 3);
    std::vector<LspControl> controls;
    for (std::size_t i = 1; i < 12; ++i) controls.push_back({i, std::cos(1.0 * static_cast<double>(i)), 0.3 * static_cast<double>(i)});
    const Embedding e = lsp(x, controls, 3);
    double mx = 0, my = 0;
    for (auto j : graph[0]) {
        mx += controls[j - 1].x / 3.0;
        my += controls[j - 1].y / 3.0;
    }
    EXPECT_NEAR(e.coords(0, 0), mx, 1e-8);
    EXPECT_NEAR(e.coords(0, 1), my, 1e-8);
}

TEST(Lsp, MatchesDenseNormalEquations) {
    const Eigen::MatrixXd x = random_normal(100, 8, 3);
    const Embedding base = pca(x);
    std::vector<LspControl> controls;
    for (std::size_t c = 0; c < 100; c += 10) {
        controls.push_back({c, base.coords(static_cast<Eigen::Index>(c), 0), base.coords(static_cast<Eigen::Index>(c), 1)});
    }
    const Embedding e = lsp(x, controls, 10);

    // dense oracle: neighbourhoods by brute-force sort, then AᵀA y = Aᵀb
    std::vector<bool> is_control(100, false);
    for (const auto& c : controls) is_control[c.index] = true;
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<Eigen::Vector2d> rhs;
    for (int i = 0; i < 100; ++i) {
        if (is_control[static_cast<std::size_t>(i)]) continue;
        std::vector<int> order;
        for (int j = 0; j < 100; ++j)
            if (j != i) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return (x.row(i) - x.row(a)).norm() < (x.row(i) - x.row(b)).norm();
        });
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(100);
        r(i) = 1.0;
        for (int t = 0; t < 10; ++t) r(order[static_cast<std::size_t>(t)]) -= 0.1;
        rows.push_back(r);
        rhs.emplace_back(0.0, 0.0);
    }
    for (const auto& c : controls) {
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(100);
        r(static_cast<Eigen::Index>(c.index)) = kLspAnchorWeight;
        rows.push_back(r);
        rhs.emplace_back(kLspAnchorWeight * c.x, kLspAnchorWeight * c.y);
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 100);
    Eigen::MatrixXd b(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        a.row(static_cast<Eigen::Index>(t)) = rows[t];
        b.row(static_cast<Eigen::Index>(t)) = rhs[t].transpose();
    }
    const Eigen::MatrixXd y = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    EXPECT_LE((e.coords - y).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lsp, Errors) {
    const Eigen::MatrixXd x = random_normal(10, 2, 1);
    const std::vector<LspControl> two{{0, 0, 0}, {1, 1, 1}};
    EXPECT_EQ(code_of([&] { lsp(x, two, 3); }), "too_few_controls");
    const std::vector<LspControl> three{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
    EXPECT_EQ(code_of([&] { lsp(x, three, 10); }), "invalid_k");
    const std::vector<LspControl> bad{{0, 0, 0}, {1, 1, 1}, {20, 2, 2}};
    EXPECT_EQ(code_of([&] { lsp(x, bad, 3); }), "invalid_control");
}
