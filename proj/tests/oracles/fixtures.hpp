#pragma once

// Seeded synthetic data shared by the unit and acceptance suites.

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace moleda::testing {

/// n random bit vectors of length `bits`, each bit set with probability `density`.
inline Eigen::MatrixXd random_bits(int n, int bits, double density, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(density);
    Eigen::MatrixXd x(n, bits);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < bits; ++j) x(i, j) = coin(rng) ? 1.0 : 0.0;
    }
    return x;
}

/// Bit vectors drawn around a few prototypes so the data has cluster structure.
inline Eigen::MatrixXd clustered_bits(int n, int bits, int prototypes, double flip, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Eigen::MatrixXd protos = random_bits(prototypes, bits, 0.08, seed ^ 0x9e3779b97f4a7c15ULL);
    std::bernoulli_distribution coin(flip);
    Eigen::MatrixXd x(n, bits);
    for (int i = 0; i < n; ++i) {
        const int p = static_cast<int>(rng() % static_cast<std::uint64_t>(prototypes));
        for (int j = 0; j < bits; ++j) {
            const double b = protos(p, j);
            x(i, j) = coin(rng) ? 1.0 - b : b;
        }
    }
    return x;
}

inline Eigen::MatrixXd random_normal(int n, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = normal(rng);
    }
    return x;
}

/// Coordinates with every column flipped so its largest-magnitude entry is positive.
inline Eigen::MatrixXd sign_fixed(Eigen::MatrixXd m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        Eigen::Index arg = 0;
        m.col(c).cwiseAbs().maxCoeff(&arg);
        if (m(arg, c) < 0.0) m.col(c) *= -1.0;
    }
    return m;
}

}  // namespace moleda::testing
