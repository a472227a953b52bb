#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace descon {

// Deterministic uniform sampling on top of std::mt19937_64 (whose output is
// pinned by the standard). The double conversion is hand-rolled because
// std::uniform_real_distribution is implementation-defined; results must be
// reproducible bit-for-bit across toolchains.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
        return v;
    }

    // Column-major draw order: entry (i, j) is drawn before (i, j+1) within
    // a column and columns advance last. Tests freeze sequences against this.
    Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = uniform(lo, hi);
        return m;
    }

    std::uint64_t raw() { return gen_(); }

    // Independent stream for sub-experiment `stream` of a seeded campaign
    // (splitmix64 of seed + odd stride keeps streams decorrelated).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

   private:
    std::mt19937_64 gen_;
};

}  // namespace descon
