#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tmem/stochastic.hpp"

using namespace tmem;

TEST_CASE("simplex projection matches the brute-force QP on every small case") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int k : {2, 4})
        for (int t = 0; t < 500; ++t) {
            RVector v(k);
            for (auto& x : v) x = g(rng) * (t % 3 == 0 ? 0.1 : 1.0);
            const RVector p = project_simplex(v);
            CHECK((p - oracle::project_simplex_bruteforce(v)).cwiseAbs().maxCoeff() <= 1e-9);
        }
}

TEST_CASE("simplex projection is idempotent, feasible and fixes simplex points") {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> g(0.0, 2.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        const int k = 1 + t % 16;
        RVector v(k);
        for (auto& x : v) x = g(rng);
        const RVector p = project_simplex(v);
        CHECK(p.minCoeff() >= 0.0);
        CHECK(std::abs(p.sum() - 1.0) < 1e-12);
        CHECK((project_simplex(p) - p).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((p - oracle::project_simplex_bisect(v)).cwiseAbs().maxCoeff() < 1e-9);
        RVector s(k);
        for (auto& x : s) x = u(rng);
        s /= s.sum();
        CHECK((project_simplex(s) - s).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("column-stochastic validation and projection") {
    RMatrix m(2, 2);
    m << 0.9, 0.2, 0.1, 0.8;
    CHECK_NOTHROW(ColumnStochasticMatrix{m});
    m(0, 0) = 0.95;
    CHECK_THROWS_AS(ColumnStochasticMatrix{m}, DomainError);
    RMatrix n(2, 2);
    n << 1.1, 0.5, -0.1, 0.5;
    CHECK_THROWS_AS(ColumnStochasticMatrix{n}, DomainError);

    std::mt19937_64 rng(23);
    std::normal_distribution<double> g;
    RMatrix a(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) a(i, j) = g(rng);
    const ColumnStochasticMatrix p = project_column_stochastic(a);
    for (int j = 0; j < 5; ++j)
        CHECK((p.matrix().col(j) - oracle::project_simplex_bruteforce(a.col(j))).cwiseAbs().maxCoeff() < 1e-9);
}
