#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_support.hpp"
#include "torconj/lattice.hpp"

using namespace torconj;
using testsupport::Rng;

static LatticeMatrix cat() { return LatticeMatrix(2, {2, 1, 1, 1}); }

TEST_CASE("construction rejects non-unimodular matrices") {
    CHECK_THROWS(LatticeMatrix(2, {2, 0, 0, 2}));
    CHECK_THROWS(LatticeMatrix(2, {1, 1, 1, 1}));
    CHECK_NOTHROW(LatticeMatrix(2, {0, 1, -1, 0}));
}

TEST_CASE("dual is the exact inverse transpose") {
    CHECK(dual(LatticeMatrix::identity(3)) == LatticeMatrix::identity(3));

    auto d = dual(cat());
    CHECK(d == LatticeMatrix(2, {1, -1, -1, 2}));
    CHECK(cat().transpose() * d == LatticeMatrix::identity(2));

    auto r = LatticeMatrix(2, {0, 1, -1, 0});
    CHECK(r.transpose() * dual(r) == LatticeMatrix::identity(2));

    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        // random unimodular: product of elementary shears
        LatticeMatrix M = LatticeMatrix::identity(3);
        for (int k = 0; k < 6; ++k) {
            int i = rng.range(0, 2), j = rng.range(0, 2);
            if (i == j) continue;
            std::vector<long long> e{1, 0, 0, 0, 1, 0, 0, 0, 1};
            e[static_cast<size_t>(i) * 3 + j] = rng.range(-2, 2);
            M = M * LatticeMatrix(3, e);
        }
        CHECK(dual(dual(M)) == M);
        CHECK(M.transpose() * dual(M) == LatticeMatrix::identity(3));
    }
}

TEST_CASE("char_poly matches hand results") {
    CHECK(char_poly(cat()) == std::vector<long long>{1, -3, 1});       // x^2-3x+1
    CHECK(char_poly(LatticeMatrix::identity(2)) == std::vector<long long>{1, -2, 1});
    CHECK(char_poly(LatticeMatrix(2, {0, 1, -1, 0})) == std::vector<long long>{1, 0, 1});
}

TEST_CASE("cyclotomic polynomials") {
    CHECK(cyclotomic(1) == std::vector<long long>{-1, 1});
    CHECK(cyclotomic(2) == std::vector<long long>{1, 1});
    CHECK(cyclotomic(4) == std::vector<long long>{1, 0, 1});
    CHECK(cyclotomic(6) == std::vector<long long>{1, -1, 1});
    CHECK(cyclotomic(12) == std::vector<long long>{1, 0, -1, 0, 1});
}

TEST_CASE("is_ergodic basics") {
    CHECK_FALSE(is_ergodic(LatticeMatrix::identity(2)));
    CHECK_FALSE(is_ergodic(LatticeMatrix(2, {0, 1, -1, 0})));
    CHECK_FALSE(is_ergodic(LatticeMatrix(2, {0, 1, -1, -1})));  // order 3
    CHECK(is_ergodic(cat()));
    CHECK(is_ergodic(cat().inverse()));
    // -A: eigenvalues off the unit circle, still ergodic
    CHECK(is_ergodic(LatticeMatrix(2, {-2, -1, -1, -1})));
    CHECK(is_ergodic(dual(cat())));
}

TEST_CASE("is_ergodic agrees with the resultant oracle on random products") {
    Rng rng(42);
    int checked = 0;
    while (checked < 200) {
        std::vector<long long> e(4);
        for (auto& x : e) x = rng.range(-3, 3);
        std::vector<testsupport::i128> m(e.begin(), e.end());
        auto det = testsupport::int_det(m, 2);
        if (det != 1 && det != -1) continue;
        LatticeMatrix M(2, e);
        CHECK(is_ergodic(M) == testsupport::ergodic_oracle(M));
        ++checked;
    }
}

TEST_CASE("spectral splitting of the cat map") {
    auto S = spectral_splitting(dual(cat()));
    CHECK(S.unstableBasis.size() == 1);
    CHECK(S.stableBasis.size() == 1);
    CHECK(S.centerBasis.empty());
    CHECK(S.semisimple);
    CHECK(S.rho == doctest::Approx((3 + std::sqrt(5.0)) / 2).epsilon(1e-12));
    CHECK((S.projU + S.projC + S.projS - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);
    Eigen::MatrixXd M = S.source.to_double();
    CHECK((M * S.projU - S.projU * M).norm() < 1e-9);
    CHECK((M * S.projS - S.projS * M).norm() < 1e-9);
}

TEST_CASE("spectral splitting identity and mixed blocks") {
    auto S = spectral_splitting(LatticeMatrix::identity(3));
    CHECK(S.centerBasis.size() == 3);
    CHECK(S.unstableBasis.empty());
    CHECK(S.stableBasis.empty());

    // block-diag(cat, rotation): 1 unstable, 1 stable, 2 center
    LatticeMatrix blk(4, {2, 1, 0, 0,
                          1, 1, 0, 0,
                          0, 0, 0, 1,
                          0, 0, -1, 0});
    auto T = spectral_splitting(blk);
    CHECK(T.unstableBasis.size() == 1);
    CHECK(T.stableBasis.size() == 1);
    CHECK(T.centerBasis.size() == 2);
    CHECK((T.projU + T.projC + T.projS - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("classify_mostly_in") {
    auto S = spectral_splitting(dual(cat()));
    // for the cat map itself (1,0) is mostly unstable
    auto Sc = spectral_splitting(cat());
    CHECK(classify_mostly_in(std::vector<int>{1, 0}, Sc) == Subspace::U);
    // projection-norm oracle agreement on the dual splitting
    for (auto n : {std::vector<int>{1, 0}, {0, 1}, {2, -1}, {-3, 2}}) {
        Eigen::VectorXd v(2);
        v << n[0], n[1];
        bool unstable_wins = (S.projU * v).norm() >= (S.projS * v).norm();
        CHECK(classify_mostly_in(n, S) == (unstable_wins ? Subspace::U : Subspace::S));
    }
    // (1,-1) vs (1,1) land on opposite sides of the golden eigendirections
    auto a = classify_mostly_in(std::vector<int>{1, -1}, S);
    auto b = classify_mostly_in(std::vector<int>{1, 1}, S);
    CHECK(a != b);
    CHECK_THROWS(classify_mostly_in(std::vector<int>{0, 0}, S));

    // guarantee |proj(n)| >= |n|/3 on a scan
    for (int x = -6; x <= 6; ++x)
        for (int y = -6; y <= 6; ++y) {
            if (x == 0 && y == 0) continue;
            Eigen::VectorXd n(2);
            n << x, y;
            auto c = classify_mostly_in(n, S);
            const Eigen::MatrixXd& P = (c == Subspace::U) ? S.projU : (c == Subspace::S) ? S.projS : S.projC;
            CHECK((P * n).norm() >= n.norm() / 3 - 1e-9);
        }
}

TEST_CASE("dual orbits have no repeats on a finite window") {
    auto Ad = dual(cat());
    for (int x = -3; x <= 3; ++x)
        for (int y = -3; y <= 3; ++y) {
            if (x == 0 && y == 0) continue;
            std::vector<std::vector<long long>> seen;
            std::vector<long long> v{x, y};
            auto w = Ad.pow(-10).apply(v);
            for (int i = -10; i <= 10; ++i) {
                for (auto& s : seen) CHECK(s != w);
                seen.push_back(w);
                w = Ad.apply(w);
            }
        }
}

TEST_CASE("katznelson gamma estimate") {
    auto S = spectral_splitting(dual(cat()));
    double g20 = katznelson_gamma_estimate(S, 20);
    CHECK(g20 > 0);
    CHECK(katznelson_gamma_estimate(S, 1) > 0);
    // hyperbolic case: bounded below as the radius grows
    double g10 = katznelson_gamma_estimate(S, 10), g40 = katznelson_gamma_estimate(S, 40);
    CHECK(g40 > 0.5 * std::min(g10, g20));
    auto C = spectral_splitting(LatticeMatrix::identity(2));
    CHECK_THROWS(katznelson_gamma_estimate(C, 5));
}

TEST_CASE("higher_rank_window trivial failures") {
    auto A = cat();
    auto rep = higher_rank_window(A, A, 1);
    CHECK(rep.verdict() == "fail");
    bool found = false;
    for (auto& f : rep.failures) found = found || (f == std::pair<int, int>(1, -1));
    CHECK(found);

    auto rep2 = higher_rank_window(A, LatticeMatrix::identity(2), 1);
    CHECK(rep2.verdict() == "fail");

    CHECK_THROWS(higher_rank_window(A, LatticeMatrix(2, {1, 1, 0, 1}), 1));
}

TEST_CASE("higher_rank_window pass on T^3 unit pair") {
    // companion of x^3 - 3x - 1 (totally real) and C + I, a commuting unit pair
    LatticeMatrix C(3, {0, 1, 0, 0, 0, 1, 1, 3, 0});
    std::vector<long long> e(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e[static_cast<size_t>(i) * 3 + j] = C(i, j) + (i == j ? 1 : 0);
    LatticeMatrix B(3, e);
    CHECK(C * B == B * C);
    CHECK(is_ergodic(C));
    CHECK(is_ergodic(B));
    auto rep = higher_rank_window(C, B, 5);
    CHECK(rep.verdict() == "pass-on-window");
    CHECK(rep.kappa0Estimate > 0);
}

TEST_CASE("pair (A, A^2) passes the L=1 window") {
    auto A = cat();
    auto rep = higher_rank_window(A, A.pow(2), 1);
    CHECK(rep.verdict() == "pass-on-window");
    // and structurally fails at L=2 via (2,-1)
    auto rep2 = higher_rank_window(A, A.pow(2), 2);
    CHECK(rep2.verdict() == "fail");
}
