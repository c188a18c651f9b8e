#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "torconj/fourier.hpp"

using namespace torconj;
using testsupport::Rng;

namespace {

FourierMap cosine(int d, int s, const FreqVec& f) {
    // cos(2 pi <f, z>) as a scalar map
    FourierMap m(d, s, 1);
    Eigen::VectorXcd half(1);
    half << Cplx(0.5, 0.0);
    m.set_coeff(f, half);
    FreqVec g(f.size());
    for (size_t i = 0; i < f.size(); ++i) g[i] = -f[i];
    m.add_coeff(g, half);
    return m;
}

Eigen::VectorXd rand_point(Rng& rng, int dim) {
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z(i) = rng.uniform();
    return z;
}

// long-double direct summation oracle
Eigen::VectorXd eval_oracle(const FourierMap& f, const Eigen::VectorXd& z) {
    int k = f.target_dim();
    std::vector<long double> re(static_cast<size_t>(k), 0.0L);
    for (const auto& [fr, v] : f.coeffs()) {
        long double ph = 0;
        for (size_t a = 0; a < fr.size(); ++a) ph += static_cast<long double>(fr[a]) * z(static_cast<int>(a));
        long double c = cosl(2.0L * 3.14159265358979323846264338327950288L * ph);
        long double s = sinl(2.0L * 3.14159265358979323846264338327950288L * ph);
        for (int j = 0; j < k; ++j)
            re[static_cast<size_t>(j)] += static_cast<long double>(v(j).real()) * c - static_cast<long double>(v(j).imag()) * s;
    }
    Eigen::VectorXd out(k);
    for (int j = 0; j < k; ++j) out(j) = static_cast<double>(re[static_cast<size_t>(j)]);
    return out;
}

}  // namespace

TEST_CASE("evaluate basics") {
    FourierMap zero(2, 1, 3);
    Rng rng(1);
    CHECK(zero.evaluate(rand_point(rng, 3)).norm() == 0.0);

    auto c = cosine(2, 1, {1, -2, 1});
    for (int t = 0; t < 20; ++t) {
        auto z = rand_point(rng, 3);
        double expect = std::cos(2 * M_PI * (z(0) - 2 * z(1) + z(2)));
        CHECK(c.evaluate(z)(0) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("evaluate matches high-precision oracle on random maps") {
    Rng rng(2);
    auto f = random_real_map(2, 1, 2, 3, 1.0, 99);
    CHECK(f.is_real_symmetric(1e-12));
    for (int t = 0; t < 100; ++t) {
        auto z = rand_point(rng, 3);
        CHECK((f.evaluate(z) - eval_oracle(f, z)).norm() < 1e-12);
        CHECK(f.evaluate_complex(z).imag().norm() < 1e-10);
    }
}

TEST_CASE("pullback") {
    LatticeMatrix A(2, {2, 1, 1, 1});
    FourierMap cst(2, 1, 1);
    Eigen::VectorXcd one(1);
    one << Cplx(1.0, 0.0);
    cst.set_coeff({0, 0, 2}, one);
    CHECK(pullback(cst, A).coeffs() == cst.coeffs());

    auto f = cosine(2, 0, {1, 0});
    auto g = pullback(f, A);
    CHECK(g.support_size() == 2);
    CHECK(g.coeff({2, 1}).norm() == doctest::Approx(0.5));

    Rng rng(3);
    auto r = random_real_map(2, 1, 1, 3, 1.0, 7);
    auto rp = pullback(r, A);
    for (int t = 0; t < 100; ++t) {
        auto z = rand_point(rng, 3);
        Eigen::VectorXd az(3);
        az << 2 * z(0) + z(1), z(0) + z(1), z(2);
        CHECK((rp.evaluate(z) - r.evaluate(az)).norm() < 1e-12);
    }

    // composition of pullbacks = pullback of product
    LatticeMatrix B(2, {1, 1, 1, 2});
    auto lhs = pullback(pullback(r, A), B);
    auto rhs = pullback(r, A * B);
    CHECK((lhs - rhs).coeffs().empty());
}

TEST_CASE("cr_majorant") {
    FourierMap zero(1, 0, 1);
    CHECK(cr_majorant(zero, 3) == 0.0);

    FourierMap cst(2, 1, 2);
    Eigen::VectorXcd v(2);
    v << Cplx(3.0, 0.0), Cplx(4.0, 0.0);
    cst.set_coeff({0, 0, 0}, v);
    for (int r = 0; r < 4; ++r) CHECK(cr_majorant(cst, r) == doctest::Approx(5.0));

    FourierMap one(2, 0, 1);
    Eigen::VectorXcd u(1);
    u << Cplx(1.0, 0.0);
    one.set_coeff({3, 4}, u);
    CHECK(cr_majorant(one, 1) == doctest::Approx(1.0 + 2 * M_PI * 5.0));

    auto f = random_real_map(2, 1, 1, 3, 1.0, 11);
    for (int r = 0; r < 4; ++r) CHECK(cr_majorant(f, r) <= cr_majorant(f, r + 1) + 1e-15);
}

TEST_CASE("smooth_truncate") {
    auto f = random_real_map(2, 1, 2, 6, 1.0, 21);
    SmoothingParams p;
    p.cutoff = 8.0;

    auto [sN, rN] = smooth_truncate(f, p);
    // exact reconstruction
    auto diff = f - sN - rN;
    CHECK(diff.coeffs().empty());

    // frequencies above N land fully in the remainder
    for (const auto& [fr, v] : f.coeffs()) {
        double nn = 0;
        for (int x : fr) nn += double(x) * x;
        if (std::sqrt(nn) > p.cutoff) {
            CHECK(sN.coeff(fr).norm() == 0.0);
            CHECK((rN.coeff(fr) - v).norm() == 0.0);
        }
        if (std::sqrt(nn) <= p.cutoff / 2) {
            CHECK((sN.coeff(fr) - v).norm() == 0.0);
        }
    }

    // band-limited inside N/2: identity
    SmoothingParams wide;
    wide.cutoff = 4.0 * std::sqrt(3.0) * 6.1;
    auto [s2, r2] = smooth_truncate(f, wide);
    CHECK(r2.coeffs().empty());

    // smoothing inequality vs majorants
    SmoothingParams mid;
    mid.cutoff = 5.0;
    auto [s3, r3] = smooth_truncate(f, mid);
    for (int l = 2; l <= 4; ++l)
        CHECK(cr_majorant(s3, l) <= std::pow(mid.cutoff, l - 1) * cr_majorant(f, 1) * (1 + 2 * M_PI) + 1e-9);

    SmoothingParams sharp;
    sharp.cutoff = 5.0;
    sharp.profile = SmoothingParams::Profile::Sharp;
    auto [s4, r4] = smooth_truncate(f, sharp);
    for (const auto& [fr, v] : s4.coeffs()) CHECK((v - f.coeff(fr)).norm() == 0.0);
}

TEST_CASE("base_average and quadrature oracle") {
    auto f = random_real_map(2, 1, 1, 3, 1.0, 31);
    auto avg = base_average(f);
    for (const auto& [fr, v] : avg.coeffs()) {
        CHECK(fr[0] == 0);
        CHECK(fr[1] == 0);
    }
    CHECK(base_average(subtract_base_average(f)).coeffs().empty());

    // trapezoid quadrature over x on an 8x8 grid is exact for bandwidth 3
    Rng rng(5);
    for (int t = 0; t < 5; ++t) {
        double y = rng.uniform();
        long double acc = 0;
        int G = 8;
        for (int i = 0; i < G; ++i)
            for (int j = 0; j < G; ++j) {
                Eigen::VectorXd z(3);
                z << double(i) / G, double(j) / G, y;
                acc += f.evaluate(z)(0);
            }
        Eigen::VectorXd zy(3);
        zy << 0.0, 0.0, y;
        CHECK(avg.evaluate(zy)(0) == doctest::Approx(double(acc) / (G * G)).epsilon(1e-10));
    }
}

TEST_CASE("linearity of pullback, smooth_truncate, base_average") {
    LatticeMatrix A(2, {2, 1, 1, 1});
    auto f = random_real_map(2, 1, 1, 3, 1.0, 41);
    auto g = random_real_map(2, 1, 1, 3, 1.0, 42);
    double a = 0.7, b = -1.3;
    auto combo = Cplx(a, 0) * f + Cplx(b, 0) * g;

    auto l1 = pullback(combo, A) - (Cplx(a, 0) * pullback(f, A) + Cplx(b, 0) * pullback(g, A));
    CHECK(cr_majorant(l1, 0) < 1e-12);

    SmoothingParams p;
    p.cutoff = 4.0;
    auto sc = smooth_truncate(combo, p).first;
    auto sf = smooth_truncate(f, p).first;
    auto sg = smooth_truncate(g, p).first;
    CHECK(cr_majorant(sc - (Cplx(a, 0) * sf + Cplx(b, 0) * sg), 0) < 1e-12);

    auto ba = base_average(combo) - (Cplx(a, 0) * base_average(f) + Cplx(b, 0) * base_average(g));
    CHECK(cr_majorant(ba, 0) < 1e-12);
}

TEST_CASE("grid round-trip and aliasing guard") {
    auto f = random_real_map(2, 1, 2, 3, 1.0, 51);
    GridSpec spec{{8, 9, 10}};
    auto g = sample_on_grid(f, spec);
    auto back = grid_to_fourier(g, 2, 1, 0.0);
    CHECK(cr_majorant(back - f, 0) < 1e-12);

    GridSpec tiny{{4, 9, 10}};
    CHECK_THROWS_WITH(sample_on_grid(f, tiny), "aliasing");
}

TEST_CASE("fft kernels agree with the serial reference") {
    Rng rng(6);
    GridSpec spec{{12, 5, 9}};
    int k = 2;
    std::vector<Cplx> a(static_cast<size_t>(spec.points()) * k);
    for (auto& x : a) x = Cplx(rng.sym(), rng.sym());
    auto b = a, c = a;
    fft_axes(a, spec, k, +1, 1);
    fft_axes_serial(b, spec, k, +1);
    fft_axes(c, spec, k, +1, 4);
    double e1 = 0, e2 = 0, scale = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        e1 = std::max(e1, std::abs(a[i] - b[i]));
        e2 = std::max(e2, std::abs(a[i] - c[i]));
        scale = std::max(scale, std::abs(b[i]));
    }
    CHECK(e1 < 1e-11 * scale);
    CHECK(e2 == 0.0);  // thread count must not change bits
}

TEST_CASE("point kernel agrees with the serial reference") {
    auto f = random_real_map(2, 1, 3, 4, 1.0, 61);
    Rng rng(7);
    std::vector<double> pts(300);
    for (auto& p : pts) p = rng.uniform();
    std::vector<double> o1, o2, o3;
    evaluate_at_points(f, pts, o1, 1);
    evaluate_at_points(f, pts, o3, 4);
    evaluate_at_points_serial(f, pts, o2);
    for (size_t i = 0; i < o1.size(); ++i) {
        CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-12));
        CHECK(o1[i] == o3[i]);
    }
}

TEST_CASE("transform of a product is the coefficient convolution") {
    auto f = cosine(1, 0, {1});
    auto g = cosine(1, 0, {2});
    // sample the pointwise product and transform back
    GridSpec spec{{16}};
    auto pts = grid_points(spec);
    GridData d;
    d.spec = spec;
    d.k = 1;
    d.vals.resize(16);
    for (int i = 0; i < 16; ++i) {
        Eigen::VectorXd z(1);
        z << pts[static_cast<size_t>(i)];
        d.vals[static_cast<size_t>(i)] = f.evaluate(z)(0) * g.evaluate(z)(0);
    }
    auto prod = grid_to_fourier(d, 1, 0, 0.0);
    // cos a cos b = 1/2(cos(a+b)+cos(a-b)): freqs ±1, ±3 at 1/4
    CHECK(prod.coeff({3}).norm() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(prod.coeff({1}).norm() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(prod.coeff({0}).norm() < 1e-13);
}

TEST_CASE("compose_with_map") {
    ComposeOptions opts;
    auto f = random_real_map(2, 1, 1, 3, 1.0, 71);
    FourierMap h0(2, 1, 3);
    CHECK(cr_majorant(compose_with_map(f, h0, opts) - f, 0) < 1e-12);

    // f constant is unchanged
    FourierMap cst(2, 1, 1);
    Eigen::VectorXcd one(1);
    one << Cplx(2.5, 0.0);
    cst.set_coeff({0, 0, 0}, one);
    auto h = random_real_map(2, 1, 3, 2, 0.02, 72);
    auto cc = compose_with_map(cst, h, opts);
    CHECK(cr_majorant(cc - cst, 0) < 1e-12);

    // pointwise evaluation oracle
    auto fh = compose_with_map(f, h, opts);
    Rng rng(8);
    for (int t = 0; t < 100; ++t) {
        auto z = rand_point(rng, 3);
        Eigen::VectorXd w = z + h.evaluate(z);
        CHECK(fh.evaluate(z)(0) == doctest::Approx(f.evaluate(w)(0)).epsilon(1e-8));
    }

    // too-large displacement is rejected
    auto big = random_real_map(2, 1, 3, 2, 0.5, 73);
    CHECK_THROWS_WITH(compose_with_map(f, big, opts), "not a certified diffeomorphism");
}

TEST_CASE("invert_near_identity") {
    ComposeOptions opts;
    FourierMap h0(2, 1, 3);
    CHECK(invert_near_identity(h0, opts).coeffs().empty());

    // constant displacement inverts to its negative
    FourierMap cst(2, 1, 3);
    Eigen::VectorXcd v(3);
    v << Cplx(0.01, 0.0), Cplx(-0.02, 0.0), Cplx(0.005, 0.0);
    cst.set_coeff({0, 0, 0}, v);
    auto gi = invert_near_identity(cst, opts);
    CHECK(cr_majorant(gi - Cplx(-1.0, 0.0) * cst, 0) < 1e-12);

    auto h = random_real_map(2, 1, 3, 2, 0.03, 81);
    double defect = 0;
    auto g = invert_near_identity(h, opts, &defect);
    CHECK(defect < 1e-10);
    // identity holds to 1e-10 on the computation grid; off-grid accuracy is
    // limited by the spectral tail of g (checked at a looser gate)
    GridSpec spec = grid_for_bandwidth(h.per_axis_bandwidth(), opts.oversample, opts.gridCap);
    auto pts = grid_points(spec);
    double worstGrid = 0;
    for (int64_t p = 0; p < spec.points(); ++p) {
        Eigen::VectorXd z(3);
        for (int a = 0; a < 3; ++a) z(a) = pts[static_cast<size_t>(p) * 3 + a];
        Eigen::VectorXd w = z + g.evaluate(z);
        worstGrid = std::max(worstGrid, (w + h.evaluate(w) - z).norm());
    }
    CHECK(worstGrid < 1e-10);
    Rng rng(9);
    for (int t = 0; t < 100; ++t) {
        auto z = rand_point(rng, 3);
        Eigen::VectorXd w = z + g.evaluate(z);
        Eigen::VectorXd back = w + h.evaluate(w);
        CHECK((back - z).norm() < 1e-8);
    }

    // round-trip composition
    ComposeOptions o2;
    auto f = random_real_map(2, 1, 1, 3, 1.0, 82);
    auto fwd = compose_with_map(f, h, o2);
    auto rt = compose_with_map(fwd, g, o2);
    CHECK(cr_majorant(rt - f, 0) < 1e-8);
}

TEST_CASE("random_real_map determinism and normalization") {
    auto a = random_real_map(2, 1, 2, 3, 1e-3, 123);
    auto b = random_real_map(2, 1, 2, 3, 1e-3, 123);
    CHECK(cr_majorant(a - b, 0) == 0.0);
    CHECK(cr_majorant(a, 1) == doctest::Approx(1e-3).epsilon(1e-12));
    auto c = random_real_map(2, 1, 2, 3, 1e-3, 124);
    CHECK(cr_majorant(a - c, 0) > 0.0);
    CHECK(random_real_map(2, 1, 2, 3, 0.0, 125).coeffs().empty());
}
