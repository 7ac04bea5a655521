#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "shockrel/gamma_convolution.hpp"
#include "shockrel/rng.hpp"
#include "test_support.hpp"

using namespace shockrel;
using Catch::Approx;

TEST_CASE("two exponentials with rates 1 and 2") {
    const auto e = expand({1, 1.0, 1, 2.0});
    REQUIRE(e.coeffs_a.size() == 1);
    REQUIRE(e.coeffs_b.size() == 1);
    CHECK(e.coeffs_a[0] == Approx(2.0).epsilon(1e-14));
    CHECK(e.coeffs_b[0] == Approx(-1.0).epsilon(1e-14));
    CHECK(convolution_cdf({1, 1.0, 1, 2.0}, 1.0) == Approx(0.399576400893728049).epsilon(1e-14));
}

TEST_CASE("coefficients sum to one") {
    for (std::uint64_t a = 1; a <= 6; ++a) {
        for (std::uint64_t b = 1; b <= 6; ++b) {
            for (auto [ra, rb] : {std::pair{0.5, 1.0}, std::pair{1.0, 3.0}, std::pair{2.0, 0.7}}) {
                const auto e = expand({a, ra, b, rb});
                double s = 0.0;
                for (double c : e.coeffs_a) s += c;
                for (double d : e.coeffs_b) s += d;
                INFO(a << " " << b << " " << ra << " " << rb);
                CHECK(std::abs(s - 1.0) <= 1e-10);
            }
        }
    }
}

TEST_CASE("expansion reproduces the product transform") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> s_dist(0.0, 10.0);
    for (const ErlangProduct p : {ErlangProduct{2, 1.0, 1, 3.0}, ErlangProduct{4, 0.5, 3, 3.0}, ErlangProduct{3, 2.0, 5, 1.1}}) {
        const auto e = expand(p);
        for (int i = 0; i < 20; ++i) {
            const double s = s_dist(gen);
            CHECK(std::abs(expansion_transform(e, s) - product_transform(p, s)) <= 1e-9);
        }
    }
}

TEST_CASE("equal and near-equal rates are refused by expand") {
    CHECK_THROWS_AS(expand({2, 1.5, 3, 1.5}), EqualRates);
    CHECK_THROWS_AS(expand({2, 1.0, 3, 1.0 + 1e-9}), IllConditioned);
    CHECK_THROWS_AS(expand({0, 1.0, 3, 2.0}), InvalidParameter);
    CHECK_THROWS_AS(expand({1, -1.0, 3, 2.0}), InvalidParameter);
}

TEST_CASE("equal rates merge into a single Erlang law") {
    CHECK(convolution_cdf({2, 1.5, 3, 1.5}, 2.0) == special::erlang_unit_cdf(5, 3.0));
    CHECK(convolution_cdf({2, 1.0, 0, 4.0}, 1.0) == Approx(0.264241117657115357).epsilon(1e-15));
    CHECK(convolution_cdf({0, 1.0, 0, 4.0}, 0.0) == 1.0);
    CHECK(convolution_cdf({1, 1.0, 1, 2.0}, 0.0) == 0.0);
    CHECK_THROWS_AS(convolution_cdf({1, 1.0, 1, 2.0}, -1.0), DomainError);
}

TEST_CASE("frozen high-precision values") {
    struct Case {
        ErlangProduct p;
        double x, expected;
    };
    for (const Case& c : {Case{{2, 1.0, 1, 3.0}, 1.5, 0.327832270420149937}, Case{{4, 0.5, 3, 3.0}, 7.0, 0.353172046654149209},
                          Case{{20, 1.0, 30, 1.7}, 35.0, 0.329621164495003016},
                          Case{{60, 2.0, 45, 1.0}, 70.0, 0.266198168759791331}}) {
        INFO(c.p.shape_a << " " << c.p.rate_a << " " << c.p.shape_b << " " << c.p.rate_b);
        CHECK(convolution_cdf(c.p, c.x) == Approx(c.expected).epsilon(1e-11));
    }
}

TEST_CASE("symmetric in its two factors") {
    for (double x : {0.3, 1.0, 4.0, 12.0}) {
        for (const ErlangProduct p : {ErlangProduct{2, 1.0, 1, 3.0}, ErlangProduct{7, 0.4, 3, 2.5}, ErlangProduct{25, 1.0, 40, 2.0}}) {
            const ErlangProduct swapped{p.shape_b, p.rate_b, p.shape_a, p.rate_a};
            CHECK(std::abs(convolution_cdf(p, x) - convolution_cdf(swapped, x)) <= 1e-12);
        }
    }
}

TEST_CASE("mixture route agrees with partial fractions where both are accurate") {
    for (double x : {0.2, 1.0, 2.5, 6.0}) {
        for (const ErlangProduct p : {ErlangProduct{1, 1.0, 1, 2.0}, ErlangProduct{3, 2.0, 2, 0.5}, ErlangProduct{4, 3.0, 4, 1.0}}) {
            ConvolutionEvaluator ev(p.rate_a, p.rate_b, x);
            const double pf = ev.partial_fraction_cdf(expand(p));
            CHECK(std::abs(mixture_convolution_cdf(p, x) - pf) <= 1e-12);
        }
    }
}

TEST_CASE("near-equal rates stay continuous with the equal-rate law") {
    const double base = special::erlang_unit_cdf(5, 2.0);
    CHECK(convolution_cdf({2, 1.0, 3, 1.0 + 1e-9}, 2.0) == Approx(base).epsilon(1e-8));
    CHECK(convolution_cdf({2, 1.0, 3, 1.0 - 1e-12}, 2.0) == Approx(base).epsilon(1e-10));
}

TEST_CASE("agrees with trapezoid integration of the convolution integral") {
    for (const ErlangProduct p : {ErlangProduct{2, 0.5, 3, 2.0}, ErlangProduct{4, 3.0, 1, 1.0}}) {
        for (double x : {0.5, 2.0, 5.0}) {
            const double ref = testing::trapezoid_convolution_cdf(static_cast<int>(p.shape_a), p.rate_a,
                                                                  static_cast<int>(p.shape_b), p.rate_b, x, 1e-4);
            CHECK(std::abs(convolution_cdf(p, x) - ref) <= 1e-7);
        }
    }
}

TEST_CASE("agrees with simulated sums") {
    const ErlangProduct p{3, 2.0, 2, 0.7};
    const std::uint64_t n = 400'000;
    UniformStream rng(31, 0);
    std::vector<double> sums(n);
    for (auto& s : sums) {
        s = 0.0;
        for (std::uint64_t i = 0; i < p.shape_a; ++i) s -= std::log(rng.uniform()) / p.rate_a;
        for (std::uint64_t i = 0; i < p.shape_b; ++i) s -= std::log(rng.uniform()) / p.rate_b;
    }
    for (double x : {1.0, 3.0, 5.0, 9.0}) {
        std::uint64_t hits = 0;
        for (double s : sums) hits += s <= x;
        const double phat = static_cast<double>(hits) / static_cast<double>(n);
        const double exact = convolution_cdf(p, x);
        CHECK(testing::within_se(phat, exact, testing::binomial_se(exact, n)));
    }
}

TEST_CASE("the expansion cache is safe under concurrent use") {
    ExpansionCache cache(64);
    std::vector<double> results(4 * 200);
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < 4; ++w) {
            pool.emplace_back([&, w] {
                for (int i = 0; i < 200; ++i) {
                    const ErlangProduct p{static_cast<std::uint64_t>(1 + i % 9), 1.0,
                                          static_cast<std::uint64_t>(1 + (i / 9) % 5), 2.5};
                    ConvolutionEvaluator ev(p.rate_a, p.rate_b, 3.0, cache);
                    results[static_cast<std::size_t>(w * 200 + i)] = ev.cdf(p.shape_a, p.shape_b);
                }
            });
        }
    }
    for (int w = 1; w < 4; ++w) {
        for (int i = 0; i < 200; ++i) CHECK(results[static_cast<std::size_t>(w * 200 + i)] == results[static_cast<std::size_t>(i)]);
    }
    CHECK(cache.size() <= 64);
}

TEST_CASE("bounded, nondecreasing in x and tends to one") {
    for (const ErlangProduct p : {ErlangProduct{1, 0.5, 4, 3.0}, ErlangProduct{3, 2.0, 2, 1.0}, ErlangProduct{30, 1.0, 12, 1.3}}) {
        double prev = 0.0;
        for (int i = 0; i <= 300; ++i) {
            const double v = convolution_cdf(p, 0.2 * i);
            CHECK(v >= prev);
            CHECK(v <= 1.0);
            prev = v;
        }
        const double far = 50.0 * (static_cast<double>(p.shape_a) / p.rate_a + static_cast<double>(p.shape_b) / p.rate_b);
        CHECK(convolution_cdf(p, far) == Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("Erlang CDF table matches the direct kernel") {
    for (double y : {0.01, 0.7, 3.0, 25.0, 140.0, 900.0}) {
        const ErlangCdfTable table(1.0, y);
        double worst = 0.0;
        for (std::uint64_t j = 0; j < static_cast<std::uint64_t>(y + 20.0 * std::sqrt(y) + 30.0); ++j) {
            worst = std::max(worst, std::abs(table(j) - special::erlang_unit_cdf(j, y)));
        }
        INFO("y=" << y);
        CHECK(worst <= 1e-13);
    }
}

TEST_CASE("large shapes and close rates against high-precision values") {
    CHECK(convolution_cdf({200, 1.0, 150, 1.3}, 300.0) == Approx(0.18340626301443534).epsilon(1e-12));
    CHECK(convolution_cdf({400, 0.2, 30, 5.0}, 2005.0) == Approx(0.50265868092893576).epsilon(1e-12));
    CHECK(convolution_cdf({5, 1.0, 5, 1.0000001}, 9.0) == Approx(0.41259181495809390).epsilon(1e-12));
}
