#include <catch_amalgamated.hpp>

#include <cmath>

#include "shockrel/catastrophic.hpp"
#include "shockrel/montecarlo.hpp"
#include "test_support.hpp"

using namespace shockrel;
using Catch::Approx;

TEST_CASE("survival probability examples") {
    const CatastrophicModel exp12{Exponential{1.0}, Exponential{2.0}};
    CHECK(survival_probability(exp12, 0.0) == 1.0);
    CHECK(survival_probability(exp12, 1.0) == Approx(0.049787068367863943).epsilon(1e-14));
    CHECK(survival_probability({Erlang{2, 1.0}, Erlang{1, 1.0}}, 1.0) == Approx(0.270670566473225384).epsilon(1e-14));
    CHECK(survival_probability({Weibull{0.5, 1.0}, Erlang{4, 3.0}}, 0.0) == 1.0);
}

TEST_CASE("fptf cdf examples") {
    CHECK(fptf_cdf({Exponential{1.0}, Exponential{2.0}}, 0.0) == 0.0);
    CHECK(fptf_cdf({Weibull{2.0, 1.0}, Weibull{2.0, 2.0}}, 1.0) == Approx(0.713495203139809900).epsilon(1e-14));
    CHECK(fptf_cdf({Exponential{1.0}, Exponential{2.0}}, 1.0) == Approx(1.0 - 0.049787068367863943).epsilon(1e-14));
    CHECK_THROWS_AS(fptf_cdf({Exponential{1.0}, Exponential{2.0}}, -0.5), DomainError);
}

TEST_CASE("survival is the product of marginals and decreases") {
    const CatastrophicModel m{Erlang{3, 0.8}, Weibull{1.4, 2.0}};
    double prev = 1.0;
    for (int i = 0; i <= 200; ++i) {
        const double t = 0.05 * i;
        const double s = survival_probability(m, t);
        CHECK(s == survival(m.proc1, t) * survival(m.proc2, t));
        CHECK(s <= prev);
        CHECK(s <= std::min(survival(m.proc1, t), survival(m.proc2, t)));
        prev = s;
    }
}

TEST_CASE("closed-form means") {
    CHECK(mean_fptf({Exponential{1.0}, Exponential{2.0}}) == Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(mean_fptf({Erlang{2, 1.0}, Erlang{1, 1.0}}) == Approx(0.75).epsilon(1e-14));
    CHECK(mean_fptf({Exponential{1.0}, Erlang{2, 1.0}}) == Approx(0.75).epsilon(1e-14));
    CHECK(mean_fptf({Weibull{2.0, 1.0}, Weibull{2.0, 1.0}}) == Approx(0.626657068657750168).epsilon(1e-14));
    CHECK(mean_fptf({Erlang{3, 2.0}, Erlang{3, 2.0}}) == Approx(1.03125).epsilon(1e-13));
    CHECK(mean_fptf({Erlang{2, 1.0}, Erlang{2, 3.0}}) == Approx(0.59375).epsilon(1e-13));
}

TEST_CASE("quadrature means") {
    CHECK(std::abs(mean_fptf_quadrature({Exponential{1.0}, Exponential{1.0}}) - 0.5) <= 1e-10);
    CHECK(std::abs(mean_fptf_quadrature({Weibull{1.0, 1.0}, Weibull{1.0, 0.5}}) - 1.0 / 3.0) <= 1e-10);
    CHECK(mean_fptf({Erlang{2, 1.0}, Erlang{3, 1.0}}) == Approx(1.5625).epsilon(1e-10));
    CHECK(mean_fptf({Erlang{2, 1.0}, Weibull{2.0, 1.0}}) == Approx(0.772820680382523521).epsilon(1e-10));
    CHECK(mean_fptf({Weibull{0.5, 1.0}, Weibull{1.5, 2.0}}) == Approx(0.707985794265697147).epsilon(1e-10));
}

TEST_CASE("route dispatch") {
    CHECK(mean_fptf_route({Exponential{1.0}, Exponential{2.0}}) == MeanFptfRoute::ErlangWithExponential);
    CHECK(mean_fptf_route({Exponential{1.0}, Erlang{4, 2.0}}) == MeanFptfRoute::ErlangWithExponential);
    CHECK(mean_fptf_route({Erlang{3, 1.0}, Erlang{3, 2.0}}) == MeanFptfRoute::ErlangEqualShape);
    CHECK(mean_fptf_route({Erlang{2, 1.0}, Erlang{3, 2.0}}) == MeanFptfRoute::Quadrature);
    CHECK(mean_fptf_route({Weibull{2.0, 1.0}, Weibull{2.0, 3.0}}) == MeanFptfRoute::WeibullEqualShape);
    CHECK(mean_fptf_route({Weibull{2.0, 1.0}, Weibull{1.5, 3.0}}) == MeanFptfRoute::Quadrature);
    CHECK(mean_fptf_route({Weibull{2.0, 1.0}, Exponential{1.0}}) == MeanFptfRoute::Quadrature);
}

TEST_CASE("every closed form agrees with quadrature") {
    for (std::uint64_t m = 1; m <= 6; ++m) {
        for (double r1 : {0.5, 1.0, 2.0}) {
            for (double r2 : {0.5, 1.7, 3.0}) {
                const CatastrophicModel model{Erlang{m, r1}, Erlang{m, r2}};
                INFO("m=" << m << " rates " << r1 << " " << r2);
                CHECK(mean_fptf(model) == Approx(mean_fptf_quadrature(model)).epsilon(1e-9));
                const CatastrophicModel mixed{Erlang{m, r1}, Exponential{r2}};
                CHECK(mean_fptf(mixed) == Approx(mean_fptf_quadrature(mixed)).epsilon(1e-9));
            }
        }
    }
    for (double a : {0.5, 1.0, 2.5}) {
        const CatastrophicModel w{Weibull{a, 1.3}, Weibull{a, 0.4}};
        CHECK(mean_fptf(w) == Approx(mean_fptf_quadrature(w)).epsilon(1e-9));
    }
}

TEST_CASE("mean failure time never exceeds either marginal mean") {
    for (const CatastrophicModel& m : {CatastrophicModel{Erlang{3, 0.5}, Erlang{3, 2.0}},
                                       CatastrophicModel{Weibull{0.5, 1.0}, Weibull{1.5, 2.0}},
                                       CatastrophicModel{Erlang{5, 1.0}, Weibull{3.0, 4.0}}}) {
        const double v = mean_fptf(m);
        CHECK(v > 0.0);
        CHECK(v <= std::min(mean(m.proc1), mean(m.proc2)));
    }
}

TEST_CASE("Monte Carlo agreement for the mean") {
    SimulationConfig cfg{1'000'000, 8101, 1};
    for (const CatastrophicModel& m :
         {CatastrophicModel{Erlang{2, 1.0}, Erlang{2, 1.0}}, CatastrophicModel{Exponential{1.0}, Exponential{2.0}}}) {
        const auto s = simulate_catastrophic(m, cfg);
        CHECK(testing::within_se(s.mean().mean, mean_fptf(m), s.mean().std_error));
    }
}

TEST_CASE("quadrature budget exhaustion surfaces as NonConverged") {
    QuadraturePolicy q;
    q.max_evaluations = 30;
    q.rel_tol = 1e-14;
    CHECK_THROWS_AS(mean_fptf({Weibull{0.3, 1.0}, Weibull{0.7, 2.0}}, q), NonConverged);
}

TEST_CASE("invalid models are rejected") {
    CHECK_THROWS_AS(mean_fptf({Exponential{0.0}, Exponential{1.0}}), InvalidParameter);
    CHECK_THROWS_AS(validate(CatastrophicModel{Exponential{1.0}, Weibull{1.0, -2.0}}), InvalidParameter);
}

TEST_CASE("fptf cdf and survival sum to one") {
    const CatastrophicModel m{Weibull{0.8, 1.0}, Erlang{4, 3.0}};
    for (int i = 0; i <= 100; ++i) {
        const double t = 0.07 * i;
        CHECK(fptf_cdf(m, t) + survival_probability(m, t) == Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("a single-phase Erlang and the exponential dispatch identically") {
    for (std::uint64_t m = 1; m <= 5; ++m) {
        CHECK(mean_fptf({Erlang{m, 1.3}, Erlang{1, 0.4}}) == mean_fptf({Erlang{m, 1.3}, Exponential{0.4}}));
        CHECK(mean_fptf({Erlang{1, 0.4}, Erlang{m, 1.3}}) == mean_fptf({Exponential{0.4}, Erlang{m, 1.3}}));
    }
}

TEST_CASE("faster shocks never lengthen the mean failure time") {
    const std::vector<double> rates = {0.3, 0.6, 1.0, 1.7, 3.0};
    for (std::uint64_t m1 : {1u, 2u, 3u}) {
        for (std::uint64_t m2 : {1u, 3u}) {
            for (double r2 : rates) {
                double prev = INFINITY;
                for (double r1 : rates) {
                    const double v = mean_fptf({Erlang{m1, r1}, Erlang{m2, r2}});
                    CHECK(v <= prev * (1.0 + 1e-12));
                    prev = v;
                }
            }
        }
    }
    for (double a : {0.5, 2.0}) {
        double prev = 0.0;
        for (double scale : {0.2, 0.5, 1.0, 2.0, 5.0}) {
            const double v = mean_fptf({Weibull{a, scale}, Weibull{1.5, 1.0}});
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("the equal-shape closed form passes its self-check") {
    CHECK(detail::equal_shape_form_verified());
}
