#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hcr/stats.hpp"
#include "test_util.hpp"

using namespace hcr;

TEST_CASE("rank_vector basics") {
    CHECK(rank_vector({10, 30, 20}) == std::vector<double>{3, 1, 2});
    CHECK(rank_vector({5, 5, 1}) == std::vector<double>{1.5, 1.5, 3});
    CHECK(rank_vector({7}) == std::vector<double>{1});
    CHECK_THROWS(rank_vector({}));
}

TEST_CASE("rank_vector equals counting oracle on random data with ties") {
    std::mt19937 rng(20250811);
    std::uniform_int_distribution<int> value(0, 6);  // small range forces ties
    std::uniform_int_distribution<int> size(1, 40);
    for (int round = 0; round < 500; ++round) {
        std::vector<double> v(size(rng));
        for (auto& x : v) x = value(rng);
        CHECK(rank_vector(v) == oracle::reference_ranks(v));
    }
}

TEST_CASE("t_sf_two_sided trivial points") {
    CHECK(t_sf_two_sided(0.0, 17) == 1.0);
    CHECK(t_sf_two_sided(1.0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t_sf_two_sided(-1.0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("t_sf_two_sided matches frozen high-precision values") {
    // 50-digit reference values, frozen before implementation.
    struct Case {
        int df;
        double t, p;
    };
    const Case cases[] = {
        {1, 0.5, 0.70483276469913345}, {1, 2.0, 0.29516723530086655},
        {1, 7.42, 0.08528394746391335}, {1, 100.0, 0.0063659855298165103},
        {5, 0.5, 0.63829887164092901}, {5, 2.0, 0.10193947882985836},
        {5, 7.42, 0.00070028699142548547}, {5, 25.0, 1.9106777843954234e-6},
        {5, 100.0, 1.8960014224623627e-9}, {30, 0.5, 0.62072300488512729},
        {30, 2.0, 0.054625044962983104}, {30, 7.42, 2.8727791917483189e-8},
        {30, 25.0, 1.2091822381287026e-21}, {30, 100.0, 1.9846117967270249e-39},
        {53, 0.5, 0.61914478266843069}, {53, 2.0, 0.050636385620689934},
        {53, 7.42, 9.5157232386524108e-10}, {53, 25.0, 5.2539391248134604e-31},
        {53, 100.0, 4.6917476674307687e-62},
    };
    for (const auto& c : cases) {
        CAPTURE(c.df);
        CAPTURE(c.t);
        CHECK(t_sf_two_sided(c.t, c.df) == doctest::Approx(c.p).epsilon(1e-10));
    }
    // the value quoted alongside the 0.80 coefficient's sample size
    CHECK(t_sf_two_sided(7.42, 31) == doctest::Approx(2.341944763e-8).epsilon(1e-8));
}

TEST_CASE("t_sf_two_sided matches the quadrature oracle") {
    for (int df : {1, 5, 30, 53}) {
        for (double t : {0.25, 0.5, 1.0, 2.0, 3.5, 7.42, 12.0, 25.0, 50.0, 100.0}) {
            CAPTURE(df);
            CAPTURE(t);
            double want = oracle::t_sf_two_sided_by_quadrature(t, df);
            CHECK(t_sf_two_sided(t, df) == doctest::Approx(want).epsilon(1e-8));
            CHECK(t_sf_two_sided(-t, df) == doctest::Approx(want).epsilon(1e-8));
        }
    }
}

TEST_CASE("log-space survives far beyond double underflow") {
    // df=53, t=1e3 has log10 p ~ -112; t=1e6 goes far below 1e-300 in
    // intermediate terms yet the log stays finite and monotone.
    double lp1 = log_t_sf_two_sided(1e3, 53);
    double lp2 = log_t_sf_two_sided(1e6, 53);
    CHECK(std::isfinite(lp1));
    CHECK(std::isfinite(lp2));
    CHECK(lp2 < lp1);
    // linear value agrees with exp(log value) where both are representable
    double p = t_sf_two_sided(40.0, 30);
    CHECK(std::log(p) == doctest::Approx(log_t_sf_two_sided(40.0, 30)).epsilon(1e-10));
    // p around 1e-300 still representable in the linear return
    // (df=1: p ~ 2/(pi t) -> need huge t; use df=30 and t chosen by scan)
    double t = 1e10;
    double small = t_sf_two_sided(t, 30);
    CHECK(small > 0.0);
    CHECK(std::isfinite(log_t_sf_two_sided(t, 30)));
}

TEST_CASE("pearson on the 5-point fixture") {
    auto series = PairedSeries::make({"a", "b", "c", "d", "e"}, {1, 2, 3, 4, 5},
                                     {2, 1, 5, 4, 6});
    CorrelationResult r = pearson(series);
    // frozen from the direct two-pass formula at 50 digits
    CHECK(r.r == doctest::Approx(0.83874213682932566).epsilon(1e-12));
    CHECK(r.p_two_sided == doctest::Approx(0.0758264911736).epsilon(1e-9));
    CHECK(r.n == 5);
    CHECK(r.excluded.empty());
}

TEST_CASE("pearson affine case is exact") {
    std::vector<double> xs{1, 2, 3, 4, 7};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2 * x + 7);
    auto series = PairedSeries::make({"a", "b", "c", "d", "e"}, xs, ys);
    CorrelationResult r = pearson(series);
    CHECK(r.r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pearson properties: affine invariance, sign flip, symmetry") {
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss(0.0, 3.0);
    for (int round = 0; round < 200; ++round) {
        std::size_t n = 3 + rng() % 20;
        std::vector<std::string> labels;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back("c" + std::to_string(i));
            xs.push_back(gauss(rng));
            ys.push_back(gauss(rng));
        }
        CorrelationResult base;
        try {
            base = pearson(PairedSeries::make(labels, xs, ys));
        } catch (const StatError&) {
            continue;  // constant series can occur, skip
        }
        CHECK(base.r >= -1.0);
        CHECK(base.r <= 1.0);
        CHECK(base.p_two_sided > 0.0);
        CHECK(base.p_two_sided <= 1.0);

        std::vector<double> scaled;
        for (double x : xs) scaled.push_back(2.5 * x + 11.0);
        CorrelationResult affine = pearson(PairedSeries::make(labels, scaled, ys));
        CHECK(affine.r == doctest::Approx(base.r).epsilon(1e-12));

        std::vector<double> flipped;
        for (double x : xs) flipped.push_back(-3.0 * x);
        CorrelationResult flip = pearson(PairedSeries::make(labels, flipped, ys));
        CHECK(flip.r == doctest::Approx(-base.r).epsilon(1e-12));

        CorrelationResult swapped = pearson(PairedSeries::make(labels, ys, xs));
        CHECK(swapped.r == doctest::Approx(base.r).epsilon(1e-14));
    }
}

TEST_CASE("spearman equals pearson over average ranks, 1000 random series") {
    std::mt19937 rng(123456);
    std::uniform_int_distribution<int> value(0, 9);  // ties guaranteed
    for (int round = 0; round < 1000; ++round) {
        std::size_t n = 4 + rng() % 12;
        std::vector<std::string> labels;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back("c" + std::to_string(i));
            xs.push_back(value(rng));
            ys.push_back(value(rng));
        }
        auto series = PairedSeries::make(labels, xs, ys);
        CorrelationResult sp;
        try {
            sp = spearman(series);
        } catch (const StatError&) {
            continue;
        }
        auto rank_series = PairedSeries::make(labels, rank_vector(xs), rank_vector(ys));
        CorrelationResult pe = pearson(rank_series);
        CHECK(sp.r == pe.r);  // oracle identity, exact
        CHECK(sp.p_two_sided == pe.p_two_sided);
    }
}

TEST_CASE("spearman on the tie fixture matches the hand-enumerated value") {
    auto series = PairedSeries::make({"a", "b", "c", "d", "e", "f"},
                                     {3.0, 1.0, 4.0, 1.0, 5.0, 9.0},
                                     {2.0, 7.0, 1.0, 8.0, 2.8, 1.8});
    CorrelationResult r = spearman(series);
    // ranks (desc, ties averaged): x -> [4, 5.5, 3, 5.5, 2, 1], y -> [4, 2, 6, 1, 3, 5]
    CHECK(r.r == doctest::Approx(-0.69572524278293809).epsilon(1e-14));

    CorrelationResult exact = spearman(series, {}, PValueMode::EXACT_PERMUTATION);
    CHECK(exact.r == r.r);
    // 104 of the 720 permutations are at least as extreme
    CHECK(exact.p_two_sided == doctest::Approx(104.0 / 720.0).epsilon(1e-14));
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
    std::mt19937 rng(99);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int round = 0; round < 100; ++round) {
        std::size_t n = 5 + rng() % 10;
        std::vector<std::string> labels;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            labels.push_back("c" + std::to_string(i));
            xs.push_back(gauss(rng));
            ys.push_back(gauss(rng));
        }
        CorrelationResult base;
        try {
            base = spearman(PairedSeries::make(labels, xs, ys));
        } catch (const StatError&) {
            continue;
        }
        std::vector<double> warped;
        for (double x : xs) warped.push_back(std::exp(x) + x * x * x);
        CorrelationResult after = spearman(PairedSeries::make(labels, warped, ys));
        CHECK(after.r == base.r);  // ranks unchanged, exact
    }
}

TEST_CASE("monotone series give rho exactly 1") {
    auto series = PairedSeries::make({"a", "b", "c", "d"}, {1, 2, 3, 4},
                                     {10, 100, 1000, 10000});
    CorrelationResult r = spearman(series);
    CHECK(r.r == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.p_two_sided == 0.0);  // degenerate limit of the t approximation
}

TEST_CASE("p decreases as |r| grows at fixed n") {
    int df = 20;
    double last = 1.0;
    for (double r : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
        double t = r * std::sqrt(df / ((1.0 - r) * (1.0 + r)));
        double p = t_sf_two_sided(t, df);
        CHECK(p < last);
        CHECK(p > 0.0);
        CHECK(p <= 1.0);
        last = p;
    }
}

TEST_CASE("exclusions are honest") {
    auto series = PairedSeries::make({"USA", "GBR", "DEU", "FRA", "JPN"},
                                     {10, 8, 6, 4, 2}, {9, 7, 6, 5, 1});
    CorrelationResult r = pearson(series, {"USA", "NOT_PRESENT"});
    CHECK(r.n == 4);
    CHECK(r.excluded == std::vector<std::string>{"USA"});

    CorrelationResult full = pearson(series);
    CHECK(full.n == 5);
    CHECK(full.excluded.empty());
}

TEST_CASE("error paths") {
    auto series = PairedSeries::make({"a", "b", "c"}, {1, 1, 1}, {1, 2, 3});
    CHECK_THROWS_AS(pearson(series), StatError);
    CHECK_THROWS_AS(pearson(PairedSeries::make({"a", "b", "c", "d"}, {1, 2, 3, 4},
                                               {1, 2, 3, 4}),
                            {"a", "b"}),
                    StatError);
    CHECK_THROWS(PairedSeries::make({"a", "a", "b"}, {1, 2, 3}, {1, 2, 3}));
    CHECK_THROWS(PairedSeries::make({"a", "b"}, {1, 2}, {1, 2}));
    CHECK_THROWS(spearman(PairedSeries::make(
                              {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k"},
                              {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11},
                              {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}),
                          {}, PValueMode::EXACT_PERMUTATION));
}
