#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "holopart/havin.hpp"
#include "holopart/rng.hpp"

using namespace holopart;

TEST_CASE("boundary sets: masks, measure, interior, run lengths", "[havin]") {
    CircleGrid g(1024);
    auto arc = BoundarySet::arc(g, 1.0, 0.1);
    REQUIRE(arc.measure() == Catch::Approx(0.1).margin(0.01));
    auto runs = arc.to_arcs();
    REQUIRE(runs.size() == 1);
    REQUIRE(runs[0].second == static_cast<std::size_t>(arc.measure() * g.n));

    auto inner = arc.interior(0.02);
    std::size_t count = 0;
    for (std::size_t j = 0; j < g.n; ++j) {
        if (inner[j]) {
            ++count;
            REQUIRE(arc.mask[j] == 1);
        }
    }
    REQUIRE(count > 0);
    REQUIRE(count < static_cast<std::size_t>(arc.measure() * g.n));

    auto full = BoundarySet::full_circle(g);
    auto full_inner = full.interior(0.5);
    for (auto m : full_inner) REQUIRE(m == 1);
    REQUIRE(full.to_arcs().size() == 1);
    REQUIRE(full.to_arcs()[0].second == g.n);

    auto cantor = BoundarySet::cantor_like(g, 3.0, 0.3, 2);
    REQUIRE(cantor.to_arcs().size() == 4);
}

TEST_CASE("empty set gives the degenerate pair", "[havin]") {
    CircleGrid g(1024);
    auto pair = havin_pair(BoundarySet::empty_set(g), 0.01);
    for (auto v : pair.alpha.values()) REQUIRE(std::abs(v) == 0.0);
    for (auto v : pair.beta.values()) REQUIRE(std::abs(v - cplx(1.0, 0.0)) == 0.0);
    REQUIRE(pair.report.budget_max <= 1.0 + 1e-9);
    REQUIRE(pair.report.alpha_dev == 0.0);
    REQUIRE(pair.report.beta_max == 0.0);
}

TEST_CASE("full circle pair is the constant pair", "[havin]") {
    CircleGrid g(1024);
    const double eps = 0.01;
    auto pair = havin_pair(BoundarySet::full_circle(g), eps);
    const int N = pair.n_power;
    REQUIRE(N == 5);
    const double expect_beta = std::exp(-static_cast<double>(N));
    for (std::size_t j = 0; j < g.n; j += 97) {
        REQUIRE(std::abs(pair.beta.values()[j] - cplx(expect_beta, 0.0)) < 1e-12);
    }
    REQUIRE(pair.report.beta_max <= eps);
    REQUIRE(pair.report.alpha_dev <= 3.0 * eps / 5.0);
}

TEST_CASE("five properties hold on the standard set suite", "[havin]") {
    CircleGrid g(4096);
    std::vector<BoundarySet> suite;
    suite.push_back(BoundarySet::arc(g, 1.0, 0.1));
    suite.push_back(BoundarySet::arc(g, 4.0, 0.05));
    suite.push_back(BoundarySet::union_of(BoundarySet::arc(g, 0.3, 0.06), BoundarySet::arc(g, 2.6, 0.1)));
    suite.push_back(BoundarySet::cantor_like(g, 3.0, 0.35, 2));
    for (double eps : {0.1, 0.01}) {
        for (const auto& E : suite) {
            auto pair = havin_pair(E, eps);
            const auto& r = pair.report;
            REQUIRE_FALSE(r.interior_empty);
            REQUIRE(r.budget_max <= 1.0 + 1e-9);
            REQUIRE(r.alpha_dev <= eps);
            REQUIRE(r.beta_max <= eps);
            REQUIRE(r.eta_rho <= 0.1);
            // norm bounds with the suite-calibrated constants
            REQUIRE(r.alpha_l1_ratio <= 0.5);
            REQUIRE(r.beta_l2_ratio <= 1.6);
            // exact pointwise budget: |alpha| <= min((1/5)|1-b|^2, 1-|b|)
            REQUIRE(r.budget_chain_violation <= 1e-9);
        }
    }
}

TEST_CASE("random unions of four arcs pass at both epsilons", "[havin]") {
    CircleGrid g(4096);
    SplitMix64 rng(2718);
    for (int rep = 0; rep < 3; ++rep) {
        BoundarySet E = BoundarySet::empty_set(g);
        for (int a = 0; a < 4; ++a) {
            const double center = kTwoPi * rng.uniform01();
            const double measure = 0.04 + 0.06 * rng.uniform01();
            E = BoundarySet::union_of(E, BoundarySet::arc(g, center, measure));
        }
        for (double eps : {0.1, 0.01}) {
            auto pair = havin_pair(E, eps);
            REQUIRE(pair.report.budget_max <= 1.0 + 1e-9);
            if (!pair.report.interior_empty) {
                REQUIRE(pair.report.alpha_dev <= eps);
                REQUIRE(pair.report.beta_max <= eps);
            }
        }
    }
}

TEST_CASE("verification chains between the measured quantities", "[havin]") {
    CircleGrid g(4096);
    auto E = BoundarySet::arc(g, 1.0, 0.1);
    for (double eps : {0.1, 0.01}) {
        auto pair = havin_pair(E, eps);
        const auto& r = pair.report;
        const double N = static_cast<double>(pair.n_power);
        // L2 chain: ||1-beta||_2 <= N ||1-G||_2 and ||1-G||_2 <= 2 ||chi||_2
        REQUIRE(r.one_minus_beta_l2 <= N * r.one_minus_G_l2 * (1.0 + 1e-12));
        REQUIRE(r.one_minus_G_l2 <= 2.0 * r.chi_l2 * (1.0 + 1e-12));
        // item 4 from item 5: ||alpha||_1 <= (1/5) ||1-beta||_2^2
        REQUIRE(r.alpha_l1 <= 0.2 * r.one_minus_beta_l2 * r.one_minus_beta_l2 * (1.0 + 1e-12));
        // on E_rho: |beta| <= e^{-N(1-eta)}
        REQUIRE(r.beta_max <= std::exp(-N * (1.0 - r.eta_rho)) * (1.0 + 1e-9));
    }
}

TEST_CASE("havin_pair validates eps", "[havin]") {
    CircleGrid g(256);
    REQUIRE_THROWS(havin_pair(BoundarySet::arc(g, 1.0, 0.2), 0.0));
    REQUIRE_THROWS(havin_pair(BoundarySet::arc(g, 1.0, 0.2), 1.0));
}
