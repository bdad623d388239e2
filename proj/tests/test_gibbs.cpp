#include <doctest.h>

#include <cmath>

#include "spinlat/gibbs.hpp"
#include "spinlat/rng.hpp"

using namespace spinlat;

TEST_CASE("energy bookkeeping") {
    SUBCASE("field only") {
        const auto g = make_geometry(1, {1}, 1, Boundary::free_);
        const GibbsSpec spec(g, CouplingKernel(1), 1.0);
        CHECK(minus_energy(spec, SpinConfig::all_plus(*g)) == doctest::Approx(1.0));
    }
    SUBCASE("one unordered pair") {
        const auto g = make_geometry(1, {2}, 1, Boundary::free_);
        const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(1, 0.5), 0.0);
        CHECK(minus_energy(spec, SpinConfig::all_plus(*g)) == doctest::Approx(0.5));
    }
    SUBCASE("boundary term counts exterior neighbors") {
        const auto g = make_geometry(1, {1}, 1, Boundary::plus);
        const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(1, 1.0), 0.0);
        CHECK(minus_energy(spec, SpinConfig::all_minus(*g)) == doctest::Approx(-2.0));
    }
}

TEST_CASE("exact single-site law") {
    const auto g = make_geometry(1, {1}, 1, Boundary::free_);
    const double h = 0.8;
    const GibbsSpec spec(g, CouplingKernel(1), h);
    CHECK(partition_function(spec) == doctest::Approx(2.0 * std::cosh(h)));
    CHECK(exact_site_magnetization(spec, 0) == doctest::Approx(std::tanh(h)));
}

TEST_CASE("decoupled sites ignore the boundary condition") {
    for (Boundary b : {Boundary::plus, Boundary::minus, Boundary::free_}) {
        const auto g = make_geometry(1, {4}, 1, b);
        const GibbsSpec spec(g, CouplingKernel(1), 0.6);
        CHECK(exact_site_magnetization(spec, 0) == doctest::Approx(std::tanh(0.6)).epsilon(1e-13));
    }
}

TEST_CASE("transfer matrix agrees with enumeration") {
    const double j = 1.0, h = 0.2;
    for (Boundary b : {Boundary::plus, Boundary::minus, Boundary::free_}) {
        const auto g = make_geometry(1, {4}, 1, b);
        const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(1, j), h);
        const double exact = exact_site_magnetization(spec, center_site(*g));
        CHECK(transfer_magnetization_1d(4, j, h, b) == doctest::Approx(exact).epsilon(1e-12));
    }

    SUBCASE("random instances") {
        Rng rng(3);
        for (int i = 0; i < 20; ++i) {
            const int L = 2 + int(rng.below(9));
            const double jj = rng.uniform(0.0, 1.0), hh = rng.uniform(-1.0, 1.0);
            const Boundary b = std::array{Boundary::plus, Boundary::minus, Boundary::free_}[rng.below(3)];
            const auto g = make_geometry(1, {L}, 1, b);
            const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(1, jj), hh);
            const double exact = exact_site_magnetization(spec, center_site(*g));
            CHECK(transfer_magnetization_1d(L, jj, hh, b) == doctest::Approx(exact).epsilon(1e-10));
        }
    }
}

TEST_CASE("transfer symmetry at zero field") {
    CHECK(std::abs(transfer_magnetization_1d(33, 0.7, 0.0, Boundary::free_)) < 1e-14);
}

TEST_CASE("long chains reach the closed-form bulk magnetization") {
    // textbook result for the infinite nearest-neighbor chain
    for (const auto& [j, h] : std::vector<std::pair<double, double>>{{1.0, 0.3}, {0.5, 0.1}, {0.8, -0.4}}) {
        const double bulk = std::sinh(h) / std::sqrt(std::sinh(h) * std::sinh(h) + std::exp(-4.0 * j));
        for (Boundary b : {Boundary::free_, Boundary::plus, Boundary::minus})
            CHECK(transfer_magnetization_1d(2001, j, h, b) == doctest::Approx(bulk).epsilon(1e-10));
    }
}

TEST_CASE("spin-flip covariance of the center magnetization") {
    const double j = 0.8, h = 0.35;
    const auto gp = make_geometry(1, {4}, 1, Boundary::plus);
    const auto gm = make_geometry(1, {4}, 1, Boundary::minus);
    const double a = exact_site_magnetization(GibbsSpec(gp, CouplingKernel::nearest_neighbor(1, j), h),
                                              center_site(*gp));
    const double b = exact_site_magnetization(GibbsSpec(gm, CouplingKernel::nearest_neighbor(1, j), -h),
                                              center_site(*gm));
    CHECK(a == doctest::Approx(-b).epsilon(1e-12));
    CHECK(transfer_magnetization_1d(9, j, h, Boundary::plus) ==
          doctest::Approx(-transfer_magnetization_1d(9, j, -h, Boundary::minus)).epsilon(1e-12));
}

TEST_CASE("boundary gap is positive and shrinks with the box") {
    double prev = 2.0;
    for (int L : {8, 16, 32, 64}) {
        const double gap = transfer_magnetization_1d(L, 1.0, 0.3, Boundary::plus) -
                           transfer_magnetization_1d(L, 1.0, 0.3, Boundary::minus);
        CHECK(gap > 0.0);
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("wsm gap via enumeration") {
    SUBCASE("no couplings, no gap") {
        const auto r = wsm_gap(1, 4, 0.0, 0.4, GapMethod::enumeration);
        CHECK(r.gap == 0.0);
    }
    SUBCASE("zero field: gap equals twice the plus magnetization") {
        const auto gp = make_geometry(2, {4, 4}, 1, Boundary::plus);
        const double mp =
            exact_site_magnetization(GibbsSpec(gp, CouplingKernel::nearest_neighbor(2, 0.3), 0.0), center_site(*gp));
        const auto r = wsm_gap(2, 4, 0.3, 0.0, GapMethod::enumeration);
        CHECK(r.gap == doctest::Approx(2.0 * mp).epsilon(1e-12));
    }
    SUBCASE("transfer and enumeration agree on the gap") {
        const auto a = wsm_gap(1, 4, 1.0, 0.2, GapMethod::enumeration);
        const auto b = wsm_gap(1, 4, 1.0, 0.2, GapMethod::transfer);
        CHECK(a.gap == doctest::Approx(b.gap).epsilon(1e-12));
    }
}

TEST_CASE("mcmc matches exact answers within noise") {
    SUBCASE("single site") {
        const auto g = make_geometry(1, {1}, 1, Boundary::free_);
        const GibbsSpec spec(g, CouplingKernel(1), 0.5);
        const auto r = mcmc_expectation(spec, [](const SpinConfig& c) { return double(c.spin(0)); }, 4.0,
                                        3000, 0.5, 11);
        CHECK(std::abs(r.estimate - std::tanh(0.5)) < 3.5 * r.stderr_);
    }
    SUBCASE("chain against the transfer matrix") {
        const auto g = make_geometry(1, {16}, 1, Boundary::plus);
        const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(1, 1.0), 0.2);
        const int c = center_site(*g);
        const auto r = mcmc_expectation(spec, [c](const SpinConfig& cfg) { return double(cfg.spin(c)); },
                                        6.0, 1500, 0.5, 12);
        CHECK(std::abs(r.estimate - transfer_magnetization_1d(16, 1.0, 0.2, Boundary::plus)) <
              3.5 * r.stderr_);
    }
    SUBCASE("small square against enumeration") {
        const auto g = make_geometry(2, {4, 4}, 1, Boundary::plus);
        const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(2, 0.3), 0.0);
        const int c = center_site(*g);
        const double exact = exact_site_magnetization(spec, c);
        const auto r = mcmc_expectation(spec, [c](const SpinConfig& cfg) { return double(cfg.spin(c)); },
                                        6.0, 1500, 0.4, 13);
        CHECK(std::abs(r.estimate - exact) < 3.5 * r.stderr_);
    }
}

TEST_CASE("wsm gap by mcmc agrees with the transfer matrix") {
    McmcParams mp{4.0, 1200, 0.4};
    const auto a = wsm_gap(1, 8, 0.5, 0.2, GapMethod::mcmc, 31, mp);
    const auto b = wsm_gap(1, 8, 0.5, 0.2, GapMethod::transfer);
    CHECK(std::abs(a.gap - b.gap) < 4.0 * a.stderr_);
}

TEST_CASE("region subsets drop couplings into the rest of the box") {
    // two adjacent sites, region = {0} only: no pair term, no term to site 1
    const auto g = make_geometry(1, {2}, 1, Boundary::plus);
    const GibbsSpec spec(g, {0}, CouplingKernel::nearest_neighbor(1, 1.0), 0.0);
    // site 0 still couples to the exterior on its left
    CHECK(minus_energy(spec, SpinConfig(1, +1)) == doctest::Approx(1.0));
    CHECK(partition_function(spec) == doctest::Approx(2.0 * std::cosh(1.0)));
}

TEST_CASE("enumeration size cap") {
    const auto g = make_torus(1, 21, 1);
    const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(1, 1.0), 0.0);
    CHECK_THROWS_AS(partition_function(spec), contract_error);
}
