#include <doctest.h>

#include <cmath>
#include <sstream>

#include "spinlat/gibbs.hpp"
#include "spinlat/rates.hpp"
#include "spinlat/rng.hpp"

using namespace spinlat;

namespace {

// random ferromagnetic heat-bath family for property sweeps
RateFamily random_glauber(Rng& rng, GeometryPtr geom) {
    CouplingKernel k(geom->dim());
    for (int a = 0; a < geom->dim(); ++a) {
        Coords o{};
        o[a] = 1;
        k.add(o, rng.uniform(0.0, 1.0));
    }
    return glauber_rates(k, rng.uniform(-1.0, 1.0), rng.uniform(0.05, 1.0), geom);
}

// random attractive table built from monotone linear scores
RateFamily random_monotone_table(Rng& rng, GeometryPtr geom) {
    const int m = geom->n_offsets();
    const int center = geom->center_offset();
    std::vector<double> w(m);
    for (double& x : w) x = rng.uniform(0.0, 0.5);
    const double a = rng.uniform(0.1, 1.0), b = rng.uniform(0.1, 1.0);
    std::vector<double> table(std::size_t(1) << m);
    for (std::size_t p = 0; p < table.size(); ++p) {
        double up = 0.0, down = 0.0;
        for (int k = 0; k < m; ++k) {
            if (k == center) continue;
            ((p >> k) & 1u ? up : down) += w[k];
        }
        table[p] = (p >> center) & 1u ? b + down : a + up;
    }
    return RateFamily::from_table(geom, table);
}

}  // namespace

TEST_CASE("heat-bath rate values") {
    // isolated site: rate depends on the field only
    const auto g1 = make_geometry(1, {1}, 1, Boundary::free_);
    const auto r1 = glauber_rates(CouplingKernel(1), 0.5, 1.0, g1);
    CHECK(r1.rate(0, local_pattern(*g1, SpinConfig::all_plus(*g1), 0)) == doctest::Approx(std::exp(-0.5)));

    // chain, all-plus pattern: effective field 2J
    const auto g2 = make_torus(1, 5, 1);
    const auto r2 = glauber_rates(CouplingKernel::nearest_neighbor(1, 1.0), 0.0, 0.5, g2);
    CHECK(r2.rate(0, 7u) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("ferromagnetic heat-bath rates are attractive") {
    Rng rng(42);
    for (int i = 0; i < 100; ++i) {
        const auto geom = i % 2 ? make_torus(1, 6, 1) : make_torus(2, 4, 1);
        CHECK(is_attractive(random_glauber(rng, geom)));
    }
}

TEST_CASE("an antiferromagnetic bond breaks attractivity with a witness") {
    const auto g = make_torus(1, 6, 1);
    CouplingKernel k(1);
    k.add({1}, -0.5);
    CHECK_THROWS_AS(glauber_rates(k, 0.0, 1.0, g), schema_error);
    const auto r = glauber_rates_general(k, 0.0, 1.0, g);
    const auto w = attractivity_witness(r);
    REQUIRE(w.has_value());
    // the witness is a genuine violation
    const auto& t = r.table(w->class_id);
    const std::uint32_t cb = 1u << g->center_offset();
    const bool plus = (w->upper_pattern & cb) != 0;
    CHECK((plus ? t[w->lower_pattern] < t[w->upper_pattern]
                : t[w->upper_pattern] < t[w->lower_pattern]));
}

TEST_CASE("constant rates are attractive") {
    const auto g = make_torus(1, 4, 1);
    CHECK(is_attractive(RateFamily::from_table(g, std::vector<double>(8, 1.0))));
}

TEST_CASE("perturbation distance") {
    const auto g = make_torus(1, 4, 1);
    const auto c0 = RateFamily::from_table(g, std::vector<double>(8, 1.0));
    CHECK(epsilon_distance(c0, c0) == 0.0);

    auto t1 = std::vector<double>(8, 1.0);
    t1[3] += 0.05;
    const auto c1 = RateFamily::from_table(g, t1);
    CHECK(epsilon_distance(c0, c1) == doctest::Approx(0.1));

    SUBCASE("symmetry and triangle bound") {
        Rng rng(7);
        for (int i = 0; i < 25; ++i) {
            std::vector<double> a(8), b(8), c(8);
            for (int p = 0; p < 8; ++p) {
                a[p] = rng.uniform(0.0, 2.0);
                b[p] = rng.uniform(0.0, 2.0);
                c[p] = rng.uniform(0.0, 2.0);
            }
            const auto fa = RateFamily::from_table(g, a), fb = RateFamily::from_table(g, b),
                       fc = RateFamily::from_table(g, c);
            const double ab = epsilon_distance(fa, fb);
            CHECK(ab == epsilon_distance(fb, fa));
            CHECK(ab >= 0.0);
            CHECK(epsilon_distance(fa, fc) <= ab + epsilon_distance(fb, fc) + 1e-12);
        }
    }
}

TEST_CASE("checkerboard perturbation distance matches the direct scan") {
    const auto g = make_torus(2, 4, 1);
    const double beta = 0.4, delta = 0.02;
    const auto cr = checkerboard_perturbation(CouplingKernel::nearest_neighbor(2, 1.0), 0.0, beta, delta, g);
    // worst pattern: |effective field| = 4 against the spin, warmer class
    const double eps_analytic = 2.0 * (std::exp((beta + delta) * 4.0) - std::exp(beta * 4.0));
    CHECK(cr.epsilon == doctest::Approx(eps_analytic).epsilon(1e-12));
    CHECK(cr.epsilon == doctest::Approx(epsilon_distance(cr.c0, cr.c1)).epsilon(1e-14));
    CHECK(cr.lambda == doctest::Approx(2.0 * std::max(cr.c0.sup_rate(), cr.c1.sup_rate())));

    SUBCASE("delta = 0 collapses to the base family") {
        const auto cr0 = checkerboard_perturbation(CouplingKernel::nearest_neighbor(2, 1.0), 0.0, beta, 0.0, g);
        CHECK(cr0.epsilon == 0.0);
        CHECK(cr0.c1.n_classes() == 1);
        CHECK(cr0.c1.table(0) == cr0.c0.table(0));
    }

    SUBCASE("large delta can break attractivity without an error") {
        const auto crx = checkerboard_perturbation(CouplingKernel::nearest_neighbor(2, 1.0), 0.0, 0.3, 0.5, g);
        CHECK(!is_attractive(crx.c1));  // the cold class has a negative coupling
        CHECK(is_attractive(crx.c0));
    }

    SUBCASE("small delta keeps per-site attractivity but breaks translation invariance") {
        CHECK(is_attractive(cr.c1));
        CHECK(!cr.c1.translation_invariant());
    }
}

TEST_CASE("random monotone tables pass the attractivity scan") {
    Rng rng(99);
    for (int i = 0; i < 20; ++i) CHECK(is_attractive(random_monotone_table(rng, make_torus(1, 8, 1))));
}

TEST_CASE("detailed balance validates the rate sign convention") {
    // temperature-absorbed spec: couplings beta*J, field beta*h
    const double beta = 0.7, h = 0.3;
    const auto g = make_torus(1, 4, 1);
    const auto rates = glauber_rates(CouplingKernel::nearest_neighbor(1, 1.0), h, beta, g);
    const GibbsSpec spec(g, CouplingKernel::nearest_neighbor(1, beta), beta * h);
    CHECK(check_detailed_balance(rates, spec) < 1e-12);

    SUBCASE("the opposite exponent sign is far from reversible") {
        std::vector<double> flipped(8);
        const auto& t = rates.table(0);
        // invert each entry: exp(+x) instead of exp(-x)
        for (int p = 0; p < 8; ++p) flipped[p] = 1.0 / t[p];
        const auto wrong = RateFamily::from_table(g, flipped);
        CHECK(check_detailed_balance(wrong, spec) > 1e-3);
    }

    SUBCASE("a product measure factorizes") {
        const auto free1 = make_geometry(1, {4}, 1, Boundary::free_);
        const auto r0 = glauber_rates(CouplingKernel(1), 0.4, 1.3, free1);
        const GibbsSpec s0(free1, CouplingKernel(1), 1.3 * 0.4);
        CHECK(check_detailed_balance(r0, s0) < 1e-14);
    }
}

TEST_CASE("free boundaries reject tables that read exterior offsets") {
    const auto free_box = make_geometry(1, {4}, 1, Boundary::free_);
    // the free-mode builder handles boundary sites with per-class tables
    const auto ok = glauber_rates(CouplingKernel::nearest_neighbor(1, 1.0), 0.0, 0.5, free_box);
    CHECK(ok.n_classes() == 3);  // left edge, interior, right edge

    // a uniform coupled table would read the missing neighbors
    const auto torus = make_torus(1, 4, 1);
    const auto coupled = glauber_rates(CouplingKernel::nearest_neighbor(1, 1.0), 0.0, 0.5, torus);
    CHECK_THROWS_AS(RateFamily::from_table(free_box, coupled.table(0)), contract_error);
}

TEST_CASE("longer-range kernels") {
    SUBCASE("range-2 chain: attractive and reversible") {
        const auto g = make_geometry(1, {6}, 2, Boundary::periodic);
        CouplingKernel k(1);
        k.add({1}, 0.5);
        k.add({2}, 0.25);
        const auto r = glauber_rates(k, 0.1, 0.6, g);
        CHECK(is_attractive(r));
        CouplingKernel absorbed(1);
        absorbed.add({1}, 0.6 * 0.5);
        absorbed.add({2}, 0.6 * 0.25);
        CHECK(check_detailed_balance(r, GibbsSpec(g, absorbed, 0.6 * 0.1)) < 1e-12);
    }
    SUBCASE("diagonal couplings need the matching range") {
        CouplingKernel diag(2);
        diag.add({1, 1}, 0.3);
        CHECK_THROWS_AS(glauber_rates(diag, 0.0, 0.5, make_torus(2, 4, 1)), schema_error);
        const auto g2 = make_torus(2, 5, 2);
        const auto r = glauber_rates(diag, 0.0, 0.5, g2);
        // two diagonal neighbors: the largest opposing field is 2 * 0.3
        CHECK(r.sup_rate() == doctest::Approx(std::exp(0.5 * 2 * 0.3)));
        // the exhaustive pair scan is capped at 16 offsets; the 5x5 cube is out
        CHECK_THROWS_AS(is_attractive(r), contract_error);
    }
}

TEST_CASE("rate table export lists class and pattern") {
    const auto g = make_torus(1, 4, 1);
    const auto r = RateFamily::from_table(g, std::vector<double>(8, 0.5));
    std::ostringstream os;
    r.export_csv(os);
    CHECK(os.str().substr(0, 19) == "class,pattern,rate\n");
}
