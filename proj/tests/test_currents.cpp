#include <doctest.h>

#include <cmath>

#include "spinlat/currents.hpp"
#include "spinlat/rng.hpp"

using namespace spinlat;

TEST_CASE("doubling identity") {
    SUBCASE("single site with ghost") {
        SmallGraph g(1, true, 0.3);
        g.set_coupling(0, g.ghost(), 1.0);
        const auto rep = check_doubling(g);
        CHECK(rep.pass);
        CHECK(rep.rel_err < 1e-12);
    }
    SUBCASE("two free sites") {
        SmallGraph g(2, false, 0.0);
        g.set_coupling(0, 1, 0.5);
        const auto rep = check_doubling(g);
        CHECK(rep.pass);
        // doubling of a free system squares its partition function
        CHECK(rep.lhs == doctest::Approx(std::pow(graph_partition(g, 3u, 1.0, 0.0, 0), 2.0)));
    }
    SUBCASE("ghostless field-free chain") {
        SmallGraph g = SmallGraph::chain(3, 0.7, 0.0, 0.0);
        CHECK(check_doubling(g).pass);
    }
}

TEST_CASE("partition product identity") {
    SUBCASE("empty graph") {
        SmallGraph g(0, false, 0.4);
        const auto rep = check_partition_product(g);
        CHECK(rep.pass);
        CHECK(rep.lhs == doctest::Approx(1.0));
        CHECK(rep.rhs == doctest::Approx(1.0));
    }
    SUBCASE("single site with ghost") {
        SmallGraph g(1, true, 0.3);
        g.set_coupling(0, g.ghost(), 1.0);
        const auto rep = check_partition_product(g);
        CHECK(rep.pass);
        CHECK(rep.rel_err < 1e-12);
        // closed form: 2 cosh(2h) + 2 cosh(2w)
        CHECK(rep.rhs == doctest::Approx(2.0 * std::cosh(0.6) + 2.0 * std::cosh(2.0)));
    }
    SUBCASE("chain of four with ghost ends") {
        const auto rep = check_partition_product(SmallGraph::chain(4, 0.6, 0.5, 0.2));
        CHECK(rep.pass);
        CHECK(rep.rel_err < 1e-9);
    }
}

TEST_CASE("difference product identity") {
    SUBCASE("symmetric ghostless graphs vanish on both sides") {
        SmallGraph g = SmallGraph::chain(3, 0.8, 0.0, 0.0);
        const auto rep = check_difference_product(g);
        CHECK(rep.pass);
        CHECK(std::abs(rep.lhs) < 1e-12);
        CHECK(std::abs(rep.rhs) < 1e-12);
    }
    SUBCASE("single site with ghost has the closed form") {
        const double w = 0.7, h = 0.25;
        SmallGraph g(1, true, h);
        g.set_coupling(0, g.ghost(), w);
        const auto rep = check_difference_product(g);
        CHECK(rep.pass);
        CHECK(rep.lhs == doctest::Approx(4.0 * std::sinh(2.0 * w)).epsilon(1e-12));
    }
    SUBCASE("no path to the ghost forces zero") {
        SmallGraph g(2, true, 0.3);
        g.set_coupling(1, g.ghost(), 0.9);  // the marked site 0 stays disconnected
        const auto rep = check_difference_product(g, 0);
        CHECK(rep.pass);
        CHECK(std::abs(rep.lhs) < 1e-12);
        CHECK(std::abs(rep.rhs) < 1e-12);
    }
}

TEST_CASE("current weights and boundaries") {
    SmallGraph g(2, true, 0.4);
    g.set_coupling(0, 1, 0.5);
    g.set_coupling(1, g.ghost(), 0.3);

    SUBCASE("empty current") {
        CurrentConfig n;
        CHECK(current_weight(g, n, 2.0, 0.8, true) == doctest::Approx(1.0));
        CHECK(current_boundary(g, n).empty());
    }
    SUBCASE("even edge multiplicity") {
        CurrentConfig n;
        n.add_edge(0, 1, 2);  // doubled coupling 1.0: weight 1/2!
        CHECK(current_weight(g, n, 2.0, 0.0, true) == doctest::Approx(0.5));
        CHECK(current_boundary(g, n).empty());
    }
    SUBCASE("odd edge sources both ends") {
        CurrentConfig n;
        n.add_edge(0, 1, 1);
        CHECK(current_boundary(g, n) == std::vector<int>{0, 1});
    }
    SUBCASE("vertex currents enter the parity") {
        CurrentConfig n;
        n.l[0] = 1;
        CHECK(current_boundary(g, n) == std::vector<int>{0});
        CHECK(current_weight(g, n, 2.0, 0.8, true) == doctest::Approx(0.8));
    }
    SUBCASE("ghost support needs the plus variant") {
        CurrentConfig n;
        n.add_edge(1, g.ghost(), 1);
        CHECK_THROWS_AS(current_weight(g, n, 2.0, 0.0, false), contract_error);
        CHECK(current_weight(g, n, 2.0, 0.0, true) == doctest::Approx(0.6));
    }
}

TEST_CASE("source expansion") {
    SUBCASE("single site: odd series of the doubled ghost weight") {
        SmallGraph g(1, true, 0.0);
        g.set_coupling(0, g.ghost(), 0.5);  // doubled: 1.0
        const auto rep = check_source_expansion(g, 20);
        CHECK(rep.pass);
        CHECK(rep.lhs == doctest::Approx(std::sinh(1.0)).epsilon(1e-12));
        CHECK(rep.rhs == doctest::Approx(std::sinh(1.0)).epsilon(1e-10));
    }
    SUBCASE("two sites chained to the ghost") {
        SmallGraph g(2, true, 0.0);
        g.set_coupling(0, 1, 0.4);
        g.set_coupling(1, g.ghost(), 0.6);
        const auto rep = check_source_expansion(g, 30);
        CHECK(rep.pass);
        CHECK(rep.cauchy_gap < 1e-9);
    }
    SUBCASE("no couplings: both sides vanish") {
        SmallGraph g(2, true, 0.0);
        const auto rep = check_source_expansion(g, 10);
        CHECK(rep.pass);
        CHECK(rep.lhs == doctest::Approx(0.0));
        CHECK(rep.rhs == doctest::Approx(0.0));
    }
}

TEST_CASE("parity resummation") {
    SUBCASE("isolated origin sums the even field series") {
        SmallGraph g(1, false, 0.3);
        CurrentConfig k;
        const auto rep = check_parity_resummation(g, k, 25);
        CHECK(rep.pass);
        CHECK(rep.rhs == doctest::Approx(std::cosh(0.6)));
        CHECK(!rep.note.empty());  // origin parity is even: the odd-class reading differs
    }
    SUBCASE("one odd edge makes both sites odd") {
        SmallGraph g(2, false, 0.3);
        g.set_coupling(0, 1, 0.4);
        CurrentConfig k;
        k.add_edge(0, 1, 1);
        const auto rep = check_parity_resummation(g, k, 25);
        CHECK(rep.pass);
        // sinh(2h)^2 times the edge weight 0.8^1/1!
        CHECK(rep.rhs == doctest::Approx(std::pow(std::sinh(0.6), 2.0) * 0.8));
        CHECK(rep.note.empty());  // origin odd: conventional reading agrees
    }
    SUBCASE("zero field vanishes unless every degree is even") {
        SmallGraph g(2, false, 0.0);
        g.set_coupling(0, 1, 0.4);
        CurrentConfig k;
        k.add_edge(0, 1, 1);
        const auto rep = check_parity_resummation(g, k, 25);
        CHECK(rep.pass);
        CHECK(rep.rhs == doctest::Approx(0.0));
    }
}

TEST_CASE("component resummation") {
    SUBCASE("empty region") {
        SmallGraph g(0, false, 0.3);
        const auto rep = check_component_resummation(g, 10);
        CHECK(rep.pass);
        CHECK(rep.lhs == doctest::Approx(1.0));
    }
    SUBCASE("single site") {
        SmallGraph g(1, false, 0.3);
        const auto rep = check_component_resummation(g, 40);
        CHECK(rep.pass);
        // normalized free sum: cosh(2h); the only component weight is the even series
        CHECK(rep.lhs == doctest::Approx(std::cosh(0.6)));
    }
    SUBCASE("two sites with an edge") {
        SmallGraph g(2, false, 0.2);
        g.set_coupling(0, 1, 0.5);
        const auto rep = check_component_resummation(g, 30);
        CHECK(rep.pass);
        CHECK(rep.abs_err < 1e-8);
    }
}

TEST_CASE("current clusters and the frontier radius") {
    SUBCASE("path of two unit edges") {
        SmallGraph g(3, false, 0.0);
        g.set_coupling(0, 1, 0.5);
        g.set_coupling(1, 2, 0.5);
        CurrentConfig k;
        k.add_edge(0, 1, 1);
        k.add_edge(1, 2, 1);
        const auto cl = current_cluster(g, k, 1);
        CHECK(cl.ball == std::vector<int>{0, 1});
        REQUIRE(cl.frontier.size() == 1);
        CHECK(cl.frontier[0] == std::pair<int, int>{1, 2});
    }
    SUBCASE("zero current keeps the origin alone") {
        SmallGraph g(3, false, 0.0);
        g.set_coupling(0, 1, 0.5);
        CurrentConfig k;
        for (int r = 0; r < 3; ++r) {
            const auto cl = current_cluster(g, k, r);
            CHECK(cl.ball == std::vector<int>{0});
            CHECK(cl.frontier.empty());
        }
    }
    SUBCASE("sampled chain currents satisfy the radius bound") {
        Rng rng(55);
        const int L = 8;
        for (int trial = 0; trial < 20; ++trial) {
            SmallGraph g = SmallGraph::chain(L, 0.5, 0.4, 0.0);
            CurrentConfig k;
            // a unit path from the origin to the right ghost edge keeps the
            // sources at {0, ghost}; even extra multiples preserve parity
            for (int i = 0; i + 1 < L; ++i) k.add_edge(i, i + 1, 1 + 2 * int(rng.below(3)));
            k.add_edge(L - 1, g.ghost(), 1);
            CHECK(current_boundary(g, k) == std::vector<int>{0, g.ghost()});
            CHECK(frontier_radius(g, k, 0.5, L, 1) < double(L) / 2.0);
        }
    }
}

TEST_CASE("current boundaries add modulo two") {
    Rng rng(66);
    for (int trial = 0; trial < 50; ++trial) {
        SmallGraph g(4, true, 0.2);
        g.set_coupling(0, 1, 0.3);
        g.set_coupling(1, 2, 0.3);
        g.set_coupling(2, 3, 0.3);
        g.set_coupling(3, g.ghost(), 0.4);
        auto random_current = [&]() {
            CurrentConfig n;
            for (const auto& ed : g.edges(g.full_mask(), true))
                n.add_edge(ed.a, ed.b, int(rng.below(4)));
            for (int v = 0; v < g.n(); ++v) n.l[v] = int(rng.below(3));
            return n;
        };
        const auto a = random_current(), b = random_current();
        CurrentConfig sum = a;
        for (const auto& [e, m] : b.k) sum.k[e] += m;
        for (const auto& [v, m] : b.l) sum.l[v] += m;
        // symmetric difference of the source sets
        auto ba = current_boundary(g, a), bb = current_boundary(g, b);
        std::vector<int> sym;
        for (int v = 0; v <= g.n(); ++v) {
            const bool ina = std::find(ba.begin(), ba.end(), v) != ba.end();
            const bool inb = std::find(bb.begin(), bb.end(), v) != bb.end();
            if (ina != inb) sym.push_back(v);
        }
        CHECK(current_boundary(g, sum) == sym);
    }
}

TEST_CASE("randomized corpus passes every identity") {
    const auto reports = run_identity_corpus(30, 6, 32, 2024);
    CHECK(reports.size() >= 90);
    for (const auto& r : reports) {
        CAPTURE(r.identity);
        CAPTURE(r.rel_err);
        CHECK(r.pass);
    }
}

TEST_CASE("reports serialize to a json array") {
    const auto reports = run_identity_corpus(2, 3, 16, 5);
    const auto json = reports_to_json(reports);
    CHECK(json.front() == '[');
    CHECK(json.find("\"identity\"") != std::string::npos);
    CHECK(json.find("\"pass\"") != std::string::npos);
}
