#include "spinlat/currents.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "spinlat/rng.hpp"

namespace spinlat {

namespace {

constexpr int kMaxVerts = 10;

struct Acc {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

SmallGraph::SmallGraph(int n_vertices, bool with_ghost, double field)
    : n_(n_vertices), ghost_(with_ghost), field_(field) {
    if (n_ < 0 || n_ > kMaxVerts) throw contract_error("small graphs are limited to 10 vertices");
    w_.assign(std::size_t(n_ + 1) * (n_ + 1), 0.0);
}

void SmallGraph::set_coupling(int a, int b, double j) {
    if (a == b) throw schema_error("no self couplings");
    if (a < 0 || b < 0 || a > n_ || b > n_) throw schema_error("vertex out of range");
    if ((a == n_ || b == n_) && !ghost_) throw schema_error("graph has no ghost vertex");
    w_[std::size_t(a) * (n_ + 1) + b] = j;
    w_[std::size_t(b) * (n_ + 1) + a] = j;
}

std::vector<SmallGraph::EdgeRef> SmallGraph::edges(std::uint32_t mask, bool with_ghost_edges) const {
    std::vector<EdgeRef> out;
    for (int a = 0; a < n_; ++a) {
        if (!((mask >> a) & 1u)) continue;
        for (int b = a + 1; b < n_; ++b)
            if (((mask >> b) & 1u) && coupling(a, b) != 0.0) out.push_back({a, b, coupling(a, b)});
        if (ghost_ && with_ghost_edges && coupling(a, n_) != 0.0) out.push_back({a, n_, coupling(a, n_)});
    }
    return out;
}

SmallGraph SmallGraph::chain(int n_vertices, double j, double ghost_end_weight, double field) {
    SmallGraph g(n_vertices, ghost_end_weight != 0.0, field);
    for (int i = 0; i + 1 < n_vertices; ++i) g.set_coupling(i, i + 1, j);
    if (ghost_end_weight != 0.0) {
        g.set_coupling(0, g.ghost(), ghost_end_weight);
        if (n_vertices > 1) g.set_coupling(n_vertices - 1, g.ghost(), ghost_end_weight);
    }
    return g;
}

namespace {

// spin sums over a vertex subset
template <typename F>
void for_each_assignment(std::uint32_t mask, int n, F&& body) {
    std::vector<int> verts;
    for (int v = 0; v < n; ++v)
        if ((mask >> v) & 1u) verts.push_back(v);
    const std::uint32_t top = std::uint32_t(1) << verts.size();
    std::vector<double> spin(n, 0.0);
    for (std::uint32_t a = 0; a < top; ++a) {
        for (std::size_t i = 0; i < verts.size(); ++i) spin[verts[i]] = (a >> i) & 1u ? 1.0 : -1.0;
        body(spin);
    }
}

double spin_sum(const SmallGraph& g, std::uint32_t mask, double scale, double field, int bc, int moment_site) {
    const auto es = g.edges(mask, false);
    Acc acc;
    for_each_assignment(mask, g.n(), [&](const std::vector<double>& s) {
        double e = 0.0;
        for (const auto& ed : es) e += scale * ed.j * s[ed.a] * s[ed.b];
        for (int v = 0; v < g.n(); ++v)
            if ((mask >> v) & 1u) {
                e += field * s[v];
                if (bc != 0 && g.has_ghost()) e += scale * g.coupling(v, g.ghost()) * s[v] * bc;
            }
        const double w = std::exp(e);
        acc.add(moment_site >= 0 ? w * s[moment_site] : w);
    });
    return acc.sum;
}

int popcount(std::uint32_t m) { return __builtin_popcount(m); }

}  // namespace

double graph_partition(const SmallGraph& g, std::uint32_t mask, double scale, double field, int bc) {
    return spin_sum(g, mask, scale, field, bc, -1);
}

double graph_partition_normalized(const SmallGraph& g, std::uint32_t mask, double scale, double field, int bc) {
    return spin_sum(g, mask, scale, field, bc, -1) / double(std::uint32_t(1) << popcount(mask));
}

double graph_magnetization(const SmallGraph& g, std::uint32_t mask, double scale, double field, int bc,
                           int site) {
    if (!((mask >> site) & 1u)) throw contract_error("site not in the region");
    return spin_sum(g, mask, scale, field, bc, site) / spin_sum(g, mask, scale, field, bc, -1);
}

void CurrentConfig::add_edge(int a, int b, int mult) {
    if (a > b) std::swap(a, b);
    k[{a, b}] += mult;
}

double current_weight(const SmallGraph& g, const CurrentConfig& n, double scale, double field,
                      bool plus_variant) {
    double w = 1.0;
    for (const auto& [edge, mult] : n.k) {
        if (mult == 0) continue;
        const auto [a, b] = edge;
        if (b == g.n() && !plus_variant)
            throw contract_error("free-variant current supported on a ghost edge");
        const double j = scale * g.coupling(a, b);
        if (j == 0.0) return 0.0;
        double f = 1.0;
        for (int i = 1; i <= mult; ++i) f *= j / double(i);
        w *= f;
    }
    for (const auto& [v, mult] : n.l) {
        if (mult == 0) continue;
        double f = 1.0;
        for (int i = 1; i <= mult; ++i) f *= field / double(i);
        w *= f;
    }
    return w;
}

std::vector<int> current_boundary(const SmallGraph& g, const CurrentConfig& n) {
    std::vector<int> deg(g.n() + 1, 0);
    for (const auto& [edge, mult] : n.k) {
        deg[edge.first] += mult;
        deg[edge.second] += mult;
    }
    for (const auto& [v, mult] : n.l) deg[v] += mult;
    std::vector<int> out;
    for (int v = 0; v <= g.n(); ++v)
        if (deg[v] % 2 != 0) {
            if (v == g.n() && !g.has_ghost()) throw contract_error("current touches a missing ghost");
            out.push_back(v);
        }
    return out;
}

namespace {

std::uint64_t graph_hash(const SmallGraph& g) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](double v) {
        char buf[8];
        std::memcpy(buf, &v, 8);
        h ^= fnv1a(buf, 8);
        h *= 0x100000001b3ULL;
    };
    mix(double(g.n()));
    mix(g.has_ghost() ? 1.0 : 0.0);
    mix(g.field());
    for (int a = 0; a <= g.n(); ++a)
        for (int b = a + 1; b <= g.n(); ++b) mix(g.coupling(a, b));
    return h;
}

IdentityReport make_report(const char* name, const SmallGraph& g, double lhs, double rhs, int trunc,
                           double cauchy, double tol_scale) {
    IdentityReport r;
    r.identity = name;
    r.instance_hash = graph_hash(g);
    r.lhs = lhs;
    r.rhs = rhs;
    r.abs_err = std::abs(lhs - rhs);
    // relative to the natural magnitude of the identity, so that vanishing
    // sides compare against the partition scale rather than against zero
    const double denom = std::max({std::abs(lhs), std::abs(rhs), tol_scale, 1e-300});
    r.rel_err = r.abs_err / denom;
    r.truncation = trunc;
    r.cauchy_gap = cauchy;
    const double tol = trunc ? 1e-8 : 1e-9;
    r.pass = r.abs_err <= tol * std::max(1.0, tol_scale) &&
             (trunc == 0 || cauchy <= tol * std::max(1.0, tol_scale));
    return r;
}

void require_small(const SmallGraph& g, int max_n, const char* what) {
    if (g.n() > max_n) throw contract_error(std::string(what) + ": graph too large");
}

}  // namespace

IdentityReport check_doubling(const SmallGraph& g) {
    require_small(g, 8, "doubling check");
    const std::uint32_t full = g.full_mask();
    const double lhs =
        graph_partition(g, full, 1.0, g.field(), +1) * graph_partition(g, full, 1.0, g.field(), -1);

    // per-vertex states under the exclusion rule: 0 chi=-1, 1 chi=+1,
    // 2 eta=-1, 3 eta=+1
    const auto es = g.edges(full, false);
    Acc rhs;
    std::vector<int> state(g.n(), 0);
    const std::uint64_t total = std::uint64_t(1) << (2 * g.n());
    for (std::uint64_t code = 0; code < total; ++code) {
        std::uint64_t c = code;
        for (int v = 0; v < g.n(); ++v) {
            state[v] = int(c & 3u);
            c >>= 2;
        }
        double e = 0.0;
        auto chi = [&](int v) { return state[v] == 0 ? -1.0 : state[v] == 1 ? 1.0 : 0.0; };
        auto eta = [&](int v) { return state[v] == 2 ? -1.0 : state[v] == 3 ? 1.0 : 0.0; };
        for (const auto& ed : es) e += 2.0 * ed.j * (chi(ed.a) * chi(ed.b) + eta(ed.a) * eta(ed.b));
        for (int v = 0; v < g.n(); ++v) {
            e += 2.0 * g.field() * chi(v);
            if (g.has_ghost()) e += 2.0 * g.coupling(v, g.ghost()) * eta(v);
        }
        rhs.add(std::exp(e));
    }
    return make_report("doubling", g, lhs, rhs.sum, 0, 0.0, std::abs(lhs));
}

IdentityReport check_partition_product(const SmallGraph& g) {
    require_small(g, 8, "partition product check");
    const std::uint32_t full = g.full_mask();
    const double lhs =
        graph_partition(g, full, 1.0, g.field(), +1) * graph_partition(g, full, 1.0, g.field(), -1);
    Acc rhs;
    for (std::uint32_t v = 0;; ++v) {
        rhs.add(graph_partition(g, full & ~v, 2.0, 2.0 * g.field(), 0) * graph_partition(g, v, 2.0, 0.0, +1));
        if (v == full) break;
    }
    return make_report("partition_product", g, lhs, rhs.sum, 0, 0.0, std::abs(lhs));
}

namespace {

// is `site` linked to the ghost by nonzero couplings inside mask?
bool ghost_connected(const SmallGraph& g, std::uint32_t mask, int site) {
    if (!g.has_ghost()) return false;
    std::vector<int> stack{site};
    std::uint32_t seen = 1u << site;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (g.coupling(v, g.ghost()) != 0.0) return true;
        for (int y = 0; y < g.n(); ++y)
            if (((mask >> y) & 1u) && !((seen >> y) & 1u) && g.coupling(v, y) != 0.0) {
                seen |= 1u << y;
                stack.push_back(y);
            }
    }
    return false;
}

}  // namespace

IdentityReport check_difference_product(const SmallGraph& g, int marked) {
    require_small(g, 8, "difference product check");
    const std::uint32_t full = g.full_mask();
    const double zp = graph_partition(g, full, 1.0, g.field(), +1);
    const double zm = graph_partition(g, full, 1.0, g.field(), -1);
    const double lhs = zp * zm * (graph_magnetization(g, full, 1.0, g.field(), +1, marked) -
                                  graph_magnetization(g, full, 1.0, g.field(), -1, marked));
    Acc rhs;
    bool support_ok = true;
    for (std::uint32_t v = 0;; ++v) {
        if ((v >> marked) & 1u) {
            const double num = spin_sum(g, v, 2.0, 0.0, +1, marked);  // Z+_V <eta_0>_V
            if (!ghost_connected(g, v, marked) && std::abs(num) > 1e-9)
                support_ok = false;  // ghost-disconnected regions must not contribute
            rhs.add(2.0 * graph_partition(g, full & ~v, 2.0, 2.0 * g.field(), 0) * num);
        }
        if (v == full) break;
    }
    auto rep = make_report("difference_product", g, lhs, rhs.sum, 0, 0.0, std::max(std::abs(zp * zm), 1.0));
    if (!support_ok) {
        rep.pass = false;
        rep.note = "support rule violated: a ghost-disconnected term is nonzero";
    }
    return rep;
}

namespace {

// partial sums of the even/odd exponential series of w, k <= K
std::pair<double, double> series_even_odd(double w, int K) {
    double even = 0.0, odd = 0.0, term = 1.0;
    for (int k = 0; k <= K; ++k) {
        if (k % 2 == 0)
            even += term;
        else
            odd += term;
        term *= w / double(k + 1);
    }
    return {even, odd};
}

// sum over currents with the given source set, edge multiplicities <= K
// (parity transfer over the edge list; only parities matter)
double source_constrained_sum(const SmallGraph& g, int K, std::uint32_t source_mask) {
    const auto es = g.edges(g.full_mask(), true);
    const int bits = g.n() + 1;
    std::vector<double> dp(std::size_t(1) << bits, 0.0);
    dp[0] = 1.0;
    for (const auto& ed : es) {
        const auto [even, odd] = series_even_odd(2.0 * ed.j, K);
        const std::uint32_t flip = (1u << ed.a) | (1u << ed.b);
        std::vector<double> nxt(dp.size(), 0.0);
        for (std::uint32_t m = 0; m < dp.size(); ++m) {
            if (dp[m] == 0.0) continue;
            nxt[m] += dp[m] * even;
            nxt[m ^ flip] += dp[m] * odd;
        }
        dp = std::move(nxt);
    }
    return dp[source_mask];
}

}  // namespace

IdentityReport check_source_expansion(const SmallGraph& g, int truncation) {
    require_small(g, 8, "source expansion check");
    if (!g.has_ghost()) throw contract_error("source expansion needs a ghost vertex");
    const std::uint32_t full = g.full_mask();
    // per-spin normalization makes the expansion exact
    const double lhs = spin_sum(g, full, 2.0, 0.0, +1, 0) / double(std::uint32_t(1) << g.n());
    const std::uint32_t sources = 1u | (1u << g.n());
    const double at_k = source_constrained_sum(g, truncation, sources);
    const double at_2k = source_constrained_sum(g, 2 * truncation, sources);
    auto rep = make_report("source_expansion", g, lhs, at_2k, truncation, std::abs(at_2k - at_k),
                           std::max(std::abs(lhs), 1.0));
    rep.note = "normalized partition functions (counting sum / 2^|V|)";
    return rep;
}

IdentityReport check_parity_resummation(const SmallGraph& g, const CurrentConfig& k, int truncation) {
    require_small(g, 6, "parity resummation check");
    const double h2 = 2.0 * g.field();

    // edge factor shared by both sides
    CurrentConfig edges_only = k;
    edges_only.l.clear();
    const double wk = current_weight(g, edges_only, 2.0, 0.0, false);

    std::vector<int> deg(g.n(), 0);
    for (const auto& [edge, mult] : k.k) {
        if (edge.second == g.n()) throw contract_error("parity resummation is free-variant (no ghost edges)");
        deg[edge.first] += mult;
        deg[edge.second] += mult;
    }

    auto lhs_at = [&](int K) {
        double v = wk;
        const auto [even, odd] = series_even_odd(h2, K);
        for (int x = 0; x < g.n(); ++x) v *= (deg[x] % 2 == 0) ? even : odd;
        return v;
    };
    const double lhs_k = lhs_at(truncation);
    const double lhs_2k = lhs_at(2 * truncation);

    int n_even = 0, n_odd = 0;
    for (int x = 0; x < g.n(); ++x) (deg[x] % 2 == 0 ? n_even : n_odd)++;
    const double closed = wk * std::pow(std::sinh(h2), n_odd) * std::pow(std::cosh(h2), n_even);

    auto rep = make_report("parity_resummation", g, lhs_2k, closed, truncation, std::abs(lhs_2k - lhs_k),
                           std::max(std::abs(closed), 1.0));
    if (deg[0] % 2 == 0) {
        // booking the origin in the odd (sinh) class unconditionally would
        // change the value by a tanh factor; report that reading alongside
        const double printed =
            wk * std::pow(std::sinh(h2), n_odd + 1) * std::pow(std::cosh(h2), std::max(0, n_even - 1));
        std::ostringstream os;
        os.precision(17);
        os << "origin degree even; odd-class-origin reading gives " << printed;
        rep.note = os.str();
    }
    return rep;
}

namespace {

// K_Y at truncation K: source-free currents on the free edges of Y whose
// nonzero-edge component spans Y and contains the origin
double component_weight(const SmallGraph& g, std::uint32_t y_mask, int K) {
    if (y_mask == 0) return 1.0;
    const double h2 = 2.0 * g.field();
    const auto site_series = series_even_odd(h2, K);

    std::vector<int> verts;
    for (int v = 0; v < g.n(); ++v)
        if ((y_mask >> v) & 1u) verts.push_back(v);
    const auto es = g.edges(y_mask, false);

    Acc total;
    const std::uint32_t esize = std::uint32_t(es.size());
    for (std::uint32_t sub = 0; sub < (1u << esize); ++sub) {
        // union-find over the vertices of Y using the present edges
        std::vector<int> parent(g.n());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int v) { return parent[v] == v ? v : parent[v] = find(parent[v]); };
        for (std::uint32_t e = 0; e < esize; ++e)
            if ((sub >> e) & 1u) parent[find(es[e].a)] = find(es[e].b);
        // the whole of Y must sit in the origin's component
        if (!((y_mask >> 0) & 1u)) continue;
        bool connected = true;
        for (int v : verts)
            if (find(v) != find(0)) {
                connected = false;
                break;
            }
        if (!connected) continue;

        // parities of the present edges; vertex factors forced by the degrees
        Acc sub_sum;
        for (std::uint32_t par = 0; par < (1u << popcount(sub)); ++par) {
            double w = 1.0;
            std::vector<int> deg(g.n(), 0);
            int bit = 0;
            for (std::uint32_t e = 0; e < esize; ++e) {
                if (!((sub >> e) & 1u)) continue;
                const auto [even2, odd] = series_even_odd(2.0 * es[e].j, K);
                const bool is_odd = (par >> bit) & 1u;
                // a present edge carries k >= 1: its even class starts at 2
                w *= is_odd ? odd : even2 - 1.0;
                if (is_odd) {
                    deg[es[e].a]++;
                    deg[es[e].b]++;
                }
                ++bit;
            }
            for (int v : verts) w *= (deg[v] % 2 == 0) ? site_series.first : site_series.second;
            sub_sum.add(w);
        }
        total.add(sub_sum.sum);
    }
    return total.sum;
}

}  // namespace

IdentityReport check_component_resummation(const SmallGraph& g, int truncation) {
    require_small(g, 5, "component resummation check");
    const std::uint32_t full = g.full_mask();
    const double lhs = graph_partition_normalized(g, full, 2.0, 2.0 * g.field(), 0);

    auto rhs_at = [&](int K) {
        // without the origin in the region only the empty component occurs
        if (g.n() == 0) return component_weight(g, 0, K) * lhs;
        Acc rhs;
        // Y runs over the possible origin components: subsets containing 0
        for (std::uint32_t y = 0;; ++y) {
            if (y & 1u)
                rhs.add(graph_partition_normalized(g, full & ~y, 2.0, 2.0 * g.field(), 0) *
                        component_weight(g, y, K));
            if (y == full) break;
        }
        return rhs.sum;
    };
    const double rhs_k = rhs_at(truncation);
    const double rhs_2k = rhs_at(2 * truncation);
    auto rep = make_report("component_resummation", g, lhs, rhs_2k, truncation, std::abs(rhs_2k - rhs_k),
                           std::max(std::abs(lhs), 1.0));
    rep.note = "origin-component reading: nonempty Y always contains the origin; normalized partition functions";
    return rep;
}

CurrentCluster current_cluster(const SmallGraph& g, const CurrentConfig& k, int radius) {
    std::vector<int> dist(g.n(), -1);
    dist[0] = 0;
    std::vector<int> frontier_bfs{0};
    while (!frontier_bfs.empty()) {
        std::vector<int> next;
        for (int v : frontier_bfs) {
            for (const auto& [edge, mult] : k.k) {
                if (mult == 0) continue;
                int other = -1;
                if (edge.first == v) other = edge.second;
                if (edge.second == v) other = edge.first;
                if (other < 0 || other >= g.n()) continue;  // never through the ghost
                if (dist[other] < 0) {
                    dist[other] = dist[v] + 1;
                    next.push_back(other);
                }
            }
        }
        frontier_bfs = std::move(next);
    }
    CurrentCluster out;
    auto in_ball = [&](int v) { return v < g.n() && dist[v] >= 0 && dist[v] <= radius; };
    for (int v = 0; v < g.n(); ++v)
        if (in_ball(v)) out.ball.push_back(v);
    for (const auto& [edge, mult] : k.k) {
        if (mult == 0) continue;
        if (in_ball(edge.first) != in_ball(edge.second)) out.frontier.push_back(edge);
    }
    return out;
}

double frontier_radius(const SmallGraph& g, const CurrentConfig& k, double a, int length, int range) {
    const double lo = double(length) / (4.0 * range);
    for (int r = int(std::floor(lo)) + 1; r <= g.n(); ++r) {
        const auto cl = current_cluster(g, k, r);
        if (double(cl.frontier.size()) <= a * double(cl.ball.size())) return double(r);
    }
    return std::numeric_limits<double>::infinity();
}

std::vector<IdentityReport> run_identity_corpus(int n_graphs, int max_vertices, int truncation,
                                                std::uint64_t seed) {
    std::vector<IdentityReport> out;
    Rng rng(seed);
    for (int i = 0; i < n_graphs; ++i) {
        const int n = 1 + int(rng.below(std::uint64_t(max_vertices)));
        const bool ghost = rng.uniform() < 0.5;
        const double h = rng.uniform(-1.0, 1.0);
        SmallGraph g(n, ghost, h);
        for (int a = 0; a < n; ++a) {
            for (int b = a + 1; b < n; ++b)
                if (rng.uniform() < 0.5) g.set_coupling(a, b, rng.uniform(1e-3, 1.0));
            if (ghost && rng.uniform() < 0.5) g.set_coupling(a, g.ghost(), rng.uniform(1e-3, 1.0));
        }
        out.push_back(check_doubling(g));
        out.push_back(check_partition_product(g));
        out.push_back(check_difference_product(g));
        if (ghost && n <= 5) out.push_back(check_source_expansion(g, truncation));
        if (n <= 5) {
            out.push_back(check_component_resummation(g, truncation));
            // a random free-variant edge current for the parity identity
            CurrentConfig k;
            for (const auto& ed : g.edges(g.full_mask(), false))
                if (rng.uniform() < 0.7) k.add_edge(ed.a, ed.b, 1 + int(rng.below(3)));
            out.push_back(check_parity_resummation(g, k, truncation));
        }
    }
    return out;
}

std::string IdentityReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"identity\":\"" << identity << "\",\"instance\":\"" << std::hex << instance_hash << std::dec
       << "\",\"lhs\":" << lhs << ",\"rhs\":" << rhs << ",\"abs_err\":" << abs_err << ",\"rel_err\":" << rel_err
       << ",\"K\":" << truncation << ",\"cauchy_gap\":" << cauchy_gap << ",\"pass\":" << (pass ? "true" : "false")
       << ",\"note\":\"" << note << "\"}";
    return os.str();
}

std::string reports_to_json(const std::vector<IdentityReport>& reports) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (i) os << ",";
        os << "\n  " << reports[i].to_json();
    }
    os << "\n]\n";
    return os.str();
}

}  // namespace spinlat
