#include "spinlat/coarse.hpp"

#include <algorithm>
#include <cmath>

#include "spinlat/parallel.hpp"

namespace spinlat {

BoxGrid BoxGrid::make(int dim, int range, double n_scale, double tau0, int m_override, double l_override) {
    if (dim < 1 || range < 1) throw schema_error("box grid needs dim >= 1 and range >= 1");
    if (!(n_scale > 0.0) || !(tau0 > 0.0)) throw schema_error("box grid needs positive N and tau0");
    BoxGrid g;
    g.dim = dim;
    g.range = range;
    g.n_scale = n_scale;
    g.tau0 = tau0;
    g.l_box = l_override > 0.0 ? l_override : std::ceil(n_scale * tau0);
    g.m_sites = m_override > 0 ? m_override : 2 * range * int(std::ceil(n_scale * tau0));
    if (g.m_sites <= range) throw schema_error("box grid: spatial side must exceed the range");
    return g;
}

std::string to_string(BoxVerdict v) {
    switch (v) {
        case BoxVerdict::good: return "good";
        case BoxVerdict::bad_perturbation: return "bad:event1";
        case BoxVerdict::bad_ray_escape: return "bad:event2";
        case BoxVerdict::bad_cluster_survival: return "bad:event3";
    }
    return "?";
}

namespace {

struct Footprint {
    int side;                        // 3M
    std::vector<std::int32_t> site;  // footprint linear index -> geometry site
    std::vector<std::int32_t> loc;   // geometry site -> footprint index or -1
    std::vector<std::uint8_t> shell; // per footprint index
    std::vector<std::uint8_t> core;  // per footprint index

    bool in_shell_site(int geom_site) const {
        const int f = loc[geom_site];
        return f >= 0 && shell[f];
    }
};

Footprint build_footprint(const Geometry& g, const BoxGrid& grid, const Coords& origin) {
    Footprint fp;
    fp.side = grid.extended_side();
    int count = 1;
    for (int a = 0; a < grid.dim; ++a) count *= fp.side;
    fp.site.assign(count, -1);
    fp.loc.assign(g.n_sites(), -1);
    fp.shell.assign(count, 0);
    fp.core.assign(count, 0);

    if (g.dim() != grid.dim) throw contract_error("box grid dimension does not match the stream geometry");
    for (int a = 0; a < grid.dim; ++a)
        if (g.sides()[a] < fp.side) throw contract_error("geometry too small to embed the extended box");

    Coords f{};
    for (int idx = 0; idx < count; ++idx) {
        int rest = idx;
        bool shell = false, core = true;
        Coords gc{};
        for (int a = grid.dim - 1; a >= 0; --a) {
            f[a] = rest % fp.side;
            rest /= fp.side;
        }
        for (int a = 0; a < grid.dim; ++a) {
            if (f[a] < grid.range || f[a] >= fp.side - grid.range) shell = true;
            if (f[a] < grid.m_sites || f[a] >= 2 * grid.m_sites) core = false;
            gc[a] = origin[a] + f[a];
        }
        if (g.boundary() != Boundary::periodic && !g.inside(gc))
            throw contract_error("extended box leaves the geometry");
        const int site = g.index_of(gc);
        if (fp.loc[site] != -1) throw contract_error("extended box wraps onto itself");
        fp.site[idx] = site;
        fp.loc[site] = idx;
        fp.shell[idx] = shell;
        fp.core[idx] = core;
    }
    return fp;
}

// per-class thresholds below/above which a mark decides the update outright
struct DeterminedBands {
    std::vector<double> vmin, vmax;
    explicit DeterminedBands(const RateFamily& c, double lambda) {
        const int center = c.geometry()->center_offset();
        vmin.resize(c.n_classes());
        vmax.resize(c.n_classes());
        for (int cl = 0; cl < c.n_classes(); ++cl) {
            double lo = 1.0, hi = 0.0;
            const auto& tab = c.table(cl);
            for (std::size_t p = 0; p < tab.size(); ++p) {
                const double v = update_threshold(tab[p], lambda, (p >> center) & 1u);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            vmin[cl] = lo;
            vmax[cl] = hi;
        }
    }
};

struct ActiveSet {
    std::vector<std::uint64_t> bits;
    int count = 0;
    explicit ActiveSet(int n) : bits((std::size_t(n) + 63) / 64, 0) {}
    bool test(int s) const { return (bits[std::size_t(s) >> 6] >> (s & 63)) & 1u; }
    void set(int s) {
        if (!test(s)) {
            bits[std::size_t(s) >> 6] |= 1ULL << (s & 63);
            ++count;
        }
    }
    void clear(int s) {
        if (test(s)) {
            bits[std::size_t(s) >> 6] &= ~(1ULL << (s & 63));
            --count;
        }
    }
};

}  // namespace

BoxFlags classify_box(const ArrivalStream& stream, const RateFamily& c0, const PerturbationOracle* pert,
                      const BoxGrid& grid, const Coords& footprint_origin, double t_top,
                      DependenceMethod event3_method) {
    const Geometry& g = *stream.geometry();
    const double t_bottom = t_top - grid.l_box;
    if (!(stream.t_begin() <= t_bottom && stream.t_end() >= t_top))
        throw contract_error("stream window does not cover the box");
    if (!(stream.lambda() >= 2.0 * c0.sup_rate())) throw contract_error("stream lambda below twice the sup rate");
    if (!(*c0.geometry() == g)) throw contract_error("rate family does not live on the stream geometry");

    const Footprint fp = build_footprint(g, grid, footprint_origin);

    // events restricted to the extended box, latest first
    std::vector<Event> events;
    for (const Event& ev : stream.order()) {
        if (ev.t <= t_bottom || ev.t > t_top) continue;
        if (fp.loc[ev.site] >= 0) events.push_back(ev);
    }
    std::reverse(events.begin(), events.end());

    BoxFlags flags;

    // event 1: a disagreement-capable mark anywhere in the extended box
    if (pert) {
        for (const Event& ev : events)
            if (pert->is_perturbation(ev.site, ev.u)) {
                flags.perturbation = true;
                break;
            }
    }

    const int m = g.n_offsets();

    // event 2: multi-root backward reach from the whole core box; the union
    // of the per-point reaches touches the boundary shell iff some ray does
    {
        ActiveSet reach(g.n_sites());
        for (int f = 0; f < int(fp.site.size()); ++f)
            if (fp.core[f]) reach.set(fp.site[f]);
        for (const Event& ev : events) {
            if (flags.ray_escape) break;
            if (!reach.test(ev.site)) continue;
            if (fp.shell[fp.loc[ev.site]]) continue;  // never expand shell sites
            const std::int32_t* nb = g.neighbor_row(ev.site);
            for (int k = 0; k < m; ++k) {
                const std::int32_t y = nb[k];
                if (y < 0 || reach.test(y)) continue;
                reach.set(y);
                if (fp.in_shell_site(y)) {
                    flags.ray_escape = true;
                    break;
                }
            }
        }
    }

    // event 3: an unperturbed cluster seeded at the core top that avoids the
    // shell and is still alive at the bottom
    if (event3_method == DependenceMethod::overapprox) {
        const DeterminedBands bands(c0, stream.lambda());
        for (int f = 0; f < int(fp.site.size()) && !flags.cluster_survival; ++f) {
            if (!fp.core[f]) continue;
            ActiveSet act(g.n_sites());
            act.set(fp.site[f]);
            bool shell_contact = false;
            for (const Event& ev : events) {
                if (!act.test(ev.site)) continue;
                const int cls = c0.class_of(ev.site);
                if (ev.u >= bands.vmax[cls] || ev.u < bands.vmin[cls]) {
                    act.clear(ev.site);
                    if (act.count == 0) break;
                } else {
                    const std::int32_t* nb = g.neighbor_row(ev.site);
                    for (int k = 0; k < m; ++k) {
                        const std::int32_t y = nb[k];
                        if (y < 0 || act.test(y)) continue;
                        act.set(y);
                        if (fp.in_shell_site(y)) {
                            shell_contact = true;
                            break;
                        }
                    }
                    if (shell_contact) break;
                }
            }
            if (!shell_contact && act.count > 0) flags.cluster_survival = true;
        }
    } else if (event3_method == DependenceMethod::exact) {
        // tiny boxes only; the clipped stream carries exactly the box data
        ArrivalStream local = stream.clipped(t_bottom, t_top).clipped_sites(
            [&](int s) { return fp.loc[s] >= 0; });
        for (int f = 0; f < int(fp.site.size()) && !flags.cluster_survival; ++f) {
            if (!fp.core[f]) continue;
            const auto dep = backward_dependence(fp.site[f], t_top, local, c0, DependenceMethod::exact);
            bool shell_contact = false;
            for (const auto& bp : dep.breakpoints)
                for (std::int32_t s : bp.sites)
                    if (fp.in_shell_site(s)) shell_contact = true;
            if (!shell_contact && dep.nonempty_at(t_bottom)) flags.cluster_survival = true;
        }
    } else {
        throw contract_error("event 3 supports the overapprox and exact methods");
    }

    return flags;
}

BadBoxPoint bad_box_probability(const CoupledRates& rates, const BoxGrid& grid, int replicas,
                                std::uint64_t seed, int workers) {
    const GeometryPtr geom = grid.environment_torus();
    if (!(*rates.c0.geometry() == *geom) || !(*rates.c1.geometry() == *geom))
        throw contract_error("bad-box scan: rate families must live on the environment torus (side 3M)");
    const bool perturbed = rates.epsilon > 0.0;

    std::vector<BoxFlags> flags(replicas);
    parallel_for(replicas, workers, [&](int r) {
        const auto stream =
            ArrivalStream::sample(geom, rates.lambda, 0.0, grid.l_box, derive_seed(seed, std::uint64_t(r)));
        const PerturbationOracle oracle(rates.c0, rates.c1, rates.lambda);
        Coords origin{};
        flags[r] = classify_box(stream, rates.c0, perturbed ? &oracle : nullptr, grid, origin, grid.l_box);
    });

    BadBoxPoint pt{};
    pt.n_scale = grid.n_scale;
    pt.m_sites = grid.m_sites;
    pt.l_box = grid.l_box;
    pt.epsilon = rates.epsilon;
    double bad = 0, e1 = 0, e2 = 0, e3 = 0;
    for (const auto& f : flags) {
        bad += f.bad();
        e1 += f.perturbation;
        e2 += f.ray_escape;
        e3 += f.cluster_survival;
    }
    pt.p_bad = bad / replicas;
    pt.stderr_ = binomial_stderr(pt.p_bad, std::size_t(replicas));
    pt.event1_frac = e1 / replicas;
    pt.event2_frac = e2 / replicas;
    pt.event3_frac = e3 / replicas;
    return pt;
}

}  // namespace spinlat
