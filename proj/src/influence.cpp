#include "spinlat/influence.hpp"

#include <algorithm>
#include <cmath>

#include "spinlat/parallel.hpp"

namespace spinlat {

bool DependenceSet::nonempty_at(double s) const {
    // last breakpoint later than s holds the sets valid at s
    const Breakpoint* cur = &breakpoints.front();
    for (const auto& bp : breakpoints) {
        if (bp.time > s)
            cur = &bp;
        else
            break;
    }
    return cur->nonempty;
}

const std::vector<std::int32_t>& DependenceSet::set_at(double s) const {
    if (!has_sets) throw contract_error("this dependence method resolves emptiness only");
    const Breakpoint* cur = &breakpoints.front();
    for (const auto& bp : breakpoints) {
        if (bp.time > s)
            cur = &bp;
        else
            break;
    }
    return cur->sites;
}

namespace {

// events of the stream with time in (down_to, t], latest first
std::vector<Event> events_desc(const ArrivalStream& stream, double down_to, double t) {
    std::vector<Event> evs;
    const auto& order = stream.order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (it->t > t) continue;
        if (it->t <= down_to) break;
        evs.push_back(*it);
    }
    return evs;
}

struct BitTable {
    std::vector<std::uint64_t> bits;
    void resize_vars(int n) { bits.assign(std::size_t(1) << std::max(0, n - 6), 0); }
    bool get(std::uint32_t a) const { return (bits[a >> 6] >> (a & 63)) & 1u; }
    void set(std::uint32_t a, bool v) {
        if (v)
            bits[a >> 6] |= 1ULL << (a & 63);
        else
            bits[a >> 6] &= ~(1ULL << (a & 63));
    }
};

DependenceSet exact_dependence(int site, double t, const ArrivalStream& stream, const RateFamily& rates,
                               int cap) {
    const Geometry& g = *stream.geometry();
    const double lambda = stream.lambda();
    const int m = g.n_offsets();
    const int center = g.center_offset();

    DependenceSet dep;
    dep.target_site = site;
    dep.target_time = t;
    dep.window_begin = stream.t_begin();
    dep.has_sets = true;

    std::vector<std::int32_t> vars{std::int32_t(site)};
    BitTable table;
    table.resize_vars(1);
    table.set(0, false);
    table.set(1, true);
    dep.breakpoints.push_back({t, vars, true});

    BitTable next;
    for (const Event& ev : events_desc(stream, stream.t_begin(), t)) {
        auto vit = std::lower_bound(vars.begin(), vars.end(), ev.site);
        if (vit == vars.end() || *vit != ev.site) continue;

        // substitute: the post-arrival spin of ev.site is a function of the
        // pre-arrival pattern on its neighborhood
        std::vector<std::int32_t> merged = vars;
        const std::int32_t* nb = g.neighbor_row(ev.site);
        for (int k = 0; k < m; ++k)
            if (nb[k] >= 0) merged.push_back(nb[k]);
        std::sort(merged.begin(), merged.end());
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        if (int(merged.size()) > cap)
            throw contract_error("exact dependence: candidate set exceeded the size cap");

        const int nv = int(merged.size());
        std::vector<int> nb_pos(m, -1);
        for (int k = 0; k < m; ++k)
            if (nb[k] >= 0)
                nb_pos[k] = int(std::lower_bound(merged.begin(), merged.end(), nb[k]) - merged.begin());
        std::vector<int> old_pos(vars.size());
        for (std::size_t k = 0; k < vars.size(); ++k)
            old_pos[k] = int(std::lower_bound(merged.begin(), merged.end(), vars[k]) - merged.begin());
        const std::uint32_t base = g.base_pattern(ev.site);
        const auto& rate_table = rates.table_for_site(ev.site);

        next.resize_vars(nv);
        const std::uint32_t top = std::uint32_t(1) << nv;
        for (std::uint32_t a = 0; a < top; ++a) {
            std::uint32_t p = base;
            for (int k = 0; k < m; ++k)
                if (nb_pos[k] >= 0) p |= ((a >> nb_pos[k]) & 1u) << k;
            const bool center_plus = (p >> center) & 1u;
            const bool new_bit =
                updated_spin(ev.u, update_threshold(rate_table[p], lambda, center_plus)) > 0;
            std::uint32_t a_old = 0;
            for (std::size_t k = 0; k < vars.size(); ++k) {
                const bool bit = vars[k] == ev.site ? new_bit : ((a >> old_pos[k]) & 1u);
                a_old |= std::uint32_t(bit) << k;
            }
            next.set(a, table.get(a_old));
        }

        // reduce to the genuinely relevant variables
        std::uint32_t relevant = 0;
        for (int q = 0; q < nv; ++q) {
            const std::uint32_t step = std::uint32_t(1) << q;
            for (std::uint32_t a = 0; a < top; ++a) {
                if (a & step) continue;
                if (next.get(a) != next.get(a | step)) {
                    relevant |= std::uint32_t(1) << q;
                    break;
                }
            }
        }
        std::vector<std::int32_t> reduced;
        std::vector<int> keep;
        for (int q = 0; q < nv; ++q)
            if ((relevant >> q) & 1u) {
                reduced.push_back(merged[q]);
                keep.push_back(q);
            }
        const int nr = int(reduced.size());
        table.resize_vars(nr);
        for (std::uint32_t a = 0; a < (std::uint32_t(1) << nr); ++a) {
            std::uint32_t full = 0;
            for (int q = 0; q < nr; ++q) full |= ((a >> q) & 1u) << keep[q];
            table.set(a, next.get(full));
        }

        if (reduced != vars) dep.breakpoints.push_back({ev.t, reduced, !reduced.empty()});
        vars = std::move(reduced);
        if (vars.empty()) break;
    }
    return dep;
}

DependenceSet overapprox_dependence(int site, double t, const ArrivalStream& stream, const RateFamily& rates) {
    const Geometry& g = *stream.geometry();
    const double lambda = stream.lambda();
    const int m = g.n_offsets();
    const int center = g.center_offset();

    // per class, thresholds that decide an update regardless of the pattern
    std::vector<double> vmin(rates.n_classes()), vmax(rates.n_classes());
    for (int c = 0; c < rates.n_classes(); ++c) {
        double lo = 1.0, hi = 0.0;
        const auto& tab = rates.table(c);
        for (std::size_t p = 0; p < tab.size(); ++p) {
            const double v = update_threshold(tab[p], lambda, (p >> center) & 1u);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        vmin[c] = lo;
        vmax[c] = hi;
    }

    DependenceSet dep;
    dep.target_site = site;
    dep.target_time = t;
    dep.window_begin = stream.t_begin();
    dep.has_sets = true;

    std::vector<std::uint64_t> active((std::size_t(g.n_sites()) + 63) / 64, 0);
    auto test = [&](int s) { return (active[std::size_t(s) >> 6] >> (s & 63)) & 1u; };
    auto set1 = [&](int s) { active[std::size_t(s) >> 6] |= 1ULL << (s & 63); };
    auto clr = [&](int s) { active[std::size_t(s) >> 6] &= ~(1ULL << (s & 63)); };
    set1(site);
    int count = 1;

    auto snapshot = [&]() {
        std::vector<std::int32_t> v;
        v.reserve(count);
        for (int s = 0; s < g.n_sites(); ++s)
            if (test(s)) v.push_back(s);
        return v;
    };
    dep.breakpoints.push_back({t, snapshot(), true});

    for (const Event& ev : events_desc(stream, stream.t_begin(), t)) {
        if (!test(ev.site)) continue;
        const int cls = rates.class_of(ev.site);
        const bool determined = ev.u >= vmax[cls] || ev.u < vmin[cls];
        if (determined) {
            clr(ev.site);
            --count;
        } else {
            const std::int32_t* nb = g.neighbor_row(ev.site);
            for (int k = 0; k < m; ++k)
                if (nb[k] >= 0 && !test(nb[k])) {
                    set1(nb[k]);
                    ++count;
                }
        }
        dep.breakpoints.push_back({ev.t, snapshot(), count > 0});
        if (count == 0) break;
    }
    return dep;
}

// disagreement of the extreme-start chains at (site, t), started at `from`
bool sandwich_disagrees(const RateFamily& rates, const ArrivalStream& stream, int site, double from, double t) {
    const Geometry& g = *stream.geometry();
    const double lambda = stream.lambda();
    SpinConfig hi = SpinConfig::all_plus(g);
    SpinConfig lo = SpinConfig::all_minus(g);
    for (const Event& ev : stream.order()) {
        if (ev.t <= from) continue;
        if (ev.t > t) break;
        for (SpinConfig* cfg : {&hi, &lo}) {
            const std::uint32_t p = local_pattern(g, *cfg, ev.site);
            const bool center_plus = (p >> g.center_offset()) & 1u;
            cfg->set(ev.site, updated_spin(ev.u, update_threshold(rates.rate(ev.site, p), lambda, center_plus)));
        }
    }
    return hi.spin(site) != lo.spin(site);
}

DependenceSet sandwich_dependence(int site, double t, const ArrivalStream& stream, const RateFamily& rates) {
    if (!is_attractive(rates)) throw contract_error("sandwich method requires attractive rates");
    DependenceSet dep;
    dep.target_site = site;
    dep.target_time = t;
    dep.window_begin = stream.t_begin();
    dep.has_sets = false;
    dep.breakpoints.push_back({t, {}, true});
    for (const Event& ev : events_desc(stream, stream.t_begin(), t)) {
        // profile value on [next arrival, ev.t): start just below ev.t
        const bool ne = sandwich_disagrees(rates, stream, site, std::nexttoward(ev.t, -HUGE_VAL), t);
        dep.breakpoints.push_back({ev.t, {}, ne});
        if (!ne) break;
    }
    return dep;
}

}  // namespace

DependenceSet backward_dependence(int site, double t, const ArrivalStream& stream, const RateFamily& rates,
                                  DependenceMethod method, int size_cap) {
    if (!(*rates.geometry() == *stream.geometry()))
        throw contract_error("rate family and stream geometries differ");
    if (!(stream.lambda() >= 2.0 * rates.sup_rate())) throw contract_error("stream lambda below twice the sup rate");
    if (!(t >= stream.t_begin() && t <= stream.t_end()))
        throw contract_error("target time outside the stream window");

    switch (method) {
        case DependenceMethod::exact: return exact_dependence(site, t, stream, rates, size_cap);
        case DependenceMethod::sandwich: return sandwich_dependence(site, t, stream, rates);
        case DependenceMethod::overapprox: return overapprox_dependence(site, t, stream, rates);
    }
    throw contract_error("unknown dependence method");
}

bool LightrayReach::reached(int site) const { return !std::isnan(join_time[site]); }

bool LightrayReach::contains(int site, double s) const {
    if (s < down_to || std::isnan(join_time[site])) return false;
    if (site == root) return s <= t;
    return s < join_time[site];
}

std::vector<std::int32_t> LightrayReach::sites_at(double s) const {
    std::vector<std::int32_t> v;
    for (int i = 0; i < int(join_time.size()); ++i)
        if (contains(i, s)) v.push_back(i);
    return v;
}

LightrayReach lightray_reach(int site, double t, const ArrivalStream& stream, double down_to) {
    const Geometry& g = *stream.geometry();
    LightrayReach r;
    r.root = site;
    r.t = t;
    r.down_to = down_to;
    r.join_time.assign(g.n_sites(), std::nan(""));
    r.join_time[site] = t;

    const int m = g.n_offsets();
    for (const Event& ev : events_desc(stream, down_to, t)) {
        const double tz = r.join_time[ev.site];
        if (std::isnan(tz)) continue;
        // a ray occupies its site strictly before the join time (the root up
        // to and including t)
        if (!(ev.t < tz || (ev.site == site && ev.t <= t))) continue;
        const std::int32_t* nb = g.neighbor_row(ev.site);
        for (int k = 0; k < m; ++k) {
            const std::int32_t y = nb[k];
            if (y >= 0 && std::isnan(r.join_time[y])) r.join_time[y] = ev.t;
        }
    }
    return r;
}

bool InfluenceCluster::contains(int site, double s) const {
    for (const auto& [y, iv] : strips)
        if (y == site && s >= iv.first && s <= iv.second) return true;
    return false;
}

bool InfluenceCluster::reaches_time(double s) const {
    for (const auto& [y, iv] : strips)
        if (iv.first <= s) return true;
    return false;
}

std::vector<std::int32_t> InfluenceCluster::sites_at(double u) const {
    std::vector<std::int32_t> v;
    for (const auto& [y, iv] : strips)
        if (u >= iv.first && u <= iv.second) v.push_back(y);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

InfluenceCluster cluster_of(const DependenceSet& dep) {
    if (!dep.has_sets) throw contract_error("cluster_of needs a method that resolves sets");
    InfluenceCluster cl;
    cl.target_site = dep.target_site;
    cl.target_time = dep.target_time;
    cl.window_begin = dep.window_begin;

    // the set of breakpoint k is valid on [time_{k+1}, time_k]; closure makes
    // the strips closed at both change times
    std::vector<std::pair<std::int32_t, std::pair<double, double>>> raw;
    for (std::size_t k = 0; k < dep.breakpoints.size(); ++k) {
        const double hi = dep.breakpoints[k].time;
        const double lo = k + 1 < dep.breakpoints.size() ? dep.breakpoints[k + 1].time : dep.window_begin;
        for (std::int32_t s : dep.breakpoints[k].sites) raw.push_back({s, {lo, hi}});
    }
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second.first < b.second.first;
    });
    for (const auto& item : raw) {
        if (!cl.strips.empty() && cl.strips.back().first == item.first &&
            item.second.first <= cl.strips.back().second.second)
            cl.strips.back().second.second = std::max(cl.strips.back().second.second, item.second.second);
        else
            cl.strips.push_back(item);
    }
    return cl;
}

SurvivalPoint survival_estimate(const RateFamily& rates, GeometryPtr geom, double t, int replicas,
                                DependenceMethod method, std::uint64_t seed, int workers) {
    const double lambda = 2.0 * rates.sup_rate();
    const int target = center_site(*geom);
    std::vector<std::uint8_t> alive(replicas, 0);
    parallel_for(replicas, workers, [&](int r) {
        const auto stream =
            ArrivalStream::sample(geom, lambda, 0.0, t, derive_seed(seed, std::uint64_t(r)));
        if (method == DependenceMethod::sandwich) {
            if (!is_attractive(rates)) throw contract_error("sandwich method requires attractive rates");
            alive[r] = sandwich_disagrees(rates, stream, target, 0.0, t) ? 1 : 0;
        } else {
            const auto dep = backward_dependence(target, t, stream, rates, method);
            alive[r] = dep.nonempty_at(0.0) ? 1 : 0;
        }
    });
    double p = 0.0;
    for (auto a : alive) p += a;
    p /= double(replicas);
    return {t, p, binomial_stderr(p, std::size_t(replicas))};
}

std::vector<SurvivalPoint> survival_scan_sandwich(const RateFamily& rates, GeometryPtr geom,
                                                  const std::vector<double>& horizons, int replicas,
                                                  std::uint64_t seed, int workers) {
    if (!is_attractive(rates)) throw contract_error("sandwich method requires attractive rates");
    const Geometry& g = *geom;
    const double lambda = 2.0 * rates.sup_rate();
    const int target = center_site(g);
    std::vector<double> hs = horizons;
    std::sort(hs.begin(), hs.end());
    const double t_max = hs.back();

    std::vector<std::vector<std::uint8_t>> alive(replicas);
    parallel_for(replicas, workers, [&](int r) {
        const auto stream = ArrivalStream::sample(geom, lambda, 0.0, t_max, derive_seed(seed, std::uint64_t(r)));
        SpinConfig hi = SpinConfig::all_plus(g);
        SpinConfig lo = SpinConfig::all_minus(g);
        std::vector<std::uint8_t> ind;
        ind.reserve(hs.size());
        std::size_t next_h = 0;
        for (const Event& ev : stream.order()) {
            while (next_h < hs.size() && hs[next_h] < ev.t) {
                ind.push_back(hi.spin(target) != lo.spin(target) ? 1 : 0);
                ++next_h;
            }
            for (SpinConfig* cfg : {&hi, &lo}) {
                const std::uint32_t p = local_pattern(g, *cfg, ev.site);
                const bool center_plus = (p >> g.center_offset()) & 1u;
                cfg->set(ev.site,
                         updated_spin(ev.u, update_threshold(rates.rate(ev.site, p), lambda, center_plus)));
            }
        }
        while (next_h < hs.size()) {
            ind.push_back(hi.spin(target) != lo.spin(target) ? 1 : 0);
            ++next_h;
        }
        alive[r] = std::move(ind);
    });

    std::vector<SurvivalPoint> out;
    for (std::size_t k = 0; k < hs.size(); ++k) {
        double p = 0.0;
        for (int r = 0; r < replicas; ++r) p += alive[r][k];
        p /= double(replicas);
        out.push_back({hs[k], p, binomial_stderr(p, std::size_t(replicas))});
    }
    return out;
}

GapPoint sandwich_gap(const RateFamily& rates, GeometryPtr geom, double t, int replicas, std::uint64_t seed,
                      int workers) {
    if (!is_attractive(rates)) throw contract_error("sandwich gap requires attractive rates");
    const Geometry& g = *geom;
    const double lambda = 2.0 * rates.sup_rate();
    const int target = center_site(g);

    std::vector<double> gaps(replicas, 0.0);
    parallel_for(replicas, workers, [&](int r) {
        const auto stream = ArrivalStream::sample(geom, lambda, 0.0, t, derive_seed(seed, std::uint64_t(r)));
        const auto finals = coupled_evolve(
            {{SpinConfig::all_plus(g), &rates}, {SpinConfig::all_minus(g), &rates}}, stream);
        const double gap = finals[0].spin(target) - finals[1].spin(target);
        // the coupled gap must reproduce the emptiness indicator realization
        // by realization; a mismatch certifies a bug
        const bool indicator = sandwich_disagrees(rates, stream, target, 0.0, t);
        if ((gap != 0.0) != indicator)
            throw contract_error("sandwich gap: coupling identity violated (gap vs emptiness indicator)");
        if (gap < 0.0) throw contract_error("sandwich gap: order violated at the target site");
        gaps[r] = gap;
    });
    const auto [m, se] = mean_stderr(gaps);
    return {t, m, se};
}

}  // namespace spinlat
