#include "spinlat/graphical.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "spinlat/errors.hpp"

namespace spinlat {

namespace {

std::uint64_t site_stream_seed(std::uint64_t stream_seed, const Geometry& g, int site) {
    // chained over coordinates so that boxes sharing coordinates share arrivals
    const Coords c = g.coords_of(site);
    std::uint64_t s = stream_seed;
    for (int a = 0; a < g.dim(); ++a) s = derive_seed(s, std::uint64_t(c[a]) + 1);
    return s;
}

std::vector<Arrival> draw_site_arrivals(std::uint64_t seed, double lambda, double t_begin, double t_end) {
    std::vector<Arrival> out;
    Rng rng(seed);
    double t = t_begin;
    while (true) {
        const double gap = rng.exponential(lambda);
        const double next = t + gap;
        if (!(next <= t_end)) break;
        const double u = rng.uniform();
        if (next > t) out.push_back({next, u});  // drop degenerate zero gaps
        t = next;
    }
    return out;
}

}  // namespace

ArrivalStream ArrivalStream::sample(GeometryPtr geom, double lambda, double t_begin, double t_end,
                                    std::uint64_t seed) {
    if (!(lambda > 0.0)) throw contract_error("arrival stream needs lambda > 0");
    if (!(t_end >= t_begin)) throw contract_error("arrival stream window is empty");

    ArrivalStream s;
    s.geom_ = std::move(geom);
    s.lambda_ = lambda;
    s.t_begin_ = t_begin;
    s.t_end_ = t_end;
    s.seed_ = seed;

    const int n = s.geom_->n_sites();
    std::vector<std::uint32_t> epoch(n, 0);
    for (int attempt = 0; attempt < 64; ++attempt) {
        s.per_site_.assign(n, {});
        for (int i = 0; i < n; ++i) {
            std::uint64_t site_seed = site_stream_seed(seed, *s.geom_, i);
            if (epoch[i] > 0) site_seed = derive_seed(site_seed, epoch[i]);
            s.per_site_[i] = draw_site_arrivals(site_seed, lambda, t_begin, t_end);
        }
        s.rebuild_order();
        // exact timestamp collisions across sites: redraw the later site
        bool clean = true;
        for (std::size_t k = 1; k < s.order_.size(); ++k) {
            if (s.order_[k].t == s.order_[k - 1].t) {
                epoch[std::max(s.order_[k].site, s.order_[k - 1].site)]++;
                clean = false;
                break;
            }
        }
        if (clean) return s;
    }
    throw contract_error("arrival stream: could not resolve timestamp ties");
}

ArrivalStream ArrivalStream::from_arrivals(GeometryPtr geom, double lambda, double t_begin, double t_end,
                                           std::vector<std::vector<Arrival>> per_site) {
    ArrivalStream s;
    s.geom_ = std::move(geom);
    s.lambda_ = lambda;
    s.t_begin_ = t_begin;
    s.t_end_ = t_end;
    s.seed_ = 0;
    if (int(per_site.size()) != s.geom_->n_sites()) throw contract_error("per-site lists do not match the geometry");
    for (const auto& v : per_site)
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i].t > v[i - 1].t)) throw contract_error("per-site arrivals must be strictly increasing");
    s.per_site_ = std::move(per_site);
    s.rebuild_order();
    return s;
}

void ArrivalStream::rebuild_order() {
    order_.clear();
    std::size_t total = 0;
    for (const auto& v : per_site_) total += v.size();
    order_.reserve(total);
    for (int i = 0; i < int(per_site_.size()); ++i)
        for (const Arrival& a : per_site_[i]) order_.push_back({a.t, a.u, i});
    std::sort(order_.begin(), order_.end(), [](const Event& a, const Event& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.site < b.site;
    });
}

void ArrivalStream::serialize(std::ostream& out) const {
    auto w64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto wd = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    out.write("SLAT", 4);
    w64(1);  // layout version
    w64(seed_);
    wd(lambda_);
    wd(t_begin_);
    wd(t_end_);
    w64(std::uint64_t(geom_->dim()));
    for (int a = 0; a < geom_->dim(); ++a) w64(std::uint64_t(geom_->sides()[a]));
    w64(std::uint64_t(geom_->range()));
    w64(std::uint64_t(geom_->boundary()));
    for (const auto& v : per_site_) {
        w64(v.size());
        for (const Arrival& a : v) {
            wd(a.t);
            wd(a.u);
        }
    }
}

ArrivalStream ArrivalStream::deserialize(std::istream& in) {
    auto r64 = [&]() {
        std::uint64_t v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    auto rd = [&]() {
        double v;
        in.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SLAT", 4) != 0) throw schema_error("not an arrival stream file");
    if (r64() != 1) throw schema_error("unsupported arrival stream layout");
    ArrivalStream s;
    s.seed_ = r64();
    s.lambda_ = rd();
    s.t_begin_ = rd();
    s.t_end_ = rd();
    const int dim = int(r64());
    std::vector<int> sides(dim);
    for (int a = 0; a < dim; ++a) sides[a] = int(r64());
    const int range = int(r64());
    const Boundary b = Boundary(r64());
    s.geom_ = make_geometry(dim, sides, range, b);
    s.per_site_.resize(s.geom_->n_sites());
    for (auto& v : s.per_site_) {
        v.resize(r64());
        for (Arrival& a : v) {
            a.t = rd();
            a.u = rd();
        }
    }
    s.rebuild_order();
    return s;
}

ArrivalStream ArrivalStream::clipped(double t0, double t1) const {
    ArrivalStream s;
    s.geom_ = geom_;
    s.lambda_ = lambda_;
    s.t_begin_ = t0;
    s.t_end_ = t1;
    s.seed_ = seed_;
    s.per_site_.resize(per_site_.size());
    for (std::size_t i = 0; i < per_site_.size(); ++i)
        for (const Arrival& a : per_site_[i])
            if (a.t > t0 && a.t <= t1) s.per_site_[i].push_back(a);
    s.rebuild_order();
    return s;
}

ArrivalStream ArrivalStream::clipped_sites(const std::function<bool(int)>& keep) const {
    ArrivalStream s;
    s.geom_ = geom_;
    s.lambda_ = lambda_;
    s.t_begin_ = t_begin_;
    s.t_end_ = t_end_;
    s.seed_ = seed_;
    s.per_site_.resize(per_site_.size());
    for (std::size_t i = 0; i < per_site_.size(); ++i)
        if (keep(int(i))) s.per_site_[i] = per_site_[i];
    s.rebuild_order();
    return s;
}

int update_spin(std::uint32_t pattern, double u, const RateFamily& c, int site, double lambda) {
    if (!(lambda >= 2.0 * c.sup_rate())) throw contract_error("lambda below twice the sup rate");
    const bool center_plus = (pattern >> c.geometry()->center_offset()) & 1u;
    return updated_spin(u, update_threshold(c.rate(site, pattern), lambda, center_plus));
}

namespace {

void require_compatible(const SpinConfig& config, const RateFamily& c, const ArrivalStream& stream) {
    if (config.size() != stream.geometry()->n_sites()) throw contract_error("configuration does not fit the stream geometry");
    if (!(*c.geometry() == *stream.geometry())) throw contract_error("rate family and stream geometries differ");
    if (!(stream.lambda() >= 2.0 * c.sup_rate())) throw contract_error("stream lambda below twice the sup rate");
    c.validate_for_boundary();
}

}  // namespace

std::pair<SpinConfig, TrajectoryRecord> evolve(const SpinConfig& initial, const RateFamily& c,
                                               const ArrivalStream& stream, const EvolveOptions& opt) {
    require_compatible(initial, c, stream);
    const Geometry& g = *stream.geometry();
    const double lambda = stream.lambda();

    SpinConfig config = initial;
    TrajectoryRecord rec;
    std::size_t next_sample = 0;
    // a sample at exactly an event time reflects the state after that event
    auto emit_samples_before = [&](double t) {
        while (next_sample < opt.sample_times.size() && opt.sample_times[next_sample] < t) {
            for (const auto& [name, fn] : opt.observables)
                rec.samples.push_back({opt.sample_times[next_sample], name, fn(config)});
            ++next_sample;
        }
    };

    for (const Event& ev : stream.order()) {
        emit_samples_before(ev.t);
        const std::uint32_t p = local_pattern(g, config, ev.site);
        const bool center_plus = (p >> g.center_offset()) & 1u;
        const int ns = updated_spin(ev.u, update_threshold(c.rate(ev.site, p), lambda, center_plus));
        if (opt.log_events) {
            rec.events.push_back({ev.t, ev.site, center_plus ? 1 : -1, ns, ev.u,
                                  opt.perturbations ? opt.perturbations->is_perturbation(ev.site, ev.u) : false});
        }
        config.set(ev.site, ns);
    }
    while (next_sample < opt.sample_times.size()) {
        for (const auto& [name, fn] : opt.observables)
            rec.samples.push_back({opt.sample_times[next_sample], name, fn(config)});
        ++next_sample;
    }
    return {std::move(config), std::move(rec)};
}

std::vector<SpinConfig> coupled_evolve(const std::vector<std::pair<SpinConfig, const RateFamily*>>& chains,
                                       const ArrivalStream& stream) {
    const Geometry& g = *stream.geometry();
    const double lambda = stream.lambda();
    std::vector<SpinConfig> configs;
    configs.reserve(chains.size());
    for (const auto& [init, c] : chains) {
        require_compatible(init, *c, stream);
        configs.push_back(init);
    }
    for (const Event& ev : stream.order()) {
        for (std::size_t i = 0; i < configs.size(); ++i) {
            const RateFamily& c = *chains[i].second;
            const std::uint32_t p = local_pattern(g, configs[i], ev.site);
            const bool center_plus = (p >> g.center_offset()) & 1u;
            configs[i].set(ev.site, updated_spin(ev.u, update_threshold(c.rate(ev.site, p), lambda, center_plus)));
        }
    }
    return configs;
}

MonotoneReport check_monotone(const RateFamily& c, const ArrivalStream& stream, const SpinConfig& upper,
                              const SpinConfig& lower) {
    require_compatible(upper, c, stream);
    const Geometry& g = *stream.geometry();
    const double lambda = stream.lambda();
    SpinConfig hi = upper, lo = lower;
    if (!hi.dominates(lo)) throw contract_error("check_monotone: initial pair is not ordered");
    std::size_t updates = 0;
    for (const Event& ev : stream.order()) {
        for (SpinConfig* cfg : {&hi, &lo}) {
            const std::uint32_t p = local_pattern(g, *cfg, ev.site);
            const bool center_plus = (p >> g.center_offset()) & 1u;
            cfg->set(ev.site, updated_spin(ev.u, update_threshold(c.rate(ev.site, p), lambda, center_plus)));
        }
        ++updates;
        if (hi.spin(ev.site) < lo.spin(ev.site)) return {false, ev.t, ev.site, updates};
    }
    return {true, 0.0, -1, updates};
}

PerturbationOracle::PerturbationOracle(const RateFamily& c0, const RateFamily& c1, double lambda) {
    const Geometry& g = *c0.geometry();
    if (!(*c1.geometry() == g)) throw contract_error("perturbation oracle: geometries differ");
    if (!(lambda >= 2.0 * std::max(c0.sup_rate(), c1.sup_rate())))
        throw contract_error("perturbation oracle: lambda below twice the sup rate");
    const std::uint32_t center_bit = 1u << g.center_offset();

    pair_class_.resize(g.n_sites());
    std::vector<std::pair<int, int>> classes;
    for (int s = 0; s < g.n_sites(); ++s) {
        const std::pair<int, int> key{c0.class_of(s), c1.class_of(s)};
        auto it = std::find(classes.begin(), classes.end(), key);
        if (it == classes.end()) {
            classes.push_back(key);
            it = classes.end() - 1;
        }
        pair_class_[s] = std::uint32_t(it - classes.begin());
    }

    for (const auto& [k0, k1] : classes) {
        const auto& t0 = c0.table(k0);
        const auto& t1 = c1.table(k1);
        std::vector<std::pair<double, double>> iv;
        for (std::size_t p = 0; p < t0.size(); ++p) {
            const bool center_plus = (p & center_bit) != 0;
            const double v0 = update_threshold(t0[p], lambda, center_plus);
            const double v1 = update_threshold(t1[p], lambda, center_plus);
            if (v0 != v1) iv.emplace_back(std::min(v0, v1), std::max(v0, v1));
        }
        std::sort(iv.begin(), iv.end());
        // merge strictly overlapping open intervals
        std::vector<std::pair<double, double>> merged;
        for (const auto& [lo, hi] : iv) {
            if (!merged.empty() && lo < merged.back().second)
                merged.back().second = std::max(merged.back().second, hi);
            else
                merged.emplace_back(lo, hi);
        }
        double len = 0.0;
        for (const auto& [lo, hi] : merged) len += hi - lo;
        intervals_.push_back(std::move(merged));
        measure_.push_back(len);
    }
}

bool PerturbationOracle::is_perturbation(int site, double u) const {
    const auto& iv = intervals_[pair_class_[site]];
    auto it = std::upper_bound(iv.begin(), iv.end(), u,
                               [](double x, const std::pair<double, double>& p) { return x < p.first; });
    if (it == iv.begin()) return false;
    --it;
    return u > it->first && u < it->second;
}

double PerturbationOracle::disagreement_measure(int site) const { return measure_[pair_class_[site]]; }

}  // namespace spinlat
