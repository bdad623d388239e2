#include "spinlat/gibbs.hpp"

#include <algorithm>
#include <cmath>

#include "spinlat/graphical.hpp"

namespace spinlat {

namespace {

std::vector<std::int32_t> all_sites(const Geometry& g) {
    std::vector<std::int32_t> v(g.n_sites());
    for (int i = 0; i < g.n_sites(); ++i) v[i] = i;
    return v;
}

double boundary_spin(Boundary b) {
    if (b == Boundary::plus) return 1.0;
    if (b == Boundary::minus) return -1.0;
    return 0.0;
}

}  // namespace

GibbsSpec::GibbsSpec(GeometryPtr box, CouplingKernel couplings, double field)
    : GibbsSpec(box, all_sites(*box), std::move(couplings), field) {}

GibbsSpec::GibbsSpec(GeometryPtr box, std::vector<std::int32_t> region, CouplingKernel couplings, double field)
    : box_(std::move(box)), region_(std::move(region)), couplings_(std::move(couplings)), field_(field) {
    std::sort(region_.begin(), region_.end());
    region_.erase(std::unique(region_.begin(), region_.end()), region_.end());
    for (int s : region_)
        if (s < 0 || s >= box_->n_sites()) throw schema_error("region site outside the ambient box");
    if (couplings_.dim() != box_->dim()) throw schema_error("coupling kernel dimension mismatch");

    region_index_.assign(box_->n_sites(), -1);
    for (std::size_t i = 0; i < region_.size(); ++i) region_index_[region_[i]] = std::int32_t(i);

    const double b = boundary_spin(box_->boundary());
    boundary_field_.assign(region_.size(), 0.0);

    const bool periodic = box_->boundary() == Boundary::periodic;
    for (std::size_t i = 0; i < region_.size(); ++i) {
        const Coords xc = box_->coords_of(region_[i]);
        for (const auto& [off, j] : couplings_.terms()) {
            Coords y = xc;
            bool outside = false;
            for (int a = 0; a < box_->dim(); ++a) {
                y[a] += off[a];
                if (!periodic && (y[a] < 0 || y[a] >= box_->sides()[a])) outside = true;
            }
            if (outside) {
                boundary_field_[i] += b * j;  // exterior of the box
            }
        }
        // interior bonds once per unordered pair: positive-half offsets
        for (const auto& [off, j] : couplings_.positive_half()) {
            Coords y = xc;
            bool outside = false;
            for (int a = 0; a < box_->dim(); ++a) {
                y[a] += off[a];
                if (!periodic && (y[a] < 0 || y[a] >= box_->sides()[a])) outside = true;
            }
            if (outside) continue;
            const int ysite = box_->index_of(y);
            const int yreg = region_index_[ysite];
            if (yreg >= 0) bonds_.push_back({int(i), yreg, j});
        }
    }
}

int GibbsSpec::region_index_of_site(int site) const { return region_index_[site]; }

double minus_energy(const GibbsSpec& spec, const SpinConfig& sigma) {
    if (sigma.size() != int(spec.region().size())) throw contract_error("configuration does not fit the region");
    double e = 0.0;
    for (const auto& bond : spec.bonds()) e += bond.j * sigma.spin(bond.a) * sigma.spin(bond.b);
    const auto& bf = spec.boundary_field();
    for (std::size_t i = 0; i < bf.size(); ++i)
        e += (spec.field() + bf[i]) * sigma.spin(int(i));
    return e;
}

namespace {

constexpr int kMaxEnumSites = 20;

// Kahan-compensated accumulator
struct Acc {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

double mask_minus_energy(const GibbsSpec& spec, std::uint32_t mask) {
    double e = 0.0;
    for (const auto& bond : spec.bonds()) {
        const double sa = (mask >> bond.a) & 1u ? 1.0 : -1.0;
        const double sb = (mask >> bond.b) & 1u ? 1.0 : -1.0;
        e += bond.j * sa * sb;
    }
    const auto& bf = spec.boundary_field();
    for (std::size_t i = 0; i < bf.size(); ++i)
        e += (spec.field() + bf[i]) * ((mask >> i) & 1u ? 1.0 : -1.0);
    return e;
}

void require_enumerable(const GibbsSpec& spec) {
    if (int(spec.region().size()) > kMaxEnumSites)
        throw contract_error("region too large for exact enumeration (max 20 sites)");
}

}  // namespace

double partition_function(const GibbsSpec& spec) {
    require_enumerable(spec);
    const std::uint32_t n = std::uint32_t(spec.region().size());
    Acc z;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) z.add(std::exp(mask_minus_energy(spec, std::uint32_t(mask))));
    return z.sum;
}

double exact_expectation(const GibbsSpec& spec, const std::function<double(const SpinConfig&)>& observable) {
    require_enumerable(spec);
    const std::uint32_t n = std::uint32_t(spec.region().size());
    Acc z, num;
    SpinConfig cfg{int(n)};
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        for (std::uint32_t i = 0; i < n; ++i) cfg.set(int(i), (mask >> i) & 1u ? +1 : -1);
        const double w = std::exp(mask_minus_energy(spec, std::uint32_t(mask)));
        z.add(w);
        num.add(w * observable(cfg));
    }
    return num.sum / z.sum;
}

double exact_site_magnetization(const GibbsSpec& spec, int box_site) {
    const int i = spec.region_index_of_site(box_site);
    if (i < 0) throw contract_error("site not in the region");
    return exact_expectation(spec, [i](const SpinConfig& c) { return double(c.spin(i)); });
}

double transfer_magnetization_1d(int length, double j, double h, Boundary bc) {
    if (length < 1) throw schema_error("chain length must be >= 1");
    if (bc == Boundary::periodic) throw contract_error("transfer method covers plus/minus/free boundaries");
    const double b = boundary_spin(bc);
    const int c = length / 2;

    // forward vector up to the center, field factors included
    double f[2] = {std::exp(-h - j * b), std::exp(h + j * b)};  // index 0: spin -1, 1: spin +1
    for (int i = 1; i <= c; ++i) {
        const double fm = f[0] * std::exp(j) + f[1] * std::exp(-j);
        const double fp = f[0] * std::exp(-j) + f[1] * std::exp(j);
        f[0] = fm * std::exp(-h);
        f[1] = fp * std::exp(h);
        const double norm = std::max(f[0], f[1]);
        f[0] /= norm;
        f[1] /= norm;
    }
    // backward vector down to the center, excluding the center's own field
    double g[2] = {std::exp(-j * b), std::exp(j * b)};
    for (int i = length - 2; i >= c; --i) {
        const double gm = std::exp(j - h) * g[0] + std::exp(-j + h) * g[1];
        const double gp = std::exp(-j - h) * g[0] + std::exp(j + h) * g[1];
        g[0] = gm;
        g[1] = gp;
        const double norm = std::max(g[0], g[1]);
        g[0] /= norm;
        g[1] /= norm;
    }
    const double num = f[1] * g[1] - f[0] * g[0];
    const double den = f[1] * g[1] + f[0] * g[0];
    return num / den;
}

McmcResult mcmc_expectation(const GibbsSpec& spec, const std::function<double(const SpinConfig&)>& observable,
                            double burn_in, int samples, double spacing, std::uint64_t seed) {
    if (!spec.full_region()) throw contract_error("mcmc runs on full-box regions only");
    if (samples < 2) throw schema_error("mcmc needs at least 2 samples");
    const GeometryPtr geom = spec.box();
    const RateFamily rates = glauber_rates(spec.couplings(), spec.field(), 1.0, geom);
    const double lambda = 2.0 * rates.sup_rate();
    const double t_total = burn_in + samples * spacing;

    // segmented stream so long runs stay in bounded memory; exponential gaps
    // restart cleanly at segment joints
    const double seg_len = std::max(1.0, 1.5e6 / (lambda * geom->n_sites()));
    SpinConfig cfg = SpinConfig::all_plus(*geom);
    std::vector<double> values;
    values.reserve(samples);
    int emitted = 0;
    double t0 = 0.0;
    int seg = 0;
    while (t0 < t_total && emitted < samples) {
        const double t1 = std::min(t_total, t0 + seg_len);
        auto stream = ArrivalStream::sample(geom, lambda, t0, t1, derive_seed(seed, std::uint64_t(seg)));
        EvolveOptions opt;
        while (emitted + int(opt.sample_times.size()) < samples) {
            const double ts = burn_in + (emitted + int(opt.sample_times.size())) * spacing;
            if (ts > t1) break;
            opt.sample_times.push_back(ts);
        }
        opt.observables.emplace_back("obs", observable);
        auto [final_cfg, rec] = evolve(cfg, rates, stream, opt);
        cfg = std::move(final_cfg);
        for (const auto& s : rec.samples) values.push_back(s.value);
        emitted += int(rec.samples.size());
        t0 = t1;
        ++seg;
    }

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= double(values.size());

    // batch means standard error
    const int n_batches = std::max(2, std::min(32, int(values.size()) / 4));
    const int per = int(values.size()) / n_batches;
    double var = 0.0;
    for (int b = 0; b < n_batches; ++b) {
        double m = 0.0;
        for (int i = 0; i < per; ++i) m += values[std::size_t(b) * per + i];
        m /= per;
        var += (m - mean) * (m - mean);
    }
    var /= double(n_batches - 1);
    return {mean, std::sqrt(var / n_batches)};
}

GapResult wsm_gap(int dim, int length, double j, double h, GapMethod method, std::uint64_t seed,
                  const McmcParams& mcmc) {
    const std::vector<int> sides(dim, length);
    const CouplingKernel kernel = CouplingKernel::nearest_neighbor(dim, j);

    if (method == GapMethod::transfer) {
        if (dim != 1) throw contract_error("transfer method is 1d nearest-neighbor only");
        return {transfer_magnetization_1d(length, j, h, Boundary::plus) -
                    transfer_magnetization_1d(length, j, h, Boundary::minus),
                0.0};
    }

    const GeometryPtr plus_box = make_geometry(dim, sides, 1, Boundary::plus);
    const GeometryPtr minus_box = make_geometry(dim, sides, 1, Boundary::minus);
    const int c = center_site(*plus_box);

    if (method == GapMethod::enumeration) {
        const double mp = exact_site_magnetization(GibbsSpec(plus_box, kernel, h), c);
        const double mm = exact_site_magnetization(GibbsSpec(minus_box, kernel, h), c);
        return {mp - mm, 0.0};
    }

    auto obs = [c](const SpinConfig& cfg) { return double(cfg.spin(c)); };
    const auto rp = mcmc_expectation(GibbsSpec(plus_box, kernel, h), obs, mcmc.burn_in, mcmc.samples,
                                     mcmc.spacing, derive_seed(seed, 0));
    const auto rm = mcmc_expectation(GibbsSpec(minus_box, kernel, h), obs, mcmc.burn_in, mcmc.samples,
                                     mcmc.spacing, derive_seed(seed, 1));
    return {rp.estimate - rm.estimate, std::hypot(rp.stderr_, rm.stderr_)};
}

double check_detailed_balance(const RateFamily& rates, const GibbsSpec& spec) {
    if (!spec.full_region()) throw contract_error("detailed balance check needs the full box");
    require_enumerable(spec);
    const Geometry& g = *spec.box();
    if (!(*rates.geometry() == g)) throw contract_error("rate family geometry does not match the spec");

    const int n = g.n_sites();
    double worst = 0.0;
    SpinConfig cfg(n);
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        for (int i = 0; i < n; ++i) cfg.set(i, (mask >> i) & 1u ? +1 : -1);
        const double w = std::exp(mask_minus_energy(spec, std::uint32_t(mask)));
        for (int x = 0; x < n; ++x) {
            const double cx = rates.rate(x, local_pattern(g, cfg, x));
            cfg.flip(x);
            const double wf = std::exp(mask_minus_energy(spec, std::uint32_t(mask ^ (1ULL << x))));
            const double cxf = rates.rate(x, local_pattern(g, cfg, x));
            cfg.flip(x);
            const double a = w * cx, b = wf * cxf;
            const double m = std::max(a, b);
            if (m > 0.0) worst = std::max(worst, std::abs(a - b) / m);
        }
    }
    return worst;
}

}  // namespace spinlat
