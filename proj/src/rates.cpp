#include "spinlat/rates.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace spinlat {

namespace {

bool lex_positive(const Coords& o, int dim) {
    for (int a = 0; a < dim; ++a) {
        if (o[a] > 0) return true;
        if (o[a] < 0) return false;
    }
    return false;
}

}  // namespace

void CouplingKernel::add(const Coords& offset, double coupling) {
    bool zero = true;
    for (int a = 0; a < dim_; ++a)
        if (offset[a] != 0) zero = false;
    if (zero) throw schema_error("coupling offsets must be nonzero");

    Coords neg{};
    for (int a = 0; a < dim_; ++a) neg[a] = -offset[a];
    for (auto& [o, j] : terms_) {
        if (o == offset || o == neg) {
            if (j != coupling) throw schema_error("conflicting coupling for an offset pair");
            return;
        }
    }
    terms_.emplace_back(offset, coupling);
    terms_.emplace_back(neg, coupling);
}

CouplingKernel CouplingKernel::nearest_neighbor(int dim, double coupling) {
    CouplingKernel k(dim);
    for (int a = 0; a < dim; ++a) {
        Coords o{};
        o[a] = 1;
        k.add(o, coupling);
    }
    return k;
}

int CouplingKernel::linf_range() const {
    int r = 0;
    for (const auto& [o, j] : terms_)
        for (int a = 0; a < dim_; ++a) r = std::max(r, std::abs(o[a]));
    return r;
}

int CouplingKernel::l1_range() const {
    int r = 0;
    for (const auto& [o, j] : terms_) {
        int s = 0;
        for (int a = 0; a < dim_; ++a) s += std::abs(o[a]);
        r = std::max(r, s);
    }
    return r;
}

double CouplingKernel::min_coupling() const {
    double m = 0.0;
    for (const auto& [o, j] : terms_) m = std::min(m, j);
    return m;
}

std::vector<std::pair<Coords, double>> CouplingKernel::positive_half() const {
    std::vector<std::pair<Coords, double>> half;
    for (const auto& t : terms_)
        if (lex_positive(t.first, dim_)) half.push_back(t);
    return half;
}

RateFamily RateFamily::from_table(GeometryPtr geom, std::vector<double> table) {
    return from_class_tables(std::move(geom), {std::move(table)}, {});
}

RateFamily RateFamily::from_class_tables(GeometryPtr geom, std::vector<std::vector<double>> tables,
                                         std::vector<std::uint8_t> site_class) {
    RateFamily f;
    f.geom_ = std::move(geom);
    const std::size_t want = std::size_t(1) << f.geom_->n_offsets();
    for (const auto& t : tables) {
        if (t.size() != want) throw schema_error("rate table size does not match the pattern cube");
        for (double v : t)
            if (!(v >= 0.0) || !std::isfinite(v)) throw schema_error("rates must be finite and nonnegative");
    }
    if (tables.empty()) throw schema_error("rate family needs at least one table");
    if (tables.size() > 1) {
        if (int(site_class.size()) != f.geom_->n_sites())
            throw schema_error("site class vector does not match geometry");
        for (std::uint8_t c : site_class)
            if (c >= tables.size()) throw schema_error("site class id out of range");
    }
    f.tables_ = std::move(tables);
    f.site_class_ = std::move(site_class);
    f.sup_rate_ = 0.0;
    for (const auto& t : f.tables_)
        for (double v : t) f.sup_rate_ = std::max(f.sup_rate_, v);
    f.validate_for_boundary();
    return f;
}

std::uint32_t RateFamily::dependency_mask(int class_id) const {
    const auto& t = tables_[class_id];
    const int m = geom_->n_offsets();
    std::uint32_t mask = 0;
    for (int k = 0; k < m; ++k) {
        const std::size_t step = std::size_t(1) << k;
        for (std::size_t p = 0; p < t.size(); ++p) {
            if (p & step) continue;
            if (t[p] != t[p + step]) {
                mask |= 1u << k;
                break;
            }
        }
    }
    return mask;
}

void RateFamily::validate_for_boundary() const {
    if (geom_->boundary() != Boundary::free_) return;
    std::vector<std::uint32_t> dep(tables_.size());
    for (std::size_t c = 0; c < tables_.size(); ++c) dep[c] = dependency_mask(int(c));
    for (int site = 0; site < geom_->n_sites(); ++site) {
        if (dep[class_of(site)] & geom_->exterior_mask(site))
            throw contract_error("free-boundary geometry: rate table depends on exterior offsets");
    }
}

void RateFamily::export_csv(std::ostream& out) const {
    out << "class,pattern,rate\n";
    for (std::size_t c = 0; c < tables_.size(); ++c)
        for (std::size_t p = 0; p < tables_[c].size(); ++p) out << c << "," << p << "," << tables_[c][p] << "\n";
}

namespace {

// one heat-bath table; offsets in `skip_mask` contribute nothing to the field
std::vector<double> glauber_table(const CouplingKernel& J, double field, double beta, const Geometry& g,
                                  std::uint32_t skip_mask) {
    const int m = g.n_offsets();
    std::vector<double> j_by_rank(m, 0.0);
    for (const auto& [off, j] : J.terms()) j_by_rank[g.rank_of_offset(off)] += j;

    const int center = g.center_offset();
    std::vector<double> table(std::size_t(1) << m);
    for (std::size_t p = 0; p < table.size(); ++p) {
        double heff = field;
        for (int k = 0; k < m; ++k) {
            if (k == center || (skip_mask >> k) & 1u) continue;
            if (j_by_rank[k] == 0.0) continue;
            heff += j_by_rank[k] * ((p >> k) & 1u ? 1.0 : -1.0);
        }
        const double s0 = (p >> center) & 1u ? 1.0 : -1.0;
        table[p] = std::exp(-beta * s0 * heff);
    }
    return table;
}

RateFamily glauber_impl(const CouplingKernel& J, double field, double beta, GeometryPtr geom) {
    if (J.dim() != geom->dim()) throw schema_error("coupling kernel dimension mismatch");
    if (J.l1_range() > geom->range()) throw schema_error("couplings exceed the geometry range");

    if (geom->boundary() != Boundary::free_) {
        return RateFamily::from_table(geom, glauber_table(J, field, beta, *geom, 0));
    }
    // free boundaries: absent exterior couplings, one table per exterior class
    std::vector<std::vector<double>> tables;
    for (std::uint32_t mask : geom->exterior_classes())
        tables.push_back(glauber_table(J, field, beta, *geom, mask));
    std::vector<std::uint8_t> cls(geom->n_sites());
    for (int s = 0; s < geom->n_sites(); ++s) cls[s] = std::uint8_t(geom->exterior_class_of(s));
    return RateFamily::from_class_tables(geom, std::move(tables), std::move(cls));
}

}  // namespace

RateFamily glauber_rates(const CouplingKernel& J, double field, double beta, GeometryPtr geom) {
    if (J.min_coupling() < 0.0) throw schema_error("glauber_rates requires ferromagnetic couplings");
    if (beta <= 0.0) throw schema_error("beta must be positive");
    return glauber_impl(J, field, beta, std::move(geom));
}

RateFamily glauber_rates_general(const CouplingKernel& J, double field, double beta, GeometryPtr geom) {
    return glauber_impl(J, field, beta, std::move(geom));
}

std::optional<AttractivityWitness> attractivity_witness(const RateFamily& c) {
    const Geometry& g = *c.geometry();
    const int m = g.n_offsets();
    if (m > 16) throw contract_error("attractivity scan limited to pattern cubes of <= 16 offsets");
    const std::uint32_t center_bit = 1u << g.center_offset();

    for (int cls = 0; cls < c.n_classes(); ++cls) {
        const auto& t = c.table(cls);
        const std::uint32_t top = (1u << m) - 1;
        for (std::uint32_t a = 0; a <= top; ++a) {
            // b runs over strict submasks of a (spinwise lower patterns)
            for (std::uint32_t b = (a - 1) & a;; b = (b - 1) & a) {
                if ((a ^ b) & center_bit) {
                    if (b == 0) break;
                    continue;
                }
                const bool center_plus = (a & center_bit) != 0;
                const bool ok = center_plus ? t[b] >= t[a] : t[a] >= t[b];
                if (!ok) return AttractivityWitness{cls, a, b};
                if (b == 0) break;
            }
        }
    }
    return std::nullopt;
}

namespace {

// embed a table over a smaller offset cube into a larger one
std::vector<double> pad_table(const std::vector<double>& t, const Geometry& from, const Geometry& to) {
    std::vector<double> out(std::size_t(1) << to.n_offsets());
    for (std::size_t p = 0; p < out.size(); ++p) {
        std::uint32_t q = 0;
        for (int k = 0; k < from.n_offsets(); ++k) {
            const int kk = to.rank_of_offset(from.offset_of_rank(k));
            q |= ((p >> kk) & 1u) << k;
        }
        out[p] = t[q];
    }
    return out;
}

}  // namespace

double epsilon_distance(const RateFamily& c0, const RateFamily& c1) {
    const Geometry& g0 = *c0.geometry();
    const Geometry& g1 = *c1.geometry();
    if (g0.dim() != g1.dim() || g0.n_sites() != g1.n_sites())
        throw contract_error("epsilon_distance: geometries do not match");

    std::vector<std::vector<double>> t0, t1;
    for (int c = 0; c < c0.n_classes(); ++c) t0.push_back(c0.table(c));
    for (int c = 0; c < c1.n_classes(); ++c) t1.push_back(c1.table(c));
    if (g0.range() < g1.range())
        for (auto& t : t0) t = pad_table(t, g0, g1);
    else if (g1.range() < g0.range())
        for (auto& t : t1) t = pad_table(t, g1, g0);

    // one representative per (class0, class1) pair actually present
    std::vector<bool> seen(std::size_t(c0.n_classes()) * c1.n_classes(), false);
    double sup = 0.0;
    for (int site = 0; site < g0.n_sites(); ++site) {
        const std::size_t pair = std::size_t(c0.class_of(site)) * c1.n_classes() + c1.class_of(site);
        if (seen[pair]) continue;
        seen[pair] = true;
        const auto& a = t0[c0.class_of(site)];
        const auto& b = t1[c1.class_of(site)];
        for (std::size_t p = 0; p < a.size(); ++p) sup = std::max(sup, std::abs(a[p] - b[p]));
    }
    return 2.0 * sup;
}

CoupledRates checkerboard_perturbation(const CouplingKernel& J, double field, double beta, double delta,
                                       GeometryPtr geom) {
    if (delta < 0.0) throw schema_error("delta must be >= 0");
    CoupledRates cr;
    cr.c0 = glauber_rates(J, field, beta, geom);
    if (delta == 0.0) {
        cr.c1 = cr.c0;
    } else {
        // general construction: beta - delta may flip the coupling sign
        RateFamily even = glauber_rates_general(J, field, beta + delta, geom);
        RateFamily odd = glauber_rates_general(J, field, beta - delta, geom);
        // compose parity with any exterior classes of the underlying builders
        std::vector<std::vector<double>> tables;
        std::vector<std::uint8_t> cls(geom->n_sites());
        const int per = even.n_classes();
        for (int c = 0; c < per; ++c) tables.push_back(even.table(c));
        for (int c = 0; c < per; ++c) tables.push_back(odd.table(c));
        for (int s = 0; s < geom->n_sites(); ++s)
            cls[s] = std::uint8_t(even.class_of(s) + (geom->parity(s) ? per : 0));
        cr.c1 = RateFamily::from_class_tables(geom, std::move(tables), std::move(cls));
    }
    cr.lambda = 2.0 * std::max(cr.c0.sup_rate(), cr.c1.sup_rate());
    cr.epsilon = epsilon_distance(cr.c0, cr.c1);
    return cr;
}

}  // namespace spinlat
