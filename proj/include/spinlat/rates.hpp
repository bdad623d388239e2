#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spinlat/lattice.hpp"

namespace spinlat {

// Symmetric finite-range pair couplings given as (offset, J) terms. The
// kernel stores both orientations of every offset, so summing J(o) * spin
// over all terms at a site yields the usual effective field.
class CouplingKernel {
public:
    CouplingKernel() : dim_(1) {}
    explicit CouplingKernel(int dim) : dim_(dim) {}

    // inserts both o and -o; re-adding an offset with a different value is an error
    void add(const Coords& offset, double coupling);

    static CouplingKernel nearest_neighbor(int dim, double coupling);

    int dim() const { return dim_; }
    const std::vector<std::pair<Coords, double>>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    int linf_range() const;
    int l1_range() const;
    double min_coupling() const;

    // one orientation per unordered pair: terms whose offset is
    // lexicographically positive
    std::vector<std::pair<Coords, double>> positive_half() const;

private:
    int dim_;
    std::vector<std::pair<Coords, double>> terms_;
};

// A finite-range flip-rate family as dense tables over local pattern
// indices. Site dependence is limited to a finite set of table variants
// selected by a per-site class id (uniform families have one class).
class RateFamily {
public:
    RateFamily() = default;

    static RateFamily from_table(GeometryPtr geom, std::vector<double> table);
    static RateFamily from_class_tables(GeometryPtr geom, std::vector<std::vector<double>> tables,
                                        std::vector<std::uint8_t> site_class);

    const GeometryPtr& geometry() const { return geom_; }
    int n_classes() const { return int(tables_.size()); }
    bool translation_invariant() const { return tables_.size() == 1; }
    double sup_rate() const { return sup_rate_; }
    int class_of(int site) const { return site_class_.empty() ? 0 : site_class_[site]; }
    const std::vector<double>& table(int class_id = 0) const { return tables_[class_id]; }
    const std::vector<double>& table_for_site(int site) const { return tables_[class_of(site)]; }
    double rate(int site, std::uint32_t pattern) const { return table_for_site(site)[pattern]; }

    // bitmask of offset ranks the class table genuinely depends on
    std::uint32_t dependency_mask(int class_id) const;

    // Throws contract_error if a free-boundary geometry would feed exterior
    // bits into table entries that depend on them.
    void validate_for_boundary() const;

    void export_csv(std::ostream& out) const;

private:
    GeometryPtr geom_;
    std::vector<std::vector<double>> tables_;
    std::vector<std::uint8_t> site_class_;
    double sup_rate_ = 0.0;
};

// Heat-bath rates c_x(s) = exp(-beta * s(x) * h_eff) with
// h_eff = h + sum_y J_xy s(y); reversible w.r.t. the Gibbs weight
// exp(beta * (sum_pairs J s s + sum_x h s)) (pairs counted once).
// Rejects negative couplings; free-boundary geometries get one table
// variant per exterior-offset class, with absent couplings dropped.
RateFamily glauber_rates(const CouplingKernel& J, double field, double beta, GeometryPtr geom);

// Same construction without the ferromagnetic check; used to build
// counterexample tables (e.g. one antiferromagnetic bond).
RateFamily glauber_rates_general(const CouplingKernel& J, double field, double beta, GeometryPtr geom);

struct AttractivityWitness {
    int class_id;
    std::uint32_t upper_pattern;
    std::uint32_t lower_pattern;
};

// Exhaustive check of the two monotonicity conditions over comparable local
// pattern pairs agreeing at the center (sufficient by locality). Returns a
// violating pair on failure.
std::optional<AttractivityWitness> attractivity_witness(const RateFamily& c);
inline bool is_attractive(const RateFamily& c) { return !attractivity_witness(c).has_value(); }

// Perturbation distance: 2 * sup over site classes and patterns of |c0 - c1|.
// Families of unequal range are padded to the larger pattern cube first.
double epsilon_distance(const RateFamily& c0, const RateFamily& c1);

// A pair of rate families sharing one uniformized clock.
struct CoupledRates {
    RateFamily c0;
    RateFamily c1;
    double lambda;   // 2 * max sup rate; the monotone update rule needs >= 2 sup
    double epsilon;  // perturbation distance between c0 and c1
};

// Heat-bath pair with inverse temperature beta + delta on even-parity sites
// and beta - delta on odd ones for c1; c0 is the unperturbed family.
CoupledRates checkerboard_perturbation(const CouplingKernel& J, double field, double beta, double delta,
                                       GeometryPtr geom);

}  // namespace spinlat
