#pragma once

#include "spinlat/influence.hpp"

namespace spinlat {

// Space-time box grid: boxes of spatial side M (sites) and temporal depth
// l_box (time units, half-open at the bottom); the extended box keeps the
// center but trebles the spatial side. Defaults follow l_box = ceil(N tau0)
// and M = 2 r ceil(N tau0); both can be overridden (the default M makes ray
// escape likely whenever the uniformized rate exceeds 2/r per unit time, so
// scans usually pin M to a multiple of lambda * r * l_box instead).
struct BoxGrid {
    int dim = 1;
    int range = 1;
    double n_scale = 1.0;  // the dimensionless box-size parameter
    double tau0 = 1.0;
    double l_box = 1.0;  // temporal depth
    int m_sites = 1;     // spatial side of the core box

    static BoxGrid make(int dim, int range, double n_scale, double tau0, int m_override = 0,
                        double l_override = 0.0);

    int extended_side() const { return 3 * m_sites; }
    // dependency radius in box-index distance: spatially, extended boxes of
    // indices differing by more than 2 are disjoint, and any temporal index
    // difference separates the time slabs
    int independence_radius() const { return 2; }

    // the replica environment: a torus carrying exactly one extended box
    GeometryPtr environment_torus() const {
        return make_geometry(dim, std::vector<int>(dim, extended_side()), range, Boundary::periodic);
    }
};

enum class BoxVerdict { good, bad_perturbation, bad_ray_escape, bad_cluster_survival };

struct BoxFlags {
    bool perturbation = false;      // a disagreement-capable mark lands in the extended box
    bool ray_escape = false;        // a backward ray from the core box reaches the extended boundary
    bool cluster_survival = false;  // an unperturbed cluster from the core top avoids the boundary
                                    // and lives through the whole temporal depth
    BoxVerdict verdict() const {
        if (perturbation) return BoxVerdict::bad_perturbation;
        if (ray_escape) return BoxVerdict::bad_ray_escape;
        if (cluster_survival) return BoxVerdict::bad_cluster_survival;
        return BoxVerdict::good;
    }
    bool bad() const { return perturbation || ray_escape || cluster_survival; }
};

std::string to_string(BoxVerdict v);

// Classifies one box whose extended footprint has its corner at
// `footprint_origin` in the stream's geometry and whose top sits at `t_top`.
// Only arrivals inside the extended footprint and window are read, so the
// verdict is measurable from the extended box's data. Event 3 uses the
// conservative dependence walk by default; the exact variant is available
// for tiny boxes.
BoxFlags classify_box(const ArrivalStream& stream, const RateFamily& c0, const PerturbationOracle* pert,
                      const BoxGrid& grid, const Coords& footprint_origin, double t_top,
                      DependenceMethod event3_method = DependenceMethod::overapprox);

struct BadBoxPoint {
    double n_scale;
    int m_sites;
    double l_box;
    double epsilon;
    double p_bad;
    double stderr_;
    double event1_frac;
    double event2_frac;
    double event3_frac;
};

// Independent replicas of the box-local environment: a torus of side 3M
// carrying exactly the extended box's data.
BadBoxPoint bad_box_probability(const CoupledRates& rates, const BoxGrid& grid, int replicas,
                                std::uint64_t seed, int workers = 1);

}  // namespace spinlat
