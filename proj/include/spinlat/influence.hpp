#pragma once

#include <vector>

#include "spinlat/fit.hpp"
#include "spinlat/graphical.hpp"

namespace spinlat {

enum class DependenceMethod { exact, sandwich, overapprox };

// Backward dependence of the spin at (site, t) on the configuration at
// earlier times s: the sites whose value at s can alter the target. Stored
// as breakpoints at arrival times, s decreasing from t; the set valid on
// [u_{k+1}, u_k) is the one after processing arrivals later than s, and
// once empty it stays empty. The sandwich method resolves emptiness only.
struct DependenceSet {
    int target_site = -1;
    double target_time = 0.0;
    double window_begin = 0.0;
    bool has_sets = true;

    struct Breakpoint {
        double time;
        std::vector<std::int32_t> sites;  // sorted; empty iff nonempty == false
        bool nonempty;
    };
    std::vector<Breakpoint> breakpoints;  // decreasing time; first = (t, {site})

    bool nonempty_at(double s) const;
    const std::vector<std::int32_t>& set_at(double s) const;
};

// cap applies to the exact method's candidate-set size (cost 2^|Y|)
DependenceSet backward_dependence(int site, double t, const ArrivalStream& stream, const RateFamily& rates,
                                  DependenceMethod method, int size_cap = 20);

// Space-time points reachable by backward paths that jump (by at most the
// interaction range) only at arrivals on their current site. A site is
// reachable on [down_to, join_time), the root on [down_to, t].
struct LightrayReach {
    int root = -1;
    double t = 0.0;
    double down_to = 0.0;
    std::vector<double> join_time;  // per site; NaN when unreached

    bool reached(int site) const;
    bool contains(int site, double s) const;
    std::vector<std::int32_t> sites_at(double s) const;
};

LightrayReach lightray_reach(int site, double t, const ArrivalStream& stream, double down_to);

// Space-time closure of the dependence sets: per-site unions of closed time
// intervals.
struct InfluenceCluster {
    int target_site = -1;
    double target_time = 0.0;
    double window_begin = 0.0;
    // per site, disjoint closed intervals sorted by time
    std::vector<std::pair<std::int32_t, std::pair<double, double>>> strips;

    bool contains(int site, double s) const;
    bool reaches_time(double s) const;
    // sites whose strip covers time u
    std::vector<std::int32_t> sites_at(double u) const;
};

InfluenceCluster cluster_of(const DependenceSet& dep);

struct SurvivalPoint {
    double t;
    double p_hat;
    double stderr_;
};

// Fraction of independent replicas whose dependence set at the window start
// is still nonempty; the target sits at the box center. Replica seeds derive
// from the master seed.
SurvivalPoint survival_estimate(const RateFamily& rates, GeometryPtr geom, double t, int replicas,
                                DependenceMethod method, std::uint64_t seed, int workers = 1);

// One shared coupled run per replica; the horizon-t indicator is the
// disagreement of the extreme-start chains at the center site at time t.
std::vector<SurvivalPoint> survival_scan_sandwich(const RateFamily& rates, GeometryPtr geom,
                                                  const std::vector<double>& horizons, int replicas,
                                                  std::uint64_t seed, int workers = 1);

struct GapPoint {
    double t;
    double gap;
    double stderr_;
};

// Extreme-start coupling gap at the center site. Every realization is
// checked against the emptiness indicator produced by the sandwich
// dependence path; a mismatch throws (it certifies an implementation bug).
GapPoint sandwich_gap(const RateFamily& rates, GeometryPtr geom, double t, int replicas, std::uint64_t seed,
                      int workers = 1);

}  // namespace spinlat
