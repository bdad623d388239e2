#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinlat/rates.hpp"
#include "spinlat/rng.hpp"

namespace spinlat {

struct Arrival {
    double t;
    double u;  // uniform mark in [0, 1)
};

struct Event {
    double t;
    double u;
    std::int32_t site;
};

// Seeded space-time Poisson arrivals with uniform marks: the shared
// randomness of every coupling built on top of it. Per-site randomness is
// derived from (seed, site coordinates) by the documented 64-bit mix, so
// streams on different boxes agree on shared sites. Regeneration from the
// same (seed, geometry, window, lambda) is bit-identical, per-site arrival
// times are strictly increasing, and no two arrivals share a timestamp (on
// an exact collision the later site's sequence is redrawn).
class ArrivalStream {
public:
    static ArrivalStream sample(GeometryPtr geom, double lambda, double t_begin, double t_end,
                                std::uint64_t seed);

    // replay/synthetic construction from explicit per-site arrival lists
    static ArrivalStream from_arrivals(GeometryPtr geom, double lambda, double t_begin, double t_end,
                                       std::vector<std::vector<Arrival>> per_site);

    const GeometryPtr& geometry() const { return geom_; }
    double lambda() const { return lambda_; }
    double t_begin() const { return t_begin_; }
    double t_end() const { return t_end_; }
    std::uint64_t seed() const { return seed_; }

    const std::vector<Arrival>& site_arrivals(int site) const { return per_site_[site]; }
    // global time-sorted merge
    const std::vector<Event>& order() const { return order_; }

    void serialize(std::ostream& out) const;
    static ArrivalStream deserialize(std::istream& in);

    // restriction to a closed-open time window (t0, t1]; keeps geometry/seed metadata
    ArrivalStream clipped(double t0, double t1) const;
    // restriction to a site predicate (arrivals elsewhere dropped)
    ArrivalStream clipped_sites(const std::function<bool(int)>& keep) const;

private:
    GeometryPtr geom_;
    double lambda_ = 0.0;
    double t_begin_ = 0.0;
    double t_end_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<std::vector<Arrival>> per_site_;
    std::vector<Event> order_;

    void rebuild_order();
};

// Threshold of the uniformized update rule: v = c/lambda when the center
// spin is +1 and 1 - c/lambda otherwise; the updated spin is +1 iff U >= v.
inline double update_threshold(double rate, double lambda, bool center_plus) {
    return center_plus ? rate / lambda : 1.0 - rate / lambda;
}

inline int updated_spin(double u, double threshold) { return u >= threshold ? +1 : -1; }

// Single update from a local pattern; requires lambda >= 2 sup rate.
int update_spin(std::uint32_t pattern, double u, const RateFamily& c, int site, double lambda);

struct TrajectorySample {
    double t;
    std::string observable;
    double value;
};

struct LoggedEvent {
    double t;
    std::int32_t site;
    int old_spin;
    int new_spin;
    double u;
    bool perturbation;
};

struct TrajectoryRecord {
    std::vector<TrajectorySample> samples;
    std::vector<LoggedEvent> events;
};

class PerturbationOracle;

struct EvolveOptions {
    std::vector<double> sample_times;  // ascending
    std::vector<std::pair<std::string, std::function<double(const SpinConfig&)>>> observables;
    bool log_events = false;
    const PerturbationOracle* perturbations = nullptr;  // flags logged events
};

// Applies the update rule at each arrival in global time order; the result
// is a deterministic function of (initial, stream).
std::pair<SpinConfig, TrajectoryRecord> evolve(const SpinConfig& initial, const RateFamily& c,
                                               const ArrivalStream& stream, const EvolveOptions& opt = {});

// Several chains consuming identical (arrival, U) data. Each final equals
// evolve() run separately on the same stream.
std::vector<SpinConfig> coupled_evolve(const std::vector<std::pair<SpinConfig, const RateFamily*>>& chains,
                                       const ArrivalStream& stream);

// Runs the chains from an ordered initial pair asserting the order after
// every arrival; a violation reports (time, site) and signals either a
// non-attractive table or an undersized lambda.
struct MonotoneReport {
    bool ok;
    double t;
    std::int32_t site;
    std::size_t updates;  // arrivals processed
};
MonotoneReport check_monotone(const RateFamily& c, const ArrivalStream& stream, const SpinConfig& upper,
                              const SpinConfig& lower);

// Per site class, the U-intervals on which two families' update thresholds
// disagree for some local pattern. An arrival whose mark falls in one of
// them may drive the coupled chains apart.
class PerturbationOracle {
public:
    PerturbationOracle(const RateFamily& c0, const RateFamily& c1, double lambda);

    bool is_perturbation(int site, double u) const;
    // total length of the disagreement intervals for a site's class
    double disagreement_measure(int site) const;

private:
    std::vector<std::vector<std::pair<double, double>>> intervals_;  // per pair class, open, sorted
    std::vector<std::uint32_t> pair_class_;                          // per site
    std::vector<double> measure_;
};

}  // namespace spinlat
