#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spinlat/errors.hpp"

namespace spinlat {

// A small weighted graph (<= 10 vertices) with an optional ghost vertex that
// aggregates couplings to the exterior; vertex n is the ghost when present.
// Field and couplings are stored as used in the identities (any doubling is
// applied by the caller).
class SmallGraph {
public:
    SmallGraph(int n_vertices, bool with_ghost, double field);

    int n() const { return n_; }
    bool has_ghost() const { return ghost_; }
    int ghost() const { return n_; }  // valid only when has_ghost()
    double field() const { return field_; }

    void set_coupling(int a, int b, double j);  // symmetric
    double coupling(int a, int b) const { return w_[std::size_t(a) * (n_ + 1) + b]; }

    struct EdgeRef {
        int a, b;  // a < b; b may be the ghost
        double j;
    };
    // edges with nonzero coupling among vertices in `mask` (ghost included
    // when `with_ghost_edges`)
    std::vector<EdgeRef> edges(std::uint32_t mask, bool with_ghost_edges) const;
    std::uint32_t full_mask() const { return (std::uint32_t(1) << n_) - 1; }

    static SmallGraph chain(int n_vertices, double j, double ghost_end_weight, double field);

private:
    int n_;
    bool ghost_;
    double field_;
    std::vector<double> w_;  // (n+1)^2 dense, ghost row/col present always
};

// Ising sums on a vertex subset. bc = +1/-1 couples every subset vertex to
// the ghost through its ghost weight times bc; bc = 0 drops ghost edges.
// `scale` multiplies the couplings, `field` is given explicitly.
// Counting-measure partition function: plain sum over spin assignments.
double graph_partition(const SmallGraph& g, std::uint32_t mask, double scale, double field, int bc);
// Per-spin-normalized variant: the counting sum divided by 2^|mask|.
double graph_partition_normalized(const SmallGraph& g, std::uint32_t mask, double scale, double field, int bc);
// <spin at `site`> under the same weights (0 for the empty region)
double graph_magnetization(const SmallGraph& g, std::uint32_t mask, double scale, double field, int bc, int site);

// Integer current configuration: per-edge multiplicities k and per-vertex
// multiplicities l. Sources are recomputed from the parity rule, never
// stored.
struct CurrentConfig {
    std::map<std::pair<int, int>, int> k;  // keys with a < b; b may be ghost
    std::map<int, int> l;

    void add_edge(int a, int b, int mult);
};

// product over edges of j^k / k! times product over vertices of h^l / l!
// (caller passes the doubled parameters where the identities need them);
// `plus_variant` keeps ghost edges, the free variant rejects them.
double current_weight(const SmallGraph& g, const CurrentConfig& n, double scale, double field,
                      bool plus_variant);
// odd-parity vertices of l_x + sum_y k_xy (ghost included)
std::vector<int> current_boundary(const SmallGraph& g, const CurrentConfig& n);

struct IdentityReport {
    std::string identity;
    std::uint64_t instance_hash = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    int truncation = 0;      // 0 for exact identities
    double cauchy_gap = 0.0; // |value(2K) - value(K)| for truncated ones
    bool pass = false;
    std::string note;

    std::string to_json() const;
};

// Exact identities, verified by enumeration (counting-measure partition
// functions, pairs counted once).

// Z+ Z- against the two-replica change of variables with the exclusion rule.
IdentityReport check_doubling(const SmallGraph& g);
// Z+ Z- = sum over subsets V of Z^{f,2J,2h}_{B\V} Z^{+,2J,0}_V.
IdentityReport check_partition_product(const SmallGraph& g);
// Z+ Z- (<s_0>+ - <s_0>-) = 2 sum_{V owning 0} Z^f_{B\V} Z^+_V <eta_0>_V,
// plus the support rule: terms vanish unless 0 reaches the ghost inside V.
IdentityReport check_difference_product(const SmallGraph& g, int marked = 0);

// Truncated identities; values are reported at truncation K and 2K and must
// be Cauchy-close. These use per-spin-normalized partition functions, which
// is the normalization that makes the current expansions exact.

// Z^{+,2J,0}_V <eta_0>_V = sum over currents with sources {0, ghost}.
IdentityReport check_source_expansion(const SmallGraph& g, int truncation);
// Resummation of the vertex currents of a fixed edge current k into
// sinh/cosh factors by the parity classes of the k-degrees. The origin's
// factor follows from its own parity; the report notes when that differs
// from assigning it to the odd class unconditionally.
IdentityReport check_parity_resummation(const SmallGraph& g, const CurrentConfig& k, int truncation);
// Z^f_A = sum over the source-free current component Y of the origin of
// Z^f_{A\Y} K_Y; K_Y sums source-free currents on Y connecting Y to the
// origin (K of the empty set is 1, and Y contains the origin whenever the
// origin lies in A).
IdentityReport check_component_resummation(const SmallGraph& g, int truncation);

// k-distance ball and frontier used by the cluster surgery
struct CurrentCluster {
    std::vector<int> ball;                      // vertices within k-distance R of the origin
    std::vector<std::pair<int, int>> frontier;  // nonzero-k edges leaving the ball
};
// distances over nonzero-k paths inside the vertex set (never through the ghost)
CurrentCluster current_cluster(const SmallGraph& g, const CurrentConfig& k, int radius);
// least R > L/(4r) with |frontier| <= a |ball|; infinity when none exists
double frontier_radius(const SmallGraph& g, const CurrentConfig& k, double a, int length, int range);

// randomized corpus over small graphs, with and without ghost
std::vector<IdentityReport> run_identity_corpus(int n_graphs, int max_vertices, int truncation,
                                                std::uint64_t seed);

std::string reports_to_json(const std::vector<IdentityReport>& reports);

}  // namespace spinlat
