#pragma once

#include <functional>
#include <vector>

#include "spinlat/rates.hpp"

namespace spinlat {

// Finite-volume Ising specification on a region S inside an ambient box.
// Couplings and field are stored with any inverse temperature already
// multiplied in. Pairs are counted once; the box geometry's boundary mode is
// the boundary condition: under plus/minus each site of S couples to the
// exterior of the ambient box as b * sum of the kernel weights leaving the
// box (sites of the box outside S do not couple to S at all); free boxes
// have no exterior terms and periodic boxes no exterior at all.
class GibbsSpec {
public:
    GibbsSpec(GeometryPtr box, CouplingKernel couplings, double field);
    // region restricted to a subset of the box
    GibbsSpec(GeometryPtr box, std::vector<std::int32_t> region, CouplingKernel couplings, double field);

    const GeometryPtr& box() const { return box_; }
    const std::vector<std::int32_t>& region() const { return region_; }
    bool full_region() const { return int(region_.size()) == box_->n_sites(); }
    const CouplingKernel& couplings() const { return couplings_; }
    double field() const { return field_; }
    Boundary bc() const { return box_->boundary(); }

    struct Bond {
        int a, b;  // region-local indices
        double j;
    };
    const std::vector<Bond>& bonds() const { return bonds_; }
    // per region site: b * sum of couplings into the ambient exterior
    const std::vector<double>& boundary_field() const { return boundary_field_; }

    int region_index_of_site(int site) const;  // -1 if not in region

private:
    GeometryPtr box_;
    std::vector<std::int32_t> region_;
    CouplingKernel couplings_;
    double field_;
    std::vector<Bond> bonds_;
    std::vector<double> boundary_field_;
    std::vector<std::int32_t> region_index_;
};

// Minus the Hamiltonian of a configuration on the region; Gibbs weights are
// exp of this value.
double minus_energy(const GibbsSpec& spec, const SpinConfig& sigma);

// Exact sums over all 2^|S| configurations (compensated summation);
// regions above 20 sites are rejected.
double partition_function(const GibbsSpec& spec);
double exact_expectation(const GibbsSpec& spec, const std::function<double(const SpinConfig&)>& observable);
// expectation of the spin at a box site (site given in box indexing)
double exact_site_magnetization(const GibbsSpec& spec, int box_site);

// <spin at the chain center> for the 1d nearest-neighbor chain of length L
// with coupling j and field h (temperature absorbed), boundary bc. Exact
// product of 2x2 transfer matrices, normalized per step; L up to ~10^4.
double transfer_magnetization_1d(int length, double j, double h, Boundary bc);

struct McmcResult {
    double estimate;
    double stderr_;
};

// Time-average estimate of an observable under the heat-bath dynamics
// matching the spec, with batch-means standard error. Burn-in and sample
// spacing are in continuous time.
McmcResult mcmc_expectation(const GibbsSpec& spec, const std::function<double(const SpinConfig&)>& observable,
                            double burn_in, int samples, double spacing, std::uint64_t seed);

enum class GapMethod { enumeration, transfer, mcmc };

struct GapResult {
    double gap;
    double stderr_;  // zero for exact methods
};

struct McmcParams {
    double burn_in = 8.0;
    int samples = 2000;
    double spacing = 0.5;
};

// Weak-spatial-mixing gap: center magnetization under + boundary minus the
// one under - boundary, on the d-dimensional box of side L.
GapResult wsm_gap(int dim, int length, double j, double h, GapMethod method, std::uint64_t seed = 1,
                  const McmcParams& mcmc = {});

// Max relative detailed-balance violation of a rate family against the exact
// Gibbs law of `spec` (enumerable regions only). Validates the sign
// convention of the heat-bath rates.
double check_detailed_balance(const RateFamily& rates, const GibbsSpec& spec);

}  // namespace spinlat
