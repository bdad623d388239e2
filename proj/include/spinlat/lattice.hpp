#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "spinlat/errors.hpp"

namespace spinlat {

constexpr int kMaxDim = 4;

// Site coordinates. Only the first `dim` entries of a geometry are used.
using Coords = std::array<int, kMaxDim>;

enum class Boundary { periodic, plus, minus, free_ };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

// A finite box sublattice of Z^d with an l-infinity interaction radius and a
// boundary mode. Sites are indexed row-major with the last axis fastest.
//
// Local patterns: the spins on the offset cube [-r, r]^d around a site,
// encoded as an integer index. Offsets are ranked row-major (last axis
// fastest), from (-r,...,-r) at rank 0 to (r,...,r); bit k of the index is 1
// exactly when the spin at offset rank k is +1. All rate tables in the
// project use this convention.
class Geometry {
public:
    Geometry(int dim, std::vector<int> sides, int range, Boundary boundary);

    int dim() const { return dim_; }
    const std::vector<int>& sides() const { return sides_; }
    int range() const { return range_; }
    Boundary boundary() const { return boundary_; }
    int n_sites() const { return n_sites_; }

    // number of offsets (2r+1)^d; local pattern indices live in [0, 2^n_offsets)
    int n_offsets() const { return n_offsets_; }
    // rank of the zero offset
    int center_offset() const { return center_offset_; }

    int index_of(const Coords& c) const;  // wraps under periodic mode
    Coords coords_of(int site) const;
    bool inside(const Coords& c) const;

    // Offset-rank k of a site's neighborhood: site index, or -1 for an
    // exterior position (plus/minus/free modes only).
    const std::int32_t* neighbor_row(int site) const { return &neighbor_table_[std::size_t(site) * n_offsets_]; }
    std::vector<std::int32_t> neighborhood(int site) const;

    // fixed exterior pattern bits (all ones in plus mode, zero otherwise)
    std::uint32_t base_pattern(int site) const { return base_pattern_[site]; }
    // offset ranks that read the exterior at this site
    std::uint32_t exterior_mask(int site) const { return exterior_mask_[site]; }
    // coordinate-sum parity, used by checkerboard site classes
    int parity(int site) const { return parity_[site]; }

    // distinct exterior masks present, and per-site id into that list
    const std::vector<std::uint32_t>& exterior_classes() const { return exterior_classes_; }
    int exterior_class_of(int site) const { return exterior_class_of_[site]; }

    // offset coordinates for rank k (entries in [-r, r])
    Coords offset_of_rank(int k) const;
    int rank_of_offset(const Coords& off) const;

    bool operator==(const Geometry& o) const {
        return dim_ == o.dim_ && sides_ == o.sides_ && range_ == o.range_ && boundary_ == o.boundary_;
    }

private:
    int dim_;
    std::vector<int> sides_;
    int range_;
    Boundary boundary_;
    int n_sites_;
    int n_offsets_;
    int center_offset_;
    std::vector<std::int32_t> neighbor_table_;
    std::vector<std::uint32_t> base_pattern_;
    std::vector<std::uint32_t> exterior_mask_;
    std::vector<std::uint8_t> parity_;
    std::vector<std::uint32_t> exterior_classes_;
    std::vector<std::uint8_t> exterior_class_of_;
};

using GeometryPtr = std::shared_ptr<const Geometry>;

GeometryPtr make_geometry(int dim, std::vector<int> sides, int range, Boundary boundary);
// cubic shorthand
GeometryPtr make_torus(int dim, int side, int range);

// Spin configuration on a geometry, one bit per site (1 = spin +1).
class SpinConfig {
public:
    SpinConfig() : n_(0) {}
    explicit SpinConfig(int n_sites, int fill_spin = -1);

    static SpinConfig all_plus(const Geometry& g) { return SpinConfig(g.n_sites(), +1); }
    static SpinConfig all_minus(const Geometry& g) { return SpinConfig(g.n_sites(), -1); }

    int size() const { return n_; }
    int spin(int site) const { return bit(site) ? +1 : -1; }
    std::uint32_t bit(int site) const { return (words_[std::size_t(site) >> 6] >> (site & 63)) & 1u; }
    void set(int site, int spin_value);
    void flip(int site);

    bool operator==(const SpinConfig& o) const { return n_ == o.n_ && words_ == o.words_; }
    bool operator!=(const SpinConfig& o) const { return !(*this == o); }

    // sitewise partial order
    bool dominates(const SpinConfig& o) const;

    double magnetization() const;  // mean spin

private:
    int n_;
    std::vector<std::uint64_t> words_;
};

// Local pattern around `site` read from `config`; exterior offsets read the
// boundary spin in plus/minus mode and a neutral 0-bit in free mode (rate
// tables used with free boundaries must not depend on those bits).
inline std::uint32_t local_pattern(const Geometry& g, const SpinConfig& c, int site) {
    const std::int32_t* nb = g.neighbor_row(site);
    std::uint32_t p = g.base_pattern(site);
    const int m = g.n_offsets();
    for (int k = 0; k < m; ++k) {
        const std::int32_t j = nb[k];
        if (j >= 0) p |= c.bit(j) << k;
    }
    return p;
}

// Writes a pattern's interior offsets back into a configuration.
void write_pattern(const Geometry& g, SpinConfig& c, int site, std::uint32_t pattern);

// Box center at the floor-half coordinates; observables are measured here.
int center_site(const Geometry& g);

}  // namespace spinlat
