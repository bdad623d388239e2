#include "spinlat/lattice.hpp"

#include <algorithm>

namespace spinlat {

std::string to_string(Boundary b) {
    switch (b) {
        case Boundary::periodic: return "periodic";
        case Boundary::plus: return "plus";
        case Boundary::minus: return "minus";
        case Boundary::free_: return "free";
    }
    return "?";
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "plus") return Boundary::plus;
    if (s == "minus") return Boundary::minus;
    if (s == "free") return Boundary::free_;
    throw schema_error("unknown boundary mode: " + s);
}

Geometry::Geometry(int dim, std::vector<int> sides, int range, Boundary boundary)
    : dim_(dim), sides_(std::move(sides)), range_(range), boundary_(boundary) {
    if (dim_ < 1 || dim_ > kMaxDim) throw schema_error("dimension must be in [1, 4]");
    if (int(sides_.size()) != dim_) throw schema_error("sides list does not match dimension");
    for (int s : sides_)
        if (s < 1) throw schema_error("side lengths must be >= 1");
    if (range_ < 1) throw schema_error("range must be >= 1");

    n_sites_ = 1;
    for (int s : sides_) n_sites_ *= s;

    n_offsets_ = 1;
    for (int a = 0; a < dim_; ++a) n_offsets_ *= (2 * range_ + 1);
    // dense rate tables hold 2^n_offsets entries; 27 covers range 1 in d=3
    if (n_offsets_ > 27) throw contract_error("local pattern cube too large for dense tables");
    center_offset_ = (n_offsets_ - 1) / 2;

    neighbor_table_.assign(std::size_t(n_sites_) * n_offsets_, -1);
    base_pattern_.assign(n_sites_, 0);
    exterior_mask_.assign(n_sites_, 0);
    parity_.assign(n_sites_, 0);

    for (int site = 0; site < n_sites_; ++site) {
        const Coords c = coords_of(site);
        int psum = 0;
        for (int a = 0; a < dim_; ++a) psum += c[a];
        parity_[site] = std::uint8_t(((psum % 2) + 2) % 2);

        for (int k = 0; k < n_offsets_; ++k) {
            const Coords off = offset_of_rank(k);
            Coords y{};
            bool exterior = false;
            for (int a = 0; a < dim_; ++a) {
                int v = c[a] + off[a];
                if (boundary_ == Boundary::periodic) {
                    v %= sides_[a];
                    if (v < 0) v += sides_[a];
                } else if (v < 0 || v >= sides_[a]) {
                    exterior = true;
                }
                y[a] = v;
            }
            if (exterior) {
                exterior_mask_[site] |= 1u << k;
                if (boundary_ == Boundary::plus) base_pattern_[site] |= 1u << k;
            } else {
                neighbor_table_[std::size_t(site) * n_offsets_ + k] = std::int32_t(index_of(y));
            }
        }
    }

    exterior_class_of_.assign(n_sites_, 0);
    for (int site = 0; site < n_sites_; ++site) {
        std::uint32_t m = exterior_mask_[site];
        auto it = std::find(exterior_classes_.begin(), exterior_classes_.end(), m);
        if (it == exterior_classes_.end()) {
            exterior_classes_.push_back(m);
            it = exterior_classes_.end() - 1;
        }
        exterior_class_of_[site] = std::uint8_t(it - exterior_classes_.begin());
    }
}

int Geometry::index_of(const Coords& c) const {
    int idx = 0;
    for (int a = 0; a < dim_; ++a) {
        int v = c[a];
        if (boundary_ == Boundary::periodic) {
            v %= sides_[a];
            if (v < 0) v += sides_[a];
        }
        idx = idx * sides_[a] + v;
    }
    return idx;
}

Coords Geometry::coords_of(int site) const {
    Coords c{};
    for (int a = dim_ - 1; a >= 0; --a) {
        c[a] = site % sides_[a];
        site /= sides_[a];
    }
    return c;
}

bool Geometry::inside(const Coords& c) const {
    for (int a = 0; a < dim_; ++a)
        if (c[a] < 0 || c[a] >= sides_[a]) return false;
    return true;
}

std::vector<std::int32_t> Geometry::neighborhood(int site) const {
    const std::int32_t* row = neighbor_row(site);
    return std::vector<std::int32_t>(row, row + n_offsets_);
}

Coords Geometry::offset_of_rank(int k) const {
    Coords off{};
    const int w = 2 * range_ + 1;
    for (int a = dim_ - 1; a >= 0; --a) {
        off[a] = k % w - range_;
        k /= w;
    }
    return off;
}

int Geometry::rank_of_offset(const Coords& off) const {
    const int w = 2 * range_ + 1;
    int k = 0;
    for (int a = 0; a < dim_; ++a) k = k * w + (off[a] + range_);
    return k;
}

GeometryPtr make_geometry(int dim, std::vector<int> sides, int range, Boundary boundary) {
    return std::make_shared<const Geometry>(dim, std::move(sides), range, boundary);
}

GeometryPtr make_torus(int dim, int side, int range) {
    return make_geometry(dim, std::vector<int>(dim, side), range, Boundary::periodic);
}

SpinConfig::SpinConfig(int n_sites, int fill_spin) : n_(n_sites) {
    words_.assign((std::size_t(n_sites) + 63) / 64, fill_spin > 0 ? ~0ULL : 0ULL);
    if (fill_spin > 0 && n_ % 64 != 0) words_.back() &= (1ULL << (n_ % 64)) - 1;
}

void SpinConfig::set(int site, int spin_value) {
    const std::uint64_t m = 1ULL << (site & 63);
    if (spin_value > 0)
        words_[std::size_t(site) >> 6] |= m;
    else
        words_[std::size_t(site) >> 6] &= ~m;
}

void SpinConfig::flip(int site) { words_[std::size_t(site) >> 6] ^= 1ULL << (site & 63); }

bool SpinConfig::dominates(const SpinConfig& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (o.words_[i] & ~words_[i]) return false;
    return true;
}

double SpinConfig::magnetization() const {
    long plus = 0;
    for (std::uint64_t w : words_) plus += __builtin_popcountll(w);
    return (2.0 * double(plus) - double(n_)) / double(n_);
}

void write_pattern(const Geometry& g, SpinConfig& c, int site, std::uint32_t pattern) {
    const std::int32_t* nb = g.neighbor_row(site);
    for (int k = 0; k < g.n_offsets(); ++k)
        if (nb[k] >= 0) c.set(nb[k], (pattern >> k) & 1u ? +1 : -1);
}

int center_site(const Geometry& g) {
    Coords c{};
    for (int a = 0; a < g.dim(); ++a) c[a] = g.sides()[a] / 2;
    return g.index_of(c);
}

}  // namespace spinlat
