#pragma once

// Fixed-photon-number Fock sectors: basis enumeration, states, overlaps and
// per-mode photon statistics.  A sector is the span of all occupation vectors
// |n_1,...,n_N> with sum n_i = n.

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <vector>

#include "locap/common.hpp"

namespace locap {

using OccupationVector = std::vector<int>;

inline int total_photons(const OccupationVector& occ) {
    return std::accumulate(occ.begin(), occ.end(), 0);
}

// Compact label like "1100"; counts above 9 are bracketed so labels stay
// unambiguous ("[12]00...").
inline std::string occupation_label(const OccupationVector& occ) {
    std::string s;
    for (int c : occ) {
        if (c < 0) throw InputError("occupation_label: negative count");
        if (c <= 9)
            s += static_cast<char>('0' + c);
        else
            s += "[" + std::to_string(c) + "]";
    }
    return s;
}

/// Number of occupation vectors of n photons in N modes: C(n+N-1, n).
// Throws once the sector would exceed the supported size.
inline std::size_t basis_dimension(int photons, int modes, std::size_t limit = 1000000) {
    if (photons < 0) throw InputError("basis_dimension: photon number must be >= 0");
    if (modes < 1) throw InputError("basis_dimension: mode count must be >= 1");
    // multiplicative binomial evaluation, bailing out early on overflow of the limit
    std::size_t dim = 1;
    for (int i = 1; i <= photons; ++i) {
        // dim * (modes - 1 + i) may overflow size_t only far beyond the limit guard
        if (dim > (limit * 64)) throw InputError("basis_dimension: sector too large");
        dim = dim * static_cast<std::size_t>(modes - 1 + i) / static_cast<std::size_t>(i);
    }
    if (dim > limit) throw InputError("basis_dimension: sector dimension exceeds limit");
    return dim;
}

// Basis of one photon-number sector in descending lexicographic order:
// |n00...0> first, |00...0n> last.
class FockBasis {
public:
    FockBasis(int photons, int modes) : photons_(photons), modes_(modes) {
        const std::size_t dim = basis_dimension(photons, modes);
        elements_.reserve(dim);
        OccupationVector occ(static_cast<std::size_t>(modes), 0);
        build(occ, 0, photons);
        for (std::size_t i = 0; i < elements_.size(); ++i) index_[elements_[i]] = i;
        if (elements_.size() != dim)
            throw NumericError("FockBasis: enumeration does not match dimension formula");
    }

    int photons() const { return photons_; }
    int modes() const { return modes_; }
    std::size_t dim() const { return elements_.size(); }

    const OccupationVector& at(std::size_t i) const {
        if (i >= elements_.size()) throw InputError("FockBasis::at: index out of range");
        return elements_[i];
    }

    const std::vector<OccupationVector>& elements() const { return elements_; }

    std::size_t index_of(const OccupationVector& occ) const {
        auto it = index_.find(occ);
        if (it == index_.end())
            throw InputError("FockBasis::index_of: occupation not in this sector");
        return it->second;
    }

    bool contains(const OccupationVector& occ) const { return index_.count(occ) > 0; }

private:
    void build(OccupationVector& occ, int mode, int remaining) {
        if (mode == modes_ - 1) {
            occ[static_cast<std::size_t>(mode)] = remaining;
            elements_.push_back(occ);
            return;
        }
        for (int c = remaining; c >= 0; --c) {
            occ[static_cast<std::size_t>(mode)] = c;
            build(occ, mode + 1, remaining - c);
        }
        occ[static_cast<std::size_t>(mode)] = 0;
    }

    int photons_;
    int modes_;
    std::vector<OccupationVector> elements_;
    std::map<OccupationVector, std::size_t> index_;
};

// Bases are immutable; share one instance per (photons, modes) pair.
inline std::shared_ptr<const FockBasis> make_basis(int photons, int modes) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const FockBasis>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(photons, modes);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto basis = std::make_shared<const FockBasis>(photons, modes);
    cache[key] = basis;
    return basis;
}

// A pure state of one sector: complex amplitudes over the basis order.
struct PureState {
    std::shared_ptr<const FockBasis> basis;
    VectorXcd amplitudes;

    int photons() const { return basis->photons(); }
    int modes() const { return basis->modes(); }

    double norm() const { return amplitudes.norm(); }
};

inline PureState zero_state(std::shared_ptr<const FockBasis> basis) {
    PureState s;
    s.amplitudes = VectorXcd::Zero(static_cast<Eigen::Index>(basis->dim()));
    s.basis = std::move(basis);
    return s;
}

// Build a state from sparse (occupation, coefficient) terms.
inline PureState make_state(std::shared_ptr<const FockBasis> basis,
                            const std::vector<std::pair<OccupationVector, cxd>>& terms) {
    PureState s = zero_state(std::move(basis));
    for (const auto& [occ, coeff] : terms)
        s.amplitudes[static_cast<Eigen::Index>(s.basis->index_of(occ))] += coeff;
    return s;
}

// Basis state |occ>.
inline PureState basis_state(std::shared_ptr<const FockBasis> basis, const OccupationVector& occ) {
    return make_state(std::move(basis), {{occ, cxd(1.0, 0.0)}});
}

inline void check_same_sector(const PureState& a, const PureState& b, const char* where) {
    if (a.photons() != b.photons() || a.modes() != b.modes())
        throw InputError(std::string(where) + ": states live in different sectors");
    if (a.amplitudes.size() != b.amplitudes.size())
        throw InputError(std::string(where) + ": amplitude lengths differ");
}

// <a|b>, conjugating a.
inline cxd inner_product(const PureState& a, const PureState& b) {
    check_same_sector(a, b, "inner_product");
    return a.amplitudes.dot(b.amplitudes);
}

// Expected photon count on a subset of modes (0-based indices).
inline double mean_photon_number(const PureState& state, const std::vector<int>& modes) {
    const double nrm2 = state.amplitudes.squaredNorm();
    if (nrm2 <= 0.0) throw InputError("mean_photon_number: zero state");
    if (modes.empty()) throw InputError("mean_photon_number: empty mode list");
    for (int m : modes)
        if (m < 0 || m >= state.modes())
            throw InputError("mean_photon_number: mode index out of range");
    double acc = 0.0;
    for (std::size_t i = 0; i < state.basis->dim(); ++i) {
        const double w = std::norm(state.amplitudes[static_cast<Eigen::Index>(i)]);
        if (w == 0.0) continue;
        const OccupationVector& occ = state.basis->at(i);
        int count = 0;
        for (int m : modes) count += occ[static_cast<std::size_t>(m)];
        acc += w * count;
    }
    return acc / nrm2;
}

inline PureState normalize(const PureState& state) {
    const double n = state.amplitudes.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw InputError("normalize: state has zero or non-finite norm");
    PureState out = state;
    out.amplitudes /= n;
    return out;
}

}  // namespace locap
