#pragma once

// Mode-space unitaries and their action on photon-number sectors.
//
// Convention used throughout: a mode unitary U transforms creation operators
// column-wise, a+_k -> sum_j U_jk a+_j, so state evolution composes as
// lift(U*V) = lift(U)*lift(V).  Matrices written in the row-substitution
// convention (a+_k -> sum_j M_kj a+_j) act here as lift(M^T).

#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

#include "locap/common.hpp"
#include "locap/fock.hpp"

namespace locap {

inline bool is_unitary(const MatrixXcd& m, double tol = 1e-10) {
    if (m.rows() != m.cols() || m.rows() == 0) return false;
    MatrixXcd gram = m.adjoint() * m;
    gram -= MatrixXcd::Identity(m.rows(), m.cols());
    return gram.cwiseAbs().maxCoeff() < tol;
}

// An N x N unitary acting on mode creation operators.
struct ModeUnitary {
    MatrixXcd m;

    ModeUnitary() = default;
    explicit ModeUnitary(MatrixXcd mat, double tol = 1e-10) : m(std::move(mat)) {
        if (!is_unitary(m, tol)) throw InputError("ModeUnitary: matrix is not unitary");
    }

    int modes() const { return static_cast<int>(m.rows()); }

    ModeUnitary transposed() const {
        ModeUnitary u;
        u.m = m.transpose();
        return u;
    }
};

inline ModeUnitary identity_unitary(int modes) {
    ModeUnitary u;
    u.m = MatrixXcd::Identity(modes, modes);
    return u;
}

// Two-mode unitary from one mixing angle and three phases:
//   [ e^{i phi1} cos t    -e^{i phi2} sin t                ]
//   [ e^{i phi3} sin t     e^{i (phi2 + phi3 - phi1)} cos t ]
inline ModeUnitary u2_from_angles(double theta, double phi1, double phi2, double phi3) {
    const double c = std::cos(theta), s = std::sin(theta);
    const cxd i1(0.0, phi1), i2(0.0, phi2), i3(0.0, phi3), i4(0.0, phi2 + phi3 - phi1);
    MatrixXcd m(2, 2);
    m(0, 0) = std::exp(i1) * c;
    m(0, 1) = -std::exp(i2) * s;
    m(1, 0) = std::exp(i3) * s;
    m(1, 1) = std::exp(i4) * c;
    ModeUnitary u;
    u.m = std::move(m);  // exactly unitary by construction
    return u;
}

// Smooth chart of U(N) from N^2 real parameters: U = exp(iH) with H Hermitian,
// H_kk = h[k], and for k < l (row-major pair order)
// H_kl = h[N + 2t] + i h[N + 2t + 1].
inline ModeUnitary unitary_from_params(const VectorXd& h, int modes) {
    if (modes < 1) throw InputError("unitary_from_params: modes must be >= 1");
    if (h.size() != static_cast<Eigen::Index>(modes) * modes)
        throw InputError("unitary_from_params: expected N^2 parameters");
    MatrixXcd herm(modes, modes);
    for (int k = 0; k < modes; ++k) herm(k, k) = cxd(h[k], 0.0);
    int t = modes;
    for (int k = 0; k < modes; ++k) {
        for (int l = k + 1; l < modes; ++l) {
            herm(k, l) = cxd(h[t], h[t + 1]);
            herm(l, k) = std::conj(herm(k, l));
            t += 2;
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm);
    if (es.info() != Eigen::Success)
        throw NumericError("unitary_from_params: eigendecomposition failed");
    VectorXcd phases(modes);
    for (int k = 0; k < modes; ++k) phases[k] = std::exp(cxd(0.0, es.eigenvalues()[k]));
    ModeUnitary u;
    u.m = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return u;
}

// Place a local unitary on a contiguous mode window [first, first + local.modes),
// identity elsewhere.  Mode indices are 0-based.
inline ModeUnitary embed(const ModeUnitary& local, int first_mode, int total_modes) {
    const int w = local.modes();
    if (first_mode < 0 || first_mode + w > total_modes)
        throw InputError("embed: window does not fit the mode range");
    ModeUnitary u = identity_unitary(total_modes);
    u.m.block(first_mode, first_mode, w, w) = local.m;
    return u;
}

// Place a local unitary on an arbitrary list of distinct modes.
inline ModeUnitary embed_at(const ModeUnitary& local, const std::vector<int>& modes,
                            int total_modes) {
    if (static_cast<int>(modes.size()) != local.modes())
        throw InputError("embed_at: mode list size must match the local unitary");
    ModeUnitary u = identity_unitary(total_modes);
    for (std::size_t a = 0; a < modes.size(); ++a) {
        if (modes[a] < 0 || modes[a] >= total_modes)
            throw InputError("embed_at: mode index out of range");
        for (std::size_t b = 0; b < modes.size(); ++b)
            u.m(modes[a], modes[b]) = local.m(static_cast<Eigen::Index>(a),
                                              static_cast<Eigen::Index>(b));
    }
    if (!is_unitary(u.m)) throw InputError("embed_at: duplicate mode indices");
    return u;
}

// Permanent of a square matrix up to 8 x 8, Ryser's formula with Gray-code
// subset updates: per(A) = sum_S (-1)^{n-|S|} prod_i sum_{j in S} A_ij.
inline cxd permanent(const MatrixXcd& a) {
    if (a.rows() != a.cols()) throw InputError("permanent: matrix must be square");
    const int n = static_cast<int>(a.rows());
    if (n > 8) throw InputError("permanent: size above 8 not supported");
    if (n == 0) return cxd(1.0, 0.0);
    cxd rowsum[8];
    for (int i = 0; i < n; ++i) rowsum[i] = cxd(0.0, 0.0);
    cxd total(0.0, 0.0);
    std::uint32_t prev = 0;
    const std::uint32_t count = 1u << n;
    for (std::uint32_t g = 1; g < count; ++g) {
        const std::uint32_t gray = g ^ (g >> 1);
        const std::uint32_t diff = gray ^ prev;
        const int j = std::countr_zero(diff);
        if (gray & diff)
            for (int i = 0; i < n; ++i) rowsum[i] += a(i, j);
        else
            for (int i = 0; i < n; ++i) rowsum[i] -= a(i, j);
        prev = gray;
        cxd prod = rowsum[0];
        for (int i = 1; i < n; ++i) prod *= rowsum[i];
        const int bits = std::popcount(gray);
        if ((n - bits) & 1)
            total -= prod;
        else
            total += prod;
    }
    return total;
}

namespace detail {

// Mode index lists with multiplicity ("|0,2,1,0>" -> [1,1,2]) and the
// sqrt(prod n_i!) normalizers, precomputed per basis.
struct SectorExpansion {
    std::vector<std::vector<int>> index_lists;
    std::vector<double> normalizers;

    explicit SectorExpansion(const FockBasis& basis) {
        index_lists.reserve(basis.dim());
        normalizers.reserve(basis.dim());
        for (const auto& occ : basis.elements()) {
            std::vector<int> idx;
            double f = 1.0;
            for (int mode = 0; mode < static_cast<int>(occ.size()); ++mode) {
                for (int c = 0; c < occ[static_cast<std::size_t>(mode)]; ++c) idx.push_back(mode);
                f *= factorial(occ[static_cast<std::size_t>(mode)]);
            }
            index_lists.push_back(std::move(idx));
            normalizers.push_back(std::sqrt(f));
        }
    }
};

inline cxd sub_permanent(const MatrixXcd& u, const std::vector<int>& rows,
                         const std::vector<int>& cols) {
    const int n = static_cast<int>(rows.size());
    switch (n) {
        case 0:
            return cxd(1.0, 0.0);
        case 1:
            return u(rows[0], cols[0]);
        case 2:
            return u(rows[0], cols[0]) * u(rows[1], cols[1]) +
                   u(rows[0], cols[1]) * u(rows[1], cols[0]);
        case 3: {
            const cxd a = u(rows[0], cols[0]), b = u(rows[0], cols[1]), c = u(rows[0], cols[2]);
            const cxd d = u(rows[1], cols[0]), e = u(rows[1], cols[1]), f = u(rows[1], cols[2]);
            const cxd g = u(rows[2], cols[0]), h = u(rows[2], cols[1]), i = u(rows[2], cols[2]);
            return a * (e * i + f * h) + b * (d * i + f * g) + c * (d * h + e * g);
        }
        default: {
            MatrixXcd sub(n, n);
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s) sub(r, s) = u(rows[static_cast<std::size_t>(r)],
                                                          cols[static_cast<std::size_t>(s)]);
            return permanent(sub);
        }
    }
}

}  // namespace detail

// Lift a mode unitary to the n-photon sector.  Matrix element
// <m|lift(U)|k> = per(U[m,k]) / sqrt(prod_i m_i! prod_j k_j!), where U[m,k]
// repeats row i of U m_i times and column j k_j times.  Output follows the
// FockBasis(n, U.modes()) ordering.
inline MatrixXcd lift(const ModeUnitary& u, int photons) {
    const auto basis = make_basis(photons, u.modes());
    if (photons == 1) return u.m;  // single-photon basis order matches mode order
    const detail::SectorExpansion exp(*basis);
    const auto d = static_cast<Eigen::Index>(basis->dim());
    MatrixXcd out(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto& cols = exp.index_lists[static_cast<std::size_t>(k)];
        for (Eigen::Index m = 0; m < d; ++m) {
            const auto& rows = exp.index_lists[static_cast<std::size_t>(m)];
            out(m, k) = detail::sub_permanent(u.m, rows, cols) /
                        (exp.normalizers[static_cast<std::size_t>(m)] *
                         exp.normalizers[static_cast<std::size_t>(k)]);
        }
    }
    return out;
}

// Evolve a sector state by a mode unitary.
inline PureState apply(const ModeUnitary& u, const PureState& state) {
    if (u.modes() != state.modes())
        throw InputError("apply: unitary and state mode counts differ");
    PureState out = state;
    out.amplitudes = lift(u, state.photons()) * state.amplitudes;
    return out;
}

}  // namespace locap
