#pragma once

// Canned protocol constructions: the four-mode two-bit scheme and its
// equivalence family, the dual-rail Bell-state scheme, entanglement-free
// baselines, and the bucket-detector comparison studies.
//
// Matrices documented in the row-substitution convention (a'_j = sum_k M_jk a_k)
// are returned verbatim by alice_family / bob_unitary; protocol assembly
// transposes them once so they compose correctly under lift().

#include <optional>
#include <string>
#include <vector>

#include "locap/channel.hpp"
#include "locap/common.hpp"
#include "locap/fock.hpp"
#include "locap/linop.hpp"
#include "locap/optimize.hpp"

namespace locap {

struct ProtocolSpec {
    PureState input;
    std::vector<ModeUnitary> alice_ops;  // stored in the evolution convention
    ModeWindow alice;
    ModeUnitary bob;                     // stored in the evolution convention
    Priors priors;
    std::string label;
};

inline ChannelMatrix channel_of(const ProtocolSpec& proto,
                                std::optional<DetectorModel> det = std::nullopt) {
    return conditional_matrix(proto.input, proto.alice_ops, proto.alice, proto.bob, det);
}

inline double protocol_capacity(const ProtocolSpec& proto,
                                std::optional<DetectorModel> det = std::nullopt,
                                const BAOptions& ba = {}) {
    return blahut_arimoto(channel_of(proto, det), ba).capacity_bits;
}

// ---------------------------------------------------------------------------
// Small fixed matrices

inline MatrixXcd pauli_z() {
    MatrixXcd z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

// Pairwise 50/50 coupler of modes (0,2) and (1,3); unitary after the 1/sqrt(2).
inline MatrixXcd four_mode_coupler_core() {
    MatrixXcd q(4, 4);
    q << 1, 0, -1, 0,
         0, 1, 0, -1,
         1, 0, 1, 0,
         0, 1, 0, 1;
    return q;
}

// ---------------------------------------------------------------------------
// Four-mode two-bit protocol

// (|1,1,0,0> + |0,1,1,0> + |1,0,0,1> + |0,0,1,1>) / 2
inline PureState optimal_input_state() {
    auto basis = make_basis(2, 4);
    return make_state(basis, {{{1, 1, 0, 0}, 0.5},
                              {{0, 1, 1, 0}, 0.5},
                              {{1, 0, 0, 1}, 0.5},
                              {{0, 0, 1, 1}, 0.5}});
}

// Alice's four letters, written in the row-substitution convention:
// [U_A^{-1} U_C, -U_A^{-1} s_z U_C, +U_A^{-1} s_z U_C, -U_A^{-1} U_C].
// The fourth letter must invert the first; the literal product U_2 U_3 only
// does so when U_A = U_C, so the general family uses -U_1 directly.
inline std::vector<ModeUnitary> alice_family(const ModeUnitary& u_a, const ModeUnitary& u_c) {
    if (u_a.modes() != 2 || u_c.modes() != 2)
        throw InputError("alice_family: expected 2x2 unitaries");
    const MatrixXcd ainv = u_a.m.adjoint();
    const MatrixXcd u1 = ainv * u_c.m;
    const MatrixXcd u2 = -(ainv * pauli_z() * u_c.m);
    return {ModeUnitary(u1), ModeUnitary(u2), ModeUnitary(-u2), ModeUnitary(-u1)};
}

// Bob's four-mode matrix in the row-substitution convention:
// (1/sqrt(2)) blockdiag(U_C^{-1}, U_B^{-1}) [[1,0,-1,0],[0,1,0,-1],[1,0,1,0],[0,1,0,1]].
inline ModeUnitary bob_unitary(const ModeUnitary& u_b, const ModeUnitary& u_c) {
    if (u_b.modes() != 2 || u_c.modes() != 2)
        throw InputError("bob_unitary: expected 2x2 unitaries");
    MatrixXcd block = MatrixXcd::Zero(4, 4);
    block.topLeftCorner(2, 2) = u_c.m.adjoint();
    block.bottomRightCorner(2, 2) = u_b.m.adjoint();
    return ModeUnitary((block * four_mode_coupler_core()) / std::sqrt(2.0));
}

// The two-splitter source circuit: lift of this matrix maps |1,1,0,0> to the
// optimal input state.
inline ModeUnitary source_unitary() {
    return ModeUnitary(four_mode_coupler_core() / std::sqrt(2.0));
}

// Phase-shifter letters ordered so the outcomes follow the coincidence map
// (1,2), (2,3), (3,4), (1,4): [I, -s_z, -I, +s_z] on Alice's two modes.
inline ProtocolSpec canonical_protocol() {
    const MatrixXcd i2 = MatrixXcd::Identity(2, 2);
    std::vector<ModeUnitary> ops = {ModeUnitary(i2), ModeUnitary(-pauli_z()), ModeUnitary(-i2),
                                    ModeUnitary(pauli_z())};
    return ProtocolSpec{optimal_input_state(),
                        ops,
                        ModeWindow{0, 2},
                        bob_unitary(identity_unitary(2), identity_unitary(2)).transposed(),
                        Priors::uniform(4),
                        "four-mode two-bit protocol"};
}

// Equivalence family member for arbitrary 2x2 unitaries (U_A, U_B, U_C): the
// source state, Alice's letters, and Bob's circuit transform together so the
// induced channel stays a four-outcome permutation.
inline ProtocolSpec optimal_family_protocol(const ModeUnitary& u_a, const ModeUnitary& u_b,
                                            const ModeUnitary& u_c) {
    if (u_a.modes() != 2 || u_b.modes() != 2 || u_c.modes() != 2)
        throw InputError("optimal_family_protocol: expected 2x2 unitaries");
    MatrixXcd block = MatrixXcd::Zero(4, 4);
    block.topLeftCorner(2, 2) = u_a.m;
    block.bottomRightCorner(2, 2) = u_b.m;
    const ModeUnitary joined(block);
    PureState input = apply(joined.transposed(), optimal_input_state());

    std::vector<ModeUnitary> ops;
    for (const ModeUnitary& u : alice_family(u_a, u_c)) ops.push_back(u.transposed());

    return ProtocolSpec{std::move(input),
                        std::move(ops),
                        ModeWindow{0, 2},
                        bob_unitary(u_b, u_c).transposed(),
                        Priors::uniform(4),
                        "four-mode equivalence family member"};
}

// ---------------------------------------------------------------------------
// Bell-state dense coding (dual rail: logical 0 = |0,1>, logical 1 = |1,0>;
// Alice holds modes 0,1 and Bob modes 2,3)

// k = 0..3: (|0101>+|1010>)/sqrt2, (|0101>-|1010>)/sqrt2,
//           (|0110>+|1001>)/sqrt2, (|0110>-|1001>)/sqrt2
inline PureState bell_state(int k) {
    if (k < 0 || k > 3) throw InputError("bell_state: index must be 0..3");
    auto basis = make_basis(2, 4);
    const double r = 1.0 / std::sqrt(2.0);
    switch (k) {
        case 0: return make_state(basis, {{{0, 1, 0, 1}, r}, {{1, 0, 1, 0}, r}});
        case 1: return make_state(basis, {{{0, 1, 0, 1}, r}, {{1, 0, 1, 0}, -r}});
        case 2: return make_state(basis, {{{0, 1, 1, 0}, r}, {{1, 0, 0, 1}, r}});
        default: return make_state(basis, {{{0, 1, 1, 0}, r}, {{1, 0, 0, 1}, -r}});
    }
}

// Dual-rail forms of the dense-coding letters {I, Z, X, XZ} on Alice's modes.
inline std::vector<ModeUnitary> bell_letter_ops() {
    MatrixXcd z(2, 2), x(2, 2), xz(2, 2);
    z << -1, 0, 0, 1;
    x << 0, 1, 1, 0;
    xz << 0, -1, 1, 0;
    return {identity_unitary(2), ModeUnitary(z), ModeUnitary(x), ModeUnitary(xz)};
}

// Fixed Bell input, dense-coding letters, and the pairwise recombiner on
// Bob's side.  The induced channel has three distinguishable classes (the two
// phase letters collide), so its capacity is log2(3).
inline ProtocolSpec bell_protocol() {
    ProtocolSpec proto{bell_state(0),
                       bell_letter_ops(),
                       ModeWindow{0, 2},
                       source_unitary().transposed(),
                       Priors::uniform(4),
                       "dual-rail Bell protocol"};
    proto.priors = blahut_arimoto(channel_of(proto)).priors;
    return proto;
}

// ---------------------------------------------------------------------------
// Entanglement-free two-mode baselines

struct BaselineResult {
    double capacity_bits = 0.0;
    Priors priors;
    ChannelMatrix channel;
    std::vector<std::string> letter_labels;
    double mean_photons = 0.0;
};

namespace detail {

// Click-pattern rows for letters that may live in different photon-number
// sectors; each letter is pushed through `mixer` (when given) and then the
// per-mode bucket detectors.
inline MatrixXd letter_click_rows(const std::vector<PureState>& letters,
                                  const std::optional<ModeUnitary>& mixer,
                                  const DetectorModel& det, int modes) {
    MatrixXd rows(static_cast<Eigen::Index>(letters.size()),
                  static_cast<Eigen::Index>(1u << modes));
    for (std::size_t j = 0; j < letters.size(); ++j) {
        PureState out = mixer ? apply(*mixer, letters[j]) : letters[j];
        rows.row(static_cast<Eigen::Index>(j)) = click_pattern_distribution(out, det).transpose();
    }
    return rows;
}

}  // namespace detail

// Best two-mode scheme without entanglement, one mean photon per use.
// Ideal detectors: five letters spanning photon sectors 0..2, mixed on a
// 50/50 splitter before the detectors.  Lossy detectors: the four product
// letters sent straight into the detectors.  vacuum_allowed=false restricts
// to the one-photon letters (yielding exactly 1 bit in the ideal case).
inline BaselineResult entanglement_free_baseline(
    bool vacuum_allowed, std::optional<DetectorModel> det = std::nullopt) {
    auto b0 = make_basis(0, 2);
    auto b1 = make_basis(1, 2);
    auto b2 = make_basis(2, 2);
    const double r = 1.0 / std::sqrt(2.0);

    std::vector<PureState> letters;
    std::vector<std::string> labels;
    VectorXd weights;  // photons carried by each letter
    std::optional<ModeUnitary> mixer;
    DetectorModel bucket = det.value_or(DetectorModel{1.0, 1.0});

    if (!det) {
        mixer = u2_from_angles(kPi / 4.0, 0.0, 0.0, 0.0);
        if (vacuum_allowed) {
            letters = {basis_state(b0, {0, 0}),
                       make_state(b1, {{{0, 1}, r}, {{1, 0}, r}}),
                       make_state(b1, {{{0, 1}, r}, {{1, 0}, -r}}),
                       make_state(b2, {{{1, 1}, 1.0}}),
                       make_state(b2, {{{2, 0}, r}, {{0, 2}, -r}})};
            labels = {"00", "(01+10)/sqrt2", "(01-10)/sqrt2", "11", "(20-02)/sqrt2"};
            weights = (VectorXd(5) << 0, 1, 1, 2, 2).finished();
        } else {
            letters = {make_state(b1, {{{0, 1}, r}, {{1, 0}, r}}),
                       make_state(b1, {{{0, 1}, r}, {{1, 0}, -r}})};
            labels = {"(01+10)/sqrt2", "(01-10)/sqrt2"};
            weights = (VectorXd(2) << 1, 1).finished();
        }
    } else {
        if (vacuum_allowed) {
            letters = {basis_state(b0, {0, 0}), make_state(b1, {{{0, 1}, 1.0}}),
                       make_state(b1, {{{1, 0}, 1.0}}), make_state(b2, {{{1, 1}, 1.0}})};
            labels = {"00", "01", "10", "11"};
            weights = (VectorXd(4) << 0, 1, 1, 2).finished();
        } else {
            letters = {make_state(b1, {{{0, 1}, 1.0}}), make_state(b1, {{{1, 0}, 1.0}})};
            labels = {"01", "10"};
            weights = (VectorXd(2) << 1, 1).finished();
        }
    }

    ChannelMatrix channel(detail::letter_click_rows(letters, mixer, bucket, 2),
                          pattern_labels(2));
    BAOptions opts;
    opts.constraint_weights = weights;
    opts.constraint_target = 1.0;
    const BAResult ba = blahut_arimoto(channel, opts);

    BaselineResult out;
    out.capacity_bits = ba.capacity_bits;
    out.priors = ba.priors;
    out.channel = std::move(channel);
    out.letter_labels = std::move(labels);
    out.mean_photons = weights.dot(ba.priors.p);
    return out;
}

// Joint distribution p(letter, click pattern) for the four two-mode product
// letters |00>, |01>, |10>, |11> under bucket detection: row j is
// priors[j] times the click-pattern row of letter j.
inline MatrixXd joint_click_matrix(const Priors& priors, const DetectorModel& det) {
    if (priors.p.size() != 4) throw InputError("joint_click_matrix: need 4 letter priors");
    auto b0 = make_basis(0, 2);
    auto b1 = make_basis(1, 2);
    auto b2 = make_basis(2, 2);
    const std::vector<PureState> letters = {basis_state(b0, {0, 0}),
                                            make_state(b1, {{{0, 1}, 1.0}}),
                                            make_state(b1, {{{1, 0}, 1.0}}),
                                            make_state(b2, {{{1, 1}, 1.0}})};
    MatrixXd rows = detail::letter_click_rows(letters, std::nullopt, det, 2);
    return priors.p.asDiagonal() * rows;
}

// ---------------------------------------------------------------------------
// Detector-efficiency comparison

struct DetectorGapPoint {
    double s = 0.0;
    double v = 0.0;
    double entangled_bits = 0.0;
    double baseline_bits = 0.0;
    double gap_bits = 0.0;
};

// Capacity of the four-mode protocol versus the entanglement-free baseline as
// the single-photon click efficiency s varies at fixed vacuum fidelity v.
// Every letter of the four-mode protocol carries one photon on Alice's modes,
// so its photon constraint holds for any priors and plain Blahut-Arimoto
// applies.
inline std::vector<DetectorGapPoint> detector_gap_sweep(const std::vector<double>& s_values,
                                                        double v) {
    if (s_values.empty()) throw InputError("detector_gap_sweep: no efficiency values");
    const ProtocolSpec proto = canonical_protocol();
    std::vector<DetectorGapPoint> out;
    for (double s : s_values) {
        const DetectorModel det{s, v};
        const double c_ent = blahut_arimoto(channel_of(proto, det)).capacity_bits;
        const double c_base = entanglement_free_baseline(true, det).capacity_bits;
        out.push_back({s, v, c_ent, c_base, c_ent - c_base});
    }
    return out;
}

// Entanglement-free reference using `letters` perfectly distinguishable
// states (the six-state single-photon scheme for letters = 6).
inline double noiseless_reference_capacity(int letters) {
    if (letters < 2) throw InputError("noiseless_reference_capacity: need at least 2 letters");
    ChannelMatrix channel(MatrixXd::Identity(letters, letters));
    return blahut_arimoto(channel).capacity_bits;
}

}  // namespace locap
