#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "locap/protocols.hpp"
#include "oracles.hpp"

using namespace locap;

namespace {

ModeUnitary random_u2(Gaussian& rng) {
    return u2_from_angles(rng.uniform() * kPi / 2.0, rng.uniform() * 2.0 * kPi,
                          rng.uniform() * 2.0 * kPi, rng.uniform() * 2.0 * kPi);
}

}  // namespace

TEST_CASE("reference protocol realizes the published coincidence map", "[protocols]") {
    const ProtocolSpec proto = canonical_protocol();
    const ChannelMatrix ch = channel_of(proto);
    auto basis = make_basis(2, 4);

    const std::vector<OccupationVector> outcomes = {
        {1, 1, 0, 0}, {0, 1, 1, 0}, {0, 0, 1, 1}, {1, 0, 0, 1}};
    for (int j = 0; j < 4; ++j) {
        const Eigen::Index target = static_cast<Eigen::Index>(basis->index_of(outcomes[j]));
        CHECK(ch.p(j, target) == Catch::Approx(1.0).margin(1e-12));
    }

    // Every outcome with support is a coincidence: at most one photon per mode.
    for (int j = 0; j < 4; ++j)
        for (Eigen::Index k = 0; k < ch.p.cols(); ++k)
            if (ch.p(j, k) > 1e-12)
                for (int occ : basis->at(static_cast<std::size_t>(k))) CHECK(occ <= 1);

    CHECK(mutual_information(Priors::uniform(4), ch) == Catch::Approx(2.0).margin(1e-12));
    CHECK(protocol_capacity(proto) == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("source circuit prepares the shared state from |1100>", "[protocols]") {
    auto basis = make_basis(2, 4);
    const PureState prepared = apply(source_unitary(), basis_state(basis, {1, 1, 0, 0}));
    const cxd overlap = inner_product(prepared, optimal_input_state());
    CHECK(std::abs(overlap - cxd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("letter family keeps its sign structure", "[protocols]") {
    Gaussian rng(555);
    for (int trial = 0; trial < 10; ++trial) {
        const ModeUnitary u_a = random_u2(rng);
        const ModeUnitary u_c = random_u2(rng);
        const auto fam = alice_family(u_a, u_c);
        REQUIRE(fam.size() == 4);
        for (const auto& u : fam) CHECK(is_unitary(u.m));
        CHECK((fam[2].m + fam[1].m).norm() < 1e-12);
        CHECK((fam[3].m + fam[0].m).norm() < 1e-12);
    }
    const auto id_fam = alice_family(identity_unitary(2), identity_unitary(2));
    CHECK((id_fam[0].m - MatrixXcd::Identity(2, 2)).norm() < 1e-12);
    CHECK((id_fam[1].m + pauli_z()).norm() < 1e-12);
    CHECK_THROWS_AS(alice_family(identity_unitary(3), identity_unitary(2)), InputError);
}

TEST_CASE("receiver circuit reduces to the bare coupler", "[protocols]") {
    const ModeUnitary plain = bob_unitary(identity_unitary(2), identity_unitary(2));
    CHECK((plain.m - four_mode_coupler_core() / std::sqrt(2.0)).norm() < 1e-14);
    CHECK(is_unitary(plain.m));
    CHECK_THROWS_AS(bob_unitary(identity_unitary(2), identity_unitary(3)), InputError);
}

TEST_CASE("equivalence family members all carry two bits", "[protocols]") {
    Gaussian rng(808);
    for (int trial = 0; trial < 25; ++trial) {
        const ProtocolSpec proto =
            optimal_family_protocol(random_u2(rng), random_u2(rng), random_u2(rng));
        const ChannelMatrix ch = channel_of(proto);
        for (Eigen::Index j = 0; j < ch.p.rows(); ++j)
            CHECK(ch.p.row(j).maxCoeff() == Catch::Approx(1.0).margin(1e-9));
        CHECK(mutual_information(Priors::uniform(4), ch) == Catch::Approx(2.0).margin(1e-6));
    }
}

TEST_CASE("mode relabeling leaves the capacity unchanged", "[protocols]") {
    // Swap Alice's two modes and Bob's two modes; all protocol pieces
    // transform covariantly and the channel stays a four-outcome permutation.
    const ProtocolSpec proto = canonical_protocol();
    MatrixXcd perm = MatrixXcd::Zero(4, 4);
    perm(0, 1) = perm(1, 0) = perm(2, 3) = perm(3, 2) = 1.0;
    MatrixXcd swap2 = MatrixXcd::Zero(2, 2);
    swap2(0, 1) = swap2(1, 0) = 1.0;

    ProtocolSpec moved = proto;
    moved.input = apply(ModeUnitary(perm), proto.input);
    for (auto& op : moved.alice_ops) op = ModeUnitary(swap2 * op.m * swap2);
    moved.bob = ModeUnitary(perm * proto.bob.m * perm.transpose());

    CHECK(protocol_capacity(moved) == Catch::Approx(2.0).margin(1e-9));

    // The shared state itself is symmetric under this relabeling.
    CHECK(std::abs(inner_product(moved.input, proto.input) - cxd(1.0, 0.0)) < 1e-12);
}

TEST_CASE("outcome relabeling leaves mutual information unchanged", "[protocols]") {
    const ChannelMatrix ch = channel_of(canonical_protocol());
    MatrixXd reversed = ch.p.rowwise().reverse();
    const ChannelMatrix flipped(std::move(reversed));
    CHECK(mutual_information(Priors::uniform(4), flipped) ==
          Catch::Approx(mutual_information(Priors::uniform(4), ch)).margin(1e-12));
}

TEST_CASE("dual-rail Bell states are orthonormal and letter-connected", "[protocols]") {
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const cxd ip = inner_product(bell_state(a), bell_state(b));
            CHECK(std::abs(ip - (a == b ? cxd(1.0, 0.0) : cxd(0.0, 0.0))) < 1e-12);
        }
    CHECK_THROWS_AS(bell_state(4), InputError);

    const auto ops = bell_letter_ops();
    REQUIRE(ops.size() == 4);
    for (int j = 0; j < 4; ++j) {
        const PureState moved = apply(embed(ops[static_cast<std::size_t>(j)], 0, 4),
                                      bell_state(0));
        CHECK(std::abs(inner_product(moved, bell_state(j))) == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("Bell protocol reaches log2(3) from any Bell input", "[protocols]") {
    const ProtocolSpec proto = bell_protocol();
    const double expected = std::log2(3.0);
    CHECK(protocol_capacity(proto) == Catch::Approx(expected).margin(1e-9));

    // The two phase letters produce identical click statistics.
    const ChannelMatrix ch = channel_of(proto);
    CHECK((ch.p.row(0) - ch.p.row(1)).lpNorm<Eigen::Infinity>() < 1e-12);

    for (int k = 1; k < 4; ++k) {
        ProtocolSpec alt = proto;
        alt.input = bell_state(k);
        CHECK(protocol_capacity(alt) == Catch::Approx(expected).margin(1e-9));
    }
}

TEST_CASE("ideal two-mode baseline reaches two bits without entanglement", "[protocols]") {
    const BaselineResult res = entanglement_free_baseline(true);
    CHECK(res.capacity_bits == Catch::Approx(2.0).margin(1e-5));
    CHECK(res.mean_photons == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(res.letter_labels.size() == 5);
    REQUIRE(res.priors.p.size() == 5);
    const double expected_priors[5] = {0.25, 0.25, 0.25, 0.0, 0.25};
    for (int j = 0; j < 5; ++j)
        CHECK(res.priors.p[j] == Catch::Approx(expected_priors[j]).margin(1e-4));

    // Click rows after the 50/50 mixer, pattern order --, -+, +-, ++.
    const MatrixXd& p = res.channel.p;
    REQUIRE(p.rows() == 5);
    REQUIRE(p.cols() == 4);
    MatrixXd expected(5, 4);
    expected << 1, 0, 0, 0,
                0, 1, 0, 0,
                0, 0, 1, 0,
                0, 0.5, 0.5, 0,
                0, 0, 0, 1;
    CHECK((p - expected).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("one-photon baseline carries exactly one bit", "[protocols]") {
    const BaselineResult res = entanglement_free_baseline(false);
    CHECK(res.capacity_bits == Catch::Approx(1.0).margin(1e-9));
    CHECK(res.mean_photons == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(res.priors.p.size() == 2);
    CHECK(res.priors.p[0] == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("product-letter baseline with perfect detectors", "[protocols]") {
    const BaselineResult res = entanglement_free_baseline(true, DetectorModel{1.0, 1.0});
    CHECK(res.capacity_bits == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(res.letter_labels.size() == 4);
    CHECK(res.mean_photons == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("joint click distribution follows the bucket law", "[protocols]") {
    VectorXd p(4);
    p << 0.1, 0.2, 0.3, 0.4;
    const DetectorModel det{0.9, 0.95};
    const MatrixXd joint = joint_click_matrix(Priors(p), det);
    REQUIRE(joint.rows() == 4);
    REQUIRE(joint.cols() == 4);
    CHECK(joint.sum() == Catch::Approx(1.0).margin(1e-12));

    // Vacuum letter: both modes dark-fire independently with rate 1 - v.
    CHECK(joint(0, 0) == Catch::Approx(0.1 * 0.95 * 0.95).margin(1e-12));
    CHECK(joint(0, 3) == Catch::Approx(0.1 * 0.05 * 0.05).margin(1e-12));
    // |01>: the occupied second mode clicks with probability s.
    CHECK(joint(1, 1) == Catch::Approx(0.2 * 0.95 * 0.9).margin(1e-12));
    CHECK(joint(1, 2) == Catch::Approx(0.2 * 0.05 * 0.1).margin(1e-12));
    // |11>: both modes click with probability s each.
    CHECK(joint(3, 3) == Catch::Approx(0.4 * 0.9 * 0.9).margin(1e-12));

    // Perfect detectors concentrate each row on its own pattern.
    const MatrixXd ideal = joint_click_matrix(Priors(p), DetectorModel{1.0, 1.0});
    const int pattern_of[4] = {0, 1, 2, 3};
    for (int j = 0; j < 4; ++j) {
        CHECK(ideal(j, pattern_of[j]) == Catch::Approx(p[j]).margin(1e-12));
        CHECK(ideal.row(j).sum() == Catch::Approx(p[j]).margin(1e-12));
    }

    VectorXd bad(3);
    bad << 0.5, 0.25, 0.25;
    CHECK_THROWS_AS(joint_click_matrix(Priors(bad), det), InputError);
}

TEST_CASE("detector study reproduces the published gap", "[protocols]") {
    const auto perfect = detector_gap_sweep({1.0}, 1.0);
    REQUIRE(perfect.size() == 1);
    CHECK(std::abs(perfect[0].gap_bits) < 1e-6);
    CHECK(perfect[0].entangled_bits == Catch::Approx(2.0).margin(1e-9));

    const auto lossy = detector_gap_sweep({0.9}, 0.9999);
    REQUIRE(lossy.size() == 1);
    CHECK(lossy[0].gap_bits == Catch::Approx(0.27).margin(0.03));
    CHECK(lossy[0].entangled_bits < 2.0);
    CHECK(lossy[0].baseline_bits < 2.0);

    CHECK_THROWS_AS(detector_gap_sweep({}, 1.0), InputError);
}

TEST_CASE("noiseless reference capacities", "[protocols]") {
    CHECK(noiseless_reference_capacity(2) == Catch::Approx(1.0).margin(1e-12));
    CHECK(noiseless_reference_capacity(6) == Catch::Approx(std::log2(6.0)).margin(1e-12));
    CHECK_THROWS_AS(noiseless_reference_capacity(1), InputError);
}
