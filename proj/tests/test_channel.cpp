#include <catch2/catch_amalgamated.hpp>

#include "locap/channel.hpp"
#include "locap/protocols.hpp"
#include "oracles.hpp"

using namespace locap;

namespace {

ChannelMatrix binary_symmetric(double flip) {
    MatrixXd p(2, 2);
    p << 1 - flip, flip, flip, 1 - flip;
    return ChannelMatrix(p);
}

}  // namespace

TEST_CASE("priors validation", "[channel]") {
    CHECK_THROWS_AS(Priors(VectorXd::Zero(0)), InputError);
    VectorXd bad(2);
    bad << 0.7, 0.7;
    CHECK_THROWS_AS(Priors(bad), InputError);
    bad << -0.1, 1.1;
    CHECK_THROWS_AS(Priors(bad), InputError);
    const Priors u = Priors::uniform(5);
    CHECK(u.p.size() == 5);
    CHECK(u.p[3] == Catch::Approx(0.2));
}

TEST_CASE("channel matrix validation", "[channel]") {
    MatrixXd p(2, 2);
    p << 0.5, 0.4, 0.5, 0.5;  // first row sums to 0.9
    CHECK_THROWS_AS(ChannelMatrix(p), InputError);
    p << 1.1, -0.1, 0.5, 0.5;
    CHECK_THROWS_AS(ChannelMatrix(p), InputError);
    p << 0.5, 0.5, 0.25, 0.75;
    CHECK_NOTHROW(ChannelMatrix(p));
    CHECK_THROWS_AS(ChannelMatrix(p, {"only-one-label"}), InputError);
}

TEST_CASE("detector model validation and click law", "[channel]") {
    CHECK_THROWS_AS(DetectorModel(-0.1, 1.0), InputError);
    CHECK_THROWS_AS(DetectorModel(0.5, 1.5), InputError);
    const DetectorModel det{0.8, 0.99};
    CHECK(det.click_probability(0) == Catch::Approx(0.01));
    CHECK(det.click_probability(1) == Catch::Approx(0.8));
    // independent absorption per photon
    CHECK(det.click_probability(2) == Catch::Approx(1.0 - 0.2 * 0.2));
    CHECK(det.click_probability(3) == Catch::Approx(1.0 - 0.2 * 0.2 * 0.2));
}

TEST_CASE("single-detector posteriors", "[channel]") {
    const DetectorModel det{0.9, 0.9999};
    CHECK(vacuum_posterior(det) == Catch::Approx(0.9999 / (1.0 - 0.9 + 0.9999)).epsilon(1e-12));
    CHECK(photon_posterior(det) == Catch::Approx(0.9 / (1.0 + 0.9 - 0.9999)).epsilon(1e-12));
    // two-decimal and four-decimal reference points
    CHECK(std::abs(vacuum_posterior(det) - 0.91) < 5e-3);
    CHECK(std::abs(photon_posterior(det) - 0.9999) < 5e-5);
    const DetectorModel perfect{1.0, 1.0};
    CHECK(vacuum_posterior(perfect) == 1.0);
    CHECK(photon_posterior(perfect) == 1.0);
    CHECK_THROWS_AS(vacuum_posterior(DetectorModel(1.0, 0.0)), NumericError);
}

TEST_CASE("click pattern labels", "[channel]") {
    CHECK(pattern_label(0, 4) == "----");
    CHECK(pattern_label(9, 4) == "+--+");
    CHECK(pattern_label(15, 4) == "++++");
    const auto labels = pattern_labels(2);
    REQUIRE(labels.size() == 4);
    CHECK(labels[0] == "--");
    CHECK(labels[1] == "-+");
    CHECK(labels[2] == "+-");
    CHECK(labels[3] == "++");
}

TEST_CASE("click pattern distribution closed forms", "[channel]") {
    auto basis = make_basis(2, 2);
    const DetectorModel det{0.9, 0.99};

    // |1,1>: each mode clicks independently with probability s
    VectorXd probs = VectorXd::Zero(static_cast<Eigen::Index>(basis->dim()));
    probs[static_cast<Eigen::Index>(basis->index_of({1, 1}))] = 1.0;
    VectorXd out = click_pattern_distribution(probs, *basis, det);
    CHECK(out[0] == Catch::Approx(0.1 * 0.1));
    CHECK(out[1] == Catch::Approx(0.1 * 0.9));
    CHECK(out[2] == Catch::Approx(0.9 * 0.1));
    CHECK(out[3] == Catch::Approx(0.9 * 0.9));
    CHECK(out.sum() == Catch::Approx(1.0).margin(1e-12));

    // |2,0>: bunched pair clicks with 1-(1-s)^2, empty mode dark-counts with 1-v
    probs.setZero();
    probs[static_cast<Eigen::Index>(basis->index_of({2, 0}))] = 1.0;
    out = click_pattern_distribution(probs, *basis, det);
    const double club = 1.0 - 0.1 * 0.1;
    CHECK(out[0] == Catch::Approx((1.0 - club) * 0.99));
    CHECK(out[1] == Catch::Approx((1.0 - club) * 0.01));
    CHECK(out[2] == Catch::Approx(club * 0.99));
    CHECK(out[3] == Catch::Approx(club * 0.01));

    // perfect detectors on |1,1,0,0> give the ++-- pattern with certainty
    auto basis4 = make_basis(2, 4);
    const PureState s1100 = basis_state(basis4, {1, 1, 0, 0});
    const VectorXd ideal = click_pattern_distribution(s1100, DetectorModel{1.0, 1.0});
    CHECK(ideal[0b1100] == Catch::Approx(1.0));
    CHECK(ideal.sum() == Catch::Approx(1.0));
}

TEST_CASE("mutual information closed forms", "[channel]") {
    // noiseless n-ary channel carries log2(n) bits
    ChannelMatrix ident(MatrixXd::Identity(3, 3));
    CHECK(mutual_information(Priors::uniform(3), ident) == Catch::Approx(std::log2(3.0)));

    // binary symmetric channel at uniform priors: 1 - H2(flip)
    const double flip = 0.11;
    CHECK(mutual_information(Priors::uniform(2), binary_symmetric(flip)) ==
          Catch::Approx(1.0 - oracles::binary_entropy(flip)).epsilon(1e-12));

    CHECK_THROWS_AS(mutual_information(Priors::uniform(3), binary_symmetric(0.1)), InputError);
}

TEST_CASE("unconstrained capacity iteration", "[channel]") {
    // BSC capacity equals 1 - H2(flip) with uniform optimal priors
    const double flip = 0.11;
    const BAResult res = blahut_arimoto(binary_symmetric(flip));
    CHECK(res.converged);
    CHECK(res.capacity_bits == Catch::Approx(1.0 - oracles::binary_entropy(flip)).epsilon(1e-10));
    CHECK(res.priors.p[0] == Catch::Approx(0.5).margin(1e-9));

    // Z-channel 0.3 reference: C = log2(1 + (1-f) f^{f/(1-f)})
    MatrixXd z(2, 2);
    z << 1.0, 0.0, 0.3, 0.7;
    const double f = 0.3;
    const double expect = std::log2(1.0 + (1.0 - f) * std::pow(f, f / (1.0 - f)));
    const BAResult zres = blahut_arimoto(ChannelMatrix(z));
    CHECK(zres.capacity_bits == Catch::Approx(expect).epsilon(1e-10));

    BAOptions bad;
    bad.max_iterations = 0;
    CHECK_THROWS_AS(blahut_arimoto(binary_symmetric(0.2), bad), InputError);
}

TEST_CASE("capacity estimate is monotone in the iteration cap", "[channel][property]") {
    MatrixXd p(3, 3);
    p << 0.7, 0.2, 0.1, 0.15, 0.7, 0.15, 0.05, 0.25, 0.7;
    const ChannelMatrix ch(p);
    double prev = -1.0;
    for (int cap = 1; cap <= 40; ++cap) {
        BAOptions opts;
        opts.max_iterations = cap;
        opts.tolerance = 0.0;
        const double bits = blahut_arimoto(ch, opts).capacity_bits;
        CHECK(bits >= prev - 1e-12);
        prev = bits;
    }
}

TEST_CASE("constrained capacity reproduces the vacuum-assisted optimum", "[channel]") {
    // five ideal two-mode letters with photon costs (0,1,1,2,2) and unit budget
    const BaselineResult base = entanglement_free_baseline(true);
    CHECK(base.capacity_bits == Catch::Approx(2.0).margin(1e-6));
    REQUIRE(base.priors.p.size() == 5);
    CHECK(base.priors.p[0] == Catch::Approx(0.25).margin(1e-5));
    CHECK(base.priors.p[1] == Catch::Approx(0.25).margin(1e-5));
    CHECK(base.priors.p[2] == Catch::Approx(0.25).margin(1e-5));
    CHECK(base.priors.p[3] == Catch::Approx(0.0).margin(1e-5));
    CHECK(base.priors.p[4] == Catch::Approx(0.25).margin(1e-5));
    CHECK(base.mean_photons == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("constrained capacity rejects unreachable budgets", "[channel]") {
    MatrixXd p = MatrixXd::Identity(3, 3);
    BAOptions opts;
    VectorXd w(3);
    w << 0.0, 1.0, 2.0;
    opts.constraint_weights = w;
    opts.constraint_target = 2.5;  // above the largest cost
    CHECK_THROWS_AS(blahut_arimoto(ChannelMatrix(p), opts), InputError);
    VectorXd w2(2);
    w2 << 0.0, 1.0;
    opts.constraint_weights = w2;
    opts.constraint_target = 0.5;
    CHECK_THROWS_AS(blahut_arimoto(ChannelMatrix(p), opts), InputError);
}

TEST_CASE("constrained capacity with equal costs is the plain capacity", "[channel]") {
    const ChannelMatrix ch = binary_symmetric(0.11);
    BAOptions opts;
    opts.constraint_weights = VectorXd::Constant(2, 1.0);
    opts.constraint_target = 1.0;
    const BAResult res = blahut_arimoto(ch, opts);
    CHECK(res.capacity_bits ==
          Catch::Approx(1.0 - oracles::binary_entropy(0.11)).epsilon(1e-9));
}

TEST_CASE("perfect-detector composition keeps capacity", "[channel]") {
    // every outcome of the two-bit protocol has at most one photon per mode,
    // so s=v=1 bucket detection is a relabeling
    const ProtocolSpec proto = canonical_protocol();
    const ChannelMatrix fock = channel_of(proto);
    const ChannelMatrix clicked =
        compose_with_detector(fock, *proto.input.basis, DetectorModel{1.0, 1.0});
    CHECK(mutual_information(proto.priors, clicked) ==
          Catch::Approx(mutual_information(proto.priors, fock)).margin(1e-12));
    CHECK(blahut_arimoto(clicked).capacity_bits == Catch::Approx(2.0).margin(1e-9));
}

TEST_CASE("conditional matrix validation", "[channel]") {
    const ProtocolSpec proto = canonical_protocol();
    const ModeWindow bad_window{3, 2};
    CHECK_THROWS_AS(
        conditional_matrix(proto.input, proto.alice_ops, bad_window, proto.bob),
        InputError);
    CHECK_THROWS_AS(conditional_matrix(proto.input, {}, proto.alice, proto.bob), InputError);
    CHECK_THROWS_AS(
        conditional_matrix(proto.input, proto.alice_ops, proto.alice, identity_unitary(3)),
        InputError);
    PureState unnorm = proto.input;
    unnorm.amplitudes *= 0.5;
    CHECK_THROWS_AS(conditional_matrix(unnorm, proto.alice_ops, proto.alice, proto.bob),
                    InputError);
    // Alice op size must match her window
    std::vector<ModeUnitary> tall = {identity_unitary(3)};
    CHECK_THROWS_AS(conditional_matrix(proto.input, tall, proto.alice, proto.bob), InputError);
}

TEST_CASE("channel rows stay stochastic under detector composition", "[channel][property]") {
    Gaussian rng(57);
    auto basis = make_basis(2, 4);
    for (int rep = 0; rep < 20; ++rep) {
        VectorXd h(16);
        for (int k = 0; k < 16; ++k) h[k] = rng();
        const ModeUnitary u = unitary_from_params(h, 4);
        VectorXcd amp(static_cast<Eigen::Index>(basis->dim()));
        for (Eigen::Index k = 0; k < amp.size(); ++k) amp[k] = cxd(rng(), rng());
        const PureState input = normalize(PureState{basis, amp});
        const ChannelMatrix ch = conditional_matrix(
            input, {identity_unitary(2), ModeUnitary(pauli_z())}, ModeWindow{0, 2}, u,
            DetectorModel{0.37 + 0.6 * rng.uniform(), 0.9 + 0.1 * rng.uniform()});
        for (Eigen::Index j = 0; j < ch.p.rows(); ++j)
            CHECK(ch.p.row(j).sum() == Catch::Approx(1.0).margin(1e-9));
        CHECK(ch.p.minCoeff() >= 0.0);
    }
}
