#pragma once

// Self-check battery: golden values and structural properties evaluated at
// runtime, reported as a named table (human-readable or JSON).  The fast set
// completes in seconds; the stretch set adds the six- and eight-mode studies
// and runs for hours.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "locap/channel.hpp"
#include "locap/common.hpp"
#include "locap/fock.hpp"
#include "locap/linop.hpp"
#include "locap/optimize.hpp"
#include "locap/protocols.hpp"
#include "locap/serialize.hpp"

namespace locap {

struct VerifyCheck {
    std::string name;
    double expected = 0.0;
    double actual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;
    double seconds = 0.0;
};

// Replaceable primitives so a corrupted implementation is caught by name.
struct VerifyHooks {
    std::function<MatrixXcd(const ModeUnitary&, int)> lift_fn =
        [](const ModeUnitary& u, int n) { return lift(u, n); };
    std::function<cxd(const MatrixXcd&)> permanent_fn =
        [](const MatrixXcd& m) { return permanent(m); };
};

struct VerifyOptions {
    std::uint64_t seed = 12345;
    bool stretch = false;
    int stretch_restarts = 24;
};

namespace detail {

inline void add_check(VerifyReport& rep, const std::string& name, double expected, double actual,
                      double tol, const std::string& detail = "") {
    VerifyCheck c{name, expected, actual, tol, std::abs(expected - actual) <= tol, detail};
    rep.all_pass = rep.all_pass && c.pass;
    rep.checks.push_back(std::move(c));
}

inline ModeUnitary random_u2(Gaussian& rng) {
    return u2_from_angles(rng.uniform() * kPi / 2.0, rng.uniform() * 2.0 * kPi,
                          rng.uniform() * 2.0 * kPi, rng.uniform() * 2.0 * kPi);
}

inline ModeUnitary random_unitary(int n, Gaussian& rng) {
    VectorXd h(n * n);
    for (int k = 0; k < n * n; ++k) h[k] = rng();
    return unitary_from_params(h, n);
}

}  // namespace detail

inline VerifyReport run_verify_checks(const VerifyOptions& opt = {},
                                      const VerifyHooks& hooks = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    VerifyReport rep;
    Gaussian rng(opt.seed);

    // Four-mode protocol: permutation channel, exact two-bit capacity, and the
    // published outcome assignment.
    {
        const ProtocolSpec proto = canonical_protocol();
        const ChannelMatrix ch = channel_of(proto);
        double max_dev = 0.0;
        for (Eigen::Index r = 0; r < ch.p.rows(); ++r)
            for (Eigen::Index c = 0; c < ch.p.cols(); ++c)
                max_dev = std::max(max_dev, std::abs(ch.p(r, c) - std::round(ch.p(r, c))));
        detail::add_check(rep, "canonical-rows-are-permutation", 0.0, max_dev, 1e-12,
                          "max deviation of any channel entry from {0,1}");
        detail::add_check(rep, "canonical-capacity", 2.0, blahut_arimoto(ch).capacity_bits, 1e-9);

        const std::vector<std::string> want = {"1100", "0110", "0011", "1001"};
        int mapped = 0;
        for (int j = 0; j < 4; ++j) {
            Eigen::Index arg = 0;
            ch.p.row(j).maxCoeff(&arg);
            if (ch.outcome_labels[static_cast<std::size_t>(arg)] == want[static_cast<std::size_t>(j)])
                ++mapped;
        }
        detail::add_check(rep, "canonical-outcome-map", 4.0, mapped, 0.0,
                          "letters land on 1100, 0110, 0011, 1001 in order");
    }

    // Equivalence family: random dressing unitaries leave the capacity at 2.
    {
        double worst = 2.0;
        for (int k = 0; k < 100; ++k) {
            const ProtocolSpec proto = optimal_family_protocol(
                detail::random_u2(rng), detail::random_u2(rng), detail::random_u2(rng));
            worst = std::min(worst, blahut_arimoto(channel_of(proto)).capacity_bits);
        }
        detail::add_check(rep, "equivalence-family-capacity", 2.0, worst, 1e-6,
                          "minimum over 100 random family members");
    }

    // Bell protocol: three distinguishable classes.
    detail::add_check(rep, "bell-protocol-capacity", std::log2(3.0),
                      protocol_capacity(bell_protocol()), 1e-9);

    // Entanglement-free baselines.
    {
        const BaselineResult ideal = entanglement_free_baseline(true);
        detail::add_check(rep, "baseline-capacity", 2.0, ideal.capacity_bits, 1e-6);
        const VectorXd want = (VectorXd(5) << 0.25, 0.25, 0.25, 0.0, 0.25).finished();
        detail::add_check(rep, "baseline-priors", 0.0, (ideal.priors.p - want).cwiseAbs().maxCoeff(),
                          1e-6, "deviation from (0.25, 0.25, 0.25, 0, 0.25)");
        detail::add_check(rep, "baseline-no-vacuum-capacity", 1.0,
                          entanglement_free_baseline(false).capacity_bits, 1e-9);
    }

    // Bucket-detector posteriors at the reference operating point.
    {
        const DetectorModel det{0.9, 0.9999};
        detail::add_check(rep, "vacuum-posterior", 0.91, vacuum_posterior(det), 5e-3,
                          "v/(1-s+v) at s=0.9, v=0.9999");
        detail::add_check(rep, "photon-posterior", 0.9999, photon_posterior(det), 5e-5,
                          "s/(1+s-v) at s=0.9, v=0.9999");
    }

    // Joint click matrix: normalization and the closed-form first row.
    {
        const DetectorModel det{0.9, 0.9999};
        VectorXd p(4);
        p << 0.1, 0.2, 0.3, 0.4;
        const MatrixXd joint = joint_click_matrix(Priors(p), det);
        detail::add_check(rep, "joint-matrix-total", 1.0, joint.sum(), 1e-12);
        const double v = det.v;
        VectorXd row1(4);
        row1 << v * v, v * (1 - v), (1 - v) * v, (1 - v) * (1 - v);
        row1 *= p[0];
        detail::add_check(rep, "joint-matrix-vacuum-row", 0.0,
                          (joint.row(0).transpose() - row1).cwiseAbs().maxCoeff(), 1e-12,
                          "first row equals p1*(v^2, v(1-v), v(1-v), (1-v)^2)");
    }

    // Capacity gap between the four-mode protocol and the baseline. The
    // s=1 point uses v=1 as well: with any dark-count rate the baseline
    // keeps a small residual loss, so the gap closes only in the limit of
    // perfect detectors.
    {
        const auto pts = detector_gap_sweep({0.9}, 0.9999);
        detail::add_check(rep, "detector-gap-s0.9", 0.27, pts[0].gap_bits, 0.03);
        const auto perfect = detector_gap_sweep({1.0}, 1.0);
        detail::add_check(rep, "detector-gap-s1.0", 0.0, perfect[0].gap_bits, 1e-3);
    }

    // Lift structure: unitarity and multiplicativity on random draws.
    {
        double worst_unitary = 0.0, worst_product = 0.0;
        for (int k = 0; k < 20; ++k) {
            const ModeUnitary a = detail::random_unitary(4, rng);
            const ModeUnitary b = detail::random_unitary(4, rng);
            const MatrixXcd la = hooks.lift_fn(a, 2);
            const MatrixXcd lb = hooks.lift_fn(b, 2);
            const MatrixXcd lab = hooks.lift_fn(ModeUnitary(a.m * b.m), 2);
            worst_unitary = std::max(
                worst_unitary,
                (la * la.adjoint() - MatrixXcd::Identity(la.rows(), la.cols())).cwiseAbs().maxCoeff());
            worst_product = std::max(worst_product, (lab - la * lb).cwiseAbs().maxCoeff());
        }
        detail::add_check(rep, "lift-unitarity", 0.0, worst_unitary, 1e-9,
                          "max |L L^dag - I| over 20 random mode unitaries");
        detail::add_check(rep, "lift-homomorphism", 0.0, worst_product, 1e-9,
                          "max |L(AB) - L(A)L(B)| over 20 random pairs");
    }

    // Permanent: fast implementation versus direct permutation sum.
    {
        double worst = 0.0;
        for (int n = 1; n <= 4; ++n) {
            MatrixXcd m(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) m(r, c) = cxd(rng(), rng());
            // permutation-sum evaluation (n <= 4 so this is cheap)
            std::vector<int> perm(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
            cxd direct = 0.0;
            do {
                cxd term = 1.0;
                for (int r = 0; r < n; ++r) term *= m(r, perm[static_cast<std::size_t>(r)]);
                direct += term;
            } while (std::next_permutation(perm.begin(), perm.end()));
            worst = std::max(worst, std::abs(hooks.permanent_fn(m) - direct));
        }
        detail::add_check(rep, "permanent-cross-check", 0.0, worst, 1e-12,
                          "Ryser result vs permutation sum, sizes 1..4");
    }

    // Channel rows stay normalized for a random protocol variant.
    {
        const ProtocolSpec proto = optimal_family_protocol(
            detail::random_u2(rng), detail::random_u2(rng), detail::random_u2(rng));
        const ChannelMatrix ch = channel_of(proto, DetectorModel{0.7, 0.99});
        double worst = 0.0;
        for (Eigen::Index r = 0; r < ch.p.rows(); ++r)
            worst = std::max(worst, std::abs(ch.p.row(r).sum() - 1.0));
        detail::add_check(rep, "channel-rows-stochastic", 0.0, worst, 1e-9);
    }

    // Blahut-Arimoto capacity estimates grow monotonically with iterations.
    {
        MatrixXd p(3, 4);
        p << 0.5, 0.3, 0.1, 0.1, 0.05, 0.6, 0.3, 0.05, 0.25, 0.25, 0.25, 0.25;
        const ChannelMatrix ch{p};
        double prev = -1.0, worst_drop = 0.0;
        for (int cap = 1; cap <= 30; ++cap) {
            BAOptions o;
            o.tolerance = 0.0;
            o.max_iterations = cap;
            const double bits = blahut_arimoto(ch, o).capacity_bits;
            if (prev >= 0.0) worst_drop = std::max(worst_drop, prev - bits);
            prev = bits;
        }
        detail::add_check(rep, "ba-monotone-iterations", 0.0, worst_drop, 1e-12,
                          "largest per-iteration decrease of the capacity estimate");
    }

    // Finite differences agree with a 4-point stencil on the live objective.
    {
        ProblemSpec spec;
        spec.fixed_input = bell_state(0);
        spec.priors_mode = PriorsMode::FixedUniform;
        const detail::ParamLayout lay = detail::make_layout(spec);
        Gaussian g2(opt.seed + 17);
        const VectorXd x = detail::random_parameters(lay, g2);
        auto f = [&](const VectorXd& xx) { return evaluate_parameters(spec, xx).capacity_bits; };
        const VectorXd grad = finite_diff_gradient(f, x, 1e-6);
        const double h = 1e-3;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(x.size(), 6); ++i) {
            VectorXd xp = x;
            auto at = [&](double d) {
                xp[i] = x[i] + d;
                const double val = f(xp);
                xp[i] = x[i];
                return val;
            };
            const double stencil =
                (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
            worst = std::max(worst, std::abs(grad[i] - stencil));
        }
        detail::add_check(rep, "fd-gradient-vs-stencil", 0.0, worst, 1e-5,
                          "central difference vs 4-point stencil on the capacity objective");
    }

    // Six perfectly distinguishable letters.
    detail::add_check(rep, "six-state-reference", std::log2(6.0), noiseless_reference_capacity(6),
                      1e-12);

    if (opt.stretch) {
        OptimizerConfig cfg;
        cfg.seed = opt.seed;
        cfg.restarts = opt.stretch_restarts;
        cfg.max_iterations = 300;
        const OrthogonalSearchResult orth = count_orthogonal_states(2, 6, 3, cfg);
        detail::add_check(rep, "orthogonal-states-6-modes", 12.0, orth.count, 0.0);
        OptimizerConfig ecfg = cfg;
        ecfg.stop_at_bits = 2.995;
        detail::add_check(rep, "extended-capacity-6-modes", 3.0,
                          extended_capacity(2, 6, 12, ecfg).capacity_bits, 2e-2);
        OptimizerConfig e8 = cfg;
        e8.stop_at_bits = std::log2(12.0) - 1e-2;
        detail::add_check(rep, "extended-capacity-8-modes", std::log2(12.0),
                          extended_capacity(2, 8, 12, e8).capacity_bits, 2e-2);
    }

    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

inline std::string verify_table_text(const VerifyReport& rep) {
    std::ostringstream os;
    os << "check                              expected      actual        tol       status\n";
    os << "---------------------------------------------------------------------------\n";
    for (const auto& c : rep.checks) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-34s %-13.6g %-13.6g %-9.1e %s\n", c.name.c_str(),
                      c.expected, c.actual, c.tolerance, c.pass ? "pass" : "FAIL");
        os << line;
    }
    os << (rep.all_pass ? "all checks passed" : "SOME CHECKS FAILED") << " ("
       << format_double(rep.seconds, 3) << " s)\n";
    return os.str();
}

inline json verify_report_json(const VerifyReport& rep) {
    json j;
    j["all_pass"] = rep.all_pass;
    j["seconds"] = rep.seconds;
    json arr = json::array();
    for (const auto& c : rep.checks) {
        json e;
        e["name"] = c.name;
        e["expected"] = c.expected;
        e["actual"] = c.actual;
        e["tolerance"] = c.tolerance;
        e["pass"] = c.pass;
        if (!c.detail.empty()) e["detail"] = c.detail;
        arr.push_back(std::move(e));
    }
    j["checks"] = std::move(arr);
    return j;
}

}  // namespace locap
