#pragma once

// Discrete memoryless channels induced by photonic measurement: conditional
// probability matrices, mutual information, capacity-achieving priors via
// Blahut-Arimoto (optionally under a linear input-cost equality constraint),
// and the bucket-detector (click/no-click) outcome model.

#include <optional>
#include <string>
#include <vector>

#include "locap/common.hpp"
#include "locap/fock.hpp"
#include "locap/linop.hpp"

namespace locap {

// ---------------------------------------------------------------------------
// Core types

struct Priors {
    VectorXd p;

    Priors() = default;
    explicit Priors(VectorXd probs, double tol = 1e-9) : p(std::move(probs)) {
        if (p.size() == 0) throw InputError("Priors: empty vector");
        if (p.minCoeff() < -tol) throw InputError("Priors: negative probability");
        if (std::abs(p.sum() - 1.0) > tol) throw InputError("Priors: probabilities must sum to 1");
    }

    static Priors uniform(int m) {
        return Priors(VectorXd::Constant(m, 1.0 / static_cast<double>(m)));
    }
};

// Row-stochastic likelihood matrix: row j holds p(outcome k | input j).
struct ChannelMatrix {
    MatrixXd p;
    std::vector<std::string> outcome_labels;  // may be empty

    ChannelMatrix() = default;
    explicit ChannelMatrix(MatrixXd probs, std::vector<std::string> labels = {},
                           double tol = 1e-9)
        : p(std::move(probs)), outcome_labels(std::move(labels)) {
        if (p.rows() == 0 || p.cols() == 0) throw InputError("ChannelMatrix: empty matrix");
        if (p.minCoeff() < -tol) throw InputError("ChannelMatrix: negative entry");
        for (Eigen::Index j = 0; j < p.rows(); ++j)
            if (std::abs(p.row(j).sum() - 1.0) > tol)
                throw InputError("ChannelMatrix: row " + std::to_string(j) +
                                 " does not sum to 1");
        if (!outcome_labels.empty() &&
            outcome_labels.size() != static_cast<std::size_t>(p.cols()))
            throw InputError("ChannelMatrix: label count does not match outcomes");
    }

    int inputs() const { return static_cast<int>(p.rows()); }
    int outcomes() const { return static_cast<int>(p.cols()); }
};

// Bucket (non-resolving) detector pair of efficiencies:
//   s = p(click | exactly one photon), v = p(no click | vacuum).
// A mode holding k >= 1 photons clicks with probability 1 - (1-s)^k.
struct DetectorModel {
    double s = 1.0;
    double v = 1.0;

    DetectorModel() = default;
    DetectorModel(double s_, double v_) : s(s_), v(v_) {
        if (!(s >= 0.0 && s <= 1.0 && v >= 0.0 && v <= 1.0))
            throw InputError("DetectorModel: efficiencies must lie in [0, 1]");
    }

    double click_probability(int photons) const {
        if (photons < 0) throw InputError("DetectorModel: negative photon count");
        if (photons == 0) return 1.0 - v;
        return 1.0 - std::pow(1.0 - s, photons);
    }
};

// p(no photon was present | no click), for a symmetric one-photon/vacuum source.
inline double vacuum_posterior(const DetectorModel& det) {
    const double den = 1.0 - det.s + det.v;
    if (den <= 1e-12)
        throw NumericError("vacuum_posterior: degenerate detector (s ~ 1, v ~ 0)");
    return det.v / den;
}

// p(a photon was present | click), same source convention.
inline double photon_posterior(const DetectorModel& det) {
    const double den = 1.0 + det.s - det.v;
    if (den <= 1e-12)
        throw NumericError("photon_posterior: degenerate detector (s ~ 0, v ~ 1)");
    return det.s / den;
}

// ---------------------------------------------------------------------------
// Click patterns

// Label for pattern index: mode 0 is the leftmost character, '+' = click.
inline std::string pattern_label(std::size_t pattern, int modes) {
    std::string s(static_cast<std::size_t>(modes), '-');
    for (int i = 0; i < modes; ++i)
        if ((pattern >> (modes - 1 - i)) & 1u) s[static_cast<std::size_t>(i)] = '+';
    return s;
}

inline std::vector<std::string> pattern_labels(int modes) {
    std::vector<std::string> out;
    out.reserve(1u << modes);
    for (std::size_t b = 0; b < (1u << modes); ++b) out.push_back(pattern_label(b, modes));
    return out;
}

// Distribution over the 2^N click patterns produced by measuring Fock-outcome
// probabilities with independent bucket detectors on every mode.
inline VectorXd click_pattern_distribution(const VectorXd& fock_probs, const FockBasis& basis,
                                           const DetectorModel& det) {
    if (fock_probs.size() != static_cast<Eigen::Index>(basis.dim()))
        throw InputError("click_pattern_distribution: probability vector does not match basis");
    if (fock_probs.minCoeff() < -1e-12)
        throw InputError("click_pattern_distribution: negative probability");
    const int n_modes = basis.modes();
    if (n_modes > 20) throw InputError("click_pattern_distribution: too many modes");
    const std::size_t n_patterns = 1u << n_modes;
    VectorXd out = VectorXd::Zero(static_cast<Eigen::Index>(n_patterns));
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const double w = fock_probs[static_cast<Eigen::Index>(i)];
        if (w <= 0.0) continue;
        const OccupationVector& occ = basis.at(i);
        // click probability per mode for this occupation
        double click[20];
        for (int mode = 0; mode < n_modes; ++mode)
            click[mode] = det.click_probability(occ[static_cast<std::size_t>(mode)]);
        for (std::size_t b = 0; b < n_patterns; ++b) {
            double prob = w;
            for (int mode = 0; mode < n_modes; ++mode) {
                const bool bit = (b >> (n_modes - 1 - mode)) & 1u;
                prob *= bit ? click[mode] : 1.0 - click[mode];
                if (prob == 0.0) break;
            }
            out[static_cast<Eigen::Index>(b)] += prob;
        }
    }
    return out;
}

inline VectorXd click_pattern_distribution(const PureState& state, const DetectorModel& det) {
    VectorXd probs = state.amplitudes.cwiseAbs2();
    return click_pattern_distribution(probs, *state.basis, det);
}

// Compose a Fock-outcome channel with per-mode bucket detectors.
inline ChannelMatrix compose_with_detector(const ChannelMatrix& channel, const FockBasis& basis,
                                           const DetectorModel& det) {
    const std::size_t n_patterns = 1u << basis.modes();
    MatrixXd out(channel.inputs(), static_cast<Eigen::Index>(n_patterns));
    for (int j = 0; j < channel.inputs(); ++j)
        out.row(j) = click_pattern_distribution(channel.p.row(j).transpose(), basis, det)
                         .transpose();
    return ChannelMatrix(std::move(out), pattern_labels(basis.modes()));
}

// ---------------------------------------------------------------------------
// Conditional probabilities of a prepare-and-measure protocol

struct ModeWindow {
    int first = 0;
    int count = 0;
};

// Channel rows for one transmitted symbol per Alice operation:
// row j = |lift(bob) * lift(embed(alice_ops[j])) * input|^2 over the Fock basis.
inline ChannelMatrix conditional_matrix(const PureState& input,
                                        const std::vector<ModeUnitary>& alice_ops,
                                        const ModeWindow& alice_modes, const ModeUnitary& bob_op,
                                        std::optional<DetectorModel> detector = std::nullopt) {
    if (alice_ops.empty()) throw InputError("conditional_matrix: no Alice operations");
    if (alice_modes.first < 0 || alice_modes.count < 1 ||
        alice_modes.first + alice_modes.count > input.modes())
        throw InputError("conditional_matrix: Alice window does not fit the mode range");
    if (bob_op.modes() != input.modes())
        throw InputError("conditional_matrix: Bob unitary has wrong mode count");
    if (std::abs(input.norm() - 1.0) > 1e-9)
        throw InputError("conditional_matrix: input state must be normalized");

    const auto& basis = *input.basis;
    const MatrixXcd bob = lift(bob_op, input.photons());
    MatrixXd rows(static_cast<Eigen::Index>(alice_ops.size()),
                  static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t j = 0; j < alice_ops.size(); ++j) {
        if (alice_ops[j].modes() != alice_modes.count)
            throw InputError("conditional_matrix: Alice op does not match the window size");
        const ModeUnitary embedded = embed(alice_ops[j], alice_modes.first, input.modes());
        const VectorXcd sent = lift(embedded, input.photons()) * input.amplitudes;
        const VectorXcd received = bob * sent;
        rows.row(static_cast<Eigen::Index>(j)) = received.cwiseAbs2().transpose();
    }

    std::vector<std::string> labels;
    labels.reserve(basis.dim());
    for (const auto& occ : basis.elements()) labels.push_back(occupation_label(occ));
    ChannelMatrix fock_channel(std::move(rows), std::move(labels));
    if (detector) return compose_with_detector(fock_channel, basis, *detector);
    return fock_channel;
}

// ---------------------------------------------------------------------------
// Information quantities

// I(X;Y) in bits for priors p and likelihood rows P(k|j); 0 log 0 = 0.
inline double mutual_information(const Priors& priors, const ChannelMatrix& channel) {
    if (priors.p.size() != channel.p.rows())
        throw InputError("mutual_information: priors do not match channel inputs");
    const VectorXd q = channel.p.transpose() * priors.p;
    double bits = 0.0;
    for (Eigen::Index j = 0; j < channel.p.rows(); ++j) {
        const double pj = priors.p[j];
        if (pj <= 0.0) continue;
        for (Eigen::Index k = 0; k < channel.p.cols(); ++k) {
            const double pk = channel.p(j, k);
            if (pk <= 0.0) continue;
            bits += pj * pk * std::log2(pk / q[k]);
        }
    }
    return bits;
}

struct BAOptions {
    double tolerance = 1e-12;  // stop when the capacity estimate moves less than this
    int max_iterations = 10000;
    // Linear input-cost equality constraint sum_j weights[j] p_j = target.
    std::optional<VectorXd> constraint_weights;
    double constraint_target = 0.0;
};

struct BAResult {
    Priors priors;
    double capacity_bits = 0.0;
    int iterations = 0;
    bool converged = false;
    double lagrange_multiplier = 0.0;  // 0 when unconstrained
};

namespace detail {

// One Blahut-Arimoto exponent pass: D_j = sum_k P_jk ln(P_jk / q_k) in nats.
inline void ba_exponents(const MatrixXd& P, const VectorXd& row_neg_entropy, const VectorXd& p,
                         VectorXd& q, VectorXd& D) {
    q.noalias() = P.transpose() * p;
    for (Eigen::Index k = 0; k < q.size(); ++k) q[k] = q[k] > 0.0 ? std::log(q[k]) : 0.0;
    // row_neg_entropy[j] = sum_k P_jk ln P_jk ; q now holds ln q (0 rows excluded below)
    D.noalias() = -(P * q);
    D += row_neg_entropy;
}

inline double ba_capacity_bits(const VectorXd& p, const VectorXd& D) {
    double nats = 0.0;
    for (Eigen::Index j = 0; j < p.size(); ++j)
        if (p[j] > 0.0) nats += p[j] * D[j];
    return nats / std::log(2.0);
}

}  // namespace detail

// Capacity-achieving priors.  Unconstrained: p_j <- p_j exp(D_j) / Z.
// Constrained: p_j <- p_j exp(D_j - lambda w_j) / Z with lambda chosen by
// bisection each iteration so the updated priors meet the equality constraint.
inline BAResult blahut_arimoto(const ChannelMatrix& channel, const BAOptions& opts = {}) {
    const MatrixXd& P = channel.p;
    const Eigen::Index m = P.rows();
    if (opts.max_iterations < 1) throw InputError("blahut_arimoto: iteration cap must be >= 1");

    const bool constrained = opts.constraint_weights.has_value();
    VectorXd w;
    if (constrained) {
        w = *opts.constraint_weights;
        if (w.size() != m) throw InputError("blahut_arimoto: constraint weight size mismatch");
        if (opts.constraint_target < w.minCoeff() - 1e-12 ||
            opts.constraint_target > w.maxCoeff() + 1e-12)
            throw InputError("blahut_arimoto: constraint target outside achievable range");
    }

    VectorXd row_neg_entropy(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < P.cols(); ++k) {
            const double pk = P(j, k);
            if (pk > 0.0) acc += pk * std::log(pk);
        }
        row_neg_entropy[j] = acc;
    }

    // Start from the constraint-feasible tilt of the uniform distribution.
    VectorXd p = VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    VectorXd q(P.cols()), D(m), logp(m);

    auto tilt_to_constraint = [&](const VectorXd& base_log, VectorXd& out) -> double {
        // find lambda: sum_j w_j softmax(base_log - lambda w)_j = target
        auto mean_cost = [&](double lambda) {
            double shift = -1e300;
            for (Eigen::Index j = 0; j < m; ++j)
                shift = std::max(shift, base_log[j] - lambda * w[j]);
            double zs = 0.0, ws = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                const double r = std::exp(base_log[j] - lambda * w[j] - shift);
                zs += r;
                ws += r * w[j];
            }
            return ws / zs;
        };
        double lo = -1.0, hi = 1.0;
        int guard = 0;
        while (mean_cost(lo) < opts.constraint_target && guard++ < 80) lo *= 2.0;
        guard = 0;
        while (mean_cost(hi) > opts.constraint_target && guard++ < 80) hi *= 2.0;
        if (mean_cost(lo) < opts.constraint_target || mean_cost(hi) > opts.constraint_target)
            throw NumericError("blahut_arimoto: constraint tilt failed to bracket the target");
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mean_cost(mid) > opts.constraint_target)
                lo = mid;
            else
                hi = mid;
        }
        const double lambda = 0.5 * (lo + hi);
        double shift = -1e300;
        for (Eigen::Index j = 0; j < m; ++j)
            shift = std::max(shift, base_log[j] - lambda * w[j]);
        double z = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            out[j] = std::exp(base_log[j] - lambda * w[j] - shift);
            z += out[j];
        }
        out /= z;
        return lambda;
    };

    BAResult result;
    if (constrained) {
        for (Eigen::Index j = 0; j < m; ++j) logp[j] = std::log(p[j]);
        VectorXd p0(m);
        result.lagrange_multiplier = tilt_to_constraint(logp, p0);
        p = p0;
    }

    double last_bits = -1.0;
    for (int it = 1; it <= opts.max_iterations; ++it) {
        detail::ba_exponents(P, row_neg_entropy, p, q, D);
        const double bits = detail::ba_capacity_bits(p, D);
        result.iterations = it;
        if (last_bits >= 0.0 && std::abs(bits - last_bits) < opts.tolerance) {
            result.converged = true;
            break;
        }
        last_bits = bits;

        if (!constrained) {
            double shift = -1e300;
            for (Eigen::Index j = 0; j < m; ++j) {
                logp[j] = (p[j] > 0.0 ? std::log(p[j]) : -1e300) + D[j];
                shift = std::max(shift, logp[j]);
            }
            double z = 0.0;
            for (Eigen::Index j = 0; j < m; ++j) {
                p[j] = std::exp(logp[j] - shift);
                z += p[j];
            }
            p /= z;
        } else {
            for (Eigen::Index j = 0; j < m; ++j)
                logp[j] = (p[j] > 0.0 ? std::log(p[j]) : -1e300) + D[j];
            VectorXd pn(m);
            result.lagrange_multiplier = tilt_to_constraint(logp, pn);
            p = pn;
        }
    }

    detail::ba_exponents(P, row_neg_entropy, p, q, D);
    result.priors = Priors(p, 1e-6);
    result.capacity_bits = mutual_information(result.priors, channel);
    if (constrained) {
        const double resid = std::abs(w.dot(p) - opts.constraint_target);
        if (resid > 1e-8)
            throw NumericError("blahut_arimoto: constrained solution misses the target by " +
                               format_double(resid));
    }
    return result;
}

}  // namespace locap
