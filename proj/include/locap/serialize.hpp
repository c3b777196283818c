#pragma once

// JSON / CSV persistence.  All emitters are deterministic: ordered keys, no
// timestamps, floats printed with 12 significant digits in CSV, so identical
// configuration and seed reproduce identical bytes.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "locap/channel.hpp"
#include "locap/common.hpp"
#include "locap/fock.hpp"
#include "locap/linop.hpp"
#include "locap/optimize.hpp"
#include "locap/protocols.hpp"

namespace locap {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// States and unitaries

inline json state_to_json(const PureState& state) {
    json j;
    j["n"] = state.photons();
    j["N"] = state.modes();
    json amps = json::array();
    for (Eigen::Index k = 0; k < state.amplitudes.size(); ++k)
        amps.push_back({state.amplitudes[k].real(), state.amplitudes[k].imag()});
    j["amplitudes"] = std::move(amps);
    return j;
}

inline PureState state_from_json(const json& j) {
    if (!j.contains("n") || !j.contains("N") || !j.contains("amplitudes"))
        throw InputError("state_from_json: need keys n, N, amplitudes");
    auto basis = make_basis(j.at("n").get<int>(), j.at("N").get<int>());
    const auto& amps = j.at("amplitudes");
    if (amps.size() != basis->dim())
        throw InputError("state_from_json: amplitude count does not match the basis");
    PureState s = zero_state(basis);
    for (std::size_t k = 0; k < amps.size(); ++k)
        s.amplitudes[static_cast<Eigen::Index>(k)] =
            cxd(amps[k][0].get<double>(), amps[k][1].get<double>());
    return s;
}

inline json unitary_to_json(const ModeUnitary& u) {
    json j;
    j["N"] = u.modes();
    json rows = json::array();
    for (Eigen::Index r = 0; r < u.m.rows(); ++r)
        for (Eigen::Index c = 0; c < u.m.cols(); ++c)
            rows.push_back({u.m(r, c).real(), u.m(r, c).imag()});
    j["entries"] = std::move(rows);  // row-major
    return j;
}

inline ModeUnitary unitary_from_json(const json& j) {
    if (!j.contains("N") || !j.contains("entries"))
        throw InputError("unitary_from_json: need keys N, entries");
    const int n = j.at("N").get<int>();
    const auto& entries = j.at("entries");
    if (entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw InputError("unitary_from_json: entry count does not match N");
    MatrixXcd m(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const auto& e = entries[static_cast<std::size_t>(r * n + c)];
            m(r, c) = cxd(e[0].get<double>(), e[1].get<double>());
        }
    return ModeUnitary(m);
}

// ---------------------------------------------------------------------------
// Results

inline json channel_to_json(const ChannelMatrix& ch) {
    json j;
    j["inputs"] = ch.inputs();
    j["outcomes"] = ch.outcomes();
    if (!ch.outcome_labels.empty()) j["outcome_labels"] = ch.outcome_labels;
    json rows = json::array();
    for (Eigen::Index r = 0; r < ch.p.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < ch.p.cols(); ++c) row.push_back(ch.p(r, c));
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j;
}

inline json capacity_result_to_json(const CapacityResult& res) {
    json j;
    j["capacity_bits"] = res.capacity_bits;
    json priors = json::array();
    for (Eigen::Index k = 0; k < res.priors.p.size(); ++k) priors.push_back(res.priors.p[k]);
    j["priors"] = std::move(priors);
    j["feasibility_gap"] = res.feasibility_gap;
    j["mean_photons_alice"] = res.mean_photons_alice;
    j["best_restart"] = res.best_restart;
    j["restarts_used"] = res.restarts_used;
    json params = json::array();
    for (Eigen::Index k = 0; k < res.parameters.size(); ++k) params.push_back(res.parameters[k]);
    j["parameters"] = std::move(params);
    // capacity histogram over restarts, binned to 0.01 bit
    std::map<std::string, int> bins;
    for (double c : res.restart_capacities) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", c);
        ++bins[buf];
    }
    json hist = json::object();
    for (const auto& [k, v] : bins) hist[k] = v;
    j["restart_histogram"] = std::move(hist);
    json caps = json::array();
    for (double c : res.restart_capacities) caps.push_back(c);
    j["restart_capacities"] = std::move(caps);
    return j;
}

inline json baseline_result_to_json(const BaselineResult& res) {
    json j;
    j["capacity_bits"] = res.capacity_bits;
    json priors = json::array();
    for (Eigen::Index k = 0; k < res.priors.p.size(); ++k) priors.push_back(res.priors.p[k]);
    j["priors"] = std::move(priors);
    j["letters"] = res.letter_labels;
    j["mean_photons"] = res.mean_photons;
    j["channel"] = channel_to_json(res.channel);
    return j;
}

// ---------------------------------------------------------------------------
// CSV emission

inline std::string csv_metadata_line(std::uint64_t seed, const std::string& config_digest) {
    std::ostringstream os;
    os << "# locap " << kVersion << " seed=" << seed << " config=" << config_digest << "\n";
    return os.str();
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points, std::uint64_t seed,
                             const std::string& config_digest) {
    std::ostringstream os;
    os << csv_metadata_line(seed, config_digest);
    os << "target,capacity_bits,feasibility_gap,restarts_used\n";
    for (const auto& p : points)
        os << format_double(p.target) << ',' << format_double(p.capacity_bits) << ','
           << format_double(p.feasibility_gap) << ',' << p.restarts_used << "\n";
    return os.str();
}

inline std::string detector_gap_csv(const std::vector<DetectorGapPoint>& points,
                                    std::uint64_t seed, const std::string& config_digest) {
    std::ostringstream os;
    os << csv_metadata_line(seed, config_digest);
    os << "s,v,entangled_bits,baseline_bits,gap_bits\n";
    for (const auto& p : points)
        os << format_double(p.s) << ',' << format_double(p.v) << ','
           << format_double(p.entangled_bits) << ',' << format_double(p.baseline_bits) << ','
           << format_double(p.gap_bits) << "\n";
    return os.str();
}

inline std::string alphabet_csv(const std::vector<AlphabetPoint>& points, std::uint64_t seed,
                                const std::string& config_digest) {
    std::ostringstream os;
    os << csv_metadata_line(seed, config_digest);
    os << "alphabet,capacity_bits,normalized\n";
    for (const auto& p : points)
        os << p.alphabet << ',' << format_double(p.capacity_bits) << ','
           << format_double(p.normalized) << "\n";
    return os.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path);
    out << content;
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace locap
