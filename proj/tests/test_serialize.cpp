#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "locap/serialize.hpp"

using namespace locap;

TEST_CASE("state JSON roundtrip is exact", "[serialize]") {
    const PureState s = optimal_input_state();
    const PureState back = state_from_json(state_to_json(s));
    CHECK(back.photons() == 2);
    CHECK(back.modes() == 4);
    CHECK((back.amplitudes - s.amplitudes).norm() == 0.0);

    json j = state_to_json(s);
    j.erase("amplitudes");
    CHECK_THROWS_AS(state_from_json(j), InputError);

    json wrong = state_to_json(s);
    wrong["amplitudes"].push_back({0.0, 0.0});
    CHECK_THROWS_AS(state_from_json(wrong), InputError);

    CHECK_THROWS_AS(state_from_json(json::parse("{\"n\": 2}")), InputError);
}

TEST_CASE("unitary JSON roundtrip is exact", "[serialize]") {
    const ModeUnitary u = source_unitary();
    const ModeUnitary back = unitary_from_json(unitary_to_json(u));
    CHECK((back.m - u.m).norm() == 0.0);

    json j = unitary_to_json(u);
    j["entries"].push_back({0.0, 0.0});
    CHECK_THROWS_AS(unitary_from_json(j), InputError);
    CHECK_THROWS_AS(unitary_from_json(json::parse("{\"N\": 2}")), InputError);
}

TEST_CASE("channel JSON mirrors the matrix", "[serialize]") {
    const ChannelMatrix ch = channel_of(canonical_protocol());
    const json j = channel_to_json(ch);
    CHECK(j.at("inputs").get<int>() == 4);
    CHECK(j.at("outcomes").get<int>() == 10);
    REQUIRE(j.at("rows").size() == 4);
    for (Eigen::Index r = 0; r < ch.p.rows(); ++r)
        for (Eigen::Index c = 0; c < ch.p.cols(); ++c)
            CHECK(j.at("rows")[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                      .get<double>() == ch.p(r, c));
}

TEST_CASE("capacity result JSON carries the restart histogram", "[serialize]") {
    CapacityResult res;
    res.capacity_bits = 2.0;
    res.priors = Priors::uniform(4);
    res.parameters = VectorXd::Zero(3);
    res.best_restart = -1;
    res.restarts_used = 5;
    res.restart_capacities = {1.995, 2.0, 2.0, 1.58, 2.0};
    const json j = capacity_result_to_json(res);
    CHECK(j.at("restart_histogram").at("2.00").get<int>() == 4);
    CHECK(j.at("restart_histogram").at("1.58").get<int>() == 1);
    CHECK(j.at("best_restart").get<int>() == -1);
    CHECK(j.at("priors").size() == 4);
    CHECK(j.at("parameters").size() == 3);
}

TEST_CASE("CSV artifacts are deterministic and carry metadata", "[serialize]") {
    const std::vector<SweepPoint> pts = {{0.5, 1.0, 1e-12, 8}, {1.0, 2.0, -2e-13, 4}};
    const std::string a = sweep_csv(pts, 42, "abc123");
    const std::string b = sweep_csv(pts, 42, "abc123");
    CHECK(a == b);
    CHECK(a.rfind("# locap ", 0) == 0);
    CHECK(a.find("seed=42") != std::string::npos);
    CHECK(a.find("config=abc123") != std::string::npos);
    CHECK(a.find("target,capacity_bits,feasibility_gap,restarts_used") != std::string::npos);
    CHECK(a.find("\n0.5,1,") != std::string::npos);

    const std::vector<DetectorGapPoint> gpts = {{0.9, 0.9999, 1.9, 1.63, 0.27}};
    const std::string g = detector_gap_csv(gpts, 7, "d");
    CHECK(g.find("s,v,entangled_bits,baseline_bits,gap_bits") != std::string::npos);
    CHECK(g.find("0.9,0.9999,1.9,1.63,0.27") != std::string::npos);

    const std::vector<AlphabetPoint> apts = {{4, 2.0, 1.0}, {5, 2.055, 0.885}};
    const std::string al = alphabet_csv(apts, 7, "e");
    CHECK(al.find("alphabet,capacity_bits,normalized") != std::string::npos);
    CHECK(al.find("4,2,1") != std::string::npos);
}

TEST_CASE("text files are written verbatim", "[serialize]") {
    const std::string path = "locap_serialize_test.tmp";
    write_text_file(path, "line\n");
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(content == "line\n");
    in.close();
    std::remove(path.c_str());
    CHECK_THROWS_AS(write_text_file("no_such_dir/x.csv", "y"), InputError);
}

TEST_CASE("malformed JSON text raises parse errors", "[serialize]") {
    CHECK_THROWS(json::parse("{\"n\": 2,"));
    const json ok = json::parse("{\"n\": 2, \"N\": 4}");
    CHECK_THROWS_AS(state_from_json(ok), InputError);
}
