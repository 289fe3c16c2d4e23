// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "aircomp/scenario.hpp"

using namespace aircomp;

TEST_CASE("unit conversions") {
  CHECK(db_to_linear(-50.0) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(dbm_to_watts(-80.0) == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(db_to_linear(0.0) == 1.0);
  CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3));
}

TEST_CASE("paper scenario matches the reference constants") {
  const Scenario s = generate_paper_scenario(80.0, 2, 0.8, 1);
  CHECK(s.num_slots() == 160);
  CHECK(s.num_clusters() == 6);
  CHECK(s.num_devices() == 120);
  CHECK(s.phys.beta0 == doctest::Approx(1e-5));
  CHECK(s.phys.sigma2 == doctest::Approx(1e-11));
  CHECK(s.phys.altitude == 100.0);
  CHECK(s.phys.vmax == 30.0);
  CHECK(s.phys.dmin == 100.0);
  CHECK(s.phys.gamma == 2.0);
  for (const auto& c : s.clusters) {
    CHECK(c.epsilon == 2e-3);
    CHECK(c.devices.size() == 20);
    for (const auto& d : c.devices) CHECK(d.power_budget == 0.8);
  }
  CHECK(validate(s).empty());
}

TEST_CASE("generation is deterministic in the seed") {
  const Scenario a = generate_paper_scenario(80.0, 2, 0.8, 1);
  const Scenario b = generate_paper_scenario(80.0, 2, 0.8, 1);
  const Scenario c = generate_paper_scenario(80.0, 2, 0.8, 2);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("devices stay within 50 m of their cluster center") {
  const Eigen::Vector2d centers[6] = {{100, 50},   {200, 200},  {-100, 100},
                                      {-400, 150}, {-200, -200}, {-250, -100}};
  for (std::uint64_t seed : {1, 7, 42}) {
    const Scenario s = generate_paper_scenario(40.0, 1, 0.5, seed);
    for (int l = 0; l < s.num_clusters(); ++l)
      for (const auto& d : s.clusters[l].devices)
        CHECK((d.position - centers[l]).norm() <= 50.0 + 1e-12);
  }
}

TEST_CASE("generation rejects a duration that does not split into slots") {
  CHECK_THROWS_AS(generate_paper_scenario(80.25, 1, 0.8, 1), std::invalid_argument);
}

TEST_CASE("validate reports each violated invariant") {
  Scenario s = generate_paper_scenario(80.0, 2, 0.8, 1);
  CHECK(validate(s).empty());

  SUBCASE("epsilon out of range names the cluster") {
    s.clusters[0].epsilon = 1.5;
    const auto v = validate(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("cluster 1") != std::string::npos);
    CHECK(v[0].find("epsilon") != std::string::npos);
  }
  SUBCASE("too many UAVs") {
    s.num_uavs = s.num_clusters() + 1;
    const auto v = validate(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("num_uavs") != std::string::npos);
  }
  SUBCASE("bad noise power") {
    s.phys.sigma2 = 0.0;
    CHECK(validate(s).size() == 1);
  }
  SUBCASE("nonpositive budget") {
    s.clusters[2].devices[3].power_budget = 0.0;
    const auto v = validate(s);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("cluster 3") != std::string::npos);
  }
}

TEST_CASE("scenario files round-trip") {
  const Scenario s = generate_paper_scenario(20.0, 2, 0.3, 9);
  const auto path = std::filesystem::temp_directory_path() / "aircomp_roundtrip.json";
  save_scenario(s, path.string());
  const Scenario loaded = load_scenario(path.string());
  CHECK(loaded == s);
  std::filesystem::remove(path);
}

TEST_CASE("suffixed channel fields convert at load") {
  const std::string text = R"({
    "phys": {"beta0": "-50 dB", "gamma": 2, "sigma2": "-80 dBm",
             "H": 100, "vmax": 30, "dmin": 100, "delta": 0.5, "T": 10},
    "clusters": [{"epsilon": 0.002,
                  "devices": [{"position": [1.0, 2.0], "power_budget": 0.8}]}],
    "num_uavs": 1,
    "rng_seed": 3
  })";
  const Scenario s = scenario_from_json(text);
  CHECK(s.phys.beta0 == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(s.phys.sigma2 == doctest::Approx(1e-11).epsilon(1e-12));
  CHECK(s.clusters[0].devices[0].position.x() == 1.0);
}

TEST_CASE("missing fields are named in parse errors") {
  const std::string text = R"({
    "phys": {"beta0": 1e-5, "sigma2": 1e-11,
             "H": 100, "vmax": 30, "dmin": 100, "delta": 0.5, "T": 10},
    "clusters": [], "num_uavs": 1, "rng_seed": 0
  })";
  try {
    scenario_from_json(text);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("gamma") != std::string::npos);
  }
}

TEST_CASE("desk scenario shape") {
  const Scenario s = generate_desk_scenario(30.0, 1, 0.8, 5);
  CHECK(s.num_clusters() == 3);
  CHECK(s.num_devices() == 15);
  CHECK(s.num_slots() == 60);
  CHECK(validate(s).empty());
}
