#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pmmhf/config.hpp"
#include "pmmhf/error.hpp"
#include "pmmhf/io.hpp"

using namespace pmmhf;
using nlohmann::json;

TEST_CASE("returns parse") {
  std::istringstream one("return\n0.01\n-0.02\n");
  const auto s = parse_returns(one, "mem");
  CHECK(s.returns == std::vector<double>{0.01, -0.02});
  CHECK(s.dates.empty());

  std::istringstream dated("date,return\n2020-01-02,0.5\n2020-01-03,-1.25\n");
  const auto d = parse_returns(dated, "mem");
  CHECK(d.dates.size() == 2);
  CHECK(d.returns[1] == -1.25);
}

TEST_CASE("bad returns name the line") {
  std::istringstream nan("return\n0.1\nNaN\n");
  try {
    parse_returns(nan, "mem");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream junk("return\n0.1x\n");
  CHECK_THROWS_AS(parse_returns(junk, "mem"), DataError);
  std::istringstream empty("date,return\n2020-01-01,\n");
  CHECK_THROWS_AS(parse_returns(empty, "mem"), DataError);
  std::istringstream header("price\n1\n");
  CHECK_THROWS_AS(parse_returns(header, "mem"), DataError);
  CHECK_THROWS_AS(load_returns("/nonexistent/file.csv"), DataError);
}

TEST_CASE("shipped S&P 500 stand-in has 754 rows") {
  const auto s = load_returns(std::filesystem::path(PMMHF_SOURCE_DIR) / "data" / "sp500_synthetic.csv");
  CHECK(s.returns.size() == 754);
  CHECK(s.dates.size() == 754);
}

TEST_CASE("chain CSV round trip is lossless") {
  Chain ch;
  ch.names = {"phi", "rho"};
  ch.draws = {{0.1, 1.0 / 3.0}, {-2.5e-17, 0.987654321987654321}};
  ch.loglik = {-10.123456789012345, -std::numeric_limits<double>::infinity()};
  ch.logprior = {-1.0, -2.0};
  ch.accepted = {1, 0};
  ch.burn_in = 1;
  std::stringstream ss;
  write_chain_csv(ss, ch);
  const Chain back = read_chain_csv(ss);
  CHECK(back.names == ch.names);
  CHECK(back.draws == ch.draws);
  CHECK(back.loglik == ch.loglik);
  CHECK(back.accepted == ch.accepted);
  CHECK(back.burn_in == 1);

  PredictiveDensity pd;
  pd.grid = {0.1, 0.2};
  pd.density = {1e-300, 0.7};
  std::stringstream ds;
  write_density_csv(ds, pd);
  const auto pb = read_density_csv(ds);
  CHECK(pb.grid == pd.grid);
  CHECK(pb.density == pd.density);

  std::stringstream ts;
  write_timing_csv(ts, {0.25, 1e-5});
  CHECK(read_timing_csv(ts) == std::vector<double>{0.25, 1e-5});
}

TEST_CASE("config round trip") {
  const json j = json::parse(R"({
    "name": "rt",
    "model": {"family": "SV", "params": {"phi": -6.61, "rho": 0.2, "sigma_v": 0.7}},
    "data": {"source": "simulate", "length": 200, "dgp": "svij", "svij": {"kappa": 0.05}},
    "filters": [{"kind": "BPF", "particles": 300}, {"kind": "DPF", "matches": 30, "particles": "calibrate"},
                {"kind": "UDPF", "sigma_size": 7, "resampling": "systematic"}],
    "pmmh": {"iterations": 1000, "burn_in": 100, "prior": "forecast_sv", "proposal": {"warmup": 200}},
    "forecast": {"horizon": 50, "thin": 2},
    "seed": 42, "jobs": 2, "output": "out/rt"
  })");
  const ExperimentConfig c = parse_config(j);
  CHECK(c.family == ModelKind::SV);
  CHECK(c.filters[1].matches == 30);
  CHECK_FALSE(c.filters[1].particles);
  CHECK(c.filters[2].resampling == ResamplingScheme::Systematic);
  CHECK(c.data.svij.kappa == 0.05);
  CHECK(c.pmmh.proposal.warmup == 200);
  const json once = to_json(c);
  const json twice = to_json(parse_config(once));
  CHECK(once == twice);
  CHECK(canonical_json(once) == canonical_json(twice));
}

TEST_CASE("config validation") {
  auto bad = [](const char* text) { return parse_config(json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"model": {"family": "LG", "params": {"sigma_eta": 1, "rho": 0.5, "sigma_v": 1}},
                         "data": {"length": 10}})"),
                  ConfigError);  // no seed
  CHECK_THROWS_AS(bad(R"({"model": {"family": "SV", "params": "estimate"},
                         "data": {"source": "file", "path": "x.csv"},
                         "filters": [{"kind": "FAPF"}], "seed": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(bad(R"({"model": {"family": "LG"}, "data": {"length": 10}, "seed": 1})"),
                  ConfigError);  // simulate needs params
  CHECK_THROWS_AS(bad(R"({"model": {"family": "XX"}, "seed": 1})"), ConfigError);
  CHECK_THROWS_AS(bad(R"({"model": {"family": "LG", "params": "estimate"},
                         "data": {"source": "file", "path": "x.csv"},
                         "filters": [{"kind": "BPF", "particles": 1}], "seed": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent.json"), ConfigError);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("shipped configs parse") {
  for (const auto& e : std::filesystem::directory_iterator(std::filesystem::path(PMMHF_SOURCE_DIR) / "configs")) {
    INFO(e.path().string());
    CHECK_NOTHROW(load_config(e.path()));
  }
}
