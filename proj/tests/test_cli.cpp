#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "roa/cli.hpp"

using namespace roa;
using namespace roa::cli;
using nlohmann::json;

namespace {

json decay_config() {
  return json{{"system", {{"type", "polynomial"}, {"vars", {"x"}}, {"f", {"-x"}}}},
              {"box", {{"x", {-1, 1}}}},
              {"order", 2},
              {"mode", "both"},
              {"samples", 200}};
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("roa_cli_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Config, DefaultsAreFilled) {
  const RunConfig c = parse_config(decay_config());
  EXPECT_EQ(c.system_type, "polynomial");
  EXPECT_DOUBLE_EQ(c.T, 8.0);
  EXPECT_DOUBLE_EQ(c.eps, 0.1);
  EXPECT_EQ(c.order, 2);
  EXPECT_EQ(c.seed, 1u);
  EXPECT_TRUE(c.normalize_time);
  EXPECT_EQ(c.solver, SolverKind::embedded);
}

TEST(Config, SchemaViolationsAreRejected) {
  auto bad = [](auto mutate) {
    json j = decay_config();
    mutate(j);
    return j;
  };
  EXPECT_THROW(parse_config(bad([](json& j) { j["colour"] = "red"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["system"]["extra"] = 1; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["order"] = 1.5; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["order"] = 0; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["mode"] = "sideways"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["box"]["x"] = {1, -1}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["box"].erase("x"); })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["box"]["y"] = {0, 1}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["samples"] = 10; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["solver"] = "mosek"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["system"]["f"] = {"-x", "x"}; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j["system"]["type"] = "neural"; })), ConfigError);
  EXPECT_THROW(parse_config(bad([](json& j) { j.erase("system"); })), ConfigError);
}

TEST(Config, PowerNetworksNeedOmegaMax) {
  std::ifstream in(std::string(ROA_CONFIG_DIR) + "/chiang3bus.json");
  json j = json::parse(in);
  EXPECT_NO_THROW(parse_config(j));
  json no_omega = j;
  no_omega.erase("omega_max");
  EXPECT_THROW(parse_config(no_omega), ConfigError);
  json with_box = j;
  with_box["box"] = {{"w1", {-1, 1}}};
  EXPECT_THROW(parse_config(with_box), ConfigError);
  json bad_bus = j;
  bad_bus["system"]["buses"][0]["colour"] = 1;
  EXPECT_THROW(parse_config(bad_bus), ConfigError);
}

TEST(Config, ShippedConfigsLoad) {
  for (const char* name : {"chiang3bus.json", "decay1d.json", "pendulum.json"}) {
    const RunConfig c = load_config(std::string(ROA_CONFIG_DIR) + "/" + name);
    EXPECT_NO_THROW(build_system(c)) << name;
  }
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, HashIsStableAndSensitive) {
  const RunConfig a = parse_config(decay_config());
  const RunConfig b = parse_config(json::parse(decay_config().dump()));
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  json j = decay_config();
  j["seed"] = 2;
  EXPECT_NE(config_hash(parse_config(j)), config_hash(a));
}

TEST(Config, BuildsTheRecastPendulum) {
  const RunConfig c = load_config(std::string(ROA_CONFIG_DIR) + "/pendulum.json");
  const DynSystem s = build_system(c);
  EXPECT_EQ(s.vars, (std::vector<std::string>{"s_theta", "c_theta", "w"}));
  EXPECT_EQ(s.X.equalities.size(), 1u);
  EXPECT_DOUBLE_EQ(s.horizon, c.T);
}

TEST(Json, PolynomialRoundTrip) {
  const Poly p = parse_poly("0.125*x^2*y - 3*y + 1e-17", {"x", "y"});
  EXPECT_EQ(poly_from_json(poly_to_json(p)), p);
  json bad = poly_to_json(p);
  bad["exponents"][0] = {1};
  EXPECT_THROW(poly_from_json(bad), ConfigError);
}

TEST(Json, CertificateRoundTrip) {
  Certificate c;
  c.order = 3;
  c.mode = Mode::inner;
  c.v = parse_poly("t*x - x^2", {"t", "x"});
  c.w = parse_poly("1 + x^2", {"x"});
  c.objective = 1.5;
  c.status = "optimal";
  const Certificate d = certificate_from_json(certificate_to_json(c, "abc"));
  EXPECT_EQ(d.order, 3);
  EXPECT_EQ(d.mode, Mode::inner);
  EXPECT_EQ(d.v, c.v);
  EXPECT_EQ(d.w, c.w);
  EXPECT_DOUBLE_EQ(d.objective, 1.5);
  EXPECT_THROW(certificate_from_json(json{{"mode", "outer"}}), ConfigError);
}

TEST(Commands, RecastReportsTangency) {
  const RunConfig c = load_config(std::string(ROA_CONFIG_DIR) + "/pendulum.json");
  std::ostringstream out;
  EXPECT_EQ(cmd_recast(c, {}, out), kExitOk);
  EXPECT_NE(out.str().find("tangency certified"), std::string::npos);

  json j = decay_config();
  j["system"] = {{"type", "polynomial"}, {"vars", {"x", "y"}}, {"f", {"-x", "y"}}, {"equalities", {"x^2 + y^2 - 1"}}};
  j["box"] = {{"x", {-1, 1}}, {"y", {-1, 1}}};
  std::ostringstream out2;
  EXPECT_EQ(cmd_recast(parse_config(j), {}, out2), kExitValidation);
}

TEST(Commands, CertifyVerifyGridPipeline) {
  const auto dir = scratch("pipeline");
  const RunConfig c = parse_config(decay_config());
  CommandOptions o;
  o.out_dir = dir.string();
  std::ostringstream log;
  ASSERT_EQ(cmd_certify(c, o, log), kExitOk) << log.str();
  ASSERT_TRUE(std::filesystem::exists(dir / "certificate_outer.json"));
  ASSERT_TRUE(std::filesystem::exists(dir / "certificate_inner.json"));
  const json summary = json::parse(slurp(dir / "summary.json"));
  EXPECT_EQ(summary["config_hash"], config_hash(c));
  EXPECT_TRUE(summary.contains("timings"));
  EXPECT_FALSE(summary["results"]["outer"].contains("assemble_s"));

  // Reproducible apart from the timings field.
  const auto dir2 = scratch("pipeline2");
  CommandOptions o2 = o;
  o2.out_dir = dir2.string();
  ASSERT_EQ(cmd_certify(c, o2, log), kExitOk);
  EXPECT_EQ(slurp(dir / "certificate_outer.json"), slurp(dir2 / "certificate_outer.json"));
  json s2 = json::parse(slurp(dir2 / "summary.json"));
  json s1 = summary;
  s1.erase("timings");
  s2.erase("timings");
  EXPECT_EQ(s1, s2);

  CommandOptions v = o;
  v.certificates = {(dir / "certificate_outer.json").string(), (dir / "certificate_inner.json").string()};
  EXPECT_EQ(cmd_verify(c, v, log), kExitOk) << log.str();
  const json vj = json::parse(slurp(dir / "verify.json"));
  EXPECT_EQ(vj["outer"]["violations"], 0);
  EXPECT_EQ(vj["inner"]["violations"], 0);

  CommandOptions g;
  g.certificates = {(dir / "certificate_outer.json").string()};
  g.plane = "x,x";
  EXPECT_THROW(cmd_grid(c, g, log), ConfigError);
}

TEST(Commands, GridCsvFormat) {
  const auto dir = scratch("grid");
  json j = decay_config();
  j["system"] = {{"type", "polynomial"}, {"vars", {"x", "y"}}, {"f", {"-x", "-y"}}};
  j["box"] = {{"x", {-1, 1}}, {"y", {-1, 1}}};
  j["mode"] = "outer";
  j["order"] = 1;
  const RunConfig c = parse_config(j);
  CommandOptions o;
  o.out_dir = dir.string();
  std::ostringstream log;
  ASSERT_EQ(cmd_certify(c, o, log), kExitOk) << log.str();
  CommandOptions g;
  g.certificates = {(dir / "certificate_outer.json").string()};
  g.plane = "x,y";
  g.resolution = 3;
  std::ostringstream csv;
  ASSERT_EQ(cmd_grid(c, g, csv), kExitOk);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "u,v,value,member");
  int n = 0;
  while (std::getline(lines, line)) ++n;
  EXPECT_EQ(n, 9);
  g.plane = "x,z";
  EXPECT_THROW(cmd_grid(c, g, csv), ConfigError);
}

TEST(Commands, ExportWritesSdpa) {
  const auto dir = scratch("export");
  json j = decay_config();
  j["solver"] = "export";
  j["mode"] = "outer";
  const RunConfig c = parse_config(j);
  CommandOptions o;
  o.out_dir = dir.string();
  std::ostringstream log;
  EXPECT_EQ(cmd_certify(c, o, log), kExitOk);
  EXPECT_TRUE(std::filesystem::exists(dir / "outer_k2.dat-s"));
  EXPECT_FALSE(std::filesystem::exists(dir / "certificate_outer.json"));
}

TEST(Commands, CertificateFromAnotherConfigIsRejected) {
  const auto dir = scratch("mismatch");
  const RunConfig c = parse_config(decay_config());
  CommandOptions o;
  o.out_dir = dir.string();
  o.mode = "outer";
  std::ostringstream log;
  ASSERT_EQ(cmd_certify(c, o, log), kExitOk);
  json j = decay_config();
  j["seed"] = 9;
  CommandOptions v = o;
  v.certificates = {(dir / "certificate_outer.json").string()};
  EXPECT_THROW(cmd_verify(parse_config(j), v, log), ConfigError);
}

TEST(Commands, RunMapsErrorsToExitCodes) {
  const auto dir = scratch("run");
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"system": {"type": "polynomial", "vars": ["x"], "f": ["-x"]}, "bogus": 1})";
  std::string a0 = "roa-certify", a1 = "recast", a2 = "--config", a3 = cfg.string();
  char* argv[] = {a0.data(), a1.data(), a2.data(), a3.data()};
  EXPECT_EQ(run(4, argv), kExitValidation);
  std::string b1 = "frobnicate";
  char* argv2[] = {a0.data(), b1.data()};
  EXPECT_EQ(run(2, argv2), kExitValidation);
}
