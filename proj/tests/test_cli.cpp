#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "../tools/cli.hpp"
#include "nematic/csv.hpp"

namespace fs = std::filesystem;
using nematic::cli::run;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nematic_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

int tool(std::vector<std::string> args) {
  args.insert(args.begin(), "nematic");
  return run(args);
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(tool({"--help"}) == 0);
  CHECK(tool({}) == 64);
  CHECK(tool({"frobnicate"}) == 64);
  const std::string out = scratch("usage").string();
  CHECK(tool({"solve", "--k", "0", "--out", out}) == 64);
  CHECK(tool({"solve", "--a2", "-1", "--out", out}) == 64);
  CHECK(tool({"solve", "--n", "4", "--out", out}) == 64);
  CHECK(tool({"solve", "--method", "magic", "--out", out}) == 64);
  CHECK(tool({"solve", "--R", "5", "--rmax", "60", "--out", out}) == 64);
  CHECK(tool({"asymptotics", "--rmax", "20", "--out", out}) == 64);
  CHECK(tool({"sweep", "--axis", "k", "--out", out}) == 64);
}

TEST_CASE("b2 = 0 is refused without the diagnostic flag") {
  const std::string out = scratch("bzero").string();
  CHECK(tool({"solve", "--b2", "0", "--R", "5", "--n", "200", "--out", out}) == 4);
  CHECK(tool({"asymptotics", "--b2", "0", "--rmax", "100", "--n", "400", "--out", out}) == 4);
  CHECK(tool({"asymptotics", "--b2", "0", "--allow-b-zero", "--rmax", "100", "--n", "400", "--out", out}) == 4);
  CHECK(tool({"solve", "--b2", "0", "--allow-b-zero", "--R", "5", "--n", "200", "--out", out}) == 0);
  const auto j = load(fs::path(out) / "energy.json");
  CHECK(j["regime"]["tag"] == "B_ZERO");
}

TEST_CASE("solve writes a critical profile with flat v") {
  const fs::path out = scratch("critical");
  REQUIRE(tool({"solve", "--b2", "1.7320508075688772", "--R", "20", "--n", "800", "--out", out.string()}) == 0);
  std::ifstream in(out / "profile.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "r,u,v,residual");
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string r, u, v;
    std::getline(ss, r, ',');
    std::getline(ss, u, ',');
    std::getline(ss, v, ',');
    CHECK(std::abs(std::stod(v) + 1 / std::sqrt(2.0)) <= 1e-6);
    ++rows;
  }
  CHECK(rows == 801);
  const auto j = load(out / "energy.json");
  CHECK(j["schema_version"] == "1.0.0");
  CHECK(j["kind"] == "solve");
  CHECK(j["regime"]["tag"] == "CRITICAL");
  CHECK(j["solver"]["residual_norm"].get<double>() <= 1e-8);
}

TEST_CASE("repeated runs are byte-identical") {
  const fs::path a = scratch("repeat_a"), b = scratch("repeat_b");
  for (const fs::path& d : {a, b})
    REQUIRE(tool({"verify", "--k", "2", "--R", "10", "--n", "300", "--out", d.string()}) == 0);
  CHECK(slurp(a / "bounds.json") == slurp(b / "bounds.json"));
  CHECK(!slurp(a / "bounds.json").empty());
}

TEST_CASE("sweep output does not depend on the job count") {
  const fs::path a = scratch("sweep_1"), b = scratch("sweep_3");
  const std::vector<std::string> base{"sweep", "--axis", "b2", "--values", "3,0.5,1", "--R", "10", "--n", "300"};
  auto with = [&](const fs::path& d, const std::string& jobs) {
    auto args = base;
    args.insert(args.end(), {"--jobs", jobs, "--out", d.string()});
    return tool(args);
  };
  REQUIRE(with(a, "1") == 0);
  REQUIRE(with(b, "3") == 0);
  CHECK(slurp(a / "sweep.json") == slurp(b / "sweep.json"));
  const auto j = load(a / "sweep.json");
  REQUIRE(j["results"].size() == 3);
  CHECK(j["results"][0]["value"] == 0.5);
  CHECK(j["results"][2]["value"] == 3.0);
  for (const auto& r : j["results"]) CHECK(r["status"] == "ok");
}

TEST_CASE("config file values yield to flags") {
  const fs::path out = scratch("config");
  const fs::path cfg = out / "run.ini";
  std::ofstream(cfg) << "k=2\nR=8\nn=200\n";
  REQUIRE(tool({"solve", "--config", cfg.string(), "--k", "3", "--out", out.string()}) == 0);
  const auto j = load(out / "energy.json");
  CHECK(j["params"]["k"] == 3);
  CHECK(j["domain"]["R"] == 8.0);
  CHECK(j["grid"]["cells"] == 200);

  std::ofstream(cfg) << "k=2\nbogus=1\n";
  CHECK(tool({"solve", "--config", cfg.string(), "--out", out.string()}) == 64);
}

TEST_CASE("output directory falls back to the environment") {
  const fs::path out = scratch("env");
  ::setenv("NEMATIC_PROFILE_OUT", out.string().c_str(), 1);
  const int code = tool({"solve", "--R", "5", "--n", "100"});
  ::unsetenv("NEMATIC_PROFILE_OUT");
  CHECK(code == 0);
  CHECK(fs::exists(out / "profile.csv"));
  CHECK(fs::exists(out / "energy.json"));
}

TEST_CASE("stability for k = 1 carries the open-question banner") {
  const fs::path out = scratch("stab1");
  REQUIRE(tool({"stability", "--k", "1", "--rmax", "60", "--n", "600", "--out", out.string()}) == 0);
  const auto j = load(out / "stability.json");
  CHECK(j["stability"]["open_question"] == true);
  CHECK(j["stability"].contains("banner"));
  CHECK(j["stability"]["hardy_identity_error"].get<double>() <= 1e-5);
}

TEST_CASE("stability for k = 2 exports a certificate") {
  const fs::path out = scratch("stab2");
  REQUIRE(tool({"stability", "--k", "2", "--b2", "1.7320508075688772", "--rmax", "200", "--n", "2000", "--out",
                   out.string()}) == 0);
  const auto j = load(out / "stability.json");
  CHECK(j["stability"]["open_question"] == false);
  CHECK(j["stability"]["min_rayleigh"].get<double>() < 0.0);
  CHECK(j["stability"]["certificate_present"] == true);
  REQUIRE(fs::exists(out / "certificate.csv"));
  std::ifstream in(out / "certificate.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "r,xi");
}

TEST_CASE("qfield and asymptotics artifacts") {
  const fs::path out = scratch("qfield");
  REQUIRE(tool({"qfield", "--R", "5", "--n", "100", "--angles", "16", "--stride", "4", "--out", out.string()}) == 0);
  const auto q = load(out / "qfield.json");
  CHECK(q["qfield"]["angles"] == 16);
  CHECK(q["qfield"]["max_abs_trace"].get<double>() <= 1e-12);
  std::ifstream in(out / "qfield.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,r,phi,u,v,q11,q12,q13,q22,q23,w0,w1,w2,w3,w4");

  REQUIRE(tool({"asymptotics", "--rmax", "200", "--n", "2000", "--out", out.string()}) == 0);
  const auto t = load(out / "tailfit.json");
  CHECK(t["tail_fit"]["rel_err_u"].get<double>() <= 0.02);
}

TEST_CASE("shortest round-trip number formatting") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.0, 0.0}) {
    const std::string s = nematic::format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(nematic::format_double(0.1) == "0.1");
  CHECK(nematic::format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(nematic::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  std::ostringstream os;
  nematic::write_csv(os, {"a", "b"}, {{1.5, -2.0}});
  CHECK(os.str() == "a,b\n1.5,-2\n");
}
