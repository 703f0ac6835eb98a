#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "btower/pipeline.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace btower;

namespace {

std::string cli() {
  const char* p = std::getenv("BTOWER_CLI");
  REQUIRE_MESSAGE(p != nullptr, "BTOWER_CLI is not set");
  return p;
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("btower_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int exec(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + cli() + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("constants table") {
  const auto d = scratch("constants");
  CHECK(exec("--N 3 --q 4 --out " + d.string() + " constants") == 0);
  const auto csv = slurp(d / "constants.csv");
  CHECK(csv.rfind("name,value,error_bound\n", 0) == 0);
  for (const char* row : {"\na1,", "\na2,", "\na3,", "\na4,", "\na5,", "\nC_N,"}) CHECK(csv.find(row) != std::string::npos);
  CHECK(csv.find("a5_hat") == std::string::npos);
  const auto man = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(man["command"] == "constants");
  CHECK(man["status"]["exit_code"] == 0);
  CHECK(man.contains("created_at"));
}

TEST_CASE("predict output") {
  const auto d = scratch("predict");
  CHECK(exec("--k 2 --eps 0.01 --out " + d.string() + " predict") == 0);
  const auto j = nlohmann::json::parse(slurp(d / "predict.json"));
  REQUIRE(j["Lambda_star"].size() == 2);
  CHECK(j["xi"][1].get<double>() > j["xi"][0].get<double>());
  CHECK(j["heights"][1].get<double>() > j["heights"][0].get<double>());
  for (const auto& h : j["hessian_diagonal"]) CHECK(h.get<double>() < 0.0);
}

TEST_CASE("exit codes") {
  const auto d = scratch("codes");
  CHECK(exec("--V const:1 --out " + d.string() + " predict") == 3);
  CHECK(exec("--out " + d.string() + " sweep --eps-list 0.01") == 2);
  CHECK(exec("--out " + d.string() + " nonsense") == 2);
  CHECK(exec("--V bogus --out " + d.string() + " predict") == 2);
  CHECK(exec("--q 5 --out " + d.string() + " constants") != 0);
}

TEST_CASE("deterministic artifacts without timestamp") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  CHECK(exec("--no-timestamp --k 3 --out " + a.string() + " predict") == 0);
  CHECK(exec("--no-timestamp --k 3 --out " + b.string() + " predict") == 0);
  for (const char* f : {"predict.json", "manifest.json"}) CHECK(slurp(a / f) == slurp(b / f));
  CHECK_FALSE(nlohmann::json::parse(slurp(a / "manifest.json")).contains("created_at"));
}

TEST_CASE("config file, flag override and environment") {
  const auto d = scratch("config");
  const auto cfg = d / "run.ini";
  {
    std::ofstream f(cfg);
    f << "k=3\neps=0.02\n";
  }
  CHECK(exec("--config " + cfg.string() + " --k 2 --out " + d.string() + " predict") == 0);
  const auto j = nlohmann::json::parse(slurp(d / "predict.json"));
  CHECK(j["Lambda_star"].size() == 2);
  const auto man = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(man["params"]["epsilon"].get<double>() == doctest::Approx(0.02));

  const auto e = scratch("env");
  CHECK(exec("constants", "BTOWER_OUT='" + e.string() + "'") == 0);
  CHECK(fs::exists(e / "constants.csv"));
}

TEST_CASE("log-log slope") {
  CHECK(loglog_slope({1.0, 10.0, 100.0}, {2.0, 20.0, 200.0}) == doctest::Approx(1.0));
  CHECK(loglog_slope({1e-2, 1e-3}, {1e-4, 1e-6}) == doctest::Approx(2.0));
}
