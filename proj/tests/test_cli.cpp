#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cli.hpp"
#include "heterovol/model.hpp"
#include "heterovol/params_io.hpp"

namespace fs = std::filesystem;
using namespace heterovol;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "heterovol");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("heterovol_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "table1.json") << to_json(sp500_1970_2010_estimates());
    ReducedParams bad = sp500_1970_2010_estimates();
    bad.nu = 3.9;
    std::ofstream(dir / "bad.json") << to_json(bad);
  }
  ~Scratch() { fs::remove_all(dir); }
  [[nodiscard]] std::string at(const std::string& name) const { return (dir / name).string(); }
};

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"simulate", "--out", "x"}).code == 1);
  Scratch s;
  CHECK(run({"curves", "--params", s.at("table1.json"), "--out", s.at("c"), "--form", "euler"}).code == 1);
  CHECK(run({"curves", "--params", s.at("table1.json"), "--out", s.at("c"), "--lags", "5..2"}).code == 1);
  const Run bad = run({"curves", "--params", s.at("bad.json"), "--out", s.at("c")});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("heterovol") != std::string::npos);
  CHECK(run({"simulate", "--params", s.at("missing.json"), "--out", s.at("m")}).code == 1);
}

TEST_CASE("simulate is reproducible and exports prices") {
  Scratch s;
  const std::vector<std::string> common{"simulate", "--params", s.at("table1.json"), "--seed", "5",
                                        "--paths", "2", "--horizon", "2"};
  auto a = common;
  a.insert(a.end(), {"--out", s.at("a"), "--export-prices"});
  auto b = common;
  b.insert(b.end(), {"--out", s.at("b")});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(s.dir / "a" / "paths.csv") == slurp(s.dir / "b" / "paths.csv"));
  CHECK(lines(slurp(s.dir / "a" / "paths.csv")) == 1 + 2 * 501);
  CHECK(fs::exists(s.dir / "a" / "paths.json"));
  const std::string prices = slurp(s.dir / "a" / "prices_1.csv");
  CHECK(prices.rfind("date,close\n2000-01-03,100\n", 0) == 0);
  CHECK(lines(prices) == 502);

  const Run an = run({"analyze", "--prices", s.at("a/prices_0.csv"), "--prices", s.at("a/prices_1.csv"),
                      "--out", s.at("an"), "--lags", "1..20"});
  CHECK(an.code == 0);
  CHECK(lines(slurp(s.dir / "an" / "acf.csv")) == 21);
  // 500 returns per path: too short to calibrate with the default lags.
  CHECK(run({"calibrate", "--prices", s.at("a/prices_0.csv"), "--out", s.at("cal")}).code == 1);
}

TEST_CASE("curves") {
  Scratch s;
  REQUIRE(run({"curves", "--params", s.at("table1.json"), "--out", s.at("c")}).code == 0);
  std::istringstream lev(slurp(s.dir / "c" / "leverage.csv"));
  std::string line;
  std::getline(lev, line);
  CHECK(line == "lag_yr,lag_days,value");
  int rows = 0;
  while (std::getline(lev, line)) {
    ++rows;
    CHECK(std::stod(line.substr(line.rfind(',') + 1)) < 0.0);
  }
  CHECK(rows == 250);
  CHECK(lines(slurp(s.dir / "c" / "acf.csv")) == 251);
}

TEST_CASE("selfcheck") {
  const Run r = run({"selfcheck"});
  CHECK(r.code == 0);
  CHECK(r.out.find("selfcheck passed") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

}  // TEST_SUITE
