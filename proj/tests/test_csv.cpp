#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>

#include <doctest.h>

#include "gen.hpp"
#include "subord/csv.hpp"
#include "subord/suites.hpp"

using namespace subord;

TEST_CASE("numbers round-trip and stay short") {
  CHECK(csv::number(0.5) == "0.5");
  CHECK(csv::number(0.1) == "0.1");
  CHECK(csv::number(std::size_t{42}) == "42");
  gen::Gen g(1515);
  for (int i = 0; i < 2000; ++i) {
    const double v = g.coin() ? g.log_uniform(1e-300, 1e300) : g.uniform(-1.0, 1.0);
    const auto s = csv::number(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    CHECK(s.size() <= 24);
  }
}

TEST_CASE("tables round-trip through files") {
  csv::Table t;
  t.add_meta("phi", "stable:0.5");
  t.add_meta("M", "16");
  t.columns = {"m", "c"};
  t.rows = {{"1", "0.5"}, {"2", "0.125"}};
  const auto path =
      (std::filesystem::temp_directory_path() / "subord_csv_test" / "t.csv").string();
  csv::write(path, t);
  const auto back = csv::read(path);
  std::filesystem::remove_all(std::filesystem::path(path).parent_path());
  CHECK(back.meta_value("phi") == "stable:0.5");
  CHECK(back.meta_value("absent").empty());
  CHECK(back.columns == t.columns);
  CHECK(back.rows == t.rows);
  CHECK(csv::to_string(back) == csv::to_string(t));
}

TEST_CASE("suite output is deterministic") {
  suites::Config cfg;
  cfg.chains = {"two-state"};
  const auto a = suites::run("chains", cfg);
  const auto b = suites::run("chains", cfg);
  CHECK(a.pass());
  CHECK(csv::to_string(a.table()) == csv::to_string(b.table()));
}

TEST_CASE("fault injection names the failing condition") {
  suites::Config cfg;
  cfg.phis = {"identity", "nonconcave"};
  const auto r = suites::run("bernstein", cfg);
  CHECK_FALSE(r.pass());
  CHECK(r.first_failure().find("concavity") != std::string::npos);
}
