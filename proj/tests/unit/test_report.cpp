#include "liketrial/report.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "liketrial/errors.hpp"

using namespace liketrial;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("number formatting") {
    CHECK(format_exact(0.1) == "0.1");
    CHECK(std::stod(format_exact(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_sig(3.14159265, 4) == "3.142");
    CHECK(format_sig(1.8728869, 4) == "1.873");
  }

  TEST_CASE("table layout has four result rows and the overall line") {
    const SimulationSummary s = run_batch(SimulationConfig::reference(500, 1));
    const auto lines = lines_of(summary_to_table(s));
    REQUIRE(lines.size() >= 8);
    CHECK(lines[0].find("Result") == 0);
    CHECK(lines[0].find("Incidence (%)") != std::string::npos);
    CHECK(lines[0].find("Mean LR") != std::string::npos);
    CHECK(lines[1].find("Misleading evidence, stopped early (N<64)") == 0);
    CHECK(lines[2].find("Correct evidence, stopped early (N<64)") == 0);
    CHECK(lines[3].find("Misleading evidence, stopped at N=64") == 0);
    CHECK(lines[4].find("Correct evidence, stopped at N=64") == 0);
    CHECK(summary_to_table(s).find("Mean sample size:") != std::string::npos);
    CHECK(summary_to_table(s).find("Misleading evidence overall:") != std::string::npos);
  }

  TEST_CASE("summary csv round trip") {
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
      for (std::int64_t trials : {1ll, 37ll, 1000ll}) {
        SimulationConfig config = SimulationConfig::reference(trials, seed);
        if (seed == 99) config.effect_dist = NormalEffect{0.25, 0.5};
        const SimulationSummary s = run_batch(config);
        const std::string csv = summary_to_csv(s);
        CHECK(summary_from_csv(csv) == s);
        CHECK(summary_to_csv(summary_from_csv(csv)) == csv);
      }
    }
  }

  TEST_CASE("summary csv shape") {
    const auto lines = lines_of(summary_to_csv(run_batch(SimulationConfig::reference(200, 1))));
    REQUIRE(lines.size() == 9);
    CHECK(lines[0].rfind("# config", 0) == 0);
    CHECK(lines[1].rfind("# overall", 0) == 0);
    CHECK(lines[2] == "category,incidence,mean_folded_lr");
    CHECK(lines[3].rfind("misleading_early,", 0) == 0);
    CHECK(lines[8].rfind("summary,", 0) == 0);
  }

  TEST_CASE("malformed summary csv is rejected") {
    CHECK_THROWS_AS(summary_from_csv(""), DomainError);
    CHECK_THROWS_AS(summary_from_csv("category,incidence,mean_folded_lr\nbogus,1,\nsummary,0,\n"),
                    DomainError);
    const std::string good = summary_to_csv(run_batch(SimulationConfig::reference(10, 1)));
    CHECK_THROWS_AS(summary_from_csv(good.substr(0, good.size() / 2)), DomainError);
  }

  TEST_CASE("sweep csv") {
    const TrialDesign design(DesignParams::reference());
    const auto grid = make_grid(-1.0, 2.0, 0.25);
    const auto sweep = sweep_mean_n(grid, design, 20, 1);
    const auto lines = lines_of(sweep_to_csv(sweep));
    REQUIRE(lines.size() == 14);
    CHECK(lines[0] == "theta_T,mean_n,stop_early_rate,replications");
    CHECK(lines[1].rfind("-1,", 0) == 0);
  }
}
