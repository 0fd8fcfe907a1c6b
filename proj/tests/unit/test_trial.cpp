#include "liketrial/trial.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "liketrial/errors.hpp"
#include "oracles.hpp"

using namespace liketrial;

namespace {

TrialState feed(TrialState state, const std::vector<double>& xs) {
  for (double x : xs) state = add_observation(std::move(state), x);
  return state;
}

// Standardized distance at which the directional LR equals `lr`, from the
// oracle quadratic root and bisection on the oracle CDF.
double oracle_z(double lr) {
  const long double p = oracle::lr_threshold_p(lr > 1 ? lr : 1.0 / lr);
  const double z = static_cast<double>(-oracle::norm_quantile(p));
  return lr > 1 ? z : -z;
}

// n - 1 observations at delta, then one that moves the mean to the point where
// the directional LR equals `lr` at n.
std::vector<double> reach_lr_at(double delta, std::int64_t n, double lr) {
  std::vector<double> xs(static_cast<std::size_t>(n - 1), delta);
  const double mean = delta + oracle_z(lr) / std::sqrt(static_cast<double>(n));
  xs.push_back(n * mean - (n - 1) * delta);
  return xs;
}

}  // namespace

TEST_SUITE("trial") {
  TEST_CASE("new_trial") {
    const TrialState s = new_trial(DesignParams::reference());
    CHECK(s.n() == 0);
    CHECK(s.status() == TrialStatus::Collecting);
    CHECK(s.lr().value() == 1.0);
    CHECK(std::isinf(s.se()));
    CHECK(s.design().n_min() == 16);
    CHECK(s.design().n_max() == 64);
    DesignParams bad;
    bad.delta = 0.0;
    CHECK_THROWS_AS(new_trial(bad), ValidationError);
  }

  TEST_CASE("add_observation examples") {
    TrialState s = new_trial(DesignParams::reference());
    s = add_observation(s, 0.7);
    CHECK(s.n() == 1);
    CHECK(s.theta_obs() == 0.7);
    CHECK(s.se() == 1.0);
    CHECK(s.status() == TrialStatus::Collecting);

    const TrialState neutral = feed(new_trial(DesignParams::reference()), std::vector(16, 0.5));
    CHECK(neutral.status() == TrialStatus::Continue);
    CHECK(neutral.lr().value() == 1.0);

    const TrialState high = feed(new_trial(DesignParams::reference()), std::vector(16, 1.6181));
    CHECK(high.status() == TrialStatus::StoppedHigh);
    CHECK(high.lr().value() >= 20.0);

    CHECK_THROWS_AS(add_observation(high, 0.1), StateError);
    CHECK_THROWS_AS(add_observation(neutral, std::nan("")), DomainError);
    CHECK_THROWS_AS(add_observation(neutral, INFINITY), DomainError);
  }

  TEST_CASE("evaluate_stopping examples") {
    const TrialDesign design(DesignParams::reference());

    // LR of 100 before n_min does not stop.
    const TrialState early = feed(new_trial(design), reach_lr_at(0.5, 10, 100.0));
    CHECK(early.lr().value() == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(evaluate_stopping(early).kind == StopKind::Continue);
    CHECK(early.status() == TrialStatus::Collecting);

    const TrialState high = feed(new_trial(design), reach_lr_at(0.5, 20, 25.0));
    CHECK(high.lr().value() == doctest::Approx(25.0).epsilon(1e-6));
    CHECK(evaluate_stopping(high).kind == StopKind::StopHigh);
    CHECK(evaluate_stopping(high).n == 20);

    const TrialState low = feed(new_trial(design), reach_lr_at(0.5, 20, 0.04));
    CHECK(evaluate_stopping(low).kind == StopKind::StopLow);

    const TrialState maxn = feed(new_trial(design), reach_lr_at(0.5, 64, 1.8));
    CHECK(maxn.lr().value() == doctest::Approx(1.8).epsilon(1e-6));
    CHECK(evaluate_stopping(maxn).kind == StopKind::StopMaxN);
    CHECK(maxn.status() == TrialStatus::StoppedMaxN);

    CHECK_THROWS_AS(evaluate_stopping(new_trial(design)), StateError);
  }

  TEST_CASE("stops are possible exactly at n_min and forced exactly at n_max") {
    const TrialState at_min = feed(new_trial(DesignParams::reference()), std::vector(16, 1.7));
    CHECK(at_min.status() == TrialStatus::StoppedHigh);
    CHECK(at_min.n() == 16);
    const TrialState before_min = feed(new_trial(DesignParams::reference()), std::vector(15, 1.7));
    CHECK(before_min.status() == TrialStatus::Collecting);
    const TrialState at_max = feed(new_trial(DesignParams::reference()), std::vector(64, 0.55));
    CHECK(at_max.status() == TrialStatus::StoppedMaxN);
    CHECK(at_max.n() == 64);
    const TrialState before_max = feed(new_trial(DesignParams::reference()), std::vector(63, 0.55));
    CHECK(before_max.status() == TrialStatus::Continue);
  }

  TEST_CASE("thresholds just inside and just outside the boundary") {
    const TrialDesign design(DesignParams::reference());
    const TrialState above = feed(new_trial(design), reach_lr_at(0.5, 30, 20.0 * (1 + 1e-7)));
    CHECK(above.status() == TrialStatus::StoppedHigh);
    const TrialState below = feed(new_trial(design), reach_lr_at(0.5, 30, 20.0 * (1 - 1e-7)));
    CHECK(below.status() == TrialStatus::Continue);
    const TrialState low = feed(new_trial(design), reach_lr_at(0.5, 30, 0.05 * (1 - 1e-7)));
    CHECK(low.status() == TrialStatus::StoppedLow);
    const TrialState not_low = feed(new_trial(design), reach_lr_at(0.5, 30, 0.05 * (1 + 1e-7)));
    CHECK(not_low.status() == TrialStatus::Continue);
  }

  TEST_CASE("confidence interval examples") {
    const TrialState s16 = feed(new_trial(DesignParams::reference()), std::vector(16, 0.5));
    CHECK(confidence_interval(s16) == ConfidenceInterval{0.0, 1.0});
    const TrialState s64 = feed(new_trial(DesignParams::reference()), std::vector(64, 0.5));
    CHECK(confidence_interval(s64).lower == doctest::Approx(0.25));
    CHECK(confidence_interval(s64).upper == doctest::Approx(0.75));
    DesignParams p;
    p.delta = 0.5;
    const TrialState s1 = add_observation(new_trial(p), 0.0);
    CHECK(confidence_interval(s1).lower == doctest::Approx(-1.96));
    CHECK(confidence_interval(s1).upper == doctest::Approx(1.96));
    CHECK_THROWS_AS(confidence_interval(new_trial(p)), StateError);
  }

  TEST_CASE("finalize examples") {
    const TrialDesign design(DesignParams::reference());
    const TrialState high = feed(new_trial(design), reach_lr_at(0.5, 16, 22.0));
    REQUIRE(high.status() == TrialStatus::StoppedHigh);
    const TrialResult r = finalize(high);
    CHECK(r.stop_reason == StopKind::StopHigh);
    CHECK(r.evidence_direction == EvidenceDirection::FavorsAboveDelta);
    CHECK(r.final_n == 16);
    CHECK(r.final_lr.value() == doctest::Approx(22.0).epsilon(1e-6));

    const TrialState below = feed(new_trial(design), reach_lr_at(0.5, 64, 0.4));
    REQUIRE(below.status() == TrialStatus::StoppedMaxN);
    CHECK(finalize(below).evidence_direction == EvidenceDirection::FavorsBelowDelta);

    const TrialState flat = feed(new_trial(design), std::vector(64, 0.5));
    REQUIRE(flat.status() == TrialStatus::StoppedMaxN);
    CHECK(finalize(flat).evidence_direction == EvidenceDirection::Neutral);
    CHECK(finalize(flat).final_lr.value() == 1.0);

    CHECK_THROWS_AS(finalize(feed(new_trial(design), std::vector(5, 0.5))), StateError);
  }

  TEST_CASE("engine stop threshold corresponds to z = 2.2363 at n_min") {
    // Bisection on the engine's decision for 16 identical observations.
    const TrialDesign design(DesignParams::reference());
    auto stops = [&](double z) {
      const TrialState s = feed(new_trial(design), std::vector(16, 0.5 + z / 4.0));
      return s.status() == TrialStatus::StoppedHigh;
    };
    double lo = 0.0;
    double hi = 5.0;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (stops(mid) ? hi : lo) = mid;
    }
    CHECK(std::fabs(hi - 2.2363) <= 0.001);
    CHECK(hi == doctest::Approx(oracle::kZ20).epsilon(1e-9));
  }

  TEST_CASE("replay determinism") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal(0.3, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<double> xs;
      TrialState a = new_trial(DesignParams::reference());
      while (!a.stopped()) {
        xs.push_back(normal(rng));
        a = add_observation(a, xs.back());
      }
      const TrialState b = feed(new_trial(DesignParams::reference()), xs);
      CHECK(a == b);
      CHECK(a.lr().log_value() == b.lr().log_value());
    }
  }

  TEST_CASE("permutation invariance of the final LR for a non-stopping multiset") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> jitter(-0.01, 0.012);
    std::vector<double> xs(64);
    for (double& x : xs) x = 0.5 + jitter(rng);
    const TrialState base = feed(new_trial(DesignParams::reference()), xs);
    REQUIRE(base.status() == TrialStatus::StoppedMaxN);
    for (int k = 0; k < 100; ++k) {
      std::shuffle(xs.begin(), xs.end(), rng);
      const TrialState s = feed(new_trial(DesignParams::reference()), xs);
      REQUIRE(s.status() == TrialStatus::StoppedMaxN);
      CHECK(std::fabs(s.lr().log_value() - base.lr().log_value()) <= 1e-12);
    }
  }

  TEST_CASE("status invariants along random trajectories") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> effect(0.0, 1.0);
    std::normal_distribution<double> noise;
    for (int trial = 0; trial < 500; ++trial) {
      const double theta = effect(rng);
      TrialState s = new_trial(DesignParams::reference());
      while (!s.stopped()) {
        s = add_observation(s, theta + noise(rng));
        const double log_lr = s.lr().log_value();
        CHECK((log_lr > 0.0) == (s.theta_obs() > 0.5));
        if (s.n() < 16) CHECK(s.status() == TrialStatus::Collecting);
        CHECK(s.n() <= 64);
      }
      const TrialResult r = finalize(s);
      if (r.stop_reason != StopKind::StopMaxN) {
        CHECK(r.final_lr.folded().value() >= 20.0);
      }
    }
  }

  TEST_CASE("enum text round trips") {
    for (auto st : {TrialStatus::Collecting, TrialStatus::Continue, TrialStatus::StoppedHigh,
                    TrialStatus::StoppedLow, TrialStatus::StoppedMaxN}) {
      CHECK(parse_trial_status(to_string(st)) == st);
    }
    CHECK(!parse_trial_status("stopped"));
  }
}
