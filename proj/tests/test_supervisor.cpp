#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "graspkit/supervisor.hpp"
#include "support/fixtures.hpp"

using namespace graspkit;

namespace {

GraspAttemptRecord record(int index, GraspOutcome outcome) {
  GraspAttemptRecord r;
  r.attempt_index = index;
  r.outcome = outcome;
  return r;
}

}  // namespace

TEST_CASE("classify_outcome: trivial cases") {
  SupervisorPolicy policy;  // min width 5 mm, tolerance 0.5, max opening 8 cm

  CHECK(classify_outcome(0.0, 0.06, policy) == GraspOutcome::empty_close);
  CHECK(classify_outcome(0.06, 0.06, policy) == GraspOutcome::success);
  CHECK(classify_outcome(0.004, 0.06, policy) == GraspOutcome::empty_close);
}

TEST_CASE("classify_outcome: tolerance band arithmetic") {
  // Oracle: the acceptance band is [w(1-t), w(1+t)] evaluated directly.
  SupervisorPolicy policy;
  policy.width_tolerance = 0.25;
  const double expected = 0.06;
  const double lo = expected * (1.0 - policy.width_tolerance);
  const double hi = expected * (1.0 + policy.width_tolerance);
  CHECK(lo == doctest::Approx(0.045));
  CHECK(hi == doctest::Approx(0.075));

  CHECK(classify_outcome(0.030, expected, policy) == GraspOutcome::slip);
  CHECK(classify_outcome(0.046, expected, policy) == GraspOutcome::success);
  CHECK(classify_outcome(0.074, expected, policy) == GraspOutcome::success);
  CHECK(classify_outcome(0.078, expected, policy) == GraspOutcome::slip);
}

TEST_CASE("classify_outcome: out-of-range inputs") {
  SupervisorPolicy policy;
  CHECK_THROWS_AS(classify_outcome(-0.01, 0.06, policy), OutOfRangeError);
  CHECK_THROWS_AS(classify_outcome(0.09, 0.06, policy), OutOfRangeError);
  CHECK_THROWS_AS(classify_outcome(0.02, 0.0, policy), OutOfRangeError);
  CHECK_THROWS_AS(classify_outcome(0.02, 0.09, policy), OutOfRangeError);
}

TEST_CASE("classify_outcome: total over the valid input box") {
  // Property sweep: classification never throws and always lands in one of
  // the three outcomes across the whole valid rectangle.
  SupervisorPolicy policy;
  for (int e = 0; e <= 80; ++e) {
    for (int w = 1; w <= 80; ++w) {
      const GraspOutcome outcome =
          classify_outcome(e * 0.001, w * 0.001, policy);
      CHECK((outcome == GraspOutcome::success ||
             outcome == GraspOutcome::empty_close ||
             outcome == GraspOutcome::slip));
    }
  }
}

TEST_CASE("next_action: trivial sequences") {
  SupervisorPolicy policy;
  policy.max_retries = 2;

  CHECK(next_action({record(1, GraspOutcome::success)}, policy) ==
        SupervisorAction::proceed);
  CHECK(next_action({record(1, GraspOutcome::empty_close)}, policy) ==
        SupervisorAction::retry_grasp);
  CHECK(next_action({record(1, GraspOutcome::empty_close),
                     record(2, GraspOutcome::slip),
                     record(3, GraspOutcome::empty_close)},
                    policy) == SupervisorAction::handover);
}

TEST_CASE("next_action: guards") {
  SupervisorPolicy policy;
  CHECK_THROWS_AS(next_action({}, policy), EmptyHistoryError);
  CHECK_THROWS_AS(next_action({record(1, GraspOutcome::pending)}, policy),
                  std::invalid_argument);
}

TEST_CASE("next_action: exhaustive outcome sequences up to length 5") {
  // Never retry past the budget; handover exactly at budget + 1 failures.
  const GraspOutcome alphabet[] = {GraspOutcome::success,
                                   GraspOutcome::empty_close,
                                   GraspOutcome::slip};
  for (int max_retries : {0, 1, 2}) {
    SupervisorPolicy policy;
    policy.max_retries = max_retries;
    for (int length = 1; length <= 5; ++length) {
      const int total = static_cast<int>(std::pow(3, length));
      for (int code = 0; code < total; ++code) {
        std::vector<GraspAttemptRecord> history;
        int failures = 0;
        int n = code;
        for (int i = 0; i < length; ++i) {
          const GraspOutcome outcome = alphabet[n % 3];
          n /= 3;
          history.push_back(record(i + 1, outcome));
          if (outcome != GraspOutcome::success) ++failures;
        }
        const SupervisorAction action = next_action(history, policy);
        if (history.back().outcome == GraspOutcome::success) {
          CHECK(action == SupervisorAction::proceed);
        } else if (failures <= max_retries) {
          CHECK(action == SupervisorAction::retry_grasp);
        } else {
          CHECK(action == SupervisorAction::handover);
          // Exactly at budget+1 failures, never earlier.
          if (failures == max_retries + 1) CHECK(action ==
                                                 SupervisorAction::handover);
        }
        if (action == SupervisorAction::retry_grasp)
          CHECK(failures <= max_retries);
      }
    }
  }
}

TEST_CASE("episode: success proceeds, failures retry a different grasp") {
  const SceneModel scene = graspkit::testing::cube_on_table_scene();
  PlannerConfig config;
  SupervisorPolicy policy;
  policy.max_opening = scene.gripper.max_opening;
  policy.max_retries = 2;

  // First reading matches whatever width the first plan expects.
  const PlanResult probe = plan(scene, config, {});
  REQUIRE(probe.has_selection());
  const double good = probe.expected_width();

  {
    const std::vector<double> readings = {good};
    const EpisodeResult episode =
        run_supervised_episode(scene, config, {}, readings, policy);
    REQUIRE(episode.attempts.size() == 1);
    CHECK(episode.attempts[0].outcome == GraspOutcome::success);
    CHECK(episode.final_action == SupervisorAction::proceed);
  }

  {
    // Empty close, then success on the retry: the retry must pick another
    // sample index.
    const std::vector<double> readings = {0.0, 1.0};  // second fixed below
    std::vector<double> fixed = readings;
    PlannerConfig retry_config = config;
    retry_config.excluded_samples = {probe.selected_index};
    const PlanResult second = plan(scene, retry_config, {});
    REQUIRE(second.has_selection());
    fixed[1] = second.expected_width();

    const EpisodeResult episode =
        run_supervised_episode(scene, config, {}, fixed, policy);
    REQUIRE(episode.attempts.size() == 2);
    CHECK(episode.attempts[0].outcome == GraspOutcome::empty_close);
    CHECK(episode.attempts[0].action == SupervisorAction::retry_grasp);
    CHECK(episode.attempts[1].selected_sample != episode.attempts[0].selected_sample);
    CHECK(episode.attempts[1].outcome == GraspOutcome::success);
    CHECK(episode.final_action == SupervisorAction::proceed);
  }

  {
    // Persistent empty closes exhaust the budget and hand over.
    const std::vector<double> readings = {0.0, 0.0, 0.0, 0.0};
    const EpisodeResult episode =
        run_supervised_episode(scene, config, {}, readings, policy);
    REQUIRE(episode.attempts.size() == 3);  // initial + 2 retries
    CHECK(episode.final_action == SupervisorAction::handover);
    // Each attempt used a distinct grasp.
    CHECK(episode.attempts[0].selected_sample !=
          episode.attempts[1].selected_sample);
    CHECK(episode.attempts[1].selected_sample !=
          episode.attempts[2].selected_sample);
  }
}
