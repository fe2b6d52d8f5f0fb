#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nudge/analytics.hpp"
#include "nudge/config.hpp"

namespace nudge {

struct ExperimentPlan {
  std::size_t sessions_per_arm = 10;
  Second duration_s = 3600;
  std::uint64_t seed = 1;
  DyadProfile profile = preset_profile("responsive");
  SessionConfig engine;            // detector/score/policy/content settings
  AnalyticsConfig analytics;
  double friendship_min = 0.5;     // years
  double friendship_max = 15.0;
  // Each year of friendship divides the resume probability by
  // (1 + friendship_effect * years): long-time friends sit in silence longer.
  double friendship_effect = 0.05;

  void validate() const;
};

ExperimentPlan parse_plan(const nlohmann::json& j,
                          const std::filesystem::path& base_dir = {});
ExperimentPlan load_plan(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentPlan& plan);

/// Runs one simulated session through the full engine. Control sessions log
/// only. Same inputs give the same log.
SessionLog simulate_session(const DyadProfile& profile, const SessionConfig& engine,
                            std::uint64_t seed, Group arm);

struct ExperimentResult {
  std::vector<SessionLog> logs;
  std::vector<CohortMetaRow> meta;
  CohortReport report;
  std::vector<std::string> warnings;
};

// Session i of both arms shares derive_seed(plan.seed, i) (common random
// numbers), so arm differences come from the policy alone. Children of that
// seed: 0 dyad, 1 content, 2 participant metadata.
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Writes sessions/<id>.csv(+meta), cohort_meta.csv, report.json,
/// session_metrics.csv and plan.json under out_dir.
void write_experiment(const ExperimentResult& result, const ExperimentPlan& plan,
                      const std::filesystem::path& out_dir);

}  // namespace nudge
