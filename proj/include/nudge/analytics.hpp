#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nudge/score.hpp"
#include "nudge/sessionlog.hpp"
#include "nudge/stats.hpp"

namespace nudge {

struct AnalyticsConfig {
  int lull_len_s = 30;         // L: minimum silence run counted as a lull
  int eval_window_s = 60;      // window for per-nudge pre/post ratios
  double success_margin = 0.10;

  void validate() const;
};

struct NudgeDelta {
  std::size_t row = 0;
  double pre_ratio = 0.0;
  double post_ratio = 0.0;
  bool success = false;
};

struct SessionMetrics {
  std::size_t duration_s = 0;
  double speech_ratio = 0.0;     // TRUE rows / rows with a speech flag
  std::size_t lull_count = 0;    // maximal non-speech runs of >= L rows
  std::size_t nudge_count = 0;   // intervention rows
  std::vector<NudgeDelta> per_nudge_deltas;

  std::size_t nudge_successes() const;
};

// Intervention rows count as silent seconds for lull runs: they neither break
// a run nor start speech. Throws ErrorKind::UndefinedMetrics on an empty log.
SessionMetrics session_metrics(const SessionLog& log, const AnalyticsConfig& cfg);

/// Re-derives the score column from logged flags ('-' scores as NonSpeech).
std::vector<int> reconstruct_scores(const SessionLog& log, const ScoreConfig& cfg);

struct CohortMetaRow {
  std::string session_id;
  Group group = Group::Experiment;
  double friendship_duration = 0.0;
  double intimacy_pre = 0.0;
  double intimacy_post = 0.0;
};

inline constexpr std::string_view kCohortMetaHeader =
    "session_id,group,friendship_duration,intimacy_pre,intimacy_post";

/// Columns are located by name; a missing column raises ErrorKind::MissingField.
std::vector<CohortMetaRow> parse_cohort_meta(std::string_view text);
std::string cohort_meta_csv(const std::vector<CohortMetaRow>& rows);

/// Copies group and participant metadata onto matching logs. Every log must
/// have a row (ErrorKind::MissingField otherwise).
void attach_cohort_meta(std::vector<SessionLog>& logs,
                        const std::vector<CohortMetaRow>& rows);

struct SessionRow {
  std::string session_id;
  Group group = Group::Experiment;
  SessionMetrics metrics;
  double friendship_duration = 0.0;
  double intimacy_pre = 0.0;
  double intimacy_post = 0.0;
};

struct LabeledTest {
  std::string label;
  std::optional<stats::TestResult> result;
  std::string omitted_reason;  // set when result is empty
};

struct CohortReport {
  AnalyticsConfig config;
  std::vector<SessionRow> sessions;
  std::map<std::string, std::map<std::string, stats::GroupStats>> groups;  // arm -> metric
  std::vector<LabeledTest> t_tests;       // experiment vs control
  std::vector<LabeledTest> correlations;  // Spearman(friendship, speech ratio)
  std::vector<LabeledTest> anovas;

  nlohmann::json to_json() const;
  std::string sessions_csv() const;
  const LabeledTest* find_t_test(std::string_view label) const;
};

// Per-session table plus arm statistics. Group tests are omitted (with a
// reason) when an arm has fewer than two sessions. Participant metadata must
// be present on every log (ErrorKind::MissingField).
CohortReport cohort_report(const std::vector<SessionLog>& logs,
                           const AnalyticsConfig& cfg);

}  // namespace nudge
