#include "nudge/analytics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace nudge {

void AnalyticsConfig::validate() const {
  if (lull_len_s < 1) throw Error(ErrorKind::Config, "analytics: lull_len_s must be >= 1");
  if (eval_window_s < 1) throw Error(ErrorKind::Config, "analytics: eval_window_s must be >= 1");
  if (!(success_margin >= 0.0 && success_margin <= 1.0)) {
    throw Error(ErrorKind::Config, "analytics: success_margin must be in [0, 1]");
  }
}

std::size_t SessionMetrics::nudge_successes() const {
  std::size_t n = 0;
  for (const auto& d : per_nudge_deltas) n += d.success ? 1 : 0;
  return n;
}

namespace {

double window_ratio(const std::vector<SessionRecord>& rows, std::ptrdiff_t first,
                    std::ptrdiff_t last) {
  first = std::max<std::ptrdiff_t>(first, 0);
  last = std::min<std::ptrdiff_t>(last, static_cast<std::ptrdiff_t>(rows.size()));
  int speech = 0;
  int counted = 0;
  for (auto i = first; i < last; ++i) {
    const auto cell = rows[static_cast<std::size_t>(i)].speech;
    if (cell == SpeechCell::None) continue;
    ++counted;
    if (cell == SpeechCell::True) ++speech;
  }
  return counted == 0 ? 0.0 : static_cast<double>(speech) / counted;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Shortest text that parses back to the same double.
std::string fmt_exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view cell, std::size_t line, const char* field) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw ParseError(line, std::string("bad ") + field + " '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

SessionMetrics session_metrics(const SessionLog& log, const AnalyticsConfig& cfg) {
  if (log.empty()) {
    throw Error(ErrorKind::UndefinedMetrics,
                "session '" + log.session_id + "' has no records");
  }
  const auto& rows = log.records();
  SessionMetrics m;
  m.duration_s = rows.size();

  std::size_t flagged = 0;
  std::size_t speech = 0;
  std::size_t run = 0;
  const auto close_run = [&] {
    if (run >= static_cast<std::size_t>(cfg.lull_len_s)) ++m.lull_count;
    run = 0;
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.intervention) {
      ++m.nudge_count;
      const auto at = static_cast<std::ptrdiff_t>(i);
      NudgeDelta d;
      d.row = i;
      d.pre_ratio = window_ratio(rows, at - cfg.eval_window_s, at);
      d.post_ratio = window_ratio(rows, at + 1, at + 1 + cfg.eval_window_s);
      d.success = d.post_ratio - d.pre_ratio >= cfg.success_margin - 1e-12;
      m.per_nudge_deltas.push_back(d);
    }
    if (r.speech == SpeechCell::True) {
      ++flagged;
      ++speech;
      close_run();
    } else {
      if (r.speech == SpeechCell::False) ++flagged;
      ++run;
    }
  }
  close_run();
  m.speech_ratio = flagged == 0 ? 0.0 : static_cast<double>(speech) / flagged;
  return m;
}

std::vector<int> reconstruct_scores(const SessionLog& log, const ScoreConfig& cfg) {
  std::vector<int> scores;
  scores.reserve(log.size());
  ConversationState cs;
  for (const auto& r : log.records()) {
    ClassifiedSecond ev{cs.t + 1,
                        r.speech == SpeechCell::True ? SpeechLabel::Speech
                                                     : SpeechLabel::NonSpeech,
                        1.0};
    cs = update(cs, ev, cfg);
    scores.push_back(cs.score);
  }
  return scores;
}

std::vector<CohortMetaRow> parse_cohort_meta(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  if (lines.empty()) throw ParseError(1, "empty cohort metadata");

  const auto header = split_row(lines[0]);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[std::string(header[i])] = i;
  for (const char* field : {"session_id", "group", "friendship_duration",
                            "intimacy_pre", "intimacy_post"}) {
    if (!col.count(field)) {
      throw Error(ErrorKind::MissingField,
                  std::string("cohort metadata: missing column '") + field + "'");
    }
  }

  std::vector<CohortMetaRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::size_t lineno = i + 1;
    const auto cells = split_row(lines[i]);
    if (cells.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) + " columns");
    }
    CohortMetaRow r;
    r.session_id = std::string(cells[col["session_id"]]);
    if (r.session_id.empty()) throw ParseError(lineno, "empty session_id");
    try {
      r.group = parse_group(cells[col["group"]]);
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    r.friendship_duration =
        parse_number(cells[col["friendship_duration"]], lineno, "friendship_duration");
    r.intimacy_pre = parse_number(cells[col["intimacy_pre"]], lineno, "intimacy_pre");
    r.intimacy_post = parse_number(cells[col["intimacy_post"]], lineno, "intimacy_post");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string cohort_meta_csv(const std::vector<CohortMetaRow>& rows) {
  std::string out(kCohortMetaHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.session_id + "," + std::string(to_string(r.group)) + "," +
           fmt_exact(r.friendship_duration) + "," + fmt_exact(r.intimacy_pre) + "," +
           fmt_exact(r.intimacy_post) + "\n";
  }
  return out;
}

void attach_cohort_meta(std::vector<SessionLog>& logs,
                        const std::vector<CohortMetaRow>& rows) {
  std::map<std::string, const CohortMetaRow*> by_id;
  for (const auto& r : rows) by_id[r.session_id] = &r;
  for (auto& log : logs) {
    const auto it = by_id.find(log.session_id);
    if (it == by_id.end()) {
      throw Error(ErrorKind::MissingField,
                  "cohort metadata has no row for session '" + log.session_id + "'");
    }
    log.group = it->second->group;
    log.metadata.friendship_duration = it->second->friendship_duration;
    log.metadata.intimacy_pre = it->second->intimacy_pre;
    log.metadata.intimacy_post = it->second->intimacy_post;
  }
}

const LabeledTest* CohortReport::find_t_test(std::string_view label) const {
  for (const auto& t : t_tests) {
    if (t.label == label) return &t;
  }
  return nullptr;
}

namespace {

std::vector<double> column(const std::vector<SessionRow>& rows, std::optional<Group> arm,
                           double (*get)(const SessionRow&)) {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!arm || r.group == *arm) out.push_back(get(r));
  }
  return out;
}

double get_speech(const SessionRow& r) { return r.metrics.speech_ratio; }
double get_lulls(const SessionRow& r) { return static_cast<double>(r.metrics.lull_count); }
double get_nudges(const SessionRow& r) { return static_cast<double>(r.metrics.nudge_count); }
double get_friend(const SessionRow& r) { return r.friendship_duration; }
double get_intimacy_post(const SessionRow& r) { return r.intimacy_post; }
double get_intimacy_delta(const SessionRow& r) { return r.intimacy_post - r.intimacy_pre; }

LabeledTest guarded(std::string label, const auto& fn) {
  LabeledTest t{std::move(label), std::nullopt, {}};
  try {
    t.result = fn();
  } catch (const Error& e) {
    t.omitted_reason = e.what();
  }
  return t;
}

}  // namespace

CohortReport cohort_report(const std::vector<SessionLog>& logs,
                           const AnalyticsConfig& cfg) {
  cfg.validate();
  CohortReport report;
  report.config = cfg;
  for (const auto& log : logs) {
    const auto& m = log.metadata;
    for (const auto& [field, value] :
         {std::pair{"friendship_duration", m.friendship_duration},
          std::pair{"intimacy_pre", m.intimacy_pre},
          std::pair{"intimacy_post", m.intimacy_post}}) {
      if (!value) {
        throw Error(ErrorKind::MissingField, "session '" + log.session_id +
                                                 "' is missing '" + field + "'");
      }
    }
    report.sessions.push_back({log.session_id, log.group, session_metrics(log, cfg),
                               *m.friendship_duration, *m.intimacy_pre,
                               *m.intimacy_post});
  }

  const std::vector<std::pair<std::string, double (*)(const SessionRow&)>> metrics = {
      {"speech_ratio", get_speech}, {"lull_count", get_lulls}, {"nudge_count", get_nudges}};
  for (Group arm : {Group::Control, Group::Experiment}) {
    const auto n = column(report.sessions, arm, get_speech).size();
    if (n == 0) continue;
    for (const auto& [name, get] : metrics) {
      const auto values = column(report.sessions, arm, get);
      report.groups[std::string(to_string(arm))][name] = stats::describe(values);
    }
  }

  for (const auto& [name, get] : {metrics[0], metrics[1]}) {
    const auto exp = column(report.sessions, Group::Experiment, get);
    const auto ctl = column(report.sessions, Group::Control, get);
    report.t_tests.push_back(guarded(name, [&] { return stats::student_t(exp, ctl); }));
  }

  for (const auto& [label, arm] :
       {std::pair<std::string, std::optional<Group>>{"control", Group::Control},
        {"experiment", Group::Experiment},
        {"combined", std::nullopt}}) {
    const auto x = column(report.sessions, arm, get_friend);
    const auto y = column(report.sessions, arm, get_speech);
    report.correlations.push_back(
        guarded("friendship_duration~speech_ratio:" + label,
                [&] { return stats::spearman(x, y); }));
  }

  for (const auto& [name, get] :
       std::vector<std::pair<std::string, double (*)(const SessionRow&)>>{
           {"speech_ratio", get_speech},
           {"intimacy_post", get_intimacy_post},
           {"intimacy_change", get_intimacy_delta}}) {
    report.anovas.push_back(guarded(name, [&] {
      return stats::oneway_anova({column(report.sessions, Group::Control, get),
                                  column(report.sessions, Group::Experiment, get)});
    }));
  }
  return report;
}

nlohmann::json CohortReport::to_json() const {
  nlohmann::json j;
  j["config"] = {{"lull_len_s", config.lull_len_s},
                 {"eval_window_s", config.eval_window_s},
                 {"success_margin", config.success_margin}};
  j["sessions"] = nlohmann::json::array();
  for (const auto& s : sessions) {
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& d : s.metrics.per_nudge_deltas) {
      deltas.push_back({{"row", d.row},
                        {"pre_ratio", d.pre_ratio},
                        {"post_ratio", d.post_ratio},
                        {"success", d.success}});
    }
    j["sessions"].push_back({{"session_id", s.session_id},
                             {"group", to_string(s.group)},
                             {"duration_s", s.metrics.duration_s},
                             {"speech_ratio", s.metrics.speech_ratio},
                             {"lull_count", s.metrics.lull_count},
                             {"nudge_count", s.metrics.nudge_count},
                             {"per_nudge_deltas", deltas},
                             {"friendship_duration", s.friendship_duration},
                             {"intimacy_pre", s.intimacy_pre},
                             {"intimacy_post", s.intimacy_post}});
  }
  j["groups"] = nlohmann::json::object();
  for (const auto& [arm, by_metric] : groups) {
    for (const auto& [metric, g] : by_metric) j["groups"][arm][metric] = stats::to_json(g);
  }
  auto tests = [](const std::vector<LabeledTest>& v) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& t : v) {
      out[t.label] = t.result ? stats::to_json(*t.result)
                              : nlohmann::json{{"omitted", t.omitted_reason}};
    }
    return out;
  };
  j["t_tests"] = tests(t_tests);
  j["correlations"] = tests(correlations);
  j["anova"] = tests(anovas);
  return j;
}

std::string CohortReport::sessions_csv() const {
  std::string out =
      "session_id,group,duration_s,speech_ratio,lull_count,nudge_count,"
      "nudge_successes,friendship_duration,intimacy_pre,intimacy_post\n";
  for (const auto& s : sessions) {
    out += s.session_id + "," + std::string(to_string(s.group)) + "," +
           std::to_string(s.metrics.duration_s) + "," + fmt_double(s.metrics.speech_ratio) +
           "," + std::to_string(s.metrics.lull_count) + "," +
           std::to_string(s.metrics.nudge_count) + "," +
           std::to_string(s.metrics.nudge_successes()) + "," +
           fmt_double(s.friendship_duration) + "," + fmt_double(s.intimacy_pre) + "," +
           fmt_double(s.intimacy_post) + "\n";
  }
  return out;
}

}  // namespace nudge
