#include "nudge/sessionlog.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nudge {

using namespace std::chrono;

std::string format_time(WallTime time) {
  const auto day = floor<days>(time);
  const year_month_day ymd{day};
  const hh_mm_ss hms{time - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

namespace {

bool parse_digits(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  const auto* first = text.data() + pos;
  return std::from_chars(first, first + len, out).ec == std::errc{};
}

}  // namespace

WallTime parse_time(std::string_view text) {
  int y, mo, d, h, mi, s;
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != ' ' ||
      text[13] != ':' || text[16] != ':' || !parse_digits(text, 0, 4, y) ||
      !parse_digits(text, 5, 2, mo) || !parse_digits(text, 8, 2, d) ||
      !parse_digits(text, 11, 2, h) || !parse_digits(text, 14, 2, mi) ||
      !parse_digits(text, 17, 2, s)) {
    throw Error(ErrorKind::Input, "bad timestamp '" + std::string(text) + "'");
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw Error(ErrorKind::Input, "bad timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

void SessionRecord::validate() const {
  if (score < 0 || score > 100) {
    throw Error(ErrorKind::Input, "record: score " + std::to_string(score) +
                                      " outside [0, 100]");
  }
  if ((speech == SpeechCell::None) != intervention) {
    throw Error(ErrorKind::Input,
                intervention ? "record: intervention rows carry '-' as speech"
                             : "record: '-' speech is only valid on intervention rows");
  }
}

std::string_view to_string(Group group) {
  return group == Group::Control ? "control" : "experiment";
}

Group parse_group(std::string_view text) {
  if (text == "control") return Group::Control;
  if (text == "experiment") return Group::Experiment;
  throw Error(ErrorKind::Input, "unknown group '" + std::string(text) + "'");
}

void SessionLog::append(const SessionRecord& record) {
  record.validate();
  if (!records_.empty() && record.time != records_.back().time + seconds{1}) {
    throw Error(ErrorKind::Sequencing,
                "session log: record at " + format_time(record.time) +
                    " does not follow " + format_time(records_.back().time));
  }
  records_.push_back(record);
}

std::string csv_row(const SessionRecord& r) {
  std::string out = format_time(r.time);
  out += ',';
  out += std::to_string(r.score);
  out += ',';
  out += r.speech == SpeechCell::True    ? "TRUE"
         : r.speech == SpeechCell::False ? "FALSE"
                                         : "-";
  out += ',';
  out += r.intervention ? "TRUE" : "FALSE";
  return out;
}

std::string to_csv(const SessionLog& log) {
  std::string out;
  out.reserve(40 * (log.size() + 1));
  out += kCsvHeader;
  out += '\n';
  for (const auto& r : log.records()) {
    out += csv_row(r);
    out += '\n';
  }
  return out;
}

SessionLog from_csv(std::string_view text) {
  SessionLog log;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError(lineno, "expected header '" + std::string(kCsvHeader) + "'");
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      if (pos >= text.size()) break;
      throw ParseError(lineno, "empty row");
    }

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 4) {
      throw ParseError(lineno, "expected 4 columns, got " + std::to_string(cells.size()));
    }

    SessionRecord r;
    try {
      r.time = parse_time(cells[0]);
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    int score = -1;
    const auto sc = cells[1];
    if (sc.empty() || sc.size() > 3 || (sc.size() > 1 && sc[0] == '0') ||
        std::from_chars(sc.data(), sc.data() + sc.size(), score).ptr != sc.data() + sc.size()) {
      throw ParseError(lineno, "bad score '" + std::string(sc) + "'");
    }
    r.score = score;
    if (cells[2] == "TRUE") {
      r.speech = SpeechCell::True;
    } else if (cells[2] == "FALSE") {
      r.speech = SpeechCell::False;
    } else if (cells[2] == "-") {
      r.speech = SpeechCell::None;
    } else {
      throw ParseError(lineno, "bad speech cell '" + std::string(cells[2]) + "'");
    }
    if (cells[3] == "TRUE") {
      r.intervention = true;
    } else if (cells[3] == "FALSE") {
      r.intervention = false;
    } else {
      throw ParseError(lineno, "bad intervention cell '" + std::string(cells[3]) + "'");
    }
    try {
      log.append(r);
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!header_seen) throw ParseError(1, "empty session csv");
  return log;
}

nlohmann::json metadata_to_json(const SessionLog& log) {
  const auto& m = log.metadata;
  nlohmann::json j;
  j["session_id"] = log.session_id;
  j["group"] = to_string(log.group);
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  j["friendship_duration"] = opt(m.friendship_duration);
  j["intimacy_pre"] = opt(m.intimacy_pre);
  j["intimacy_post"] = opt(m.intimacy_post);
  j["preferred_genres"] = m.preferred_genres;
  j["config"] = m.config;
  j["notes"] = nlohmann::json::array();
  for (const auto& n : m.notes) j["notes"].push_back({{"t", n.t}, {"text", n.text}});
  return j;
}

void apply_metadata_json(SessionLog& log, const nlohmann::json& j) {
  try {
    if (j.contains("session_id")) log.session_id = j.at("session_id").get<std::string>();
    if (j.contains("group")) log.group = parse_group(j.at("group").get<std::string>());
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<double>();
    };
    auto& m = log.metadata;
    m.friendship_duration = opt("friendship_duration");
    m.intimacy_pre = opt("intimacy_pre");
    m.intimacy_post = opt("intimacy_post");
    m.preferred_genres = j.value("preferred_genres", std::vector<std::string>{});
    m.config = j.value("config", nlohmann::json());
    m.notes.clear();
    for (const auto& n : j.value("notes", nlohmann::json::array())) {
      m.notes.push_back({n.at("t").get<Second>(), n.at("text").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("session metadata: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void write_session(const std::filesystem::path& dir, const SessionLog& log) {
  if (log.session_id.empty()) throw Error(ErrorKind::Input, "session log has no id");
  if (log.metadata.config.is_null()) {
    throw Error(ErrorKind::Input, "session log '" + log.session_id +
                                      "' has no config snapshot");
  }
  std::filesystem::create_directories(dir);
  write_text_file(dir / (log.session_id + ".csv"), to_csv(log));
  write_text_file(dir / (log.session_id + ".meta.json"),
                  metadata_to_json(log).dump(2) + "\n");
}

SessionLog read_session(const std::filesystem::path& csv_path) {
  SessionLog log = from_csv(read_text_file(csv_path));
  log.session_id = csv_path.stem().string();
  auto meta = csv_path;
  meta.replace_extension(".meta.json");
  if (std::filesystem::exists(meta)) {
    std::string text = read_text_file(meta);
    try {
      apply_metadata_json(log, nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::Parse, meta.string() + ": " + e.what());
    }
  }
  return log;
}

}  // namespace nudge
