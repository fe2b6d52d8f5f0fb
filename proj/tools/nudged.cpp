// nudged: session daemon and offline tools.
//
// Exit codes: 0 ok, 2 usage, 3 bad input (parse/config/content), 4 runtime.

#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "nudge/analytics.hpp"
#include "nudge/daemon.hpp"
#include "nudge/session.hpp"
#include "nudge/sim.hpp"

namespace fs = std::filesystem;
using namespace nudge;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitRuntime = 4;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input:
    case ErrorKind::Parse:
    case ErrorKind::Config:
    case ErrorKind::MissingField:
    case ErrorKind::UnknownGenre:
    case ErrorKind::NoContent:
      return kExitInput;
    default:
      return kExitRuntime;
  }
}

// Runs a session with Ctrl-C mapped onto a clean stop.
int run_session(SessionConfig cfg, bool csv_to_stdout) {
  auto session = make_session(cfg);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done) {
      if (g_interrupted) session->request_stop();
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  });
  const SessionLog& log = session->run();
  done = true;
  watcher.join();

  const auto status = session->status();
  if (csv_to_stdout) {
    std::cout << to_csv(log);
  } else {
    std::cout << status.to_json().dump(2) << "\n";
  }
  if (!status.abort_reason.empty()) {
    std::cerr << "nudged: session aborted: " << status.abort_reason << "\n";
    return kExitRuntime;
  }
  return 0;
}

std::vector<SessionLog> read_session_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::Input, dir.string() + " is not a directory");
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw Error(ErrorKind::Input, "no session CSVs in " + dir.string());
  std::vector<SessionLog> logs;
  for (const auto& p : paths) {
    try {
      logs.push_back(read_session(p));
    } catch (const ParseError& e) {
      throw Error(ErrorKind::Parse, p.filename().string() + ": " + e.what());
    }
  }
  return logs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conversation-aware nudge engine"};
  app.require_subcommand(1);

  // run
  std::string run_config;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run a session described by a config file");
  run->add_option("--config", run_config, "Session config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "Directory for the session CSV and metadata");

  // replay
  std::string replay_trace;
  std::string replay_config;
  std::string replay_out;
  std::string replay_id;
  auto* replay = app.add_subcommand("replay", "Replay a labeled trace through the engine");
  replay->add_option("--trace", replay_trace, "Trace CSV (t,label or session format)")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--config", replay_config, "Session config (JSON)")->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "Output directory; CSV goes to stdout when omitted");
  replay->add_option("--session-id", replay_id, "Session id (default: trace file stem)");

  // simulate
  std::string plan_path;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Run a simulated two-arm experiment");
  simulate->add_option("--plan", plan_path, "Experiment plan (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "Output directory")->required();

  // analyze
  std::string sessions_dir;
  std::string meta_path;
  std::string analyze_out;
  AnalyticsConfig acfg;
  auto* analyze = app.add_subcommand("analyze", "Compute session and cohort statistics");
  analyze->add_option("--sessions", sessions_dir, "Directory of session CSVs")->required();
  analyze->add_option("--meta", meta_path, "Cohort metadata CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_out, "Output directory")->required();
  analyze->add_option("--lull-len", acfg.lull_len_s, "Minimum silent run counted as a lull (s)")
      ->capture_default_str();
  analyze->add_option("--eval-window", acfg.eval_window_s, "Per-nudge window (s)")->capture_default_str();
  analyze->add_option("--margin", acfg.success_margin, "Per-nudge success margin")->capture_default_str();

  // corpus validate
  std::string corpus_items;
  std::string corpus_stories;
  auto* corpus = app.add_subcommand("corpus", "Content corpus tools");
  corpus->require_subcommand(1);
  auto* validate = corpus->add_subcommand("validate", "Check a corpus file");
  validate->add_option("items", corpus_items, "Fact items (JSON)")->required()->check(CLI::ExistingFile);
  validate->add_option("--stories", corpus_stories, "Stories (JSON)")->check(CLI::ExistingFile);

  // serve
  std::string serve_config;
  std::string listen;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP control API and event stream");
  serve->add_option("--config", serve_config, "Base session config (JSON)")->check(CLI::ExistingFile);
  serve->add_option("--listen", listen, "host:port (default: NUDGE_LISTEN or 127.0.0.1:8765)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) {
      SessionConfig cfg = load_session_config(run_config);
      if (!run_out.empty()) cfg.out_dir = fs::path(run_out);
      cfg.apply_arm();
      return run_session(std::move(cfg), false);
    }

    if (*replay) {
      SessionConfig cfg;
      if (!replay_config.empty()) {
        auto j = read_json_file(replay_config);
        j["mode"] = "replay";
        j["trace"] = fs::absolute(replay_trace).string();
        cfg = parse_session_config(j, fs::path(replay_config).parent_path());
      } else {
        cfg.mode = RunMode::Replay;
        cfg.trace = fs::path(replay_trace);
      }
      cfg.session_id = !replay_id.empty() ? replay_id : fs::path(replay_trace).stem().string();
      cfg.realtime = false;
      if (!replay_out.empty()) cfg.out_dir = fs::path(replay_out);
      cfg.apply_arm();
      cfg.validate();
      // Parse the trace up front so a bad file fails before anything is written.
      (void)load_trace(*cfg.trace);
      return run_session(std::move(cfg), replay_out.empty());
    }

    if (*simulate) {
      const ExperimentPlan plan = load_plan(plan_path);
      const ExperimentResult result = run_experiment(plan);
      write_experiment(result, plan, sim_out);
      for (const auto& w : result.warnings) std::cerr << "nudged: warning: " << w << "\n";
      nlohmann::json summary;
      for (const auto& [arm, metrics] : result.report.groups) {
        for (const auto& [name, g] : metrics) summary[arm][name] = stats::to_json(g);
      }
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*analyze) {
      acfg.validate();
      auto logs = read_session_dir(sessions_dir);
      const auto meta = parse_cohort_meta(read_text_file(meta_path));
      attach_cohort_meta(logs, meta);
      const CohortReport report = cohort_report(logs, acfg);
      fs::create_directories(analyze_out);
      write_text_file(fs::path(analyze_out) / "report.json", report.to_json().dump(2) + "\n");
      write_text_file(fs::path(analyze_out) / "session_metrics.csv", report.sessions_csv());
      std::cout << report.sessions_csv();
      return 0;
    }

    if (*validate) {
      CorpusReport items = check_items(read_json_file(corpus_items));
      std::cout << "items: " << items.item_count << ", genres: " << items.genres.size()
                << ", types: " << items.types.size() << "\n";
      std::vector<std::string> errors = items.errors;
      if (!corpus_stories.empty()) {
        CorpusReport stories = check_stories(read_json_file(corpus_stories));
        std::cout << "stories: " << stories.story_count << "\n";
        errors.insert(errors.end(), stories.errors.begin(), stories.errors.end());
      }
      for (const auto& e : errors) std::cerr << "error: " << e << "\n";
      return errors.empty() ? 0 : kExitInput;
    }

    if (*serve) {
      nlohmann::json base = nlohmann::json::object();
      fs::path base_dir;
      if (!serve_config.empty()) {
        base = read_json_file(serve_config);
        base_dir = fs::path(serve_config).parent_path();
        // Catch config mistakes at startup rather than on the first start call.
        (void)parse_session_config(base, base_dir);
      }
      const ListenAddress addr =
          listen.empty() ? listen_address_from_env() : parse_listen_address(listen);
      Daemon daemon(base, base_dir);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      daemon.listen(addr);
      std::cerr << "nudged: listening on " << addr.host << ":" << daemon.port() << "\n";
      while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      daemon.stop();
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "nudged: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "nudged: io: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "nudged: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
