#include "cli.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vidattack/detector.hpp"
#include "vidattack/effects.hpp"
#include "vidattack/error.hpp"
#include "vidattack/eval.hpp"
#include "vidattack/format.hpp"
#include "vidattack/frameio.hpp"
#include "vidattack/netsim.hpp"
#include "vidattack/synth.hpp"

namespace vidattack::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Sweep preset for duration curves.
const std::vector<std::size_t> kDurationSweep = {100, 200, 300, 400, 500};

std::string read_text(const fs::path& p) {
  auto bytes = frameio::read_file(p);
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

fs::path manifest_path(const std::string& in) {
  fs::path p(in);
  if (fs::is_directory(p)) p /= "manifest.json";
  return p;
}

void write_run_json(const fs::path& path, const json& config) {
  frameio::write_text(path, config.dump(2) + "\n");
}

// run.json for a directory output, <file>.run.json for a single-file output.
fs::path run_json_for_file(const fs::path& output) {
  return output.parent_path() / (output.filename().string() + ".run.json");
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) | rd();
}

effects::LabelMode parse_label_mode(const std::string& s) {
  if (s == "realtime") return effects::LabelMode::Realtime;
  if (s == "displayed") return effects::LabelMode::Displayed;
  throw Error(ErrorKind::InvalidArgument, "--labels must be realtime or displayed");
}

std::pair<std::uint32_t, std::uint32_t> parse_size(const std::string& s) {
  auto x = s.find('x');
  if (x == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--size must be WxH");
  try {
    std::size_t used = 0;
    auto w = std::stoul(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("w");
    auto rest = s.substr(x + 1);
    auto h = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("h");
    return {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "--size must be WxH, got '" + s + "'");
  }
}

std::pair<std::size_t, std::size_t> parse_span_flag(const std::string& s) {
  auto c = s.find(':');
  if (c == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--anomaly must be start:len");
  try {
    return {std::stoull(s.substr(0, c)), std::stoull(s.substr(c + 1))};
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "--anomaly must be start:len, got '" + s + "'");
  }
}

std::string format_percent(double p) { return format_double(p); }

std::pair<std::string, std::string> split_named(const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos) return {fs::path(s).stem().string(), s};
  return {s.substr(0, eq), s.substr(eq + 1)};
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::uint64_t seed = 0;
  std::size_t frames = 400;
  std::string size = "64x64";
  std::string fps = "25";
  std::uint32_t object_size = 8;
  std::uint32_t velocity = 1;
  std::uint32_t noise = 24;
  std::uint32_t sensor_noise = 0;
  std::string anomaly;
  std::string anomaly_kind = "fast";
  std::uint32_t anomaly_velocity = 4;
  std::string format = "pgm";
  std::string out;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  synth::SynthConfig c;
  c.seed = o.seed;
  c.n_frames = o.frames;
  std::tie(c.width, c.height) = parse_size(o.size);
  c.fps = parse_rational(o.fps);
  c.object_size = o.object_size;
  c.normal_velocity = o.velocity;
  c.background_noise_amp = o.noise;
  c.sensor_noise_amp = o.sensor_noise;
  json anomaly = nullptr;
  if (!o.anomaly.empty()) {
    auto [start, len] = parse_span_flag(o.anomaly);
    synth::Anomaly a{start, len, synth::AnomalyKind::FastMotion, o.anomaly_velocity};
    if (o.anomaly_kind == "appearance") {
      a.kind = synth::AnomalyKind::Appearance;
    } else if (o.anomaly_kind != "fast") {
      throw Error(ErrorKind::InvalidArgument, "--anomaly-kind must be fast or appearance");
    }
    c.anomaly = a;
    anomaly = {{"start", start}, {"length", len}, {"kind", o.anomaly_kind}, {"velocity", o.anomaly_velocity}};
  }
  const auto format = frameio::parse_format(o.format);
  auto video = synth::generate(c);

  json config{{"command", "synth"},    {"seed", c.seed},
              {"frames", c.n_frames},  {"width", c.width},
              {"height", c.height},    {"fps", to_string(c.fps)},
              {"object_size", c.object_size}, {"velocity", c.normal_velocity},
              {"noise", c.background_noise_amp}, {"sensor_noise", c.sensor_noise_amp},
              {"anomaly", anomaly},    {"format", frameio::to_string(format)},
              {"out", o.out}};
  frameio::save_sequence(video, o.out, format, json{{"synth", config}}.dump());
  write_run_json(fs::path(o.out) / "run.json", config);
  out << "wrote " << video.size() << " frames to " << o.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AttackOptions {
  std::string in;
  std::string type = "sff";
  std::optional<std::size_t> onset;
  std::size_t duration = 0;
  std::size_t k = 1;
  std::size_t period = 10;
  std::uint32_t slow_factor = 2;
  std::uint32_t lowres_factor = 4;
  std::size_t slow_len = 0;
  std::optional<std::uint64_t> seed;
  std::string labels = "realtime";
  std::string format = "pgm";
  bool sweep = false;
  std::string out;
};

json attack_to_json(const effects::AttackSpec& spec, std::size_t onset, const AttackOptions& o) {
  json j{{"command", "attack"}, {"in", o.in}, {"type", effects::to_string(spec.kind)}};
  switch (spec.kind) {
    case effects::AttackKind::Replicate:
      j["k"] = spec.k;
      j["period"] = spec.period;
      break;
    case effects::AttackKind::ExtendedFreeze:
      j["slow_len"] = spec.slow_len;
      j["slow_factor"] = spec.slow_factor;
      j["onset"] = onset;
      break;
    default:
      j["onset"] = onset;
      j["onset_drawn"] = !spec.onset.has_value();
      j["duration"] = spec.duration;
      j["slow_factor"] = spec.slow_factor;
      j["lowres_factor"] = spec.lowres_factor;
      break;
  }
  j["seed"] = spec.seed;
  j["labels"] = o.labels;
  j["format"] = o.format;
  j["out"] = o.out;
  return j;
}

void write_attack(const VideoSequence& src, const effects::AttackSpec& spec, std::size_t onset, const AttackOptions& o,
                  const fs::path& out_dir, const json& echo) {
  effects::AttackSpec resolved = spec;
  resolved.onset = onset;
  auto trace = effects::build_trace(resolved, src.size(), src.labels);
  auto attacked = effects::apply_trace(src, trace, parse_label_mode(o.labels));
  frameio::save_sequence(attacked, out_dir, frameio::parse_format(o.format), json{{"attack", echo}}.dump());
  frameio::write_text(out_dir / "trace.csv", effects::trace_to_csv(trace));
  write_run_json(out_dir / "run.json", echo);
}

int cmd_attack(const AttackOptions& o, std::ostream& out) {
  parse_label_mode(o.labels);
  const auto video = frameio::load_sequence(manifest_path(o.in));

  effects::AttackSpec spec;
  spec.kind = effects::parse_attack_kind(o.type);
  spec.onset = o.onset;
  spec.duration = o.duration;
  spec.k = o.k;
  spec.period = o.period;
  spec.slow_factor = o.slow_factor;
  spec.lowres_factor = o.lowres_factor;
  spec.seed = o.seed ? *o.seed : fresh_seed();
  if (spec.slow_factor < 1 || spec.lowres_factor < 1) throw Error(ErrorKind::InvalidArgument, "factors must be >= 1");

  if (spec.kind == effects::AttackKind::ExtendedFreeze) {
    auto runs = positive_runs(video.labels);
    if (runs.empty()) throw Error(ErrorKind::NoAnomaly, "extended freeze needs a labelled anomaly");
    spec.slow_len = o.slow_len > 0 ? o.slow_len : (runs.front().length() + 2) / 3;
    const std::size_t onset = runs.front().begin >= spec.slow_len ? runs.front().begin - spec.slow_len : 0;
    write_attack(video, spec, onset, o, o.out, attack_to_json(spec, onset, o));
    out << "extfreeze: slow " << spec.slow_len << ", freeze " << 3 * spec.slow_len << " from tick "
        << runs.front().begin << "\n";
    return kExitOk;
  }

  if (o.sweep) {
    if (spec.kind == effects::AttackKind::Replicate) throw Error(ErrorKind::InvalidArgument, "--sweep applies to timed attacks");
    // one onset for the whole sweep so the attack spans are nested
    effects::AttackSpec longest = spec;
    longest.duration = kDurationSweep.back();
    const std::size_t onset = effects::resolve_onset(longest, video.size());
    for (auto d : kDurationSweep) {
      spec.duration = d;
      const fs::path dir = fs::path(o.out) / ("D" + std::to_string(d));
      auto echo = attack_to_json(spec, onset, o);
      echo["sweep"] = kDurationSweep;
      write_attack(video, spec, onset, o, dir, echo);
    }
    out << "sweep of " << kDurationSweep.size() << " durations from onset " << onset << " written to " << o.out << "\n";
    return kExitOk;
  }

  const std::size_t onset = spec.kind == effects::AttackKind::Replicate ? 0 : effects::resolve_onset(spec, video.size());
  write_attack(video, spec, onset, o, o.out, attack_to_json(spec, onset, o));
  out << effects::to_string(spec.kind) << " attack written to " << o.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct NetsimOptions {
  std::string in;
  std::string sim;
  std::string labels = "realtime";
  std::string format = "pgm";
  std::string out;
};

int cmd_netsim(const NetsimOptions& o, std::ostream& out) {
  const auto mode = parse_label_mode(o.labels);
  if (!fs::exists(o.sim)) throw Error(ErrorKind::InvalidConfig, "SimConfig not found: " + o.sim);
  const auto video = frameio::load_sequence(manifest_path(o.in));
  const auto config = netsim::parse_config(read_text(o.sim), video.fps);
  auto [trace, log] = netsim::simulate(config, video.size());
  auto attacked = effects::apply_trace(video, trace, mode);

  json echo{{"command", "netsim"}, {"in", o.in}, {"sim", o.sim}, {"labels", o.labels}, {"format", o.format},
            {"out", o.out}, {"config", json::parse(netsim::config_to_json(config))}};
  const fs::path dir(o.out);
  frameio::save_sequence(attacked, dir, frameio::parse_format(o.format), json{{"netsim", echo}}.dump());
  frameio::write_text(dir / "events.csv", netsim::log_to_csv(log));
  frameio::write_text(dir / "trace.csv", effects::trace_to_csv(trace));
  write_run_json(dir / "run.json", echo);
  for (const auto& e : netsim::trace_to_effects_summary(log)) {
    out << effects::to_string(e.tag) << " [" << e.span.begin << ", " << e.span.end << ")\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ScoreOptions {
  std::string in;
  std::string predictor = "prev";
  double clamp = detector::kDefaultClampDb;
  std::string out;
};

int cmd_score(const ScoreOptions& o, std::ostream& out) {
  const auto predictor = detector::parse_predictor(o.predictor);
  if (!(o.clamp > 0.0)) throw Error(ErrorKind::InvalidArgument, "--clamp must be positive");
  const auto video = frameio::load_sequence(manifest_path(o.in));
  const auto series = detector::score_video(video, predictor, o.clamp);
  const fs::path path(o.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  frameio::write_text(path, detector::series_to_csv(series, video.labels));
  write_run_json(run_json_for_file(path),
                 {{"command", "score"}, {"in", o.in}, {"predictor", detector::to_string(predictor)},
                  {"clamp", o.clamp}, {"out", o.out}});
  out << "scored " << series.size() << " frames\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  std::vector<std::string> scores;
  std::vector<std::string> traces;
  std::optional<double> tau;
  double percentile = 95.0;
  std::string aggregation = "micro";
  std::string report;
  std::string roc_dir;
};

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  struct Run {
    std::string name;
    std::string path;
    detector::ScoreTable table;
  };
  std::vector<Run> runs;
  for (const auto& s : o.scores) {
    auto [name, path] = split_named(s);
    for (const auto& r : runs) {
      if (r.name == name) throw Error(ErrorKind::InvalidArgument, "duplicate run name '" + name + "'");
    }
    runs.push_back({name, path, detector::series_from_csv(read_text(path))});
  }
  if (runs.empty()) throw Error(ErrorKind::InvalidArgument, "--scores is required");

  std::map<std::string, effects::DisplayTrace> traces;
  for (const auto& t : o.traces) {
    std::string name, path;
    if (t.find('=') == std::string::npos) {
      name = runs.back().name;
      path = t;
    } else {
      std::tie(name, path) = split_named(t);
    }
    traces[name] = effects::trace_from_csv(read_text(path));
  }

  eval::Aggregation agg = eval::Aggregation::Micro;
  if (o.aggregation == "macro") {
    agg = eval::Aggregation::Macro;
  } else if (o.aggregation != "micro") {
    throw Error(ErrorKind::InvalidArgument, "--aggregation must be micro or macro");
  }

  eval::EvalReport report;
  if (o.tau) {
    report.threshold = *o.tau;
    report.threshold_source = "--tau";
  } else {
    report.threshold = eval::percentile(runs.front().table.series.score, o.percentile);
    report.threshold_source = "p" + format_percent(o.percentile) + " of " + runs.front().name + " scores";
  }

  json echo{{"command", "eval"}, {"scores", o.scores}, {"traces", o.traces}, {"tau", report.threshold},
            {"percentile", o.percentile}, {"aggregation", o.aggregation}, {"report", o.report}};
  report.config_json = echo.dump();

  std::vector<std::pair<std::string, eval::RocResult>> table;
  for (const auto& r : runs) {
    eval::RunReport rr;
    rr.name = r.name;
    const eval::ScoredVideo video{r.table.series.score, &r.table.labels};
    rr.roc = eval::roc_auc(std::span(&video, 1), agg);
    rr.alarms = eval::false_alarms(r.table.series, r.table.labels, report.threshold);
    rr.masking = eval::masking_report(r.table.series, r.table.labels, report.threshold);
    if (auto it = traces.find(r.name); it != traces.end()) rr.effects = eval::effect_summary(r.table.series, it->second);
    if (!o.roc_dir.empty()) {
      fs::create_directories(o.roc_dir);
      frameio::write_text(fs::path(o.roc_dir) / (r.name + "_roc.csv"), eval::roc_to_csv(rr.roc));
    }
    table.emplace_back(r.name, rr.roc);
    report.runs.push_back(std::move(rr));
  }
  for (const auto& [name, _] : traces) {
    if (std::none_of(runs.begin(), runs.end(), [&](const Run& r) { return r.name == name; })) {
      throw Error(ErrorKind::InvalidArgument, "--trace names unknown run '" + name + "'");
    }
  }

  if (table.size() >= 2) {
    out << eval::compare_runs(table).to_text();
  } else {
    out << table.front().first << " AUC " << table.front().second.auc << "\n";
  }
  if (!o.report.empty()) {
    const fs::path path(o.report);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    frameio::write_text(path, eval::report_to_json(report));
    write_run_json(run_json_for_file(path), echo);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"vidattack: adversarial stream-degradation datasets and anomaly-detector evaluation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  SynthOptions so;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic surveillance sequence");
  synth_cmd->add_option("--seed", so.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--frames", so.frames, "Number of frames")->capture_default_str();
  synth_cmd->add_option("--size", so.size, "Frame size WxH")->capture_default_str();
  synth_cmd->add_option("--fps", so.fps, "Frame rate, N or N/D")->capture_default_str();
  synth_cmd->add_option("--object-size", so.object_size, "Side of the moving square (px)")->capture_default_str();
  synth_cmd->add_option("--velocity", so.velocity, "Normal object speed (px/frame)")->capture_default_str();
  synth_cmd->add_option("--noise", so.noise, "Static background texture amplitude")->capture_default_str();
  synth_cmd->add_option("--sensor-noise", so.sensor_noise, "Per-frame sensor noise amplitude")->capture_default_str();
  synth_cmd->add_option("--anomaly", so.anomaly, "Anomaly span start:len");
  synth_cmd->add_option("--anomaly-kind", so.anomaly_kind, "fast | appearance")->capture_default_str();
  synth_cmd->add_option("--anomaly-velocity", so.anomaly_velocity, "FastMotion speed (px/frame)")->capture_default_str();
  synth_cmd->add_option("--format", so.format, "pgm | y4m")->capture_default_str();
  synth_cmd->add_option("--out", so.out, "Output directory")->required();

  AttackOptions ao;
  auto* attack_cmd = app.add_subcommand("attack", "Apply a scripted stream-degradation attack");
  attack_cmd->add_option("--in", ao.in, "Input manifest (or its directory)")->required();
  attack_cmd->add_option("--type", ao.type, "sff | lowres | combined | replicate | extfreeze")->capture_default_str();
  attack_cmd->add_option("--onset", ao.onset, "Attack onset tick (drawn from --seed when omitted)");
  attack_cmd->add_option("--duration", ao.duration, "Attack duration D in ticks")->capture_default_str();
  attack_cmd->add_option("--k", ao.k, "Replicated frames per period")->capture_default_str();
  attack_cmd->add_option("--period", ao.period, "Replication period")->capture_default_str();
  attack_cmd->add_option("--slow-factor", ao.slow_factor, "Slow-motion factor f")->capture_default_str();
  attack_cmd->add_option("--lowres-factor", ao.lowres_factor, "Low-resolution block size r")->capture_default_str();
  attack_cmd->add_option("--slow-len", ao.slow_len, "Extended-freeze slow length s (0 = smallest covering)")
      ->capture_default_str();
  attack_cmd->add_option("--seed", ao.seed, "Seed for the onset draw (generated and recorded when omitted)");
  attack_cmd->add_option("--labels", ao.labels, "realtime | displayed")->capture_default_str();
  attack_cmd->add_option("--format", ao.format, "pgm | y4m")->capture_default_str();
  attack_cmd->add_flag("--sweep", ao.sweep, "Write one attacked copy per duration in {100,...,500} under <out>/D<d>");
  attack_cmd->add_option("--out", ao.out, "Output directory")->required();

  NetsimOptions no;
  auto* netsim_cmd = app.add_subcommand("netsim", "Replay a sequence through the simulated camera network");
  netsim_cmd->add_option("--in", no.in, "Input manifest (or its directory)")->required();
  netsim_cmd->add_option("--sim", no.sim, "SimConfig JSON")->required();
  netsim_cmd->add_option("--labels", no.labels, "realtime | displayed")->capture_default_str();
  netsim_cmd->add_option("--format", no.format, "pgm | y4m")->capture_default_str();
  netsim_cmd->add_option("--out", no.out, "Output directory")->required();

  ScoreOptions sc;
  auto* score_cmd = app.add_subcommand("score", "Score a sequence with a prediction-based PSNR detector");
  score_cmd->add_option("--in", sc.in, "Input manifest (or its directory)")->required();
  score_cmd->add_option("--predictor", sc.predictor, "prev | linear")->capture_default_str();
  score_cmd->add_option("--clamp", sc.clamp, "PSNR clamp in dB")->capture_default_str();
  score_cmd->add_option("--out", sc.out, "Output scores CSV")->required();

  EvalOptions eo;
  auto* eval_cmd = app.add_subcommand("eval", "AUC table, false alarms, effect summaries and masking verdicts");
  eval_cmd->add_option("--scores", eo.scores, "Scores CSV as name=path; repeat, baseline first")->required();
  eval_cmd->add_option("--trace", eo.traces, "Trace CSV as name=path (bare path: last run); repeatable");
  eval_cmd->add_option("--tau", eo.tau, "Alarm threshold in [0,1] (default: percentile of the baseline scores)");
  eval_cmd->add_option("--percentile", eo.percentile, "Percentile used when --tau is omitted")->capture_default_str();
  eval_cmd->add_option("--aggregation", eo.aggregation, "micro | macro")->capture_default_str();
  eval_cmd->add_option("--report", eo.report, "Report JSON path");
  eval_cmd->add_option("--roc-csv", eo.roc_dir, "Directory for per-run ROC point CSVs");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*synth_cmd) return cmd_synth(so, out);
    if (*attack_cmd) return cmd_attack(ao, out);
    if (*netsim_cmd) return cmd_netsim(no, out);
    if (*score_cmd) return cmd_score(sc, out);
    if (*eval_cmd) return cmd_eval(eo, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::IoFailure ? kExitIo : kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace vidattack::cli
