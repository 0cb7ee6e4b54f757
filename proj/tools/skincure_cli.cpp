// skincure: command-line entry points.
//
// Exit codes: 0 success, 2 usage or input error, 3 domain error.

#include <CLI11.hpp>

#include <pthread.h>
#include <signal.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <nlohmann/json.hpp>

#include "skincure/analysis.hpp"
#include "skincure/classifier.hpp"
#include "skincure/dataset.hpp"
#include "skincure/error.hpp"
#include "skincure/server.hpp"
#include "skincure/synthetic.hpp"
#include "skincure/ttsb.hpp"
#include "skincure/uv.hpp"

namespace {

using namespace skincure;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;

// Thrown for problems with the command line or its input files.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownSpfLevel:
    case ErrorCode::FileNotFound:
    case ErrorCode::BadHeader:
    case ErrorCode::BadLabel:
    case ErrorCode::DuplicateId:
    case ErrorCode::BadFractions:
    case ErrorCode::InsufficientData:
    case ErrorCode::CorruptModel:
    case ErrorCode::IncompatibleVersion:
    case ErrorCode::DecodeFailed:
      return true;
    default:
      return false;
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

// ---- ttsb ------------------------------------------------------------------

struct TtsbArgs {
  double uv = 0.0;
  int skin = 0;
  std::string spf = "0";
  std::vector<std::string> env;
  double altitude = 0.0;
  std::string format = "table";
};

int run_ttsb(const TtsbArgs& a) {
  ttsb::EnvironmentFlags flags;
  for (const auto& name : a.env) {
    const auto e = ttsb::parse_environment(name);
    if (!e) throw UsageError("unknown environment '" + name + "'");
    flags.set(*e, true);
  }
  if (a.uv < 0.0) throw UsageError("--uv must not be negative");
  if (a.altitude < 0.0) throw UsageError("--altitude-ft must not be negative");
  const ttsb::TtsbInput input(a.uv, a.altitude, ttsb::skin_type(a.skin), flags, ttsb::spf_level(a.spf));
  const auto out = ttsb::compute_ttsb(input);
  const bool burn = out.kind == ttsb::TtsbOutcome::Kind::BurnIn;
  if (a.format == "json") {
    std::cout << json{{"kind", burn ? "BurnIn" : "NoBurnRisk"},
                      {"minutes", burn ? json(out.minutes) : json(nullptr)},
                      {"denominator", out.denominator}}
                     .dump()
              << '\n';
  } else if (a.format == "csv") {
    std::cout << "kind,minutes\n" << (burn ? "BurnIn," + fixed(out.minutes, 1) : "NoBurnRisk,") << '\n';
  } else {
    std::cout << (burn ? fixed(out.minutes, 1) : "NO-BURN-RISK") << '\n';
  }
  return kExitOk;
}

// ---- dataset ---------------------------------------------------------------

int run_verify(const std::string& manifest, const std::string& format) {
  const auto records = dataset::load_manifest(manifest);
  const auto report = dataset::verify_dataset(records);
  if (format == "json") {
    std::cout << report.to_json();
  } else if (format == "csv") {
    std::cout << report.to_csv();
  } else {
    std::cout << report.to_text();
  }
  return report.missing_files.empty() && report.unreadable_files.empty() ? kExitOk : kExitDomain;
}

int run_import(const std::string& root, const std::string& out) {
  const auto records = dataset::import_ph2(root);
  dataset::write_manifest(out, records);
  std::cout << "wrote " << records.size() << " records to " << out << '\n';
  return kExitOk;
}

int run_synth(const std::string& out, std::array<std::size_t, 3> counts, std::uint64_t seed, std::size_t hair_every) {
  const auto records = synth::write_dataset(out, counts, seed, hair_every);
  std::cout << "wrote " << records.size() << " synthetic images and " << out << "/manifest.csv\n";
  return kExitOk;
}

int run_split(const std::string& manifest, const std::vector<double>& fractions, std::uint64_t seed,
              const std::string& out_dir) {
  const auto records = dataset::load_manifest(manifest);
  const auto parts = dataset::stratified_split(records, fractions, seed);
  std::filesystem::create_directories(out_dir);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto path = std::filesystem::path(out_dir) / ("split_" + std::to_string(i) + ".csv");
    dataset::write_manifest(path, parts[i]);
    std::cout << path.string() << ' ' << parts[i].size() << '\n';
  }
  return kExitOk;
}

// ---- train / eval ----------------------------------------------------------

DatasetFeatures load_features(const std::string& manifest, unsigned workers) {
  const auto records = dataset::load_manifest(manifest);
  auto feats = extract_dataset(records, workers);
  for (const auto& [id, reason] : feats.excluded) std::cerr << "excluded " << id << ": " << reason << '\n';
  return feats;
}

int run_train(const std::string& manifest, const std::string& out_model, int k, unsigned workers) {
  const auto feats = load_features(manifest, workers);
  const auto model = classify::train(feats.vectors, feats.labels, k);
  classify::save_model(model, out_model);
  std::cout << "trained on " << feats.vectors.size() << " images (" << feats.excluded.size()
            << " excluded), k=" << k << ", model written to " << out_model << '\n';
  return kExitOk;
}

json matrix_json(const classify::ConfusionMatrix& m) {
  json rows = json::array();
  for (std::size_t t = 0; t < m.classes.size(); ++t) {
    json pct = json::array();
    for (std::size_t p = 0; p < m.classes.size(); ++p) pct.push_back(std::round(m.percent(t, p) * 100.0) / 100.0);
    rows.push_back({{"truth", m.classes[t]}, {"counts", m.counts[t]}, {"percent", pct}});
  }
  return {{"classes", m.classes}, {"rows", rows}, {"accuracy", m.accuracy()}};
}

int run_eval(const std::string& manifest, std::size_t folds, std::uint64_t seed, int k, const std::string& format,
             const std::string& out, unsigned workers) {
  const auto feats = load_features(manifest, workers);
  const auto report = classify::cross_validate(feats.vectors, feats.labels, folds, seed, k);
  std::ostringstream text;
  if (format == "json") {
    json excluded = json::array();
    for (const auto& [id, reason] : feats.excluded) excluded.push_back({{"image_id", id}, {"reason", reason}});
    text << json{{"folds", folds},
                 {"seed", seed},
                 {"k", k},
                 {"images", feats.vectors.size()},
                 {"excluded", excluded},
                 {"overall", matrix_json(report.overall)},
                 {"stage_one", matrix_json(report.stage_one)},
                 {"stage_two", matrix_json(report.stage_two)},
                 {"reference_diagonal", {{"normal", 96.3}, {"atypical", 95.7}, {"melanoma", 97.5}}}}
                .dump(2)
         << '\n';
  } else if (format == "csv") {
    text << "matrix,truth,predicted,count,percent\n"
         << classify::matrix_csv(report.overall, "overall") << classify::matrix_csv(report.stage_one, "stage_one")
         << classify::matrix_csv(report.stage_two, "stage_two");
  } else {
    text << "Cross-validation: " << folds << " folds, seed " << seed << ", k " << k << ", " << feats.vectors.size()
         << " images, " << feats.excluded.size() << " excluded\n\n";
    text << classify::format_matrix(report.overall, "Overall") << '\n'
         << classify::format_matrix(report.stage_one, "Classifier I") << '\n'
         << classify::format_matrix(report.stage_two, "Classifier II (abnormal lesions)") << '\n'
         << classify::format_two_level_table(report.stage_one, report.stage_two) << '\n';
    text << "Per-class accuracy (%): Normal " << fixed(report.overall.percent(0, 0), 1) << "  Atypical "
         << fixed(report.overall.percent(1, 1), 1) << "  Melanoma " << fixed(report.overall.percent(2, 2), 1) << '\n'
         << "Stage I accuracy (%): " << fixed(100.0 * report.stage_one.accuracy(), 1)
         << "  Overall accuracy (%): " << fixed(100.0 * report.overall.accuracy(), 1) << '\n'
         << "Published reference diagonal (%): Normal 96.3  Atypical 95.7  Melanoma 97.5\n";
    for (const auto& [id, reason] : feats.excluded) text << "excluded " << id << ": " << reason << '\n';
  }
  if (out.empty()) {
    std::cout << text.str();
  } else {
    write_text(out, text.str());
  }
  return kExitOk;
}

// ---- analyze ---------------------------------------------------------------

int run_analyze(const std::string& image, const std::string& model_path, const std::string& emit_mask,
                const std::string& format) {
  const auto model = classify::load_model(model_path);
  const auto bytes = read_file_bytes(image);
  const auto outcome = analyze_image(bytes, model);
  if (!emit_mask.empty()) write_file(emit_mask, encode_mask_png(outcome.detail.segmentation.mask));
  const auto& r = outcome.response;
  if (format == "json") {
    std::cout << to_json(r) << '\n';
  } else if (format == "csv") {
    std::cout << "class,stage_one_score,stage_two_score,area_px,bbox_x,bbox_y,bbox_width,bbox_height,advisory\n"
              << classify::to_string(r.label) << ',' << fixed(r.stage_one_score, 6) << ','
              << (r.stage_two_score ? fixed(*r.stage_two_score, 6) : "") << ',' << r.area_px << ',' << r.bbox.x0
              << ',' << r.bbox.y0 << ',' << r.bbox.width() << ',' << r.bbox.height() << ','
              << (r.advisory ? "true" : "false") << '\n';
  } else {
    std::cout << "class            " << classify::to_string(r.label) << '\n'
              << "stage I score    " << fixed(r.stage_one_score, 4) << '\n'
              << "stage II score   " << (r.stage_two_score ? fixed(*r.stage_two_score, 4) : "-") << '\n'
              << "lesion area px   " << r.area_px << '\n'
              << "bbox             " << r.bbox.x0 << ',' << r.bbox.y0 << ' ' << r.bbox.width() << 'x'
              << r.bbox.height() << '\n'
              << "advisory         " << (r.advisory ? "seek medical advice" : "none") << '\n';
  }
  return kExitOk;
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string host;
  int port = -1;
  std::string model;
  std::string data_dir;
  std::string uv_source;
  std::string uv_fixture;
  std::string uv_url;
  std::string tz;
  std::string static_dir;
  bool quiet = false;
};

int run_serve(const ServeArgs& a) {
  auto cfg = server::ServerConfig::from_env();
  if (!a.host.empty()) cfg.host = a.host;
  if (a.port >= 0) cfg.port = a.port;
  if (!a.model.empty()) cfg.model_path = a.model;
  if (!a.data_dir.empty()) cfg.data_dir = a.data_dir;
  if (!a.tz.empty()) cfg.tz = a.tz;
  if (!a.static_dir.empty()) cfg.static_dir = a.static_dir;
  if (!a.uv_source.empty() || !a.uv_fixture.empty() || !a.uv_url.empty()) {
    if (!cfg.uv) cfg.uv = uv::UvSourceConfig{};
    if (!a.uv_source.empty()) cfg.uv->source = a.uv_source;
    if (!a.uv_fixture.empty()) cfg.uv->fixture_path = a.uv_fixture;
    if (!a.uv_url.empty()) cfg.uv->http_url = a.uv_url;
    if (a.uv_source.empty() && !a.uv_url.empty() && a.uv_fixture.empty()) cfg.uv->source = "http";
  }
  if (cfg.uv) cfg.uv->tz = cfg.tz;
  cfg.log_requests = !a.quiet;

  // Signals are taken by a dedicated thread; every other thread blocks them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  auto srv = server::ApiServer::from_config(cfg);
  const int port = srv->bind();
  std::cout << json{{"event", "listening"}, {"host", cfg.host}, {"port", port}}.dump() << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    srv->stop();
  });
  const bool ok = srv->run();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cout << json{{"event", "stopped"}}.dump() << std::endl;
  return ok ? kExitOk : kExitDomain;
}

// ---- uv --------------------------------------------------------------------

int run_uv(bool day, double lat, double lon, const std::string& date_text) {
  const auto cfg = uv::UvSourceConfig::from_env();
  const auto source = uv::make_uv_source(cfg);
  const auto loc = uv::GeoPoint::make(lat, lon);
  if (day) {
    uv::Date date = uv::local_date(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()), cfg.tz);
    if (!date_text.empty()) {
      const auto d = uv::parse_date(date_text);
      if (!d) throw UsageError("--date must be YYYY-MM-DD");
      date = *d;
    }
    const auto curve = source->day_curve(loc, date);
    std::cout << "hour,uv_index\n";
    for (std::size_t i = 0; i < curve.samples.size(); ++i) {
      std::cout << uv::kFirstCurveHour + static_cast<int>(i) << ',' << fixed(curve.samples[i], 2) << '\n';
    }
  } else {
    const auto obs =
        source->current_uv(loc, std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
    std::cout << fixed(obs.uv_index, 2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sun-exposure and dermoscopy lesion analysis toolkit"};
  app.require_subcommand(1);
  std::string format = "table";
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
  };

  TtsbArgs ttsb_args;
  auto* ttsb_cmd = app.add_subcommand("ttsb", "Minutes until sunburn");
  ttsb_cmd->add_option("--uv", ttsb_args.uv, "UV index")->required();
  ttsb_cmd->add_option("--skin", ttsb_args.skin, "Skin type rank 1-6")->required();
  ttsb_cmd->add_option("--spf", ttsb_args.spf, "SPF level (0, 5, ..., 50, 50+)");
  ttsb_cmd->add_option("--env", ttsb_args.env, "Environment flag (repeatable)");
  ttsb_cmd->add_option("--altitude-ft", ttsb_args.altitude, "Altitude in feet");
  add_format(ttsb_cmd);

  auto* dataset_cmd = app.add_subcommand("dataset", "Manifest tools");
  dataset_cmd->require_subcommand(1);
  std::string manifest;
  auto* verify_cmd = dataset_cmd->add_subcommand("verify", "Check class counts, resolution and files");
  verify_cmd->add_option("--manifest", manifest)->required();
  add_format(verify_cmd);

  std::string ph2_root, out;
  auto* import_cmd = dataset_cmd->add_subcommand("import-ph2", "Convert an unpacked PH2 release to a manifest");
  import_cmd->add_option("--root", ph2_root, "Directory holding PH2_dataset.txt")->required();
  import_cmd->add_option("--out", out, "Manifest to write")->required();

  std::array<std::size_t, 3> counts{10, 10, 10};
  std::uint64_t seed = 7;
  std::size_t hair_every = 0;
  auto* synth_cmd = dataset_cmd->add_subcommand("synth", "Write a synthetic dataset with manifest");
  synth_cmd->add_option("--out", out, "Output directory")->required();
  synth_cmd->add_option("--normal", counts[0]);
  synth_cmd->add_option("--atypical", counts[1]);
  synth_cmd->add_option("--melanoma", counts[2]);
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--hair-every", hair_every, "Every n-th image gets hairs (0 = none)");

  std::vector<double> fractions;
  auto* split_cmd = dataset_cmd->add_subcommand("split", "Stratified split into manifests");
  split_cmd->add_option("--manifest", manifest)->required();
  split_cmd->add_option("--fractions", fractions)->required()->delimiter(',');
  split_cmd->add_option("--seed", seed);
  split_cmd->add_option("--out", out, "Output directory")->required();

  int k = classify::kDefaultK;
  unsigned workers = 0;
  std::string model_path;
  auto* train_cmd = app.add_subcommand("train", "Train the two-level classifier");
  train_cmd->add_option("--manifest", manifest)->required();
  train_cmd->add_option("--out-model", model_path)->required();
  train_cmd->add_option("--k", k);
  train_cmd->add_option("--workers", workers);

  std::size_t folds = 5;
  auto* eval_cmd = app.add_subcommand("eval", "Stratified cross-validation report");
  eval_cmd->add_option("--manifest", manifest)->required();
  eval_cmd->add_option("--folds", folds);
  eval_cmd->add_option("--seed", seed);
  eval_cmd->add_option("--k", k);
  eval_cmd->add_option("--out", out, "Write the report here instead of stdout");
  eval_cmd->add_option("--workers", workers);
  add_format(eval_cmd);

  std::string image, emit_mask;
  auto* analyze_cmd = app.add_subcommand("analyze", "Classify one image");
  analyze_cmd->add_option("--image", image)->required();
  analyze_cmd->add_option("--model", model_path)->required();
  analyze_cmd->add_option("--emit-mask", emit_mask, "Write the lesion mask PNG here");
  add_format(analyze_cmd);

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  serve_cmd->add_option("--host", serve_args.host);
  serve_cmd->add_option("--port", serve_args.port);
  serve_cmd->add_option("--model", serve_args.model);
  serve_cmd->add_option("--data-dir", serve_args.data_dir);
  serve_cmd->add_option("--uv-source", serve_args.uv_source);
  serve_cmd->add_option("--uv-fixture", serve_args.uv_fixture);
  serve_cmd->add_option("--uv-url", serve_args.uv_url);
  serve_cmd->add_option("--tz", serve_args.tz);
  serve_cmd->add_option("--static-dir", serve_args.static_dir);
  serve_cmd->add_flag("--quiet", serve_args.quiet, "No request logs");

  double lat = 0.0, lon = 0.0;
  std::string date;
  auto* uv_cmd = app.add_subcommand("uv", "Query the configured UV provider");
  uv_cmd->require_subcommand(1);
  auto* uv_now = uv_cmd->add_subcommand("current", "UV index now");
  auto* uv_day = uv_cmd->add_subcommand("day", "6 AM - 6 PM curve");
  for (auto* sub : {uv_now, uv_day}) {
    sub->add_option("--lat", lat)->required();
    sub->add_option("--lon", lon)->required();
  }
  uv_day->add_option("--date", date);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ttsb_cmd) {
      ttsb_args.format = format;
      return run_ttsb(ttsb_args);
    }
    if (*verify_cmd) return run_verify(manifest, format);
    if (*import_cmd) return run_import(ph2_root, out);
    if (*synth_cmd) return run_synth(out, counts, seed, hair_every);
    if (*split_cmd) return run_split(manifest, fractions, seed, out);
    if (*train_cmd) return run_train(manifest, model_path, k, workers);
    if (*eval_cmd) return run_eval(manifest, folds, seed, k, format, out, workers);
    if (*analyze_cmd) return run_analyze(image, model_path, emit_mask, format);
    if (*serve_cmd) return run_serve(serve_args);
    if (*uv_now) return run_uv(false, lat, lon, date);
    if (*uv_day) return run_uv(true, lat, lon, date);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitUsage : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}
