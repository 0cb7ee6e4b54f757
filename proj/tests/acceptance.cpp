// Acceptance runner: one PASS/FAIL line per headline criterion.
//
//   acceptance                 all criteria; PH2-backed ones report FAIL with
//                              the reason when PH2_MANIFEST is unset, and the
//                              exit status reflects only the self-contained ones
//   acceptance --require-ph2   exit 77 when PH2_MANIFEST is unset, otherwise
//                              exit non-zero on any FAIL

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>
#include <nlohmann/json.hpp>

#include "skincure/analysis.hpp"
#include "skincure/classifier.hpp"
#include "skincure/dataset.hpp"
#include "skincure/error.hpp"
#include "skincure/features.hpp"
#include "skincure/geometry.hpp"
#include "skincure/pipeline.hpp"
#include "skincure/server.hpp"
#include "skincure/synthetic.hpp"
#include "skincure/ttsb.hpp"
#include "support.hpp"

using namespace skincure;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances and thresholds.
constexpr double kTtsbAltitudeTol = 0.1;
constexpr int kPropertyTrials = 1000;
constexpr int kTransformTrials = 50;
constexpr double kTransformRelTol = 1e-6;
constexpr double kCompactnessTol = 0.1;
constexpr double kSyntheticDiceMin = 0.95;
constexpr double kPh2DiceMin = 0.80;
constexpr std::size_t kPh2MinImages = 50;
constexpr double kPh2SecondsPerImage = 3.0;
constexpr double kHairRecallMin = 0.90;
constexpr int kHairRemovalTol = 2;
constexpr int kKnnTrials = 100;
constexpr double kStageOneMin = 85.0;
constexpr double kMelanomaRecallMin = 80.0;
constexpr double kOverallMin = 75.0;
constexpr double kRowSumTol = 0.01;
constexpr double kCvMinutesMax = 10.0;
constexpr std::size_t kCvFolds = 5;
constexpr std::uint64_t kCvSeed = 7;
constexpr double kAnalyzeSecondsMax = 5.0;
constexpr int kConcurrentRequests = 8;

struct Line {
  bool pass = false;
  bool needs_ph2 = false;  // failed only because PH2 data is unavailable
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::optional<std::filesystem::path> ph2_manifest() {
  const char* v = std::getenv("PH2_MANIFEST");
  if (!v || !*v) return std::nullopt;
  return std::filesystem::path(v);
}

// ---- TTSB ------------------------------------------------------------------

double ttsb_minutes(double uv, int skin, int spf, double alt = 0.0, ttsb::EnvironmentFlags env = {}) {
  return ttsb::compute_ttsb(ttsb::TtsbInput(uv, alt, ttsb::skin_type(skin), env, ttsb::spf_level(spf))).minutes;
}

Line ttsb_examples() {
  const double a = ttsb_minutes(10, 3, 0);
  const double b = ttsb_minutes(10, 3, 15);
  const double c = ttsb_minutes(10, 3, 15, 300);
  return {a == 20.0 && std::abs(b - 74.0) < 1e-9 && std::abs(c - 30.0) <= kTtsbAltitudeTol, false,
          fmt("%.4f / %.4f / %.4f min", a, b, c)};
}

Line skin_passthrough() {
  int ok = 0;
  for (const auto& s : ttsb::skin_type_catalog()) ok += ttsb_minutes(1, s.rank, 0) == s.ts_minutes;
  return {ok == 6, false, fmt("%d/6 skin types exact", ok)};
}

Line spf_table() {
  const double expected[] = {1.0, 1.3, 2.4, 3.7, 4.5, 4.8, 7.5, 8.2, 9.5, 11.3, 12.4, 13.7};
  const auto table = ttsb::spf_table();
  int ok = 0;
  bool increasing = true;
  for (std::size_t i = 0; i < table.size() && i < 12; ++i) {
    ok += table[i].weight == expected[i] && ttsb::spfw_for(table[i].label()) == expected[i];
    if (i > 0) increasing &= table[i].weight > table[i - 1].weight;
  }
  return {table.size() == 12 && ok == 12 && increasing, false,
          fmt("%d/12 levels exact, strictly increasing: %s", ok, increasing ? "yes" : "no")};
}

Line ttsb_properties() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> uv(0.5, 13.0), alt(0.0, 20000.0), step(0.01, 2.0), hstep(1.0, 5000.0);
  std::uniform_int_distribution<int> skin(1, 6), spf(0, 11);
  std::bernoulli_distribution coin(0.3);
  auto env = [&] {
    ttsb::EnvironmentFlags e;
    for (auto f : ttsb::kAllEnvironments) e.set(f, coin(rng));
    return e;
  };
  auto minutes = [](double u, double h, int s, const ttsb::EnvironmentFlags& e, std::size_t p) {
    return ttsb::compute_ttsb(ttsb::TtsbInput(u, h, ttsb::skin_type(s), e, ttsb::spf_table()[p])).minutes;
  };
  int violations = 0;
  for (int i = 0; i < kPropertyTrials; ++i) {
    const double u = uv(rng), h = alt(rng);
    const int s = skin(rng);
    const auto p = static_cast<std::size_t>(spf(rng));
    auto e = env();
    const double base = minutes(u, h, s, e, p);
    violations += !(minutes(u + step(rng), h, s, e, p) < base);
    violations += !(minutes(u, h + hstep(rng), s, e, p) < base);
    const auto q = static_cast<std::size_t>(spf(rng));
    violations += !(minutes(u, h, s, e, std::max(p, q)) >= minutes(u, h, s, e, std::min(p, q)));
    for (auto f : ttsb::kAllEnvironments) {
      auto off = e, on = e;
      off.set(f, false);
      on.set(f, true);
      const double m_off = minutes(u, h, s, off, p), m_on = minutes(u, h, s, on, p);
      const bool softening = f == ttsb::Environment::Shade || f == ttsb::Environment::Cloud;
      violations += softening ? !(m_on >= m_off) : !(m_on <= m_off);
    }
  }
  return {violations == 0, false, fmt("%d randomized inputs, %d violations", kPropertyTrials, violations)};
}

// ---- transforms and geometry -----------------------------------------------

Line transform_oracles() {
  std::mt19937_64 rng(22);
  double worst = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  for (int t = 0; t < kTransformTrials; ++t) {
    const GrayImage img = testing_support::random_gray(8, 8, rng);
    const auto X = testing_support::brute_dft2(img);
    std::array<double, 8> bands{};
    double total = 0.0;
    for (int v = 0; v < 8; ++v) {
      for (int u = 0; u < 8; ++u) {
        if (u == 0 && v == 0) continue;
        const double fu = u > 4 ? u - 8 : u, fv = v > 4 ? v - 8 : v;
        const int b = std::min(7, static_cast<int>(std::floor(std::sqrt(fu * fu + fv * fv) / std::sqrt(32.0) * 8)));
        const double m = std::log(1.0 + std::abs(X[v][u]));
        bands[b] += m * m;
        total += m * m;
      }
    }
    const auto got = features::radial_band_energies(img);
    for (int b = 0; b < 8; ++b) worst = std::max(worst, rel(got[b], bands[b] / total));

    const auto D = testing_support::brute_dct2(img);
    const std::pair<int, int> zz[16] = {{1, 0}, {0, 1}, {0, 2}, {1, 1}, {2, 0}, {3, 0}, {2, 1}, {1, 2},
                                        {0, 3}, {0, 4}, {1, 3}, {2, 2}, {3, 1}, {4, 0}, {5, 0}, {4, 1}};
    const auto dct = features::dct_zigzag_coefficients(img);
    for (int i = 0; i < 16; ++i) worst = std::max(worst, rel(dct[i], D[zz[i].second][zz[i].first] / (std::abs(D[0][0]) + 1)));
  }
  return {worst <= kTransformRelTol, false, fmt("%d trials, worst relative error %.2e", kTransformTrials, worst)};
}

double compactness(const BinaryMask& m) {
  const double p = geom::contour_length(geom::trace_contour(m));
  return p * p / (4.0 * std::numbers::pi * static_cast<double>(count_foreground(m)));
}

BinaryMask rect(int w, int h, int x0, int y0, int rw, int rh) {
  BinaryMask m(w, h);
  for (int y = y0; y < y0 + rh; ++y) {
    for (int x = x0; x < x0 + rw; ++x) m(x, y) = 1;
  }
  return m;
}

Line geometry_oracles() {
  const double disk = compactness(synth::disk_mask(200, 200, 100, 100, 60));
  const double square = compactness(rect(100, 100, 20, 20, 40, 40));
  const double rectangle = compactness(rect(120, 100, 20, 20, 80, 40));
  const bool ok = std::abs(disk - 1.0) <= kCompactnessTol && std::abs(square - 4 / std::numbers::pi) <= kCompactnessTol &&
                  std::abs(rectangle - 4.5 / std::numbers::pi) <= kCompactnessTol;
  return {ok, false, fmt("disk %.3f, square %.3f (%.3f), 2:1 rectangle %.3f (%.3f)", disk, square,
                         4 / std::numbers::pi, rectangle, 4.5 / std::numbers::pi)};
}

// ---- segmentation and hair -------------------------------------------------

Line segmentation() {
  const RgbImage img = synth::disk_image(320, 240, 160, 120, 60, Rgb{90, 55, 35}, Rgb{222, 180, 160});
  const double disk_dice = mask_dice(segment_lesion(img).mask, synth::disk_mask(320, 240, 160, 120, 60));
  std::string detail = fmt("synthetic disk Dice %.4f", disk_dice);
  const bool disk_ok = disk_dice >= kSyntheticDiceMin;

  const auto manifest = ph2_manifest();
  if (!manifest) {
    return {false, disk_ok, detail + "; PH2 mean Dice not measured: PH2_MANIFEST unset"};
  }
  double dice_sum = 0.0, worst_seconds = 0.0;
  std::size_t n = 0, failed = 0;
  for (const auto& r : dataset::load_manifest(*manifest)) {
    if (!r.mask_path) continue;
    const RgbImage image = read_image(r.image_path);
    const BinaryMask truth = read_mask(*r.mask_path);
    const auto t0 = Clock::now();
    BinaryMask found(truth.width(), truth.height());
    try {
      const auto a = features::analyze_lesion(image);
      if (a.segmentation.mask.width() == truth.width()) found = a.segmentation.mask;
    } catch (const Error&) {
      ++failed;
    }
    worst_seconds = std::max(worst_seconds, seconds_since(t0));
    dice_sum += mask_dice(found, truth);
    ++n;
  }
  const double mean = n ? dice_sum / static_cast<double>(n) : 0.0;
  const bool ok = disk_ok && n >= kPh2MinImages && mean >= kPh2DiceMin && worst_seconds < kPh2SecondsPerImage;
  return {ok, false,
          detail + fmt("; PH2 mean Dice %.4f over %zu images (%zu unsegmented), slowest %.2f s", mean, n, failed,
                       worst_seconds)};
}

Line hair() {
  RgbImage flat(320, 240, Rgb{190, 150, 120});
  BinaryMask truth(320, 240);
  auto put = [&](int x, int y) {
    if (!flat.contains(x, y)) return;
    flat(x, y) = {35, 25, 20};
    truth(x, y) = 1;
  };
  for (int x = 10; x < 310; ++x) {
    put(x, 50);
    put(x, 51);
    put(x, 30 + x / 3);
    put(x, 31 + x / 3);
  }
  for (int y = 5; y < 235; ++y) {
    put(200, y);
    put(201, y);
  }
  std::size_t tp = 0, n = 0;
  auto tally = [&](const BinaryMask& t, const BinaryMask& f) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      n += t.pixels()[i];
      tp += t.pixels()[i] && f.pixels()[i];
    }
  };
  const BinaryMask found = detect_hair(flat);
  tally(truth, found);
  for (auto c : classify::kAllClasses) {
    for (std::uint64_t s = 1; s <= 3; ++s) {
      const auto l = synth::make_lesion(c, s, 3);
      tally(l.hair_mask, detect_hair(l.image));
    }
  }
  const double recall = static_cast<double>(tp) / static_cast<double>(n);
  int worst = 0;
  const RgbImage cleaned = remove_hair(flat, found);
  for (const Rgb& p : cleaned.pixels()) {
    worst = std::max({worst, std::abs(p.r - 190), std::abs(p.g - 150), std::abs(p.b - 120)});
  }
  const auto lesion = synth::make_lesion(classify::LesionClass::Melanoma, 2).image;
  const bool identity = remove_hair(lesion, BinaryMask(lesion.width(), lesion.height())) == lesion;
  return {recall >= kHairRecallMin && worst <= kHairRemovalTol && identity, false,
          fmt("pixel recall %.3f, flat-colour error %d levels, empty mask identity %s", recall, worst,
              identity ? "yes" : "no")};
}

// ---- classifier ------------------------------------------------------------

Line knn_oracle() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  int agree = 0;
  for (int t = 0; t < kKnnTrials; ++t) {
    const std::size_t n = 5 + rng() % 40, dim = 1 + rng() % 6;
    std::vector<classify::LabeledVector> samples(n);
    for (auto& s : samples) {
      s.values.resize(dim);
      for (double& v : s.values) v = std::round(u(rng) * 4) / 4;
      s.positive = coin(rng);
    }
    int k = 1 + 2 * static_cast<int>(rng() % 4);
    if (static_cast<std::size_t>(k) > n) k = 1;
    std::vector<double> q(dim);
    for (double& v : q) v = std::round(u(rng) * 4) / 4;
    const auto got = classify::KnnStage(samples, k).vote(q);
    const auto want = testing_support::brute_vote(samples, k, q);
    agree += got.positive == want.positive && std::abs(got.score - want.score) < 1e-12;
  }
  return {agree == kKnnTrials, false, fmt("%d/%d instances identical", agree, kKnnTrials)};
}

struct CvSummary {
  double stage_one = 0.0, melanoma = 0.0, overall = 0.0, worst_row = 0.0, minutes = 0.0;
  bool identical = false;
  std::size_t images = 0, excluded = 0;
};

std::string report_text(const classify::CrossValidationReport& r) {
  return classify::format_matrix(r.overall, "Overall") + classify::format_matrix(r.stage_one, "Classifier I") +
         classify::format_matrix(r.stage_two, "Classifier II") +
         classify::format_two_level_table(r.stage_one, r.stage_two) + classify::matrix_csv(r.overall, "overall");
}

CvSummary evaluate(const std::vector<dataset::Ph2Record>& records, int k) {
  const auto t0 = Clock::now();
  const auto feats = extract_dataset(records);
  const auto a = classify::cross_validate(feats.vectors, feats.labels, kCvFolds, kCvSeed, k);
  CvSummary s;
  s.minutes = seconds_since(t0) / 60.0;
  const auto b = classify::cross_validate(extract_dataset(records, 1).vectors, feats.labels, kCvFolds, kCvSeed, k);
  s.identical = report_text(a) == report_text(b);
  s.stage_one = 100.0 * a.stage_one.accuracy();
  s.melanoma = a.overall.percent(2, 2);
  s.overall = 100.0 * a.overall.accuracy();
  for (const auto* m : {&a.overall, &a.stage_one, &a.stage_two}) {
    for (std::size_t t = 0; t < m->classes.size(); ++t) {
      if (m->row_total(t) == 0) continue;
      double sum = 0.0;
      for (std::size_t p = 0; p < m->classes.size(); ++p) sum += m->percent(t, p);
      s.worst_row = std::max(s.worst_row, std::abs(sum - 100.0));
    }
  }
  s.images = feats.vectors.size();
  s.excluded = feats.excluded.size();
  return s;
}

std::string describe(const CvSummary& s) {
  return fmt("stage I %.1f%%, melanoma recall %.1f%%, overall %.1f%%, row-sum error %.2g, reports identical %s, "
             "%.2f min, %zu images (%zu excluded)",
             s.stage_one, s.melanoma, s.overall, s.worst_row, s.identical ? "yes" : "no", s.minutes, s.images,
             s.excluded);
}

bool meets(const CvSummary& s) {
  return s.stage_one >= kStageOneMin && s.melanoma >= kMelanomaRecallMin && s.overall >= kOverallMin &&
         s.worst_row <= kRowSumTol && s.identical && s.minutes < kCvMinutesMax;
}

Line classification(const std::filesystem::path& scratch) {
  const auto manifest = ph2_manifest();
  if (!manifest) {
    const auto records = synth::write_dataset(scratch / "cv", {20, 20, 20}, 5, 3);
    const CvSummary s = evaluate(records, classify::kDefaultK);
    return {false, meets(s), "PH2 not evaluated: PH2_MANIFEST unset; synthetic stand-in: " + describe(s)};
  }
  const CvSummary s = evaluate(dataset::load_manifest(*manifest), classify::kDefaultK);
  return {meets(s), false, fmt("PH2, %zu-fold, seed %llu, k %d: ", kCvFolds, static_cast<unsigned long long>(kCvSeed),
                               classify::kDefaultK) +
                               describe(s)};
}

// ---- service ---------------------------------------------------------------

Line service(const std::filesystem::path& scratch) {
  server::ServerConfig cfg;
  cfg.host = "127.0.0.1";
  cfg.port = 0;
  cfg.data_dir = scratch / "data";
  cfg.log_requests = false;
  auto model = std::make_shared<classify::TwoLevelModel>(testing_support::fixture_model());
  server::ApiServer api(cfg, model, nullptr);
  const int port = api.bind();
  std::thread runner([&] { api.run(); });
  api.wait_until_ready();

  auto client = [&] {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  };
  auto png = [](const RgbImage& img) {
    const auto b = encode_png(img);
    return std::string(b.begin(), b.end());
  };
  std::vector<std::string> problems;

  const std::string body = png(synth::make_lesion(classify::LesionClass::Melanoma, 900).image);
  const auto t0 = Clock::now();
  const auto single = client().Post("/api/v1/analyze", body, "image/png");
  const double single_s = seconds_since(t0);
  if (!single || single->status != 200) problems.push_back("analyze did not return 200");
  if (single_s >= kAnalyzeSecondsMax) problems.push_back(fmt("analyze took %.2f s", single_s));

  std::vector<std::future<std::pair<int, std::string>>> futures;
  for (int i = 0; i < kConcurrentRequests; ++i) {
    futures.push_back(std::async(std::launch::async, [&] {
      const auto r = client().Post("/api/v1/analyze", body, "image/png");
      return std::make_pair(r ? r->status : -1, r ? r->body : std::string());
    }));
  }
  int concurrent_ok = 0;
  for (auto& f : futures) {
    const auto [status, text] = f.get();
    concurrent_ok += status == 200 && single && text == single->body;
  }
  if (concurrent_ok != kConcurrentRequests) problems.push_back(fmt("%d/%d concurrent identical", concurrent_ok, kConcurrentRequests));

  const auto uniform = client().Post("/api/v1/analyze", png(RgbImage(200, 150, Rgb{128, 128, 128})), "image/png");
  if (!uniform || uniform->status != 422 || json::parse(uniform->body)["error"]["code"] != "NoLesionFound") {
    problems.push_back("uniform image not rejected with 422 NoLesionFound");
  }

  auto minutes = [&](const json& req) -> double {
    const auto r = client().Post("/api/v1/ttsb", req.dump(), "application/json");
    if (!r || r->status != 200) return -1.0;
    return json::parse(r->body)["minutes"].get<double>();
  };
  const double m20 = minutes({{"uv_index", 10}, {"skin_type", 3}, {"spf", 0}});
  const double m74 = minutes({{"uv_index", 10}, {"skin_type", 3}, {"spf", 15}});
  if (m20 != 20.0 || std::abs(m74 - 74.0) > 1e-9) problems.push_back(fmt("ttsb %.3f / %.3f", m20, m74));

  api.stop();
  runner.join();
  std::string detail = fmt("analyze %.2f s, %d/%d concurrent identical, ttsb %.1f / %.1f min", single_s, concurrent_ok,
                           kConcurrentRequests, m20, m74);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), false, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const bool require_ph2 = argc > 1 && std::string(argv[1]) == "--require-ph2";
  if (require_ph2 && !ph2_manifest()) {
    std::printf("PH2_MANIFEST unset; PH2 acceptance skipped\n");
    return 77;
  }
  testing_support::TempDir scratch;

  const std::vector<std::pair<const char*, std::function<Line()>>> criteria = {
      {"TTSB worked examples", ttsb_examples},
      {"Skin type passthrough at UV 1", skin_passthrough},
      {"SPF table lookups", spf_table},
      {"TTSB monotonicity properties", ttsb_properties},
      {"Transform oracles", transform_oracles},
      {"Geometry oracles", geometry_oracles},
      {"Segmentation", segmentation},
      {"Hair pipeline", hair},
      {"Classifier oracle", knn_oracle},
      {"Classification accuracy", [&] { return classification(scratch.path()); }},
      {"End-to-end service", [&] { return service(scratch.path()); }},
  };

  int hard_failures = 0, data_gaps = 0;
  for (const auto& [name, check] : criteria) {
    Line line;
    const auto t0 = Clock::now();
    try {
      line = check();
    } catch (const std::exception& e) {
      line = {false, false, std::string("threw: ") + e.what()};
    }
    std::printf("%s  %-32s %s (%.1f s)\n", line.pass ? "PASS" : "FAIL", name, line.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!line.pass) (line.needs_ph2 ? data_gaps : hard_failures)++;
  }
  std::printf("%d failed, %d unverified for lack of PH2 data\n", hard_failures, data_gaps);
  if (require_ph2) return hard_failures + data_gaps ? 1 : 0;
  return hard_failures ? 1 : 0;
}
