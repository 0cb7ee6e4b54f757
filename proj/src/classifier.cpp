#include "skincure/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <nlohmann/json.hpp>

#include "skincure/error.hpp"
#include "skincure/image.hpp"
#include "skincure/random.hpp"

namespace skincure::classify {
namespace {

using features::FeatureVector;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void check_layout(const TwoLevelModel& model, const FeatureVector& v) {
  if (v.layout_version != model.layout_version || v.values.size() != model.stats.mean.size()) {
    throw Error(ErrorCode::LayoutMismatch, "feature vector (layout " + std::to_string(v.layout_version) + ", " +
                                               std::to_string(v.values.size()) + " values) does not fit the model");
  }
}

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

nlohmann::json samples_to_json(const KnnStage& stage) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stage.samples()) arr.push_back({{"positive", s.positive}, {"values", s.values}});
  return arr;
}

std::vector<LabeledVector> samples_from_json(const nlohmann::json& arr, std::size_t dim) {
  std::vector<LabeledVector> out;
  for (const auto& item : arr) {
    LabeledVector lv{item.at("values").get<std::vector<double>>(), item.at("positive").get<bool>()};
    if (lv.values.size() != dim) throw Error(ErrorCode::CorruptModel, "sample length disagrees with stats");
    out.push_back(std::move(lv));
  }
  return out;
}

}  // namespace

std::string_view to_string(LesionClass c) noexcept {
  switch (c) {
    case LesionClass::Normal: return "Normal";
    case LesionClass::Atypical: return "Atypical";
    case LesionClass::Melanoma: return "Melanoma";
  }
  return "";
}

std::optional<LesionClass> parse_class(std::string_view text) noexcept {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "normal") return LesionClass::Normal;
  if (lower == "atypical") return LesionClass::Atypical;
  if (lower == "melanoma") return LesionClass::Melanoma;
  return std::nullopt;
}

// ---- k-NN ------------------------------------------------------------------

KnnStage::KnnStage(std::vector<LabeledVector> samples, int k) : samples_(std::move(samples)), k_(k) {
  if (k_ < 1 || k_ % 2 == 0 || static_cast<std::size_t>(k_) > samples_.size()) {
    throw Error(ErrorCode::InsufficientData, "k must be odd and between 1 and the sample count");
  }
}

std::vector<std::size_t> KnnStage::neighbours(const std::vector<double>& query) const {
  using Entry = std::pair<double, std::size_t>;  // (squared distance, index), lexicographic
  std::priority_queue<Entry> heap;               // max-heap of the current best k
  const auto k = static_cast<std::size_t>(k_);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Entry e{squared_distance(samples_[i].values, query), i};
    if (heap.size() < k) {
      heap.push(e);
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(e);
    }
  }
  std::vector<std::size_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

Vote KnnStage::vote(const std::vector<double>& query) const {
  const auto idx = neighbours(query);
  double pos = 0.0, neg = 0.0;
  bool exact = false;
  for (std::size_t i : idx) {
    if (squared_distance(samples_[i].values, query) == 0.0) {
      exact = true;
      break;
    }
  }
  for (std::size_t i : idx) {
    const double d = std::sqrt(squared_distance(samples_[i].values, query));
    double w = 0.0;
    if (exact) {
      w = d == 0.0 ? 1.0 : 0.0;
    } else {
      w = 1.0 / d;
    }
    (samples_[i].positive ? pos : neg) += w;
  }
  Vote v;
  v.positive = pos >= neg;
  const double total = pos + neg;
  v.score = total > 0.0 ? (v.positive ? pos : neg) / total : 0.0;
  return v;
}

// ---- training / inference --------------------------------------------------

TwoLevelModel train(const std::vector<FeatureVector>& vectors, const std::vector<LesionClass>& labels, int k) {
  if (vectors.size() != labels.size()) {
    throw Error(ErrorCode::InsufficientData, "feature and label counts differ");
  }
  if (k < 1 || k % 2 == 0) throw Error(ErrorCode::InsufficientData, "k must be a positive odd number");
  std::array<std::size_t, 3> per_class{};
  for (LesionClass c : labels) ++per_class[static_cast<std::size_t>(c)];
  const std::size_t normal = per_class[0];
  const std::size_t atypical = per_class[1];
  const std::size_t melanoma = per_class[2];
  const auto need = static_cast<std::size_t>(k);
  if (normal < need || atypical + melanoma < need || atypical < need || melanoma < need) {
    throw Error(ErrorCode::InsufficientData,
                "each stage side needs at least k=" + std::to_string(k) + " samples (normal " +
                    std::to_string(normal) + ", atypical " + std::to_string(atypical) + ", melanoma " +
                    std::to_string(melanoma) + ")");
  }

  TwoLevelModel model;
  model.k = k;
  model.layout_version = vectors.front().layout_version;
  model.stats = features::fit_standardization(vectors);

  std::vector<LabeledVector> one, two;
  one.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    auto z = features::apply_standardization(model.stats, vectors[i]).values;
    if (is_abnormal(labels[i])) two.push_back({z, labels[i] == LesionClass::Melanoma});
    one.push_back({std::move(z), is_abnormal(labels[i])});
  }
  model.stage_one = KnnStage(std::move(one), k);
  model.stage_two = KnnStage(std::move(two), k);
  return model;
}

Classification classify(const TwoLevelModel& model, const FeatureVector& v) {
  check_layout(model, v);
  const auto z = features::apply_standardization(model.stats, v).values;
  Classification out;
  const Vote first = model.stage_one.vote(z);
  out.stage_one_score = first.score;
  if (!first.positive) {
    out.label = LesionClass::Normal;
    return out;
  }
  const Vote second = model.stage_two.vote(z);
  out.stage_two_score = second.score;
  out.label = second.positive ? LesionClass::Melanoma : LesionClass::Atypical;
  return out;
}

Vote classify_stage_two(const TwoLevelModel& model, const FeatureVector& v) {
  check_layout(model, v);
  return model.stage_two.vote(features::apply_standardization(model.stats, v).values);
}

// ---- confusion matrices ----------------------------------------------------

std::size_t ConfusionMatrix::total() const noexcept {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) n += c;
  }
  return n;
}

std::size_t ConfusionMatrix::row_total(std::size_t truth) const noexcept {
  std::size_t n = 0;
  for (std::size_t c : counts[truth]) n += c;
  return n;
}

double ConfusionMatrix::percent(std::size_t truth, std::size_t predicted) const noexcept {
  const std::size_t n = row_total(truth);
  return n ? 100.0 * static_cast<double>(counts[truth][predicted]) / static_cast<double>(n) : 0.0;
}

double ConfusionMatrix::accuracy() const noexcept {
  const std::size_t n = total();
  if (!n) return 0.0;
  std::size_t diag = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) diag += counts[i][i];
  return static_cast<double>(diag) / static_cast<double>(n);
}

ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& truths,
                                 std::vector<std::string> classes) {
  if (predictions.empty() || truths.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to tabulate");
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::InvalidArgument, "prediction and truth counts differ");
  }
  const std::size_t n = classes.size();
  ConfusionMatrix m{std::move(classes), std::vector<std::vector<std::size_t>>(n, std::vector<std::size_t>(n, 0))};
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (truths[i] >= n || predictions[i] >= n) throw Error(ErrorCode::InvalidArgument, "class index out of range");
    ++m.counts[truths[i]][predictions[i]];
  }
  return m;
}

ConfusionMatrix confusion_matrix(const std::vector<LesionClass>& predictions, const std::vector<LesionClass>& truths) {
  std::vector<std::size_t> p, t;
  for (LesionClass c : predictions) p.push_back(static_cast<std::size_t>(c));
  for (LesionClass c : truths) t.push_back(static_cast<std::size_t>(c));
  return confusion_matrix(p, t, {"Normal", "Atypical", "Melanoma"});
}

std::vector<std::size_t> stratified_folds(const std::vector<LesionClass>& labels, std::size_t folds,
                                          std::uint64_t seed) {
  std::vector<std::size_t> fold_of(labels.size(), 0);
  std::mt19937_64 rng(seed);
  for (LesionClass c : kAllClasses) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) idx.push_back(i);
    }
    shuffle(idx, rng);
    for (std::size_t i = 0; i < idx.size(); ++i) fold_of[idx[i]] = i % folds;
  }
  return fold_of;
}

CrossValidationReport cross_validate(const std::vector<FeatureVector>& vectors, const std::vector<LesionClass>& labels,
                                     std::size_t folds, std::uint64_t seed, int k) {
  if (vectors.size() != labels.size()) throw Error(ErrorCode::InsufficientData, "feature and label counts differ");
  if (folds < 2) throw Error(ErrorCode::InsufficientData, "cross-validation needs at least two folds");
  for (LesionClass c : kAllClasses) {
    const auto n = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), c));
    if (n < folds) {
      throw Error(ErrorCode::InsufficientData, std::string(to_string(c)) + " has fewer samples than folds");
    }
  }

  CrossValidationReport report;
  report.fold_of = stratified_folds(labels, folds, seed);
  std::vector<LesionClass> overall_pred(labels.size());
  std::vector<std::size_t> s1_pred(labels.size()), s1_truth(labels.size());
  std::vector<std::size_t> s2_pred, s2_truth;
  std::vector<std::optional<std::size_t>> s2_by_sample(labels.size());

  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<FeatureVector> train_x;
    std::vector<LesionClass> train_y;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (report.fold_of[i] != f) {
        train_x.push_back(vectors[i]);
        train_y.push_back(labels[i]);
      }
    }
    const TwoLevelModel model = train(train_x, train_y, k);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (report.fold_of[i] != f) continue;
      const Classification c = classify(model, vectors[i]);
      overall_pred[i] = c.label;
      s1_pred[i] = is_abnormal(c.label) ? 1 : 0;
      if (is_abnormal(labels[i])) {
        s2_by_sample[i] = classify_stage_two(model, vectors[i]).positive ? 1 : 0;
      }
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s1_truth[i] = is_abnormal(labels[i]) ? 1 : 0;
    if (s2_by_sample[i]) {
      s2_pred.push_back(*s2_by_sample[i]);
      s2_truth.push_back(labels[i] == LesionClass::Melanoma ? 1 : 0);
    }
  }
  report.overall = confusion_matrix(overall_pred, labels);
  report.stage_one = confusion_matrix(s1_pred, s1_truth, {"Normal", "Abnormal"});
  report.stage_two = confusion_matrix(s2_pred, s2_truth, {"Atypical", "Melanoma"});
  return report;
}

// ---- formatting ------------------------------------------------------------

std::string format_matrix(const ConfusionMatrix& m, std::string_view title) {
  constexpr std::size_t kLabel = 12;
  constexpr std::size_t kCell = 10;
  std::ostringstream out;
  out << title << " (row %, n)\n" << pad_right("", kLabel);
  for (const auto& c : m.classes) out << pad_left(c, kCell);
  out << pad_left("n", 6) << '\n';
  for (std::size_t t = 0; t < m.classes.size(); ++t) {
    out << pad_right(m.classes[t], kLabel);
    for (std::size_t p = 0; p < m.classes.size(); ++p) out << pad_left(fixed1(m.percent(t, p)), kCell);
    out << pad_left(std::to_string(m.row_total(t)), 6) << '\n';
  }
  return out.str();
}

std::string format_two_level_table(const ConfusionMatrix& s1, const ConfusionMatrix& s2) {
  constexpr std::size_t kLabel = 10;
  constexpr std::size_t kCell = 10;
  std::ostringstream out;
  out << pad_right("", kLabel) << pad_right("  Classifier I (%)", 2 * kCell) << pad_right("", kLabel)
      << "  Classifier II (%)\n";
  out << pad_right("", kLabel) << pad_left("Normal", kCell) << pad_left("Abnormal", kCell) << pad_right("", kLabel)
      << pad_left("Atypical", kCell) << pad_left("Melanoma", kCell) << '\n';
  out << pad_right("Normal", kLabel) << pad_left(fixed1(s1.percent(0, 0)), kCell)
      << pad_left(fixed1(s1.percent(0, 1)), kCell) << '\n';
  out << pad_right("Abnormal", kLabel) << pad_left(fixed1(s1.percent(1, 0)), kCell)
      << pad_left(fixed1(s1.percent(1, 1)), kCell) << pad_right("  Atypical", kLabel)
      << pad_left(fixed1(s2.percent(0, 0)), kCell) << pad_left(fixed1(s2.percent(0, 1)), kCell) << '\n';
  out << pad_right("", kLabel) << pad_left("", kCell) << pad_left("", kCell) << pad_right("  Melanoma", kLabel)
      << pad_left(fixed1(s2.percent(1, 0)), kCell) << pad_left(fixed1(s2.percent(1, 1)), kCell) << '\n';
  return out.str();
}

std::string matrix_csv(const ConfusionMatrix& m, std::string_view name) {
  std::ostringstream out;
  for (std::size_t t = 0; t < m.classes.size(); ++t) {
    for (std::size_t p = 0; p < m.classes.size(); ++p) {
      char pct[32];
      std::snprintf(pct, sizeof pct, "%.4f", m.percent(t, p));
      out << name << ',' << m.classes[t] << ',' << m.classes[p] << ',' << m.counts[t][p] << ',' << pct << '\n';
    }
  }
  return out.str();
}

// ---- persistence -----------------------------------------------------------

std::string model_to_json(const TwoLevelModel& model) {
  const nlohmann::json doc = {
      {"format_version", kModelFormatVersion},
      {"layout_version", model.layout_version},
      {"k", model.k},
      {"stats", {{"mean", model.stats.mean}, {"std", model.stats.std}}},
      {"stage_one", samples_to_json(model.stage_one)},
      {"stage_two", samples_to_json(model.stage_two)},
  };
  return doc.dump();
}

void save_model(const TwoLevelModel& model, const std::filesystem::path& path) {
  const std::string text = model_to_json(model);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  write_file(tmp, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  std::filesystem::rename(tmp, path);
}

TwoLevelModel model_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptModel, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    const int format = doc.at("format_version").get<int>();
    const int layout = doc.at("layout_version").get<int>();
    if (format != kModelFormatVersion) {
      throw Error(ErrorCode::IncompatibleVersion, "model format version " + std::to_string(format) +
                                                      " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    if (layout != features::kLayoutVersion) {
      throw Error(ErrorCode::IncompatibleVersion, "model feature layout " + std::to_string(layout) +
                                                      " (expected " + std::to_string(features::kLayoutVersion) + ")");
    }
    TwoLevelModel model;
    model.layout_version = layout;
    model.k = doc.at("k").get<int>();
    model.stats.mean = doc.at("stats").at("mean").get<std::vector<double>>();
    model.stats.std = doc.at("stats").at("std").get<std::vector<double>>();
    const std::size_t dim = model.stats.mean.size();
    if (model.stats.std.size() != dim) throw Error(ErrorCode::CorruptModel, "stats vectors differ in length");
    auto one = samples_from_json(doc.at("stage_one"), dim);
    auto two = samples_from_json(doc.at("stage_two"), dim);

    // Stage II must hold exactly the abnormal stage I samples, in order.
    std::size_t j = 0;
    for (const auto& s : one) {
      if (!s.positive) continue;
      if (j >= two.size() || two[j].values != s.values) {
        throw Error(ErrorCode::CorruptModel, "stage II samples are not the abnormal stage I samples");
      }
      ++j;
    }
    if (j != two.size()) throw Error(ErrorCode::CorruptModel, "stage II holds extra samples");

    try {
      model.stage_one = KnnStage(std::move(one), model.k);
      model.stage_two = KnnStage(std::move(two), model.k);
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptModel, e.what());
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptModel, std::string("model file is missing fields: ") + e.what());
  }
}

TwoLevelModel load_model(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return model_from_json(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace skincure::classify
