#pragma once

// Two-level lesion classifier: stage I separates normal from abnormal
// lesions, stage II splits the abnormal ones into atypical and melanoma.
// Both stages are inverse-distance-weighted k-nearest-neighbour voters over
// standardised feature vectors.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skincure/features.hpp"

namespace skincure::classify {

enum class LesionClass { Normal, Atypical, Melanoma };

inline constexpr std::array<LesionClass, 3> kAllClasses = {LesionClass::Normal, LesionClass::Atypical,
                                                           LesionClass::Melanoma};

std::string_view to_string(LesionClass c) noexcept;
/// Accepts "normal", "atypical", "melanoma" (case-insensitive).
std::optional<LesionClass> parse_class(std::string_view text) noexcept;

inline bool is_abnormal(LesionClass c) noexcept { return c != LesionClass::Normal; }

inline constexpr int kDefaultK = 7;
inline constexpr int kModelFormatVersion = 1;

/// One stored training vector. `positive` is the severe side of its stage
/// (abnormal for stage I, melanoma for stage II).
struct LabeledVector {
  std::vector<double> values;
  bool positive = false;
};

struct Vote {
  bool positive = false;
  double score = 0.0;  // weighted-vote fraction of the chosen label
};

/// Inverse-distance-weighted k-NN over an immutable sample set. Neighbours
/// are the k smallest Euclidean distances with ties broken by sample order.
/// Exact-distance matches outvote everything else; a tied vote goes to the
/// positive (severe) side.
class KnnStage {
 public:
  KnnStage() = default;
  KnnStage(std::vector<LabeledVector> samples, int k);

  Vote vote(const std::vector<double>& query) const;
  /// Indices of the k nearest samples, nearest first.
  std::vector<std::size_t> neighbours(const std::vector<double>& query) const;

  const std::vector<LabeledVector>& samples() const noexcept { return samples_; }
  int k() const noexcept { return k_; }

 private:
  std::vector<LabeledVector> samples_;
  int k_ = 1;
};

struct TwoLevelModel {
  KnnStage stage_one;  // positive = abnormal
  KnnStage stage_two;  // positive = melanoma
  features::StandardizationStats stats;
  int layout_version = features::kLayoutVersion;
  int k = kDefaultK;
};

/// Throws Error(InsufficientData) when lengths differ, k is even or < 1, or
/// any of normal / abnormal / atypical / melanoma has fewer than k samples;
/// Error(LayoutMismatch) when vectors disagree in length or layout version.
TwoLevelModel train(const std::vector<features::FeatureVector>& vectors, const std::vector<LesionClass>& labels,
                    int k = kDefaultK);

struct Classification {
  LesionClass label = LesionClass::Normal;
  double stage_one_score = 0.0;
  std::optional<double> stage_two_score;
};

/// Throws Error(LayoutMismatch) if the vector does not fit the model.
Classification classify(const TwoLevelModel& model, const features::FeatureVector& v);

/// Stage II verdict alone, for lesions known to be abnormal.
Vote classify_stage_two(const TwoLevelModel& model, const features::FeatureVector& v);

// ---- evaluation ------------------------------------------------------------

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> counts;  // [truth][prediction]

  std::size_t total() const noexcept;
  std::size_t row_total(std::size_t truth) const noexcept;
  /// Row-normalised percentage; 0 for an empty row.
  double percent(std::size_t truth, std::size_t predicted) const noexcept;
  /// Diagonal count over total.
  double accuracy() const noexcept;
};

/// Generic index-based matrix. Throws Error(EmptyInput) for empty input and
/// Error(InvalidArgument) on length mismatch or out-of-range indices.
ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions,
                                 const std::vector<std::size_t>& truths, std::vector<std::string> classes);
ConfusionMatrix confusion_matrix(const std::vector<LesionClass>& predictions,
                                 const std::vector<LesionClass>& truths);

struct CrossValidationReport {
  ConfusionMatrix overall;    // Normal / Atypical / Melanoma
  ConfusionMatrix stage_one;  // Normal / Abnormal
  ConfusionMatrix stage_two;  // Atypical / Melanoma, truly abnormal samples only
  std::vector<std::size_t> fold_of;  // fold index per input sample
};

/// Stratified k-fold assignment from a seeded Fisher-Yates shuffle per class
/// (mt19937_64, rejection-sampled indices, so reproducible across platforms).
std::vector<std::size_t> stratified_folds(const std::vector<LesionClass>& labels, std::size_t folds,
                                          std::uint64_t seed);

/// Throws Error(InsufficientData) if folds < 2 or a class has fewer samples than folds.
CrossValidationReport cross_validate(const std::vector<features::FeatureVector>& vectors,
                                     const std::vector<LesionClass>& labels, std::size_t folds,
                                     std::uint64_t seed, int k = kDefaultK);

/// Aligned text table in the two-level layout: stage I (Normal / Abnormal)
/// next to stage II (Atypical / Melanoma).
std::string format_two_level_table(const ConfusionMatrix& stage_one, const ConfusionMatrix& stage_two);
std::string format_matrix(const ConfusionMatrix& m, std::string_view title);
std::string matrix_csv(const ConfusionMatrix& m, std::string_view name);

// ---- persistence -----------------------------------------------------------

/// JSON document with format_version, layout_version, k, stats and both stage
/// sample sets. Doubles are written with round-trip precision.
void save_model(const TwoLevelModel& model, const std::filesystem::path& path);
std::string model_to_json(const TwoLevelModel& model);

/// Throws Error(FileNotFound), Error(CorruptModel) or
/// Error(IncompatibleVersion) (format or layout version mismatch).
TwoLevelModel load_model(const std::filesystem::path& path);
TwoLevelModel model_from_json(std::string_view text);

}  // namespace skincure::classify
