#pragma once

// Single-image analysis shared by the CLI and the HTTP service, so both
// produce the same result for the same bytes and model.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skincure/classifier.hpp"
#include "skincure/dataset.hpp"
#include "skincure/features.hpp"

namespace skincure {

struct AnalysisResponse {
  classify::LesionClass label = classify::LesionClass::Normal;
  double stage_one_score = 0.0;
  std::optional<double> stage_two_score;
  std::size_t area_px = 0;
  BoundingBox bbox;
  bool advisory = false;  // true for Atypical and Melanoma
};

struct AnalysisOutcome {
  AnalysisResponse response;
  features::LesionAnalysis detail;
};

/// decode -> analyze_lesion -> classify. Errors propagate as skincure::Error.
AnalysisOutcome analyze_image(std::span<const std::uint8_t> bytes, const classify::TwoLevelModel& model);

/// Compact JSON, fixed key order, no timestamps.
std::string to_json(const AnalysisResponse& response);

struct DatasetFeatures {
  std::vector<std::string> image_ids;
  std::vector<features::FeatureVector> vectors;
  std::vector<classify::LesionClass> labels;
  std::vector<std::pair<std::string, std::string>> excluded;  // image id, reason
};

/// Feature vectors for every record, in manifest order. Records whose image
/// cannot be read or segmented are listed in `excluded` instead. `workers`
/// threads share the work; the result does not depend on the count.
DatasetFeatures extract_dataset(const std::vector<dataset::Ph2Record>& records, unsigned workers = 0);

}  // namespace skincure
