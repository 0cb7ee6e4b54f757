#include "skincure/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <nlohmann/json.hpp>

#include "skincure/error.hpp"

namespace skincure {

AnalysisOutcome analyze_image(std::span<const std::uint8_t> bytes, const classify::TwoLevelModel& model) {
  const RgbImage img = decode_image(bytes);
  AnalysisOutcome out{{}, features::analyze_lesion(img)};
  const auto c = classify::classify(model, out.detail.features);
  auto& r = out.response;
  r.label = c.label;
  r.stage_one_score = c.stage_one_score;
  r.stage_two_score = c.stage_two_score;
  r.area_px = out.detail.segmentation.area_px;
  r.bbox = out.detail.segmentation.bbox;
  r.advisory = classify::is_abnormal(c.label);
  return out;
}

std::string to_json(const AnalysisResponse& r) {
  nlohmann::ordered_json doc;
  doc["class"] = classify::to_string(r.label);
  doc["scores"]["stage_one"] = r.stage_one_score;
  doc["scores"]["stage_two"] = r.stage_two_score ? nlohmann::ordered_json(*r.stage_two_score) : nlohmann::ordered_json(nullptr);
  doc["area_px"] = r.area_px;
  doc["bbox"] = {{"x", r.bbox.x0}, {"y", r.bbox.y0}, {"width", r.bbox.width()}, {"height", r.bbox.height()}};
  doc["advisory"] = r.advisory;
  return doc.dump();
}

DatasetFeatures extract_dataset(const std::vector<dataset::Ph2Record>& records, unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, std::max<std::size_t>(records.size(), 1));

  std::vector<std::optional<features::FeatureVector>> vectors(records.size());
  std::vector<std::string> failures(records.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        vectors[i] = features::extract_all(read_image(records[i].image_path));
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  DatasetFeatures out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (vectors[i]) {
      out.image_ids.push_back(records[i].image_id);
      out.vectors.push_back(std::move(*vectors[i]));
      out.labels.push_back(records[i].label);
    } else {
      out.excluded.emplace_back(records[i].image_id, failures[i]);
    }
  }
  return out;
}

}  // namespace skincure
