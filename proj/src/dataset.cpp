#include "skincure/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <nlohmann/json.hpp>

#include "skincure/csv.hpp"
#include "skincure/error.hpp"
#include "skincure/image.hpp"
#include "skincure/random.hpp"

namespace skincure::dataset {
namespace {

namespace fs = std::filesystem;
using classify::LesionClass;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (base.empty() || !p.is_absolute()) return p.generic_string();
  const fs::path rel = p.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

std::size_t class_index(LesionClass c) { return static_cast<std::size_t>(c); }

}  // namespace

std::vector<Ph2Record> load_manifest(const fs::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty() || rows.front() != csv::Row{"image_id", "image_path", "mask_path", "label"}) {
    throw Error(ErrorCode::BadHeader, path.string() + ": expected header image_id,image_path,mask_path,label");
  }
  const fs::path base = fs::absolute(path).parent_path();
  std::vector<Ph2Record> out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path.string() + " row " + std::to_string(r);
    if (row.size() != 4) throw Error(ErrorCode::BadHeader, where + ": expected 4 fields");
    Ph2Record rec;
    rec.image_id = trim(row[0]);
    const auto label = classify::parse_class(trim(row[3]));
    if (!label) throw Error(ErrorCode::BadLabel, where + ": unknown label '" + row[3] + "'");
    rec.label = *label;
    if (rec.image_id.empty()) throw Error(ErrorCode::BadHeader, where + ": empty image_id");
    if (!seen.insert(rec.image_id).second) {
      throw Error(ErrorCode::DuplicateId, where + ": duplicate image_id '" + rec.image_id + "'");
    }
    rec.image_path = resolve(base, trim(row[1]));
    if (const std::string mask = trim(row[2]); !mask.empty()) rec.mask_path = resolve(base, mask);
    out.push_back(std::move(rec));
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<Ph2Record>& records) {
  const fs::path base = fs::absolute(path).parent_path();
  std::ostringstream out;
  out << "image_id,image_path,mask_path,label\n";
  for (const auto& r : records) {
    out << csv::join({r.image_id, relative_to(fs::absolute(r.image_path), base),
                      r.mask_path ? relative_to(fs::absolute(*r.mask_path), base) : std::string(),
                      std::string(classify::to_string(r.label))})
        << '\n';
  }
  const std::string text = out.str();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DatasetReport verify_dataset(const std::vector<Ph2Record>& records) {
  DatasetReport report;
  report.records = records.size();
  if (records.empty()) report.warnings.push_back("manifest contains no records");
  for (const auto& r : records) {
    ++report.counts[class_index(r.label)];
    std::error_code ec;
    if (!fs::is_regular_file(r.image_path, ec)) {
      report.missing_files.push_back(r.image_path.string());
    } else {
      try {
        const ImageSize size = read_image_size(r.image_path);
        if (size.width != kExpectedWidth || size.height != kExpectedHeight) {
          report.resolution_flags.push_back({r.image_id, size.width, size.height});
        }
      } catch (const Error&) {
        report.unreadable_files.push_back(r.image_path.string());
      }
    }
    if (r.mask_path && !fs::is_regular_file(*r.mask_path, ec)) report.missing_files.push_back(r.mask_path->string());
  }
  return report;
}

std::string DatasetReport::to_json() const {
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : resolution_flags) {
    flags.push_back({{"image_id", f.image_id}, {"width", f.width}, {"height", f.height}});
  }
  const nlohmann::json doc = {
      {"records", records},
      {"counts", {{"normal", counts[0]}, {"atypical", counts[1]}, {"melanoma", counts[2]}}},
      {"expected_resolution", {{"width", kExpectedWidth}, {"height", kExpectedHeight}}},
      {"resolution_flags", flags},
      {"missing_files", missing_files},
      {"unreadable_files", unreadable_files},
      {"warnings", warnings},
  };
  return doc.dump(2) + "\n";
}

std::string DatasetReport::to_text() const {
  std::ostringstream out;
  out << "records   " << records << '\n'
      << "normal    " << counts[0] << '\n'
      << "atypical  " << counts[1] << '\n'
      << "melanoma  " << counts[2] << '\n'
      << "resolution flags (expected " << kExpectedWidth << "x" << kExpectedHeight << "): "
      << resolution_flags.size() << '\n';
  for (const auto& f : resolution_flags) out << "  " << f.image_id << ' ' << f.width << 'x' << f.height << '\n';
  out << "missing files: " << missing_files.size() << '\n';
  for (const auto& m : missing_files) out << "  " << m << '\n';
  if (!unreadable_files.empty()) {
    out << "unreadable files: " << unreadable_files.size() << '\n';
    for (const auto& m : unreadable_files) out << "  " << m << '\n';
  }
  for (const auto& w : warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::string DatasetReport::to_csv() const {
  std::ostringstream out;
  out << "kind,key,value\n"
      << "count,records," << records << '\n'
      << "count,normal," << counts[0] << '\n'
      << "count,atypical," << counts[1] << '\n'
      << "count,melanoma," << counts[2] << '\n';
  for (const auto& f : resolution_flags) {
    out << "resolution," << csv::escape(f.image_id) << ',' << f.width << 'x' << f.height << '\n';
  }
  for (const auto& m : missing_files) out << "missing,file," << csv::escape(m) << '\n';
  for (const auto& m : unreadable_files) out << "unreadable,file," << csv::escape(m) << '\n';
  for (const auto& w : warnings) out << "warning,," << csv::escape(w) << '\n';
  return out.str();
}

std::vector<std::vector<Ph2Record>> stratified_split(const std::vector<Ph2Record>& records,
                                                     const std::vector<double>& fractions, std::uint64_t seed) {
  if (fractions.empty()) throw Error(ErrorCode::BadFractions, "no fractions given");
  double sum = 0.0;
  for (double f : fractions) {
    if (!std::isfinite(f) || f < 0.0) throw Error(ErrorCode::BadFractions, "fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::BadFractions, "fractions must sum to 1");

  const std::size_t parts = fractions.size();
  std::vector<std::vector<std::size_t>> chosen(parts);
  std::mt19937_64 rng(seed);
  for (LesionClass c : classify::kAllClasses) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].label == c) idx.push_back(i);
    }
    shuffle(idx, rng);

    // Largest-remainder allocation; equal remainders favour earlier parts.
    const double n = static_cast<double>(idx.size());
    std::vector<std::size_t> sizes(parts);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      const double exact = n * fractions[p];
      sizes[p] = static_cast<std::size_t>(std::floor(exact + 1e-9));
      assigned += sizes[p];
      remainders.emplace_back(exact - static_cast<double>(sizes[p]), p);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < idx.size(); ++i, ++assigned) ++sizes[remainders[i % parts].second];
    while (assigned > idx.size()) {
      auto it = std::max_element(sizes.begin(), sizes.end());
      --*it;
      --assigned;
    }

    std::size_t pos = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      for (std::size_t i = 0; i < sizes[p]; ++i) chosen[p].push_back(idx[pos++]);
    }
  }

  std::vector<std::vector<Ph2Record>> out(parts);
  for (std::size_t p = 0; p < parts; ++p) {
    std::sort(chosen[p].begin(), chosen[p].end());
    for (std::size_t i : chosen[p]) out[p].push_back(records[i]);
  }
  return out;
}

std::vector<Ph2Record> import_ph2(const fs::path& root) {
  const fs::path index = root / "PH2_dataset.txt";
  std::ifstream in(index);
  if (!in) throw Error(ErrorCode::FileNotFound, index.string());

  std::optional<std::size_t> name_col, diag_col;
  std::vector<Ph2Record> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("||") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const auto next = line.find("||", pos);
      cells.push_back(trim(line.substr(pos, next == std::string::npos ? std::string::npos : next - pos)));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    if (!name_col) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "Name") name_col = i;
        if (cells[i] == "Clinical Diagnosis") diag_col = i;
      }
      if (name_col && !diag_col) throw Error(ErrorCode::BadHeader, index.string() + ": no Clinical Diagnosis column");
      continue;
    }
    if (*name_col >= cells.size() || *diag_col >= cells.size()) continue;
    const std::string& id = cells[*name_col];
    if (id.rfind("IMD", 0) != 0) continue;
    LesionClass label;
    const std::string& diag = cells[*diag_col];
    if (diag == "0") {
      label = LesionClass::Normal;
    } else if (diag == "1") {
      label = LesionClass::Atypical;
    } else if (diag == "2") {
      label = LesionClass::Melanoma;
    } else {
      throw Error(ErrorCode::BadLabel, index.string() + ": " + id + " has clinical diagnosis '" + diag + "'");
    }
    const fs::path dir = fs::absolute(root) / "PH2 Dataset images" / id;
    out.push_back({id, dir / (id + "_Dermoscopic_Image") / (id + ".bmp"),
                   dir / (id + "_lesion") / (id + "_lesion.bmp"), label});
  }
  if (!name_col) throw Error(ErrorCode::BadHeader, index.string() + ": no Name column");
  return out;
}

}  // namespace skincure::dataset
