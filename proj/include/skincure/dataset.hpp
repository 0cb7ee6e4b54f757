#pragma once

// PH2 manifest handling. The manifest is a UTF-8 CSV with header
// `image_id,image_path,mask_path,label`; relative paths resolve against the
// manifest's directory.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skincure/classifier.hpp"

namespace skincure::dataset {

struct Ph2Record {
  std::string image_id;
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> mask_path;
  classify::LesionClass label = classify::LesionClass::Normal;
};

/// Throws Error(FileNotFound), Error(BadHeader), Error(BadLabel) or
/// Error(DuplicateId); the latter two name the 1-based data row.
std::vector<Ph2Record> load_manifest(const std::filesystem::path& path);

/// Paths inside the manifest's directory are written relative to it.
void write_manifest(const std::filesystem::path& path, const std::vector<Ph2Record>& records);

inline constexpr int kExpectedWidth = 768;
inline constexpr int kExpectedHeight = 560;

struct ResolutionFlag {
  std::string image_id;
  int width = 0;
  int height = 0;
};

struct DatasetReport {
  std::array<std::size_t, 3> counts{};  // Normal, Atypical, Melanoma
  std::size_t records = 0;
  std::vector<ResolutionFlag> resolution_flags;
  std::vector<std::string> missing_files;
  std::vector<std::string> unreadable_files;
  std::vector<std::string> warnings;

  std::string to_json() const;
  std::string to_text() const;
  std::string to_csv() const;
};

/// Never throws for dataset content; findings go into the report.
DatasetReport verify_dataset(const std::vector<Ph2Record>& records);

/// Per class, a seeded shuffle is cut into parts sized by largest-remainder
/// rounding of the fractions. Each part keeps manifest order. Throws
/// Error(BadFractions) unless the fractions are non-negative and sum to 1
/// within 1e-9.
std::vector<std::vector<Ph2Record>> stratified_split(const std::vector<Ph2Record>& records,
                                                     const std::vector<double>& fractions, std::uint64_t seed);

/// One-shot conversion of an unpacked PH2 distribution. Reads the
/// `PH2_dataset.txt` table under `root` (Name and Clinical Diagnosis columns:
/// 0 common nevus, 1 atypical nevus, 2 melanoma) and points at
/// `PH2 Dataset images/<id>/<id>_Dermoscopic_Image/<id>.bmp` and
/// `<id>_lesion/<id>_lesion.bmp`. Throws Error(FileNotFound) or Error(BadHeader).
std::vector<Ph2Record> import_ph2(const std::filesystem::path& root);

}  // namespace skincure::dataset
