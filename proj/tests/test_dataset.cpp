#include <gtest/gtest.h>

#include <set>
#include <nlohmann/json.hpp>

#include "skincure/dataset.hpp"
#include "skincure/error.hpp"
#include "skincure/synthetic.hpp"
#include "support.hpp"

using namespace skincure;
using namespace skincure::dataset;
using classify::LesionClass;
using testing_support::TempDir;
using testing_support::write_text;

namespace {

ErrorCode load_error(const std::filesystem::path& p) {
  try {
    load_manifest(p);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::vector<Ph2Record> fake_records(std::size_t n, std::size_t a, std::size_t m) {
  std::vector<Ph2Record> out;
  std::size_t serial = 0;
  auto add = [&](std::size_t count, LesionClass c) {
    for (std::size_t i = 0; i < count; ++i, ++serial) {
      const std::string id = "IMD" + std::to_string(1000 + serial);
      out.push_back({id, "/data/" + id + ".bmp", std::nullopt, c});
    }
  };
  add(n, LesionClass::Normal);
  add(a, LesionClass::Atypical);
  add(m, LesionClass::Melanoma);
  return out;
}

std::array<std::size_t, 3> counts(const std::vector<Ph2Record>& r) {
  std::array<std::size_t, 3> c{};
  for (const auto& x : r) ++c[static_cast<std::size_t>(x.label)];
  return c;
}

}  // namespace

TEST(Manifest, LoadsRowsAndResolvesPaths) {
  TempDir dir;
  write_text(dir / "m.csv",
             "image_id,image_path,mask_path,label\n"
             "IMD003,img/IMD003.bmp,mask/IMD003_lesion.bmp,normal\n"
             "IMD009,img/IMD009.bmp,,atypical\n"
             "IMD058,/abs/IMD058.bmp,,Melanoma\n");
  const auto r = load_manifest(dir / "m.csv");
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].image_id, "IMD003");
  EXPECT_EQ(r[0].image_path, std::filesystem::absolute(dir.path()) / "img/IMD003.bmp");
  ASSERT_TRUE(r[0].mask_path);
  EXPECT_FALSE(r[1].mask_path);
  EXPECT_EQ(r[1].label, LesionClass::Atypical);
  EXPECT_EQ(r[2].image_path, "/abs/IMD058.bmp");
  EXPECT_EQ(r[2].label, LesionClass::Melanoma);
}

TEST(Manifest, Errors) {
  TempDir dir;
  write_text(dir / "label.csv", "image_id,image_path,mask_path,label\nIMD1,a.bmp,,benign\n");
  EXPECT_EQ(load_error(dir / "label.csv"), ErrorCode::BadLabel);
  write_text(dir / "dup.csv", "image_id,image_path,mask_path,label\nIMD1,a.bmp,,normal\nIMD1,b.bmp,,normal\n");
  EXPECT_EQ(load_error(dir / "dup.csv"), ErrorCode::DuplicateId);
  write_text(dir / "header.csv", "id,path,mask,label\nIMD1,a.bmp,,normal\n");
  EXPECT_EQ(load_error(dir / "header.csv"), ErrorCode::BadHeader);
  EXPECT_EQ(load_error(dir / "absent.csv"), ErrorCode::FileNotFound);
}

TEST(Manifest, WriteLoadRoundTrip) {
  TempDir dir;
  const auto records = synth::write_dataset(dir.path(), {2, 1, 1}, 5, 0);
  const auto back = load_manifest(dir / "manifest.csv");
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].image_id, records[i].image_id);
    EXPECT_EQ(back[i].label, records[i].label);
    EXPECT_EQ(std::filesystem::weakly_canonical(back[i].image_path),
              std::filesystem::weakly_canonical(records[i].image_path));
  }
  EXPECT_NE(testing_support::read_text(dir / "manifest.csv").find(",images/"), std::string::npos);
}

TEST(Verify, ReportsCountsAndMissingFiles) {
  TempDir dir;
  auto records = synth::write_dataset(dir.path(), {2, 1, 1}, 6, 0);
  std::filesystem::remove(records[1].image_path);
  write_text(dir / "junk.png", "not an image");
  records.push_back({"JUNK", dir / "junk.png", std::nullopt, LesionClass::Normal});
  const auto report = verify_dataset(records);
  EXPECT_EQ(report.records, 5u);
  EXPECT_EQ(report.counts, (std::array<std::size_t, 3>{3, 1, 1}));
  ASSERT_EQ(report.missing_files.size(), 1u);
  EXPECT_EQ(report.unreadable_files.size(), 1u);
  EXPECT_EQ(report.resolution_flags.size(), 3u);
  EXPECT_EQ(report.resolution_flags[0].width, 320);
  const auto json = nlohmann::json::parse(report.to_json());
  EXPECT_EQ(json["records"], 5);
}

TEST(Verify, EmptyManifestWarns) {
  const auto report = verify_dataset({});
  EXPECT_EQ(report.records, 0u);
  ASSERT_EQ(report.warnings.size(), 1u);
  EXPECT_NE(report.to_text().find("manifest contains no records"), std::string::npos);
}

TEST(Split, EightyTwentyExactCounts) {
  const auto records = fake_records(80, 80, 40);
  const auto parts = stratified_split(records, {0.8, 0.2}, 7);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(counts(parts[0]), (std::array<std::size_t, 3>{64, 64, 32}));
  EXPECT_EQ(counts(parts[1]), (std::array<std::size_t, 3>{16, 16, 8}));
}

TEST(Split, WholeIsIdentity) {
  const auto records = fake_records(5, 4, 3);
  const auto parts = stratified_split(records, {1.0}, 3);
  ASSERT_EQ(parts.size(), 1u);
  ASSERT_EQ(parts[0].size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(parts[0][i].image_id, records[i].image_id);
}

TEST(Split, PartitionInvariants) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const auto records = fake_records(rng() % 30, rng() % 30, rng() % 30);
    const double a = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double b = std::uniform_real_distribution<double>(0.0, 1.0 - a)(rng);
    const std::vector<double> f = {a, b, 1.0 - a - b};
    const auto parts = stratified_split(records, f, trial);
    EXPECT_EQ(parts.size(), 3u);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& p : parts) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_TRUE(seen.insert(p[i].image_id).second);
        if (i > 0) {
          EXPECT_LT(p[i - 1].image_id, p[i].image_id);
        }
      }
      total += p.size();
    }
    EXPECT_EQ(total, records.size());
    // Per class, every part is within one of its exact share.
    const auto whole = counts(records);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto c = counts(parts[k]);
      for (std::size_t j = 0; j < 3; ++j) EXPECT_LE(std::abs(static_cast<double>(c[j]) - f[k] * whole[j]), 1.0);
    }
    const auto again = stratified_split(records, f, trial);
    for (std::size_t k = 0; k < 3; ++k) {
      ASSERT_EQ(again[k].size(), parts[k].size());
      for (std::size_t i = 0; i < parts[k].size(); ++i) EXPECT_EQ(again[k][i].image_id, parts[k][i].image_id);
    }
  }
}

TEST(Split, BadFractions) {
  const auto records = fake_records(3, 3, 3);
  for (const auto& f : std::vector<std::vector<double>>{{0.5, 0.6}, {-0.1, 1.1}, {0.5}, {}}) {
    try {
      stratified_split(records, f, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadFractions);
    }
  }
}

TEST(ImportPh2, ReadsDiagnosisTable) {
  TempDir dir;
  write_text(dir / "PH2_dataset.txt",
             "|| Name || Histological Diagnosis || Clinical Diagnosis || Asymmetry ||\n"
             "|| IMD003 ||  || 0 || 0 ||\n"
             "|| IMD009 ||  || 1 || 1 ||\n"
             "|| IMD058 || Melanoma || 2 || 2 ||\n"
             "\n"
             "|| Legends ||\n");
  const auto r = import_ph2(dir.path());
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].image_id, "IMD003");
  EXPECT_EQ(r[0].label, LesionClass::Normal);
  EXPECT_EQ(r[1].label, LesionClass::Atypical);
  EXPECT_EQ(r[2].label, LesionClass::Melanoma);
  EXPECT_EQ(r[2].image_path.filename(), "IMD058.bmp");
  EXPECT_EQ(r[2].mask_path->filename(), "IMD058_lesion.bmp");
  EXPECT_EQ(r[2].image_path.parent_path().filename(), "IMD058_Dermoscopic_Image");
  EXPECT_THROW(import_ph2(dir / "nowhere"), Error);
}
