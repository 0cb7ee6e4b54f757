#include <gtest/gtest.h>

#include <thread>

#include "skincure/error.hpp"
#include "skincure/profile_store.hpp"
#include "support.hpp"

using namespace skincure;
using namespace skincure::profiles;
using testing_support::TempDir;

namespace {

MoleRecord draft(double x, double y, BodySide side = BodySide::Front) {
  MoleRecord m;
  m.body_side = side;
  m.x = x;
  m.y = y;
  return m;
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST(ProfileStore, CreateGetListRemove) {
  TempDir dir;
  ProfileStore store(dir.path());
  const Profile a = store.create("Ada");
  const Profile b = store.create("Bo");
  EXPECT_TRUE(is_valid_id(a.id));
  EXPECT_EQ(store.get(a.id)->name, "Ada");
  EXPECT_EQ(store.list().size(), 2u);
  EXPECT_TRUE(store.remove(a.id));
  EXPECT_FALSE(store.remove(a.id));
  EXPECT_FALSE(store.get(a.id).has_value());
  EXPECT_FALSE(store.get("../etc/passwd").has_value());
  EXPECT_EQ(store.list().front().id, b.id);
}

TEST(ProfileStore, PersistsAcrossInstances) {
  TempDir dir;
  std::string id;
  {
    ProfileStore store(dir.path());
    id = store.create("Cy").id;
    store.add_mole(id, draft(0.25, 0.75, BodySide::Back));
  }
  ProfileStore again(dir.path());
  const auto p = again.get(id);
  ASSERT_TRUE(p);
  ASSERT_EQ(p->moles.size(), 1u);
  EXPECT_EQ(p->moles[0].body_side, BodySide::Back);
  EXPECT_DOUBLE_EQ(p->moles[0].y, 0.75);
}

TEST(ProfileStore, ValidatesMoles) {
  TempDir dir;
  ProfileStore store(dir.path());
  const auto id = store.create("Di").id;
  EXPECT_EQ(error_of([&] { store.add_mole(id, draft(1.2, 0.5)); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_of([&] { store.add_mole(id, draft(0.5, -0.01)); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_of([&] { store.add_mole(std::string(32, 'a'), draft(0.5, 0.5)); }), ErrorCode::NotFound);
  auto with_image = draft(0.5, 0.5);
  with_image.image_ref = std::string(64, '0');
  EXPECT_EQ(error_of([&] { store.add_mole(id, with_image); }), ErrorCode::InvalidArgument);
  EXPECT_NO_THROW(store.add_mole(id, draft(0.0, 1.0)));
}

TEST(ProfileStore, UpdateMole) {
  TempDir dir;
  ProfileStore store(dir.path());
  const auto id = store.create("Ed").id;
  const auto mole = store.add_mole(id, draft(0.1, 0.2));
  StoredResult r;
  r.label = classify::LesionClass::Atypical;
  r.stage_one_score = 0.8;
  r.stage_two_score = 0.6;
  r.area_px = 1234;
  const std::uint8_t bytes[] = {1, 2, 3};
  const auto hash = store.put_blob(bytes);
  store.update_mole(id, mole.id, hash, r);
  const auto p = store.get(id);
  ASSERT_TRUE(p->moles[0].latest_result);
  EXPECT_EQ(p->moles[0].latest_result->label, classify::LesionClass::Atypical);
  EXPECT_EQ(*p->moles[0].image_ref, hash);
  EXPECT_EQ(error_of([&] { store.update_mole(id, std::string(32, 'b'), std::nullopt, r); }), ErrorCode::NotFound);
}

TEST(ProfileStore, BlobsAreContentAddressed) {
  TempDir dir;
  ProfileStore store(dir.path());
  const std::string text = "abc";
  const auto hash = store.put_blob(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  EXPECT_EQ(hash, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(store.put_blob(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())), hash);
  ASSERT_TRUE(store.blob_path(hash));
  EXPECT_EQ(testing_support::read_text(*store.blob_path(hash)), "abc");
  EXPECT_FALSE(store.blob_path("../x").has_value());
}

TEST(ProfileStore, ConcurrentMoleWritesAreNotLost) {
  TempDir dir;
  ProfileStore store(dir.path());
  const auto id = store.create("Fi").id;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) store.add_mole(id, draft(t / 10.0, i / 10.0));
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(store.get(id)->moles.size(), 80u);
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
    EXPECT_EQ(entry.path().string().find(".tmp"), std::string::npos) << entry.path();
  }
}

TEST(ProfileJson, RoundTrip) {
  Profile p{std::string(32, 'c'), "Gus", "2024-06-01T10:00:00Z", {}};
  MoleRecord m = draft(0.3, 0.4);
  m.id = std::string(32, 'd');
  m.captured_at = "2024-06-01T10:05:00Z";
  p.moles.push_back(m);
  const auto doc = to_json(p);
  EXPECT_EQ(doc["mole_count"], 1);
  const Profile back = profile_from_json(doc);
  EXPECT_EQ(back.name, "Gus");
  EXPECT_EQ(back.moles[0].id, m.id);
  EXPECT_THROW(profile_from_json(nlohmann::json::parse(R"({"id":1})")), Error);
}
