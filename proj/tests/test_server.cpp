#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <future>
#include <thread>
#include <nlohmann/json.hpp>

#include "skincure/analysis.hpp"
#include "skincure/server.hpp"
#include "support.hpp"

using namespace skincure;
using json = nlohmann::json;
using testing_support::TempDir;

namespace {

const char* kUvFixture =
    "date,hour,lat,lon,uv_index\n"
    "2024-06-01,6,40.0,-74.0,1\n"
    "2024-06-01,12,40.0,-74.0,9\n"
    "2024-06-01,18,40.0,-74.0,2\n";

// 2024-06-01T12:00:00Z
constexpr std::int64_t kNoon = 1717243200;

class Service : public ::testing::Test {
 protected:
  TempDir dir;
  std::atomic<std::int64_t> now_s{kNoon};
  std::unique_ptr<server::ApiServer> api;
  std::thread thread;
  int port = 0;

  void SetUp() override { start(std::make_shared<classify::TwoLevelModel>(testing_support::fixture_model())); }

  void start(std::shared_ptr<const classify::TwoLevelModel> model) {
    testing_support::write_text(dir / "uv.csv", kUvFixture);
    server::ServerConfig cfg;
    cfg.host = "127.0.0.1";
    cfg.port = 0;
    cfg.data_dir = dir / "data";
    cfg.log_requests = false;
    auto uv_source = std::make_shared<uv::FixtureUvSource>(uv::FixtureOptions{dir / "uv.csv", "UTC"});
    api = std::make_unique<server::ApiServer>(cfg, std::move(model), uv_source, [this] {
      return std::chrono::system_clock::time_point(std::chrono::seconds(now_s.load()));
    });
    port = api->bind();
    thread = std::thread([this] { api->run(); });
    api->wait_until_ready();
  }

  void TearDown() override {
    api->stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(30, 0);
    return c;
  }

  static std::string png(const RgbImage& img) {
    const auto b = testing_support::png_bytes(img);
    return std::string(b.begin(), b.end());
  }

  httplib::Result post_json(const std::string& path, const json& body) {
    return client().Post(path, body.dump(), "application/json");
  }

  static std::string error_code(const httplib::Result& r) { return json::parse(r->body)["error"]["code"]; }
};

class ServiceWithoutModel : public Service {
 protected:
  void SetUp() override { start(nullptr); }
};

std::string lesion_png(classify::LesionClass c, std::uint64_t seed) {
  const auto b = testing_support::png_bytes(synth::make_lesion(c, seed).image);
  return std::string(b.begin(), b.end());
}

}  // namespace

TEST_F(Service, Healthz) {
  const auto r = client().Get("/healthz");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const auto j = json::parse(r->body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["model"]["loaded"], true);
  EXPECT_EQ(j["model"]["training_samples"], 30);
  EXPECT_EQ(j["uv_provider"]["kind"], "fixture");
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(Service, AnalyzeMultipartMatchesLibrary) {
  const std::string bytes = lesion_png(classify::LesionClass::Melanoma, 500);
  httplib::MultipartFormDataItems items = {{"image", bytes, "lesion.png", "image/png"}};
  const auto r = client().Post("/api/v1/analyze", items);
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto expected = analyze_image(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()),
                                      testing_support::fixture_model());
  EXPECT_EQ(r->body, to_json(expected.response));
  const auto j = json::parse(r->body);
  for (const char* key : {"class", "scores", "area_px", "bbox", "advisory"}) EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(Service, AnalyzeRawBody) {
  const auto r = client().Post("/api/v1/analyze", lesion_png(classify::LesionClass::Normal, 501), "image/png");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
}

TEST_F(Service, AnalyzeErrors) {
  auto text = client().Post("/api/v1/analyze", "definitely not an image", "text/plain");
  EXPECT_EQ(text->status, 400);
  EXPECT_EQ(error_code(text), "DecodeFailed");
  auto uniform = client().Post("/api/v1/analyze", png(RgbImage(200, 150, Rgb{128, 128, 128})), "image/png");
  EXPECT_EQ(uniform->status, 422);
  EXPECT_EQ(error_code(uniform), "NoLesionFound");
  auto empty = client().Post("/api/v1/analyze", "", "image/png");
  EXPECT_EQ(empty->status, 400);
  auto big = client().Post("/api/v1/analyze", std::string((16u << 20) + 1, '\0'), "application/octet-stream");
  ASSERT_TRUE(big);
  EXPECT_EQ(big->status, 400);
  EXPECT_EQ(error_code(big), "PayloadTooLarge");
}

TEST_F(ServiceWithoutModel, AnalyzeUnavailable) {
  const auto r = client().Post("/api/v1/analyze", lesion_png(classify::LesionClass::Normal, 1), "image/png");
  EXPECT_EQ(r->status, 503);
  EXPECT_EQ(error_code(r), "ModelNotLoaded");
  EXPECT_EQ(json::parse(client().Get("/healthz")->body)["model"]["loaded"], false);
}

TEST_F(Service, ConcurrentAnalysesAgree) {
  const std::string bytes = lesion_png(classify::LesionClass::Atypical, 502);
  std::vector<std::future<std::pair<int, std::string>>> futures;
  for (int i = 0; i < 8; ++i) {
    futures.push_back(std::async(std::launch::async, [&] {
      const auto r = client().Post("/api/v1/analyze", bytes, "image/png");
      return std::make_pair(r ? r->status : -1, r ? r->body : std::string());
    }));
  }
  std::vector<std::pair<int, std::string>> results;
  for (auto& f : futures) results.push_back(f.get());
  for (const auto& r : results) {
    EXPECT_EQ(r.first, 200);
    EXPECT_EQ(r.second, results.front().second);
  }
}

TEST_F(Service, TtsbWorkedExamples) {
  auto r = post_json("/api/v1/ttsb", {{"uv_index", 10}, {"skin_type", 3}, {"spf", 0}});
  ASSERT_EQ(r->status, 200) << r->body;
  auto j = json::parse(r->body);
  EXPECT_EQ(j["kind"], "BurnIn");
  EXPECT_DOUBLE_EQ(j["minutes"].get<double>(), 20.0);
  EXPECT_EQ(j["alarm_at"], "2024-06-01T12:20:00Z");
  r = post_json("/api/v1/ttsb", {{"uv_index", 10}, {"skin_type", 3}, {"spf", "15"}});
  EXPECT_NEAR(json::parse(r->body)["minutes"].get<double>(), 74.0, 1e-9);
  r = post_json("/api/v1/ttsb", {{"uv_index", 10}, {"skin_type", 3}, {"spf", 0}, {"environment", {"shade"}}});
  EXPECT_DOUBLE_EQ(json::parse(r->body)["minutes"].get<double>(), 40.0);
}

TEST_F(Service, TtsbEdgeCases) {
  auto r = post_json("/api/v1/ttsb", {{"uv_index", 0}, {"skin_type", 1}});
  ASSERT_EQ(r->status, 200);
  auto j = json::parse(r->body);
  EXPECT_EQ(j["kind"], "NoBurnRisk");
  EXPECT_TRUE(j["minutes"].is_null());
  EXPECT_TRUE(j["alarm_at"].is_null());
  EXPECT_EQ(post_json("/api/v1/ttsb", {{"uv_index", 5}, {"skin_type", 9}})->status, 422);
  EXPECT_EQ(post_json("/api/v1/ttsb", {{"uv_index", -1}, {"skin_type", 2}})->status, 422);
  EXPECT_EQ(post_json("/api/v1/ttsb", {{"uv_index", 5}, {"skin_type", 2}, {"spf", "12"}})->status, 422);
  EXPECT_EQ(post_json("/api/v1/ttsb", {{"skin_type", 2}})->status, 400);
  EXPECT_EQ(client().Post("/api/v1/ttsb", "{", "application/json")->status, 400);
}

TEST_F(Service, Catalogs) {
  EXPECT_EQ(json::parse(client().Get("/api/v1/skin-types")->body).size(), 6u);
  EXPECT_EQ(json::parse(client().Get("/api/v1/spf-levels")->body).size(), 12u);
  EXPECT_EQ(json::parse(client().Get("/api/v1/environments")->body).size(), 9u);
}

TEST_F(Service, UvCurrentAndDay) {
  auto r = client().Get("/api/v1/uv/current?lat=40&lon=-74");
  ASSERT_EQ(r->status, 200) << r->body;
  auto j = json::parse(r->body);
  EXPECT_DOUBLE_EQ(j["uv_index"].get<double>(), 9.0);
  EXPECT_EQ(j["at"], "2024-06-01T12:00:00Z");
  r = client().Get("/api/v1/uv/day?lat=40&lon=-74&date=2024-06-01");
  ASSERT_EQ(r->status, 200);
  j = json::parse(r->body);
  EXPECT_EQ(j["uv_index"].size(), 13u);
  EXPECT_EQ(j["hours"].front(), 6);
  EXPECT_DOUBLE_EQ(j["uv_index"][6].get<double>(), 9.0);
  EXPECT_EQ(client().Get("/api/v1/uv/current?lat=10&lon=10")->status, 404);
  EXPECT_EQ(client().Get("/api/v1/uv/current?lat=95&lon=10")->status, 422);
  EXPECT_EQ(client().Get("/api/v1/uv/current?lat=abc&lon=10")->status, 400);
}

TEST_F(Service, UvCacheExpiresAfterTtl) {
  const std::string path = "/api/v1/uv/current?lat=40&lon=-74&at=2024-06-01T12:00:00Z";
  auto first = client().Get(path);
  EXPECT_EQ(first->get_header_value("X-Cache"), "miss");
  testing_support::write_text(dir / "uv.csv", "date,hour,lat,lon,uv_index\n2024-06-01,12,40.0,-74.0,3\n");
  auto second = client().Get(path);
  EXPECT_EQ(second->get_header_value("X-Cache"), "hit");
  EXPECT_EQ(second->body, first->body);
  now_s += 11;
  auto third = client().Get(path);
  EXPECT_EQ(third->get_header_value("X-Cache"), "miss");
  EXPECT_DOUBLE_EQ(json::parse(third->body)["uv_index"].get<double>(), 3.0);
}

TEST_F(Service, UvDayCacheExpiry) {
  EXPECT_EQ(client().Get("/api/v1/uv/day?lat=40&lon=-74&date=2024-06-01")->status, 200);
  testing_support::write_text(dir / "uv.csv", "date,hour,lat,lon,uv_index\n2024-06-01,12,40.0,-74.0,4\n");
  now_s += 9;
  auto b = client().Get("/api/v1/uv/day?lat=40&lon=-74&date=2024-06-01");
  EXPECT_EQ(b->get_header_value("X-Cache"), "hit");
  EXPECT_DOUBLE_EQ(json::parse(b->body)["uv_index"][6].get<double>(), 9.0);
  now_s += 2;
  auto c = client().Get("/api/v1/uv/day?lat=40&lon=-74&date=2024-06-01");
  EXPECT_EQ(c->get_header_value("X-Cache"), "miss");
  EXPECT_DOUBLE_EQ(json::parse(c->body)["uv_index"][6].get<double>(), 4.0);
}

TEST_F(Service, UvNotify) {
  auto r = post_json("/api/v1/uv/notify", {{"threshold", 6}, {"uv_index", 7}, {"at", "2024-06-01T13:00:00Z"}});
  ASSERT_EQ(r->status, 200) << r->body;
  auto j = json::parse(r->body);
  EXPECT_EQ(j["notify"], true);
  EXPECT_EQ(j["state"]["last_notified_date"], "2024-06-01");
  r = post_json("/api/v1/uv/notify", {{"threshold", 6},
                                      {"uv_index", 8},
                                      {"last_notified_date", "2024-06-01"},
                                      {"at", "2024-06-01T15:00:00Z"}});
  EXPECT_EQ(json::parse(r->body)["notify"], false);
}

TEST_F(Service, ProfileCrud) {
  auto created = post_json("/api/v1/profiles", {{"name", "Ada"}});
  ASSERT_EQ(created->status, 201);
  const std::string id = json::parse(created->body)["id"];
  EXPECT_EQ(client().Get("/api/v1/profiles/" + id)->status, 200);
  EXPECT_EQ(json::parse(client().Get("/api/v1/profiles")->body).size(), 1u);

  auto mole = post_json("/api/v1/profiles/" + id + "/moles", {{"body_side", "back"}, {"position", {{"x", 0.2}, {"y", 0.4}}}});
  ASSERT_EQ(mole->status, 201) << mole->body;
  auto bad = post_json("/api/v1/profiles/" + id + "/moles", {{"body_side", "front"}, {"position", {{"x", 1.2}, {"y", 0.5}}}});
  EXPECT_EQ(bad->status, 422);
  EXPECT_EQ(json::parse(client().Get("/api/v1/profiles/" + id)->body)["moles"].size(), 1u);

  EXPECT_EQ(client().Delete("/api/v1/profiles/" + id)->status, 204);
  EXPECT_EQ(client().Delete("/api/v1/profiles/" + id)->status, 204);
  EXPECT_EQ(client().Get("/api/v1/profiles/" + id)->status, 404);
  EXPECT_EQ(post_json("/api/v1/profiles", {{"name", ""}})->status, 422);
  EXPECT_EQ(post_json("/api/v1/profiles", json::object())->status, 400);
}

TEST_F(Service, AnalyzePersistsToProfile) {
  const std::string id = json::parse(post_json("/api/v1/profiles", {{"name", "Bo"}})->body)["id"];
  const std::string bytes = lesion_png(classify::LesionClass::Melanoma, 503);
  httplib::MultipartFormDataItems items = {{"image", bytes, "m.png", "image/png"},
                                           {"profile_id", id, "", ""},
                                           {"body_side", "front", "", ""},
                                           {"x", "0.5", "", ""},
                                           {"y", "0.25", "", ""}};
  const auto r = client().Post("/api/v1/analyze", items);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto j = json::parse(r->body);
  EXPECT_EQ(j["profile_id"], id);
  const std::string ref = j["mole"]["image_ref"];
  const auto blob = client().Get("/api/v1/blobs/" + ref);
  ASSERT_EQ(blob->status, 200);
  EXPECT_EQ(blob->body, bytes);
  const auto profile = json::parse(client().Get("/api/v1/profiles/" + id)->body);
  ASSERT_EQ(profile["moles"].size(), 1u);
  EXPECT_EQ(profile["moles"][0]["latest_result"]["class"], j["class"]);

  items[1].content = std::string(32, 'f');
  EXPECT_EQ(client().Post("/api/v1/analyze", items)->status, 404);
}
