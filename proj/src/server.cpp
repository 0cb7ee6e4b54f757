#include "skincure/server.hpp"

#include <httplib.h>

#include <absl/time/time.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <unordered_map>
#include <nlohmann/json.hpp>

#include "skincure/analysis.hpp"
#include "skincure/error.hpp"
#include "skincure/profile_store.hpp"
#include "skincure/ttsb.hpp"

namespace skincure::server {
namespace {

using json = nlohmann::json;
using SysClock = std::chrono::system_clock;

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, json{{"error", {{"code", code}, {"message", message}}}}.dump());
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownSpfLevel:
    case ErrorCode::ImageTooSmall:
    case ErrorCode::NoLesionFound:
    case ErrorCode::LesionTouchesBorder:
    case ErrorCode::DegenerateLesion:
      return 422;
    case ErrorCode::DecodeFailed:
    case ErrorCode::EmptyInput:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::NoDataForLocation:
      return 404;
    case ErrorCode::SourceUnavailable:
      return 502;
    default:
      return 500;
  }
}

// Runs a handler body, turning typed failures into error responses.
template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const HttpError& e) {
    send_error(res, e.status, e.code, e.message);
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception&) {
    throw HttpError{400, "MalformedBody", "request body is not valid JSON"};
  }
  if (!body.is_object()) throw HttpError{400, "MalformedBody", "request body must be a JSON object"};
  return body;
}

double parse_number(const std::string& text, const char* name) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw HttpError{400, "MalformedQuery", std::string(name) + " must be a number"};
  }
  return v;
}

double required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw HttpError{400, "MalformedQuery", std::string("missing query parameter ") + name};
  return parse_number(req.get_param_value(name), name);
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  return absl::FormatTime("%Y-%m-%dT%H:%M:%SZ", absl::FromUnixSeconds(t.time_since_epoch().count()),
                          absl::UTCTimeZone());
}

std::chrono::sys_seconds parse_timestamp(const std::string& text) {
  absl::Time t;
  std::string err;
  if (!absl::ParseTime(absl::RFC3339_full, text, &t, &err)) {
    throw HttpError{400, "MalformedTimestamp", "expected an RFC 3339 timestamp, got '" + text + "'"};
  }
  return std::chrono::sys_seconds(std::chrono::seconds(absl::ToUnixSeconds(t)));
}

const json& field(const json& body, const char* name) {
  static const json null_value;
  const auto it = body.find(name);
  return it == body.end() ? null_value : *it;
}

double number_field(const json& body, const char* name, std::optional<double> fallback) {
  const json& v = field(body, name);
  if (v.is_null()) {
    if (fallback) return *fallback;
    throw HttpError{400, "MalformedBody", std::string("missing field ") + name};
  }
  if (!v.is_number()) throw HttpError{400, "MalformedBody", std::string(name) + " must be a number"};
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw HttpError{400, "MalformedBody", std::string(name) + " must be finite"};
  return d;
}

ttsb::EnvironmentFlags parse_environment_field(const json& v) {
  ttsb::EnvironmentFlags flags;
  auto set = [&](const std::string& name, bool on) {
    const auto env = ttsb::parse_environment(name);
    if (!env) throw HttpError{422, "InvalidArgument", "unknown environment '" + name + "'"};
    flags.set(*env, on);
  };
  if (v.is_null()) return flags;
  if (v.is_array()) {
    for (const auto& item : v) {
      if (!item.is_string()) throw HttpError{400, "MalformedBody", "environment entries must be strings"};
      set(item.get<std::string>(), true);
    }
  } else if (v.is_object()) {
    for (const auto& [name, on] : v.items()) {
      if (!on.is_boolean()) throw HttpError{400, "MalformedBody", "environment flags must be booleans"};
      set(name, on.get<bool>());
    }
  } else if (v.is_string()) {
    set(v.get<std::string>(), true);
  } else {
    throw HttpError{400, "MalformedBody", "environment must be a list, object or string"};
  }
  return flags;
}

const ttsb::SpfLevel& parse_spf_field(const json& v) {
  if (v.is_null()) return ttsb::spf_level(0);
  if (v.is_string()) return ttsb::spf_level(v.get<std::string>());
  if (v.is_number()) {
    const double d = v.get<double>();
    if (d != std::floor(d)) throw Error(ErrorCode::UnknownSpfLevel, "SPF must be a whole number");
    return ttsb::spf_level(static_cast<int>(d));
  }
  throw HttpError{400, "MalformedBody", "spf must be a number or a label"};
}

json curve_json(const uv::UvDayCurve& c) {
  json hours = json::array();
  for (int h = uv::kFirstCurveHour; h <= uv::kLastCurveHour; ++h) hours.push_back(h);
  return {{"date", uv::format_date(c.date)},
          {"lat", c.location.lat},
          {"lon", c.location.lon},
          {"hours", hours},
          {"uv_index", c.samples}};
}

}  // namespace

ServerConfig ServerConfig::from_env() {
  ServerConfig c;
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("PORT")) {
    char* end = nullptr;
    const long port = std::strtol(v->c_str(), &end, 10);
    if (*end || port < 0 || port > 65535) throw Error(ErrorCode::InvalidArgument, "PORT must be 0..65535");
    c.port = static_cast<int>(port);
  }
  if (auto v = env("MODEL_PATH")) c.model_path = *v;
  if (auto v = env("DATA_DIR")) c.data_dir = *v;
  if (auto v = env("TZ_DEFAULT")) c.tz = *v;
  if (auto v = env("STATIC_DIR")) c.static_dir = *v;
  if (env("UV_SOURCE") || env("UV_FIXTURE_PATH") || env("UV_HTTP_URL")) {
    c.uv = uv::UvSourceConfig::from_env();
    if (!env("UV_SOURCE") && env("UV_HTTP_URL") && !env("UV_FIXTURE_PATH")) c.uv->source = "http";
  }
  return c;
}

struct ApiServer::Impl {
  ServerConfig config;
  std::shared_ptr<const classify::TwoLevelModel> model;
  std::shared_ptr<const uv::UvSource> uv_source;
  Clock clock;
  profiles::ProfileStore store;
  httplib::Server http;
  std::mutex log_mutex;

  struct CacheEntry {
    SysClock::time_point expires;
    std::string body;
  };
  std::mutex cache_mutex;
  std::unordered_map<std::string, CacheEntry> uv_cache;

  Impl(ServerConfig cfg, std::shared_ptr<const classify::TwoLevelModel> m, std::shared_ptr<const uv::UvSource> u,
       Clock c)
      : config(std::move(cfg)),
        model(std::move(m)),
        uv_source(std::move(u)),
        clock(c ? std::move(c) : Clock([] { return SysClock::now(); })),
        store(config.data_dir) {
    routes();
  }

  std::chrono::sys_seconds now_seconds() const { return std::chrono::floor<std::chrono::seconds>(clock()); }

  // Serves a UV body from the cache or computes and stores it.
  template <class F>
  void cached_uv(const std::string& key, httplib::Response& res, F&& compute) {
    const auto now = clock();
    {
      std::lock_guard lock(cache_mutex);
      const auto it = uv_cache.find(key);
      if (it != uv_cache.end() && it->second.expires > now) {
        res.set_header("X-Cache", "hit");
        send_json(res, 200, it->second.body);
        return;
      }
    }
    if (!uv_source) throw Error(ErrorCode::SourceUnavailable, "no UV provider configured");
    std::string body = compute();
    {
      std::lock_guard lock(cache_mutex);
      uv_cache[key] = {now + config.uv_cache_ttl, body};
    }
    res.set_header("X-Cache", "miss");
    send_json(res, 200, body);
  }

  void log(const httplib::Request& req, const httplib::Response& res) {
    if (!config.log_requests) return;
    const json line = {{"ts", format_timestamp(now_seconds())},
                       {"method", req.method},
                       {"path", req.path},
                       {"status", res.status},
                       {"remote", req.remote_addr},
                       {"bytes_in", req.body.size()},
                       {"bytes_out", res.body.size()}};
    std::lock_guard lock(log_mutex);
    std::cout << line.dump() << std::endl;
  }

  void routes() {
    http.set_payload_max_length(config.max_image_bytes * 4);
    http.set_logger([this](const httplib::Request& req, const httplib::Response& res) { log(req, res); });
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
      send_error(res, 500, "Internal", "unhandled server error");
    });
    if (config.static_dir) http.set_mount_point("/", config.static_dir->string());

    http.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) { healthz(res); });
    http.Post("/api/v1/analyze", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { analyze(req, res); });
    });
    http.Post("/api/v1/ttsb", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { ttsb_endpoint(req, res); });
    });
    http.Get("/api/v1/skin-types", [](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& s : ttsb::skin_type_catalog()) {
        arr.push_back({{"rank", s.rank}, {"name", s.name}, {"ts_minutes", s.ts_minutes}, {"description", s.description}});
      }
      send_json(res, 200, arr.dump());
    });
    http.Get("/api/v1/spf-levels", [](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (const auto& s : ttsb::spf_table()) arr.push_back({{"label", s.label()}, {"weight", s.weight}});
      send_json(res, 200, arr.dump());
    });
    http.Get("/api/v1/environments", [](const httplib::Request&, httplib::Response& res) {
      json arr = json::array();
      for (auto e : ttsb::kAllEnvironments) arr.push_back(ttsb::to_string(e));
      send_json(res, 200, arr.dump());
    });
    http.Get("/api/v1/uv/current", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { uv_current(req, res); });
    });
    http.Get("/api/v1/uv/day", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { uv_day(req, res); });
    });
    http.Post("/api/v1/uv/notify", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { uv_notify(req, res); });
    });
    http.Get("/api/v1/profiles", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json arr = json::array();
        for (const auto& p : store.list()) arr.push_back(profiles::to_json(p));
        send_json(res, 200, arr.dump());
      });
    });
    http.Post("/api/v1/profiles", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const json& name = field(body, "name");
        if (!name.is_string()) throw HttpError{400, "MalformedBody", "name must be a string"};
        if (name.get<std::string>().empty()) throw HttpError{422, "InvalidArgument", "name must not be empty"};
        send_json(res, 201, profiles::to_json(store.create(name.get<std::string>())).dump());
      });
    });
    http.Get(R"(/api/v1/profiles/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto p = store.get(req.matches[1]);
        if (!p) throw Error(ErrorCode::NotFound, "no profile " + std::string(req.matches[1]));
        send_json(res, 200, profiles::to_json(*p).dump());
      });
    });
    http.Delete(R"(/api/v1/profiles/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        store.remove(req.matches[1]);
        res.status = 204;
      });
    });
    http.Post(R"(/api/v1/profiles/([^/]+)/moles)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { add_mole(req, res); });
    });
    http.Get(R"(/api/v1/blobs/([0-9a-f]{64}))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto path = store.blob_path(req.matches[1]);
        if (!path) throw Error(ErrorCode::NotFound, "no such image");
        const auto bytes = read_file_bytes(*path);
        res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
      });
    });
  }

  void healthz(httplib::Response& res) {
    json model_status = {{"loaded", model != nullptr}};
    if (model) {
      model_status["k"] = model->k;
      model_status["layout_version"] = model->layout_version;
      model_status["training_samples"] = model->stage_one.samples().size();
    }
    json uv_status = {{"configured", uv_source != nullptr}};
    if (uv_source) uv_status["kind"] = uv_source->kind();
    send_json(res, 200, json{{"status", "ok"}, {"model", model_status}, {"uv_provider", uv_status}}.dump());
  }

  static std::optional<std::string> form_value(const httplib::Request& req, const char* key) {
    if (!req.has_file(key)) return std::nullopt;
    return req.get_file_value(key).content;
  }

  void analyze(const httplib::Request& req, httplib::Response& res) {
    if (!model) throw HttpError{503, "ModelNotLoaded", "no classifier model is loaded"};

    std::string bytes;
    std::optional<std::string> profile_id, mole_id, side_text, x_text, y_text;
    if (req.is_multipart_form_data()) {
      auto image = form_value(req, "image");
      if (!image) throw HttpError{400, "MissingImage", "multipart field 'image' is required"};
      bytes = std::move(*image);
      profile_id = form_value(req, "profile_id");
      mole_id = form_value(req, "mole_id");
      side_text = form_value(req, "body_side");
      x_text = form_value(req, "x");
      y_text = form_value(req, "y");
    } else {
      bytes = req.body;
      if (req.has_param("profile_id")) profile_id = req.get_param_value("profile_id");
      if (req.has_param("mole_id")) mole_id = req.get_param_value("mole_id");
      if (req.has_param("body_side")) side_text = req.get_param_value("body_side");
      if (req.has_param("x")) x_text = req.get_param_value("x");
      if (req.has_param("y")) y_text = req.get_param_value("y");
    }
    if (bytes.empty()) throw HttpError{400, "EmptyInput", "no image data"};
    if (bytes.size() > config.max_image_bytes) {
      throw HttpError{400, "PayloadTooLarge", "image exceeds " + std::to_string(config.max_image_bytes) + " bytes"};
    }

    // Validate the profile target before spending time on the pipeline.
    std::optional<profiles::MoleRecord> draft;
    if (profile_id) {
      if (!store.get(*profile_id)) throw Error(ErrorCode::NotFound, "no profile " + *profile_id);
      if (!mole_id) {
        profiles::MoleRecord m;
        const auto side = profiles::parse_body_side(side_text.value_or(""));
        if (!side) throw HttpError{422, "InvalidArgument", "body_side must be front or back"};
        m.body_side = *side;
        if (!x_text || !y_text) throw HttpError{422, "InvalidArgument", "x and y are required for a new mole"};
        m.x = parse_number(*x_text, "x");
        m.y = parse_number(*y_text, "y");
        if (!(m.x >= 0.0 && m.x <= 1.0 && m.y >= 0.0 && m.y <= 1.0)) {
          throw HttpError{422, "InvalidArgument", "mole position must lie in the unit square"};
        }
        draft = m;
      }
    }

    const auto span = std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size());
    const AnalysisResponse result = analyze_image(span, *model).response;
    std::string body = to_json(result);

    if (profile_id) {
      const std::string ref = store.put_blob(span);
      const profiles::StoredResult stored{result.label, result.stage_one_score, result.stage_two_score,
                                          result.area_px};
      profiles::MoleRecord mole;
      if (mole_id) {
        mole = store.update_mole(*profile_id, *mole_id, ref, stored);
      } else {
        draft->image_ref = ref;
        draft->latest_result = stored;
        mole = store.add_mole(*profile_id, *draft);
      }
      auto doc = nlohmann::ordered_json::parse(body);
      doc["mole"] = nlohmann::ordered_json::parse(profiles::to_json(mole).dump());
      doc["profile_id"] = *profile_id;
      body = doc.dump();
    }
    send_json(res, 200, body);
  }

  void ttsb_endpoint(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const double uv_index = number_field(body, "uv_index", std::nullopt);
    if (uv_index < 0.0) throw HttpError{422, "InvalidArgument", "uv_index must not be negative"};
    const double altitude = number_field(body, "altitude_ft", 0.0);
    if (altitude < 0.0) throw HttpError{422, "InvalidArgument", "altitude_ft must not be negative"};
    const double skin = number_field(body, "skin_type", std::nullopt);
    if (skin != std::floor(skin)) throw HttpError{422, "InvalidArgument", "skin_type must be a whole number"};
    const auto& skin_type = ttsb::skin_type(static_cast<int>(std::clamp(skin, -1.0, 100.0)));
    const auto& spf = parse_spf_field(field(body, "spf"));
    const auto env = parse_environment_field(field(body, "environment"));
    const json& now_field = field(body, "now");
    std::chrono::sys_seconds now = now_seconds();
    if (!now_field.is_null()) {
      if (!now_field.is_string()) throw HttpError{400, "MalformedBody", "now must be a timestamp string"};
      now = parse_timestamp(now_field.get<std::string>());
    }

    const ttsb::TtsbInput input(uv_index, altitude, skin_type, env, spf);
    const ttsb::TtsbOutcome outcome = ttsb::compute_ttsb(input);
    const auto alarm = ttsb::schedule_burn_alarm(now, outcome);
    const bool burn = outcome.kind == ttsb::TtsbOutcome::Kind::BurnIn;
    nlohmann::ordered_json out;
    out["kind"] = burn ? "BurnIn" : "NoBurnRisk";
    out["minutes"] = burn ? nlohmann::ordered_json(outcome.minutes) : nlohmann::ordered_json(nullptr);
    out["denominator"] = outcome.denominator;
    out["alarm_at"] = alarm ? nlohmann::ordered_json(format_timestamp(*alarm)) : nlohmann::ordered_json(nullptr);
    out["input"] = {{"uv_index", input.uv_index()},
                    {"altitude_ft", input.altitude_ft()},
                    {"skin_type", input.skin().rank},
                    {"spf", input.spf().label()}};
    send_json(res, 200, out.dump());
  }

  uv::GeoPoint location(const httplib::Request& req) {
    const double lat = required_param(req, "lat");
    const double lon = required_param(req, "lon");
    return uv::GeoPoint::make(lat, lon);
  }

  static std::string location_key(const uv::GeoPoint& p) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", p.lat, p.lon);
    return buf;
  }

  void uv_current(const httplib::Request& req, httplib::Response& res) {
    const auto loc = location(req);
    std::optional<std::chrono::sys_seconds> at;
    if (req.has_param("at")) at = parse_timestamp(req.get_param_value("at"));
    const std::string key = "current|" + location_key(loc) + "|" + (at ? format_timestamp(*at) : "now");
    cached_uv(key, res, [&] {
      const auto obs = uv_source->current_uv(loc, at.value_or(now_seconds()));
      nlohmann::ordered_json out;
      out["at"] = format_timestamp(obs.at);
      out["lat"] = obs.location.lat;
      out["lon"] = obs.location.lon;
      out["uv_index"] = obs.uv_index;
      out["condition"] = obs.condition ? nlohmann::ordered_json(*obs.condition) : nlohmann::ordered_json(nullptr);
      return out.dump();
    });
  }

  void uv_day(const httplib::Request& req, httplib::Response& res) {
    const auto loc = location(req);
    uv::Date date = uv::local_date(now_seconds(), config.tz);
    if (req.has_param("date")) {
      const auto parsed = uv::parse_date(req.get_param_value("date"));
      if (!parsed) throw HttpError{400, "MalformedQuery", "date must be YYYY-MM-DD"};
      date = *parsed;
    }
    const std::string key = "day|" + location_key(loc) + "|" + uv::format_date(date);
    cached_uv(key, res, [&] { return curve_json(uv_source->day_curve(loc, date)).dump(); });
  }

  void uv_notify(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const double threshold = number_field(body, "threshold", 6.0);
    if (threshold != std::floor(threshold)) throw HttpError{422, "InvalidArgument", "threshold must be whole"};
    auto state = uv::NotificationState::make(static_cast<int>(std::clamp(threshold, -1.0, 100.0)));
    if (const json& last = field(body, "last_notified_date"); !last.is_null()) {
      const auto d = last.is_string() ? uv::parse_date(last.get<std::string>()) : std::nullopt;
      if (!d) throw HttpError{400, "MalformedBody", "last_notified_date must be YYYY-MM-DD"};
      state.last_notified_date = d;
    }
    uv::UvObservation obs;
    obs.uv_index = number_field(body, "uv_index", std::nullopt);
    obs.at = now_seconds();
    if (const json& at = field(body, "at"); !at.is_null()) {
      if (!at.is_string()) throw HttpError{400, "MalformedBody", "at must be a timestamp string"};
      obs.at = parse_timestamp(at.get<std::string>());
    }
    const auto decision = uv::should_notify(state, obs, config.tz);
    json out = {{"notify", decision.notify},
                {"state",
                 {{"threshold", decision.state.threshold},
                  {"last_notified_date", decision.state.last_notified_date
                                             ? json(uv::format_date(*decision.state.last_notified_date))
                                             : json(nullptr)}}}};
    send_json(res, 200, out.dump());
  }

  void add_mole(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    profiles::MoleRecord m;
    const json& side = field(body, "body_side");
    if (!side.is_string()) throw HttpError{400, "MalformedBody", "body_side must be a string"};
    const auto parsed = profiles::parse_body_side(side.get<std::string>());
    if (!parsed) throw HttpError{422, "InvalidArgument", "body_side must be front or back"};
    m.body_side = *parsed;
    const json& pos = field(body, "position");
    if (!pos.is_object()) throw HttpError{400, "MalformedBody", "position must be an object with x and y"};
    m.x = number_field(pos, "x", std::nullopt);
    m.y = number_field(pos, "y", std::nullopt);
    if (const json& ref = field(body, "image_ref"); !ref.is_null()) {
      if (!ref.is_string()) throw HttpError{400, "MalformedBody", "image_ref must be a string"};
      m.image_ref = ref.get<std::string>();
    }
    const auto mole = store.add_mole(req.matches[1], m);
    send_json(res, 201, profiles::to_json(mole).dump());
  }
};

ApiServer::ApiServer(ServerConfig config, std::shared_ptr<const classify::TwoLevelModel> model,
                     std::shared_ptr<const uv::UvSource> uv_source, Clock clock)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(model), std::move(uv_source), std::move(clock))) {}

ApiServer::~ApiServer() { stop(); }

std::unique_ptr<ApiServer> ApiServer::from_config(const ServerConfig& config) {
  std::shared_ptr<const classify::TwoLevelModel> model;
  if (config.model_path) model = std::make_shared<const classify::TwoLevelModel>(classify::load_model(*config.model_path));
  std::shared_ptr<const uv::UvSource> source;
  if (config.uv) source = uv::make_uv_source(*config.uv);
  return std::make_unique<ApiServer>(config, std::move(model), std::move(source));
}

int ApiServer::bind() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(impl_->config.host);
  } else if (!impl_->http.bind_to_port(impl_->config.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::IoError, "cannot bind " + impl_->config.host + ":" + std::to_string(impl_->config.port));
  }
  return port;
}

bool ApiServer::run() { return impl_->http.listen_after_bind(); }

void ApiServer::stop() {
  if (impl_) impl_->http.stop();
}

void ApiServer::wait_until_ready() const { impl_->http.wait_until_ready(); }

const ServerConfig& ApiServer::config() const noexcept { return impl_->config; }

}  // namespace skincure::server
