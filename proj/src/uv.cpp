#include "skincure/uv.hpp"

#include <absl/time/civil_time.h>
#include <absl/time/time.h>
#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>

#include "skincure/csv.hpp"
#include "skincure/error.hpp"

namespace skincure::uv {
namespace {

absl::TimeZone load_zone(const std::string& name) {
  absl::TimeZone tz;
  if (!absl::LoadTimeZone(name, &tz)) {
    throw Error(ErrorCode::InvalidArgument, "unknown time zone '" + name + "'");
  }
  return tz;
}

absl::CivilSecond to_civil(Timestamp t, const std::string& tz_name) {
  return absl::ToCivilSecond(absl::FromUnixSeconds(t.time_since_epoch().count()), load_zone(tz_name));
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::SourceUnavailable, std::string("bad ") + what + " value '" + s + "'");
  }
  return v;
}

int date_key(Date d) {
  return static_cast<int>(d.year()) * 10000 + static_cast<int>(static_cast<unsigned>(d.month())) * 100 +
         static_cast<int>(static_cast<unsigned>(d.day()));
}

std::string getenv_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

}  // namespace

GeoPoint GeoPoint::make(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 ||
      lon > 180.0) {
    throw Error(ErrorCode::InvalidArgument, "location out of range");
  }
  return GeoPoint{lat, lon};
}

DaySeries::DaySeries(std::vector<HourSample> samples) {
  std::stable_sort(samples.begin(), samples.end(),
                   [](const HourSample& a, const HourSample& b) { return a.hour < b.hour; });
  for (const auto& s : samples) {
    if (!samples_.empty() && samples_.back().hour == s.hour) {
      samples_.back() = s;
    } else {
      samples_.push_back(s);
    }
  }
}

double DaySeries::at_hour(double hour) const {
  if (samples_.empty()) return 0.0;
  if (hour <= samples_.front().hour) return samples_.front().uv_index;
  if (hour >= samples_.back().hour) return samples_.back().uv_index;
  auto hi = std::lower_bound(samples_.begin(), samples_.end(), hour,
                             [](const HourSample& s, double h) { return s.hour < h; });
  if (hi->hour == hour) return hi->uv_index;
  auto lo = std::prev(hi);
  const double t = (hour - lo->hour) / (hi->hour - lo->hour);
  return lo->uv_index + t * (hi->uv_index - lo->uv_index);
}

std::array<double, kCurveSamples> DaySeries::curve() const {
  std::array<double, kCurveSamples> out{};
  for (std::size_t i = 0; i < kCurveSamples; ++i) {
    out[i] = at_hour(static_cast<double>(kFirstCurveHour) + static_cast<double>(i));
  }
  return out;
}

Date local_date(Timestamp t, const std::string& tz_name) {
  const absl::CivilSecond cs = to_civil(t, tz_name);
  return Date{std::chrono::year{static_cast<int>(cs.year())},
              std::chrono::month{static_cast<unsigned>(cs.month())},
              std::chrono::day{static_cast<unsigned>(cs.day())}};
}

double local_hour(Timestamp t, const std::string& tz_name) {
  const absl::CivilSecond cs = to_civil(t, tz_name);
  return cs.hour() + cs.minute() / 60.0 + cs.second() / 3600.0;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<Date> parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && p == text.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return std::nullopt;
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

// ---- fixture ---------------------------------------------------------------

FixtureUvSource::FixtureUvSource(FixtureOptions options) : options_(std::move(options)) {
  load_zone(options_.tz);
}

DaySeries FixtureUvSource::series_for(const GeoPoint& location, Date date) const {
  std::vector<csv::Row> rows;
  try {
    rows = csv::read_file(options_.path);
  } catch (const Error& e) {
    throw Error(ErrorCode::SourceUnavailable, e.what());
  }
  if (rows.empty() || rows.front() != csv::Row{"date", "hour", "lat", "lon", "uv_index"}) {
    throw Error(ErrorCode::SourceUnavailable,
                "fixture header must be date,hour,lat,lon,uv_index: " + options_.path.string());
  }

  struct Located {
    GeoPoint where;
    std::map<int, std::vector<HourSample>> by_date;
  };
  std::vector<Located> locations;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5) {
      throw Error(ErrorCode::SourceUnavailable, "fixture row " + std::to_string(i + 1) + " has wrong arity");
    }
    const auto d = parse_date(r[0]);
    if (!d) throw Error(ErrorCode::SourceUnavailable, "bad fixture date '" + r[0] + "'");
    const double hour = parse_double(r[1], "hour");
    const GeoPoint p{parse_double(r[2], "lat"), parse_double(r[3], "lon")};
    const double uv = parse_double(r[4], "uv_index");
    if (uv < 0.0) throw Error(ErrorCode::SourceUnavailable, "negative uv_index in fixture");
    auto it = std::find_if(locations.begin(), locations.end(), [&](const Located& l) {
      return l.where.lat == p.lat && l.where.lon == p.lon;
    });
    if (it == locations.end()) {
      locations.push_back({p, {}});
      it = std::prev(locations.end());
    }
    it->by_date[date_key(*d)].push_back({hour, uv});
  }

  const Located* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& l : locations) {
    const double dist = std::max(std::abs(l.where.lat - location.lat), std::abs(l.where.lon - location.lon));
    if (dist <= options_.match_radius_deg && dist < best_dist) {
      best = &l;
      best_dist = dist;
    }
  }
  if (!best || best->by_date.empty()) {
    throw Error(ErrorCode::NoDataForLocation, "no fixture samples near the requested location");
  }

  const int key = date_key(date);
  auto it = best->by_date.upper_bound(key);
  if (it == best->by_date.begin()) return DaySeries(it->second);
  return DaySeries(std::prev(it)->second);
}

UvObservation FixtureUvSource::current_uv(const GeoPoint& location, Timestamp at) const {
  const DaySeries series = series_for(location, local_date(at, options_.tz));
  return UvObservation{at, location, series.at_hour(local_hour(at, options_.tz)), std::nullopt};
}

UvDayCurve FixtureUvSource::day_curve(const GeoPoint& location, Date date) const {
  return UvDayCurve{date, location, series_for(location, date).curve()};
}

// ---- http ------------------------------------------------------------------

HttpUvSource::HttpUvSource(HttpOptions options) : options_(std::move(options)) {
  load_zone(options_.tz);
}

DaySeries HttpUvSource::fetch(const GeoPoint& location, Date date) const {
  // Split "scheme://host[:port]/path" into the client base and request path.
  const auto scheme_end = options_.url.find("://");
  const auto path_start =
      options_.url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = options_.url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : options_.url.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  httplib::Params params{{"lat", std::to_string(location.lat)},
                         {"lon", std::to_string(location.lon)},
                         {"date", format_date(date)}};
  auto res = client.Get(path, params, httplib::Headers{});
  if (!res) {
    throw Error(ErrorCode::SourceUnavailable, "UV backend unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status == 404) throw Error(ErrorCode::NoDataForLocation, "UV backend has no data for location");
  if (res->status != 200) {
    throw Error(ErrorCode::SourceUnavailable, "UV backend returned HTTP " + std::to_string(res->status));
  }
  try {
    const auto body = nlohmann::json::parse(res->body);
    std::vector<HourSample> samples;
    for (const auto& s : body.at("samples")) {
      samples.push_back({s.at("hour").get<double>(), s.at("uv_index").get<double>()});
    }
    if (samples.empty()) throw Error(ErrorCode::NoDataForLocation, "UV backend returned no samples");
    return DaySeries(std::move(samples));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SourceUnavailable, std::string("malformed UV backend body: ") + e.what());
  }
}

UvObservation HttpUvSource::current_uv(const GeoPoint& location, Timestamp at) const {
  const DaySeries series = fetch(location, local_date(at, options_.tz));
  return UvObservation{at, location, series.at_hour(local_hour(at, options_.tz)), std::nullopt};
}

UvDayCurve HttpUvSource::day_curve(const GeoPoint& location, Date date) const {
  return UvDayCurve{date, location, fetch(location, date).curve()};
}

// ---- configuration ---------------------------------------------------------

UvSourceConfig UvSourceConfig::from_env() {
  UvSourceConfig c;
  c.source = getenv_or("UV_SOURCE", c.source);
  c.fixture_path = getenv_or("UV_FIXTURE_PATH", "");
  c.http_url = getenv_or("UV_HTTP_URL", "");
  c.tz = getenv_or("TZ_DEFAULT", c.tz);
  return c;
}

std::unique_ptr<UvSource> make_uv_source(const UvSourceConfig& config) {
  if (config.source == "fixture") {
    if (config.fixture_path.empty()) {
      throw Error(ErrorCode::InvalidArgument, "UV_FIXTURE_PATH is required for the fixture source");
    }
    return std::make_unique<FixtureUvSource>(FixtureOptions{config.fixture_path, config.tz});
  }
  if (config.source == "http") {
    if (config.http_url.empty()) {
      throw Error(ErrorCode::InvalidArgument, "UV_HTTP_URL is required for the http source");
    }
    HttpOptions opts;
    opts.url = config.http_url;
    opts.tz = config.tz;
    return std::make_unique<HttpUvSource>(std::move(opts));
  }
  throw Error(ErrorCode::InvalidArgument, "UV_SOURCE must be fixture or http, got '" + config.source + "'");
}

// ---- notification ----------------------------------------------------------

NotificationState NotificationState::make(int threshold) {
  if (threshold < 0 || threshold > 10) {
    throw Error(ErrorCode::InvalidArgument, "UV threshold must be 0..10");
  }
  return NotificationState{threshold, std::nullopt};
}

NotifyDecision should_notify(const NotificationState& state, const UvObservation& obs,
                             const std::string& tz_name) {
  const Date today = local_date(obs.at, tz_name);
  if (obs.uv_index >= state.threshold && state.last_notified_date != today) {
    NotificationState next = state;
    next.last_notified_date = today;
    return {true, next};
  }
  return {false, state};
}

}  // namespace skincure::uv
