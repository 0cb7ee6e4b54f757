#pragma once

// UV observations from a pluggable source (recorded CSV fixture or an HTTP
// backend), the 6 AM - 6 PM day curve, and the once-per-day notification rule.

#include <array>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace skincure::uv {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::year_month_day;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  /// Throws Error(InvalidArgument) when out of [-90,90] x [-180,180].
  static GeoPoint make(double lat, double lon);
};

struct UvObservation {
  Timestamp at;
  GeoPoint location;
  double uv_index = 0.0;
  std::optional<std::string> condition;
};

inline constexpr int kFirstCurveHour = 6;
inline constexpr int kLastCurveHour = 18;
inline constexpr std::size_t kCurveSamples = kLastCurveHour - kFirstCurveHour + 1;

struct UvDayCurve {
  Date date;
  GeoPoint location;
  std::array<double, kCurveSamples> samples{};  // local hours 6..18
};

/// One recorded (local hour, uv) point.
struct HourSample {
  double hour = 0.0;
  double uv_index = 0.0;
};

/// Piecewise-linear UV over local time of day, flat beyond the end samples.
/// Samples are sorted by hour; a repeated hour keeps the last value.
class DaySeries {
 public:
  explicit DaySeries(std::vector<HourSample> samples);

  double at_hour(double hour) const;
  std::array<double, kCurveSamples> curve() const;
  bool empty() const noexcept { return samples_.empty(); }

 private:
  std::vector<HourSample> samples_;
};

/// Local calendar date and fractional hour of `t` in an IANA zone.
/// Unknown zone names throw Error(InvalidArgument).
Date local_date(Timestamp t, const std::string& tz_name);
double local_hour(Timestamp t, const std::string& tz_name);
std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view text);

class UvSource {
 public:
  virtual ~UvSource() = default;

  /// Throws Error(SourceUnavailable) or Error(NoDataForLocation).
  virtual UvObservation current_uv(const GeoPoint& location, Timestamp at) const = 0;
  virtual UvDayCurve day_curve(const GeoPoint& location, Date date) const = 0;
  virtual std::string kind() const = 0;
};

struct FixtureOptions {
  std::filesystem::path path;
  std::string tz = "UTC";
  double match_radius_deg = 0.1;
};

/// CSV fixture with header `date,hour,lat,lon,uv_index`; hour is local time.
/// The file is re-read on every query so edits show up without a restart.
/// Dates absent from the file replay the latest recorded date not after the
/// query (or the earliest one if the query precedes the recording).
class FixtureUvSource final : public UvSource {
 public:
  explicit FixtureUvSource(FixtureOptions options);

  UvObservation current_uv(const GeoPoint& location, Timestamp at) const override;
  UvDayCurve day_curve(const GeoPoint& location, Date date) const override;
  std::string kind() const override { return "fixture"; }

 private:
  DaySeries series_for(const GeoPoint& location, Date date) const;

  FixtureOptions options_;
};

struct HttpOptions {
  std::string url;  // e.g. http://host:8081/uv
  std::string tz = "UTC";
  std::chrono::seconds timeout{5};
  std::chrono::seconds refresh_interval{10};
};

/// GET {url}?lat=..&lon=..&date=YYYY-MM-DD returning
/// {"date":..,"lat":..,"lon":..,"samples":[{"hour":h,"uv_index":u},...]}.
class HttpUvSource final : public UvSource {
 public:
  explicit HttpUvSource(HttpOptions options);

  UvObservation current_uv(const GeoPoint& location, Timestamp at) const override;
  UvDayCurve day_curve(const GeoPoint& location, Date date) const override;
  std::string kind() const override { return "http"; }

  const HttpOptions& options() const noexcept { return options_; }

 private:
  DaySeries fetch(const GeoPoint& location, Date date) const;

  HttpOptions options_;
};

struct UvSourceConfig {
  std::string source = "fixture";  // fixture | http
  std::filesystem::path fixture_path;
  std::string http_url;
  std::string tz = "UTC";

  /// Reads UV_SOURCE, UV_FIXTURE_PATH, UV_HTTP_URL and TZ_DEFAULT.
  static UvSourceConfig from_env();
};

std::unique_ptr<UvSource> make_uv_source(const UvSourceConfig& config);

struct NotificationState {
  int threshold = 6;
  std::optional<Date> last_notified_date;

  /// Throws Error(InvalidArgument) unless 0 <= threshold <= 10.
  static NotificationState make(int threshold);
};

struct NotifyDecision {
  bool notify = false;
  NotificationState state;
};

/// Fires the first time per local calendar day that the observed UV reaches
/// the threshold.
NotifyDecision should_notify(const NotificationState& state, const UvObservation& obs,
                             const std::string& tz_name = "UTC");

}  // namespace skincure::uv
