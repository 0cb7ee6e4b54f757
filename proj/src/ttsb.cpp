#include "skincure/ttsb.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "skincure/error.hpp"

namespace skincure::ttsb {
namespace {

constexpr std::array<SkinType, 6> kSkinTypes = {{
    {1, "Fair Light Skin", 67.0,
     "Very fair, often freckled; extremely UV sensitive, always burns, never tans."},
    {2, "Light Skin", 100.0,
     "Fair skin; very UV sensitive, burns easily, tans minimally."},
    {3, "Medium Light Skin", 200.0,
     "Light to medium skin; UV sensitive, sometimes burns, tans gradually."},
    {4, "Medium Dark Skin", 300.0,
     "Olive or light brown skin; moderately sensitive, burns minimally, tans well."},
    {5, "Dark Skin", 400.0,
     "Brown skin; low sensitivity, rarely burns, tans darkly."},
    {6, "Deep Dark Skin", 500.0,
     "Deeply pigmented skin; least sensitive, almost never burns."},
}};

constexpr std::array<SpfLevel, 12> kSpfTable = {{
    {0, false, 1.0},   {5, false, 1.3},   {10, false, 2.4}, {15, false, 3.7},
    {20, false, 4.5},  {25, false, 4.8},  {30, false, 7.5}, {35, false, 8.2},
    {40, false, 9.5},  {45, false, 11.3}, {50, false, 12.4}, {50, true, 13.7},
}};

// Environment coefficients, as multiples of UV.
constexpr double kSnow = 0.85;
constexpr double kAltitudePerFoot = 0.00487804;
constexpr double kSand = 0.2;
constexpr double kWetSand = 0.4;
constexpr double kGrass = 0.2;
constexpr double kWetGrass = 0.4;
constexpr double kBuilding = 0.15;
constexpr double kWater = 0.5;
constexpr double kShade = 0.5;
constexpr double kCloud = 0.2;

double flag(bool b) { return b ? 1.0 : 0.0; }

}  // namespace

std::span<const SkinType, 6> skin_type_catalog() noexcept { return kSkinTypes; }

const SkinType& skin_type(int rank) {
  if (rank < 1 || rank > 6) {
    throw Error(ErrorCode::InvalidArgument, "skin type rank must be 1..6, got " + std::to_string(rank));
  }
  return kSkinTypes[static_cast<std::size_t>(rank - 1)];
}

std::string SpfLevel::label() const {
  return std::to_string(level) + (plus ? "+" : "");
}

std::span<const SpfLevel, 12> spf_table() noexcept { return kSpfTable; }

const SpfLevel& spf_level(int level) {
  if (level > 50) return kSpfTable.back();
  for (const auto& row : kSpfTable) {
    if (!row.plus && row.level == level) return row;
  }
  throw Error(ErrorCode::UnknownSpfLevel, "no SPF row for level " + std::to_string(level));
}

const SpfLevel& spf_level(std::string_view label) {
  std::string_view digits = label;
  bool plus = false;
  if (!digits.empty() && digits.back() == '+') {
    plus = true;
    digits.remove_suffix(1);
  }
  int level = 0;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), level);
  if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size() || level < 0) {
    throw Error(ErrorCode::UnknownSpfLevel, "unrecognised SPF label '" + std::string(label) + "'");
  }
  if (plus) {
    if (level >= 50) return kSpfTable.back();
    throw Error(ErrorCode::UnknownSpfLevel, "unrecognised SPF label '" + std::string(label) + "'");
  }
  return spf_level(level);
}

double spfw_for(std::string_view label) { return spf_level(label).weight; }

std::string_view to_string(Environment env) noexcept {
  switch (env) {
    case Environment::Snow: return "snow";
    case Environment::Cloud: return "cloud";
    case Environment::Sand: return "sand";
    case Environment::WetSand: return "wet_sand";
    case Environment::Grass: return "grass";
    case Environment::WetGrass: return "wet_grass";
    case Environment::Building: return "building";
    case Environment::Water: return "water";
    case Environment::Shade: return "shade";
  }
  return "";
}

std::optional<Environment> parse_environment(std::string_view name) noexcept {
  for (Environment env : kAllEnvironments) {
    if (to_string(env) == name) return env;
  }
  if (name == "wet-sand") return Environment::WetSand;
  if (name == "wet-grass") return Environment::WetGrass;
  return std::nullopt;
}

EnvironmentFlags EnvironmentFlags::only(Environment env) {
  EnvironmentFlags flags;
  flags.set(env, true);
  return flags;
}

bool EnvironmentFlags::get(Environment env) const noexcept {
  switch (env) {
    case Environment::Snow: return snow;
    case Environment::Cloud: return cloud;
    case Environment::Sand: return sand;
    case Environment::WetSand: return wet_sand;
    case Environment::Grass: return grass;
    case Environment::WetGrass: return wet_grass;
    case Environment::Building: return building;
    case Environment::Water: return water;
    case Environment::Shade: return shade;
  }
  return false;
}

void EnvironmentFlags::set(Environment env, bool value) noexcept {
  switch (env) {
    case Environment::Snow: snow = value; break;
    case Environment::Cloud: cloud = value; break;
    case Environment::Sand: sand = value; break;
    case Environment::WetSand: wet_sand = value; break;
    case Environment::Grass: grass = value; break;
    case Environment::WetGrass: wet_grass = value; break;
    case Environment::Building: building = value; break;
    case Environment::Water: water = value; break;
    case Environment::Shade: shade = value; break;
  }
}

TtsbInput::TtsbInput(double uv_index, double altitude_ft, const SkinType& skin,
                     EnvironmentFlags env, const SpfLevel& spf)
    : skin_(skin_type(skin.rank)), env_(env), spf_(spf) {
  if (!std::isfinite(uv_index) || !std::isfinite(altitude_ft)) {
    throw Error(ErrorCode::InvalidArgument, "UV index and altitude must be finite");
  }
  uv_index_ = std::clamp(uv_index, 0.0, kMaxUvIndex);
  altitude_ft_ = std::clamp(altitude_ft, 0.0, kMaxAltitudeFt);
}

double effective_uv_denominator(const TtsbInput& input) noexcept {
  const double uv = input.uv_index();
  const auto& e = input.env();
  // Summed term by term in the published order so results are reproducible.
  return uv + uv * kSnow * flag(e.snow) + uv * kAltitudePerFoot * input.altitude_ft() +
         uv * kSand * flag(e.sand) + uv * kWetSand * flag(e.wet_sand) +
         uv * kGrass * flag(e.grass) + uv * kWetGrass * flag(e.wet_grass) +
         uv * kBuilding * flag(e.building) + uv * kWater * flag(e.water) -
         uv * kShade * flag(e.shade) - uv * kCloud * flag(e.cloud);
}

TtsbOutcome compute_ttsb(const TtsbInput& input) noexcept {
  TtsbOutcome out;
  out.denominator = effective_uv_denominator(input);
  if (input.uv_index() == 0.0) {
    out.kind = TtsbOutcome::Kind::NoBurnRisk;
    return out;
  }
  out.kind = TtsbOutcome::Kind::BurnIn;
  out.minutes = input.skin().ts_minutes / out.denominator * input.spf().weight;
  return out;
}

std::optional<Timestamp> schedule_burn_alarm(Timestamp now, const TtsbOutcome& outcome) noexcept {
  if (outcome.kind != TtsbOutcome::Kind::BurnIn) return std::nullopt;
  const auto seconds = static_cast<long long>(std::floor(outcome.minutes * 60.0));
  return now + std::chrono::seconds(seconds);
}

}  // namespace skincure::ttsb
