#pragma once

// Time-To-Skin-Burn (TTSB) model.
//
//   minutes = TS / [UV * (1 + 0.85 SN + 0.00487804 AL + 0.2 SA + 0.4 WSA
//                         + 0.2 GR + 0.4 WGR + 0.15 BU + 0.5 WA
//                         - 0.5 SH - 0.2 CL)] * SPFW
//
// TS is the burn time of the skin type at UV index 1, SPFW the sunscreen
// weight of the SPF level, AL the altitude in feet and the remaining terms
// boolean environment flags.

#include <array>
#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace skincure::ttsb {

struct SkinType {
  int rank;
  std::string_view name;
  double ts_minutes;  // minutes to burn at UV index 1
  std::string_view description;
};

/// The six skin types, ranks 1..6 in order.
std::span<const SkinType, 6> skin_type_catalog() noexcept;

/// Throws Error(InvalidArgument) for ranks outside 1..6.
const SkinType& skin_type(int rank);

struct SpfLevel {
  int level;       // 0, 5, ..., 50; the "50+" row carries 50 with `plus` set
  bool plus;
  double weight;   // SPFW

  std::string label() const;
};

std::span<const SpfLevel, 12> spf_table() noexcept;

/// Looks up a label such as "0", "15", "50+" or "55+". Anything above 50
/// resolves to the 50+ row. Throws Error(UnknownSpfLevel) otherwise.
const SpfLevel& spf_level(std::string_view label);
const SpfLevel& spf_level(int level);

double spfw_for(std::string_view label);

enum class Environment { Snow, Cloud, Sand, WetSand, Grass, WetGrass, Building, Water, Shade };

inline constexpr std::array<Environment, 9> kAllEnvironments = {
    Environment::Snow,  Environment::Cloud,    Environment::Sand,
    Environment::WetSand, Environment::Grass,  Environment::WetGrass,
    Environment::Building, Environment::Water, Environment::Shade};

std::string_view to_string(Environment env) noexcept;
std::optional<Environment> parse_environment(std::string_view name) noexcept;

struct EnvironmentFlags {
  bool snow = false;
  bool cloud = false;
  bool sand = false;
  bool wet_sand = false;
  bool grass = false;
  bool wet_grass = false;
  bool building = false;
  bool water = false;
  bool shade = false;

  /// Single selection, as in the environment gallery.
  static EnvironmentFlags only(Environment env);

  bool get(Environment env) const noexcept;
  void set(Environment env, bool value) noexcept;

  friend bool operator==(const EnvironmentFlags&, const EnvironmentFlags&) = default;
};

inline constexpr double kMaxUvIndex = 14.0;
inline constexpr double kMaxAltitudeFt = 30000.0;

/// Validated model input. UV and altitude are clamped into range on
/// construction; non-finite values throw Error(InvalidArgument).
class TtsbInput {
 public:
  TtsbInput(double uv_index, double altitude_ft, const SkinType& skin,
            EnvironmentFlags env, const SpfLevel& spf);

  double uv_index() const noexcept { return uv_index_; }
  double altitude_ft() const noexcept { return altitude_ft_; }
  const SkinType& skin() const noexcept { return skin_; }
  const EnvironmentFlags& env() const noexcept { return env_; }
  const SpfLevel& spf() const noexcept { return spf_; }

 private:
  double uv_index_;
  double altitude_ft_;
  SkinType skin_;
  EnvironmentFlags env_;
  SpfLevel spf_;
};

struct TtsbOutcome {
  enum class Kind { BurnIn, NoBurnRisk };

  Kind kind = Kind::NoBurnRisk;
  double minutes = 0.0;      // meaningful only for BurnIn
  double denominator = 0.0;  // the bracketed effective-UV term
};

double effective_uv_denominator(const TtsbInput& input) noexcept;

TtsbOutcome compute_ttsb(const TtsbInput& input) noexcept;

using Timestamp = std::chrono::sys_seconds;

/// now + minutes, truncated to whole seconds; nullopt when there is no burn risk.
std::optional<Timestamp> schedule_burn_alarm(Timestamp now, const TtsbOutcome& outcome) noexcept;

}  // namespace skincure::ttsb
