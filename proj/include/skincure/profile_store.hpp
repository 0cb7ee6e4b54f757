#pragma once

// Mole profiles persisted as one JSON document per profile under
// <root>/profiles, plus content-addressed image blobs under <root>/blobs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>
#include <nlohmann/json.hpp>

#include "skincure/classifier.hpp"

namespace skincure::profiles {

enum class BodySide { Front, Back };

std::string_view to_string(BodySide side) noexcept;
std::optional<BodySide> parse_body_side(std::string_view text) noexcept;

struct StoredResult {
  classify::LesionClass label = classify::LesionClass::Normal;
  double stage_one_score = 0.0;
  std::optional<double> stage_two_score;
  std::size_t area_px = 0;
};

struct MoleRecord {
  std::string id;
  BodySide body_side = BodySide::Front;
  double x = 0.0;  // normalised position in [0,1]^2
  double y = 0.0;
  std::optional<std::string> image_ref;  // blob hash
  std::string captured_at;
  std::optional<StoredResult> latest_result;
};

struct Profile {
  std::string id;
  std::string name;
  std::string created_at;
  std::vector<MoleRecord> moles;
};

nlohmann::json to_json(const Profile& p);
nlohmann::json to_json(const MoleRecord& m);
/// Throws Error(IoError) for malformed documents.
Profile profile_from_json(const nlohmann::json& doc);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_now_iso();

/// Writers of one profile are serialised; readers share. Each write lands
/// via temp file + fsync + rename, so a crash never leaves a partial document.
class ProfileStore {
 public:
  explicit ProfileStore(std::filesystem::path root);

  Profile create(const std::string& name);
  std::optional<Profile> get(const std::string& id) const;
  std::vector<Profile> list() const;
  /// True if something was deleted; deleting an unknown id is not an error.
  bool remove(const std::string& id);

  /// Validates position and assigns id / timestamp. Throws Error(NotFound)
  /// for an unknown profile and Error(InvalidArgument) for a bad position.
  MoleRecord add_mole(const std::string& profile_id, MoleRecord draft);
  /// Replaces image and result of an existing mole. Throws Error(NotFound).
  MoleRecord update_mole(const std::string& profile_id, const std::string& mole_id,
                         std::optional<std::string> image_ref, std::optional<StoredResult> result);

  /// Stores bytes under their SHA-256 hex digest and returns it.
  std::string put_blob(std::span<const std::uint8_t> bytes);
  std::optional<std::filesystem::path> blob_path(const std::string& hash) const;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::shared_ptr<std::shared_mutex> lock_for(const std::string& id) const;
  std::filesystem::path profile_path(const std::string& id) const;
  std::optional<Profile> read_unlocked(const std::string& id) const;
  void write_unlocked(const Profile& p) const;

  std::filesystem::path root_;
  mutable std::mutex locks_mutex_;
  mutable std::map<std::string, std::shared_ptr<std::shared_mutex>> locks_;
};

/// Profile and mole ids: 32 lowercase hex characters.
bool is_valid_id(std::string_view id) noexcept;

}  // namespace skincure::profiles
