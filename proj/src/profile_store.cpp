#include "skincure/profile_store.hpp"

#include <fcntl.h>
#include <openssl/sha.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "skincure/error.hpp"

namespace skincure::profiles {
namespace {

namespace fs = std::filesystem;

std::string random_id() {
  static std::mutex mu;
  static std::random_device rd;
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", rd(), rd(), rd(), rd());
  return buf;
}

void atomic_write(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp." + random_id().substr(0, 8);
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error(ErrorCode::IoError, "cannot create " + tmp.string());
  std::size_t done = 0;
  while (done < text.size()) {
    const ssize_t n = ::write(fd, text.data() + done, text.size() - done);
    if (n <= 0) {
      ::close(fd);
      fs::remove(tmp);
      throw Error(ErrorCode::IoError, "short write to " + tmp.string());
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, path);
}

nlohmann::json result_to_json(const StoredResult& r) {
  return {{"class", classify::to_string(r.label)},
          {"scores",
           {{"stage_one", r.stage_one_score},
            {"stage_two", r.stage_two_score ? nlohmann::json(*r.stage_two_score) : nlohmann::json(nullptr)}}},
          {"area_px", r.area_px}};
}

StoredResult result_from_json(const nlohmann::json& j) {
  StoredResult r;
  const auto label = classify::parse_class(j.at("class").get<std::string>());
  if (!label) throw Error(ErrorCode::IoError, "stored result has an unknown class");
  r.label = *label;
  r.stage_one_score = j.at("scores").at("stage_one").get<double>();
  if (const auto& s2 = j.at("scores").at("stage_two"); !s2.is_null()) r.stage_two_score = s2.get<double>();
  r.area_px = j.at("area_px").get<std::size_t>();
  return r;
}

MoleRecord mole_from_json(const nlohmann::json& j) {
  MoleRecord m;
  m.id = j.at("id").get<std::string>();
  const auto side = parse_body_side(j.at("body_side").get<std::string>());
  if (!side) throw Error(ErrorCode::IoError, "stored mole has an unknown body side");
  m.body_side = *side;
  m.x = j.at("position").at("x").get<double>();
  m.y = j.at("position").at("y").get<double>();
  if (const auto& ref = j.at("image_ref"); !ref.is_null()) m.image_ref = ref.get<std::string>();
  m.captured_at = j.at("captured_at").get<std::string>();
  if (const auto& res = j.at("latest_result"); !res.is_null()) m.latest_result = result_from_json(res);
  return m;
}

void validate_position(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y) || x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "mole position must lie in the unit square");
  }
}

bool is_hex_digest(std::string_view s) {
  return s.size() == 64 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

}  // namespace

std::string_view to_string(BodySide side) noexcept { return side == BodySide::Front ? "front" : "back"; }

std::optional<BodySide> parse_body_side(std::string_view text) noexcept {
  if (text == "front") return BodySide::Front;
  if (text == "back") return BodySide::Back;
  return std::nullopt;
}

bool is_valid_id(std::string_view id) noexcept {
  return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string utc_now_iso() {
  using namespace std::chrono;
  const auto now = floor<seconds>(system_clock::now());
  const auto day = floor<days>(now);
  const year_month_day ymd(day);
  const hh_mm_ss hms(now - day);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

nlohmann::json to_json(const MoleRecord& m) {
  return {{"id", m.id},
          {"body_side", to_string(m.body_side)},
          {"position", {{"x", m.x}, {"y", m.y}}},
          {"image_ref", m.image_ref ? nlohmann::json(*m.image_ref) : nlohmann::json(nullptr)},
          {"captured_at", m.captured_at},
          {"latest_result", m.latest_result ? result_to_json(*m.latest_result) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const Profile& p) {
  nlohmann::json moles = nlohmann::json::array();
  for (const auto& m : p.moles) moles.push_back(to_json(m));
  return {{"id", p.id},
          {"name", p.name},
          {"created_at", p.created_at},
          {"mole_count", p.moles.size()},
          {"moles", moles}};
}

Profile profile_from_json(const nlohmann::json& doc) {
  try {
    Profile p;
    p.id = doc.at("id").get<std::string>();
    p.name = doc.at("name").get<std::string>();
    p.created_at = doc.at("created_at").get<std::string>();
    for (const auto& m : doc.at("moles")) p.moles.push_back(mole_from_json(m));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed profile document: ") + e.what());
  }
}

ProfileStore::ProfileStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "profiles");
  fs::create_directories(root_ / "blobs");
}

std::shared_ptr<std::shared_mutex> ProfileStore::lock_for(const std::string& id) const {
  std::lock_guard guard(locks_mutex_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_shared<std::shared_mutex>();
  return slot;
}

fs::path ProfileStore::profile_path(const std::string& id) const { return root_ / "profiles" / (id + ".json"); }

std::optional<Profile> ProfileStore::read_unlocked(const std::string& id) const {
  if (!is_valid_id(id)) return std::nullopt;
  std::ifstream in(profile_path(id));
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, "profile " + id + " is not valid JSON");
  }
  return profile_from_json(doc);
}

void ProfileStore::write_unlocked(const Profile& p) const { atomic_write(profile_path(p.id), to_json(p).dump(2)); }

Profile ProfileStore::create(const std::string& name) {
  Profile p{random_id(), name, utc_now_iso(), {}};
  const auto lock = lock_for(p.id);
  std::unique_lock guard(*lock);
  write_unlocked(p);
  return p;
}

std::optional<Profile> ProfileStore::get(const std::string& id) const {
  if (!is_valid_id(id)) return std::nullopt;
  const auto lock = lock_for(id);
  std::shared_lock guard(*lock);
  return read_unlocked(id);
}

std::vector<Profile> ProfileStore::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_ / "profiles")) {
    const auto& path = entry.path();
    if (path.extension() == ".json" && is_valid_id(path.stem().string())) ids.push_back(path.stem().string());
  }
  std::vector<Profile> out;
  for (const auto& id : ids) {
    if (auto p = get(id)) out.push_back(std::move(*p));
  }
  std::sort(out.begin(), out.end(), [](const Profile& a, const Profile& b) {
    return std::tie(a.created_at, a.id) < std::tie(b.created_at, b.id);
  });
  return out;
}

bool ProfileStore::remove(const std::string& id) {
  if (!is_valid_id(id)) return false;
  const auto lock = lock_for(id);
  std::unique_lock guard(*lock);
  std::error_code ec;
  return fs::remove(profile_path(id), ec);
}

MoleRecord ProfileStore::add_mole(const std::string& profile_id, MoleRecord draft) {
  validate_position(draft.x, draft.y);
  if (draft.image_ref && !blob_path(*draft.image_ref)) {
    throw Error(ErrorCode::InvalidArgument, "image_ref does not name a stored image");
  }
  if (!is_valid_id(profile_id)) throw Error(ErrorCode::NotFound, "no profile " + profile_id);
  const auto lock = lock_for(profile_id);
  std::unique_lock guard(*lock);
  auto p = read_unlocked(profile_id);
  if (!p) throw Error(ErrorCode::NotFound, "no profile " + profile_id);
  draft.id = random_id();
  draft.captured_at = utc_now_iso();
  p->moles.push_back(draft);
  write_unlocked(*p);
  return draft;
}

MoleRecord ProfileStore::update_mole(const std::string& profile_id, const std::string& mole_id,
                                     std::optional<std::string> image_ref, std::optional<StoredResult> result) {
  if (!is_valid_id(profile_id)) throw Error(ErrorCode::NotFound, "no profile " + profile_id);
  const auto lock = lock_for(profile_id);
  std::unique_lock guard(*lock);
  auto p = read_unlocked(profile_id);
  if (!p) throw Error(ErrorCode::NotFound, "no profile " + profile_id);
  const auto it = std::find_if(p->moles.begin(), p->moles.end(), [&](const MoleRecord& m) { return m.id == mole_id; });
  if (it == p->moles.end()) throw Error(ErrorCode::NotFound, "no mole " + mole_id);
  if (image_ref) it->image_ref = std::move(image_ref);
  if (result) it->latest_result = std::move(result);
  it->captured_at = utc_now_iso();
  write_unlocked(*p);
  return *it;
}

std::string ProfileStore::put_blob(std::span<const std::uint8_t> bytes) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(bytes.data(), bytes.size(), digest);
  std::string hex;
  for (unsigned char b : digest) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", b);
    hex += buf;
  }
  const fs::path path = root_ / "blobs" / hex;
  std::error_code ec;
  if (!fs::exists(path, ec)) atomic_write(path, std::string(bytes.begin(), bytes.end()));
  return hex;
}

std::optional<fs::path> ProfileStore::blob_path(const std::string& hash) const {
  if (!is_hex_digest(hash)) return std::nullopt;
  const fs::path path = root_ / "blobs" / hash;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  return path;
}

}  // namespace skincure::profiles
