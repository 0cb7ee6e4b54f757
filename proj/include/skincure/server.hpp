#pragma once

// HTTP/JSON service: lesion analysis, TTSB, UV pass-through and mole
// profiles. Error bodies are {"error":{"code":..,"message":..}}.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "skincure/classifier.hpp"
#include "skincure/uv.hpp"

namespace skincure::server {

struct ServerConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::optional<std::filesystem::path> model_path;
  std::filesystem::path data_dir = "data";
  std::optional<uv::UvSourceConfig> uv;
  std::string tz = "UTC";
  std::optional<std::filesystem::path> static_dir;  // served at /
  std::size_t max_image_bytes = 16u << 20;
  std::chrono::seconds uv_cache_ttl{10};
  bool log_requests = true;

  /// PORT, MODEL_PATH, DATA_DIR, UV_SOURCE, UV_FIXTURE_PATH, UV_HTTP_URL,
  /// TZ_DEFAULT, STATIC_DIR. The UV provider is configured only when
  /// UV_SOURCE, UV_FIXTURE_PATH or UV_HTTP_URL is set.
  static ServerConfig from_env();
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

class ApiServer {
 public:
  /// `model` and `uv_source` may be null: analyze then answers 503 and the
  /// UV endpoints 502.
  ApiServer(ServerConfig config, std::shared_ptr<const classify::TwoLevelModel> model,
            std::shared_ptr<const uv::UvSource> uv_source, Clock clock = nullptr);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Loads MODEL_PATH (when set) and the UV provider. Model errors propagate.
  static std::unique_ptr<ApiServer> from_config(const ServerConfig& config);

  /// Binds config.host; port 0 picks a free port. Returns the bound port or
  /// throws Error(IoError).
  int bind();
  /// Serves until stop(); returns false if the listener failed.
  bool run();
  void stop();
  void wait_until_ready() const;

  const ServerConfig& config() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace skincure::server
