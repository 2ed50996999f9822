#pragma once

#include "worldmotion/pipeline.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace wm {

struct ServiceResponse {
    int status = 200;
    std::string contentType = "application/json";
    std::string body;
};

struct ServiceOptions {
    PipelineConfig config;
    std::filesystem::path bank;   // motion bank used by the clip endpoint
    std::filesystem::path asset;  // empty = built-in mannequin
};

/// Session-based editing API. `handle` is the whole service as a function of
/// (method, path, body); `serve` exposes it over HTTP.
///
///   POST /sessions                      { "bundle", "config"? }
///   GET  /sessions/{id}
///   PUT  /sessions/{id}/trajectory      { "keypoints", "version"? }
///   PUT  /sessions/{id}/clip            { "clip_id", "n"?, "blend_window"?, "version"? }
///   POST /sessions/{id}/preview         { "frames": [first, last], "width", "height", "maps"? }
///   POST /sessions/{id}/export          { "out_dir", "render"? }
///
/// Mutations carrying a stale "version" (or racing another mutation of the
/// same session) get 409; unknown sessions 404; invalid payloads 422.
class EditService {
public:
    explicit EditService(ServiceOptions options);
    ~EditService();

    ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body);

    /// Blocks serving HTTP on host:port until stop() is called. Port 0 picks
    /// a free port; `onReady` receives the bound port.
    void serve(const std::string& host, int port, const std::function<void(int)>& onReady = {});
    void stop();

    std::size_t sessionCount() const;

private:
    struct Session;
    std::shared_ptr<Session> findSession(const std::string& id) const;

    ServiceResponse createSession(const nlohmann::json& body);
    ServiceResponse getSession(Session& s);
    ServiceResponse putTrajectory(Session& s, const nlohmann::json& body);
    ServiceResponse putClip(Session& s, const nlohmann::json& body);
    ServiceResponse preview(Session& s, const nlohmann::json& body);
    ServiceResponse exportSession(Session& s, const nlohmann::json& body);

    ServiceOptions options_;
    BodyModelAsset asset_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    int nextId_ = 1;
    struct ServerHolder;
    std::unique_ptr<ServerHolder> server_;
};

}  // namespace wm
