#include "worldmotion/edit_service.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/hashing.hpp"
#include "worldmotion/parallel.hpp"

#include "httplib.h"

#include <algorithm>
#include <regex>

namespace wm {

namespace {

ServiceResponse jsonResponse(int status, const nlohmann::json& j) { return {status, "application/json", j.dump() + "\n"}; }

ServiceResponse errorResponse(int status, const std::string& kind, const std::string& message) {
    return jsonResponse(status, {{"error", {{"kind", kind}, {"message", message}}}});
}

class HttpError : public std::runtime_error {
public:
    HttpError(int status, const std::string& kind, const std::string& msg) : std::runtime_error(msg), status(status), kind(kind) {}
    int status;
    std::string kind;
};

nlohmann::json pointsJson(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

void checkVersion(const nlohmann::json& body, int version) {
    if (body.contains("version") && !body["version"].is_null()) {
        if (!body["version"].is_number_integer()) throw ValidationError("version must be an integer");
        if (body["version"].get<int>() != version) {
            throw HttpError(409, "conflict",
                            "session is at version " + std::to_string(version) + ", request expected " +
                                body["version"].dump());
        }
    }
}

}  // namespace

struct EditService::Session {
    std::mutex mutex;
    std::string id;
    EstimatorBundle bundle;
    PipelineConfig config;
    int version = 0;
    std::vector<Keypoint> keypoints;
    std::optional<MotionClip> clip;
    std::optional<EditResult> edit;
    std::map<std::string, std::string> previewCache;

    const MotionSequence& current() const { return edit ? edit->sequence : bundle.body; }
    CameraModel camera() const {
        if (edit) return edit->camera;
        if (bundle.jointsWorld) return deriveCameraRegistration(bundle).camera;
        return bundle.camera(0);
    }
};

struct EditService::ServerHolder {
    httplib::Server server;
};

EditService::EditService(ServiceOptions options) : options_(std::move(options)), asset_(loadAssetOrDefault(options_.asset)) {
    options_.config.validate();
}

EditService::~EditService() = default;

std::size_t EditService::sessionCount() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::shared_ptr<EditService::Session> EditService::findSession(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError(404, "not_found", "unknown session '" + id + "'");
    return it->second;
}

ServiceResponse EditService::handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
        if (method == "OPTIONS") return {204, "text/plain", ""};
        nlohmann::json payload = nlohmann::json::object();
        if (!body.empty()) {
            try {
                payload = nlohmann::json::parse(body);
            } catch (const nlohmann::json::parse_error& e) {
                throw ValidationError(std::string("request body is not JSON: ") + e.what());
            }
            if (!payload.is_object()) throw ValidationError("request body must be a JSON object");
        }
        static const std::regex sessionRe("^/sessions/([A-Za-z0-9_-]+)(/([a-z]+))?/?$");
        if (path == "/sessions" || path == "/sessions/") {
            if (method == "POST") return createSession(payload);
            if (method == "GET") {
                std::lock_guard lock(mutex_);
                nlohmann::json ids = nlohmann::json::array();
                for (const auto& [id, s] : sessions_) ids.push_back(id);
                return jsonResponse(200, {{"sessions", ids}});
            }
            throw HttpError(405, "method_not_allowed", method + " " + path);
        }
        std::smatch m;
        if (!std::regex_match(path, m, sessionRe)) throw HttpError(404, "not_found", "no route for " + path);
        auto session = findSession(m[1].str());
        const std::string action = m[3].str();
        const bool mutation = (action == "trajectory" || action == "clip") && method == "PUT";
        std::unique_lock lock(session->mutex, std::defer_lock);
        if (mutation) {
            if (!lock.try_lock()) throw HttpError(409, "conflict", "another mutation of this session is in progress");
        } else {
            lock.lock();
        }
        if (action.empty() && method == "GET") return getSession(*session);
        if (action.empty() && method == "DELETE") {
            std::lock_guard g(mutex_);
            sessions_.erase(session->id);
            return jsonResponse(200, {{"deleted", session->id}});
        }
        if (action == "trajectory" && method == "PUT") return putTrajectory(*session, payload);
        if (action == "clip" && method == "PUT") return putClip(*session, payload);
        if (action == "preview" && method == "POST") return preview(*session, payload);
        if (action == "export" && method == "POST") return exportSession(*session, payload);
        throw HttpError(404, "not_found", "no route for " + method + " " + path);
    } catch (const HttpError& e) {
        return errorResponse(e.status, e.kind, e.what());
    } catch (const DegenerateError& e) {
        return errorResponse(422, "degenerate", e.what());
    } catch (const ValidationError& e) {
        return errorResponse(422, "validation", e.what());
    } catch (const IoError& e) {
        return errorResponse(422, "io", e.what());
    } catch (const nlohmann::json::exception& e) {
        return errorResponse(422, "validation", e.what());
    } catch (const std::exception& e) {
        return errorResponse(500, "internal", e.what());
    }
}

ServiceResponse EditService::createSession(const nlohmann::json& body) {
    if (!body.contains("bundle") || !body["bundle"].is_string()) throw ValidationError("'bundle' (directory path) is required");
    auto s = std::make_shared<Session>();
    s->config = options_.config;
    if (body.contains("config")) {
        if (!body["config"].is_object()) throw ValidationError("'config' must be an object of key: value overrides");
        for (auto it = body["config"].begin(); it != body["config"].end(); ++it) {
            const auto& v = it.value();
            if (v.is_boolean()) s->config.set(it.key(), v.get<bool>());
            else if (v.is_number()) s->config.set(it.key(), v.get<double>());
            else if (v.is_string()) s->config.set(it.key(), v.get<std::string>());
            else throw ValidationError("config '" + it.key() + "' must be a number, boolean or string");
        }
        s->config.validate();
    }
    s->bundle = parseBundle(body["bundle"].get<std::string>());
    s->bundle.body.validateFor(asset_);
    {
        std::lock_guard lock(mutex_);
        s->id = "s" + std::to_string(nextId_++);
        sessions_[s->id] = s;
    }
    const CameraModel cam = s->camera();
    nlohmann::json out = {{"id", s->id},
                          {"version", s->version},
                          {"frame_count", s->bundle.frameCount()},
                          {"fps", s->bundle.body.fps},
                          {"camera", cameraToJson(cam)},
                          {"width", cam.width},
                          {"height", cam.height},
                          {"background", s->bundle.manifest.value("background", nlohmann::json(nullptr))}};
    return jsonResponse(201, out);
}

ServiceResponse EditService::getSession(Session& s) {
    return jsonResponse(200, {{"id", s.id},
                              {"version", s.version},
                              {"frame_count", s.bundle.frameCount()},
                              {"keypoints", keypointsToJson(s.keypoints)},
                              {"clip", s.clip ? nlohmann::json(s.clip->id) : nlohmann::json(nullptr)},
                              {"edited", s.edit.has_value()},
                              {"config", s.config.toJson()}});
}

ServiceResponse EditService::putTrajectory(Session& s, const nlohmann::json& body) {
    checkVersion(body, s.version);
    if (!body.contains("keypoints")) throw ValidationError("'keypoints' is required");
    const auto keypoints = keypointsFromJson(body["keypoints"], "keypoints");
    EditResult r = editMotion(s.bundle, asset_, keypoints, s.clip, s.config);
    s.keypoints = keypoints;
    s.edit = std::move(r);
    ++s.version;
    const EditResult& e = *s.edit;
    nlohmann::json warnings = nlohmann::json::array();
    if (!e.headings.heldFrames.empty() && !e.headings.allStatic) {
        warnings.push_back(std::to_string(e.headings.heldFrames.size()) + " frames held the previous heading");
    }
    if (e.headings.allStatic) warnings.push_back("trajectory is static; original orientation kept");
    if (e.alignment.clamped) warnings.push_back("original motion is longer than the drawn path; clamped at its end");
    nlohmann::json out = {{"version", s.version},
                          {"points_2d", pointsJson(e.pixels)},
                          {"path_3d", pointsJson(e.drawnPath)},
                          {"aligned_path", pointsJson(e.alignment.positions)},
                          {"headings", std::vector<double>(e.headings.psi.data(), e.headings.psi.data() + e.headings.psi.size())},
                          {"rescale_factor", e.alignment.rescaleFactor},
                          {"degenerate_frames", e.headings.heldFrames},
                          {"warnings", warnings},
                          {"grounding_max_offset", e.report["grounding"]["max_abs_offset"]}};
    return jsonResponse(200, out);
}

ServiceResponse EditService::putClip(Session& s, const nlohmann::json& body) {
    checkVersion(body, s.version);
    if (!body.contains("clip_id")) throw ValidationError("'clip_id' is required (null clears the clip)");
    if (body["clip_id"].is_null()) {
        s.clip.reset();
    } else {
        if (options_.bank.empty()) throw ValidationError("the service was started without a motion bank");
        const int n = body.value("n", s.bundle.frameCount());
        if (n != s.bundle.frameCount()) {
            throw ValidationError("n must equal the session frame count " + std::to_string(s.bundle.frameCount()));
        }
        if (body.contains("blend_window")) {
            s.config.set("bank.blend_window", body["blend_window"].get<double>());
            s.config.validate();
        }
        MotionClip clip = MotionBank(options_.bank).get(body["clip_id"].get<std::string>());
        if (s.config.blendWindow >= clip.sequence.frameCount()) {
            throw ValidationError("blend_window must be smaller than the clip length");
        }
        s.clip = std::move(clip);
    }
    if (!s.keypoints.empty()) s.edit = editMotion(s.bundle, asset_, s.keypoints, s.clip, s.config);
    ++s.version;
    nlohmann::json out = {{"version", s.version}, {"clip", nullptr}};
    if (s.clip) {
        out["clip"] = {{"id", s.clip->id},
                       {"tags", s.clip->tags},
                       {"clip_frames", s.clip->sequence.frameCount()},
                       {"n", s.bundle.frameCount()},
                       {"blend_window", s.config.blendWindow},
                       {"cycles", static_cast<double>(s.bundle.frameCount()) / s.clip->sequence.frameCount()}};
    }
    return jsonResponse(200, out);
}

ServiceResponse EditService::preview(Session& s, const nlohmann::json& body) {
    const MotionSequence& seq = s.current();
    const int n = seq.frameCount();
    int first = 0, last = 0;
    if (body.contains("frames")) {
        const auto& f = body["frames"];
        if (f.is_number_integer()) {
            first = last = f.get<int>();
        } else if (f.is_array() && f.size() == 2) {
            first = f[0].get<int>();
            last = f[1].get<int>();
        } else {
            throw ValidationError("'frames' must be an index or [first, last]");
        }
    }
    if (first < 0 || last >= n || first > last) throw ValidationError("frame range outside [0, " + std::to_string(n - 1) + "]");
    const int width = body.value("width", 256);
    const int height = body.value("height", 256);
    if (width <= 0 || height <= 0 || width > 4096 || height > 4096) throw ValidationError("resolution must lie in 1..4096");
    std::vector<std::string> maps = body.value("maps", std::vector<std::string>(std::begin(kMapTypes), std::end(kMapTypes)));
    for (const auto& m : maps) {
        if (std::find_if(std::begin(kMapTypes), std::end(kMapTypes), [&](const char* t) { return m == t; }) == std::end(kMapTypes)) {
            throw ValidationError("unknown map type '" + m + "'");
        }
    }

    const CameraModel cam = s.camera().resized(width, height);
    const nlohmann::json key = {{"sequence", sha256Hex(serializeMotion(seq))},
                                {"camera", cameraToJson(cam)},
                                {"frames", {first, last}},
                                {"maps", maps},
                                {"near", s.config.near},
                                {"delta", s.config.handOcclusionDelta}};
    const std::string cacheKey = sha256Hex(key.dump());
    if (auto it = s.previewCache.find(cacheKey); it != s.previewCache.end()) return {200, "application/json", it->second};

    const int count = last - first + 1;
    std::vector<nlohmann::json> frames(count);
    const std::vector<int> handFaces = handFaceUnion(asset_);
    RenderOptions ro;
    ro.near = s.config.near;
    ro.handOcclusionDelta = s.config.handOcclusionDelta;
    parallelFor(count, s.config.threads, [&](int i) {
        const FramePose& pose = seq.frames[first + i];
        const Points3 verts = skinVertices(asset_, pose);
        const GuidanceFrame g = rasterizeFrame(verts, asset_.faces, asset_.semanticVertexColors, cam, handFaces, ro);
        const auto files = encodeGuidanceFrame(g);
        nlohmann::json fj;
        fj["index"] = first + i;
        nlohmann::json images = nlohmann::json::object();
        for (std::size_t t = 0; t < std::size(kMapTypes); ++t) {
            if (std::find(maps.begin(), maps.end(), kMapTypes[t]) != maps.end()) images[kMapTypes[t]] = base64Encode(files[t]);
        }
        fj["images"] = images;
        const auto fk = forwardKinematics(asset_, pose);
        nlohmann::json bones = nlohmann::json::array();
        for (int j = 0; j < asset_.jointCount(); ++j) {
            const int p = asset_.jointParents[j];
            if (p < 0) continue;
            const Projection a = project(fk[p].position, cam, ro.near);
            const Projection b = project(fk[j].position, cam, ro.near);
            if (a.clipped || b.clipped) continue;
            bones.push_back({{a.pixel.x(), a.pixel.y()}, {b.pixel.x(), b.pixel.y()}});
        }
        fj["skeleton"] = bones;
        frames[i] = std::move(fj);
    });
    nlohmann::json out = {{"version", s.version}, {"width", width}, {"height", height}, {"encoding", "png, base64"}, {"frames", frames}};
    const std::string bodyText = out.dump() + "\n";
    s.previewCache[cacheKey] = bodyText;
    return {200, "application/json", bodyText};
}

ServiceResponse EditService::exportSession(Session& s, const nlohmann::json& body) {
    if (!body.contains("out_dir") || !body["out_dir"].is_string()) throw ValidationError("'out_dir' is required");
    const std::filesystem::path out = body["out_dir"].get<std::string>();
    const bool render = body.value("render", true);
    const MotionSequence& seq = s.current();
    const CameraModel cam = s.camera();
    saveMotion(seq, out / "edited.motion.json");
    saveCameras({cam}, out / "camera.json");
    nlohmann::json result = {{"sequence", (out / "edited.motion.json").generic_string()},
                             {"camera", (out / "camera.json").generic_string()},
                             {"version", s.version}};
    if (s.edit) {
        writeFileBytes(out / "report.json", s.edit->report.dump(1) + "\n");
        result["report"] = (out / "report.json").generic_string();
    }
    if (render) result["manifest"] = renderMotion(asset_, seq, {cam}, out / "render", s.config);
    return jsonResponse(200, result);
}

void EditService::serve(const std::string& host, int port, const std::function<void(int)>& onReady) {
    server_ = std::make_unique<ServerHolder>();
    auto& svr = server_->server;
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
        const ServiceResponse r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, r.contentType);
    };
    svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
    svr.Get(".*", route);
    svr.Post(".*", route);
    svr.Put(".*", route);
    svr.Delete(".*", route);
    svr.Options(".*", route);
    int bound = port;
    if (port == 0) {
        bound = svr.bind_to_any_port(host);
    } else if (!svr.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    if (onReady) onReady(bound);
    svr.listen_after_bind();
}

void EditService::stop() {
    if (server_) server_->server.stop();
}

}  // namespace wm
