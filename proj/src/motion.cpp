#include "worldmotion/motion.hpp"

#include "worldmotion/binary_container.hpp"

namespace wm {

namespace {

nlohmann::json vec3Json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

nlohmann::json rowsJson(const Points3& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
    return out;
}

Vec3 vec3From(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ValidationError(what + " must be a list of 3 numbers");
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Points3 rowsFrom(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw ValidationError(what + " must be a list of [x, y, z] rows");
    Points3 m(static_cast<Eigen::Index>(j.size()), 3);
    for (std::size_t r = 0; r < j.size(); ++r) m.row(static_cast<Eigen::Index>(r)) = vec3From(j[r], what).transpose();
    return m;
}

const char* const kFrameKeys[] = {"gamma", "phi", "theta", "beta", "theta_h", "expression", "child_factor"};
const char* const kTopKeys[] = {"version", "fps", "frame_count", "coordinate_frame", "frames"};

template <std::size_t N>
bool known(const std::string& key, const char* const (&keys)[N]) {
    for (const char* k : keys) {
        if (key == k) return true;
    }
    return false;
}

}  // namespace

void MotionSequence::validateFor(const BodyModelAsset& asset) const {
    for (std::size_t n = 0; n < frames.size(); ++n) {
        try {
            frames[n].validateFor(asset);
        } catch (const ValidationError& e) {
            throw ValidationError("frame " + std::to_string(n) + ": " + e.what());
        }
    }
}

nlohmann::json motionToJson(const MotionSequence& seq) {
    nlohmann::json j = seq.extra;
    j["version"] = 1;
    j["fps"] = seq.fps;
    j["frame_count"] = seq.frameCount();
    j["coordinate_frame"] = seq.coordinateFrame;
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& f : seq.frames) {
        nlohmann::json fj = f.extra;
        fj["gamma"] = vec3Json(f.translation);
        fj["phi"] = vec3Json(f.globalOrientation);
        fj["theta"] = rowsJson(f.bodyPose);
        fj["beta"] = std::vector<double>(f.shape.data(), f.shape.data() + f.shape.size());
        fj["theta_h"] = {rowsJson(f.handPose[0]), rowsJson(f.handPose[1])};
        if (!f.expression.is_null()) fj["expression"] = f.expression;
        if (f.childFactor != 0.0) fj["child_factor"] = f.childFactor;
        frames.push_back(std::move(fj));
    }
    j["frames"] = std::move(frames);
    return j;
}

MotionSequence motionFromJson(const nlohmann::json& j, const std::string& origin) {
    auto fail = [&](const std::string& msg) { return ValidationError(origin + ": " + msg); };
    if (!j.is_object()) throw fail("motion file must be a JSON object");
    if (!j.contains("version")) throw fail("missing version field");
    MotionSequence seq;
    try {
        if (j.at("version").get<int>() != 1) throw fail("unsupported motion version");
        seq.fps = j.at("fps").get<double>();
        if (!(seq.fps > 0.0)) throw fail("fps must be positive");
        seq.coordinateFrame = j.value("coordinate_frame", std::string("world"));
        const auto& frames = j.at("frames");
        if (!frames.is_array()) throw fail("frames must be a list");
        if (j.contains("frame_count") && j["frame_count"].get<std::size_t>() != frames.size()) {
            throw fail("frame_count " + std::to_string(j["frame_count"].get<std::size_t>()) + " disagrees with " +
                       std::to_string(frames.size()) + " frames");
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!known(it.key(), kTopKeys)) seq.extra[it.key()] = it.value();
        }
        for (std::size_t n = 0; n < frames.size(); ++n) {
            const auto& fj = frames[n];
            const std::string where = "frame " + std::to_string(n) + " ";
            FramePose f;
            f.translation = vec3From(fj.at("gamma"), where + "gamma");
            f.globalOrientation = vec3From(fj.at("phi"), where + "phi");
            f.bodyPose = rowsFrom(fj.at("theta"), where + "theta");
            const auto beta = fj.at("beta").get<std::vector<double>>();
            f.shape = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
            const auto& th = fj.at("theta_h");
            if (!th.is_array() || th.size() != 2) throw fail(where + "theta_h must be [left, right]");
            f.handPose[0] = rowsFrom(th[0], where + "theta_h");
            f.handPose[1] = rowsFrom(th[1], where + "theta_h");
            if (fj.contains("expression")) f.expression = fj["expression"];
            f.childFactor = fj.value("child_factor", 0.0);
            if (!(f.childFactor >= 0.0 && f.childFactor <= 1.0)) throw fail(where + "child_factor outside [0, 1]");
            for (auto it = fj.begin(); it != fj.end(); ++it) {
                if (!known(it.key(), kFrameKeys)) f.extra[it.key()] = it.value();
            }
            if (!f.translation.allFinite() || !f.globalOrientation.allFinite() || !f.bodyPose.allFinite() ||
                !f.shape.allFinite() || !f.handPose[0].allFinite() || !f.handPose[1].allFinite()) {
                throw fail(where + "contains non-finite values");
            }
            seq.frames.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("malformed motion: ") + e.what());
    }
    return seq;
}

std::string serializeMotion(const MotionSequence& seq) { return motionToJson(seq).dump(1) + "\n"; }

MotionSequence loadMotion(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(readFileBytes(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return motionFromJson(j, path.string());
}

void saveMotion(const MotionSequence& seq, const std::filesystem::path& path) {
    writeFileBytes(path, serializeMotion(seq));
}

Points3 rootPositions(const BodyModelAsset& asset, const MotionSequence& seq) {
    Points3 out(seq.frameCount(), 3);
    const int root = asset.rootJoint();
    for (int n = 0; n < seq.frameCount(); ++n) {
        out.row(n) = forwardKinematics(asset, seq.frames[n])[root].position.transpose();
    }
    return out;
}

}  // namespace wm
