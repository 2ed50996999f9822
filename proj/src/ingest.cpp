#include "worldmotion/ingest.hpp"

#include "worldmotion/binary_container.hpp"

#include <algorithm>
#include <cmath>

namespace wm {

namespace fs = std::filesystem;

DepthSample DepthMap::sample(const Vec2& pixel, double fallbackF2) const {
    if (metres.width <= 0 || metres.height <= 0) throw ValidationError("depth map is empty");
    auto at = [&](int x, int y) { return static_cast<double>(metres.data[static_cast<std::size_t>(y) * metres.width + x]); };
    // Bilinear between pixel centres; nearest pixel when a neighbour has no depth.
    const double fx = std::clamp(pixel.x() - 0.5, 0.0, metres.width - 1.0);
    const double fy = std::clamp(pixel.y() - 0.5, 0.0, metres.height - 1.0);
    const int x0 = static_cast<int>(std::floor(fx));
    const int y0 = static_cast<int>(std::floor(fy));
    const int x1 = std::min(x0 + 1, metres.width - 1);
    const int y1 = std::min(y0 + 1, metres.height - 1);
    const double ax = fx - x0, ay = fy - y0;
    const double d00 = at(x0, y0), d10 = at(x1, y0), d01 = at(x0, y1), d11 = at(x1, y1);
    DepthSample s;
    if (d00 > 0.0 && d10 > 0.0 && d01 > 0.0 && d11 > 0.0) {
        s.d = (1 - ay) * ((1 - ax) * d00 + ax * d10) + ay * ((1 - ax) * d01 + ax * d11);
    } else {
        s.d = at(static_cast<int>(std::lround(fx)), static_cast<int>(std::lround(fy)));
    }
    s.f2 = f2 > 0.0 ? f2 : fallbackF2;
    if (!(s.d > 0.0)) {
        throw DegenerateError("no valid depth at pixel (" + std::to_string(pixel.x()) + ", " +
                              std::to_string(pixel.y()) + ")");
    }
    return s;
}

namespace {

nlohmann::json readJson(const fs::path& path) {
    try {
        return nlohmann::json::parse(readFileBytes(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

fs::path sidecarOf(const fs::path& p) {
    fs::path s = p;
    s.replace_extension(".json");
    return s;
}

}  // namespace

DepthMap loadDepthMap(const fs::path& path) {
    DepthMap d;
    const fs::path side = sidecarOf(path);
    nlohmann::json meta;
    if (fs::exists(side)) meta = readJson(side);
    const std::string ext = path.extension().string();
    try {
        if (ext == ".pfm") {
            d.metres = readPfm(path);
            if (meta.is_object()) d.f2 = meta.value("f2", 0.0);
        } else if (ext == ".png") {
            if (!meta.is_object()) throw ValidationError(path.string() + ": PNG depth needs a sidecar " + side.string());
            const double scale = meta.at("scale_m_per_unit").get<double>();
            d.f2 = meta.at("f2").get<double>();
            if (!(scale > 0.0)) throw ValidationError(side.string() + ": scale_m_per_unit must be positive");
            const Image16 raw = readPng16(path);
            d.metres = ImageF(raw.width, raw.height);
            for (std::size_t i = 0; i < raw.data.size(); ++i) d.metres.data[i] = static_cast<float>(raw.data[i] * scale);
        } else {
            throw ValidationError(path.string() + ": depth maps must be .pfm or .png");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(side.string() + ": " + e.what());
    }
    for (float v : d.metres.data) {
        if (!std::isfinite(v) || v < 0.0f) throw ValidationError(path.string() + ": depth values must be finite and >= 0");
    }
    if (d.f2 < 0.0) throw ValidationError(side.string() + ": f2 must be positive");
    return d;
}

void saveDepthMap(const DepthMap& depth, const fs::path& pfmPath) {
    writePfm(depth.metres, pfmPath);
    if (depth.f2 > 0.0) writeFileBytes(sidecarOf(pfmPath), nlohmann::json{{"f2", depth.f2}}.dump(1) + "\n");
}

std::vector<Points3> readJointTrack(const fs::path& path) {
    const BinaryContainer c = BinaryContainer::read(path);
    const ContainerArray& a = c.doubles("joints");
    if (a.shape.size() != 3 || a.shape[2] != 3) throw ValidationError(path.string() + ": joints must have shape [N, J, 3]");
    const auto n = a.shape[0];
    const auto j = a.shape[1];
    std::vector<Points3> out;
    out.reserve(n);
    for (std::int64_t f = 0; f < n; ++f) {
        out.push_back(Eigen::Map<const Points3>(a.f64.data() + f * j * 3, j, 3));
        if (!out.back().allFinite()) throw ValidationError(path.string() + ": frame " + std::to_string(f) + " has non-finite joints");
    }
    return out;
}

void writeJointTrack(const std::vector<Points3>& joints, const fs::path& path) {
    const std::int64_t j = joints.empty() ? 0 : joints.front().rows();
    std::vector<double> flat;
    flat.reserve(joints.size() * j * 3);
    for (const auto& f : joints) {
        if (f.rows() != j) throw ValidationError("writeJointTrack: joint count varies between frames");
        flat.insert(flat.end(), f.data(), f.data() + f.size());
    }
    BinaryContainer c;
    c.meta = {{"kind", "joint-track"}};
    c.putDoubles("joints", {static_cast<std::int64_t>(joints.size()), j, 3}, flat);
    c.write(path);
}

void EstimatorBundle::validate() const {
    const int n = frameCount();
    if (n == 0) throw ValidationError("bundle: body motion has no frames");
    if (cameras.empty()) throw ValidationError("bundle: no camera");
    if (cameras.size() != 1 && static_cast<int>(cameras.size()) != n) {
        throw ValidationError("bundle: camera.json has " + std::to_string(cameras.size()) +
                              " cameras, body.motion.json has " + std::to_string(n) + " frames");
    }
    if (jointsWorld.has_value() != jointsCamera.has_value()) {
        throw ValidationError("bundle: joints_world.bin and joints_cam.bin must be given together");
    }
    if (jointsWorld) {
        if (static_cast<int>(jointsWorld->size()) != n) {
            throw ValidationError("bundle: joints_world.bin has " + std::to_string(jointsWorld->size()) +
                                  " frames, body.motion.json has " + std::to_string(n));
        }
        if (static_cast<int>(jointsCamera->size()) != n) {
            throw ValidationError("bundle: joints_cam.bin has " + std::to_string(jointsCamera->size()) +
                                  " frames, body.motion.json has " + std::to_string(n));
        }
        for (int f = 0; f < n; ++f) {
            if ((*jointsWorld)[f].rows() != (*jointsCamera)[f].rows()) {
                throw ValidationError("bundle: joint counts differ between joints_world.bin and joints_cam.bin");
            }
        }
    }
    if (hands && static_cast<int>(hands->size()) != n) {
        throw ValidationError("bundle: hands.json has " + std::to_string(hands->size()) +
                              " frames, body.motion.json has " + std::to_string(n));
    }
    if (!depthFiles.empty() && depthFiles.size() != 1 && static_cast<int>(depthFiles.size()) != n) {
        throw ValidationError("bundle: " + std::to_string(depthFiles.size()) + " depth maps for " + std::to_string(n) +
                              " frames");
    }
}

const CameraModel& EstimatorBundle::camera(int frame) const {
    if (cameras.empty()) throw ValidationError("bundle: no camera");
    return cameras.size() == 1 ? cameras.front() : cameras.at(frame);
}

EstimatorBundle parseBundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("bundle directory not found: " + dir.string());
    EstimatorBundle b;
    b.root = dir;
    const fs::path manifestPath = dir / "bundle.json";
    if (!fs::exists(manifestPath)) throw ValidationError(manifestPath.string() + ": missing (schema version is required)");
    b.manifest = readJson(manifestPath);
    if (!b.manifest.is_object() || !b.manifest.contains("version")) {
        throw ValidationError(manifestPath.string() + ": missing version field");
    }
    if (b.manifest["version"] != 1) throw ValidationError(manifestPath.string() + ": unsupported version");

    if (!fs::exists(dir / "body.motion.json")) throw ValidationError(dir.string() + ": missing required body.motion.json");
    b.body = loadMotion(dir / "body.motion.json");
    if (!fs::exists(dir / "camera.json")) throw ValidationError(dir.string() + ": missing required camera.json");
    b.cameras = loadCameras(dir / "camera.json");
    if (fs::exists(dir / "joints_world.bin")) b.jointsWorld = readJointTrack(dir / "joints_world.bin");
    if (fs::exists(dir / "joints_cam.bin")) b.jointsCamera = readJointTrack(dir / "joints_cam.bin");
    if (fs::exists(dir / "hands.json")) b.hands = loadHands(dir / "hands.json");
    if (fs::is_directory(dir / "depth")) {
        for (const auto& e : fs::directory_iterator(dir / "depth")) {
            const auto ext = e.path().extension();
            if (ext == ".pfm" || ext == ".png") b.depthFiles.push_back((fs::path("depth") / e.path().filename()).generic_string());
        }
        std::sort(b.depthFiles.begin(), b.depthFiles.end());
    }
    b.validate();
    return b;
}

void writeBundle(const EstimatorBundle& bundle, const fs::path& dir) {
    bundle.validate();
    nlohmann::json manifest = bundle.manifest.is_object() ? bundle.manifest : nlohmann::json::object();
    manifest["version"] = 1;
    writeFileBytes(dir / "bundle.json", manifest.dump(1) + "\n");
    saveMotion(bundle.body, dir / "body.motion.json");
    saveCameras(bundle.cameras, dir / "camera.json");
    if (bundle.jointsWorld) {
        writeJointTrack(*bundle.jointsWorld, dir / "joints_world.bin");
        writeJointTrack(*bundle.jointsCamera, dir / "joints_cam.bin");
    }
    if (bundle.hands) saveHands(*bundle.hands, dir / "hands.json");
    for (const auto& rel : bundle.depthFiles) {
        if (bundle.root.empty() || fs::equivalent(bundle.root, dir)) continue;
        const fs::path src = bundle.root / rel;
        const fs::path dst = dir / rel;
        fs::create_directories(dst.parent_path());
        std::error_code ec;
        fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
        if (ec) throw IoError("cannot copy " + src.string() + ": " + ec.message());
        if (fs::exists(sidecarOf(src))) fs::copy_file(sidecarOf(src), sidecarOf(dst), fs::copy_options::overwrite_existing, ec);
    }
}

CameraRegistration deriveCameraRegistration(const EstimatorBundle& bundle) {
    if (!bundle.jointsWorld || !bundle.jointsCamera) {
        throw ValidationError("camera registration needs joints_world.bin and joints_cam.bin");
    }
    Eigen::Index total = 0;
    for (const auto& f : *bundle.jointsWorld) total += f.rows();
    Points3 src(total, 3), dst(total, 3);
    Eigen::Index row = 0;
    for (std::size_t f = 0; f < bundle.jointsWorld->size(); ++f) {
        const auto& w = (*bundle.jointsWorld)[f];
        src.middleRows(row, w.rows()) = w;
        dst.middleRows(row, w.rows()) = (*bundle.jointsCamera)[f];
        row += w.rows();
    }
    CameraRegistration r;
    r.transform = estimateRigidTransform(src, dst, false);
    r.camera = bundle.camera(0);
    r.camera.R_w2c = r.transform.rotation;
    r.camera.T_w2c = r.transform.translation;
    return r;
}

}  // namespace wm
