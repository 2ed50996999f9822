#include "worldmotion/motion_bank.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/rotation.hpp"

#include <algorithm>
#include <cctype>

namespace wm {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool hasTag(const std::vector<std::string>& tags, const std::string& filter) {
    const std::string f = lower(filter);
    return std::any_of(tags.begin(), tags.end(), [&](const std::string& t) { return lower(t) == f; });
}

void checkId(const std::string& id) {
    if (id.empty()) throw ValidationError("clip id must not be empty");
    for (char c : id) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
            throw ValidationError("clip id '" + id + "' may only contain letters, digits, '-', '_' and '.'");
        }
    }
    if (id.front() == '.') throw ValidationError("clip id must not start with '.'");
}

Vec3 horizontal(const Vec3& v) { return Vec3(v.x(), 0.0, v.z()); }

Points3 slerpRows(const Points3& a, const Points3& b, double t) {
    Points3 out(a.rows(), 3);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const Mat3 m = slerp(axisAngleToMatrix(a.row(r).transpose()), axisAngleToMatrix(b.row(r).transpose()), t);
        out.row(r) = matrixToAxisAngle(m).transpose();
    }
    return out;
}

}  // namespace

void MotionClip::validate() const {
    checkId(id);
    if (sequence.frames.empty()) throw ValidationError("clip '" + id + "' has no frames");
    if (!(sequence.fps > 0.0)) throw ValidationError("clip '" + id + "' fps must be positive");
}

std::vector<MotionClip> queryClips(const std::vector<MotionClip>& clips, const std::string& tagFilter) {
    std::vector<MotionClip> out;
    for (const auto& c : clips) {
        if (tagFilter.empty() || hasTag(c.tags, tagFilter)) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const MotionClip& a, const MotionClip& b) { return a.id < b.id; });
    return out;
}

Vec3 loopCycleDisplacement(const MotionSequence& clip) {
    const int l = clip.frameCount();
    if (l < 2) throw ValidationError("loopClip: clip needs at least 2 frames");
    const auto& f = clip.frames;
    const Vec3 boundary = 0.5 * ((f[1].translation - f[0].translation) + (f[l - 1].translation - f[l - 2].translation));
    return horizontal(f[l - 1].translation - f[0].translation + boundary);
}

MotionSequence loopClip(const MotionSequence& clip, int n, int blendWindow) {
    const int l = clip.frameCount();
    if (l < 2) throw ValidationError("loopClip: clip needs at least 2 frames");
    if (n < 1) throw ValidationError("loopClip: target length must be positive");
    if (blendWindow < 0 || blendWindow >= l) {
        throw ValidationError("loopClip: blend window must lie in [0, clip length)");
    }
    const Vec3 cycle = loopCycleDisplacement(clip);

    MotionSequence out;
    out.fps = clip.fps;
    out.coordinateFrame = clip.coordinateFrame;
    out.extra = clip.extra;
    out.frames.reserve(n);
    for (int k = 0; k < n; ++k) {
        FramePose f = clip.frames[k % l];
        if (k >= l) f.translation += static_cast<double>(k / l) * cycle;
        out.frames.push_back(std::move(f));
    }
    if (blendWindow == 0) return out;

    const int before = blendWindow / 2;
    for (int seam = l; seam < n; seam += l) {
        const int a = seam - before - 1;        // last untouched frame before the seam
        const int z = seam + blendWindow - before;  // first untouched frame after it
        const FramePose& from = out.frames[a];
        // Frames past the end of the output are not generated; use the source cycle instead.
        FramePose to = clip.frames[z % l];
        to.translation += static_cast<double>(z / l) * cycle;
        const FramePose fromCopy = from;
        for (int i = 0; i < blendWindow; ++i) {
            const int k = a + 1 + i;
            if (k >= n) break;
            const double t = static_cast<double>(i + 1) / (blendWindow + 1);
            FramePose& f = out.frames[k];
            f.globalOrientation = matrixToAxisAngle(
                slerp(axisAngleToMatrix(fromCopy.globalOrientation), axisAngleToMatrix(to.globalOrientation), t));
            f.bodyPose = slerpRows(fromCopy.bodyPose, to.bodyPose, t);
            for (int s = 0; s < 2; ++s) f.handPose[s] = slerpRows(fromCopy.handPose[s], to.handPose[s], t);
            f.translation.y() = fromCopy.translation.y() + t * (to.translation.y() - fromCopy.translation.y());
        }
    }
    return out;
}

MotionSequence retargetShape(const MotionSequence& seq, const Eigen::VectorXd& shape, double childFactor) {
    if (!(childFactor >= 0.0 && childFactor <= 1.0)) throw ValidationError("retargetShape: childFactor outside [0, 1]");
    MotionSequence out = seq;
    for (auto& f : out.frames) {
        if (f.shape.size() != shape.size()) {
            throw ValidationError("retargetShape: shape has " + std::to_string(shape.size()) +
                                  " coefficients, clip frames have " + std::to_string(f.shape.size()));
        }
        f.shape = shape;
        f.childFactor = childFactor;
    }
    return out;
}

MotionClip retargetShape(const MotionClip& clip, const Eigen::VectorXd& shape, double childFactor) {
    MotionClip out = clip;
    out.sequence = retargetShape(clip.sequence, shape, childFactor);
    return out;
}

MotionBank::MotionBank(std::filesystem::path root) : root_(std::move(root)) {}

MotionBank MotionBank::open(const std::filesystem::path& root) {
    std::error_code ec;
    std::filesystem::create_directories(root / "clips", ec);
    if (ec) throw IoError("cannot create motion bank at " + root.string() + ": " + ec.message());
    if (!std::filesystem::exists(root / "index.json")) {
        writeFileBytes(root / "index.json", nlohmann::json{{"version", 1}, {"clips", nlohmann::json::array()}}.dump(1) + "\n");
    }
    return MotionBank(root);
}

std::vector<MotionBank::Entry> MotionBank::readIndex() const {
    const auto path = root_ / "index.json";
    if (!std::filesystem::exists(path)) throw IoError("motion bank index missing: " + path.string());
    std::vector<Entry> out;
    try {
        const auto j = nlohmann::json::parse(readFileBytes(path));
        if (j.at("version").get<int>() != 1) throw ValidationError(path.string() + ": unsupported bank version");
        for (const auto& e : j.at("clips")) {
            Entry en;
            en.id = e.at("id").get<std::string>();
            en.tags = e.value("tags", std::vector<std::string>{});
            en.loopable = e.value("loopable", true);
            en.sourceMeta = e.value("source", std::string());
            en.frameCount = e.value("frame_count", 0);
            en.fps = e.value("fps", 0.0);
            out.push_back(std::move(en));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": malformed bank index: " + e.what());
    }
    return out;
}

void MotionBank::writeIndex(const std::vector<Entry>& entries) const {
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& e : entries) {
        clips.push_back({{"id", e.id}, {"tags", e.tags}, {"loopable", e.loopable}, {"source", e.sourceMeta},
                         {"frame_count", e.frameCount}, {"fps", e.fps}});
    }
    const auto tmp = root_ / "index.json.tmp";
    writeFileBytes(tmp, nlohmann::json{{"version", 1}, {"clips", clips}}.dump(1) + "\n");
    std::error_code ec;
    std::filesystem::rename(tmp, root_ / "index.json", ec);
    if (ec) throw IoError("cannot update bank index: " + ec.message());
}

void MotionBank::add(const MotionClip& clip, bool replace) {
    clip.validate();
    std::unique_lock lock(mutex_);
    auto entries = readIndex();
    auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) { return e.id == clip.id; });
    if (it != entries.end() && !replace) throw ValidationError("clip '" + clip.id + "' already exists in the bank");
    saveMotion(clip.sequence, root_ / "clips" / (clip.id + ".motion.json"));
    Entry e{clip.id, clip.tags, clip.loopable, clip.sourceMeta, clip.sequence.frameCount(), clip.sequence.fps};
    if (it != entries.end()) *it = e; else entries.push_back(e);
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });
    writeIndex(entries);
}

MotionClip MotionBank::load(const Entry& e) const {
    MotionClip c;
    c.id = e.id;
    c.tags = e.tags;
    c.loopable = e.loopable;
    c.sourceMeta = e.sourceMeta;
    c.sequence = loadMotion(root_ / "clips" / (e.id + ".motion.json"));
    return c;
}

std::vector<MotionClip> MotionBank::list(const std::string& tagFilter) const {
    std::shared_lock lock(mutex_);
    std::vector<MotionClip> all;
    for (const auto& e : readIndex()) {
        if (tagFilter.empty() || hasTag(e.tags, tagFilter)) all.push_back(load(e));
    }
    return queryClips(all, "");
}

std::optional<MotionClip> MotionBank::find(const std::string& id) const {
    std::shared_lock lock(mutex_);
    for (const auto& e : readIndex()) {
        if (e.id == id) return load(e);
    }
    return std::nullopt;
}

MotionClip MotionBank::get(const std::string& id) const {
    auto c = find(id);
    if (!c) throw ValidationError("no clip '" + id + "' in bank " + root_.string());
    return *c;
}

}  // namespace wm
