#include "worldmotion/trajectory.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/rotation.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wm {

nlohmann::json keypointsToJson(const std::vector<Keypoint>& keypoints) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : keypoints) {
        nlohmann::json j = {{"u", k.u}, {"v", k.v}};
        if (k.frame) j["frame"] = *k.frame;
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<Keypoint> keypointsFromJson(const nlohmann::json& j, const std::string& origin) {
    const nlohmann::json* list = &j;
    if (j.is_object() && j.contains("keypoints")) list = &j["keypoints"];
    if (!list->is_array()) throw ValidationError(origin + ": keypoints must be a JSON list");
    std::vector<Keypoint> out;
    try {
        for (std::size_t i = 0; i < list->size(); ++i) {
            const auto& e = (*list)[i];
            if (!e.is_object()) throw ValidationError(origin + ": keypoint " + std::to_string(i) + " is not an object");
            Keypoint k;
            k.u = e.at("u").get<double>();
            k.v = e.at("v").get<double>();
            if (e.contains("frame") && !e["frame"].is_null()) k.frame = e["frame"].get<int>();
            if (!std::isfinite(k.u) || !std::isfinite(k.v)) {
                throw ValidationError(origin + ": keypoint " + std::to_string(i) + " is not finite");
            }
            out.push_back(k);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(origin + ": malformed keypoints: " + e.what());
    }
    return out;
}

std::vector<Keypoint> loadKeypoints(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(readFileBytes(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return keypointsFromJson(j, path.string());
}

void saveKeypoints(const std::vector<Keypoint>& keypoints, const std::filesystem::path& path) {
    writeFileBytes(path, keypointsToJson(keypoints).dump(1) + "\n");
}

void validateKeypoints(const std::vector<Keypoint>& keypoints, int width, int height) {
    int last = -1;
    for (std::size_t i = 0; i < keypoints.size(); ++i) {
        const auto& k = keypoints[i];
        if (!(k.u >= 0.0 && k.u < width && k.v >= 0.0 && k.v < height)) {
            throw ValidationError("keypoint " + std::to_string(i) + " (" + std::to_string(k.u) + ", " +
                                  std::to_string(k.v) + ") lies outside the " + std::to_string(width) + "x" +
                                  std::to_string(height) + " image");
        }
        if (k.frame) {
            if (*k.frame <= last) throw ValidationError("keypoint frame indices must be strictly increasing");
            last = *k.frame;
        }
    }
}

Points2 interpolateKeypoints(const std::vector<Keypoint>& keypoints, int n) {
    const int k = static_cast<int>(keypoints.size());
    if (k < 2) throw ValidationError("interpolateKeypoints: need at least 2 keypoints");
    if (n < 2) throw ValidationError("interpolateKeypoints: need at least 2 frames");

    std::vector<double> t(k, 0.0);
    std::vector<bool> known(k, false);
    bool anyPinned = false;
    for (int i = 0; i < k; ++i) {
        if (keypoints[i].frame) {
            const int f = *keypoints[i].frame;
            if (f < 0 || f >= n) throw ValidationError("keypoint frame " + std::to_string(f) + " outside [0, n-1]");
            t[i] = f;
            known[i] = true;
            anyPinned = true;
        }
    }
    if (!anyPinned) {
        for (int i = 0; i < k; ++i) t[i] = static_cast<double>(i) * (n - 1) / (k - 1);
    } else {
        if (!known[0]) {
            t[0] = 0.0;
            known[0] = true;
        }
        if (!known[k - 1]) {
            t[k - 1] = n - 1;
            known[k - 1] = true;
        }
        int prev = 0;
        for (int i = 1; i < k; ++i) {
            if (!known[i]) continue;
            for (int m = prev + 1; m < i; ++m) t[m] = t[prev] + (t[i] - t[prev]) * (m - prev) / (i - prev);
            prev = i;
        }
    }
    for (int i = 1; i < k; ++i) {
        if (!(t[i] > t[i - 1])) throw ValidationError("interpolateKeypoints: keypoint frames must strictly increase");
    }

    Points2 out(n, 2);
    int seg = 0;
    for (int f = 0; f < n; ++f) {
        if (f <= t[0]) {
            out.row(f) << keypoints[0].u, keypoints[0].v;
            continue;
        }
        if (f >= t[k - 1]) {
            out.row(f) << keypoints[k - 1].u, keypoints[k - 1].v;
            continue;
        }
        while (t[seg + 1] < f) ++seg;
        const double a = (f - t[seg]) / (t[seg + 1] - t[seg]);
        const auto& p = keypoints[seg];
        const auto& q = keypoints[seg + 1];
        out(f, 0) = p.u + a * (q.u - p.u);
        out(f, 1) = p.v + a * (q.v - p.v);
    }
    return out;
}

namespace {

Mat3 invertIntrinsics(const CameraModel& cam) {
    Eigen::FullPivLU<Mat3> lu(cam.K);
    if (!lu.isInvertible()) throw DegenerateError("camera intrinsics K are not invertible");
    return lu.inverse();
}

}  // namespace

Vec3 unprojectPoint(const Vec2& pixel, const CameraModel& cam, const DepthSample& depth) {
    if (!(depth.d > 0.0)) throw ValidationError("unprojectPoint: depth must be positive");
    if (!(depth.f2 > 0.0) || !(cam.f1 > 0.0)) throw ValidationError("unprojectPoint: focal lengths must be positive");
    return invertIntrinsics(cam) * Vec3(pixel.x(), pixel.y(), 1.0) * depth.d * depth.f2 / cam.f1;
}

Vec3 cameraToWorld(const Vec3& cameraPoint, const CameraModel& cam) {
    return cam.R_w2c.transpose() * (cameraPoint - cam.T_w2c);
}

Vec3 worldToCamera(const Vec3& worldPoint, const CameraModel& cam) { return cam.R_w2c * worldPoint + cam.T_w2c; }

Vec3 groundIntersect(const Vec2& pixel, const CameraModel& cam, const WorldFrame& frame) {
    const Vec3 rayCam = invertIntrinsics(cam) * Vec3(pixel.x(), pixel.y(), 1.0);
    const Vec3 dir = cam.R_w2c.transpose() * rayCam;
    const Vec3 c = cam.center();
    const Vec3 up = frame.axisY;
    const double planeOffset = up.dot(frame.origin) + frame.groundHeight;
    const double denom = up.dot(dir);
    const double height = up.dot(c) - planeOffset;
    if (std::abs(denom) < 1e-12 * dir.norm()) throw DegenerateError("groundIntersect: ray is parallel to the ground");
    const double t = -height / denom;
    if (!(t > 0.0)) throw DegenerateError("groundIntersect: ray points away from the ground");
    Vec3 p = c + t * dir;
    // Land exactly on the plane.
    p += (planeOffset - up.dot(p)) * up;
    if (up == Vec3::UnitY()) p.y() = planeOffset;
    return p;
}

Projection project(const Vec3& worldPoint, const CameraModel& cam, double near) {
    Projection out;
    const Vec3 pc = worldToCamera(worldPoint, cam);
    out.depth = pc.z();
    if (!(pc.z() > near)) {
        out.clipped = true;
        return out;
    }
    const Vec3 h = cam.K * (pc / pc.z());
    out.pixel = Vec2(h.x(), h.y());
    return out;
}

ArcNorm parseArcNorm(const std::string& name) {
    if (name == "L1" || name == "l1") return ArcNorm::L1;
    if (name == "L2" || name == "l2") return ArcNorm::L2;
    throw ValidationError("unknown norm '" + name + "' (expected L1 or L2)");
}

std::string arcNormName(ArcNorm norm) { return norm == ArcNorm::L1 ? "L1" : "L2"; }

double stepLength(const Vec3& a, const Vec3& b, ArcNorm norm) {
    const Vec3 d = b - a;
    return norm == ArcNorm::L1 ? d.cwiseAbs().sum() : d.norm();
}

Eigen::VectorXd cumulativeArcLength(const Points3& points, ArcNorm norm) {
    const Eigen::Index n = points.rows();
    if (n < 1) throw ValidationError("cumulativeArcLength: need at least one point");
    Eigen::VectorXd arc(n);
    arc(0) = 0.0;
    for (Eigen::Index i = 1; i < n; ++i) {
        arc(i) = arc(i - 1) + stepLength(points.row(i - 1).transpose(), points.row(i).transpose(), norm);
    }
    return arc;
}

namespace {

struct PathCursor {
    int segment = 0;  // current segment index, point lies on [segment, segment+1]
    double t = 0.0;
};

struct MarchResult {
    Points3 positions;
    bool ranOut = false;
    // Distance in `norm` from the last output to the path end, measured along the path.
    double remaining = 0.0;
};

class ChordMarcher {
public:
    ChordMarcher(const Points3& path, ArcNorm norm) : path_(path), norm_(norm) {
        segLen_.resize(std::max<Eigen::Index>(path.rows() - 1, 0));
        for (Eigen::Index i = 0; i + 1 < path.rows(); ++i) segLen_[i] = stepLength(vertex(i), vertex(i + 1), norm);
    }

    Vec3 vertex(Eigen::Index i) const { return path_.row(i).transpose(); }

    Vec3 at(const PathCursor& c) const {
        if (c.segment >= static_cast<int>(segLen_.size())) return vertex(path_.rows() - 1);
        return vertex(c.segment) + c.t * (vertex(c.segment + 1) - vertex(c.segment));
    }

    double remainingFrom(const PathCursor& c) const {
        if (c.segment >= static_cast<int>(segLen_.size())) return 0.0;
        double r = (1.0 - c.t) * segLen_[c.segment];
        for (std::size_t s = c.segment + 1; s < segLen_.size(); ++s) r += segLen_[s];
        return r;
    }

    // Advance to the first point ahead whose chord distance from the current
    // point equals `step`. Returns false if the path ends first.
    bool advance(PathCursor& c, double step) const {
        if (step <= 0.0) return true;
        const Vec3 from = at(c);
        const int segs = static_cast<int>(segLen_.size());
        for (int s = c.segment; s < segs; ++s) {
            const Vec3 a = vertex(s);
            const Vec3 b = vertex(s + 1);
            const double tStart = (s == c.segment) ? c.t : 0.0;
            if (stepLength(from, b, norm_) < step) continue;
            double lo = tStart, hi = 1.0;
            for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                if (stepLength(from, a + mid * (b - a), norm_) < step) lo = mid; else hi = mid;
            }
            const double dlo = std::abs(stepLength(from, a + lo * (b - a), norm_) - step);
            const double dhi = std::abs(stepLength(from, a + hi * (b - a), norm_) - step);
            c.segment = s;
            c.t = dlo < dhi ? lo : hi;
            if (c.t >= 1.0 && s + 1 < segs) {
                c.segment = s + 1;
                c.t = 0.0;
            }
            return true;
        }
        c.segment = segs;
        c.t = 0.0;
        return false;
    }

    MarchResult march(const Eigen::VectorXd& arc, double factor) const {
        MarchResult r;
        const Eigen::Index n = arc.size();
        r.positions.resize(n, 3);
        PathCursor c;
        r.positions.row(0) = at(c).transpose();
        for (Eigen::Index i = 1; i < n; ++i) {
            if (!r.ranOut && !advance(c, factor * (arc(i) - arc(i - 1)))) r.ranOut = true;
            r.positions.row(i) = at(c).transpose();
        }
        r.remaining = r.ranOut ? 0.0 : remainingFrom(c);
        return r;
    }

    double totalLength() const {
        double s = 0.0;
        for (double l : segLen_) s += l;
        return s;
    }

private:
    const Points3& path_;
    ArcNorm norm_;
    std::vector<double> segLen_;
};

}  // namespace

SpeedAlignment alignSpeed(const Points3& edited, const Eigen::VectorXd& originalArc, ArcNorm norm, bool rescale) {
    const Eigen::Index n = originalArc.size();
    if (edited.rows() < 1 || n < 1) throw ValidationError("alignSpeed: empty path or arc");
    for (Eigen::Index i = 1; i < n; ++i) {
        if (originalArc(i) < originalArc(i - 1)) throw ValidationError("alignSpeed: original arc must be non-decreasing");
    }
    const ChordMarcher marcher(edited, norm);
    const double pathLength = marcher.totalLength();
    const double originalTotal = n > 0 ? originalArc(n - 1) - originalArc(0) : 0.0;

    SpeedAlignment out;
    if (originalTotal <= 0.0) {
        out.positions = edited.row(0).replicate(n, 1);
        out.rescaleFactor = rescale ? 0.0 : 1.0;
        out.targetArc = Eigen::VectorXd::Zero(n);
        return out;
    }
    if (pathLength <= 0.0) throw DegenerateError("alignSpeed: edited path has zero length but the original moves");

    double factor = 1.0;
    if (rescale) {
        // Chord sums never exceed the path length, so the arc-ratio factor
        // reaches the end or runs out; bisect down to the factor that lands on it.
        double hi = pathLength / originalTotal;
        MarchResult first = marcher.march(originalArc, hi);
        if (first.ranOut || first.remaining > 1e-12 * pathLength) {
            double lo = 0.0;
            while (!marcher.march(originalArc, hi).ranOut) hi *= 2.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const MarchResult m = marcher.march(originalArc, mid);
                if (m.ranOut) hi = mid; else lo = mid;
                if (!m.ranOut && m.remaining <= 1e-12 * pathLength) {
                    lo = mid;
                    break;
                }
            }
            factor = lo;
        } else {
            factor = hi;
        }
    }
    MarchResult r = marcher.march(originalArc, factor);
    out.positions = std::move(r.positions);
    out.clamped = r.ranOut;
    out.rescaleFactor = factor;
    out.targetArc = factor * (originalArc.array() - originalArc(0)).matrix();
    return out;
}

Eigen::VectorXd boxSmooth(const Eigen::VectorXd& values, int window) {
    if (window < 1) throw ValidationError("smoothing window must be >= 1");
    const Eigen::Index n = values.size();
    if (window == 1 || n == 0) return values;
    const int half = window / 2;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int k = -half; k <= half; ++k) sum += values(std::clamp<Eigen::Index>(i + k, 0, n - 1));
        out(i) = sum / (2 * half + 1);
    }
    return out;
}

Headings deriveHeadings(const Points3& positions, int window, double epsilon) {
    const Eigen::Index n = positions.rows();
    if (n < 2) throw ValidationError("deriveHeadings: need at least 2 frames");
    Headings h;
    h.psi = Eigen::VectorXd::Zero(n);
    std::vector<bool> moving(n, false);
    int firstMoving = -1;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double dx = positions(i, 0) - positions(i - 1, 0);
        const double dz = positions(i, 2) - positions(i - 1, 2);
        if (std::hypot(dx, dz) >= epsilon) {
            moving[i] = true;
            h.psi(i) = std::atan2(dz, dx);
            if (firstMoving < 0) firstMoving = static_cast<int>(i);
        }
    }
    if (firstMoving < 0) {
        h.allStatic = true;
        for (Eigen::Index i = 0; i < n; ++i) h.heldFrames.push_back(static_cast<int>(i));
        h.rotations.assign(n, Mat3::Identity());
        return h;
    }
    for (Eigen::Index i = 1; i < n; ++i) {
        if (moving[i]) continue;
        h.heldFrames.push_back(static_cast<int>(i));
        h.psi(i) = i < firstMoving ? h.psi(firstMoving) : h.psi(i - 1);
    }
    h.psi(0) = h.psi(1);
    for (Eigen::Index i = 1; i < n; ++i) {
        double d = h.psi(i) - h.psi(i - 1);
        d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
        h.psi(i) = h.psi(i - 1) + d;
    }
    h.psi = boxSmooth(h.psi, window);
    h.rotations.reserve(n);
    for (Eigen::Index i = 0; i < n; ++i) h.rotations.push_back(headingRotation(h.psi(i)));
    return h;
}

Mat3 orientationRemoval(const Mat3& orientation, bool yawOnly, const Vec3& forward) {
    if (!yawOnly) return orientation.transpose();
    return rotY(-yawAbout(orientation, forward));
}

Mat3 forwardAlignment(const Vec3& forward) {
    return rotY(std::numbers::pi / 2.0 - std::atan2(forward.x(), forward.z()));
}

Points3 retargetVertices(const Points3& vertices, const Mat3& removal, const Vec3& root, const Mat3& heading,
                         const Vec3& newRoot) {
    const Mat3 m = heading * removal;
    Points3 out = (vertices.rowwise() - root.transpose()) * m.transpose();
    out.rowwise() += newRoot.transpose();
    return out;
}

GroundingMode parseGroundingMode(const std::string& name) {
    if (name == "opening") return GroundingMode::Opening;
    if (name == "sliding_min" || name == "sliding-min") return GroundingMode::SlidingMin;
    throw ValidationError("unknown grounding mode '" + name + "' (expected opening or sliding_min)");
}

std::string groundingModeName(GroundingMode mode) { return mode == GroundingMode::Opening ? "opening" : "sliding_min"; }

Eigen::VectorXd groundingOffsets(const Eigen::VectorXd& frameMinY, int window, GroundingMode mode) {
    if (window < 1 || window % 2 == 0) throw ValidationError("grounding window must be odd and >= 1");
    const Eigen::Index n = frameMinY.size();
    if (n == 0) throw ValidationError("groundFeet: no frames");
    const Eigen::Index half = window / 2;
    auto lo = [&](Eigen::Index i) { return std::max<Eigen::Index>(0, i - half); };
    auto hi = [&](Eigen::Index i) { return std::min<Eigen::Index>(n - 1, i + half); };
    Eigen::VectorXd eroded(n);
    for (Eigen::Index i = 0; i < n; ++i) eroded(i) = frameMinY.segment(lo(i), hi(i) - lo(i) + 1).minCoeff();
    if (mode == GroundingMode::SlidingMin) return eroded;
    Eigen::VectorXd opened(n);
    for (Eigen::Index i = 0; i < n; ++i) opened(i) = eroded.segment(lo(i), hi(i) - lo(i) + 1).maxCoeff();
    return opened;
}

double minHeight(const Points3& vertices, const std::vector<int>& vertexIds) {
    if (vertices.rows() == 0) throw ValidationError("groundFeet: empty frame");
    if (vertexIds.empty()) return vertices.col(1).minCoeff();
    double m = std::numeric_limits<double>::infinity();
    for (int id : vertexIds) {
        if (id < 0 || id >= vertices.rows()) throw ValidationError("groundFeet: foot vertex id out of range");
        m = std::min(m, vertices(id, 1));
    }
    return m;
}

GroundingResult groundFeet(const std::vector<Points3>& frames, const std::vector<int>& footVertexIds, int window,
                           GroundingMode mode) {
    if (frames.empty()) throw ValidationError("groundFeet: no frames");
    Eigen::VectorXd mins(static_cast<Eigen::Index>(frames.size()));
    for (std::size_t i = 0; i < frames.size(); ++i) mins(static_cast<Eigen::Index>(i)) = minHeight(frames[i], footVertexIds);
    GroundingResult r;
    r.offsets = groundingOffsets(mins, window, mode);
    r.frames = frames;
    for (std::size_t i = 0; i < frames.size(); ++i) r.frames[i].col(1).array() -= r.offsets(static_cast<Eigen::Index>(i));
    return r;
}

}  // namespace wm
