#pragma once

#include "worldmotion/world_frame.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace wm {

/// A user-placed trajectory point in image pixels, optionally pinned to a frame.
struct Keypoint {
    std::optional<int> frame;
    double u = 0.0;
    double v = 0.0;
};

/// Keypoint file: JSON list of { "frame"?: int, "u": px, "v": px }.
nlohmann::json keypointsToJson(const std::vector<Keypoint>& keypoints);
std::vector<Keypoint> keypointsFromJson(const nlohmann::json& j, const std::string& origin = "<json>");
std::vector<Keypoint> loadKeypoints(const std::filesystem::path& path);
void saveKeypoints(const std::vector<Keypoint>& keypoints, const std::filesystem::path& path);

/// Checks pixel bounds against the image and that pinned frames increase.
void validateKeypoints(const std::vector<Keypoint>& keypoints, int width, int height);

/// Piecewise-linear per-frame pixels. Unpinned keypoints are spread
/// uniformly over [0, n-1]; the first and last keypoints always land on
/// frames 0 and n-1 unless pinned elsewhere (frames outside the pinned range
/// are clamped to the nearest keypoint).
Points2 interpolateKeypoints(const std::vector<Keypoint>& keypoints, int n);

struct DepthSample {
    double d = 1.0;   // metres
    double f2 = 1.0;  // pixels
};

/// Camera-space point of pixel p: K^-1 (u, v, 1) scaled by d * f2 / f1.
Vec3 unprojectPoint(const Vec2& pixel, const CameraModel& cam, const DepthSample& depth);

/// World point where the back-projected ray of p meets y = groundHeight.
Vec3 groundIntersect(const Vec2& pixel, const CameraModel& cam, const WorldFrame& frame);

Vec3 cameraToWorld(const Vec3& cameraPoint, const CameraModel& cam);
Vec3 worldToCamera(const Vec3& worldPoint, const CameraModel& cam);

struct Projection {
    Vec2 pixel = Vec2::Zero();
    double depth = 0.0;  // camera z
    bool clipped = false;
};

/// Perspective projection of a world point; `clipped` when z <= near.
Projection project(const Vec3& worldPoint, const CameraModel& cam, double near = 1e-4);

enum class ArcNorm { L1, L2 };

ArcNorm parseArcNorm(const std::string& name);
std::string arcNormName(ArcNorm norm);
double stepLength(const Vec3& a, const Vec3& b, ArcNorm norm);

/// Running sum of per-frame displacements, starting at 0.
Eigen::VectorXd cumulativeArcLength(const Points3& points, ArcNorm norm);

struct SpeedAlignment {
    Points3 positions;
    /// Factor applied to the original arc profile before sampling.
    double rescaleFactor = 1.0;
    /// Arc profile the output follows (rescaleFactor * original).
    Eigen::VectorXd targetArc;
    /// True when the original profile had to be clamped at the end of the path.
    bool clamped = false;
};

/// Re-time `edited` so that its per-frame steps follow `originalArc`. The
/// polyline may have any number of points; the output has one per arc entry.
///
/// Output points lie on the edited polyline; consecutive outputs are exactly
/// `rescaleFactor * (originalArc[n] - originalArc[n-1])` apart in `norm`.
/// With `rescale` the factor is solved so the last output lands on the end of
/// the polyline; without it the factor is 1 and the walk stops at the end.
SpeedAlignment alignSpeed(const Points3& edited, const Eigen::VectorXd& originalArc, ArcNorm norm,
                          bool rescale = true);

struct Headings {
    Eigen::VectorXd psi;
    std::vector<Mat3> rotations;
    /// Frames whose displacement was below epsilon and held a heading.
    std::vector<int> heldFrames;
    /// No frame moved at all.
    bool allStatic = false;
};

/// Heading of travel in the x-z plane, unwrapped and box-smoothed over
/// `window` frames (1 disables smoothing).
Headings deriveHeadings(const Points3& positions, int window = 9, double epsilon = 1e-5);

/// Centred box filter with edge replication.
Eigen::VectorXd boxSmooth(const Eigen::VectorXd& values, int window);

/// Rotation that removes an orientation before a heading is applied. With
/// `yawOnly` only the yaw of `orientation` about +y is removed.
Mat3 orientationRemoval(const Mat3& orientation, bool yawOnly, const Vec3& forward);

/// Rotation taking the asset's facing direction onto +x, the direction the
/// heading rotation treats as heading 0.
Mat3 forwardAlignment(const Vec3& forward);

/// V' = R * removal * (V - root) + newRoot, applied to every row.
Points3 retargetVertices(const Points3& vertices, const Mat3& removal, const Vec3& root, const Mat3& heading,
                         const Vec3& newRoot);

enum class GroundingMode { Opening, SlidingMin };

GroundingMode parseGroundingMode(const std::string& name);
std::string groundingModeName(GroundingMode mode);

/// Per-frame vertical offsets to subtract. SlidingMin takes the minimum of
/// the per-frame heights over a centred window; Opening follows it with a
/// maximum over the same windows, which makes grounding idempotent.
Eigen::VectorXd groundingOffsets(const Eigen::VectorXd& frameMinY, int window, GroundingMode mode);

/// Lowest y of `vertexIds` (all vertices when empty).
double minHeight(const Points3& vertices, const std::vector<int>& vertexIds);

struct GroundingResult {
    std::vector<Points3> frames;
    Eigen::VectorXd offsets;
};

GroundingResult groundFeet(const std::vector<Points3>& frames, const std::vector<int>& footVertexIds, int window,
                           GroundingMode mode = GroundingMode::Opening);

}  // namespace wm
