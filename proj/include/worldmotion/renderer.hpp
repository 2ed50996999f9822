#pragma once

#include "worldmotion/image_io.hpp"
#include "worldmotion/trajectory.hpp"

#include <filesystem>
#include <vector>

namespace wm {

struct RenderOptions {
    double near = 1e-4;
    /// A hand pixel is hidden when the body is closer by more than this (m).
    double handOcclusionDelta = 0.005;
};

/// Per-pixel z-buffer output for one mesh.
struct RasterBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> depth;  // camera z, 0 = background
    std::vector<int> face;      // -1 = background
    std::vector<Vec3> color;    // interpolated vertex colour
    std::vector<Vec3> normal;   // camera-space face normal facing the camera

    double depthAt(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
};

/// Rasterise `faces` of the mesh (all when `faceSubset` is empty) with the
/// camera's own image size. Pixel (x, y) samples the point (x + 0.5, y + 0.5);
/// edges follow a top-left fill rule and equal depths keep the lower face id.
RasterBuffer rasterize(const Points3& vertices, const Faces& faces, const Points3& vertexColors,
                       const CameraModel& cam, const std::vector<int>& faceSubset = {},
                       const RenderOptions& options = {});

struct GuidanceFrame {
    int width = 0;
    int height = 0;
    std::vector<double> depth;  // metres, 0 = background
    Image8 normal;
    Image8 semantic;
    Image8 hand;
    Image8 mask;

    /// Depth in millimetres, saturating at 65535; covered pixels are at least 1.
    Image16 depthMillimetres() const;
};

Vec3 encodeNormal(const Vec3& n);
Vec3 decodeNormal(const std::uint8_t* rgb);

GuidanceFrame rasterizeFrame(const Points3& vertices, const Faces& faces, const Points3& vertexColors,
                             const CameraModel& cam, const std::vector<int>& handFaces = {},
                             const RenderOptions& options = {});

/// Hands rendered on their own, with pixels hidden by the body zeroed.
Image8 renderHandsWithOcclusion(const Points3& vertices, const Faces& faces, const Points3& vertexColors,
                                const std::vector<int>& handFaces, const CameraModel& cam,
                                const RasterBuffer& body, const RenderOptions& options = {});

struct RenderJob {
    std::vector<Points3> frames;
    Faces faces;
    Points3 vertexColors;
    std::vector<int> handFaces;
    /// One camera for every frame, or one per frame.
    std::vector<CameraModel> cameras;
    int width = 0;
    int height = 0;
    int threads = 0;
    RenderOptions options;
};

inline constexpr const char* kMapTypes[] = {"depth", "normal", "semantic", "hand", "mask"};

/// Encoded PNG files of one frame, in kMapTypes order.
std::vector<std::string> encodeGuidanceFrame(const GuidanceFrame& frame);

/// Writes `<outDir>/<type>/frame_%06d.png` for every frame and map type plus
/// `<outDir>/manifest.json`; returns the manifest.
nlohmann::json renderSequence(const RenderJob& job, const std::filesystem::path& outDir);

}  // namespace wm
