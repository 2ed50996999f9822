#include "worldmotion/renderer.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/hashing.hpp"
#include "worldmotion/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace wm {

namespace {

struct ClipVertex {
    Vec3 p;     // camera space
    Vec3 bary;  // weights of the original triangle corners
};

std::vector<ClipVertex> clipNear(const std::array<ClipVertex, 3>& tri, double near) {
    std::vector<ClipVertex> out;
    for (int i = 0; i < 3; ++i) {
        const ClipVertex& a = tri[i];
        const ClipVertex& b = tri[(i + 1) % 3];
        const bool ina = a.p.z() >= near;
        const bool inb = b.p.z() >= near;
        if (ina) out.push_back(a);
        if (ina != inb) {
            const double t = (near - a.p.z()) / (b.p.z() - a.p.z());
            ClipVertex c{a.p + t * (b.p - a.p), a.bary + t * (b.bary - a.bary)};
            c.p.z() = near;
            out.push_back(c);
        }
    }
    return out;
}

bool ownsEdge(double dx, double dy) { return dy < 0.0 || (dy == 0.0 && dx > 0.0); }

std::uint8_t toByte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

}  // namespace

RasterBuffer rasterize(const Points3& vertices, const Faces& faces, const Points3& vertexColors,
                       const CameraModel& cam, const std::vector<int>& faceSubset, const RenderOptions& options) {
    if (cam.width <= 0 || cam.height <= 0) throw ValidationError("rasterize: resolution must be positive");
    if (vertexColors.rows() != vertices.rows()) throw ValidationError("rasterize: one colour per vertex required");
    RasterBuffer buf;
    buf.width = cam.width;
    buf.height = cam.height;
    const std::size_t npix = static_cast<std::size_t>(buf.width) * buf.height;
    buf.depth.assign(npix, 0.0);
    buf.face.assign(npix, -1);
    buf.color.assign(npix, Vec3::Zero());
    buf.normal.assign(npix, Vec3::Zero());

    const Points3 camPts = (vertices * cam.R_w2c.transpose()).rowwise() + cam.T_w2c.transpose();
    const Mat3& k = cam.K;
    const Eigen::Index faceCount = faceSubset.empty() ? faces.rows() : static_cast<Eigen::Index>(faceSubset.size());

    for (Eigen::Index fi = 0; fi < faceCount; ++fi) {
        const int f = faceSubset.empty() ? static_cast<int>(fi) : faceSubset[fi];
        if (f < 0 || f >= faces.rows()) throw ValidationError("rasterize: face id out of range");
        std::array<ClipVertex, 3> tri;
        std::array<int, 3> idx{};
        for (int c = 0; c < 3; ++c) {
            idx[c] = faces(f, c);
            if (idx[c] < 0 || idx[c] >= vertices.rows()) throw ValidationError("rasterize: vertex index out of range");
            tri[c] = {camPts.row(idx[c]).transpose(), Vec3::Unit(c)};
        }
        Vec3 n = (tri[1].p - tri[0].p).cross(tri[2].p - tri[0].p);
        const double nn = n.norm();
        if (!(nn > 0.0)) continue;
        n /= nn;
        if (n.dot(tri[0].p) > 0.0) n = -n;

        const std::vector<ClipVertex> poly = clipNear(tri, options.near);
        for (std::size_t s = 1; s + 1 < poly.size(); ++s) {
            std::array<const ClipVertex*, 3> v{&poly[0], &poly[s], &poly[s + 1]};
            std::array<Vec2, 3> q;
            std::array<double, 3> invz{};
            for (int c = 0; c < 3; ++c) {
                const Vec3& p = v[c]->p;
                q[c] = Vec2(k(0, 0) * p.x() / p.z() + k(0, 1) * p.y() / p.z() + k(0, 2),
                            k(1, 1) * p.y() / p.z() + k(1, 2));
                invz[c] = 1.0 / p.z();
            }
            double area = (q[1].x() - q[0].x()) * (q[2].y() - q[0].y()) - (q[1].y() - q[0].y()) * (q[2].x() - q[0].x());
            if (!(std::abs(area) > 1e-12)) continue;
            if (area < 0.0) {
                std::swap(q[1], q[2]);
                std::swap(v[1], v[2]);
                std::swap(invz[1], invz[2]);
                area = -area;
            }
            const double minx = std::min({q[0].x(), q[1].x(), q[2].x()});
            const double maxx = std::max({q[0].x(), q[1].x(), q[2].x()});
            const double miny = std::min({q[0].y(), q[1].y(), q[2].y()});
            const double maxy = std::max({q[0].y(), q[1].y(), q[2].y()});
            const int x0 = std::max(0, static_cast<int>(std::floor(minx - 0.5)));
            const int x1 = std::min(buf.width - 1, static_cast<int>(std::ceil(maxx - 0.5)));
            const int y0 = std::max(0, static_cast<int>(std::floor(miny - 0.5)));
            const int y1 = std::min(buf.height - 1, static_cast<int>(std::ceil(maxy - 0.5)));
            if (x0 > x1 || y0 > y1) continue;

            // Edge e is opposite corner e.
            std::array<Vec2, 3> ea, ed;
            std::array<bool, 3> owns{};
            for (int e = 0; e < 3; ++e) {
                ea[e] = q[(e + 1) % 3];
                ed[e] = q[(e + 2) % 3] - q[(e + 1) % 3];
                owns[e] = ownsEdge(ed[e].x(), ed[e].y());
            }
            for (int y = y0; y <= y1; ++y) {
                const double py = y + 0.5;
                for (int x = x0; x <= x1; ++x) {
                    const double px = x + 0.5;
                    std::array<double, 3> w{};
                    bool inside = true;
                    for (int e = 0; e < 3 && inside; ++e) {
                        w[e] = ed[e].x() * (py - ea[e].y()) - ed[e].y() * (px - ea[e].x());
                        if (w[e] < 0.0 || (w[e] == 0.0 && !owns[e])) inside = false;
                    }
                    if (!inside) continue;
                    double sum = 0.0;
                    std::array<double, 3> pw{};
                    for (int c = 0; c < 3; ++c) {
                        pw[c] = (w[c] / area) * invz[c];
                        sum += pw[c];
                    }
                    if (!(sum > 0.0)) continue;
                    const double z = 1.0 / sum;
                    const std::size_t pix = static_cast<std::size_t>(y) * buf.width + x;
                    if (buf.face[pix] >= 0 && !(z < buf.depth[pix])) continue;
                    Vec3 bary = Vec3::Zero();
                    for (int c = 0; c < 3; ++c) bary += (pw[c] / sum) * v[c]->bary;
                    Vec3 color = Vec3::Zero();
                    for (int c = 0; c < 3; ++c) color += bary(c) * vertexColors.row(idx[c]).transpose();
                    buf.depth[pix] = z;
                    buf.face[pix] = f;
                    buf.color[pix] = color;
                    buf.normal[pix] = n;
                }
            }
        }
    }
    return buf;
}

Vec3 encodeNormal(const Vec3& n) { return (n.array() + 1.0) * 0.5; }

Vec3 decodeNormal(const std::uint8_t* rgb) {
    return Vec3(rgb[0] / 255.0 * 2.0 - 1.0, rgb[1] / 255.0 * 2.0 - 1.0, rgb[2] / 255.0 * 2.0 - 1.0);
}

Image16 GuidanceFrame::depthMillimetres() const {
    Image16 img(width, height);
    for (std::size_t i = 0; i < depth.size(); ++i) {
        if (depth[i] <= 0.0) continue;
        const double mm = std::round(depth[i] * 1000.0);
        img.data[i] = static_cast<std::uint16_t>(std::clamp(mm, 1.0, 65535.0));
    }
    return img;
}

Image8 renderHandsWithOcclusion(const Points3& vertices, const Faces& faces, const Points3& vertexColors,
                                const std::vector<int>& handFaces, const CameraModel& cam, const RasterBuffer& body,
                                const RenderOptions& options) {
    Image8 out(cam.width, cam.height, 3);
    if (handFaces.empty()) return out;
    const RasterBuffer hands = rasterize(vertices, faces, vertexColors, cam, handFaces, options);
    for (std::size_t i = 0; i < hands.depth.size(); ++i) {
        if (hands.face[i] < 0) continue;
        const double bodyDepth = body.depth[i];
        if (body.face[i] >= 0 && bodyDepth < hands.depth[i] - options.handOcclusionDelta) continue;
        for (int c = 0; c < 3; ++c) out.data[3 * i + c] = toByte(hands.color[i](c));
    }
    return out;
}

GuidanceFrame rasterizeFrame(const Points3& vertices, const Faces& faces, const Points3& vertexColors,
                             const CameraModel& cam, const std::vector<int>& handFaces, const RenderOptions& options) {
    const RasterBuffer body = rasterize(vertices, faces, vertexColors, cam, {}, options);
    GuidanceFrame g;
    g.width = cam.width;
    g.height = cam.height;
    g.depth = body.depth;
    g.normal = Image8(g.width, g.height, 3);
    g.semantic = Image8(g.width, g.height, 3);
    g.mask = Image8(g.width, g.height, 1);
    for (std::size_t i = 0; i < body.depth.size(); ++i) {
        if (body.face[i] < 0) continue;
        const Vec3 n = encodeNormal(body.normal[i]);
        for (int c = 0; c < 3; ++c) {
            g.normal.data[3 * i + c] = toByte(n(c));
            g.semantic.data[3 * i + c] = toByte(body.color[i](c));
        }
        g.mask.data[i] = 255;
    }
    g.hand = renderHandsWithOcclusion(vertices, faces, vertexColors, handFaces, cam, body, options);
    return g;
}

std::vector<std::string> encodeGuidanceFrame(const GuidanceFrame& frame) {
    return {encodePng(frame.depthMillimetres()), encodePng(frame.normal), encodePng(frame.semantic),
            encodePng(frame.hand), encodePng(frame.mask)};
}

nlohmann::json renderSequence(const RenderJob& job, const std::filesystem::path& outDir) {
    const int n = static_cast<int>(job.frames.size());
    if (job.cameras.empty()) throw ValidationError("renderSequence: no camera");
    if (job.cameras.size() != 1 && static_cast<int>(job.cameras.size()) != n) {
        throw ValidationError("renderSequence: " + std::to_string(job.cameras.size()) + " cameras for " +
                              std::to_string(n) + " frames");
    }
    if (job.width <= 0 || job.height <= 0) throw ValidationError("renderSequence: resolution must be positive");
    std::vector<CameraModel> cams;
    for (const auto& c : job.cameras) cams.push_back(c.resized(job.width, job.height));

    std::error_code ec;
    for (const char* type : kMapTypes) {
        std::filesystem::create_directories(outDir / type, ec);
        if (ec) throw IoError("cannot create " + (outDir / type).string() + ": " + ec.message());
    }

    std::vector<std::vector<std::string>> hashes(n);
    parallelFor(n, job.threads, [&](int i) {
        const CameraModel& cam = cams.size() == 1 ? cams.front() : cams[i];
        const GuidanceFrame g = rasterizeFrame(job.frames[i], job.faces, job.vertexColors, cam, job.handFaces, job.options);
        const auto files = encodeGuidanceFrame(g);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.png", i);
        for (std::size_t t = 0; t < files.size(); ++t) {
            writeFileBytes(outDir / kMapTypes[t] / name, files[t]);
            hashes[i].push_back(sha256Hex(files[t]));
        }
    });

    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["resolution"] = {job.width, job.height};
    manifest["frame_count"] = n;
    nlohmann::json camj = nlohmann::json::array();
    for (const auto& c : cams) camj.push_back(cameraToJson(c));
    manifest["cameras"] = camj;
    manifest["encodings"] = {
        {"depth", "png16, millimetres, 0 = background, covered pixels >= 1, saturates at 65535"},
        {"normal", "png rgb, camera space (x right, y down, z forward), (n + 1) / 2 * 255"},
        {"semantic", "png rgb, per-vertex colours, perspective-correct interpolation"},
        {"hand", "png rgb, hand vertex colours, body-occluded pixels zeroed"},
        {"mask", "png grey, 255 = foreground"}};
    manifest["hand_occlusion_delta_m"] = job.options.handOcclusionDelta;
    manifest["near_m"] = job.options.near;
    nlohmann::json files = nlohmann::json::object();
    for (std::size_t t = 0; t < std::size(kMapTypes); ++t) {
        nlohmann::json list = nlohmann::json::array();
        for (int i = 0; i < n; ++i) {
            char name[48];
            std::snprintf(name, sizeof(name), "%s/frame_%06d.png", kMapTypes[t], i);
            list.push_back({{"file", name}, {"sha256", hashes[i][t]}});
        }
        files[kMapTypes[t]] = list;
    }
    manifest["files"] = files;
    writeFileBytes(outDir / "manifest.json", manifest.dump(1) + "\n");
    return manifest;
}

}  // namespace wm
