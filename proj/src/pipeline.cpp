#include "worldmotion/pipeline.hpp"

#include "worldmotion/asset_io.hpp"
#include "worldmotion/binary_container.hpp"
#include "worldmotion/mannequin.hpp"
#include "worldmotion/parallel.hpp"
#include "worldmotion/rotation.hpp"

#include <algorithm>
#include <cmath>

namespace wm {

namespace {

nlohmann::json vecJson(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json matJson(const Mat3& m) {
    std::vector<double> out;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
    }
    return out;
}

}  // namespace

std::vector<Points3> skinSequence(const BodyModelAsset& asset, const MotionSequence& seq, int threads) {
    std::vector<Points3> out(seq.frames.size());
    parallelFor(seq.frameCount(), threads, [&](int i) { out[i] = skinVertices(asset, seq.frames[i]); });
    return out;
}

std::vector<int> handFaceUnion(const BodyModelAsset& asset) {
    std::vector<int> faces = asset.handFaceIds(HandSide::Left);
    const auto right = asset.handFaceIds(HandSide::Right);
    faces.insert(faces.end(), right.begin(), right.end());
    std::sort(faces.begin(), faces.end());
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
    return faces;
}

EditResult editMotion(const EstimatorBundle& bundle, const BodyModelAsset& asset,
                      const std::vector<Keypoint>& keypoints, const std::optional<MotionClip>& clip,
                      const PipelineConfig& config) {
    config.validate();
    bundle.validate();
    const int n = bundle.frameCount();
    if (n < 2) throw ValidationError("edit: the motion needs at least 2 frames");
    bundle.body.validateFor(asset);

    EditResult r;
    nlohmann::json report;
    report["version"] = 1;
    report["frame_count"] = n;
    report["fps"] = bundle.body.fps;
    report["config"] = config.toJson();

    // Camera: registered from joint tracks when available.
    std::vector<CameraModel> cameras = bundle.cameras;
    if (bundle.jointsWorld) {
        const CameraRegistration reg = deriveCameraRegistration(bundle);
        r.camera = reg.camera;
        if (cameras.size() == 1) cameras.front() = reg.camera;
        report["camera"] = {{"source", "registration"},
                            {"rms_residual", reg.transform.rmsResidual},
                            {"mean_residual", reg.transform.meanResidual}};
    } else {
        r.camera = bundle.camera(0);
        report["camera"] = {{"source", "camera.json"}};
    }
    report["camera"]["R_w2c"] = matJson(r.camera.R_w2c);
    report["camera"]["T_w2c"] = {r.camera.T_w2c.x(), r.camera.T_w2c.y(), r.camera.T_w2c.z()};

    // Source action.
    MotionSequence source = bundle.body;
    if (clip) {
        const FramePose& ref = bundle.body.frames.front();
        source = retargetShape(loopClip(clip->sequence, n, config.blendWindow), ref.shape, ref.childFactor);
        source.validateFor(asset);
        source.fps = bundle.body.fps;
        source.coordinateFrame = bundle.body.coordinateFrame;
        source.extra = bundle.body.extra;
        const int l = clip->sequence.frameCount();
        report["clip"] = {{"id", clip->id}, {"clip_frames", l}, {"cycles", static_cast<double>(n) / l},
                          {"blend_window", config.blendWindow}};
        report["hands"] = {{"merged", 0}, {"skipped", 0}, {"note", "hand estimates belong to the original action"}};
    } else {
        report["clip"] = nullptr;
        HandMergeStats stats;
        if (bundle.hands) source = mergeHands(source, *bundle.hands, asset, cameras, config.handConfidence, &stats);
        report["hands"] = {{"merged", stats.merged}, {"skipped", stats.skipped}};
    }

    const Points3 originalRoot = rootPositions(asset, source);

    // World frame anchored at the first stance point.
    const Vec3 stance(originalRoot(0, 0), 0.0, originalRoot(0, 2));
    r.worldFrame = buildWorldFrame(stance, Vec3(0.0, -1.0, 0.0), r.camera.viewDirection());
    report["world_frame"] = worldFrameToJson(r.worldFrame);

    // Drawn path on the ground.
    validateKeypoints(keypoints, r.camera.width, r.camera.height);
    r.pixels = interpolateKeypoints(keypoints, n);
    r.drawnPath.resize(n, 3);
    std::optional<DepthMap> depth;
    if (!bundle.depthFiles.empty()) depth = loadDepthMap(bundle.root / bundle.depthFiles.front());
    for (int i = 0; i < n; ++i) {
        const Vec2 px = r.pixels.row(i).transpose();
        Vec3 w;
        if (depth) {
            const DepthSample s = depth->sample(px, r.camera.f1);
            w = cameraToWorld(unprojectPoint(px, r.camera, s), r.camera);
        } else {
            w = groundIntersect(px, r.camera, r.worldFrame);
        }
        r.drawnPath.row(i) << w.x(), r.worldFrame.groundHeight, w.z();
    }
    report["trajectory"] = {{"keypoints", keypoints.size()}, {"unprojection", depth ? "depth" : "ground"}};

    // Speed alignment against the original horizontal pacing.
    Points3 originalGround = originalRoot;
    originalGround.col(1).setZero();
    const Eigen::VectorXd originalArc = cumulativeArcLength(originalGround, config.norm);
    r.alignment = alignSpeed(r.drawnPath, originalArc, config.norm, config.rescale);
    const Eigen::VectorXd alignedArc = cumulativeArcLength(r.alignment.positions, config.norm);
    bool monotone = true;
    for (int i = 1; i < n; ++i) monotone = monotone && alignedArc(i) >= alignedArc(i - 1);
    auto& tj = report["trajectory"];
    tj["rescale_factor"] = r.alignment.rescaleFactor;
    tj["clamped"] = r.alignment.clamped;
    tj["drawn_length"] = cumulativeArcLength(r.drawnPath, config.norm)(n - 1);
    tj["original_length"] = originalArc(n - 1);
    tj["arc_monotone"] = monotone;
    tj["cumulative_arc"] = vecJson(alignedArc);

    // Headings and per-frame re-orientation.
    r.headings = deriveHeadings(r.alignment.positions, config.smoothingWindow, config.epsilon);
    tj["degenerate_frames"] = r.headings.heldFrames;
    tj["all_static"] = r.headings.allStatic;
    tj["headings"] = vecJson(r.headings.psi);

    const Mat3 align = forwardAlignment(asset.canonicalForward);
    MotionSequence out = source;
    for (int i = 0; i < n; ++i) {
        FramePose& f = out.frames[i];
        const Mat3 o = axisAngleToMatrix(f.globalOrientation);
        Mat3 m = Mat3::Identity();
        if (!r.headings.allStatic) {
            m = r.headings.rotations[i] * align * orientationRemoval(o, config.yawOnly, asset.canonicalForward);
        }
        f.globalOrientation = matrixToAxisAngle(m * o);
        const Vec3 target(r.alignment.positions(i, 0), originalRoot(i, 1), r.alignment.positions(i, 2));
        f.translation += target - originalRoot.row(i).transpose();
    }

    // Foot contact.
    r.groundingOffsets = Eigen::VectorXd::Zero(n);
    if (config.grounding) {
        const auto meshes = skinSequence(asset, out, config.threads);
        Eigen::VectorXd mins(n);
        for (int i = 0; i < n; ++i) mins(i) = minHeight(meshes[i], asset.footVertexIds);
        r.groundingOffsets = groundingOffsets(mins, config.groundingWindow, config.groundingMode);
        for (int i = 0; i < n; ++i) out.frames[i].translation.y() -= r.groundingOffsets(i);
    }
    report["grounding"] = {{"enabled", config.grounding},
                           {"mode", groundingModeName(config.groundingMode)},
                           {"window", config.groundingWindow},
                           {"max_abs_offset", r.groundingOffsets.size() ? r.groundingOffsets.cwiseAbs().maxCoeff() : 0.0},
                           {"offsets", vecJson(r.groundingOffsets)}};

    r.sequence = std::move(out);
    r.report = std::move(report);
    return r;
}

nlohmann::json renderMotion(const BodyModelAsset& asset, const MotionSequence& seq,
                            const std::vector<CameraModel>& cameras, const std::filesystem::path& outDir,
                            const PipelineConfig& config) {
    config.validate();
    seq.validateFor(asset);
    RenderJob job;
    job.frames = skinSequence(asset, seq, config.threads);
    job.faces = asset.faces;
    job.vertexColors = asset.semanticVertexColors;
    job.handFaces = handFaceUnion(asset);
    job.cameras = cameras;
    job.width = config.width;
    job.height = config.height;
    job.threads = config.threads;
    job.options.near = config.near;
    job.options.handOcclusionDelta = config.handOcclusionDelta;
    return renderSequence(job, outDir);
}

BodyModelAsset loadAssetOrDefault(const std::filesystem::path& path) {
    if (path.empty()) return makeMannequin();
    return loadAsset(path);
}

EditResult runEdit(const EditPaths& paths, const PipelineConfig& config) {
    if (paths.trajectory.empty()) throw ValidationError("edit: a trajectory file is required");
    if (!std::filesystem::exists(paths.trajectory)) throw IoError("trajectory file not found: " + paths.trajectory.string());
    const EstimatorBundle bundle = parseBundle(paths.bundle);
    const BodyModelAsset asset = loadAssetOrDefault(paths.asset);
    const auto keypoints = loadKeypoints(paths.trajectory);
    std::optional<MotionClip> clip;
    if (!paths.clipId.empty()) {
        if (paths.bank.empty()) throw ValidationError("edit: --clip needs --bank");
        clip = MotionBank(paths.bank).get(paths.clipId);
    }
    EditResult r = editMotion(bundle, asset, keypoints, clip, config);
    r.report["inputs"] = {{"bundle", paths.bundle.generic_string()},
                          {"trajectory", paths.trajectory.generic_string()},
                          {"asset", paths.asset.empty() ? "builtin:mannequin" : paths.asset.generic_string()},
                          {"clip", paths.clipId.empty() ? nlohmann::json(nullptr) : nlohmann::json(paths.clipId)}};
    if (!paths.outSequence.empty()) saveMotion(r.sequence, paths.outSequence);
    if (!paths.outReport.empty()) writeFileBytes(paths.outReport, r.report.dump(1) + "\n");
    return r;
}

}  // namespace wm
