#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/pipeline.hpp"
#include "worldmotion/rotation.hpp"
#include "worldmotion/synthetic_scene.hpp"

#include <numbers>

using namespace wm;

namespace {

SceneOptions smallOptions() {
    SceneOptions o;
    o.frames = 60;
    o.cycleFrames = 30;
    o.width = 256;
    o.height = 256;
    o.focal = 250;
    return o;
}

// Keypoints that retrace the original root footprint, pinned to frames.
std::vector<Keypoint> retrace(const EstimatorBundle& b, const BodyModelAsset& a, int count) {
    const Points3 root = rootPositions(a, b.body);
    const int n = b.frameCount();
    std::vector<Keypoint> k;
    for (int i = 0; i < count; ++i) {
        const int f = static_cast<int>(std::lround(static_cast<double>(i) * (n - 1) / (count - 1)));
        const auto p = oracle::projectPixel(Vec3(root(f, 0), 0.0, root(f, 2)), b.camera());
        k.push_back({f, p.x(), p.y()});
    }
    return k;
}

}  // namespace

TEST_CASE("self edit reproduces the original root path") {
    const auto& a = fixture::mannequin();
    const auto scene = makeSyntheticScene(a, smallOptions());
    PipelineConfig c;
    const auto r = editMotion(scene.bundle, a, retrace(scene.bundle, a, 5), std::nullopt, c);
    const Points3 before = rootPositions(a, scene.bundle.body);
    const Points3 after = rootPositions(a, r.sequence);
    for (int i = 0; i < before.rows(); ++i) {
        CHECK(std::abs(after(i, 0) - before(i, 0)) < 1e-3);
        CHECK(std::abs(after(i, 2) - before(i, 2)) < 1e-3);
        CHECK(std::abs(after(i, 1) - (before(i, 1) - r.groundingOffsets(i))) < 1e-9);
    }
    CHECK(r.report["trajectory"]["arc_monotone"] == true);
    CHECK(r.report["trajectory"]["rescale_factor"].get<double>() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.report["camera"]["source"] == "registration");
    CHECK(r.report["camera"]["rms_residual"].get<double>() < 1e-9);
}

TEST_CASE("quarter-circle edit: path, heading and pacing") {
    const auto& a = fixture::mannequin();
    const auto scene = makeSyntheticScene(a, smallOptions());
    PipelineConfig c;
    c.smoothingWindow = 1;
    const auto r = editMotion(scene.bundle, a, scene.keypoints, std::nullopt, c);
    const int n = r.sequence.frameCount();
    CHECK(n == 60);
    const Points3 root = rootPositions(a, r.sequence);

    // The root footprint follows the drawn path in the image.
    for (const auto& k : scene.keypoints) {
        const auto p = oracle::projectPixel(Vec3(root(*k.frame, 0), 0.0, root(*k.frame, 2)), scene.bundle.camera());
        CHECK(oracle::distanceToPolyline2(p, r.pixels) < 1.0);
    }
    // The body faces along its direction of travel.
    for (int i = 2; i < n - 1; ++i) {
        Vec3 d = root.row(i).transpose() - root.row(i - 1).transpose();
        d.y() = 0;
        if (d.norm() < 1e-5) continue;
        const Vec3 facing = axisAngleToMatrix(r.sequence.frames[i].globalOrientation) * a.canonicalForward;
        const Vec3 flat = Vec3(facing.x(), 0, facing.z()).normalized();
        CHECK(flat.dot(d.normalized()) > 0.999);
    }
    // Per-frame pacing follows the original profile.
    Points3 ground = rootPositions(a, scene.bundle.body);
    ground.col(1).setZero();
    const auto arc = cumulativeArcLength(ground, c.norm);
    const auto edited = cumulativeArcLength(r.alignment.positions, c.norm);
    for (int i = 1; i < n; ++i) {
        CHECK(std::abs((edited(i) - edited(i - 1)) - r.alignment.rescaleFactor * (arc(i) - arc(i - 1))) < 1e-6);
    }
    // Feet stay on the ground.
    const auto meshes = skinSequence(a, r.sequence);
    for (const auto& m : meshes) {
        const double y = minHeight(m, a.footVertexIds);
        CHECK(y >= -1e-9);
        CHECK(y <= 5e-3);
    }
    CHECK(r.report["trajectory"]["unprojection"] == "ground");
}

TEST_CASE("depth-based unprojection agrees with the ground fallback on a ground depth map") {
    const auto& a = fixture::mannequin();
    auto o = smallOptions();
    o.withDepth = true;
    const auto withDepth = makeSyntheticScene(a, o);
    fixture::TempDir dir;
    auto copy = withDepth;
    writeSyntheticScene(copy, dir.path());
    const auto bundle = parseBundle(dir.path());
    const auto r = editMotion(bundle, a, withDepth.keypoints, std::nullopt, PipelineConfig{});
    CHECK(r.report["trajectory"]["unprojection"] == "depth");
    o.withDepth = false;
    const auto plain = makeSyntheticScene(a, o);
    const auto g = editMotion(plain.bundle, a, plain.keypoints, std::nullopt, PipelineConfig{});
    // The depth map is float32, so the two agree to about a millimetre.
    CHECK((r.drawnPath - g.drawnPath).cwiseAbs().maxCoeff() < 5e-3);
}

TEST_CASE("yaw-only removal keeps lean") {
    const auto& a = fixture::mannequin();
    auto scene = makeSyntheticScene(a, smallOptions());
    for (auto& f : scene.bundle.body.frames) {
        f.globalOrientation = matrixToAxisAngle(axisAngleToMatrix(f.globalOrientation) * rotX(0.2));
    }
    PipelineConfig c;
    c.yawOnly = true;
    c.grounding = false;
    const auto yaw = editMotion(scene.bundle, a, scene.keypoints, std::nullopt, c);
    c.yawOnly = false;
    const auto full = editMotion(scene.bundle, a, scene.keypoints, std::nullopt, c);
    for (int i = 0; i < 60; ++i) {
        const Vec3 upYaw = axisAngleToMatrix(yaw.sequence.frames[i].globalOrientation) * Vec3::UnitY();
        const Vec3 upFull = axisAngleToMatrix(full.sequence.frames[i].globalOrientation) * Vec3::UnitY();
        CHECK(upFull.y() > 1.0 - 1e-9);
        CHECK(upYaw.y() < std::cos(0.15));
    }
}

TEST_CASE("static trajectory keeps the original orientation") {
    const auto& a = fixture::mannequin();
    auto scene = makeSyntheticScene(a, smallOptions());
    // Walking in place.
    auto& b = scene.bundle;
    for (auto& f : b.body.frames) {
        f.translation.x() = b.body.frames[0].translation.x();
        f.translation.z() = b.body.frames[0].translation.z();
    }
    b.jointsWorld.reset();
    b.jointsCamera.reset();
    const auto r = editMotion(b, a, scene.keypoints, std::nullopt, PipelineConfig{});
    CHECK(r.report["trajectory"]["all_static"] == true);
    const Points3 root = rootPositions(a, r.sequence);
    for (int i = 0; i < 60; ++i) {
        CHECK((r.sequence.frames[i].globalOrientation - b.body.frames[i].globalOrientation).norm() < 1e-9);
        CHECK((root.row(i) - root.row(0)).cwiseAbs()(0) < 1e-12);
        CHECK((root.row(i) - root.row(0)).cwiseAbs()(2) < 1e-12);
    }

    // A drawn path of zero length cannot carry a moving original.
    const auto k = scene.keypoints.front();
    const std::vector<Keypoint> still{{0, k.u, k.v}, {59, k.u, k.v}};
    CHECK_THROWS_AS(editMotion(makeSyntheticScene(a, smallOptions()).bundle, a, still, std::nullopt, PipelineConfig{}),
                    DegenerateError);
}

TEST_CASE("clip substitution loops the bank clip to the scene length") {
    const auto& a = fixture::mannequin();
    auto o = smallOptions();
    o.withHands = true;
    const auto scene = makeSyntheticScene(a, o);
    MotionClip clip;
    clip.id = "walk";
    clip.tags = {"walk"};
    clip.sequence = makeWalkingClip(a, {.frames = 25, .cycleFrames = 25});
    const auto r = editMotion(scene.bundle, a, scene.keypoints, clip, PipelineConfig{});
    CHECK(r.sequence.frameCount() == 60);
    CHECK(r.report["clip"]["id"] == "walk");
    CHECK(r.report["hands"]["merged"] == 0);
    for (const auto& f : r.sequence.frames) CHECK(f.shape == scene.bundle.body.frames[0].shape);

    const auto own = editMotion(scene.bundle, a, scene.keypoints, std::nullopt, PipelineConfig{});
    CHECK(own.report["hands"]["merged"] == 120);
}

TEST_CASE("runEdit writes outputs and reports resolved inputs") {
    const auto& a = fixture::mannequin();
    fixture::TempDir dir;
    auto scene = makeSyntheticScene(a, smallOptions());
    writeSyntheticScene(scene, dir / "scene");
    EditPaths p;
    p.bundle = dir / "scene";
    p.trajectory = dir / "scene" / "trajectory.json";
    p.outSequence = dir / "out.motion.json";
    p.outReport = dir / "out.report.json";
    const auto r = runEdit(p, PipelineConfig{});
    CHECK(std::filesystem::exists(p.outSequence));
    const auto report = nlohmann::json::parse(fixture::readText(p.outReport));
    CHECK(report["inputs"]["asset"] == "builtin:mannequin");
    CHECK(report["config"]["trajectory"]["norm"] == "L1");
    CHECK(fixture::readText(p.outSequence) == serializeMotion(r.sequence));

    // Deterministic.
    const auto first = fixture::readText(p.outSequence);
    runEdit(p, PipelineConfig{});
    CHECK(fixture::readText(p.outSequence) == first);

    p.trajectory = dir / "missing.json";
    CHECK_THROWS_AS(runEdit(p, PipelineConfig{}), IoError);
    p.trajectory = dir / "scene" / "trajectory.json";
    p.clipId = "x";
    CHECK_THROWS_AS(runEdit(p, PipelineConfig{}), ValidationError);
}

TEST_CASE("out-of-image keypoints are rejected") {
    const auto& a = fixture::mannequin();
    const auto scene = makeSyntheticScene(a, smallOptions());
    CHECK_THROWS_AS(editMotion(scene.bundle, a, {{0, 10, 10}, {59, 400, 10}}, std::nullopt, PipelineConfig{}),
                    ValidationError);
}

TEST_CASE("rendering an edit") {
    const auto& a = fixture::mannequin();
    auto o = smallOptions();
    o.frames = 3;
    const auto scene = makeSyntheticScene(a, o);
    PipelineConfig c;
    c.width = 64;
    c.height = 64;
    fixture::TempDir dir;
    const auto m = renderMotion(a, scene.bundle.body, scene.bundle.cameras, dir.path(), c);
    CHECK(m["files"]["depth"].size() == 3);
    CHECK(m["resolution"] == nlohmann::json({64, 64}));
    CHECK_FALSE(handFaceUnion(a).empty());
}
