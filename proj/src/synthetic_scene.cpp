#include "worldmotion/synthetic_scene.hpp"

#include "worldmotion/mannequin.hpp"
#include "worldmotion/rotation.hpp"

#include <cmath>
#include <numbers>

namespace wm {

namespace {

void setJoint(const BodyModelAsset& asset, FramePose& pose, int joint, const Mat3& r) {
    const int row = bodyPoseIndex(asset, joint);
    if (row < 0) return;
    pose.bodyPose.row(row) = matrixToAxisAngle(r).transpose();
}

}  // namespace

MotionSequence makeWalkingClip(const BodyModelAsset& asset, const WalkOptions& o) {
    using namespace mannequin;
    if (o.frames < 2 || o.cycleFrames < 2) throw ValidationError("makeWalkingClip: need at least 2 frames per cycle");
    const double pi = std::numbers::pi;
    MotionSequence seq;
    seq.fps = o.fps;
    const double meanStep = o.speed / o.fps;
    // The body faces +z at rest; turn it toward the direction of travel.
    const Vec3 dir(std::cos(o.headingYaw), 0.0, std::sin(o.headingYaw));
    const Mat3 facing = rotY(std::atan2(dir.x(), dir.z()));
    double distance = 0.0;
    for (int k = 0; k < o.frames; ++k) {
        const double phase = 2.0 * pi * k / o.cycleFrames;
        FramePose f = FramePose::zero(asset);
        f.globalOrientation = matrixToAxisAngle(facing);
        f.translation = o.start + distance * dir;
        f.translation.y() = 0.0;
        setJoint(asset, f, LeftHip, rotX(-0.45 * std::sin(phase)));
        setJoint(asset, f, RightHip, rotX(0.45 * std::sin(phase)));
        setJoint(asset, f, LeftKnee, rotX(0.35 * (1.0 + std::cos(phase))));
        setJoint(asset, f, RightKnee, rotX(0.35 * (1.0 - std::cos(phase))));
        setJoint(asset, f, LeftAnkle, rotX(-0.1 * std::sin(phase)));
        setJoint(asset, f, RightAnkle, rotX(0.1 * std::sin(phase)));
        setJoint(asset, f, LeftShoulder, rotX(0.4 * std::sin(phase)) * rotZ(-1.25));
        setJoint(asset, f, RightShoulder, rotX(-0.4 * std::sin(phase)) * rotZ(1.25));
        setJoint(asset, f, LeftElbow, rotX(-0.3));
        setJoint(asset, f, RightElbow, rotX(-0.3));
        setJoint(asset, f, Spine2, rotY(0.08 * std::sin(phase)));
        // Lowest foot vertex on the ground.
        f.translation.y() = 0.0 - minHeight(skinVertices(asset, f), asset.footVertexIds);
        seq.frames.push_back(std::move(f));
        distance += meanStep * (1.0 + o.speedVariation * std::sin(phase + pi / o.cycleFrames));
    }
    return seq;
}

CameraModel makeLookAtCamera(const Vec3& center, const Vec3& target, int width, int height, double focal) {
    const Vec3 f = (target - center).normalized();
    const Vec3 x = f.cross(Vec3::UnitY()).normalized();
    const Vec3 y = f.cross(x);
    CameraModel cam;
    cam.R_w2c.row(0) = x.transpose();
    cam.R_w2c.row(1) = y.transpose();
    cam.R_w2c.row(2) = f.transpose();
    cam.T_w2c = -cam.R_w2c * center;
    cam.K << focal, 0.0, width / 2.0, 0.0, focal, height / 2.0, 0.0, 0.0, 1.0;
    cam.f1 = focal;
    cam.width = width;
    cam.height = height;
    cam.validate();
    return cam;
}

DepthMap groundDepthMap(const CameraModel& cam) {
    DepthMap d;
    d.metres = ImageF(cam.width, cam.height);
    d.f2 = cam.f1;
    const Mat3 kinv = cam.K.inverse();
    const Vec3 c = cam.center();
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            const Vec3 ray = kinv * Vec3(x + 0.5, y + 0.5, 1.0);
            const Vec3 dir = cam.R_w2c.transpose() * ray;
            if (dir.y() >= -1e-9) continue;
            const double t = -c.y() / dir.y();
            d.metres.data[static_cast<std::size_t>(y) * cam.width + x] = static_cast<float>(t * ray.z());
        }
    }
    return d;
}

SyntheticScene makeSyntheticScene(const BodyModelAsset& asset, const SceneOptions& o) {
    SyntheticScene s;
    WalkOptions walk;
    walk.frames = o.frames;
    walk.cycleFrames = o.cycleFrames;
    walk.fps = o.fps;
    // Place the root so that its ground footprint starts at `start`.
    const Vec3 rootRest = asset.jointRestPositions.row(asset.rootJoint()).transpose();
    walk.start = o.start - Vec3(rootRest.x(), 0.0, rootRest.z());
    MotionSequence body = makeWalkingClip(asset, walk);
    for (auto& f : body.frames) {
        f.shape = Eigen::VectorXd::Zero(asset.shapeCount());
        if (asset.shapeCount() > 0) f.shape(0) = 0.5;
    }

    const CameraModel cam = makeLookAtCamera(o.cameraCenter, o.cameraTarget, o.width, o.height, o.focal);
    EstimatorBundle& b = s.bundle;
    b.body = body;
    b.cameras = {cam};
    b.manifest = {{"version", 1}, {"generator", "synthetic-walk"}};
    if (o.withJoints) {
        std::vector<Points3> world, camera;
        for (const auto& f : body.frames) {
            const auto fk = forwardKinematics(asset, f);
            Points3 w(static_cast<Eigen::Index>(fk.size()), 3);
            for (std::size_t j = 0; j < fk.size(); ++j) w.row(static_cast<Eigen::Index>(j)) = fk[j].position.transpose();
            world.push_back(w);
            camera.push_back((w * cam.R_w2c.transpose()).rowwise() + cam.T_w2c.transpose());
        }
        b.jointsWorld = world;
        b.jointsCamera = camera;
    }
    if (o.withHands) b.hands = handsFromBody(body, asset, cam);
    if (o.withDepth) {
        s.depth = groundDepthMap(cam);
        b.depthFiles = {"depth/frame_000000.pfm"};
    }

    const Vec3 start(o.start.x(), 0.0, o.start.z());
    const int k = o.keypointCount;
    s.arcWorld.resize(k, 3);
    for (int i = 0; i < k; ++i) {
        const double t = (std::numbers::pi / 2.0) * i / (k - 1);
        const Vec3 p = start + Vec3(o.arcRadius * std::sin(t), 0.0, o.arcRadius * (1.0 - std::cos(t)));
        s.arcWorld.row(i) = p.transpose();
        const Projection pr = project(p, cam);
        Keypoint kp;
        kp.frame = static_cast<int>(std::lround(static_cast<double>(i) * (o.frames - 1) / (k - 1)));
        kp.u = pr.pixel.x();
        kp.v = pr.pixel.y();
        s.keypoints.push_back(kp);
    }
    return s;
}

void writeSyntheticScene(SyntheticScene& scene, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    EstimatorBundle b = scene.bundle;
    b.root = dir;
    if (scene.depth) saveDepthMap(*scene.depth, dir / "depth" / "frame_000000.pfm");
    writeBundle(b, dir);
    saveKeypoints(scene.keypoints, dir / "trajectory.json");
    scene.bundle.root = dir;
}

}  // namespace wm
