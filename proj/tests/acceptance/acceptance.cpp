// Acceptance suite: one PASS/FAIL line per primary criterion.

#include "fixtures.hpp"
#include "oracles.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/hand_align.hpp"
#include "worldmotion/motion_bank.hpp"
#include "worldmotion/parallel.hpp"
#include "worldmotion/pipeline.hpp"
#include "worldmotion/renderer.hpp"
#include "worldmotion/rotation.hpp"
#include "worldmotion/synthetic_scene.hpp"
#include "worldmotion/trajectory.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>

using namespace wm;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

// Pinned tolerances.
constexpr double kRoundTripPx = 1e-6;
constexpr double kRoundTripSeconds = 1.0;
constexpr double kFocalScale = 1e-12;
constexpr double kRegistration = 1e-9;
constexpr double kPacing = 1e-6;
constexpr double kHeading = 1e-9;
constexpr double kOrthonormal = 1e-12;
constexpr double kIsometry = 1e-9;
constexpr double kGroundLow = 0.0;
constexpr double kGroundHigh = 5e-3;
constexpr double kHand = 1e-9;
constexpr double kRasterDepth = 1e-6;
constexpr double kFootprintPx = 1.0;
constexpr double kFullRunSeconds = 60.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point since) {
    return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

Outcome unprojectionRoundTrip() {
    std::mt19937_64 rng(1001);
    std::uniform_real_distribution<double> depth(0.3, 30.0), focalScale(0.5, 2.0), unit(0.0, 1.0);
    std::vector<CameraModel> cams;
    for (int i = 0; i < 50; ++i) cams.push_back(fixture::randomCamera(rng));
    std::vector<std::tuple<Vec2, int, DepthSample>> triples;
    for (int i = 0; i < 1000; ++i) {
        const int c = i % 50;
        const Vec2 px(unit(rng) * cams[c].width, unit(rng) * cams[c].height);
        triples.emplace_back(px, c, DepthSample{depth(rng), cams[c].f1 * focalScale(rng)});
    }
    double worst = 0.0;
    const auto start = Clock::now();
    for (const auto& [px, c, d] : triples) {
        const Vec3 world = cameraToWorld(unprojectPoint(px, cams[c], d), cams[c]);
        worst = std::max(worst, (project(world, cams[c]).pixel - px).norm());
    }
    const double t = seconds(start);
    return {worst < kRoundTripPx && t < kRoundTripSeconds, "max err " + fmt(worst) + " px, " + fmt(t) + " s"};
}

Outcome focalLinearity() {
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> depth(0.3, 30.0), k(0.1, 10.0), unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto cam = fixture::randomCamera(rng);
        const Vec2 px(unit(rng) * cam.width, unit(rng) * cam.height);
        const double d = depth(rng), s = k(rng);
        const Vec3 base = unprojectPoint(px, cam, {d, cam.f1});
        const Vec3 scaled = unprojectPoint(px, cam, {d, s * cam.f1});
        worst = std::max(worst, (scaled - s * base).norm() / (s * base).norm());
    }
    return {worst < kFocalScale, "max relative err " + fmt(worst)};
}

Outcome rigidRegistration() {
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    bool properRotations = true;
    for (int trial = 0; trial < 100; ++trial) {
        const Mat3 r = fixture::randomRotation(rng);
        const Vec3 t = fixture::randomVec(rng, -5, 5);
        Points3 src(50, 3), dst(50, 3);
        for (int i = 0; i < 50; ++i) {
            src.row(i) = fixture::randomVec(rng, -2, 2).transpose();
            dst.row(i) = (r * src.row(i).transpose() + t).transpose();
        }
        const auto est = estimateRigidTransform(src, dst);
        worst = std::max({worst, (est.rotation - r).cwiseAbs().maxCoeff(), (est.translation - t).cwiseAbs().maxCoeff()});
        properRotations = properRotations && est.rotation.determinant() > 0.0;
    }
    return {worst < kRegistration && properRotations,
            "max err " + fmt(worst) + (properRotations ? ", det +1" : ", reflection produced")};
}

Outcome speedAlignment() {
    const auto& a = fixture::mannequin();
    Points3 original = rootPositions(a, makeWalkingClip(a, {.frames = 120, .cycleFrames = 40}));
    original.col(1).setZero();
    Points3 drawn(400, 3);
    for (int i = 0; i < 400; ++i) {
        const double t = pi * i / 399;
        drawn.row(i) << 2.0 * (1 - std::cos(t)), 0.0, 2.0 * std::sin(t);
    }
    double worst = 0.0;
    bool ok = true;
    std::string detail;
    for (ArcNorm norm : {ArcNorm::L1, ArcNorm::L2}) {
        const auto arc = cumulativeArcLength(original, norm);
        const auto al = alignSpeed(drawn, arc, norm, true);
        const auto out = cumulativeArcLength(al.positions, norm);
        double w = 0.0;
        for (Eigen::Index i = 1; i < arc.size(); ++i) {
            w = std::max(w, std::abs((out(i) - out(i - 1)) - al.rescaleFactor * (arc(i) - arc(i - 1))));
        }
        ok = ok && !al.clamped && w < kPacing;
        worst = std::max(worst, w);
        detail += arcNormName(norm) + " " + fmt(w) + " m (factor " + fmt(al.rescaleFactor) + ") ";
    }
    return {ok, detail};
}

Outcome headings() {
    std::mt19937_64 rng(1005);
    std::normal_distribution<double> step(0.0, 0.05);
    Points3 p(500, 3);
    p.row(0).setZero();
    for (int i = 1; i < 500; ++i) {
        p.row(i) = p.row(i - 1) + Eigen::RowVector3d(step(rng), step(rng), step(rng));
        if (i % 23 == 0) p.row(i) = p.row(i - 1);
    }
    const auto h = deriveHeadings(p, 1, 1e-5);
    double worst = 0.0;
    for (int i = 1; i < 500; ++i) {
        const double dx = p(i, 0) - p(i - 1, 0), dz = p(i, 2) - p(i - 1, 2);
        const double len = std::hypot(dx, dz);
        if (len < 1e-5) continue;
        worst = std::max({worst, std::abs(std::cos(h.psi(i)) - dx / len), std::abs(std::sin(h.psi(i)) - dz / len)});
    }
    std::uniform_real_distribution<double> angle(-100.0, 100.0);
    double ortho = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Mat3 r = headingRotation(angle(rng));
        ortho = std::max({ortho, (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), std::abs(r.determinant() - 1.0)});
    }
    return {worst < kHeading && ortho < kOrthonormal, "direction err " + fmt(worst) + ", orthonormality err " + fmt(ortho)};
}

Outcome isometry() {
    const auto& a = fixture::mannequin();
    std::mt19937_64 rng(1006);
    const auto seq = makeWalkingClip(a, {.frames = 100, .cycleFrames = 40});
    std::uniform_real_distribution<double> yaw(-pi, pi);
    double worst = 0.0;
    for (int f = 0; f < 100; ++f) {
        auto pose = seq.frames[f];
        pose.globalOrientation = matrixToAxisAngle(fixture::randomRotation(rng));
        const Points3 v = skinVertices(a, pose);
        const Vec3 root = v.colwise().mean().transpose();
        const Points3 out = retargetVertices(v, orientationRemoval(axisAngleToMatrix(pose.globalOrientation), f % 2 == 0, a.canonicalForward),
                                             root, headingRotation(yaw(rng)), fixture::randomVec(rng, -5, 5));
        worst = std::max(worst, oracle::maxPairwiseDistanceChange(v, out));
    }
    return {worst < kIsometry, std::to_string(a.vertexCount()) + " vertices, max distance change " + fmt(worst)};
}

Outcome footGrounding() {
    const auto& a = fixture::mannequin();
    const int n = 120;
    const auto seq = makeWalkingClip(a, {.frames = n, .cycleFrames = 40});
    auto frames = skinSequence(a, seq);
    // Piecewise-constant float and penetration segments.
    std::mt19937_64 rng(1007);
    std::uniform_int_distribution<int> len(5, 12);
    std::bernoulli_distribution up(0.5);
    for (int f = 0; f < n;) {
        const double off = up(rng) ? 0.05 : -0.05;
        const int end = std::min(n, f + len(rng));
        for (; f < end; ++f) frames[f].col(1).array() += off;
    }
    const auto g = groundFeet(frames, a.footVertexIds, 5);
    double lo = 1e9, hi = -1e9;
    for (const auto& v : g.frames) {
        const double y = minHeight(v, a.footVertexIds);
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    const auto again = groundFeet(g.frames, a.footVertexIds, 5);
    const double drift = again.offsets.cwiseAbs().maxCoeff();
    return {lo >= kGroundLow && hi <= kGroundHigh && drift == 0.0,
            "foot y in [" + fmt(lo) + ", " + fmt(hi) + "] m, second pass max offset " + fmt(drift)};
}

Outcome handRecomposition() {
    const auto& a = fixture::mannequin();
    std::mt19937_64 rng(1008);
    double column = 0.0, row = 0.0;
    int merged = 0;
    for (int i = 0; i < 1000; ++i) {
        MotionSequence seq;
        FramePose pose = FramePose::zero(a);
        pose.globalOrientation = matrixToAxisAngle(fixture::randomRotation(rng));
        for (Eigen::Index j = 0; j < pose.bodyPose.rows(); ++j) {
            pose.bodyPose.row(j) = matrixToAxisAngle(fixture::randomRotation(rng)).transpose();
        }
        seq.frames.push_back(pose);
        const auto cam = fixture::randomCamera(rng);
        std::vector<FrameHands> hands(1);
        for (int s = 0; s < 2; ++s) {
            HandEstimate e;
            e.side = static_cast<HandSide>(s);
            e.orientation = fixture::randomRotation(rng);
            e.handPose = Points3::Zero(a.handJointsPerSide(), 3);
            e.confidence = 1.0;
            hands[0].sides[s] = e;
        }
        HandMergeStats stats;
        const auto out = mergeHands(seq, hands, a, {cam}, 0.5, &stats);
        merged += stats.merged;
        for (int s = 0; s < 2; ++s) {
            const Mat3 phi = hands[0].sides[s]->orientation;
            const Mat3 got = chainGlobalRotation(a, out.frames[0], a.wristJoints[s]);
            column = std::max(column, (got - cam.R_w2c.transpose() * phi).cwiseAbs().maxCoeff());
            // Row-vector form: transposed matrices, Φ_h · R_w2c⁻¹.
            const Mat3 phiRow = phi.transpose(), rRow = cam.R_w2c.transpose();
            row = std::max(row, (got.transpose() - phiRow * rRow.inverse()).cwiseAbs().maxCoeff());
        }
    }
    return {merged == 2000 && column < kHand && row < kHand,
            "column form " + fmt(column) + ", row form " + fmt(row) + ", " + std::to_string(merged) + " wrists merged"};
}

struct Mesh {
    Points3 vertices;
    Faces faces;
    Points3 colors;
};

Mesh randomMesh(std::mt19937_64& rng, const CameraModel& cam, int triangles) {
    std::uniform_real_distribution<double> px(-0.3 * cam.width, 1.3 * cam.width), d(1.0, 5.0), c(0.0, 1.0);
    std::bernoulli_distribution behind(0.1);
    Mesh m;
    m.vertices.resize(3 * triangles, 3);
    m.faces.resize(triangles, 3);
    m.colors.resize(3 * triangles, 3);
    for (int t = 0; t < triangles; ++t) {
        for (int k = 0; k < 3; ++k) {
            const int v = 3 * t + k;
            Vec3 p = unprojectPoint(Vec2(px(rng), px(rng)), cam, {d(rng), cam.f1});
            if (behind(rng)) p.z() = -p.z();
            m.vertices.row(v) = cameraToWorld(p, cam).transpose();
            m.colors.row(v) << c(rng), c(rng), c(rng);
            m.faces(t, k) = v;
        }
    }
    return m;
}

bool sameFiles(const fs::path& a, const fs::path& b) {
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        const auto other = b / fs::relative(e.path(), a);
        if (!fs::exists(other) || fixture::readText(e.path()) != fixture::readText(other)) return false;
    }
    return true;
}

Outcome rasterizerOracle() {
    std::mt19937_64 rng(1009);
    std::uniform_int_distribution<int> tris(1, 20);
    double worst = 0.0;
    int covered = 0, coverageMismatch = 0, rerunMismatch = 0;
    for (int trial = 0; trial < 200; ++trial) {
        CameraModel cam = fixture::axisCamera(16, 16, 14.0);
        cam.R_w2c = fixture::randomRotation(rng);
        cam.T_w2c = fixture::randomVec(rng, -1, 1);
        const Mesh m = randomMesh(rng, cam, tris(rng));
        const auto buf = rasterize(m.vertices, m.faces, m.colors, cam);
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
                const double ref = oracle::rayCastDepth(m.vertices, m.faces, cam, x, y);
                const double got = buf.depthAt(x, y);
                if (got > 0.0 && ref > 0.0) {
                    ++covered;
                    worst = std::max(worst, std::abs(got - ref));
                } else if ((got > 0.0) != (ref > 0.0)) {
                    ++coverageMismatch;
                }
            }
        }
        const auto first = encodeGuidanceFrame(rasterizeFrame(m.vertices, m.faces, m.colors, cam));
        const auto second = encodeGuidanceFrame(rasterizeFrame(m.vertices, m.faces, m.colors, cam));
        if (first != second) ++rerunMismatch;
    }

    // The same sequence rendered with 1 and 4 workers.
    CameraModel cam = fixture::axisCamera(16, 16, 14.0);
    const Mesh base = randomMesh(rng, cam, 20);
    RenderJob job;
    job.faces = base.faces;
    job.vertexColors = base.colors;
    job.handFaces = {0, 1, 2};
    job.cameras = {cam};
    job.width = 16;
    job.height = 16;
    std::normal_distribution<double> jitter(0.0, 0.05);
    for (int f = 0; f < 64; ++f) {
        Points3 v = base.vertices;
        for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i) += Eigen::RowVector3d(jitter(rng), jitter(rng), jitter(rng));
        job.frames.push_back(v);
    }
    fixture::TempDir dir("wm-accept-raster");
    job.threads = 1;
    const auto m1 = renderSequence(job, dir / "one");
    job.threads = 4;
    const auto m4 = renderSequence(job, dir / "four");
    const bool threadsAgree = m1 == m4 && sameFiles(dir / "one", dir / "four");

    return {worst < kRasterDepth && coverageMismatch == 0 && rerunMismatch == 0 && threadsAgree && covered > 0,
            std::to_string(covered) + " covered px, max depth err " + fmt(worst) + ", coverage mismatches " +
                std::to_string(coverageMismatch) + ", rerun mismatches " + std::to_string(rerunMismatch) +
                (threadsAgree ? ", 1 vs 4 threads identical" : ", 1 vs 4 threads differ")};
}

double maxJointStep(const FramePose& a, const FramePose& b) {
    double worst = rotationAngle(axisAngleToMatrix(a.globalOrientation).transpose() * axisAngleToMatrix(b.globalOrientation));
    for (Eigen::Index j = 0; j < a.bodyPose.rows(); ++j) {
        const Mat3 ra = axisAngleToMatrix(a.bodyPose.row(j).transpose());
        const Mat3 rb = axisAngleToMatrix(b.bodyPose.row(j).transpose());
        worst = std::max(worst, rotationAngle(ra.transpose() * rb));
    }
    return worst;
}

Outcome endToEnd() {
    const auto& a = fixture::mannequin();
    std::string detail;
    bool ok = true;

    // Full run at the default scene size: 120 frames, 512x512, quarter circle.
    const auto start = Clock::now();
    const auto scene = makeSyntheticScene(a, {});
    PipelineConfig config;
    const auto r = editMotion(scene.bundle, a, scene.keypoints, std::nullopt, config);
    fixture::TempDir dir("wm-accept-e2e");
    const auto manifest = renderMotion(a, r.sequence, scene.bundle.cameras, dir / "run1", config);
    const double elapsed = seconds(start);

    const Points3 root = rootPositions(a, r.sequence);
    double footprint = 0.0;
    for (const auto& k : scene.keypoints) {
        const auto p = oracle::projectPixel(Vec3(root(*k.frame, 0), 0.0, root(*k.frame, 2)), scene.bundle.camera());
        footprint = std::max(footprint, oracle::distanceToPolyline2(p, r.pixels));
    }
    ok = ok && footprint < kFootprintPx;
    detail += "footprint " + fmt(footprint) + " px";

    // Five map types per frame.
    int files = 0;
    for (const char* type : kMapTypes) {
        for (const auto& e : fs::directory_iterator(dir / "run1" / type)) files += e.is_regular_file() ? 1 : 0;
    }
    ok = ok && files == 5 * 120 && scene.bundle.frameCount() == 120;

    // Re-run hashes.
    const auto again = editMotion(scene.bundle, a, scene.keypoints, std::nullopt, config);
    const auto manifest2 = renderMotion(a, again.sequence, scene.bundle.cameras, dir / "run2", config);
    const bool identical = manifest == manifest2 && serializeMotion(r.sequence) == serializeMotion(again.sequence);
    ok = ok && identical && elapsed < kFullRunSeconds;
    detail += ", " + std::to_string(files) + " maps in " + fmt(elapsed) + " s (" + std::to_string(defaultThreadCount()) +
              " threads)" + (identical ? ", re-run identical" : ", re-run differs");

    // Three gait cycles looped with a blend of 4.
    const auto clip = makeWalkingClip(a, {.frames = 40, .cycleFrames = 40});
    const auto looped = loopClip(clip, 120, 4);
    double intra = 0.0, seam = 0.0;
    for (int i = 1; i < 40; ++i) intra = std::max(intra, maxJointStep(clip.frames[i - 1], clip.frames[i]));
    for (int s : {40, 80}) {
        for (int i = s - 4; i <= s + 4; ++i) seam = std::max(seam, maxJointStep(looped.frames[i - 1], looped.frames[i]));
    }
    ok = ok && seam <= intra + 1e-12;
    detail += ", seam step " + fmt(seam) + " rad vs intra-clip " + fmt(intra);
    return {ok, detail};
}

int runCli(const std::string& args) {
    const std::string cmd = std::string(WM_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cliDeterminism() {
    fixture::TempDir dir("wm-accept-cli");
    const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
    if (runCli("synth-scene --out " + q(dir / "scene") + " --frames 40 --cycle 40 --width 128 --height 128 --hands") != 0) {
        return {false, "synth-scene failed"};
    }
    for (const char* tag : {"a", "b"}) {
        const fs::path d = dir / tag;
        fs::create_directories(d);
        const int e = runCli("edit --bundle " + q(dir / "scene") + " --trajectory " + q(dir / "scene" / "trajectory.json") +
                             " --out " + q(d / "edited.motion.json"));
        const int r = runCli("render --sequence " + q(d / "edited.motion.json") + " --camera " +
                             q(dir / "scene" / "camera.json") + " --out " + q(d / "render") + " --width 128 --height 128");
        if (e != 0 || r != 0) return {false, "edit/render exit codes " + std::to_string(e) + "/" + std::to_string(r)};
    }
    const bool seq = fixture::readText(dir / "a" / "edited.motion.json") == fixture::readText(dir / "b" / "edited.motion.json");
    const bool man = fixture::readText(dir / "a" / "render" / "manifest.json") ==
                     fixture::readText(dir / "b" / "render" / "manifest.json");
    const bool maps = sameFiles(dir / "a" / "render", dir / "b" / "render");
    return {seq && man && maps, std::string("sequence ") + (seq ? "identical" : "differs") + ", manifest " +
                                    (man ? "identical" : "differs") + ", maps " + (maps ? "identical" : "differ")};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"unprojection round trip", unprojectionRoundTrip},
        {"focal calibration linearity", focalLinearity},
        {"rigid registration", rigidRegistration},
        {"speed alignment", speedAlignment},
        {"heading correctness", headings},
        {"retarget isometry", isometry},
        {"foot grounding", footGrounding},
        {"hand recomposition", handRecomposition},
        {"rasterizer oracle", rasterizerOracle},
        {"end-to-end synthetic scene", endToEnd},
        {"cli/report determinism", cliDeterminism},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS  " : "FAIL  ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
