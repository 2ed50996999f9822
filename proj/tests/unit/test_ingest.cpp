#include "doctest.h"
#include "fixtures.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/ingest.hpp"
#include "worldmotion/rotation.hpp"
#include "worldmotion/synthetic_scene.hpp"

using namespace wm;
namespace fs = std::filesystem;

namespace {

SyntheticScene smallScene(bool depth = true, bool hands = true) {
    SceneOptions o;
    o.frames = 12;
    o.cycleFrames = 12;
    o.width = 64;
    o.height = 64;
    o.focal = 60;
    o.withDepth = depth;
    o.withHands = hands;
    return makeSyntheticScene(fixture::mannequin(), o);
}

}  // namespace

TEST_CASE("bundle round trip") {
    fixture::TempDir dir;
    auto scene = smallScene();
    writeSyntheticScene(scene, dir / "scene");
    const auto b = parseBundle(dir / "scene");
    CHECK(b.frameCount() == 12);
    CHECK(serializeMotion(b.body) == serializeMotion(scene.bundle.body));
    REQUIRE(b.jointsWorld.has_value());
    REQUIRE(b.jointsCamera.has_value());
    for (int n = 0; n < 12; ++n) CHECK((*b.jointsWorld)[n] == (*scene.bundle.jointsWorld)[n]);
    REQUIRE(b.hands.has_value());
    CHECK(b.hands->size() == 12);
    CHECK(b.depthFiles.size() == 1);
    CHECK(b.camera().K == scene.bundle.camera().K);
    CHECK(b.manifest["version"] == 1);

    // Write again from the parsed copy into a new directory and compare.
    writeBundle(b, dir / "copy");
    const auto c = parseBundle(dir / "copy");
    CHECK(serializeMotion(c.body) == serializeMotion(b.body));
    CHECK(c.depthFiles == b.depthFiles);
    CHECK(fs::exists(dir / "copy" / c.depthFiles[0]));
    CHECK(c.manifest == b.manifest);
}

TEST_CASE("minimal bundle has absent optionals") {
    fixture::TempDir dir;
    SceneOptions o;
    o.frames = 5;
    o.withJoints = false;
    auto scene = makeSyntheticScene(fixture::mannequin(), o);
    writeSyntheticScene(scene, dir.path());
    const auto b = parseBundle(dir.path());
    CHECK_FALSE(b.jointsWorld.has_value());
    CHECK_FALSE(b.hands.has_value());
    CHECK(b.depthFiles.empty());
    CHECK_THROWS_AS(deriveCameraRegistration(b), ValidationError);
}

TEST_CASE("bundle errors name the offending file") {
    fixture::TempDir dir;
    auto scene = smallScene(false, true);
    writeSyntheticScene(scene, dir / "s");
    SUBCASE("hand count mismatch") {
        auto hands = *scene.bundle.hands;
        hands.pop_back();
        saveHands(hands, dir / "s" / "hands.json");
        CHECK_THROWS_WITH_AS(parseBundle(dir / "s"), doctest::Contains("hands.json has 11"), ValidationError);
    }
    SUBCASE("missing body track") {
        fs::remove(dir / "s" / "body.motion.json");
        CHECK_THROWS_WITH_AS(parseBundle(dir / "s"), doctest::Contains("body.motion.json"), ValidationError);
    }
    SUBCASE("missing version") {
        writeFileBytes(dir / "s" / "bundle.json", "{}");
        CHECK_THROWS_WITH_AS(parseBundle(dir / "s"), doctest::Contains("version"), ValidationError);
    }
    SUBCASE("non-finite joints") {
        auto joints = *scene.bundle.jointsWorld;
        joints[3](0, 0) = std::nan("");
        writeJointTrack(joints, dir / "s" / "joints_world.bin");
        CHECK_THROWS_WITH_AS(parseBundle(dir / "s"), doctest::Contains("joints_world.bin"), ValidationError);
    }
    SUBCASE("bad camera json") {
        writeFileBytes(dir / "s" / "camera.json", "{\"K\": [1]}");
        CHECK_THROWS_WITH_AS(parseBundle(dir / "s"), doctest::Contains("camera.json"), ValidationError);
    }
    SUBCASE("unknown manifest fields survive") {
        auto m = nlohmann::json::parse(fixture::readText(dir / "s" / "bundle.json"));
        m["estimator"] = {{"name", "x"}};
        writeFileBytes(dir / "s" / "bundle.json", m.dump());
        CHECK(parseBundle(dir / "s").manifest["estimator"]["name"] == "x");
    }
    CHECK_THROWS_AS(parseBundle(dir / "nope"), IoError);
}

TEST_CASE("camera registration from joint tracks") {
    std::mt19937_64 rng(51);
    auto scene = smallScene(false, false);
    const Mat3 r = fixture::randomRotation(rng);
    const Vec3 t = fixture::randomVec(rng, -3, 3);
    auto& cams = *scene.bundle.jointsCamera;
    for (std::size_t n = 0; n < cams.size(); ++n) {
        Points3 c = (*scene.bundle.jointsWorld)[n] * r.transpose();
        c.rowwise() += t.transpose();
        cams[n] = c;
    }
    const auto reg = deriveCameraRegistration(scene.bundle);
    CHECK((reg.camera.R_w2c - r).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((reg.camera.T_w2c - t).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(reg.transform.meanResidual < 1e-9);
    CHECK(reg.camera.K == scene.bundle.camera().K);

    for (std::size_t n = 0; n < cams.size(); ++n) cams[n] = (*scene.bundle.jointsWorld)[n];
    const auto id = deriveCameraRegistration(scene.bundle);
    CHECK(id.camera.R_w2c.isIdentity(1e-12));
    CHECK(id.camera.T_w2c.norm() < 1e-12);

    for (auto* track : {&*scene.bundle.jointsWorld, &*scene.bundle.jointsCamera}) {
        for (auto& f : *track) {
            for (Eigen::Index j = 0; j < f.rows(); ++j) f.row(j) = Eigen::RowVector3d(0.1 * j, 0.2 * j, 0.0);
        }
    }
    CHECK_THROWS_AS(deriveCameraRegistration(scene.bundle), DegenerateError);
}

TEST_CASE("depth maps: pfm and png with sidecars, bilinear sampling") {
    fixture::TempDir dir;
    DepthMap d;
    d.metres = ImageF(4, 3);
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 4; ++x) d.metres.data[y * 4 + x] = static_cast<float>(1.0 + x + 10.0 * y);
    }
    d.f2 = 321.0;
    saveDepthMap(d, dir / "d.pfm");
    const auto back = loadDepthMap(dir / "d.pfm");
    CHECK(back.metres.data == d.metres.data);
    CHECK(back.f2 == 321.0);
    // Pixel centres sample exactly; halfway between centres interpolates.
    CHECK(back.sample(Vec2(1.5, 0.5), 1.0).d == doctest::Approx(2.0));
    CHECK(back.sample(Vec2(2.0, 1.0), 1.0).d == doctest::Approx(0.25 * (2 + 3 + 12 + 13)));
    CHECK(back.sample(Vec2(0.5, 0.5), 1.0).f2 == 321.0);

    Image16 raw(2, 2);
    raw.data = {1000, 2000, 0, 4000};
    writePng(raw, dir / "p.png");
    writeFileBytes(dir / "p.json", R"({"scale_m_per_unit": 0.001, "f2": 500})");
    const auto png = loadDepthMap(dir / "p.png");
    CHECK(png.metres.data[1] == doctest::Approx(2.0));
    CHECK(png.f2 == 500.0);
    // Zero neighbours fall back to the nearest valid sample.
    CHECK(png.sample(Vec2(1.2, 0.9), 0).d == doctest::Approx(2.0));
    CHECK_THROWS_AS(png.sample(Vec2(0.5, 1.5), 0), DegenerateError);

    writePng(raw, dir / "nosidecar.png");
    CHECK_THROWS_AS(loadDepthMap(dir / "nosidecar.png"), ValidationError);
    writeFileBytes(dir / "d.txt", "x");
    CHECK_THROWS_AS(loadDepthMap(dir / "d.txt"), ValidationError);
}

TEST_CASE("joint track container") {
    fixture::TempDir dir;
    std::vector<Points3> j{Points3::Random(5, 3), Points3::Random(5, 3)};
    writeJointTrack(j, dir / "j.bin");
    const auto back = readJointTrack(dir / "j.bin");
    REQUIRE(back.size() == 2);
    CHECK(back[1] == j[1]);
    CHECK_THROWS_AS(writeJointTrack({Points3::Zero(2, 3), Points3::Zero(3, 3)}, dir / "bad.bin"), ValidationError);
}
