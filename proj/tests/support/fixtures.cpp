#include "fixtures.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/mannequin.hpp"
#include "worldmotion/synthetic_scene.hpp"

#include <Eigen/Geometry>

#include <atomic>

namespace fixture {

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

const wm::BodyModelAsset& mannequin() {
    static const wm::BodyModelAsset asset = wm::makeMannequin();
    return asset;
}

wm::BodyModelAsset toyChain() {
    wm::BodyModelAsset a;
    a.jointRestPositions.resize(3, 3);
    a.jointRestPositions << 0, 0, 0, 0, 1, 0, 0, 2, 0;
    a.jointParents = {-1, 0, 1};
    a.templateVertices.resize(6, 3);
    a.templateVertices << -0.1, 0.2, 0, 0.1, 0.2, 0, 0, 0.8, 0.1,
                          -0.1, 1.2, 0, 0.1, 1.2, 0, 0, 1.8, 0.1;
    a.faces.resize(2, 3);
    a.faces << 0, 1, 2, 3, 4, 5;
    a.skinningWeights = Eigen::MatrixXd::Zero(6, 3);
    for (int v = 0; v < 3; ++v) a.skinningWeights(v, 0) = 1.0;
    for (int v = 3; v < 6; ++v) a.skinningWeights(v, 1) = 1.0;
    a.shapeDirections = Eigen::MatrixXd::Zero(18, 2);
    // Direction 0 stretches along y, direction 1 shifts along x.
    for (int v = 0; v < 6; ++v) {
        a.shapeDirections(3 * v + 1, 0) = 0.1 * a.templateVertices(v, 1);
        a.shapeDirections(3 * v + 0, 1) = 0.05;
    }
    a.semanticVertexColors = wm::Points3::Constant(6, 3, 0.5);
    a.bodyJoints = {1, 2};
    a.footVertexIds = {0, 1};
    return a;
}

wm::Mat3 randomRotation(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return q.toRotationMatrix();
}

wm::Vec3 randomUnit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    wm::Vec3 v(n(rng), n(rng), n(rng));
    while (v.norm() < 1e-6) v = wm::Vec3(n(rng), n(rng), n(rng));
    return v.normalized();
}

wm::Vec3 randomVec(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

wm::CameraModel randomCamera(std::mt19937_64& rng, int width, int height) {
    std::uniform_real_distribution<double> dist(3.0, 8.0), focal(300.0, 1200.0), jitter(-0.5, 0.5);
    const wm::Vec3 center = randomUnit(rng) * dist(rng);
    const wm::Vec3 target = randomVec(rng, -0.5, 0.5);
    auto cam = wm::makeLookAtCamera(center, target, width, height, focal(rng));
    cam.K(0, 2) += 10.0 * jitter(rng);
    cam.K(1, 2) += 10.0 * jitter(rng);
    cam.K(0, 1) = jitter(rng);
    cam.K(1, 1) *= 1.0 + 0.1 * jitter(rng);
    return cam;
}

wm::CameraModel axisCamera(int width, int height, double focal) {
    wm::CameraModel cam;
    cam.K << focal, 0, width / 2.0, 0, focal, height / 2.0, 0, 0, 1;
    cam.f1 = focal;
    cam.width = width;
    cam.height = height;
    return cam;
}

std::string readText(const std::filesystem::path& path) { return wm::readFileBytes(path); }

}  // namespace fixture
