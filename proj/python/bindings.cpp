#include "worldmotion/asset_io.hpp"
#include "worldmotion/mannequin.hpp"
#include "worldmotion/motion_bank.hpp"
#include "worldmotion/pipeline.hpp"
#include "worldmotion/renderer.hpp"
#include "worldmotion/rotation.hpp"
#include "worldmotion/synthetic_scene.hpp"
#include "worldmotion/trajectory.hpp"
#include "worldmotion/world_frame.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace wm;

namespace {

PipelineConfig configFrom(const std::vector<std::string>& overrides, const std::string& configPath) {
    PipelineConfig c = configPath.empty() ? PipelineConfig{} : loadConfig(configPath);
    for (const auto& o : overrides) c.setFromString(o);
    c.validate();
    return c;
}

py::array_t<std::uint8_t> imageArray(const Image8& img) {
    py::array_t<std::uint8_t> out({img.height, img.width, img.channels});
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "worldmotion core";

    static py::exception<Error> error(m, "Error");
    static py::exception<ValidationError> validation(m, "ValidationError", error.ptr());
    static py::exception<DegenerateError> degenerate(m, "DegenerateError", error.ptr());
    static py::exception<IoError> io(m, "IoError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation, e.what());
        } catch (const DegenerateError& e) {
            py::set_error(degenerate, e.what());
        } catch (const IoError& e) {
            py::set_error(io, e.what());
        }
    });

    py::class_<CameraModel>(m, "Camera")
        .def(py::init<>())
        .def_readwrite("K", &CameraModel::K)
        .def_readwrite("f1", &CameraModel::f1)
        .def_readwrite("R_w2c", &CameraModel::R_w2c)
        .def_readwrite("T_w2c", &CameraModel::T_w2c)
        .def_readwrite("width", &CameraModel::width)
        .def_readwrite("height", &CameraModel::height)
        .def("center", &CameraModel::center)
        .def("validate", &CameraModel::validate)
        .def("to_json", [](const CameraModel& c) { return cameraToJson(c).dump(); })
        .def_static("from_json", [](const std::string& s) { return cameraFromJson(nlohmann::json::parse(s)); });
    m.def("look_at_camera", &makeLookAtCamera, py::arg("center"), py::arg("target"), py::arg("width"), py::arg("height"),
          py::arg("focal"));
    m.def("load_cameras", &loadCameras);

    py::class_<BodyModelAsset>(m, "BodyModel")
        .def_property_readonly("vertex_count", &BodyModelAsset::vertexCount)
        .def_property_readonly("joint_count", &BodyModelAsset::jointCount)
        .def_property_readonly("template_vertices", [](const BodyModelAsset& a) { return a.templateVertices; })
        .def_property_readonly("faces", [](const BodyModelAsset& a) { return a.faces; })
        .def_property_readonly("foot_vertex_ids", [](const BodyModelAsset& a) { return a.footVertexIds; })
        .def_property_readonly("semantic_colors", [](const BodyModelAsset& a) { return a.semanticVertexColors; });
    m.def("mannequin", &makeMannequin);
    m.def("load_asset", &loadAsset);
    m.def("save_asset", [](const BodyModelAsset& a, const std::filesystem::path& p, bool json) {
        if (json) saveAssetJson(a, p);
        else saveAssetBinary(a, p);
    }, py::arg("asset"), py::arg("path"), py::arg("json") = false);

    py::class_<MotionSequence>(m, "Motion")
        .def_readwrite("fps", &MotionSequence::fps)
        .def_property_readonly("frame_count", &MotionSequence::frameCount)
        .def("to_json", [](const MotionSequence& s) { return serializeMotion(s); })
        .def_static("from_json", [](const std::string& s) { return motionFromJson(nlohmann::json::parse(s)); });
    m.def("load_motion", &loadMotion);
    m.def("save_motion", &saveMotion);
    m.def("walking_clip", [](const BodyModelAsset& a, int frames, int cycle, double speed, double yaw) {
        WalkOptions o;
        o.frames = frames;
        o.cycleFrames = cycle;
        o.speed = speed;
        o.headingYaw = yaw;
        return makeWalkingClip(a, o);
    }, py::arg("asset"), py::arg("frames") = 40, py::arg("cycle") = 40, py::arg("speed") = 1.2, py::arg("yaw") = 0.0);
    m.def("root_positions", &rootPositions);
    m.def("skin_sequence", &skinSequence, py::arg("asset"), py::arg("motion"), py::arg("threads") = 0);

    m.def("unproject", [](const Vec2& px, const CameraModel& cam, double depth, double f2) {
        return unprojectPoint(px, cam, {depth, f2 > 0 ? f2 : cam.f1});
    }, py::arg("pixel"), py::arg("camera"), py::arg("depth"), py::arg("f2") = 0.0);
    m.def("camera_to_world", &cameraToWorld);
    m.def("world_to_camera", &worldToCamera);
    m.def("project", [](const Vec3& p, const CameraModel& cam) {
        const auto r = project(p, cam);
        return py::make_tuple(r.pixel, r.depth, r.clipped);
    });

    m.def("register_points", [](const Points3& src, const Points3& dst, bool withScale) {
        const auto t = estimateRigidTransform(src, dst, withScale);
        return py::make_tuple(t.rotation, t.translation, t.scale, t.rmsResidual);
    }, py::arg("src"), py::arg("dst"), py::arg("with_scale") = false);

    m.def("arc_length", [](const Points3& p, const std::string& norm) {
        return cumulativeArcLength(p, parseArcNorm(norm));
    }, py::arg("points"), py::arg("norm") = "L1");
    m.def("align_speed", [](const Points3& path, const Eigen::VectorXd& arc, const std::string& norm, bool rescale) {
        const auto a = alignSpeed(path, arc, parseArcNorm(norm), rescale);
        return py::make_tuple(a.positions, a.rescaleFactor, a.clamped);
    }, py::arg("path"), py::arg("original_arc"), py::arg("norm") = "L1", py::arg("rescale") = true);
    m.def("headings", [](const Points3& p, int window, double eps) { return deriveHeadings(p, window, eps).psi; },
          py::arg("positions"), py::arg("window") = 9, py::arg("epsilon") = 1e-5);
    m.def("heading_rotation", &headingRotation);
    m.def("axis_angle_to_matrix", &axisAngleToMatrix);
    m.def("matrix_to_axis_angle", &matrixToAxisAngle);
    m.def("retarget_vertices", &retargetVertices, py::arg("vertices"), py::arg("removal"), py::arg("root"),
          py::arg("heading"), py::arg("new_root"));
    m.def("ground_feet", [](const std::vector<Points3>& frames, const std::vector<int>& feet, int window,
                            const std::string& mode) {
        const auto g = groundFeet(frames, feet, window, parseGroundingMode(mode));
        return py::make_tuple(g.frames, g.offsets);
    }, py::arg("frames"), py::arg("foot_vertex_ids"), py::arg("window") = 5, py::arg("mode") = "opening");

    m.def("render_frame", [](const Points3& v, const Faces& f, const Points3& colors, const CameraModel& cam,
                             const std::vector<int>& handFaces) {
        const auto g = rasterizeFrame(v, f, colors, cam, handFaces);
        py::dict d;
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> depth(g.depth.data(),
                                                                                                     g.height, g.width);
        d["depth"] = Eigen::MatrixXd(depth);
        d["normal"] = imageArray(g.normal);
        d["semantic"] = imageArray(g.semantic);
        d["hand"] = imageArray(g.hand);
        d["mask"] = imageArray(g.mask);
        return d;
    }, py::arg("vertices"), py::arg("faces"), py::arg("colors"), py::arg("camera"), py::arg("hand_faces") = std::vector<int>{});

    m.def("synth_scene", [](const std::filesystem::path& out, int frames, int cycle, int width, int height, bool depth,
                            bool hands) {
        SceneOptions o;
        o.frames = frames;
        o.cycleFrames = cycle;
        o.width = width;
        o.height = height;
        o.withDepth = depth;
        o.withHands = hands;
        o.focal = 500.0 * std::min(width, height) / 512.0;
        const auto asset = makeMannequin();
        auto scene = makeSyntheticScene(asset, o);
        writeSyntheticScene(scene, out);
        WalkOptions walk;
        walk.frames = cycle;
        walk.cycleFrames = cycle;
        saveMotion(makeWalkingClip(asset, walk), out / "walk_cycle.motion.json");
    }, py::arg("out"), py::arg("frames") = 120, py::arg("cycle") = 40, py::arg("width") = 512, py::arg("height") = 512,
       py::arg("depth") = false, py::arg("hands") = false);

    m.def("run_edit", [](const std::filesystem::path& bundle, const std::filesystem::path& trajectory,
                         const std::filesystem::path& out, const std::filesystem::path& asset,
                         const std::filesystem::path& bank, const std::string& clip, const std::string& config,
                         const std::vector<std::string>& overrides) {
        EditPaths p;
        p.bundle = bundle;
        p.trajectory = trajectory;
        p.asset = asset;
        p.bank = bank;
        p.clipId = clip;
        p.outSequence = out;
        p.outReport = out.string() + ".report.json";
        return runEdit(p, configFrom(overrides, config)).report.dump();
    }, py::arg("bundle"), py::arg("trajectory"), py::arg("out"), py::arg("asset") = std::filesystem::path(),
       py::arg("bank") = std::filesystem::path(), py::arg("clip") = "", py::arg("config") = "",
       py::arg("overrides") = std::vector<std::string>{});

    m.def("render_motion", [](const std::filesystem::path& sequence, const std::filesystem::path& camera,
                              const std::filesystem::path& out, const std::filesystem::path& asset, int width, int height,
                              const std::string& config, const std::vector<std::string>& overrides) {
        auto c = configFrom(overrides, config);
        if (width > 0) c.width = width;
        if (height > 0) c.height = height;
        return renderMotion(loadAssetOrDefault(asset), loadMotion(sequence), loadCameras(camera), out, c).dump();
    }, py::arg("sequence"), py::arg("camera"), py::arg("out"), py::arg("asset") = std::filesystem::path(),
       py::arg("width") = 0, py::arg("height") = 0, py::arg("config") = "",
       py::arg("overrides") = std::vector<std::string>{});

    m.def("bank_add", [](const std::filesystem::path& bank, const std::string& id, const std::filesystem::path& motion,
                         const std::vector<std::string>& tags, bool loopable, bool replace) {
        MotionClip c;
        c.id = id;
        c.tags = tags;
        c.loopable = loopable;
        c.sourceMeta = motion.string();
        c.sequence = loadMotion(motion);
        MotionBank::open(bank).add(c, replace);
    }, py::arg("bank"), py::arg("id"), py::arg("motion"), py::arg("tags") = std::vector<std::string>{},
       py::arg("loopable") = true, py::arg("replace") = false);
    m.def("bank_list", [](const std::filesystem::path& bank, const std::string& tag) {
        std::vector<std::string> ids;
        for (const auto& c : MotionBank(bank).list(tag)) ids.push_back(c.id);
        return ids;
    }, py::arg("bank"), py::arg("tag") = "");
    m.def("bank_get", [](const std::filesystem::path& bank, const std::string& id) { return MotionBank(bank).get(id).sequence; });
    m.def("loop_clip", &loopClip, py::arg("clip"), py::arg("frames"), py::arg("blend") = 4);
}
