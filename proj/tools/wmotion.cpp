// wmotion: command line front end for the world-space motion editing pipeline.

#include "worldmotion/asset_io.hpp"
#include "worldmotion/binary_container.hpp"
#include "worldmotion/edit_service.hpp"
#include "worldmotion/mannequin.hpp"
#include "worldmotion/pipeline.hpp"
#include "worldmotion/synthetic_scene.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <iostream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitIo = 4;

wm::PipelineConfig resolveConfig(const std::string& file, const std::vector<std::string>& overrides, int threads) {
    wm::PipelineConfig c = file.empty() ? wm::PipelineConfig{} : wm::loadConfig(file);
    for (const auto& o : overrides) c.setFromString(o);
    if (threads >= 0) c.threads = threads;
    c.validate();
    return c;
}

void emit(bool json, const nlohmann::json& report, const std::string& text) {
    if (json) std::cout << report.dump(1) << "\n";
    else std::cout << text << "\n";
}

wm::EditService* activeService = nullptr;

void onSignal(int) {
    if (activeService) activeService->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"World-space human motion editing: trajectory re-editing, motion bank and guidance rendering"};
    app.require_subcommand(1);
    bool json = false;
    app.add_flag("--json", json, "Print machine-readable reports on stdout");

    std::string configFile;
    std::vector<std::string> overrides;
    int threads = -1;
    auto addCommon = [&](CLI::App* cmd) {
        cmd->add_option("--config", configFile, "TOML-style config file")->check(CLI::ExistingFile);
        cmd->add_option("--set", overrides, "Override a config key, e.g. trajectory.norm=L2");
        cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
    };

    // edit
    auto* edit = app.add_subcommand("edit", "Re-route a captured motion along a drawn trajectory");
    wm::EditPaths editPaths;
    std::string editBundle, editTraj, editAsset, editBank, editOut, editReport;
    edit->add_option("--bundle", editBundle, "Estimator bundle directory")->required();
    edit->add_option("--trajectory", editTraj, "Keypoint file")->required();
    edit->add_option("--asset", editAsset, "Body model asset (default: built-in mannequin)");
    edit->add_option("--bank", editBank, "Motion bank directory");
    edit->add_option("--clip", editPaths.clipId, "Substitute this bank clip for the captured action");
    edit->add_option("--out", editOut, "Edited motion file")->required();
    edit->add_option("--report", editReport, "Report file (default: <out>.report.json)");
    addCommon(edit);

    // render
    auto* render = app.add_subcommand("render", "Render guidance maps for a motion");
    std::string renderSeq, renderAsset, renderCamera, renderOut;
    int width = 0, height = 0;
    render->add_option("--sequence", renderSeq, "Motion file")->required();
    render->add_option("--asset", renderAsset, "Body model asset (default: built-in mannequin)");
    render->add_option("--camera", renderCamera, "Camera file (one camera or one per frame)")->required();
    render->add_option("--out", renderOut, "Output directory")->required();
    render->add_option("--width", width, "Image width (default from config)");
    render->add_option("--height", height, "Image height (default from config)");
    addCommon(render);

    // bank
    auto* bank = app.add_subcommand("bank", "Manage the motion bank");
    bank->require_subcommand(1);
    std::string bankDir;
    auto* bankAdd = bank->add_subcommand("add", "Store a clip");
    std::string addId, addMotion, addSource;
    std::vector<std::string> addTags;
    bool addNoLoop = false, addReplace = false;
    bankAdd->add_option("--bank", bankDir, "Bank directory")->required();
    bankAdd->add_option("--id", addId, "Clip id")->required();
    bankAdd->add_option("--motion", addMotion, "Motion file")->required();
    bankAdd->add_option("--tag", addTags, "Tag (repeatable)");
    bankAdd->add_option("--source", addSource, "Provenance note");
    bankAdd->add_flag("--no-loop", addNoLoop, "Mark the clip as not loopable");
    bankAdd->add_flag("--replace", addReplace, "Overwrite an existing clip");
    auto* bankList = bank->add_subcommand("list", "List clips");
    std::string listTag;
    bankList->add_option("--bank", bankDir, "Bank directory")->required();
    bankList->add_option("--tag", listTag, "Only clips with this tag");
    auto* bankLoop = bank->add_subcommand("loop", "Repeat a clip to a target length");
    std::string loopId, loopOut;
    int loopFrames = 0, loopBlend = -1;
    bankLoop->add_option("--bank", bankDir, "Bank directory")->required();
    bankLoop->add_option("--id", loopId, "Clip id")->required();
    bankLoop->add_option("--frames", loopFrames, "Target frame count")->required();
    bankLoop->add_option("--blend", loopBlend, "Seam blend window (default from config)");
    bankLoop->add_option("--out", loopOut, "Output motion file")->required();
    addCommon(bankLoop);

    // serve
    auto* serve = app.add_subcommand("serve", "Run the HTTP edit service");
    std::string host = "127.0.0.1", serveBank, serveAsset;
    int port = 8765;
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 = any free port)");
    serve->add_option("--bank", serveBank, "Motion bank directory");
    serve->add_option("--asset", serveAsset, "Body model asset (default: built-in mannequin)");
    addCommon(serve);

    // mannequin
    auto* mannequinCmd = app.add_subcommand("mannequin", "Write the built-in mannequin asset");
    std::string mannequinOut, mannequinFormat = "binary";
    mannequinCmd->add_option("--out", mannequinOut, "Output file")->required();
    mannequinCmd->add_option("--format", mannequinFormat, "binary or json")->check(CLI::IsMember({"binary", "json"}));

    // synth-scene
    auto* synth = app.add_subcommand("synth-scene", "Write a synthetic walking scene bundle");
    std::string synthOut;
    wm::SceneOptions sceneOptions;
    synth->add_option("--out", synthOut, "Bundle directory")->required();
    synth->add_option("--frames", sceneOptions.frames, "Frame count");
    synth->add_option("--cycle", sceneOptions.cycleFrames, "Frames per gait cycle");
    synth->add_option("--width", sceneOptions.width, "Image width");
    synth->add_option("--height", sceneOptions.height, "Image height");
    double synthFocal = 0.0;
    synth->add_option("--focal", synthFocal, "Focal length in pixels (default: 500 scaled to the image size)");
    synth->add_flag("--depth", sceneOptions.withDepth, "Include a ground depth map");
    synth->add_flag("--hands", sceneOptions.withHands, "Include hand estimates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (edit->parsed()) {
            const auto config = resolveConfig(configFile, overrides, threads);
            editPaths.bundle = editBundle;
            editPaths.trajectory = editTraj;
            editPaths.asset = editAsset;
            editPaths.bank = editBank;
            editPaths.outSequence = editOut;
            editPaths.outReport = editReport.empty() ? editOut + ".report.json" : editReport;
            const auto r = wm::runEdit(editPaths, config);
            const auto& t = r.report["trajectory"];
            emit(json, r.report,
                 "edited " + std::to_string(r.sequence.frameCount()) + " frames -> " + editOut +
                     " (rescale factor " + t["rescale_factor"].dump() + ", report " +
                     editPaths.outReport.string() + ")");
        } else if (render->parsed()) {
            auto config = resolveConfig(configFile, overrides, threads);
            if (width > 0) config.width = width;
            if (height > 0) config.height = height;
            const auto asset = wm::loadAssetOrDefault(renderAsset);
            const auto seq = wm::loadMotion(renderSeq);
            const auto cams = wm::loadCameras(renderCamera);
            const auto manifest = wm::renderMotion(asset, seq, cams, renderOut, config);
            emit(json, manifest,
                 "rendered " + std::to_string(seq.frameCount()) + " frames x 5 maps at " + std::to_string(config.width) +
                     "x" + std::to_string(config.height) + " -> " + renderOut);
        } else if (bankAdd->parsed()) {
            auto b = wm::MotionBank::open(bankDir);
            wm::MotionClip clip;
            clip.id = addId;
            clip.tags = addTags;
            clip.loopable = !addNoLoop;
            clip.sourceMeta = addSource.empty() ? addMotion : addSource;
            clip.sequence = wm::loadMotion(addMotion);
            b.add(clip, addReplace);
            emit(json, {{"added", addId}, {"frames", clip.sequence.frameCount()}},
                 "added clip " + addId + " (" + std::to_string(clip.sequence.frameCount()) + " frames)");
        } else if (bankList->parsed()) {
            const auto clips = wm::MotionBank(bankDir).list(listTag);
            nlohmann::json out = nlohmann::json::array();
            std::string text;
            for (const auto& c : clips) {
                out.push_back({{"id", c.id}, {"tags", c.tags}, {"frames", c.sequence.frameCount()},
                               {"fps", c.sequence.fps}, {"loopable", c.loopable}, {"source", c.sourceMeta}});
                std::string tags;
                for (const auto& t : c.tags) tags += (tags.empty() ? "" : ",") + t;
                text += c.id + "\t" + std::to_string(c.sequence.frameCount()) + " frames\t" + tags + "\n";
            }
            if (json) std::cout << out.dump(1) << "\n";
            else std::cout << text;
        } else if (bankLoop->parsed()) {
            const auto config = resolveConfig(configFile, overrides, threads);
            const int blend = loopBlend >= 0 ? loopBlend : config.blendWindow;
            const auto clip = wm::MotionBank(bankDir).get(loopId);
            const auto looped = wm::loopClip(clip.sequence, loopFrames, blend);
            wm::saveMotion(looped, loopOut);
            emit(json, {{"clip", loopId}, {"frames", looped.frameCount()}, {"blend_window", blend}},
                 "looped " + loopId + " to " + std::to_string(looped.frameCount()) + " frames -> " + loopOut);
        } else if (serve->parsed()) {
            wm::ServiceOptions so;
            so.config = resolveConfig(configFile, overrides, threads);
            so.bank = serveBank;
            so.asset = serveAsset;
            wm::EditService service(so);
            activeService = &service;
            std::signal(SIGINT, onSignal);
            std::signal(SIGTERM, onSignal);
            service.serve(host, port, [&](int bound) {
                std::cout << "listening on http://" << host << ":" << bound << std::endl;
            });
            activeService = nullptr;
        } else if (mannequinCmd->parsed()) {
            const auto asset = wm::makeMannequin();
            if (mannequinFormat == "json") wm::saveAssetJson(asset, mannequinOut);
            else wm::saveAssetBinary(asset, mannequinOut);
            emit(json, {{"vertices", asset.vertexCount()}, {"joints", asset.jointCount()}, {"faces", asset.faces.rows()}},
                 "wrote mannequin (" + std::to_string(asset.vertexCount()) + " vertices, " +
                     std::to_string(asset.jointCount()) + " joints) -> " + mannequinOut);
        } else if (synth->parsed()) {
            const auto asset = wm::makeMannequin();
            sceneOptions.focal = synthFocal > 0.0 ? synthFocal
                                                  : 500.0 * std::min(sceneOptions.width, sceneOptions.height) / 512.0;
            auto scene = wm::makeSyntheticScene(asset, sceneOptions);
            wm::writeSyntheticScene(scene, synthOut);
            wm::WalkOptions walk;
            walk.frames = sceneOptions.cycleFrames;
            walk.cycleFrames = sceneOptions.cycleFrames;
            wm::saveMotion(wm::makeWalkingClip(asset, walk), std::filesystem::path(synthOut) / "walk_cycle.motion.json");
            emit(json, {{"bundle", synthOut}, {"frames", sceneOptions.frames}},
                 "wrote synthetic scene -> " + synthOut + " (trajectory.json, walk_cycle.motion.json)");
        }
    } catch (const wm::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case wm::ErrorKind::Validation: return kExitValidation;
            case wm::ErrorKind::Degenerate: return kExitDegenerate;
            case wm::ErrorKind::Io: return kExitIo;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return 0;
}
