#include "commands.hpp"

#include <splatedit/errors.hpp>
#include <splatedit/image_io.hpp>
#include <splatedit/json_io.hpp>
#include <splatedit/pipeline.hpp>
#include <splatedit/ply.hpp>
#include <splatedit/protocol.hpp>
#include <splatedit/rasterizer.hpp>
#include <splatedit/synthetic.hpp>

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

namespace splatedit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path bundle_dir(const PipelineConfig& c) { return c.output_dir / "bundles"; }
fs::path inpaint_dir(const PipelineConfig& c) { return c.output_dir / "inpainted"; }

void require_file(const fs::path& p, const char* what) {
    if (p.empty()) throw ParameterError(std::string("config: no ") + what + " given");
    if (!fs::is_regular_file(p)) throw ParameterError(std::string(what) + " not found: " + p.string());
}

std::string view_name(TrajectorySide side, std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%02zu", i);
    return std::string(to_string(side)) + buf;
}

Image read_image(const fs::path& p) { return p.extension() == ".pfm" ? read_pfm(p) : read_png(p); }

struct EditedView {
    std::string name;
    SupervisionView view;
    Mask mask;
};

std::vector<EditedView> load_edited_views(const PipelineConfig& c) {
    const fs::path index_path = inpaint_dir(c) / "index.json";
    if (!fs::is_regular_file(index_path)) throw ParameterError("no inpainted views found; run `inpaint` first");
    const json index = load_json(index_path);
    std::vector<EditedView> views;
    for (const auto& v : index.at("views")) {
        EditedView e;
        e.name = v.at("name").get<std::string>();
        e.view.camera = camera_from_json(v.at("camera"));
        e.view.target = read_pfm(inpaint_dir(c) / v.at("image").get<std::string>());
        e.mask = read_png(inpaint_dir(c) / v.at("mask").get<std::string>());
        views.push_back(std::move(e));
    }
    if (views.empty()) throw ParameterError("inpainted index lists no views");
    return views;
}

std::vector<SupervisionView> load_training_views(const PipelineConfig& c, const GaussianScene& original,
                                                 const OrientedBBox& bbox) {
    std::vector<SupervisionView> views;
    if (c.cameras.empty()) return views;
    require_file(c.cameras, "camera set");
    for (const auto& entry : load_camera_set(c.cameras)) {
        SupervisionView v;
        v.camera = entry.camera;
        v.target = entry.image ? read_image(*entry.image) : render_fast(original, entry.camera, c.train.background).color;
        if (v.target.channels() != 3 || !v.target.same_size(Image(v.camera.width(), v.camera.height(), 1))) {
            throw ParameterError("training image for '" + entry.name + "' does not match its camera");
        }
        v.mask = project_bbox_mask(bbox, entry.camera, c.mask_mode);
        views.push_back(std::move(v));
    }
    return views;
}

}  // namespace

void cmd_sample_pointcloud(const fs::path& scene, const fs::path& out_json, std::size_t max_points) {
    require_file(scene, "scene PLY");
    if (max_points < 1) throw ParameterError("max_points must be at least 1");
    save_json(point_cloud_to_json(sample_point_cloud(load_ply(scene), max_points)), out_json);
}

std::size_t cmd_extract(const PipelineConfig& c) {
    require_file(c.scene, "scene PLY");
    require_file(c.bbox, "bbox JSON");
    const GaussianScene original = load_ply(c.scene);
    const OrientedBBox bbox = load_bbox(c.bbox);
    const GaussianScene coarse = seed_coarse_prior(bbox, c.coarse_gaussians, c.seed, original.sh_degree());
    const fs::path dir = bundle_dir(c);
    fs::create_directories(dir);

    json arcs = json::array();
    std::size_t written = 0;
    for (TrajectorySide side : c.sides) {
        TrajectorySpec spec = c.trajectory;
        spec.side = side;
        const auto cameras = make_trajectory(bbox, spec, c.intrinsics());
        const auto bundles = extract_view_bundles(original, coarse, bbox, cameras, c.train.background, c.mask_mode);
        json names = json::array();
        for (std::size_t i = 0; i < bundles.size(); ++i) {
            const std::string name = view_name(side, i);
            save_bundle(bundles[i], dir, name);
            names.push_back(name);
            ++written;
        }
        arcs.push_back({{"side", to_string(side)},
                        {"conditioning_view_index", central_index(bundles.size())},
                        {"views", names}});
    }
    save_ply(coarse, dir / "coarse.ply");
    save_json({{"config_hash", c.hash()}, {"bbox", bbox_to_json(bbox)}, {"arcs", arcs}}, dir / "index.json");
    return written;
}

void cmd_inpaint(const PipelineConfig& c, const RetryPolicy& policy) {
    const fs::path index_path = bundle_dir(c) / "index.json";
    if (!fs::is_regular_file(index_path)) throw ParameterError("no view bundles found; run `extract` first");
    const json index = load_json(index_path);
    const OrientedBBox bbox = bbox_from_json(index.at("bbox"));
    std::optional<GaussianScene> original;
    if (c.endpoint == "mock") {
        require_file(c.scene, "scene PLY");
        original = load_ply(c.scene);
    }
    auto endpoint = make_endpoint(c.endpoint, bbox, std::move(original), policy);

    const fs::path dir = inpaint_dir(c);
    fs::create_directories(dir);
    json views = json::array();
    for (const auto& arc : index.at("arcs")) {
        InpaintRequest request;
        std::vector<std::string> names;
        for (const auto& n : arc.at("views")) {
            names.push_back(n.get<std::string>());
            request.bundles.push_back(load_bundle(bundle_dir(c) / (names.back() + ".json")));
        }
        request.prompt = c.prompt;
        request.seed = c.seed;
        request.conditioning_view_index = arc.at("conditioning_view_index").get<std::size_t>();
        const InpaintResponse response = inpaint(request, *endpoint);
        for (std::size_t i = 0; i < names.size(); ++i) {
            write_pfm(response.images[i], dir / (names[i] + ".pfm"));
            write_png(response.images[i], PngKind::rgb8, dir / (names[i] + ".png"));
            views.push_back({{"name", names[i]},
                             {"camera", camera_to_json(request.bundles[i].camera)},
                             {"image", names[i] + ".pfm"},
                             {"mask", "../bundles/" + names[i] + "_mask.png"}});
        }
        const std::string side = arc.at("side").get<std::string>();
        write_png(conditioning_image(request.bundles, response.images), PngKind::rgb8,
                  dir / ("conditioning_" + side + ".png"));
    }
    if (auto* mock = dynamic_cast<MockInpainter*>(endpoint.get())) save_ply(mock->hidden_object(), dir / "mock_object.ply");
    save_json({{"config_hash", c.hash()}, {"endpoint", c.endpoint}, {"prompt", c.prompt}, {"seed", c.seed},
               {"views", views}},
              dir / "index.json");
}

void cmd_reconstruct(const PipelineConfig& c, const std::optional<fs::path>& resume, std::ostream* progress) {
    require_file(c.scene, "scene PLY");
    require_file(c.bbox, "bbox JSON");
    const GaussianScene original = load_ply(c.scene);
    const OrientedBBox bbox = load_bbox(c.bbox);
    const fs::path coarse_path = bundle_dir(c) / "coarse.ply";
    require_file(coarse_path, "coarse prior (run `extract` first)");

    SupervisionSet supervision;
    for (auto& e : load_edited_views(c)) supervision.edited_views.push_back(std::move(e.view));
    if (c.mask_aware) supervision.training_views = load_training_views(c, original, bbox);

    GaussianScene initial = original;
    initial.append(load_ply(coarse_path));

    fs::create_directories(c.output_dir);
    std::ofstream log(c.output_dir / "train_log.jsonl", resume ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot write training log in " + c.output_dir.string());
    TrainHooks hooks;
    hooks.log_interval = c.log_interval;
    hooks.on_log = [&](const LogEntry& e) {
        const std::string line = log_entry_to_json(e).dump();
        log << line << '\n';
        if (progress) *progress << line << '\n';
    };
    hooks.checkpoint_dir = c.output_dir / "checkpoints";
    hooks.checkpoint_interval = c.checkpoint_interval;

    GaussianScene edited;
    if (resume) {
        Trainer trainer = Trainer::resume(*resume, std::move(supervision), c.train);
        trainer.run(hooks);
        edited = trainer.scene();
    } else if (c.train.iterations == 0) {
        supervision.validate();
        edited = initial;
    } else {
        Trainer trainer(std::move(initial), std::move(supervision), c.train);
        trainer.run(hooks);
        edited = trainer.scene();
    }
    save_ply(edited, c.output_dir / "edited.ply");
    save_json({{"config_hash", c.hash()}, {"iterations", c.train.iterations}, {"count", edited.size()}},
              c.output_dir / "edited.json");
}

void cmd_evaluate(const PipelineConfig& c, std::ostream& out) {
    require_file(c.scene, "scene PLY");
    require_file(c.bbox, "bbox JSON");
    const fs::path edited_path = c.output_dir / "edited.ply";
    require_file(edited_path, "edited scene (run `reconstruct` first)");
    const GaussianScene original = load_ply(c.scene);
    const GaussianScene edited = load_ply(edited_path);
    const OrientedBBox bbox = load_bbox(c.bbox);
    const std::string scene_id = c.scene.stem().string();

    const auto views = load_edited_views(c);
    std::vector<SupervisionView> targets;
    std::vector<Mask> masks;
    for (const auto& v : views) {
        targets.push_back(v.view);
        masks.push_back(v.mask);
    }
    EvalReport consistency = consistency_eval(edited, targets, c.train.background, c.eval_region, masks);
    consistency.scene_id = scene_id;
    consistency.config_hash = c.hash();
    save_json(report_to_json(consistency), c.output_dir / "report_consistency.json");
    write_text(c.output_dir / "report_consistency.csv", report_to_csv(consistency));
    out << "consistency (" << to_string(c.eval_region) << "): PSNR " << consistency.mean_psnr << " dB, SSIM "
        << consistency.mean_ssim << "\n";

    if (!c.cameras.empty()) {
        const auto training = load_training_views(c, original, bbox);
        std::vector<Camera> cams;
        std::vector<Mask> train_masks;
        for (const auto& v : training) {
            cams.push_back(v.camera);
            train_masks.push_back(v.mask);
        }
        EvalReport background = background_fidelity_eval(original, edited, cams, train_masks, c.train.background);
        background.scene_id = scene_id;
        background.config_hash = c.hash();
        save_json(report_to_json(background), c.output_dir / "report_background.json");
        write_text(c.output_dir / "report_background.csv", report_to_csv(background));
        out << "background fidelity (unmasked): PSNR " << background.mean_psnr << " dB, SSIM "
            << background.mean_ssim << "\n";
    }

    std::vector<std::vector<Image>> rows;
    const std::size_t step = std::max<std::size_t>(1, views.size() / 6);
    for (std::size_t i = 0; i < views.size(); i += step) {
        const Image rendered = render_fast(edited, views[i].view.camera, c.train.background).color;
        rows.push_back({views[i].view.target, rendered, difference_image(rendered, views[i].view.target)});
    }
    write_png(contact_sheet(rows), PngKind::rgb8, c.output_dir / "contact_sheet.png");
}

void cmd_make_demo(const fs::path& dir, int image_size, std::uint64_t seed) {
    const SyntheticRoom room = make_synthetic_room(image_size, seed);
    fs::create_directories(dir / "images");
    save_ply(room.scene, dir / "scene.ply");
    save_bbox(room.bbox, dir / "bbox.json");
    std::vector<CameraEntry> cameras;
    for (std::size_t i = 0; i < room.training_cameras.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "train_%02zu", i);
        const std::string image = std::string("images/") + name + ".pfm";
        write_pfm(render_fast(room.scene, room.training_cameras[i], Vec3d::Zero()).color, dir / image);
        cameras.push_back({room.training_cameras[i], name, image});
    }
    save_camera_set(cameras, dir / "cameras.json");

    PipelineConfig c;
    c.width = c.height = image_size;
    c.train.iterations = 3000;
    c.train.position_lr_max_steps = 3000;
    c.train.densify_until = 1500;
    c.train.opacity_reset_interval = 0;
    c.train.scene_extent = 3.0;
    json j = config_to_json(c);
    j["scene"] = "scene.ply";
    j["bbox"] = "bbox.json";
    j["cameras"] = "cameras.json";
    j["output_dir"] = "out";
    save_json(j, dir / "config.json");
}

namespace {

struct Flags {
    std::string config;
    std::string scene, bbox, cameras, out;
    std::string endpoint, prompt;
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations, n_views;
    std::optional<double> arc;
    std::vector<std::string> sets;
};

void add_pipeline_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("-c,--config", f.config, "Pipeline config JSON");
    cmd->add_option("--scene", f.scene, "Original scene PLY");
    cmd->add_option("--bbox", f.bbox, "Editing box JSON");
    cmd->add_option("--cameras", f.cameras, "Training camera set JSON");
    cmd->add_option("-o,--out", f.out, "Output directory");
    cmd->add_option("--endpoint", f.endpoint, "\"mock\" or inpainting service URL");
    cmd->add_option("--prompt", f.prompt, "Text prompt");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--iterations", f.iterations, "Finetuning iterations (default 30000)");
    cmd->add_option("--n-views", f.n_views, "Views per trajectory arc (default 14)");
    cmd->add_option("--arc", f.arc, "Arc length in degrees (default 120)");
    cmd->add_option("--set", f.sets, "Override a config key, e.g. train.lambda_ssim=0.3");
}

PipelineConfig resolve(const Flags& f) {
    json j = json::object();
    fs::path base = fs::current_path();
    if (!f.config.empty()) {
        if (!fs::is_regular_file(f.config)) throw ParameterError("config file not found: " + f.config);
        j = load_json(f.config);
        base = fs::absolute(f.config).parent_path();
    }
    for (const auto& s : f.sets) apply_override(j, s);
    auto abs = [](const std::string& p) { return fs::absolute(p).generic_string(); };
    if (!f.scene.empty()) j["scene"] = abs(f.scene);
    if (!f.bbox.empty()) j["bbox"] = abs(f.bbox);
    if (!f.cameras.empty()) j["cameras"] = abs(f.cameras);
    if (!f.out.empty()) j["output_dir"] = abs(f.out);
    if (!f.endpoint.empty()) j["endpoint"] = f.endpoint;
    if (!f.prompt.empty()) j["prompt"] = f.prompt;
    if (f.seed) j["seed"] = *f.seed;
    if (f.iterations) j["train"]["iterations"] = *f.iterations;
    if (f.n_views) j["trajectory"]["n_views"] = *f.n_views;
    if (f.arc) j["trajectory"]["arc_degrees"] = *f.arc;
    return config_from_json(j, base);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Generative object insertion for Gaussian splatting scenes", "splatedit"};
    app.require_subcommand(1);

    std::string pc_scene, pc_out;
    std::size_t max_points = 100000;
    auto* pc = app.add_subcommand("sample-pointcloud", "Export Gaussian centers as a point cloud for box placement");
    pc->add_option("--scene", pc_scene, "Scene PLY")->required();
    pc->add_option("-o,--out", pc_out, "Output JSON")->required();
    pc->add_option("--max-points", max_points, "Maximum number of points")->capture_default_str();

    Flags flags;
    auto* extract = app.add_subcommand("extract", "Render view bundles (background, mask, depth) along the trajectory");
    auto* inpaint_cmd = app.add_subcommand("inpaint", "Send view bundles to the inpainting endpoint");
    auto* reconstruct = app.add_subcommand("reconstruct", "Finetune the scene on inpainted and original views");
    auto* evaluate = app.add_subcommand("evaluate", "Write consistency and background fidelity reports");
    auto* run_all = app.add_subcommand("run-all", "extract, inpaint, reconstruct and evaluate");
    for (auto* cmd : {extract, inpaint_cmd, reconstruct, evaluate, run_all}) add_pipeline_flags(cmd, flags);
    std::string resume;
    reconstruct->add_option("--resume", resume, "Checkpoint stem to resume from");
    bool verbose = false;
    for (auto* cmd : {reconstruct, run_all}) cmd->add_flag("-v,--verbose", verbose, "Print training log lines");

    std::string demo_dir;
    int demo_size = 128;
    std::uint64_t demo_seed = 0;
    auto* demo = app.add_subcommand("make-demo", "Write a synthetic room scene with a ready-to-run config");
    demo->add_option("-o,--out", demo_dir, "Output directory")->required();
    demo->add_option("--size", demo_size, "Image size in pixels")->capture_default_str();
    demo->add_option("--seed", demo_seed, "Scene seed")->capture_default_str();

    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    auto* serve = app.add_subcommand("serve-mock", "Serve the mock inpainter over the HTTP protocol");
    add_pipeline_flags(serve, flags);
    serve->add_option("--host", serve_host)->capture_default_str();
    serve->add_option("--port", serve_port)->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (pc->parsed()) {
            cmd_sample_pointcloud(pc_scene, pc_out, max_points);
        } else if (demo->parsed()) {
            cmd_make_demo(demo_dir, demo_size, demo_seed);
            out << "wrote demo inputs to " << demo_dir << "\n";
        } else if (serve->parsed()) {
            const PipelineConfig c = resolve(flags);
            require_file(c.bbox, "bbox JSON");
            std::optional<GaussianScene> original;
            if (!c.scene.empty()) original = load_ply(c.scene);
            MockInpainter mock(load_bbox(c.bbox), std::move(original), c.train.background);
            InpaintServer server([&](const InpaintRequest& r) { return mock.submit(r); });
            out << "serving mock inpainter on http://" << serve_host << ":" << serve_port << std::endl;
            server.listen(serve_host, serve_port);
        } else {
            const PipelineConfig c = resolve(flags);
            std::ostream* progress = verbose ? &out : nullptr;
            if (extract->parsed() || run_all->parsed()) {
                out << "extract: wrote " << cmd_extract(c) << " view bundles\n";
            }
            if (inpaint_cmd->parsed() || run_all->parsed()) {
                cmd_inpaint(c);
                out << "inpaint: done (" << c.endpoint << ")\n";
            }
            if (reconstruct->parsed() || run_all->parsed()) {
                cmd_reconstruct(c, resume.empty() ? std::nullopt : std::optional<fs::path>(resume), progress);
                out << "reconstruct: wrote " << (c.output_dir / "edited.ply").string() << "\n";
            }
            if (evaluate->parsed() || run_all->parsed()) cmd_evaluate(c, out);
        }
    } catch (const TrainingError& e) {
        err << "splatedit: training diverged: " << e.what();
        if (e.checkpoint_path()) err << " (checkpoint " << e.checkpoint_path()->string() << ")";
        err << "\n";
        return kExitDivergence;
    } catch (const TransportError& e) {
        err << "splatedit: transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const ProtocolError& e) {
        err << "splatedit: protocol error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const EmptyRegionError& e) {
        err << "splatedit: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "splatedit: error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        err << "splatedit: error: malformed JSON input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "splatedit: error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "splatedit: unexpected error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

}  // namespace splatedit::cli
