#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "bboxlab/annotations.hpp"
#include "bboxlab/detection_eval.hpp"
#include "bboxlab/edm.hpp"
#include "bboxlab/hashing.hpp"
#include "bboxlab/masks.hpp"
#include "bboxlab/motion_tokens.hpp"
#include "bboxlab/png_io.hpp"
#include "bboxlab/renderer.hpp"
#include "bboxlab/video_metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bboxlab::cli {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << content;
}

std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%02d.png", index);
    return buf;
}

// Runs fn(i) for i in [0, n); results are indexed so ordering never depends
// on the degree of parallelism.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int count = std::min(jobs, n);
    threads.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

std::vector<std::string> list_pngs(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            files.push_back(entry.path().string());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<Rgb8Frame> read_frame_dir(const std::string& dir) {
    std::vector<Rgb8Frame> frames;
    for (const auto& path : list_pngs(dir)) frames.push_back(read_png(path));
    if (frames.empty()) throw IoError("no PNG frames in: " + dir);
    return frames;
}

// Clip pairs for the directory-based metric commands: matching subdirectory
// names, or the two directories themselves when they hold PNGs directly.
struct ClipPair {
    std::string clip_id;
    std::string pred_dir;
    std::string gt_dir;
};

std::vector<ClipPair> pair_clip_dirs(const std::string& pred_dir,
                                     const std::string& gt_dir) {
    if (!fs::is_directory(pred_dir)) throw IoError("not a directory: " + pred_dir);
    if (!fs::is_directory(gt_dir)) throw IoError("not a directory: " + gt_dir);

    std::vector<std::string> gt_subdirs;
    for (const auto& entry : fs::directory_iterator(gt_dir)) {
        if (entry.is_directory()) gt_subdirs.push_back(entry.path().filename().string());
    }
    std::sort(gt_subdirs.begin(), gt_subdirs.end());

    std::vector<ClipPair> pairs;
    if (gt_subdirs.empty()) {
        const std::string name = fs::path(gt_dir).filename().string();
        pairs.push_back(ClipPair{name.empty() ? "clip" : name, pred_dir, gt_dir});
        return pairs;
    }
    for (const auto& name : gt_subdirs) {
        const fs::path pred_sub = fs::path(pred_dir) / name;
        if (!fs::is_directory(pred_sub)) {
            throw IoError("prediction clip missing: " + pred_sub.string());
        }
        pairs.push_back(ClipPair{name, pred_sub.string(), (fs::path(gt_dir) / name).string()});
    }
    return pairs;
}

std::string fmt(double v, int decimals = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

// Sample standard deviation (ddof = 1); 0 for a single value.
MeanStd mean_std(const std::vector<double>& values) {
    MeanStd out;
    if (values.empty()) return out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(acc / static_cast<double>(values.size() - 1));
    }
    return out;
}

RenderConfig render_config_from(const RenderOptions& opt) {
    RenderConfig config;
    config.seed = opt.seed;
    config.fill_alpha = opt.fill_alpha;
    config.outline_width = opt.outline_width;
    config.x_mark_width = opt.x_mark_width;
    config.traj_outer_diameter = opt.traj_outer_diameter;
    config.traj_inner_diameter = opt.traj_inner_diameter;
    if (config.fill_alpha < 0.0 || config.fill_alpha > 1.0) {
        throw ValidationError("fill alpha must be in [0,1]");
    }
    return config;
}

json render_config_echo(const RenderOptions& opt, const ClipAnnotation& clip) {
    return json{{"mode", opt.mode},
                {"seed", opt.seed},
                {"fill_alpha", opt.fill_alpha},
                {"outline_width", opt.outline_width},
                {"x_mark_width", opt.x_mark_width},
                {"traj_outer_diameter", opt.traj_outer_diameter},
                {"traj_inner_diameter", opt.traj_inner_diameter},
                {"width", clip.width},
                {"height", clip.height},
                {"fps", clip.fps},
                {"frames", clip.frame_count()}};
}

// Scales first/second projection rows when the annotation geometry changes.
CameraCalib rescale_calib(const CameraCalib& calib, double sx, double sy) {
    CameraCalib out = calib;
    for (int col = 0; col < 4; ++col) {
        out.projection[static_cast<std::size_t>(col)] *= sx;
        out.projection[static_cast<std::size_t>(4 + col)] *= sy;
    }
    return out;
}

struct LoadedClip {
    ClipAnnotation clip;
    std::optional<CameraCalib> calib;
};

LoadedClip load_clip(const RenderOptions& opt) {
    LoadedClip loaded;
    if (!opt.input_jsonl.empty() && !opt.kitti_labels.empty()) {
        throw ValidationError("pass either --input or --kitti, not both");
    }
    if (!opt.input_jsonl.empty()) {
        loaded.clip = parse_generic_jsonl(read_file(opt.input_jsonl));
        if (!opt.calib_file.empty()) {
            loaded.calib = parse_kitti_calib(read_file(opt.calib_file), opt.calib_matrix);
        }
    } else if (!opt.kitti_labels.empty()) {
        AnnotationStream stream = parse_kitti_tracking(
            read_file(opt.kitti_labels),
            opt.calib_file.empty() ? "" : read_file(opt.calib_file));
        if (opt.source_width > 0) stream.width = opt.source_width;
        if (opt.source_height > 0) stream.height = opt.source_height;
        loaded.calib = stream.calib;
        loaded.clip = window_clip(stream, opt.window_start, opt.frames);
    } else {
        throw ValidationError("an input is required (--input or --kitti)");
    }

    if (opt.width > 0 && opt.height > 0 &&
        (opt.width != loaded.clip.width || opt.height != loaded.clip.height)) {
        const double sx = static_cast<double>(opt.width) / loaded.clip.width;
        const double sy = static_cast<double>(opt.height) / loaded.clip.height;
        loaded.clip = rescale_annotation(loaded.clip, opt.width, opt.height);
        if (loaded.calib) loaded.calib = rescale_calib(*loaded.calib, sx, sy);
    }
    return loaded;
}

json write_rendered_clip(const std::vector<Rgb8Frame>& frames,
                         const std::string& out_dir) {
    fs::create_directories(out_dir);
    json manifest_frames = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const std::string name = frame_filename(static_cast<int>(i));
        write_png((fs::path(out_dir) / name).string(), frames[i]);
        manifest_frames.push_back(
            {{"file", name},
             {"hash", to_hex64(fnv1a64(frames[i].pixels.data(), frames[i].pixels.size()))}});
    }
    return manifest_frames;
}

}  // namespace

int cmd_render(const RenderOptions& opt) {
    if (opt.out_dir.empty()) throw ValidationError("--out is required");
    const LoadedClip loaded = load_clip(opt);
    const RenderMode mode = render_mode_from_string(opt.mode);
    const RenderConfig config = render_config_from(opt);

    std::vector<std::string> unknown;
    make_color_assignment(loaded.clip, config, &unknown);
    for (const auto& label : unknown) {
        std::cerr << "note: class \"" << label << "\" not in palette, using fallback\n";
    }

    const std::vector<Rgb8Frame> frames = render_clip(loaded.clip, mode, loaded.calib,
                                                      config);
    json manifest = {{"command", "render"},
                     {"config", render_config_echo(opt, loaded.clip)},
                     {"frames", write_rendered_clip(frames, opt.out_dir)}};
    write_file((fs::path(opt.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    std::cout << "wrote " << frames.size() << " frames to " << opt.out_dir << "\n";
    return 0;
}

int cmd_mask_metrics(const MaskMetricsOptions& opt) {
    const std::vector<ClipPair> pairs = pair_clip_dirs(opt.pred_dir, opt.gt_dir);
    std::vector<MaskScoreReport> reports(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), opt.jobs, [&](int i) {
        const ClipPair& pair = pairs[static_cast<std::size_t>(i)];
        const auto pred = read_frame_dir(pair.pred_dir);
        const auto gt = read_frame_dir(pair.gt_dir);
        if (pred.size() != gt.size()) {
            throw ValidationError("clip " + pair.clip_id + ": frame count mismatch (" +
                                  std::to_string(pred.size()) + " vs " +
                                  std::to_string(gt.size()) + ")");
        }
        reports[static_cast<std::size_t>(i)] = score_clip(pred, gt, opt.pred_generated);
    });

    std::ostringstream csv;
    csv << "clip_id,maskIoU,maskP,maskR,firstlast_maskIoU,firstlast_maskP,"
           "firstlast_maskR\n";
    std::array<std::vector<double>, 6> columns;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const MaskScoreReport& r = reports[i];
        const std::array<double, 6> values = {r.mask_iou,
                                              r.mask_p,
                                              r.mask_r,
                                              r.firstlast_mask_iou,
                                              r.firstlast_mask_p,
                                              r.firstlast_mask_r};
        csv << pairs[i].clip_id;
        for (std::size_t c = 0; c < 6; ++c) {
            csv << "," << fmt(values[c]);
            columns[c].push_back(values[c]);
        }
        csv << "\n";
    }
    csv << "aggregate";
    for (std::size_t c = 0; c < 6; ++c) {
        const MeanStd ms = mean_std(columns[c]);
        csv << "," << fmt(ms.mean, 3) << "±" << fmt(ms.std, 3);
    }
    csv << "\n";

    if (!opt.out_csv.empty()) write_file(opt.out_csv, csv.str());
    std::cout << csv.str();
    return 0;
}

int cmd_quality(const QualityOptions& opt) {
    const std::vector<ClipPair> pairs = pair_clip_dirs(opt.pred_dir, opt.gt_dir);
    std::optional<std::pair<int, int>> eval_size;
    if (opt.eval_width > 0 && opt.eval_height > 0) {
        eval_size = {opt.eval_width, opt.eval_height};
    }
    std::vector<ClipQualityReport> reports(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), opt.jobs, [&](int i) {
        const ClipPair& pair = pairs[static_cast<std::size_t>(i)];
        const auto pred = read_frame_dir(pair.pred_dir);
        const auto gt = read_frame_dir(pair.gt_dir);
        reports[static_cast<std::size_t>(i)] = clip_quality(pred, gt, eval_size);
    });

    std::ostringstream csv;
    csv << "clip_id,psnr_mean,psnr_inf_count,ssim_mean\n";
    std::vector<double> psnrs, ssims;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const ClipQualityReport& r = reports[i];
        csv << pairs[i].clip_id << ","
            << (std::isinf(r.psnr_mean) ? "inf" : fmt(r.psnr_mean)) << ","
            << r.psnr_inf_count << "," << fmt(r.ssim_mean) << "\n";
        if (!std::isinf(r.psnr_mean)) psnrs.push_back(r.psnr_mean);
        ssims.push_back(r.ssim_mean);
    }
    csv << "aggregate," << (psnrs.empty() ? "inf" : fmt(mean_std(psnrs).mean)) << ",,"
        << fmt(mean_std(ssims).mean) << "\n";

    if (!opt.out_csv.empty()) write_file(opt.out_csv, csv.str());
    std::cout << csv.str();
    return 0;
}

namespace {

struct LoadedDetections {
    PooledDetections pooled;
    std::vector<std::string> clip_ids;
    std::vector<PooledDetections> per_clip;
};

LoadedDetections load_detections(const ApOptions& opt) {
    const Dataset dataset = dataset_from_string(opt.dataset);
    std::vector<DetectionSet> preds = parse_detection_json(read_file(opt.pred_json));
    std::vector<DetectionSet> refs = parse_detection_json(read_file(opt.ref_json));
    for (auto& s : preds) s = map_detections_to_coco(s, dataset);
    for (auto& s : refs) {
        s = filter_gt_detections(map_detections_to_coco(s, dataset), opt.gt_cutoff);
    }

    LoadedDetections out;
    out.pooled = pool_detection_sets(preds, refs);
    for (const auto& r : refs) {
        out.clip_ids.push_back(r.clip_id);
        std::vector<DetectionSet> p1;
        for (const auto& p : preds) {
            if (p.clip_id == r.clip_id) p1.push_back(p);
        }
        out.per_clip.push_back(pool_detection_sets(p1, {r}));
    }
    return out;
}

json ap_report_json(const APReport& report) {
    return json{{"mAP", report.map},
                {"ap_by_threshold", report.ap_by_threshold},
                {"iou_thresholds", APReport::thresholds()},
                {"AP50", report.ap50()},
                {"AP75", report.ap75()},
                {"AP90", report.ap90()}};
}

std::string pr_curve_csv(const PRCurve& curve) {
    std::ostringstream csv;
    csv << "confidence_cutoff,precision,recall\n";
    for (const auto& p : curve.points) {
        csv << fmt(p.confidence_cutoff, 2) << "," << fmt(p.precision) << ","
            << fmt(p.recall) << "\n";
    }
    return csv.str();
}

}  // namespace

int cmd_ap(const ApOptions& opt) {
    const LoadedDetections loaded = load_detections(opt);
    const APReport global = evaluate_coco(loaded.pooled.preds, loaded.pooled.refs);

    json out = {{"global", ap_report_json(global)}, {"per_clip", json::object()}};
    for (std::size_t i = 0; i < loaded.clip_ids.size(); ++i) {
        out["per_clip"][loaded.clip_ids[i]] = ap_report_json(
            evaluate_coco(loaded.per_clip[i].preds, loaded.per_clip[i].refs));
    }

    std::printf("mAP %.4f  AP50 %.4f  AP75 %.4f  AP90 %.4f\n", global.map,
                global.ap50(), global.ap75(), global.ap90());
    if (!opt.out_json.empty()) write_file(opt.out_json, out.dump(2) + "\n");
    if (!opt.out_csv.empty()) {
        std::ostringstream csv;
        csv << "iou_threshold,ap\n";
        const auto thresholds = APReport::thresholds();
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            csv << fmt(thresholds[i], 2) << "," << fmt(global.ap_by_threshold[i]) << "\n";
        }
        csv << "mAP," << fmt(global.map) << "\n";
        write_file(opt.out_csv, csv.str());
    }
    for (double iou : opt.pr_curve_ious) {
        const PRCurve curve = pr_curve(loaded.pooled.preds, loaded.pooled.refs, iou);
        char name[64];
        std::snprintf(name, sizeof(name), "pr_curve_iou%02d.csv",
                      static_cast<int>(std::lround(iou * 100)));
        const fs::path dir = opt.pr_curve_dir.empty() ? fs::path(".")
                                                      : fs::path(opt.pr_curve_dir);
        fs::create_directories(dir);
        write_file((dir / name).string(), pr_curve_csv(curve));
    }
    return 0;
}

int cmd_pr_curve(const PrCurveOptions& opt) {
    ApOptions ap_opt;
    ap_opt.pred_json = opt.pred_json;
    ap_opt.ref_json = opt.ref_json;
    ap_opt.dataset = opt.dataset;
    const LoadedDetections loaded = load_detections(ap_opt);
    const PRCurve curve = pr_curve(loaded.pooled.preds, loaded.pooled.refs, opt.iou);
    const std::string csv = pr_curve_csv(curve);
    if (!opt.out_csv.empty()) write_file(opt.out_csv, csv);
    std::cout << csv;
    return 0;
}

int cmd_tokenize(const TokenizeOptions& opt) {
    const ClipAnnotation clip = parse_generic_jsonl(read_file(opt.input_jsonl));
    const std::vector<TokenizedTrajectory> trajectories = tokenize_clip(clip);
    const std::string corpus = write_token_corpus(trajectories, clip.width, clip.height,
                                                  clip.fps, clip.frame_count());
    if (!opt.out_corpus.empty()) {
        write_file(opt.out_corpus, corpus);
    } else {
        std::cout << corpus;
    }
    return 0;
}

int cmd_rollout(const RolloutOptions& opt) {
    const TokenCorpus corpus = parse_token_corpus(read_file(opt.input_corpus));
    const ClipAnnotation clip = rollout_clip(corpus);
    const std::string jsonl = write_generic_jsonl(clip);
    if (!opt.out_jsonl.empty()) {
        write_file(opt.out_jsonl, jsonl);
    } else {
        std::cout << jsonl;
    }
    return 0;
}

int cmd_traj(const TrajOptions& options) {
    TrajOptions opt = options;
    opt.render.seed = opt.seed;  // one seed drives sampling and colors
    if (opt.out_dir.empty()) throw ValidationError("--out is required");
    if (opt.k < 1) throw ValidationError("--k must be at least 1");
    if (opt.first_frames < 1) throw ValidationError("--first must be at least 1");

    const ClipAnnotation cond_clip = parse_generic_jsonl(read_file(opt.conditioning_jsonl));
    const int n = opt.frames > 0 ? opt.frames : cond_clip.frame_count();
    if (cond_clip.frame_count() < opt.first_frames + 1) {
        throw ValidationError("conditioning clip needs at least first+1 frames");
    }
    TrajectoryConditioning cond;
    cond.n_frames = n;
    cond.width = cond_clip.width;
    cond.height = cond_clip.height;
    cond.fps = cond_clip.fps;
    for (int i = 0; i < opt.first_frames; ++i) {
        cond.first_frames.push_back(cond_clip.frames[static_cast<std::size_t>(i)]);
    }
    cond.last_frame = cond_clip.frames.back();

    std::vector<ClipAnnotation> candidates;
    if (opt.generator == "interp") {
        candidates.push_back(interpolate_baseline(cond));
    } else if (opt.generator == "markov") {
        MarkovModel model;
        if (!opt.model_json.empty()) {
            model = parse_markov_model(read_file(opt.model_json));
        } else if (!opt.fit_corpus.empty()) {
            model = markov_fit(parse_token_corpus(read_file(opt.fit_corpus)).trajectories);
        } else {
            throw ValidationError("markov generator needs --model or --fit-corpus");
        }
        candidates = markov_sample(model, cond, opt.temperature, opt.seed, opt.k);
    } else {
        throw ValidationError("unknown generator: " + opt.generator);
    }

    const RenderConfig config = render_config_from(opt.render);
    const ClipAnnotation reference_clip =
        opt.reference_jsonl.empty()
            ? interpolate_baseline(cond)
            : parse_generic_jsonl(read_file(opt.reference_jsonl));
    const std::vector<Rgb8Frame> reference =
        render_clip(reference_clip, RenderMode::kBbox, std::nullopt, config);

    std::vector<std::vector<Rgb8Frame>> rendered;
    rendered.reserve(candidates.size());
    for (const auto& clip : candidates) {
        rendered.push_back(render_clip(clip, RenderMode::kBbox, std::nullopt, config));
    }
    const BestOfK selection = best_of_k(rendered, reference);
    const ClipAnnotation& chosen = candidates[static_cast<std::size_t>(selection.index)];

    fs::create_directories(opt.out_dir);
    write_file((fs::path(opt.out_dir) / "clip.jsonl").string(),
               write_generic_jsonl(chosen));
    json manifest = {{"command", "traj"},
                     {"generator", opt.generator},
                     {"k", opt.k},
                     {"temperature", opt.temperature},
                     {"seed", opt.seed},
                     {"chosen_index", selection.index},
                     {"chosen_scores",
                      {{"maskIoU", selection.report.mask_iou},
                       {"maskP", selection.report.mask_p},
                       {"maskR", selection.report.mask_r},
                       {"firstlast_maskIoU", selection.report.firstlast_mask_iou},
                       {"firstlast_maskP", selection.report.firstlast_mask_p},
                       {"firstlast_maskR", selection.report.firstlast_mask_r}}},
                     {"frames", write_rendered_clip(
                                    rendered[static_cast<std::size_t>(selection.index)],
                                    opt.out_dir)}};
    write_file((fs::path(opt.out_dir) / "manifest.json").string(),
               manifest.dump(2) + "\n");
    std::cout << "chose candidate " << selection.index << " (maskIoU "
              << fmt(selection.report.mask_iou, 4) << ")\n";
    return 0;
}

int cmd_edm_demo(const EdmDemoOptions& opt) {
    const SigmaSchedule schedule = karras_schedule(opt.steps, opt.sigma_min,
                                                   opt.sigma_max, opt.rho);
    const PreconditionedDenoiser denoiser = gaussian_posterior_denoiser(opt.data_std);

    GaussianRng rng(mix_seed(opt.seed, 0));
    std::vector<double> samples(static_cast<std::size_t>(opt.samples));
    for (auto& s : samples) {
        s = euler_sample(denoiser, schedule, 1, rng)[0];
    }
    const MeanStd stats = mean_std(samples);

    json out = {{"schedule",
                 {{"steps", opt.steps},
                  {"sigma_min", opt.sigma_min},
                  {"sigma_max", opt.sigma_max},
                  {"rho", opt.rho},
                  {"sigmas", schedule.sigmas}}},
                {"gaussian_sampling",
                 {{"samples", opt.samples},
                  {"data_std", opt.data_std},
                  {"seed", opt.seed},
                  {"mean", stats.mean},
                  {"std", stats.std}}}};
    const std::string text = out.dump(2) + "\n";
    if (!opt.out_json.empty()) write_file(opt.out_json, text);
    std::cout << text;
    return 0;
}

}  // namespace bboxlab::cli
