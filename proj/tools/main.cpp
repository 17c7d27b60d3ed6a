#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bboxlab/errors.hpp"
#include "commands.hpp"

namespace {

using namespace bboxlab;
using namespace bboxlab::cli;

void add_render_flags(CLI::App* cmd, RenderOptions& opt) {
    cmd->add_option("--fill-alpha", opt.fill_alpha, "Box fill compositing alpha");
    cmd->add_option("--outline-width", opt.outline_width, "Outline/wireframe width (px)");
    cmd->add_option("--x-mark-width", opt.x_mark_width, "Rear-face X stroke width (px)");
    cmd->add_option("--traj-outer-diameter", opt.traj_outer_diameter,
                    "Trajectory outer disc diameter (px)");
    cmd->add_option("--traj-inner-diameter", opt.traj_inner_diameter,
                    "Trajectory inner disc diameter (px)");
}

int error_exit(const std::string& type, const std::string& message) {
    nlohmann::json payload = {{"error", {{"type", type}, {"message", message}}}};
    std::cerr << payload.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bounding-box clip rendering, tokenization and evaluation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a config file "
                                   "([subcommand] sections; flags override)");

    int jobs = 1;
    app.add_option("--jobs", jobs, "Clip-level parallelism")->capture_default_str();

    RenderOptions render_opt;
    auto* render = app.add_subcommand("render", "Render bounding-box / trajectory frames");
    render->add_option("--input", render_opt.input_jsonl, "Annotation JSONL clip");
    render->add_option("--kitti", render_opt.kitti_labels, "KITTI tracking label file");
    render->add_option("--calib", render_opt.calib_file, "KITTI-style calibration file");
    render->add_option("--calib-matrix", render_opt.calib_matrix,
                       "Projection name in the calibration file")
        ->capture_default_str();
    render->add_option("--window-start", render_opt.window_start,
                       "First frame of the KITTI window");
    render->add_option("--frames", render_opt.frames, "Window length for KITTI input")
        ->capture_default_str();
    render->add_option("--source-width", render_opt.source_width,
                       "Pixel width the KITTI labels refer to");
    render->add_option("--source-height", render_opt.source_height,
                       "Pixel height the KITTI labels refer to");
    render->add_option("--width", render_opt.width, "Target render width");
    render->add_option("--height", render_opt.height, "Target render height");
    render->add_option("--mode", render_opt.mode,
                       "bbox | trajectory | bbox-final-trajectory")
        ->capture_default_str();
    render->add_option("--out", render_opt.out_dir, "Output directory")->required();
    render->add_option("--seed", render_opt.seed, "Track-color seed")
        ->capture_default_str();
    add_render_flags(render, render_opt);

    MaskMetricsOptions mask_opt;
    auto* mask = app.add_subcommand("mask-metrics",
                                    "maskIoU/maskP/maskR between frame directories");
    mask->add_option("--pred", mask_opt.pred_dir, "Predicted frames directory")->required();
    mask->add_option("--gt", mask_opt.gt_dir, "Ground-truth frames directory")->required();
    mask->add_option("--out", mask_opt.out_csv, "CSV report path");
    mask->add_flag("!--no-pred-generated", mask_opt.pred_generated,
                   "Treat predictions as clean renders (skip the sum<50 cleanup)");

    QualityOptions quality_opt;
    auto* quality = app.add_subcommand("quality", "PSNR/SSIM between frame directories");
    quality->add_option("--pred", quality_opt.pred_dir, "Predicted frames directory")
        ->required();
    quality->add_option("--gt", quality_opt.gt_dir, "Ground-truth frames directory")
        ->required();
    quality->add_option("--out", quality_opt.out_csv, "CSV report path");
    quality->add_option("--eval-width", quality_opt.eval_width,
                        "Evaluation width (0 = native)")
        ->capture_default_str();
    quality->add_option("--eval-height", quality_opt.eval_height,
                        "Evaluation height (0 = native)")
        ->capture_default_str();

    ApOptions ap_opt;
    auto* ap = app.add_subcommand("ap", "COCO-protocol AP/mAP from detection JSON");
    ap->add_option("--pred", ap_opt.pred_json, "Detections on generated frames")->required();
    ap->add_option("--ref", ap_opt.ref_json, "Detections on ground-truth frames")->required();
    ap->add_option("--dataset", ap_opt.dataset, "kitti | vkitti | bdd | nuscenes")
        ->capture_default_str();
    ap->add_option("--out", ap_opt.out_json, "JSON report path");
    ap->add_option("--csv", ap_opt.out_csv, "CSV report path");
    ap->add_option("--gt-cutoff", ap_opt.gt_cutoff,
                   "Confidence cutoff applied to reference detections")
        ->capture_default_str();
    ap->add_option("--pr-curve", ap_opt.pr_curve_ious,
                   "Also emit a PR curve CSV at this IoU (repeatable)");
    ap->add_option("--pr-curve-dir", ap_opt.pr_curve_dir, "Directory for PR curve CSVs");

    PrCurveOptions pr_opt;
    auto* pr = app.add_subcommand("pr-curve", "Precision-recall sweep over confidence");
    pr->add_option("--pred", pr_opt.pred_json, "Detections on generated frames")->required();
    pr->add_option("--ref", pr_opt.ref_json, "Detections on ground-truth frames")->required();
    pr->add_option("--dataset", pr_opt.dataset, "kitti | vkitti | bdd | nuscenes")
        ->capture_default_str();
    pr->add_option("--iou", pr_opt.iou, "IoU threshold")->capture_default_str();
    pr->add_option("--out", pr_opt.out_csv, "CSV path");

    TokenizeOptions tokenize_opt;
    auto* tokenize = app.add_subcommand("tokenize", "Clip JSONL -> motion-token corpus");
    tokenize->add_option("--input", tokenize_opt.input_jsonl, "Annotation JSONL clip")
        ->required();
    tokenize->add_option("--out", tokenize_opt.out_corpus, "Corpus JSONL path");

    RolloutOptions rollout_opt;
    auto* rollout = app.add_subcommand("rollout", "Motion-token corpus -> clip JSONL");
    rollout->add_option("--input", rollout_opt.input_corpus, "Corpus JSONL path")
        ->required();
    rollout->add_option("--out", rollout_opt.out_jsonl, "Clip JSONL path");

    TrajOptions traj_opt;
    auto* traj = app.add_subcommand("traj",
                                    "Generate a trajectory clip from endpoint conditioning");
    traj->add_option("--conditioning", traj_opt.conditioning_jsonl,
                     "JSONL clip providing the first frame(s) and final frame")
        ->required();
    traj->add_option("--first", traj_opt.first_frames, "Number of initial frames (1 or 3)")
        ->capture_default_str();
    traj->add_option("--frames", traj_opt.frames, "Clip length (0 = conditioning length)");
    traj->add_option("--generator", traj_opt.generator, "interp | markov")
        ->capture_default_str();
    traj->add_option("--model", traj_opt.model_json, "Markov model JSON");
    traj->add_option("--fit-corpus", traj_opt.fit_corpus,
                     "Fit the Markov model from this token corpus");
    traj->add_option("--k", traj_opt.k, "Candidates for best-of-K selection")
        ->capture_default_str();
    traj->add_option("--temperature", traj_opt.temperature, "Sampling temperature")
        ->capture_default_str();
    traj->add_option("--seed", traj_opt.seed, "Sampling and track-color seed")
        ->capture_default_str();
    traj->add_option("--reference", traj_opt.reference_jsonl,
                     "Reference clip JSONL for selection (default: interpolated baseline)");
    traj->add_option("--out", traj_opt.out_dir, "Output directory")->required();
    add_render_flags(traj, traj_opt.render);

    EdmDemoOptions edm_opt;
    auto* edm = app.add_subcommand("edm-demo",
                                   "Print the noise schedule and a Gaussian sampling check");
    edm->add_option("--steps", edm_opt.steps, "Schedule steps")->capture_default_str();
    edm->add_option("--sigma-min", edm_opt.sigma_min, "Lowest noise level")
        ->capture_default_str();
    edm->add_option("--sigma-max", edm_opt.sigma_max, "Highest noise level")
        ->capture_default_str();
    edm->add_option("--rho", edm_opt.rho, "Schedule curvature")->capture_default_str();
    edm->add_option("--samples", edm_opt.samples, "Sampler chains to run")
        ->capture_default_str();
    edm->add_option("--data-std", edm_opt.data_std, "Std of the Gaussian target")
        ->capture_default_str();
    edm->add_option("--seed", edm_opt.seed, "Sampler seed")->capture_default_str();
    edm->add_option("--out", edm_opt.out_json, "JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cout << app.help() << std::flush;
        return error_exit("UsageError", e.what());
    }

    try {
        mask_opt.jobs = jobs;
        quality_opt.jobs = jobs;
        if (render->parsed()) return cmd_render(render_opt);
        if (mask->parsed()) return cmd_mask_metrics(mask_opt);
        if (quality->parsed()) return cmd_quality(quality_opt);
        if (ap->parsed()) return cmd_ap(ap_opt);
        if (pr->parsed()) return cmd_pr_curve(pr_opt);
        if (tokenize->parsed()) return cmd_tokenize(tokenize_opt);
        if (rollout->parsed()) return cmd_rollout(rollout_opt);
        if (traj->parsed()) return cmd_traj(traj_opt);
        if (edm->parsed()) return cmd_edm_demo(edm_opt);
    } catch (const ParseError& e) {
        return error_exit("ParseError", e.what());
    } catch (const ValidationError& e) {
        return error_exit("ValidationError", e.what());
    } catch (const BehindCameraError& e) {
        return error_exit("BehindCameraError", e.what());
    } catch (const IoError& e) {
        return error_exit("IoError", e.what());
    } catch (const std::exception& e) {
        return error_exit("Error", e.what());
    }
    return 0;
}
