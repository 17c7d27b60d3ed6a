#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bboxlab::cli {

struct RenderOptions {
    std::string input_jsonl;   // canonical JSONL clip
    std::string kitti_labels;  // alternative input: KITTI tracking labels
    std::string calib_file;    // KITTI-style calibration text
    std::string calib_matrix = "P2";
    int window_start = 0;
    int frames = 25;
    int source_width = 0;   // declared dims of KITTI label coordinates
    int source_height = 0;
    int width = 0;   // 0 keeps the input geometry
    int height = 0;
    std::string mode = "bbox";
    std::string out_dir;
    std::uint64_t seed = 1729;
    double fill_alpha = 0.25;
    int outline_width = 2;
    int x_mark_width = 2;
    int traj_outer_diameter = 10;
    int traj_inner_diameter = 5;
};

struct PairedDirOptions {
    std::string pred_dir;
    std::string gt_dir;
    std::string out_csv;
    int jobs = 1;
};

struct MaskMetricsOptions : PairedDirOptions {
    bool pred_generated = true;
};

struct QualityOptions : PairedDirOptions {
    int eval_width = 410;   // 0 disables resampling
    int eval_height = 256;
};

struct ApOptions {
    std::string pred_json;
    std::string ref_json;
    std::string dataset = "kitti";
    std::string out_json;
    std::string out_csv;
    double gt_cutoff = 0.6;
    std::vector<double> pr_curve_ious;  // also emit PR CSVs at these IoUs
    std::string pr_curve_dir;
};

struct PrCurveOptions {
    std::string pred_json;
    std::string ref_json;
    std::string dataset = "kitti";
    double iou = 0.5;
    std::string out_csv;
};

struct TokenizeOptions {
    std::string input_jsonl;
    std::string out_corpus;
};

struct RolloutOptions {
    std::string input_corpus;
    std::string out_jsonl;
};

struct TrajOptions {
    std::string conditioning_jsonl;
    int first_frames = 1;
    int frames = 0;  // 0 takes the conditioning clip's length
    std::string generator = "interp";
    std::string model_json;   // markov: pre-fit model
    std::string fit_corpus;   // markov: fit a model from this corpus
    int k = 5;
    double temperature = 1.0;
    std::uint64_t seed = 1729;
    std::string reference_jsonl;  // default: the interpolated baseline
    std::string out_dir;
    RenderOptions render;  // rendering knobs for the emitted frames
};

struct EdmDemoOptions {
    int steps = 50;
    double sigma_min = 0.002;
    double sigma_max = 14.6146;
    double rho = 7.0;
    int samples = 10000;
    double data_std = 1.0;
    std::uint64_t seed = 1729;
    std::string out_json;
};

int cmd_render(const RenderOptions& opt);
int cmd_mask_metrics(const MaskMetricsOptions& opt);
int cmd_quality(const QualityOptions& opt);
int cmd_ap(const ApOptions& opt);
int cmd_pr_curve(const PrCurveOptions& opt);
int cmd_tokenize(const TokenizeOptions& opt);
int cmd_rollout(const RolloutOptions& opt);
int cmd_traj(const TrajOptions& opt);
int cmd_edm_demo(const EdmDemoOptions& opt);

}  // namespace bboxlab::cli
