#pragma once
// Image-processing phase: capped Otsu, multilevel + binary thresholding,
// salt-and-pepper (binary majority) filtering, connected components with
// largest-component selection, and region fill.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "octa/image.hpp"

namespace octa::seg {

// Connected-component labeling result. Labels are assigned in raster-scan
// discovery order starting at 1; 0 is background. component_sizes[k] is the
// pixel count of label k (entry 0 unused).
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> labels;
    std::vector<std::size_t> component_sizes;
    double scan_size_um = kDefaultScanSizeUm;

    std::uint32_t label_at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * width + x];
    }
    std::size_t component_count() const {
        return component_sizes.empty() ? 0 : component_sizes.size() - 1;
    }
};

struct PipelineConfig {
    int otsu_cap = 170;
    std::vector<int> multi_cuts = {85, 170};
    int binary_threshold = 127;
    int sp_window = 3;
    int connectivity = 8;
    int gaussian_kernel = 5;
    double gaussian_sigma = 1.0;

    void validate() const;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);
// FNV-1a over the canonical JSON dump; embedded in reports for reproducibility.
std::uint64_t config_hash(const PipelineConfig& cfg);

// Between-class-variance maximizer over the 256-bin histogram. Candidates
// are the t in [0,254] with both classes ({<=t}, {>t}) non-empty; ties break
// to the smallest t. A constant image returns that constant.
int otsu_threshold(const GrayImage& img);

// Pixels above Otsu's t are set to cap; the rest pass through unchanged, so
// the output is still grayscale.
GrayImage otsu_cap(const GrayImage& img, int cap);

// Bands delimited by strictly ascending cuts; band k maps to level
// round(255*k/(K-1)), K = cuts.size()+1. Empty cuts collapse to level 0.
GrayImage multi_threshold(const GrayImage& img, const std::vector<int>& cuts);

// Mask pixel is true iff intensity > t.
BinaryMask binary_threshold(const GrayImage& img, int t);

// Binary majority filter over an odd window x window neighborhood with
// border reflection. Odd window area makes ties impossible.
BinaryMask salt_pepper_filter(const BinaryMask& mask, int window);

LabelMap label_components(const BinaryMask& mask, int connectivity);

// Keeps the component with the most pixels; ties go to the smallest label
// (earliest raster discovery). Empty input gives an empty mask.
BinaryMask largest_component(const LabelMap& lm);

// Flood-fills background from the border with 4-connectivity; unreached
// background pixels become object. Output is a pixelwise superset.
BinaryMask region_fill(const BinaryMask& mask);

// Stage snapshots for the --dump-stages debugging output, in pipeline order.
struct PipelineTrace {
    std::vector<std::pair<std::string, GrayImage>> stages;
};

// Full pipeline: crop -> Gaussian -> capped Otsu -> multilevel -> binary ->
// salt-and-pepper -> components -> largest component. Deterministic.
BinaryMask run_pipeline(const GrayImage& img, const PipelineConfig& cfg, const CropRect& rect,
                        PipelineTrace* trace = nullptr);

// Renders a label map to grayscale for stage dumps (labels spread over
// 1..255, background 0).
GrayImage render_label_map(const LabelMap& lm);

GrayImage mask_to_gray(const BinaryMask& mask);

}  // namespace octa::seg
