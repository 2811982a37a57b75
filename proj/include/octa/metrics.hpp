#pragma once
// Segmentation agreement: Jaccard index/distance and Dice coefficient.

#include "octa/image.hpp"

namespace octa::metrics {

struct OverlapReport {
    std::size_t intersection_px = 0;
    std::size_t union_px = 0;
    std::size_t a_px = 0;
    std::size_t b_px = 0;
    double jaccard_index = 0.0;
    double jaccard_distance = 1.0;
    double dice = 0.0;
    // Two empty masks agree vacuously; scored 1 and flagged.
    bool both_empty = false;
};

OverlapReport overlap(const BinaryMask& a, const BinaryMask& b);

}  // namespace octa::metrics
