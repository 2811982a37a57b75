#include "octa/metrics.hpp"

#include <stdexcept>

namespace octa::metrics {

OverlapReport overlap(const BinaryMask& a, const BinaryMask& b) {
    a.validate();
    b.validate();
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("overlap: mask dimensions differ");

    OverlapReport r;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        const bool pa = a.pixels[i] != 0;
        const bool pb = b.pixels[i] != 0;
        r.a_px += pa;
        r.b_px += pb;
        r.intersection_px += pa && pb;
        r.union_px += pa || pb;
    }

    if (r.union_px == 0) {
        r.both_empty = true;
        r.jaccard_index = 1.0;
        r.dice = 1.0;
    } else {
        r.jaccard_index = static_cast<double>(r.intersection_px) / static_cast<double>(r.union_px);
        r.dice = 2.0 * static_cast<double>(r.intersection_px) / static_cast<double>(r.a_px + r.b_px);
    }
    r.jaccard_distance = 1.0 - r.jaccard_index;
    return r;
}

}  // namespace octa::metrics
