#pragma once
// Synthetic feature-space datasets drawn from the four decision-tree rule
// regions, respecting total_area >= mcnv_area.

#include <random>
#include <string>
#include <vector>

#include "octa/biomarkers.hpp"
#include "octa/whitebox.hpp"

namespace testdata {

inline double urand(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline octa::bio::BiomarkerRecord record(const std::string& id, double mcnv, double total) {
    octa::bio::BiomarkerRecord r;
    r.image_id = id;
    r.mcnv_area_mm2 = mcnv;
    r.total_area_mm2 = total;
    r.vessel_density = total > 0 ? mcnv / total : 0.0;
    return r;
}

struct RegionDataset {
    std::vector<octa::bio::BiomarkerRecord> records;
    std::vector<octa::wb::Label> labels;
    std::vector<std::string> ids;
};

// n_sick split between regions R2 (mcnv>0.01, vessel<=0.02) and R4
// (mcnv>0.03, vessel>0.02); n_notsick between R1 (mcnv<=0.01) and R3
// (0.01<mcnv<=0.03, vessel>0.02). Margins keep samples away from the
// thresholds so midpoint splits can recover them.
inline RegionDataset region_dataset(int n_sick, int n_notsick, std::uint64_t seed) {
    RegionDataset d;
    std::mt19937_64 rng(seed);
    int counter = 0;
    auto add = [&](double mcnv, double total, octa::wb::Label label) {
        const std::string id = "r" + std::to_string(counter++);
        d.records.push_back(record(id, mcnv, total));
        d.labels.push_back(label);
        d.ids.push_back(id);
    };

    for (int i = 0; i < n_sick; ++i) {
        if (i % 2 == 0) {
            const double mcnv = urand(rng, 0.011, 0.018);
            add(mcnv, urand(rng, mcnv, 0.019), octa::wb::Label::Sick);  // R2
        } else {
            const double mcnv = urand(rng, 0.031, 0.045);
            add(mcnv, urand(rng, mcnv, 0.055), octa::wb::Label::Sick);  // R4
        }
    }
    for (int i = 0; i < n_notsick; ++i) {
        if (i % 2 == 0) {
            const double mcnv = urand(rng, 0.002, 0.009);
            add(mcnv, urand(rng, mcnv, 0.05), octa::wb::Label::NotSick);  // R1
        } else {
            const double mcnv = urand(rng, 0.011, 0.029);
            add(mcnv, urand(rng, std::max(mcnv, 0.021), 0.05), octa::wb::Label::NotSick);  // R3
        }
    }
    return d;
}

}  // namespace testdata
