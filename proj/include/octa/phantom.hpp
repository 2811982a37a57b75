#pragma once
// Seeded synthetic phantoms: a bright curvilinear vessel blob with carved
// holes and speckle noise over a dark background, plus the matching ground
// truth mask. The suite stands in for clinical scans in tests and demos.

#include <cstdint>

#include "octa/image.hpp"

namespace octa::phantom {

struct PhantomSpec {
    int width = 320;   // cropped working area
    int height = 320;
    int margin = 16;   // bright junk frame removed by the crop rect
    std::uint64_t seed = 1;
    bool sick = true;  // healthy phantoms have no vessel blob
    int holes = 3;
    double salt_density = 0.0015;
    double pepper_density = 0.002;
    double radius_scale = 1.0;  // < 1 shrinks the blob (follow-up visits)
};

struct Phantom {
    GrayImage image;   // full frame, (width+2*margin) square-ish
    BinaryMask truth;  // cropped coordinates, width x height
    CropRect crop;
};

Phantom make_phantom(const PhantomSpec& spec);

}  // namespace octa::phantom
