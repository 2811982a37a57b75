#pragma once
// Feature extraction: mCNV area, total area after region fill, and vessel
// density. Areas are kept in mm^2 internally; reports also show um^2.

#include <string>

#include "octa/image.hpp"
#include "octa/segmentation.hpp"

namespace octa::bio {

struct BiomarkerRecord {
    std::string image_id;
    double mcnv_area_mm2 = 0.0;
    double total_area_mm2 = 0.0;
    double vessel_density = 0.0;
    std::size_t object_pixels = 0;
    std::size_t filled_pixels = 0;
    bool empty_mask = false;
};

// Object-pixel count times the physical pixel area.
double mcnv_area(const BinaryMask& mask, const PixelGeometry& geom);

// Same count after hole filling, so total_area >= mcnv_area always.
double total_area(const BinaryMask& mask, const PixelGeometry& geom);

// mcnv / total; 0 when total is 0 (empty mask). Throws when total < mcnv,
// which can only mean an inconsistent pipeline.
double vessel_density(double mcnv_mm2, double total_mm2);

// Runs the segmentation pipeline and the three feature computations.
BiomarkerRecord extract_record(const std::string& image_id, const GrayImage& img,
                               const seg::PipelineConfig& cfg, const CropRect& rect,
                               const PixelGeometry& geom);

// Features of an already-segmented mask (pipeline output or annotation).
BiomarkerRecord record_from_mask(const std::string& image_id, const BinaryMask& mask,
                                 const PixelGeometry& geom);

}  // namespace octa::bio
