#include "octa/biomarkers.hpp"

#include <stdexcept>

namespace octa::bio {

double mcnv_area(const BinaryMask& mask, const PixelGeometry& geom) {
    return static_cast<double>(mask.count_true()) * geom.pixel_area_mm2;
}

double total_area(const BinaryMask& mask, const PixelGeometry& geom) {
    return mcnv_area(seg::region_fill(mask), geom);
}

double vessel_density(double mcnv_mm2, double total_mm2) {
    if (mcnv_mm2 < 0.0 || total_mm2 < mcnv_mm2)
        throw std::invalid_argument("vessel_density: requires 0 <= mcnv <= total");
    if (total_mm2 == 0.0) return 0.0;
    return mcnv_mm2 / total_mm2;
}

BiomarkerRecord record_from_mask(const std::string& image_id, const BinaryMask& mask,
                                 const PixelGeometry& geom) {
    BiomarkerRecord rec;
    rec.image_id = image_id;
    rec.object_pixels = mask.count_true();
    rec.filled_pixels = seg::region_fill(mask).count_true();
    rec.mcnv_area_mm2 = static_cast<double>(rec.object_pixels) * geom.pixel_area_mm2;
    rec.total_area_mm2 = static_cast<double>(rec.filled_pixels) * geom.pixel_area_mm2;
    rec.vessel_density = vessel_density(rec.mcnv_area_mm2, rec.total_area_mm2);
    rec.empty_mask = rec.object_pixels == 0;
    return rec;
}

BiomarkerRecord extract_record(const std::string& image_id, const GrayImage& img,
                               const seg::PipelineConfig& cfg, const CropRect& rect,
                               const PixelGeometry& geom) {
    return record_from_mask(image_id, seg::run_pipeline(img, cfg, rect), geom);
}

}  // namespace octa::bio
