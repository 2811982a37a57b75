#pragma once
// Dataset manifest: the batch description consumed by every CLI command.
// JSON on disk; entry paths are resolved against the manifest's directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "octa/image.hpp"
#include "octa/whitebox.hpp"

namespace octa::run {

struct ManifestEntry {
    std::string image_id;
    std::filesystem::path path;
    std::optional<CropRect> crop;  // absent = full image
    std::optional<wb::Label> label;
    std::optional<std::filesystem::path> annotation;
    std::string stack_group;  // empty = not part of a stack
    int section_index = -1;
};

struct DatasetManifest {
    double scan_size_um = kDefaultScanSizeUm;
    int pixels_per_side = kDefaultPixelsPerSide;
    double slice_distance_um = 25.0;
    std::vector<ManifestEntry> entries;

    PixelGeometry geometry() const { return pixel_geometry(scan_size_um, pixels_per_side); }
    CropRect crop_for(const ManifestEntry& e, const GrayImage& img) const {
        return e.crop ? *e.crop : CropRect{0, 0, img.width, img.height};
    }
};

// Unique ids, referenced files present, stack groups with contiguous
// section indices starting at 0.
void validate_manifest(const DatasetManifest& m, bool check_files);

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);

nlohmann::json manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

}  // namespace octa::run
