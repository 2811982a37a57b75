#pragma once
// File I/O for rasters. PGM (P5, maxval 255) is the canonical bit-exact
// format for both images and masks; 8-bit gray or gray-palette PNG is
// accepted on input only.

#include <filesystem>

#include "octa/image.hpp"

namespace octa {

// Reads a P5 PGM or an 8-bit grayscale/graymappable PNG, chosen by file
// magic. scan_size_um is supplied by the caller (manifest or CLI flag).
GrayImage load_gray(const std::filesystem::path& path, double scan_size_um = kDefaultScanSizeUm);

// Writes canonical P5: "P5\n<w> <h>\n255\n" followed by raw rows.
void save_gray(const GrayImage& img, const std::filesystem::path& path);

// Mask files are PGM images; a pixel is object iff its value exceeds 127.
BinaryMask load_mask(const std::filesystem::path& path, double scan_size_um = kDefaultScanSizeUm);

// Masks are written as 0/255 PGM.
void save_mask(const BinaryMask& mask, const std::filesystem::path& path);

}  // namespace octa
