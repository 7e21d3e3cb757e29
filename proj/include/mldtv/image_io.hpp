#pragma once

#include <string>

#include "mldtv/image.hpp"

namespace mldtv {

/// Reads an 8/16-bit grayscale PGM (P5) or PNG into [0,1] intensities.
/// Color images are rejected. PGM files written by write_image from
/// out-of-[0,1] data carry their physical range in comment lines and are
/// mapped back to physical values on read.
ImageXd read_image(const std::string& path);

/// Writes 16-bit grayscale, format chosen by extension (.pgm or .png).
/// [0,1] data is quantized directly (max abs error <= 2^-16 per pixel);
/// out-of-range data is range-mapped, recorded in PGM comments (PNG output
/// is clamped to [0,1] instead).
void write_image(const ImageXd& img, const std::string& path);

}  // namespace mldtv
