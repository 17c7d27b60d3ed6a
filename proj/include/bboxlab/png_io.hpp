#pragma once

#include <string>

#include "bboxlab/renderer_types.hpp"

namespace bboxlab {

// 8-bit RGB PNG, no alpha. Fixed encoder settings so repeated writes of the
// same frame produce byte-identical files.
void write_png(const std::string& path, const Rgb8Frame& frame);

// Reads 8-bit gray/RGB/RGBA PNGs; everything is expanded to RGB.
Rgb8Frame read_png(const std::string& path);

}  // namespace bboxlab
