#pragma once

#include <string>

#include "augclust/image.hpp"

namespace augclust {

/// Decodes an 8-bit PNG into an Image (components mapped to [0,1] by /255).
/// Grayscale and alpha variants are normalized to plain RGB.
Image read_png(const std::string& path);

/// Encodes as 8-bit RGB PNG (components quantized by round(v*255)).
/// Output bytes are deterministic for identical pixel data.
void write_png(const std::string& path, const Image& image);

}  // namespace augclust
