#pragma once

#include "augclust/tensor.hpp"

namespace augclust {

struct Rgb {
  float r = 0.0f, g = 0.0f, b = 0.0f;
};

/// RGB raster with components in [0,1], stored channel-major ([3 x H x W])
/// so it feeds conv layers without repacking.
struct Image {
  Tensor pixels;  // shape [3, H, W]

  Image() = default;
  Image(int height, int width) : pixels({3, height, width}) {}

  int height() const { return pixels.shape.empty() ? 0 : pixels.shape[1]; }
  int width() const { return pixels.shape.empty() ? 0 : pixels.shape[2]; }

  float& at(int c, int y, int x) { return pixels.at(c, y, x); }
  float at(int c, int y, int x) const { return pixels.at(c, y, x); }

  void set(int y, int x, const Rgb& color) {
    at(0, y, x) = color.r;
    at(1, y, x) = color.g;
    at(2, y, x) = color.b;
  }
  Rgb get(int y, int x) const { return {at(0, y, x), at(1, y, x), at(2, y, x)}; }
};

/// Per-channel mean over all pixels.
Rgb mean_color(const Image& image);

void clamp01(Image& image);

/// Checks the Image invariants (shape [3,H,W], components in [0,1]);
/// throws InputError otherwise.
void validate_image(const Image& image);

}  // namespace augclust
