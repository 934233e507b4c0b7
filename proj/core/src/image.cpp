#include "augclust/image.hpp"

#include <algorithm>
#include <cmath>

#include "augclust/error.hpp"

namespace augclust {

Rgb mean_color(const Image& image) {
  const int h = image.height(), w = image.width();
  if (h == 0 || w == 0) throw InputError("mean_color: empty image");
  double sums[3] = {0.0, 0.0, 0.0};
  for (int c = 0; c < 3; ++c) {
    const float* p = image.pixels.data.data() + static_cast<std::size_t>(c) * h * w;
    for (int i = 0; i < h * w; ++i) sums[c] += p[i];
  }
  const double n = static_cast<double>(h) * w;
  return {static_cast<float>(sums[0] / n), static_cast<float>(sums[1] / n), static_cast<float>(sums[2] / n)};
}

void clamp01(Image& image) {
  for (float& v : image.pixels.data) v = std::clamp(v, 0.0f, 1.0f);
}

void validate_image(const Image& image) {
  if (image.pixels.rank() != 3 || image.pixels.shape[0] != 3) {
    throw InputError("image must have shape [3,H,W], got " + image.pixels.shape_str());
  }
  if (image.height() <= 0 || image.width() <= 0) throw InputError("image dimensions must be positive");
  for (float v : image.pixels.data) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw InputError("image component " + std::to_string(v) + " outside [0,1]");
    }
  }
}

}  // namespace augclust
