#include "photocari/image.hpp"

#include <sstream>
#include <string>

#include "photocari/errors.hpp"

namespace photocari {

namespace F = torch::nn::functional;

void check_image(const ImageTensor& image, std::string_view what, int64_t expected_size) {
  const auto& t = image.data;
  std::ostringstream msg;
  if (!t.defined() || t.dim() != 4 || t.size(1) != 3 || t.size(2) != t.size(3)) {
    msg << what << ": expected [B, 3, S, S] image batch, got ";
    if (t.defined()) {
      msg << t.sizes();
    } else {
      msg << "undefined tensor";
    }
    throw ShapeMismatch(msg.str());
  }
  if (expected_size > 0 && t.size(2) != expected_size) {
    msg << what << ": expected side " << expected_size << ", got " << t.size(2);
    throw ShapeMismatch(msg.str());
  }
}

void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, std::string_view what) {
  if (a.sizes() != b.sizes()) {
    std::ostringstream msg;
    msg << what << ": shape " << a.sizes() << " vs " << b.sizes();
    throw ShapeMismatch(msg.str());
  }
}

ImageTensor downsample_half(const ImageTensor& image) {
  auto half = F::interpolate(image.data, F::InterpolateFuncOptions()
                                             .size(std::vector<int64_t>{image.height() / 2, image.width() / 2})
                                             .mode(torch::kBilinear)
                                             .align_corners(false));
  return {half, image.domain};
}

}  // namespace photocari
