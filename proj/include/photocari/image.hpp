#ifndef PHOTOCARI_IMAGE_HPP
#define PHOTOCARI_IMAGE_HPP

#include <string_view>

#include <torch/torch.h>

namespace photocari {

enum class Domain { Photo, Caricature };

constexpr Domain other(Domain d) {
  return d == Domain::Photo ? Domain::Caricature : Domain::Photo;
}

constexpr std::string_view to_string(Domain d) {
  return d == Domain::Photo ? "photo" : "caricature";
}

// A batch of square RGB images, channels-first, values in [-1, 1]. The domain
// tag names the domain the pixels belong to (a rendered photo carries
// Domain::Caricature).
struct ImageTensor {
  torch::Tensor data;  // [batch, 3, H, W]
  Domain domain = Domain::Photo;

  int64_t batch() const { return data.size(0); }
  int64_t height() const { return data.size(2); }
  int64_t width() const { return data.size(3); }
};

// Throws ShapeMismatch unless `image` is a 4-D, 3-channel, square batch.
// When `expected_size` > 0 the side length must match it too.
void check_image(const ImageTensor& image, std::string_view what, int64_t expected_size = 0);

// Throws ShapeMismatch when the two tensors differ in shape.
void check_same_shape(const torch::Tensor& a, const torch::Tensor& b, std::string_view what);

// Halves the spatial resolution with bilinear sampling (2x2 box average).
ImageTensor downsample_half(const ImageTensor& image);

}  // namespace photocari

#endif  // PHOTOCARI_IMAGE_HPP
