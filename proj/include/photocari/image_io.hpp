#ifndef PHOTOCARI_IMAGE_IO_HPP
#define PHOTOCARI_IMAGE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <torch/torch.h>

namespace photocari {

// Decoded 8-bit RGB raster, row-major with interleaved channels.
struct RgbImage {
  int64_t height = 0;
  int64_t width = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3

  std::uint8_t& at(int64_t row, int64_t col, int channel) {
    return pixels[static_cast<std::size_t>((row * width + col) * 3 + channel)];
  }
  std::uint8_t at(int64_t row, int64_t col, int channel) const {
    return pixels[static_cast<std::size_t>((row * width + col) * 3 + channel)];
  }
};

// PNG/JPEG decode. Returns nullopt for missing or undecodable files.
std::optional<RgbImage> decode_image(const std::filesystem::path& path);

// Maps a [3, H, W] tensor in [-1, 1] to 8 bits: (v + 1) * 127.5, rounded
// half-to-even and clamped to [0, 255].
RgbImage to_rgb8(const torch::Tensor& chw);

// Writes `image` as PNG (format chosen by extension). Throws IoError.
void write_image(const std::filesystem::path& path, const RgbImage& image);
void write_image(const std::filesystem::path& path, const torch::Tensor& chw);

}  // namespace photocari

#endif  // PHOTOCARI_IMAGE_IO_HPP
