#include "photocari/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "photocari/errors.hpp"

namespace photocari {

std::optional<RgbImage> decode_image(const std::filesystem::path& path) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception&) {
    return std::nullopt;
  }
  if (bgr.empty()) {
    return std::nullopt;
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  RgbImage out;
  out.height = rgb.rows;
  out.width = rgb.cols;
  out.pixels.resize(static_cast<std::size_t>(rgb.rows) * rgb.cols * 3);
  for (int r = 0; r < rgb.rows; ++r) {
    std::memcpy(out.pixels.data() + static_cast<std::size_t>(r) * rgb.cols * 3, rgb.ptr<std::uint8_t>(r),
                static_cast<std::size_t>(rgb.cols) * 3);
  }
  return out;
}

RgbImage to_rgb8(const torch::Tensor& chw) {
  auto t = chw.detach().to(torch::kCPU, torch::kFloat64).contiguous();
  TORCH_CHECK(t.dim() == 3 && t.size(0) == 3, "to_rgb8 expects [3, H, W]");
  RgbImage out;
  out.height = t.size(1);
  out.width = t.size(2);
  out.pixels.resize(static_cast<std::size_t>(out.height * out.width * 3));
  auto acc = t.accessor<double, 3>();
  for (int64_t r = 0; r < out.height; ++r) {
    for (int64_t c = 0; c < out.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        // nearbyint rounds half to even in the default rounding mode.
        double v = std::nearbyint((acc[ch][r][c] + 1.0) * 127.5);
        v = std::clamp(v, 0.0, 255.0);
        out.at(r, c, ch) = static_cast<std::uint8_t>(v);
      }
    }
  }
  return out;
}

void write_image(const std::filesystem::path& path, const RgbImage& image) {
  cv::Mat rgb(static_cast<int>(image.height), static_cast<int>(image.width), CV_8UC3,
              const_cast<std::uint8_t*>(image.pixels.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    if (path.has_parent_path()) {
      std::filesystem::create_directories(path.parent_path());
    }
    ok = cv::imwrite(path.string(), bgr);
  } catch (const std::exception& e) {
    throw IoError("cannot write image " + path.string() + ": " + e.what());
  }
  if (!ok) {
    throw IoError("cannot write image " + path.string());
  }
}

void write_image(const std::filesystem::path& path, const torch::Tensor& chw) {
  write_image(path, to_rgb8(chw));
}

}  // namespace photocari
