#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>

#include <unistd.h>

#include <ATen/CPUGeneratorImpl.h>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "photocari/extractor.hpp"

namespace photocari::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "photocari-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) {
    throw std::runtime_error("mkdtemp failed");
  }
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

RgbImage from_mat(const cv::Mat& bgr) {
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  RgbImage out;
  out.height = rgb.rows;
  out.width = rgb.cols;
  out.pixels.assign(rgb.datastart, rgb.dataend);
  return out;
}

cv::Scalar jitter(cv::RNG& rng, cv::Scalar base, double amount) {
  for (int i = 0; i < 3; ++i) {
    base[i] = std::clamp(base[i] + rng.uniform(-amount, amount), 0.0, 255.0);
  }
  return base;
}

}  // namespace

RgbImage synthetic_photo(int size, std::uint64_t seed) {
  cv::RNG rng(seed * 7919 + 17);
  const double s = size;
  cv::Mat img(size, size, CV_8UC3);
  auto top = jitter(rng, {150, 140, 120}, 40);
  auto bottom = jitter(rng, {90, 80, 70}, 30);
  for (int r = 0; r < size; ++r) {
    const double t = r / (s - 1);
    img.row(r).setTo(top * (1 - t) + bottom * t);
  }
  const cv::Point centre(static_cast<int>(s * rng.uniform(0.45, 0.55)), static_cast<int>(s * rng.uniform(0.48, 0.55)));
  const cv::Size axes(static_cast<int>(s * rng.uniform(0.24, 0.3)), static_cast<int>(s * rng.uniform(0.32, 0.38)));
  auto skin = jitter(rng, {120, 160, 205}, 20);
  cv::ellipse(img, centre, axes, 0, 0, 360, skin, cv::FILLED, cv::LINE_AA);
  const int eye_dy = static_cast<int>(axes.height * 0.2);
  const int eye_dx = static_cast<int>(axes.width * 0.4);
  const cv::Size eye(std::max(1, size / 24), std::max(1, size / 40));
  cv::ellipse(img, centre + cv::Point(-eye_dx, -eye_dy), eye, 0, 0, 360, {60, 50, 50}, cv::FILLED, cv::LINE_AA);
  cv::ellipse(img, centre + cv::Point(eye_dx, -eye_dy), eye, 0, 0, 360, {60, 50, 50}, cv::FILLED, cv::LINE_AA);
  cv::ellipse(img, centre + cv::Point(0, static_cast<int>(axes.height * 0.45)),
              cv::Size(axes.width / 3, std::max(1, size / 48)), 0, 0, 180, {90, 90, 160}, 1, cv::LINE_AA);
  cv::GaussianBlur(img, img, cv::Size(0, 0), s / 48.0);
  cv::Mat noise(size, size, CV_8UC3);
  cv::randn(noise, cv::Scalar::all(0), cv::Scalar::all(4));
  img += noise;
  return from_mat(img);
}

RgbImage synthetic_caricature(int size, std::uint64_t seed) {
  cv::RNG rng(seed * 104729 + 3);
  const double s = size;
  cv::Mat img(size, size, CV_8UC3, jitter(rng, {235, 240, 245}, 15));
  // Diagonal hatching in the background.
  const int spacing = std::max(3, size / 12);
  for (int k = -size; k < 2 * size; k += spacing) {
    cv::line(img, {k, 0}, {k - size, size}, {170, 170, 170}, 1, cv::LINE_8);
  }
  const cv::Point centre(static_cast<int>(s * rng.uniform(0.45, 0.55)), static_cast<int>(s * rng.uniform(0.42, 0.5)));
  // Big cranium, narrow chin.
  std::vector<cv::Point> head;
  const double rx = s * rng.uniform(0.34, 0.42);
  const double ry = s * rng.uniform(0.3, 0.36);
  const double chin = s * rng.uniform(0.4, 0.48);
  for (int i = 0; i < 48; ++i) {
    const double a = 2 * M_PI * i / 48;
    const double sy = std::sin(a);
    const double widen = sy > 0 ? 1.0 - 0.55 * sy : 1.0;
    head.emplace_back(static_cast<int>(centre.x + rx * widen * std::cos(a)),
                      static_cast<int>(centre.y + (sy > 0 ? chin : ry) * sy));
  }
  auto skin = jitter(rng, {80, 170, 250}, 25);
  cv::fillPoly(img, std::vector<std::vector<cv::Point>>{head}, skin, cv::LINE_8);
  const int thick = std::max(2, size / 24);
  cv::polylines(img, head, true, {0, 0, 0}, thick, cv::LINE_8);
  const int eye_dx = static_cast<int>(rx * 0.45);
  const int eye_r = std::max(2, static_cast<int>(s * rng.uniform(0.07, 0.1)));
  for (int side : {-1, 1}) {
    const cv::Point e = centre + cv::Point(side * eye_dx, -static_cast<int>(ry * 0.15));
    cv::circle(img, e, eye_r, {255, 255, 255}, cv::FILLED, cv::LINE_8);
    cv::circle(img, e, eye_r, {0, 0, 0}, thick / 2 + 1, cv::LINE_8);
    cv::circle(img, e, std::max(1, eye_r / 3), {0, 0, 0}, cv::FILLED, cv::LINE_8);
  }
  cv::line(img, centre + cv::Point(-static_cast<int>(rx * 0.3), static_cast<int>(chin * 0.5)),
           centre + cv::Point(static_cast<int>(rx * 0.3), static_cast<int>(chin * 0.45)), {0, 0, 160}, thick,
           cv::LINE_8);
  return from_mat(img);
}

void write_corpus(const fs::path& root, int n_photos, int n_caricatures, int size, std::uint64_t seed) {
  fs::create_directories(root / "photos");
  fs::create_directories(root / "caricatures");
  char name[32];
  for (int i = 0; i < n_photos; ++i) {
    std::snprintf(name, sizeof name, "p%02d.png", i);
    write_image(root / "photos" / name, synthetic_photo(size, seed * 1000 + i));
  }
  for (int i = 0; i < n_caricatures; ++i) {
    std::snprintf(name, sizeof name, "c%02d.png", i);
    write_image(root / "caricatures" / name, synthetic_caricature(size, seed * 1000 + i));
  }
}

fs::path random_extractor_path() {
  static std::once_flag once;
  static fs::path path;
  std::call_once(once, [] {
    path = fs::temp_directory_path() / ("photocari-test-vgg-" + std::to_string(::getpid()) + ".pt");
    write_random_extractor(path, "relu3_1", 1234);
    std::atexit([] {
      std::error_code ec;
      fs::remove(path, ec);
    });
  });
  return path;
}

TrainConfig desk_config(const fs::path& root, int64_t steps1, int64_t steps2) {
  auto cfg = desk_preset();
  cfg.data_root = root / "data";
  cfg.checkpoint_dir = root / "ckpt";
  cfg.extractor_weights = random_extractor_path();
  cfg.hp.steps_stage1 = steps1;
  cfg.hp.steps_stage2 = steps2;
  cfg.log_every = 1;
  cfg.save_every = 1000000;
  cfg.seed = 7;
  return cfg;
}

ImageTensor random_image(int64_t size, Domain d, std::uint64_t seed, torch::ScalarType dtype) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  auto t = at::rand({1, 3, size, size}, gen, torch::TensorOptions().dtype(dtype)) * 2 - 1;
  return {t, d};
}

double central_difference(const std::function<double(const torch::Tensor&)>& f, const torch::Tensor& x,
                          int64_t flat_index, double eps) {
  auto plus = x.detach().clone();
  auto minus = x.detach().clone();
  plus.view(-1)[flat_index] += eps;
  minus.view(-1)[flat_index] -= eps;
  return (f(plus) - f(minus)) / (2 * eps);
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace photocari::testing
