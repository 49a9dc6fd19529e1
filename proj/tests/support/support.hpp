#ifndef PHOTOCARI_TEST_SUPPORT_HPP
#define PHOTOCARI_TEST_SUPPORT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include <torch/torch.h>

#include "photocari/config.hpp"
#include "photocari/image.hpp"
#include "photocari/image_io.hpp"

namespace photocari::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Smooth shaded face on a gradient background.
RgbImage synthetic_photo(int size, std::uint64_t seed);
// Flat colours, heavy outlines, hatching and an exaggerated head shape.
RgbImage synthetic_caricature(int size, std::uint64_t seed);

// <root>/photos/p00.png ... and <root>/caricatures/c00.png ...
void write_corpus(const std::filesystem::path& root, int n_photos, int n_caricatures, int size = 64,
                  std::uint64_t seed = 1);

// Random VGG prefix deep enough for the default taps; cached per process.
std::filesystem::path random_extractor_path();

// Desk preset pointing at `root`/data, `root`/ckpt and the random extractor,
// with short schedules.
TrainConfig desk_config(const std::filesystem::path& root, int64_t steps1 = 10, int64_t steps2 = 10);

// Batch [1, 3, size, size] of uniform values in [-1, 1].
ImageTensor random_image(int64_t size, Domain d, std::uint64_t seed, torch::ScalarType dtype = torch::kFloat32);

// Central difference of scalar f at x[flat_index].
double central_difference(const std::function<double(const torch::Tensor&)>& f, const torch::Tensor& x,
                          int64_t flat_index, double eps);

// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor = 1e-8);

}  // namespace photocari::testing

#endif  // PHOTOCARI_TEST_SUPPORT_HPP
