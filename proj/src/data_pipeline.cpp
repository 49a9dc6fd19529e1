#include "photocari/data_pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <random>

#include "photocari/errors.hpp"

namespace photocari {

namespace fs = std::filesystem;
namespace F = torch::nn::functional;

namespace {

std::vector<fs::path> scan_domain(const fs::path& dir, std::vector<fs::path>& skipped) {
  if (!fs::is_directory(dir)) {
    throw MissingDomainDir("missing domain directory " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename().string().front() != '.') {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  std::vector<fs::path> kept;
  kept.reserve(files.size());
  for (auto& f : files) {
    if (decode_image(f)) {
      kept.push_back(std::move(f));
    } else {
      std::cerr << "warning: skipping unreadable image " << f.string() << "\n";
      skipped.push_back(std::move(f));
    }
  }
  if (kept.empty()) {
    throw MissingDomainDir("no decodable images in " + dir.string());
  }
  return kept;
}

}  // namespace

CorpusIndex load_corpus(const fs::path& root) {
  CorpusIndex index;
  index.root = root;
  index.photo_paths = scan_domain(root / "photos", index.skipped);
  index.caricature_paths = scan_domain(root / "caricatures", index.skipped);
  return index;
}

std::pair<CorpusIndex, CorpusIndex> split_holdout(const CorpusIndex& index, std::size_t holdout) {
  CorpusIndex train{index.root, {}, {}, index.skipped};
  CorpusIndex eval{index.root, {}, {}, {}};
  auto split = [holdout](const std::vector<fs::path>& all, std::vector<fs::path>& a, std::vector<fs::path>& b) {
    const std::size_t keep = all.size() > holdout ? all.size() - holdout : 0;
    a.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep));
    b.assign(all.begin() + static_cast<std::ptrdiff_t>(keep), all.end());
  };
  split(index.photo_paths, train.photo_paths, eval.photo_paths);
  split(index.caricature_paths, train.caricature_paths, eval.caricature_paths);
  if (train.photo_paths.empty() || train.caricature_paths.empty()) {
    throw MissingDomainDir("holdout of " + std::to_string(holdout) + " leaves a domain without training images");
  }
  return {std::move(train), std::move(eval)};
}

ImageTensor preprocess(const RgbImage& raw, int64_t size, Domain domain) {
  if (size < 16 || size % 2 != 0) {
    throw BadSize("image size must be even and >= 16, got " + std::to_string(size));
  }
  if (raw.height < 1 || raw.width < 1 ||
      raw.pixels.size() != static_cast<std::size_t>(raw.height * raw.width * 3)) {
    throw BadSize("malformed raw image");
  }
  auto hwc = torch::from_blob(const_cast<std::uint8_t*>(raw.pixels.data()), {raw.height, raw.width, 3},
                              torch::kUInt8);
  auto chw = hwc.permute({2, 0, 1}).to(torch::kFloat32).unsqueeze(0);
  chw = chw / 127.5 - 1.0;
  if (raw.height != size || raw.width != size) {
    chw = F::interpolate(chw, F::InterpolateFuncOptions()
                                  .size(std::vector<int64_t>{size, size})
                                  .mode(torch::kBilinear)
                                  .align_corners(false));
  }
  return {chw.clamp(-1.0, 1.0).contiguous(), domain};
}

ImageBank::ImageBank(CorpusIndex index, int64_t image_size, std::size_t cache_capacity)
    : index_(std::move(index)), image_size_(image_size), cache_capacity_(cache_capacity) {
  if (image_size_ < 16 || image_size_ % 2 != 0) {
    throw BadSize("image size must be even and >= 16, got " + std::to_string(image_size_));
  }
}

torch::Tensor ImageBank::image(Domain d, int64_t i) {
  auto& cache = d == Domain::Photo ? photo_cache_ : cari_cache_;
  if (auto it = cache.find(i); it != cache.end()) {
    return it->second;
  }
  const auto& path = index_.paths(d).at(static_cast<std::size_t>(i));
  auto raw = decode_image(path);
  if (!raw) {
    throw IoError("image became unreadable: " + path.string());
  }
  auto t = preprocess(*raw, image_size_, d).data;
  if (photo_cache_.size() + cari_cache_.size() < cache_capacity_) {
    cache.emplace(i, t);
  }
  return t;
}

UnpairedBatch sample_batch(ImageBank& bank, int64_t batch, std::uint64_t seed) {
  if (batch < 1) {
    throw BadSize("batch must be >= 1");
  }
  std::mt19937_64 rng(seed);
  UnpairedBatch out;
  auto draw = [&](Domain d, std::vector<int64_t>& ids) {
    std::uniform_int_distribution<int64_t> pick(0, bank.count(d) - 1);
    std::vector<torch::Tensor> images;
    for (int64_t b = 0; b < batch; ++b) {
      ids.push_back(pick(rng));
      images.push_back(bank.image(d, ids.back()));
    }
    return ImageTensor{torch::cat(images, 0), d};
  };
  out.photo = draw(Domain::Photo, out.photo_ids);
  out.caricature = draw(Domain::Caricature, out.caricature_ids);
  return out;
}

UnpairedBatch sample_batch(const CorpusIndex& index, int64_t batch, int64_t image_size, std::uint64_t seed) {
  ImageBank bank(index, image_size, 0);
  return sample_batch(bank, batch, seed);
}

}  // namespace photocari
