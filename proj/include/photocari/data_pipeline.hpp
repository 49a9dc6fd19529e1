#ifndef PHOTOCARI_DATA_PIPELINE_HPP
#define PHOTOCARI_DATA_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <utility>
#include <vector>

#include "photocari/image.hpp"
#include "photocari/image_io.hpp"

namespace photocari {

// Unpaired two-domain corpus laid out as <root>/photos and <root>/caricatures.
// Identity labels encoded in file names are ignored.
struct CorpusIndex {
  std::filesystem::path root;
  std::vector<std::filesystem::path> photo_paths;
  std::vector<std::filesystem::path> caricature_paths;
  // Files that failed to decode during load_corpus; each produced a warning.
  std::vector<std::filesystem::path> skipped;

  const std::vector<std::filesystem::path>& paths(Domain d) const {
    return d == Domain::Photo ? photo_paths : caricature_paths;
  }
};

// Scans both domain directories, keeps decodable images sorted by file name.
// Throws MissingDomainDir if a directory is absent or ends up empty.
CorpusIndex load_corpus(const std::filesystem::path& root);

// Reserves the last `holdout` images of each domain for evaluation.
// Returns {train, eval}. Throws MissingDomainDir if training would be empty.
std::pair<CorpusIndex, CorpusIndex> split_holdout(const CorpusIndex& index, std::size_t holdout);

// Bilinear resize (half-pixel centres) to size x size and linear map
// [0, 255] -> [-1, 1]. Returns a [1, 3, size, size] batch.
// Throws BadSize when size is odd or below 16.
ImageTensor preprocess(const RgbImage& raw, int64_t size, Domain domain = Domain::Photo);

struct UnpairedBatch {
  ImageTensor photo;
  ImageTensor caricature;
  std::vector<int64_t> photo_ids;  // indices into CorpusIndex::photo_paths
  std::vector<int64_t> caricature_ids;
};

// Decodes and caches preprocessed corpus images on first use.
class ImageBank {
 public:
  ImageBank(CorpusIndex index, int64_t image_size, std::size_t cache_capacity = 4096);

  const CorpusIndex& index() const { return index_; }
  int64_t image_size() const { return image_size_; }
  int64_t count(Domain d) const { return static_cast<int64_t>(index_.paths(d).size()); }

  // [1, 3, S, S] tensor for image `i` of domain `d`. Throws IoError if the
  // file stopped being decodable after indexing.
  torch::Tensor image(Domain d, int64_t i);

 private:
  CorpusIndex index_;
  int64_t image_size_;
  std::size_t cache_capacity_;
  std::unordered_map<int64_t, torch::Tensor> photo_cache_;
  std::unordered_map<int64_t, torch::Tensor> cari_cache_;
};

// Uniform draws with replacement from each domain; deterministic in `seed`.
UnpairedBatch sample_batch(ImageBank& bank, int64_t batch, std::uint64_t seed);
UnpairedBatch sample_batch(const CorpusIndex& index, int64_t batch, int64_t image_size, std::uint64_t seed);

}  // namespace photocari

#endif  // PHOTOCARI_DATA_PIPELINE_HPP
