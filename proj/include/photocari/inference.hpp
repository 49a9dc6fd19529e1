#ifndef PHOTOCARI_INFERENCE_HPP
#define PHOTOCARI_INFERENCE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "photocari/data_pipeline.hpp"
#include "photocari/model.hpp"

namespace photocari {

enum class Direction { PhotoToCari, CariToPhoto };

struct TranslateOptions {
  double alpha = 1.0;                       // exaggeration scale
  std::optional<std::uint64_t> noise_seed;  // perturb the DPM input when set
  double noise_sigma = 1.0;
  double noise_clamp = 0.1;
  bool warp_cari_to_photo = false;  // the reverse direction renders only by default
};

struct Translation {
  ImageTensor rendered;  // cross-domain decode before warping
  ImageTensor output;    // final image (== rendered when no warp ran)
  std::optional<DisplacementField> displacements;  // after exaggeration
  bool warped = false;
};

// Deterministic unless noise_seed is given. A stage-1 checkpoint yields the
// render only (with a warning) for PhotoToCari, and throws StageMismatch when
// warp_cari_to_photo is requested.
Translation translate(Checkpoint& ckpt, const ImageTensor& image, Direction direction,
                      const TranslateOptions& opts = {});

// Montage with one row per input: the input, then one cell per alpha (no
// noise), then one cell per seed at `seed_alpha`. Returns [3, rows*S, cols*S].
torch::Tensor make_montage(Checkpoint& ckpt, const std::vector<ImageTensor>& inputs,
                           const std::vector<double>& alphas, const std::vector<std::uint64_t>& seeds,
                           double seed_alpha = 1.0);

// Writes make_montage to `out`. Throws IoError.
void emit_grid(Checkpoint& ckpt, const std::vector<ImageTensor>& inputs, const std::vector<double>& alphas,
               const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out,
               double seed_alpha = 1.0);

struct StyleGapReport {
  int64_t n = 0;
  double to_caricature = 0.0;  // mean d(xi(x_r), xi(y))
  double to_photo = 0.0;       // mean d(xi(x_r), xi(x))
  double ratio = 0.0;          // to_caricature / to_photo
};

// Style-distance separation of rendered photos on `n` sampled photos, each
// paired with a uniformly drawn caricature.
StyleGapReport eval_style_gap(Checkpoint& ckpt, const CorpusIndex& corpus, int64_t n, std::uint64_t seed = 0);

}  // namespace photocari

#endif  // PHOTOCARI_INFERENCE_HPP
