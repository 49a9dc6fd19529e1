#ifndef PHOTOCARI_DPM_HPP
#define PHOTOCARI_DPM_HPP

#include <cstdint>

#include <torch/torch.h>

#include "photocari/backbone.hpp"
#include "photocari/config.hpp"
#include "photocari/image.hpp"
#include "photocari/tps_warp.hpp"

namespace photocari {

struct DpmOptions {
  int64_t n_free = 16;
  double d_max = 0.1;
  int64_t input_size = 32;  // images are resized to input_size^2 and flattened
};

// Distortion prediction module: four fully connected stages
// (3*32*32 -> 512 -> 256 -> 128 -> 2 n_free) with LeakyReLU between them and
// a tanh output scaled by d_max.
class DpmNetImpl : public torch::nn::Module {
 public:
  explicit DpmNetImpl(const DpmOptions& opts);

  torch::Tensor forward(const torch::Tensor& images);  // [B, n_free, 2]
  const DpmOptions& options() const { return opts_; }

 private:
  DpmOptions opts_;
  torch::nn::Linear fc1_{nullptr}, fc2_{nullptr}, fc3_{nullptr}, fc4_{nullptr};
};
TORCH_MODULE(DpmNet);

// DPM_a (photo input) and DPM_b (caricature input).
class DpmPairImpl : public torch::nn::Module {
 public:
  explicit DpmPairImpl(const DpmOptions& opts);
  DpmNet& at(Domain d) { return d == Domain::Photo ? photo : cari; }

  DpmNet photo{nullptr}, cari{nullptr};
};
TORCH_MODULE(DpmPair);

// D_a and D_b over full-scale warped outputs, indexed by the judged domain.
class WarpDiscriminatorSetImpl : public torch::nn::Module {
 public:
  WarpDiscriminatorSetImpl(int64_t image_size, int64_t base_channels);
  PatchDiscriminator& at(Domain d) { return d == Domain::Photo ? d_photo_warp : d_cari_warp; }
  int64_t image_size() const { return image_size_; }

  PatchDiscriminator d_photo_warp{nullptr}, d_cari_warp{nullptr};

 private:
  int64_t image_size_;
};
TORCH_MODULE(WarpDiscriminatorSet);

torch::Tensor warp_discriminate_logits(WarpDiscriminatorSet& set, const ImageTensor& image);

// Throws ShapeMismatch for non-image input.
DisplacementField predict_displacements(DpmNet& net, const ImageTensor& image);

// image + clamp(sigma * N(0, 1), -clamp, clamp), then clamped to [-1, 1].
ImageTensor perturb_input(const ImageTensor& image, double sigma, double clamp, std::uint64_t seed);

// Scales vectors and bound by alpha (alpha >= 0).
DisplacementField exaggerate(const DisplacementField& field, double alpha);

// -E log D_b(x^y) - E log D_a(y^x) (non-saturating) or the minimax form.
torch::Tensor adv_warp_gen_loss(const torch::Tensor& x_to_y_logits, const torch::Tensor& y_to_x_logits,
                                GanLoss mode = GanLoss::NonSaturating);
torch::Tensor adv_warp_disc_loss(const torch::Tensor& real_cari_logits, const torch::Tensor& real_photo_logits,
                                 const torch::Tensor& x_to_y_logits, const torch::Tensor& y_to_x_logits);

torch::Tensor adv_warp_gen_loss(WarpDiscriminatorSet& disc, const ImageTensor& x_to_y, const ImageTensor& y_to_x,
                                GanLoss mode = GanLoss::NonSaturating);
torch::Tensor adv_warp_disc_loss(WarpDiscriminatorSet& disc, const ImageTensor& real_photo,
                                 const ImageTensor& real_cari, const ImageTensor& x_to_y,
                                 const ImageTensor& y_to_x);

// mean|x^y - x| + mean|y^x - y|.
torch::Tensor identity_loss(const torch::Tensor& x_to_y, const torch::Tensor& x,
                            const torch::Tensor& y_to_x, const torch::Tensor& y);

}  // namespace photocari

#endif  // PHOTOCARI_DPM_HPP
