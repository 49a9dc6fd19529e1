#include "photocari/dpm.hpp"

#include <cmath>

#include <ATen/CPUGeneratorImpl.h>

#include "photocari/errors.hpp"
#include "photocari/style_losses.hpp"

namespace photocari {

namespace nn = torch::nn;
namespace F = torch::nn::functional;

DpmNetImpl::DpmNetImpl(const DpmOptions& opts) : opts_(opts) {
  const int64_t in = 3 * opts.input_size * opts.input_size;
  fc1_ = register_module("fc1", nn::Linear(in, 512));
  fc2_ = register_module("fc2", nn::Linear(512, 256));
  fc3_ = register_module("fc3", nn::Linear(256, 128));
  fc4_ = register_module("fc4", nn::Linear(128, opts.n_free * 2));
}

torch::Tensor DpmNetImpl::forward(const torch::Tensor& images) {
  auto x = F::interpolate(images, F::InterpolateFuncOptions()
                                      .size(std::vector<int64_t>{opts_.input_size, opts_.input_size})
                                      .mode(torch::kBilinear)
                                      .align_corners(false));
  x = x.flatten(1);
  x = F::leaky_relu(fc1_->forward(x), F::LeakyReLUFuncOptions().negative_slope(0.2));
  x = F::leaky_relu(fc2_->forward(x), F::LeakyReLUFuncOptions().negative_slope(0.2));
  x = F::leaky_relu(fc3_->forward(x), F::LeakyReLUFuncOptions().negative_slope(0.2));
  x = torch::tanh(fc4_->forward(x)) * opts_.d_max;
  // A saturated tanh times d_max can round above d_max in single precision.
  double limit = opts_.d_max;
  if (x.scalar_type() == torch::kFloat32) {
    float f = static_cast<float>(limit);
    if (static_cast<double>(f) > limit) {
      f = std::nextafter(f, 0.0f);
    }
    limit = f;
  }
  x = x.clamp(-limit, limit);
  return x.view({images.size(0), opts_.n_free, 2});
}

DpmPairImpl::DpmPairImpl(const DpmOptions& opts) {
  photo = register_module("photo", DpmNet(opts));
  cari = register_module("cari", DpmNet(opts));
}

WarpDiscriminatorSetImpl::WarpDiscriminatorSetImpl(int64_t image_size, int64_t base_channels)
    : image_size_(image_size) {
  d_photo_warp = register_module("d_photo_warp", PatchDiscriminator(base_channels));
  d_cari_warp = register_module("d_cari_warp", PatchDiscriminator(base_channels));
}

torch::Tensor warp_discriminate_logits(WarpDiscriminatorSet& set, const ImageTensor& image) {
  check_image(image, "warp discriminator", set->image_size());
  return set->at(image.domain)->forward(image.data);
}

DisplacementField predict_displacements(DpmNet& net, const ImageTensor& image) {
  check_image(image, "predict_displacements");
  return {net->forward(image.data), net->options().d_max};
}

ImageTensor perturb_input(const ImageTensor& image, double sigma, double clamp, std::uint64_t seed) {
  if (!(sigma > 0.0)) {
    throw ConfigError("perturbation sigma must be positive");
  }
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  auto noise = at::randn(image.data.sizes(), gen, image.data.options().requires_grad(false)) * sigma;
  noise = noise.clamp(-clamp, clamp);
  return {(image.data + noise).clamp(-1.0, 1.0), image.domain};
}

DisplacementField exaggerate(const DisplacementField& field, double alpha) {
  if (!(alpha >= 0.0)) {
    throw ConfigError("exaggeration alpha must be >= 0");
  }
  return {field.vectors * alpha, field.bound * alpha};
}

torch::Tensor adv_warp_gen_loss(const torch::Tensor& x_to_y_logits, const torch::Tensor& y_to_x_logits,
                                GanLoss mode) {
  return adv_generator_term(x_to_y_logits, mode) + adv_generator_term(y_to_x_logits, mode);
}

torch::Tensor adv_warp_disc_loss(const torch::Tensor& real_cari_logits, const torch::Tensor& real_photo_logits,
                                 const torch::Tensor& x_to_y_logits, const torch::Tensor& y_to_x_logits) {
  return adv_discriminator_term(real_cari_logits, x_to_y_logits) +
         adv_discriminator_term(real_photo_logits, y_to_x_logits);
}

torch::Tensor adv_warp_gen_loss(WarpDiscriminatorSet& disc, const ImageTensor& x_to_y, const ImageTensor& y_to_x,
                                GanLoss mode) {
  return adv_warp_gen_loss(warp_discriminate_logits(disc, x_to_y), warp_discriminate_logits(disc, y_to_x), mode);
}

torch::Tensor adv_warp_disc_loss(WarpDiscriminatorSet& disc, const ImageTensor& real_photo,
                                 const ImageTensor& real_cari, const ImageTensor& x_to_y,
                                 const ImageTensor& y_to_x) {
  return adv_warp_disc_loss(warp_discriminate_logits(disc, real_cari), warp_discriminate_logits(disc, real_photo),
                            warp_discriminate_logits(disc, x_to_y), warp_discriminate_logits(disc, y_to_x));
}

torch::Tensor identity_loss(const torch::Tensor& x_to_y, const torch::Tensor& x, const torch::Tensor& y_to_x,
                            const torch::Tensor& y) {
  check_same_shape(x_to_y, x, "identity_loss (photo stream)");
  check_same_shape(y_to_x, y, "identity_loss (caricature stream)");
  return (x_to_y - x).abs().mean() + (y_to_x - y).abs().mean();
}

}  // namespace photocari
