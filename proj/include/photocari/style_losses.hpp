#ifndef PHOTOCARI_STYLE_LOSSES_HPP
#define PHOTOCARI_STYLE_LOSSES_HPP

#include <array>

#include <torch/torch.h>

#include "photocari/backbone.hpp"
#include "photocari/config.hpp"
#include "photocari/extractor.hpp"
#include "photocari/image.hpp"

namespace photocari {

// Stage-1 objectives. Every function returns a differentiable 0-dim tensor.

// mean|x_rec - x| + mean|y_rec - y|.
torch::Tensor reconstruction_loss(const torch::Tensor& x_rec, const torch::Tensor& x,
                                  const torch::Tensor& y_rec, const torch::Tensor& y);

// KL(N(mu, I) || N(0, I)) = 0.5 * sum(mu^2), averaged over the batch, summed
// over both domains.
torch::Tensor kl_loss(const torch::Tensor& mu_a, const torch::Tensor& mu_b);

// Per-term generator adversarial value for one logit map, mean over batch and
// patches. NonSaturating: -log D; Minimax: log(1 - D).
torch::Tensor adv_generator_term(const torch::Tensor& fake_logits, GanLoss mode);

// -mean log D(real) - mean log(1 - D(fake)).
torch::Tensor adv_discriminator_term(const torch::Tensor& real_logits, const torch::Tensor& fake_logits);

// Logit maps for the four (domain, scale) combinations in the order
// D_b^l(x_r^l), D_b^r(x_r), D_a^l(y_r^l), D_a^r(y_r).
using StyleLogits = std::array<torch::Tensor, 4>;

torch::Tensor adv_style_gen_loss(const StyleLogits& fake_logits, GanLoss mode = GanLoss::NonSaturating);
torch::Tensor adv_style_disc_loss(const StyleLogits& real_logits, const StyleLogits& fake_logits);

// Rendered images at both scales for both streams.
struct StyleFakes {
  ImageTensor x_r_low, x_r;  // photo rendered as caricature
  ImageTensor y_r_low, y_r;  // caricature rendered as photo
};

struct StyleReals {
  ImageTensor x_low, x;
  ImageTensor y_low, y;
};

torch::Tensor adv_style_gen_loss(StyleDiscriminatorSet& disc, const StyleFakes& fakes,
                                 GanLoss mode = GanLoss::NonSaturating);
torch::Tensor adv_style_disc_loss(StyleDiscriminatorSet& disc, const StyleReals& reals,
                                  const StyleFakes& fakes);

// Batch-mean L2 distance between feature maps.
torch::Tensor feature_distance(const torch::Tensor& a, const torch::Tensor& b);

// ||xi(x) - xi(x_r)|| + ||xi(y) - xi(y_r)|| at `layer`.
torch::Tensor content_loss(PerceptualExtractor& extractor, const std::string& layer,
                           const torch::Tensor& x, const torch::Tensor& x_r,
                           const torch::Tensor& y, const torch::Tensor& y_r);

// Unnormalised Gram matrices: [B, C, H, W] -> [B, C, C].
torch::Tensor gram(const torch::Tensor& features);

// d(m, n) = sum_ij (G^m_ij - G^n_ij)^2 / (4 C H W), averaged over the batch.
// Throws ChannelMismatch / ShapeMismatch.
torch::Tensor style_distance(const torch::Tensor& m, const torch::Tensor& n);

// Ctr(i1, i2, l) = 0.5 [l d(i1, i2)^2 + (1 - l) max(mg - d(i2, i1), 0)^2].
// `similar` is the label l.
torch::Tensor contrastive(const torch::Tensor& i1, const torch::Tensor& i2, bool similar, double margin);

// Style features of the four images at the style layer.
struct StyleFeatures {
  torch::Tensor x_r, y_r, x, y;
};

// alpha1 Ctr(x_r, x, 0) + alpha2 Ctr(x_r, y, 1) + alpha3 Ctr(y_r, y, 0)
//   + alpha4 Ctr(y_r, x, 1).
// Each rendered image is pulled towards the style of the other domain's input
// and pushed away from its own domain's input.
torch::Tensor contrastive_style_loss(const StyleFeatures& f, const HyperParams& hp);

torch::Tensor contrastive_style_loss(PerceptualExtractor& extractor, const std::string& layer,
                                     const torch::Tensor& x_r, const torch::Tensor& y_r,
                                     const torch::Tensor& x, const torch::Tensor& y,
                                     const HyperParams& hp);

}  // namespace photocari

#endif  // PHOTOCARI_STYLE_LOSSES_HPP
