#include "photocari/style_losses.hpp"

#include <sstream>

#include "photocari/errors.hpp"

namespace photocari {

torch::Tensor reconstruction_loss(const torch::Tensor& x_rec, const torch::Tensor& x, const torch::Tensor& y_rec,
                                  const torch::Tensor& y) {
  check_same_shape(x_rec, x, "reconstruction_loss (photo)");
  check_same_shape(y_rec, y, "reconstruction_loss (caricature)");
  return (x_rec - x).abs().mean() + (y_rec - y).abs().mean();
}

torch::Tensor kl_loss(const torch::Tensor& mu_a, const torch::Tensor& mu_b) {
  auto one = [](const torch::Tensor& mu) { return 0.5 * mu.pow(2).flatten(1).sum(1).mean(); };
  return one(mu_a) + one(mu_b);
}

torch::Tensor adv_generator_term(const torch::Tensor& fake_logits, GanLoss mode) {
  if (mode == GanLoss::NonSaturating) {
    return -torch::log_sigmoid(fake_logits).mean();
  }
  return torch::log_sigmoid(-fake_logits).mean();
}

torch::Tensor adv_discriminator_term(const torch::Tensor& real_logits, const torch::Tensor& fake_logits) {
  return -torch::log_sigmoid(real_logits).mean() - torch::log_sigmoid(-fake_logits).mean();
}

torch::Tensor adv_style_gen_loss(const StyleLogits& fake_logits, GanLoss mode) {
  auto total = adv_generator_term(fake_logits[0], mode);
  for (std::size_t i = 1; i < fake_logits.size(); ++i) {
    total = total + adv_generator_term(fake_logits[i], mode);
  }
  return total;
}

torch::Tensor adv_style_disc_loss(const StyleLogits& real_logits, const StyleLogits& fake_logits) {
  auto total = adv_discriminator_term(real_logits[0], fake_logits[0]);
  for (std::size_t i = 1; i < real_logits.size(); ++i) {
    total = total + adv_discriminator_term(real_logits[i], fake_logits[i]);
  }
  return total;
}

namespace {

StyleLogits fake_logits(StyleDiscriminatorSet& disc, const StyleFakes& f) {
  return {discriminate_logits(disc, f.x_r_low, Scale::Low), discriminate_logits(disc, f.x_r, Scale::Full),
          discriminate_logits(disc, f.y_r_low, Scale::Low), discriminate_logits(disc, f.y_r, Scale::Full)};
}

}  // namespace

torch::Tensor adv_style_gen_loss(StyleDiscriminatorSet& disc, const StyleFakes& fakes, GanLoss mode) {
  return adv_style_gen_loss(fake_logits(disc, fakes), mode);
}

torch::Tensor adv_style_disc_loss(StyleDiscriminatorSet& disc, const StyleReals& reals, const StyleFakes& fakes) {
  // x_r is judged by the caricature discriminators against real caricatures y.
  StyleLogits real = {discriminate_logits(disc, reals.y_low, Scale::Low), discriminate_logits(disc, reals.y, Scale::Full),
                      discriminate_logits(disc, reals.x_low, Scale::Low), discriminate_logits(disc, reals.x, Scale::Full)};
  return adv_style_disc_loss(real, fake_logits(disc, fakes));
}

torch::Tensor feature_distance(const torch::Tensor& a, const torch::Tensor& b) {
  check_same_shape(a, b, "feature_distance");
  return (a - b).flatten(1).norm(2, {1}).mean();
}

torch::Tensor content_loss(PerceptualExtractor& extractor, const std::string& layer, const torch::Tensor& x,
                           const torch::Tensor& x_r, const torch::Tensor& y, const torch::Tensor& y_r) {
  check_same_shape(x, x_r, "content_loss (photo)");
  check_same_shape(y, y_r, "content_loss (caricature)");
  const int64_t bx = x.size(0);
  const int64_t by = y.size(0);
  auto feats = extractor->forward(torch::cat({x, x_r, y, y_r}, 0), layer);
  auto parts = feats.split_with_sizes({bx, bx, by, by}, 0);
  return feature_distance(parts[0], parts[1]) + feature_distance(parts[2], parts[3]);
}

torch::Tensor gram(const torch::Tensor& features) {
  if (features.dim() != 4) {
    std::ostringstream msg;
    msg << "gram expects [B, C, H, W] features, got " << features.sizes();
    throw ShapeMismatch(msg.str());
  }
  auto flat = features.flatten(2);
  return torch::bmm(flat, flat.transpose(1, 2));
}

torch::Tensor style_distance(const torch::Tensor& m, const torch::Tensor& n) {
  if (m.dim() != 4 || n.dim() != 4) {
    throw ShapeMismatch("style_distance expects [B, C, H, W] features");
  }
  if (m.size(1) != n.size(1)) {
    throw ChannelMismatch("style_distance: " + std::to_string(m.size(1)) + " vs " + std::to_string(n.size(1)) +
                          " channels");
  }
  check_same_shape(m, n, "style_distance");
  const double norm = 4.0 * static_cast<double>(m.size(1) * m.size(2) * m.size(3));
  return (gram(m) - gram(n)).pow(2).sum({1, 2}).mean() / norm;
}

torch::Tensor contrastive(const torch::Tensor& i1, const torch::Tensor& i2, bool similar, double margin) {
  if (!(margin > 0.0)) {
    throw ConfigError("contrastive margin must be positive");
  }
  if (similar) {
    return 0.5 * style_distance(i1, i2).pow(2);
  }
  return 0.5 * torch::relu(margin - style_distance(i2, i1)).pow(2);
}

torch::Tensor contrastive_style_loss(const StyleFeatures& f, const HyperParams& hp) {
  return hp.alpha1 * contrastive(f.x_r, f.x, false, hp.mg) + hp.alpha2 * contrastive(f.x_r, f.y, true, hp.mg) +
         hp.alpha3 * contrastive(f.y_r, f.y, false, hp.mg) + hp.alpha4 * contrastive(f.y_r, f.x, true, hp.mg);
}

torch::Tensor contrastive_style_loss(PerceptualExtractor& extractor, const std::string& layer, const torch::Tensor& x_r,
                                     const torch::Tensor& y_r, const torch::Tensor& x, const torch::Tensor& y,
                                     const HyperParams& hp) {
  auto feats = extractor->forward(torch::cat({x_r, y_r, x, y}, 0), layer);
  auto parts = feats.split_with_sizes({x_r.size(0), y_r.size(0), x.size(0), y.size(0)}, 0);
  return contrastive_style_loss({parts[0], parts[1], parts[2], parts[3]}, hp);
}

}  // namespace photocari
