#ifndef PHOTOCARI_BACKBONE_HPP
#define PHOTOCARI_BACKBONE_HPP

#include <optional>

#include <torch/torch.h>

#include "photocari/image.hpp"

namespace photocari {

struct BackboneOptions {
  int64_t image_size = 64;
  int64_t latent_channels = 64;  // C_lat; the stem width is C_lat / 4

  int64_t base_channels() const { return latent_channels / 4; }
};

// conv3x3-IN-ReLU-conv3x3-IN with an identity skip.
class ResidualBlockImpl : public torch::nn::Module {
 public:
  explicit ResidualBlockImpl(int64_t channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(ResidualBlock);

// Domain-specific encoder: a stride-1 stem and two stride-2 stages, followed
// by the residual block shared with the other domain's encoder. The shared
// block is held by handle but registered only on the owning BackbonePair, so
// its parameters are listed exactly once.
class EncoderImpl : public torch::nn::Module {
 public:
  EncoderImpl(const BackboneOptions& opts, torch::nn::Sequential shared);
  torch::Tensor forward(const torch::Tensor& x);  // latent mean
  const torch::nn::Sequential& shared_block() const { return shared_; }

 private:
  torch::nn::Sequential front_{nullptr};
  torch::nn::Sequential shared_{nullptr};
};
TORCH_MODULE(Encoder);

struct DecodedPair {
  torch::Tensor low;   // [B, 3, S/2, S/2]
  torch::Tensor full;  // [B, 3, S, S]
};

// Two-branch decoder: shared residual block, then two upsampling stages. The
// half-resolution head taps after the first upsampling stage.
class DecoderImpl : public torch::nn::Module {
 public:
  DecoderImpl(const BackboneOptions& opts, torch::nn::Sequential shared);
  DecodedPair forward(const torch::Tensor& code);
  const torch::nn::Sequential& shared_block() const { return shared_; }

 private:
  torch::nn::Sequential shared_{nullptr};
  torch::nn::Sequential up1_{nullptr}, up2_{nullptr};
  torch::nn::Sequential head_low_{nullptr}, head_full_{nullptr};
};
TORCH_MODULE(Decoder);

class BackbonePairImpl : public torch::nn::Module {
 public:
  explicit BackbonePairImpl(const BackboneOptions& opts);

  Encoder& encoder(Domain d) { return d == Domain::Photo ? enc_photo : enc_cari; }
  Decoder& decoder(Domain d) { return d == Domain::Photo ? dec_photo : dec_cari; }
  const BackboneOptions& options() const { return opts_; }

  torch::nn::Sequential shared_enc_block{nullptr};
  torch::nn::Sequential shared_dec_block{nullptr};
  Encoder enc_photo{nullptr}, enc_cari{nullptr};
  Decoder dec_photo{nullptr}, dec_cari{nullptr};

 private:
  BackboneOptions opts_;
};
TORCH_MODULE(BackbonePair);

// Content code in the shared latent space: sample = mean + noise.
struct ContentCode {
  torch::Tensor mean;
  torch::Tensor sample;
  torch::Tensor noise;
};

enum class Sampling { Deterministic, Stochastic };

// Encodes with the encoder of image.domain. Stochastic sampling draws unit
// Gaussian noise from `gen` (or the global generator); Deterministic uses
// zero noise so sample == mean. Throws ShapeMismatch.
ContentCode encode(BackbonePair& pair, const ImageTensor& image, Sampling sampling,
                   std::optional<at::Generator> gen = std::nullopt);

struct DecodedImages {
  ImageTensor low;
  ImageTensor full;
};

// Decodes `code` ([B, C_lat, S/4, S/4]) into the target domain at both scales.
DecodedImages decode(BackbonePair& pair, const torch::Tensor& code, Domain target);

enum class Scale { Low, Full };

// Fully convolutional patch discriminator returning a logit map.
class PatchDiscriminatorImpl : public torch::nn::Module {
 public:
  explicit PatchDiscriminatorImpl(int64_t base_channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Sequential net_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

// D_a^l, D_a^r, D_b^l, D_b^r. Index by the domain of the judged images.
class StyleDiscriminatorSetImpl : public torch::nn::Module {
 public:
  explicit StyleDiscriminatorSetImpl(const BackboneOptions& opts);

  PatchDiscriminator& at(Domain d, Scale s);
  int64_t image_size() const { return image_size_; }

  PatchDiscriminator d_photo_low{nullptr}, d_photo_full{nullptr};
  PatchDiscriminator d_cari_low{nullptr}, d_cari_full{nullptr};

 private:
  int64_t image_size_;
};
TORCH_MODULE(StyleDiscriminatorSet);

// Patch logits of the discriminator for (image.domain, scale).
torch::Tensor discriminate_logits(StyleDiscriminatorSet& set, const ImageTensor& image, Scale scale);

// Logistic patch scores in (0, 1).
torch::Tensor discriminate(StyleDiscriminatorSet& set, const ImageTensor& image, Scale scale);

}  // namespace photocari

#endif  // PHOTOCARI_BACKBONE_HPP
