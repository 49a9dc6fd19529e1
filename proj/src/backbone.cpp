#include "photocari/backbone.hpp"

#include <sstream>

#include "photocari/errors.hpp"

namespace photocari {

namespace nn = torch::nn;

namespace {

void append_conv_in_relu(nn::Sequential& seq, int64_t in, int64_t out, int64_t kernel, int64_t stride, int64_t pad) {
  seq->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, kernel).stride(stride).padding(pad)));
  seq->push_back(nn::InstanceNorm2d(nn::InstanceNorm2dOptions(out)));
  seq->push_back(nn::ReLU(true));
}

nn::Sequential make_shared_block(int64_t channels) {
  return nn::Sequential(ResidualBlock(channels), ResidualBlock(channels));
}

nn::Sequential upsample_stage(int64_t in, int64_t out) {
  return nn::Sequential(
      nn::Upsample(nn::UpsampleOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest)),
      nn::Conv2d(nn::Conv2dOptions(in, out, 3).padding(1)), nn::InstanceNorm2d(nn::InstanceNorm2dOptions(out)),
      nn::ReLU(true));
}

}  // namespace

ResidualBlockImpl::ResidualBlockImpl(int64_t channels) {
  body_ = register_module(
      "body", nn::Sequential(nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)),
                             nn::InstanceNorm2d(nn::InstanceNorm2dOptions(channels)), nn::ReLU(true),
                             nn::Conv2d(nn::Conv2dOptions(channels, channels, 3).padding(1)),
                             nn::InstanceNorm2d(nn::InstanceNorm2dOptions(channels))));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) { return x + body_->forward(x); }

EncoderImpl::EncoderImpl(const BackboneOptions& opts, nn::Sequential shared) : shared_(std::move(shared)) {
  const int64_t base = opts.base_channels();
  nn::Sequential front;
  append_conv_in_relu(front, 3, base, 7, 1, 3);
  append_conv_in_relu(front, base, 2 * base, 4, 2, 1);
  append_conv_in_relu(front, 2 * base, opts.latent_channels, 4, 2, 1);
  front_ = register_module("front", front);
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& x) { return shared_->forward(front_->forward(x)); }

DecoderImpl::DecoderImpl(const BackboneOptions& opts, nn::Sequential shared) : shared_(std::move(shared)) {
  const int64_t base = opts.base_channels();
  up1_ = register_module("up1", upsample_stage(opts.latent_channels, 2 * base));
  head_low_ = register_module("head_low",
                              nn::Sequential(nn::Conv2d(nn::Conv2dOptions(2 * base, 3, 3).padding(1)), nn::Tanh()));
  up2_ = register_module("up2", upsample_stage(2 * base, base));
  head_full_ = register_module("head_full",
                               nn::Sequential(nn::Conv2d(nn::Conv2dOptions(base, 3, 7).padding(3)), nn::Tanh()));
}

DecodedPair DecoderImpl::forward(const torch::Tensor& code) {
  auto h = up1_->forward(shared_->forward(code));
  auto low = head_low_->forward(h);
  auto full = head_full_->forward(up2_->forward(h));
  return {low, full};
}

BackbonePairImpl::BackbonePairImpl(const BackboneOptions& opts) : opts_(opts) {
  if (opts.latent_channels < 4 || opts.latent_channels % 4 != 0) {
    throw ShapeMismatch("latent_channels must be a positive multiple of 4");
  }
  if (opts.image_size < 16 || opts.image_size % 4 != 0) {
    throw ShapeMismatch("image_size must be a multiple of 4 and >= 16");
  }
  shared_enc_block = register_module("shared_enc_block", make_shared_block(opts.latent_channels));
  shared_dec_block = register_module("shared_dec_block", make_shared_block(opts.latent_channels));
  enc_photo = register_module("enc_photo", Encoder(opts, shared_enc_block));
  enc_cari = register_module("enc_cari", Encoder(opts, shared_enc_block));
  dec_photo = register_module("dec_photo", Decoder(opts, shared_dec_block));
  dec_cari = register_module("dec_cari", Decoder(opts, shared_dec_block));
}

ContentCode encode(BackbonePair& pair, const ImageTensor& image, Sampling sampling,
                   std::optional<at::Generator> gen) {
  check_image(image, "encode", pair->options().image_size);
  ContentCode code;
  code.mean = pair->encoder(image.domain)->forward(image.data);
  if (sampling == Sampling::Stochastic) {
    code.sample = code.mean + at::randn(code.mean.sizes(), gen, code.mean.options().requires_grad(false));
    // Recorded after rounding so that sample - mean == noise holds bitwise.
    code.noise = (code.sample - code.mean).detach();
  } else {
    code.sample = code.mean;
    code.noise = torch::zeros_like(code.mean);
  }
  return code;
}

DecodedImages decode(BackbonePair& pair, const torch::Tensor& code, Domain target) {
  const auto& opts = pair->options();
  const int64_t side = opts.image_size / 4;
  if (code.dim() != 4 || code.size(1) != opts.latent_channels || code.size(2) != side || code.size(3) != side) {
    std::ostringstream msg;
    msg << "decode: expected code [B, " << opts.latent_channels << ", " << side << ", " << side << "], got "
        << code.sizes();
    throw ShapeMismatch(msg.str());
  }
  auto out = pair->decoder(target)->forward(code);
  return {{out.low, target}, {out.full, target}};
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(int64_t base) {
  auto lrelu = [] { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2).inplace(true)); };
  net_ = register_module(
      "net", nn::Sequential(nn::Conv2d(nn::Conv2dOptions(3, base, 4).stride(2).padding(1)), lrelu(),
                            nn::Conv2d(nn::Conv2dOptions(base, 2 * base, 4).stride(2).padding(1)), lrelu(),
                            nn::Conv2d(nn::Conv2dOptions(2 * base, 4 * base, 4).stride(2).padding(1)), lrelu(),
                            nn::Conv2d(nn::Conv2dOptions(4 * base, 1, 3).padding(1))));
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor& x) { return net_->forward(x); }

StyleDiscriminatorSetImpl::StyleDiscriminatorSetImpl(const BackboneOptions& opts) : image_size_(opts.image_size) {
  const int64_t base = opts.base_channels();
  d_photo_low = register_module("d_photo_low", PatchDiscriminator(base));
  d_photo_full = register_module("d_photo_full", PatchDiscriminator(base));
  d_cari_low = register_module("d_cari_low", PatchDiscriminator(base));
  d_cari_full = register_module("d_cari_full", PatchDiscriminator(base));
}

PatchDiscriminator& StyleDiscriminatorSetImpl::at(Domain d, Scale s) {
  if (d == Domain::Photo) {
    return s == Scale::Low ? d_photo_low : d_photo_full;
  }
  return s == Scale::Low ? d_cari_low : d_cari_full;
}

torch::Tensor discriminate_logits(StyleDiscriminatorSet& set, const ImageTensor& image, Scale scale) {
  const int64_t expected = scale == Scale::Low ? set->image_size() / 2 : set->image_size();
  check_image(image, scale == Scale::Low ? "discriminate (low scale)" : "discriminate (full scale)", expected);
  return set->at(image.domain, scale)->forward(image.data);
}

torch::Tensor discriminate(StyleDiscriminatorSet& set, const ImageTensor& image, Scale scale) {
  return torch::sigmoid(discriminate_logits(set, image, scale));
}

}  // namespace photocari
