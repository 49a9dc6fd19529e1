#include "photocari/inference.hpp"

#include <iostream>
#include <random>

#include "photocari/errors.hpp"
#include "photocari/extractor.hpp"
#include "photocari/image_io.hpp"
#include "photocari/style_losses.hpp"

namespace photocari {

Translation translate(Checkpoint& ckpt, const ImageTensor& image, Direction direction, const TranslateOptions& opts) {
  torch::NoGradGuard no_grad;
  auto& model = ckpt.model;
  model->eval();
  const Domain source = direction == Direction::PhotoToCari ? Domain::Photo : Domain::Caricature;
  const ImageTensor input{image.data, source};
  check_image(input, "translate", ckpt.config.image_size);

  auto& backbone = model->backbone;
  Translation result;
  result.rendered = decode(backbone, encode(backbone, input, Sampling::Deterministic).mean, other(source)).full;
  result.output = result.rendered;

  const bool want_warp = direction == Direction::PhotoToCari || opts.warp_cari_to_photo;
  if (!want_warp) {
    return result;
  }
  if (ckpt.stage < 2) {
    if (direction == Direction::CariToPhoto) {
      throw StageMismatch("warping caricature-to-photo output needs a stage-2 checkpoint");
    }
    std::cerr << "warning: stage-1 checkpoint has no trained distortion module; returning the render only\n";
    return result;
  }

  const ImageTensor dpm_input =
      opts.noise_seed ? perturb_input(input, opts.noise_sigma, opts.noise_clamp, *opts.noise_seed) : input;
  auto field = exaggerate(predict_displacements(model->dpm->at(source), dpm_input), opts.alpha);
  result.output = warp_image(result.rendered, model->control_points(), field, ckpt.config.tps_reg);
  result.displacements = std::move(field);
  result.warped = true;
  return result;
}

torch::Tensor make_montage(Checkpoint& ckpt, const std::vector<ImageTensor>& inputs, const std::vector<double>& alphas,
                           const std::vector<std::uint64_t>& seeds, double seed_alpha) {
  if (inputs.empty()) {
    throw ShapeMismatch("montage needs at least one input image");
  }
  std::vector<torch::Tensor> rows;
  for (const auto& in : inputs) {
    check_image(in, "montage input", ckpt.config.image_size);
    if (in.batch() != 1) {
      throw ShapeMismatch("montage inputs must be single images");
    }
    std::vector<torch::Tensor> cells{in.data[0]};
    for (double a : alphas) {
      TranslateOptions opts;
      opts.alpha = a;
      cells.push_back(translate(ckpt, in, Direction::PhotoToCari, opts).output.data[0]);
    }
    for (auto s : seeds) {
      TranslateOptions opts;
      opts.alpha = seed_alpha;
      opts.noise_seed = s;
      cells.push_back(translate(ckpt, in, Direction::PhotoToCari, opts).output.data[0]);
    }
    rows.push_back(torch::cat(cells, 2));
  }
  return torch::cat(rows, 1);
}

void emit_grid(Checkpoint& ckpt, const std::vector<ImageTensor>& inputs, const std::vector<double>& alphas,
               const std::vector<std::uint64_t>& seeds, const std::filesystem::path& out, double seed_alpha) {
  write_image(out, make_montage(ckpt, inputs, alphas, seeds, seed_alpha));
}

StyleGapReport eval_style_gap(Checkpoint& ckpt, const CorpusIndex& corpus, int64_t n, std::uint64_t seed) {
  if (n < 1) {
    throw ConfigError("eval_style_gap needs n >= 1");
  }
  const auto& cfg = ckpt.config;
  auto extractor = load_extractor(cfg.extractor_weights, cfg.style_layer);
  ImageBank bank(corpus, cfg.image_size);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64_t> pick_photo(0, bank.count(Domain::Photo) - 1);
  std::uniform_int_distribution<int64_t> pick_cari(0, bank.count(Domain::Caricature) - 1);

  torch::NoGradGuard no_grad;
  StyleGapReport report;
  report.n = n;
  for (int64_t i = 0; i < n; ++i) {
    ImageTensor x{bank.image(Domain::Photo, pick_photo(rng)), Domain::Photo};
    auto y = bank.image(Domain::Caricature, pick_cari(rng));
    TranslateOptions render_only;
    render_only.alpha = 0.0;
    auto x_r = translate(ckpt, x, Direction::PhotoToCari, render_only).rendered;
    auto feats = extractor->forward(torch::cat({x_r.data, y, x.data}, 0), cfg.style_layer);
    report.to_caricature += style_distance(feats.narrow(0, 0, 1), feats.narrow(0, 1, 1)).item<double>();
    report.to_photo += style_distance(feats.narrow(0, 0, 1), feats.narrow(0, 2, 1)).item<double>();
  }
  report.to_caricature /= static_cast<double>(n);
  report.to_photo /= static_cast<double>(n);
  report.ratio = report.to_photo > 0.0 ? report.to_caricature / report.to_photo : 0.0;
  return report;
}

}  // namespace photocari
