#include "photocari/trainer.hpp"

#include <cmath>
#include <sstream>

#include <ATen/CPUGeneratorImpl.h>

#include "photocari/errors.hpp"
#include "photocari/style_losses.hpp"

namespace photocari {

namespace fs = std::filesystem;

double term(const LossTerms& terms, const std::string& name) {
  for (const auto& [k, v] : terms) {
    if (k == name) {
      return v;
    }
  }
  throw std::out_of_range("no loss term named " + name);
}

namespace {

// splitmix64 over (seed, step, stream) so every step draws from its own
// reproducible stream, independent of how many steps ran before a resume.
std::uint64_t mix_seed(std::uint64_t seed, int64_t step, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(step) * 4 + stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void set_requires_grad(torch::nn::Module& m, bool on) {
  for (auto& p : m.parameters()) {
    p.set_requires_grad(on);
  }
}

std::unique_ptr<torch::optim::Adam> make_adam(const std::vector<torch::Tensor>& params, const HyperParams& hp) {
  return std::make_unique<torch::optim::Adam>(
      params, torch::optim::AdamOptions(hp.lr).betas(std::make_tuple(hp.beta1, hp.beta2)));
}

std::string save_optimizer(const torch::optim::Optimizer& opt) {
  torch::serialize::OutputArchive archive;
  opt.save(archive);
  std::ostringstream out;
  archive.save_to(out);
  return out.str();
}

void load_optimizer(torch::optim::Optimizer& opt, const std::string& state) {
  if (state.empty()) {
    return;
  }
  std::istringstream in(state);
  torch::serialize::InputArchive archive;
  archive.load_from(in);
  opt.load(archive);
}

std::unique_ptr<ImageBank> make_bank(const TrainConfig& cfg) {
  auto corpus = load_corpus(cfg.data_root);
  if (cfg.holdout > 0) {
    corpus = split_holdout(corpus, static_cast<std::size_t>(cfg.holdout)).first;
  }
  return std::make_unique<ImageBank>(std::move(corpus), cfg.image_size);
}

void check_finite(const LossTerms& terms, int stage, int64_t step) {
  bool ok = true;
  for (const auto& [k, v] : terms) {
    ok = ok && std::isfinite(v);
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "non-finite loss at stage " << stage << " step " << step << ":";
    for (const auto& [k, v] : terms) {
      msg << " " << k << "=" << v;
    }
    throw NonFiniteLoss(msg.str());
  }
}

void check_same_architecture(const TrainConfig& a, const TrainConfig& b) {
  if (a.image_size != b.image_size || a.latent_channels != b.latent_channels ||
      a.control_grid_k != b.control_grid_k || a.d_max != b.d_max) {
    throw ConfigError(
        "stage-2 config must keep image_size, latent_channels, control_grid_k and d_max of the stage-1 checkpoint");
  }
}

double value(const torch::Tensor& t) { return t.item<double>(); }

}  // namespace

struct Stage1Trainer::Forward {
  ContentCode code_a, code_b;
  DecodedImages x_rec, x_r, y_rec, y_r;
  torch::Tensor rec, kl, adv_g, content, ctr, total;
};

Stage1Trainer::Stage1Trainer(TrainConfig cfg, std::optional<Checkpoint> resume) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Checkpoint start;
  if (resume) {
    if (resume->stage != 1) {
      throw StageMismatch("stage-1 training cannot resume from a stage-" + std::to_string(resume->stage) +
                          " checkpoint");
    }
    check_same_architecture(cfg_, resume->config);
    start = clone_checkpoint(*resume);
  } else {
    start = make_initial_checkpoint(cfg_, 1);
  }
  model_ = start.model;
  step_ = start.step;
  extractor_ = load_extractor(cfg_.extractor_weights, deeper_tap(cfg_.style_layer, cfg_.content_layer));
  bank_ = make_bank(cfg_);
  opt_g_ = make_adam(model_->backbone->parameters(), cfg_.hp);
  opt_d_ = make_adam(model_->style_disc->parameters(), cfg_.hp);
  load_optimizer(*opt_g_, start.generator_optimizer);
  load_optimizer(*opt_d_, start.discriminator_optimizer);
  set_requires_grad(*model_->dpm, false);
  set_requires_grad(*model_->warp_disc, false);
}

Stage1Trainer::Forward Stage1Trainer::forward(const ImageTensor& x, const ImageTensor& y) {
  auto& backbone = model_->backbone;
  const auto& hp = cfg_.hp;
  Forward f;
  const bool sampling = torch::GradMode::is_enabled();
  auto gen = at::make_generator<at::CPUGeneratorImpl>(mix_seed(cfg_.seed, step_, 1));
  const auto mode = sampling ? Sampling::Stochastic : Sampling::Deterministic;
  f.code_a = encode(backbone, x, mode, gen);
  f.code_b = encode(backbone, y, mode, gen);
  f.x_rec = decode(backbone, f.code_a.sample, Domain::Photo);
  f.x_r = decode(backbone, f.code_a.sample, Domain::Caricature);
  f.y_rec = decode(backbone, f.code_b.sample, Domain::Caricature);
  f.y_r = decode(backbone, f.code_b.sample, Domain::Photo);

  f.rec = reconstruction_loss(f.x_rec.full.data, x.data, f.y_rec.full.data, y.data);
  f.kl = kl_loss(f.code_a.mean, f.code_b.mean);
  f.adv_g = adv_style_gen_loss(model_->style_disc, StyleFakes{f.x_r.low, f.x_r.full, f.y_r.low, f.y_r.full},
                               cfg_.gan_loss);

  // One extractor pass serves both the content and the style layer.
  const int64_t bx = x.batch();
  const int64_t by = y.batch();
  auto feats = extractor_->forward(torch::cat({x.data, f.x_r.full.data, y.data, f.y_r.full.data}, 0),
                                   std::vector<std::string>{cfg_.content_layer, cfg_.style_layer});
  auto content = feats.at(cfg_.content_layer).split_with_sizes({bx, bx, by, by}, 0);
  auto style = feats.at(cfg_.style_layer).split_with_sizes({bx, bx, by, by}, 0);
  f.content = feature_distance(content[0], content[1]) + feature_distance(content[2], content[3]);
  f.ctr = contrastive_style_loss(StyleFeatures{style[1], style[3], style[0], style[2]}, hp);

  f.total = hp.lambda_r * f.rec + hp.lambda_K * f.kl + hp.lambda_a * f.adv_g + hp.lambda_c * f.content +
            hp.lambda_ctr * f.ctr;
  return f;
}

UnpairedBatch Stage1Trainer::next_batch() {
  return sample_batch(*bank_, cfg_.batch_size, mix_seed(cfg_.seed, step_, 0));
}

LossTerms Stage1Trainer::generator_step(const ImageTensor& x, const ImageTensor& y) {
  model_->train();
  set_requires_grad(*model_->style_disc, false);
  auto f = forward(x, y);
  LossTerms terms = {{"rec", value(f.rec)},         {"kl", value(f.kl)},   {"adv_g", value(f.adv_g)},
                     {"content", value(f.content)}, {"ctr", value(f.ctr)}, {"gen_total", value(f.total)}};
  check_finite(terms, 1, step_);
  opt_g_->zero_grad();
  f.total.backward();
  opt_g_->step();
  set_requires_grad(*model_->style_disc, true);
  last_fakes_ = StyleFakes{{f.x_r.low.data.detach(), Domain::Caricature},
                           {f.x_r.full.data.detach(), Domain::Caricature},
                           {f.y_r.low.data.detach(), Domain::Photo},
                           {f.y_r.full.data.detach(), Domain::Photo}};
  return terms;
}

double Stage1Trainer::discriminator_step(const ImageTensor& x, const ImageTensor& y) {
  if (!last_fakes_) {
    throw StageMismatch("discriminator_step needs a preceding generator_step");
  }
  model_->train();
  StyleReals reals{downsample_half(x), x, downsample_half(y), y};
  auto adv_d = adv_style_disc_loss(model_->style_disc, reals, *last_fakes_);
  check_finite({{"adv_d", value(adv_d)}}, 1, step_);
  opt_d_->zero_grad();
  (cfg_.hp.lambda_a * adv_d).backward();
  opt_d_->step();
  return value(adv_d);
}

LossTerms Stage1Trainer::step() {
  auto batch = next_batch();
  auto terms = generator_step(batch.photo, batch.caricature);
  terms.emplace_back("adv_d", discriminator_step(batch.photo, batch.caricature));
  last_fakes_.reset();
  ++step_;
  return terms;
}

LossTerms Stage1Trainer::evaluate(const ImageTensor& x, const ImageTensor& y) {
  torch::NoGradGuard no_grad;
  auto f = forward(x, y);
  return {{"rec", value(f.rec)},         {"kl", value(f.kl)},   {"adv_g", value(f.adv_g)},
          {"content", value(f.content)}, {"ctr", value(f.ctr)}, {"gen_total", value(f.total)}};
}

Checkpoint Stage1Trainer::checkpoint() const {
  Checkpoint ckpt;
  ckpt.stage = 1;
  ckpt.step = step_;
  ckpt.config = cfg_;
  ckpt.model = model_;
  ckpt.generator_optimizer = save_optimizer(*opt_g_);
  ckpt.discriminator_optimizer = save_optimizer(*opt_d_);
  return ckpt;
}

Stage2Trainer::Stage2Trainer(TrainConfig cfg, const Checkpoint& stage1, bool resume) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int expected = resume ? 2 : 1;
  if (stage1.stage != expected) {
    throw StageMismatch("stage-2 training expects a stage-" + std::to_string(expected) + " checkpoint, got stage " +
                        std::to_string(stage1.stage));
  }
  check_same_architecture(cfg_, stage1.config);
  auto start = clone_checkpoint(stage1);
  model_ = start.model;
  step_ = resume ? start.step : 0;
  bank_ = make_bank(cfg_);

  set_requires_grad(*model_->backbone, false);
  set_requires_grad(*model_->style_disc, false);
  opt_g_ = make_adam(model_->dpm->parameters(), cfg_.hp);
  opt_d_ = make_adam(model_->warp_disc->parameters(), cfg_.hp);
  if (resume) {
    load_optimizer(*opt_g_, start.generator_optimizer);
    load_optimizer(*opt_d_, start.discriminator_optimizer);
  }
}

LossTerms Stage2Trainer::step() {
  auto batch = sample_batch(*bank_, cfg_.batch_size, mix_seed(cfg_.seed, step_, 2));
  const auto& x = batch.photo;
  const auto& y = batch.caricature;
  const auto& cps = model_->control_points();
  const auto& hp = cfg_.hp;

  // The frozen backbone renders with the latent mean.
  ImageTensor x_r, y_r;
  {
    torch::NoGradGuard no_grad;
    auto& backbone = model_->backbone;
    x_r = decode(backbone, encode(backbone, x, Sampling::Deterministic).mean, Domain::Caricature).full;
    y_r = decode(backbone, encode(backbone, y, Sampling::Deterministic).mean, Domain::Photo).full;
  }

  auto v_a = predict_displacements(model_->dpm->at(Domain::Photo), x);
  auto v_b = predict_displacements(model_->dpm->at(Domain::Caricature), y);
  auto x_to_y = warp_image(x_r, cps, v_a, cfg_.tps_reg);
  auto y_to_x = warp_image(y_r, cps, v_b, cfg_.tps_reg);

  set_requires_grad(*model_->warp_disc, false);
  auto adv_g = adv_warp_gen_loss(model_->warp_disc, x_to_y, y_to_x, cfg_.gan_loss);
  auto idt = identity_loss(x_to_y.data, x.data, y_to_x.data, y.data);
  auto total = hp.lambda_a * adv_g + hp.lambda_i * idt;
  LossTerms terms = {{"adv_warp_g", value(adv_g)},
                     {"idt", value(idt)},
                     {"dpm_total", value(total)},
                     {"mean_abs_disp", value(torch::cat({v_a.vectors, v_b.vectors}, 0).abs().mean())}};
  check_finite(terms, 2, step_);
  opt_g_->zero_grad();
  total.backward();
  opt_g_->step();
  set_requires_grad(*model_->warp_disc, true);

  auto adv_d = adv_warp_disc_loss(model_->warp_disc, x, y, {x_to_y.data.detach(), x_to_y.domain},
                                  {y_to_x.data.detach(), y_to_x.domain});
  terms.emplace_back("adv_warp_d", value(adv_d));
  check_finite(terms, 2, step_);
  opt_d_->zero_grad();
  (hp.lambda_a * adv_d).backward();
  opt_d_->step();

  ++step_;
  return terms;
}

Checkpoint Stage2Trainer::checkpoint() const {
  Checkpoint ckpt;
  ckpt.stage = 2;
  ckpt.step = step_;
  ckpt.config = cfg_;
  ckpt.model = model_;
  ckpt.generator_optimizer = save_optimizer(*opt_g_);
  ckpt.discriminator_optimizer = save_optimizer(*opt_d_);
  return ckpt;
}

namespace {

template <typename Trainer>
Checkpoint run(Trainer& trainer, const TrainConfig& cfg, int stage, int64_t total, const StepCallback& on_step) {
  fs::create_directories(cfg.checkpoint_dir);
  const std::string prefix = "stage" + std::to_string(stage);
  const bool resumed = trainer.steps_done() > 0;
  const int64_t steps = std::max<int64_t>(0, total - trainer.steps_done());
  std::ofstream log(cfg.checkpoint_dir / (prefix + ".log"), resumed ? std::ios::app : std::ios::trunc);
  if (!log) {
    throw IoError("cannot open training log in " + cfg.checkpoint_dir.string());
  }
  for (int64_t i = 0; i < steps; ++i) {
    auto terms = trainer.step();
    const int64_t done = trainer.steps_done();
    if (done % cfg.log_every == 0 || i + 1 == steps) {
      for (const auto& [name, v] : terms) {
        log << done << '\t' << name << '\t' << v << '\n';
      }
      log.flush();
    }
    if (on_step) {
      on_step(done, terms);
    }
    if (done % cfg.save_every == 0 && i + 1 != steps) {
      save_checkpoint(trainer.checkpoint(), cfg.checkpoint_dir / (prefix + "_step" + std::to_string(done) + ".ckpt"));
    }
  }
  auto ckpt = trainer.checkpoint();
  save_checkpoint(ckpt, cfg.checkpoint_dir / (prefix + ".ckpt"));
  return ckpt;
}

}  // namespace

Checkpoint train_stage1(const TrainConfig& cfg, const StepCallback& on_step) {
  Stage1Trainer trainer(cfg);
  return run(trainer, cfg, 1, cfg.hp.steps_stage1, on_step);
}

Checkpoint train_stage2(const TrainConfig& cfg, const Checkpoint& stage1, const StepCallback& on_step) {
  Stage2Trainer trainer(cfg, stage1);
  return run(trainer, cfg, 2, cfg.hp.steps_stage2, on_step);
}

Checkpoint resume_training(const TrainConfig& cfg, const Checkpoint& ckpt, const StepCallback& on_step) {
  if (ckpt.stage == 1) {
    Stage1Trainer trainer(cfg, ckpt);
    return run(trainer, cfg, 1, cfg.hp.steps_stage1, on_step);
  }
  Stage2Trainer trainer(cfg, ckpt, true);
  return run(trainer, cfg, 2, cfg.hp.steps_stage2, on_step);
}

}  // namespace photocari
