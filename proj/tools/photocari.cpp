#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "photocari/config.hpp"
#include "photocari/data_pipeline.hpp"
#include "photocari/errors.hpp"
#include "photocari/extractor.hpp"
#include "photocari/image_io.hpp"
#include "photocari/inference.hpp"
#include "photocari/model.hpp"
#include "photocari/trainer.hpp"

namespace fs = std::filesystem;
using namespace photocari;

namespace {

struct TrainArgs {
  int stage = 1;
  std::string config;
  std::string preset;
  std::string from;
  std::string resume;
  std::string data;
  std::string checkpoint_dir;
  std::string extractor;
  std::optional<int64_t> steps;
  std::optional<std::uint64_t> seed;
  std::optional<int64_t> holdout;
  int64_t progress = 100;
};

struct TranslateArgs {
  std::string ckpt, in, out, render_out;
  std::string direction = "p2c";
  double alpha = 1.0;
  std::optional<std::uint64_t> noise_seed;
  bool warp_c2p = false;
};

struct GridArgs {
  std::string ckpt, out;
  std::vector<std::string> inputs;
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  double seed_alpha = 1.0;
};

struct EvalArgs {
  std::string ckpt, data;
  int64_t n = 100;
  std::uint64_t seed = 0;
  int64_t holdout = 0;
};

ImageTensor load_input(const fs::path& path, int64_t size, Domain domain) {
  auto raw = decode_image(path);
  if (!raw) {
    throw IoError("cannot decode image '" + path.string() + "'");
  }
  return preprocess(*raw, size, domain);
}

TrainConfig build_config(const TrainArgs& a) {
  TrainConfig cfg;
  if (a.preset == "desk") {
    cfg = desk_preset();
  } else if (!a.preset.empty()) {
    throw ConfigError("unknown preset '" + a.preset + "'");
  } else {
    cfg = load_defaults();
  }
  if (!a.config.empty()) {
    cfg = load_config(a.config, cfg);
  }
  if (!a.data.empty()) cfg.data_root = a.data;
  if (!a.checkpoint_dir.empty()) cfg.checkpoint_dir = a.checkpoint_dir;
  if (!a.extractor.empty()) cfg.extractor_weights = a.extractor;
  if (a.seed) cfg.seed = *a.seed;
  if (a.holdout) cfg.holdout = *a.holdout;
  if (a.steps) {
    (a.stage == 1 ? cfg.hp.steps_stage1 : cfg.hp.steps_stage2) = *a.steps;
  }
  cfg.validate();
  return cfg;
}

int run_train(const TrainArgs& a) {
  auto cfg = build_config(a);
  const int64_t total = a.stage == 1 ? cfg.hp.steps_stage1 : cfg.hp.steps_stage2;
  fs::create_directories(cfg.checkpoint_dir);
  save_config(cfg.checkpoint_dir / ("stage" + std::to_string(a.stage) + ".config.json"), cfg);

  auto progress = [&](int64_t step, const LossTerms& terms) {
    if (a.progress <= 0 || (step % a.progress != 0 && step != total)) {
      return;
    }
    std::cerr << "stage " << a.stage << " step " << step << "/" << total;
    for (const auto& [k, v] : terms) {
      std::cerr << ' ' << k << '=' << v;
    }
    std::cerr << '\n';
  };

  if (!a.resume.empty()) {
    auto ckpt = load_checkpoint(a.resume);
    if (ckpt.stage != a.stage) {
      throw StageMismatch("--resume checkpoint is stage " + std::to_string(ckpt.stage) + ", not stage " +
                          std::to_string(a.stage));
    }
    resume_training(cfg, ckpt, progress);
  } else if (a.stage == 1) {
    train_stage1(cfg, progress);
  } else {
    const fs::path from = a.from.empty() ? cfg.checkpoint_dir / "stage1.ckpt" : fs::path(a.from);
    train_stage2(cfg, load_checkpoint(from), progress);
  }
  std::cout << (cfg.checkpoint_dir / ("stage" + std::to_string(a.stage) + ".ckpt")).string() << '\n';
  return 0;
}

int run_translate(const TranslateArgs& a) {
  auto ckpt = load_checkpoint(a.ckpt);
  const bool p2c = a.direction == "p2c";
  auto image = load_input(a.in, ckpt.config.image_size, p2c ? Domain::Photo : Domain::Caricature);
  TranslateOptions opts;
  opts.alpha = a.alpha;
  opts.noise_seed = a.noise_seed;
  opts.warp_cari_to_photo = a.warp_c2p;
  auto t = translate(ckpt, image, p2c ? Direction::PhotoToCari : Direction::CariToPhoto, opts);
  write_image(a.out, t.output.data[0]);
  if (!a.render_out.empty()) {
    write_image(a.render_out, t.rendered.data[0]);
  }
  return 0;
}

int run_grid(const GridArgs& a) {
  if (a.alphas.empty() && a.seeds.empty()) {
    throw ConfigError("grid needs --alphas or --seeds");
  }
  auto ckpt = load_checkpoint(a.ckpt);
  std::vector<ImageTensor> inputs;
  for (const auto& p : a.inputs) {
    inputs.push_back(load_input(p, ckpt.config.image_size, Domain::Photo));
  }
  emit_grid(ckpt, inputs, a.alphas, a.seeds, a.out, a.seed_alpha);
  return 0;
}

int run_eval(const EvalArgs& a) {
  auto ckpt = load_checkpoint(a.ckpt);
  auto corpus = load_corpus(a.data);
  if (a.holdout > 0) {
    corpus = split_holdout(corpus, static_cast<std::size_t>(a.holdout)).second;
  }
  auto r = eval_style_gap(ckpt, corpus, a.n, a.seed);
  std::cout << "n\t" << r.n << "\nto_caricature\t" << r.to_caricature << "\nto_photo\t" << r.to_photo
            << "\nratio\t" << r.ratio << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photo/caricature translation with learned warping"};
  app.require_subcommand(1);
  app.failure_message([](const CLI::App*, const CLI::Error& err) {
    return "photocari: error: " + std::string(err.what()) + "\n";
  });

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train stage 1 (style) or stage 2 (shape)");
  t->add_option("--stage", train.stage, "training stage")->required()->check(CLI::IsMember({1, 2}));
  t->add_option("--config", train.config, "JSON config; keys override the preset")->check(CLI::ExistingFile);
  t->add_option("--preset", train.preset, "start from a named preset")->check(CLI::IsMember({"desk"}));
  t->add_option("--from", train.from, "stage-1 checkpoint for stage 2 (default <checkpoint_dir>/stage1.ckpt)");
  t->add_option("--resume", train.resume, "continue from a checkpoint of the same stage");
  t->add_option("--data", train.data, "corpus root with photos/ and caricatures/");
  t->add_option("--checkpoint-dir", train.checkpoint_dir, "output directory");
  t->add_option("--extractor", train.extractor, "perceptual extractor weights");
  t->add_option("--steps", train.steps, "steps for this stage")->check(CLI::PositiveNumber);
  t->add_option("--seed", train.seed, "training seed");
  t->add_option("--holdout", train.holdout, "images per domain kept out of training")->check(CLI::NonNegativeNumber);
  t->add_option("--progress", train.progress, "print losses every N steps (0: quiet)");

  TranslateArgs tr;
  auto* x = app.add_subcommand("translate", "translate one image");
  x->add_option("--ckpt", tr.ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  x->add_option("--in", tr.in, "input image")->required()->check(CLI::ExistingFile);
  x->add_option("--out", tr.out, "output image")->required();
  x->add_option("--direction", tr.direction, "p2c or c2p")->check(CLI::IsMember({"p2c", "c2p"}));
  x->add_option("--alpha", tr.alpha, "exaggeration scale")->check(CLI::NonNegativeNumber);
  x->add_option("--noise-seed", tr.noise_seed, "perturb the warp input with this seed");
  x->add_flag("--warp-c2p", tr.warp_c2p, "also warp caricature-to-photo output");
  x->add_option("--render-out", tr.render_out, "also write the unwarped render");

  GridArgs g;
  auto* gr = app.add_subcommand("grid", "montage over exaggeration scales or noise seeds");
  gr->add_option("--ckpt", g.ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  gr->add_option("--in", g.inputs, "input photos")->required()->check(CLI::ExistingFile);
  gr->add_option("--alphas", g.alphas, "exaggeration scales")->delimiter(',');
  gr->add_option("--seeds", g.seeds, "noise seeds")->delimiter(',');
  gr->add_option("--seed-alpha", g.seed_alpha, "exaggeration used for the seed cells");
  gr->add_option("--out", g.out, "output image")->required();

  EvalArgs e;
  auto* ev = app.add_subcommand("eval-style", "style-distance gap of rendered photos");
  ev->add_option("--ckpt", e.ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", e.data, "corpus root")->required()->check(CLI::ExistingDirectory);
  ev->add_option("-n", e.n, "number of photos")->check(CLI::PositiveNumber);
  ev->add_option("--seed", e.seed, "sampling seed");
  ev->add_option("--holdout", e.holdout, "evaluate on the last N images of each domain")
      ->check(CLI::NonNegativeNumber);

  std::string extractor_out, extractor_tap = "relu3_1";
  std::uint64_t extractor_seed = 0;
  auto* mx = app.add_subcommand("make-extractor", "write randomly initialised extractor weights (testing only)");
  mx->add_option("--out", extractor_out, "weights file")->required();
  mx->add_option("--tap", extractor_tap, "deepest layer");
  mx->add_option("--seed", extractor_seed, "init seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*t) return run_train(train);
    if (*x) return run_translate(tr);
    if (*gr) return run_grid(g);
    if (*ev) return run_eval(e);
    if (*mx) {
      write_random_extractor(extractor_out, extractor_tap, extractor_seed);
      std::cerr << "warning: random weights, not a pretrained network\n";
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "photocari: error: " << err.what() << '\n';
    return 1;
  }
  return 1;
}
