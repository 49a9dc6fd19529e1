#include "photocari/config.hpp"

#include <fstream>

#include "photocari/errors.hpp"

namespace photocari {

namespace fs = std::filesystem;
using nlohmann::json;

void HyperParams::validate() const {
  for (double w : {alpha1, alpha2, alpha3, alpha4, lambda_r, lambda_K, lambda_a, lambda_c, lambda_ctr, lambda_i}) {
    if (!(w >= 0.0)) {
      throw ConfigError("loss weights must be non-negative");
    }
  }
  if (!(mg > 0.0)) {
    throw ConfigError("contrastive margin mg must be positive");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("optimizer betas must lie in (0, 1)");
  }
  if (!(lr > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  if (steps_stage1 < 1 || steps_stage2 < 1) {
    throw ConfigError("step counts must be >= 1");
  }
}

void TrainConfig::validate() const {
  hp.validate();
  if (image_size < 16 || image_size % 4 != 0) {
    throw ConfigError("image_size must be a multiple of 4 and >= 16");
  }
  if (batch_size < 1 || log_every < 1 || save_every < 1) {
    throw ConfigError("batch_size, log_every and save_every must be >= 1");
  }
  if (control_grid_k < 1) {
    throw ConfigError("control_grid_k must be >= 1");
  }
  if (!(d_max > 0.0) || !(tps_reg >= 0.0)) {
    throw ConfigError("d_max must be positive and tps_reg non-negative");
  }
  if (latent_channels < 4 || latent_channels % 4 != 0) {
    throw ConfigError("latent_channels must be a positive multiple of 4");
  }
  if (holdout < 0) {
    throw ConfigError("holdout must be >= 0");
  }
}

TrainConfig load_defaults() { return TrainConfig{}; }

TrainConfig desk_preset() {
  TrainConfig cfg;
  cfg.image_size = 64;
  cfg.latent_channels = 64;
  cfg.control_grid_k = 4;
  cfg.hp.steps_stage1 = 2000;
  cfg.hp.steps_stage2 = 1000;
  cfg.save_every = 500;
  cfg.log_every = 10;
  return cfg;
}

std::string to_string(GanLoss g) { return g == GanLoss::NonSaturating ? "nonsaturating" : "minimax"; }

GanLoss gan_loss_from_string(const std::string& s) {
  if (s == "nonsaturating") {
    return GanLoss::NonSaturating;
  }
  if (s == "minimax") {
    return GanLoss::Minimax;
  }
  throw ConfigError("gan_loss must be 'nonsaturating' or 'minimax', got '" + s + "'");
}

#define PHOTOCARI_HP_FIELDS(X) \
  X(alpha1) X(alpha2) X(alpha3) X(alpha4) X(lambda_r) X(lambda_K) X(lambda_a) X(lambda_c) X(lambda_ctr) \
  X(lambda_i) X(mg) X(lr) X(beta1) X(beta2) X(steps_stage1) X(steps_stage2)

void to_json(json& j, const HyperParams& hp) {
  j = json::object();
#define X(f) j[#f] = hp.f;
  PHOTOCARI_HP_FIELDS(X)
#undef X
}

void from_json(const json& j, HyperParams& hp) {
#define X(f)                     \
  if (j.contains(#f)) {          \
    j.at(#f).get_to(hp.f);       \
  }
  PHOTOCARI_HP_FIELDS(X)
#undef X
}

#define PHOTOCARI_CFG_FIELDS(X)                                                                        \
  X(image_size) X(batch_size) X(seed) X(log_every) X(save_every) X(control_grid_k) X(d_max) X(tps_reg) \
  X(latent_channels) X(style_layer) X(content_layer) X(holdout)

void to_json(json& j, const TrainConfig& cfg) {
  j = json::object();
  j["hp"] = cfg.hp;
  j["data_root"] = cfg.data_root.string();
  j["checkpoint_dir"] = cfg.checkpoint_dir.string();
  j["extractor_weights"] = cfg.extractor_weights.string();
  j["gan_loss"] = to_string(cfg.gan_loss);
#define X(f) j[#f] = cfg.f;
  PHOTOCARI_CFG_FIELDS(X)
#undef X
}

void from_json(const json& j, TrainConfig& cfg) {
  if (j.contains("hp")) {
    j.at("hp").get_to(cfg.hp);
  }
  for (auto [key, path] : {std::pair{"data_root", &cfg.data_root}, std::pair{"checkpoint_dir", &cfg.checkpoint_dir},
                           std::pair{"extractor_weights", &cfg.extractor_weights}}) {
    if (j.contains(key)) {
      *path = j.at(key).get<std::string>();
    }
  }
  if (j.contains("gan_loss")) {
    cfg.gan_loss = gan_loss_from_string(j.at("gan_loss").get<std::string>());
  }
#define X(f)                     \
  if (j.contains(#f)) {          \
    j.at(#f).get_to(cfg.f);      \
  }
  PHOTOCARI_CFG_FIELDS(X)
#undef X
}

TrainConfig load_config(const fs::path& path, const TrainConfig& base) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  TrainConfig cfg = base;
  try {
    json::parse(in).get_to(cfg);
  } catch (const json::exception& e) {
    throw ConfigError("invalid config " + path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

void save_config(const fs::path& path, const TrainConfig& cfg) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write config file " + path.string());
  }
  out << json(cfg).dump(2) << "\n";
}

}  // namespace photocari
