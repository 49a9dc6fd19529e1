#ifndef PHOTOCARI_CONFIG_HPP
#define PHOTOCARI_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace photocari {

enum class GanLoss {
  NonSaturating,  // generator minimises -log D(fake)
  Minimax,        // generator minimises log(1 - D(fake))
};

struct HyperParams {
  // Weights of the four contrastive style terms.
  double alpha1 = 0.5;
  double alpha2 = 0.5;
  double alpha3 = 1.0;
  double alpha4 = 1.0;
  double lambda_r = 10.0;   // reconstruction
  double lambda_K = 1.0;    // KL
  double lambda_a = 1.0;    // adversarial (both stages)
  double lambda_c = 1.0;    // perceptual content
  double lambda_ctr = 0.5;  // contrastive style
  double lambda_i = 8.0;    // identity (stage 2)
  double mg = 2.0;          // contrastive margin

  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int64_t steps_stage1 = 100000;
  int64_t steps_stage2 = 50000;

  // Throws ConfigError on negative weights, mg <= 0 or betas outside (0, 1).
  void validate() const;
  bool operator==(const HyperParams&) const = default;
};

struct TrainConfig {
  HyperParams hp;
  std::filesystem::path data_root = "data";
  int64_t image_size = 256;
  int64_t batch_size = 1;
  std::uint64_t seed = 0;
  std::filesystem::path checkpoint_dir = "checkpoints";
  int64_t log_every = 1;
  int64_t save_every = 5000;
  GanLoss gan_loss = GanLoss::NonSaturating;
  int64_t control_grid_k = 4;
  double d_max = 0.1;
  double tps_reg = 1e-6;

  int64_t latent_channels = 256;
  std::filesystem::path extractor_weights = "vgg19_features.pt";
  std::string style_layer = "relu2_1";
  std::string content_layer = "relu3_1";
  int64_t holdout = 0;

  // Throws ConfigError when an invariant fails.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// Full-scale settings for training on a real corpus.
TrainConfig load_defaults();

// 64 px, steps (2000, 1000), C_lat = 64, k = 4. Paper weights unchanged.
TrainConfig desk_preset();

void to_json(nlohmann::json& j, const HyperParams& hp);
void from_json(const nlohmann::json& j, HyperParams& hp);
void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

// JSON config documents. Keys mirror the struct fields; keys absent from the
// file keep the value already in `base`.
TrainConfig load_config(const std::filesystem::path& path, const TrainConfig& base = load_defaults());
void save_config(const std::filesystem::path& path, const TrainConfig& cfg);

std::string to_string(GanLoss g);
GanLoss gan_loss_from_string(const std::string& s);

}  // namespace photocari

#endif  // PHOTOCARI_CONFIG_HPP
