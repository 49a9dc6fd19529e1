#ifndef PHOTOCARI_MODEL_HPP
#define PHOTOCARI_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <string>

#include <torch/torch.h>

#include "photocari/backbone.hpp"
#include "photocari/config.hpp"
#include "photocari/dpm.hpp"
#include "photocari/tps_warp.hpp"

namespace photocari {

// Every trainable parameter set of both streams.
class CaricatureModelImpl : public torch::nn::Module {
 public:
  explicit CaricatureModelImpl(const TrainConfig& cfg);

  BackbonePair backbone{nullptr};
  StyleDiscriminatorSet style_disc{nullptr};
  DpmPair dpm{nullptr};
  WarpDiscriminatorSet warp_disc{nullptr};

  const ControlPointSet& control_points() const { return control_points_; }

 private:
  ControlPointSet control_points_;
};
TORCH_MODULE(CaricatureModel);

inline constexpr int64_t kCheckpointFormatVersion = 1;

struct Checkpoint {
  int stage = 1;
  int64_t step = 0;
  TrainConfig config;
  CaricatureModel model{nullptr};
  // Serialised optimizer archives; empty when not trained yet.
  std::string generator_optimizer;
  std::string discriminator_optimizer;
  int64_t format_version = kCheckpointFormatVersion;
};

// Fresh, randomly initialised model for `cfg` (seeded from cfg.seed).
Checkpoint make_initial_checkpoint(const TrainConfig& cfg, int stage = 1);

// Deep copy through an in-memory archive; parameters are not shared.
Checkpoint clone_checkpoint(const Checkpoint& ckpt);

// Single-file archive; written to a temporary file and renamed into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Throws IoError on unreadable files or format-version mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Order-sensitive FNV-1a hash over the raw bytes of every parameter.
std::uint64_t parameter_hash(const torch::nn::Module& module);

}  // namespace photocari

#endif  // PHOTOCARI_MODEL_HPP
