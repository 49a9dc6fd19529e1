#include "photocari/model.hpp"

#include <sstream>

#include "photocari/errors.hpp"

namespace photocari {

namespace fs = std::filesystem;

CaricatureModelImpl::CaricatureModelImpl(const TrainConfig& cfg)
    : control_points_(make_control_points(cfg.control_grid_k)) {
  BackboneOptions bopts{cfg.image_size, cfg.latent_channels};
  backbone = register_module("backbone", BackbonePair(bopts));
  style_disc = register_module("style_disc", StyleDiscriminatorSet(bopts));
  dpm = register_module("dpm", DpmPair(DpmOptions{control_points_.n_free(), cfg.d_max, 32}));
  warp_disc = register_module("warp_disc", WarpDiscriminatorSet(cfg.image_size, bopts.base_channels()));
}

Checkpoint make_initial_checkpoint(const TrainConfig& cfg, int stage) {
  cfg.validate();
  torch::manual_seed(cfg.seed);
  Checkpoint ckpt;
  ckpt.stage = stage;
  ckpt.config = cfg;
  ckpt.model = CaricatureModel(cfg);
  return ckpt;
}

Checkpoint clone_checkpoint(const Checkpoint& ckpt) {
  Checkpoint copy = ckpt;
  copy.model = CaricatureModel(ckpt.config);
  std::stringstream buffer;
  torch::serialize::OutputArchive out;
  ckpt.model->save(out);
  out.save_to(buffer);
  torch::serialize::InputArchive in;
  in.load_from(buffer);
  copy.model->load(in);
  return copy;
}

void save_checkpoint(const Checkpoint& ckpt, const fs::path& path) {
  torch::serialize::OutputArchive archive;
  archive.write("format_version", c10::IValue(ckpt.format_version));
  archive.write("stage", c10::IValue(static_cast<int64_t>(ckpt.stage)));
  archive.write("step", c10::IValue(ckpt.step));
  archive.write("config", c10::IValue(nlohmann::json(ckpt.config).dump()));
  archive.write("generator_optimizer", c10::IValue(ckpt.generator_optimizer));
  archive.write("discriminator_optimizer", c10::IValue(ckpt.discriminator_optimizer));
  torch::serialize::OutputArchive model_archive;
  ckpt.model->save(model_archive);
  archive.write("model", model_archive);

  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  try {
    archive.save_to(tmp.string());
    fs::rename(tmp, path);
  } catch (const std::exception& e) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw IoError("cannot write checkpoint " + path.string() + ": " + e.what());
  }
}

Checkpoint load_checkpoint(const fs::path& path) {
  if (!fs::is_regular_file(path)) {
    throw IoError("checkpoint not found: " + path.string());
  }
  torch::serialize::InputArchive archive;
  Checkpoint ckpt;
  try {
    archive.load_from(path.string());
    c10::IValue v;
    archive.read("format_version", v);
    ckpt.format_version = v.toInt();
    if (ckpt.format_version != kCheckpointFormatVersion) {
      throw IoError("unsupported checkpoint format_version " + std::to_string(ckpt.format_version));
    }
    archive.read("stage", v);
    ckpt.stage = static_cast<int>(v.toInt());
    archive.read("step", v);
    ckpt.step = v.toInt();
    archive.read("config", v);
    ckpt.config = nlohmann::json::parse(v.toStringRef()).get<TrainConfig>();
    archive.read("generator_optimizer", v);
    ckpt.generator_optimizer = v.toStringRef();
    archive.read("discriminator_optimizer", v);
    ckpt.discriminator_optimizer = v.toStringRef();

    ckpt.model = CaricatureModel(ckpt.config);
    torch::serialize::InputArchive model_archive;
    archive.read("model", model_archive);
    ckpt.model->load(model_archive);
  } catch (const c10::Error& e) {
    throw IoError("cannot read checkpoint " + path.string() + ": " + e.what_without_backtrace());
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint " + path.string() + " has an invalid config: " + e.what());
  }
  return ckpt;
}

std::uint64_t parameter_hash(const torch::nn::Module& module) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& p : module.parameters()) {
    auto t = p.detach().contiguous().cpu();
    const auto* bytes = static_cast<const unsigned char*>(t.data_ptr());
    const auto n = static_cast<std::size_t>(t.numel()) * t.element_size();
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace photocari
