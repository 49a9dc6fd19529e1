#include "photocari/extractor.hpp"

#include <algorithm>
#include <cmath>

#include <ATen/CPUGeneratorImpl.h>

#include "photocari/errors.hpp"

namespace photocari {

namespace fs = std::filesystem;
namespace nn = torch::nn;

namespace {

struct VggLayer {
  std::string conv;
  std::string tap;
  int64_t in_channels;
  int64_t out_channels;
  bool pool_before;
};

const std::vector<VggLayer>& vgg19_layers() {
  static const std::vector<VggLayer> layers = [] {
    const int64_t widths[] = {64, 128, 256, 512, 512};
    const int depth[] = {2, 2, 4, 4, 4};
    std::vector<VggLayer> out;
    int64_t in = 3;
    for (int b = 0; b < 5; ++b) {
      for (int i = 0; i < depth[b]; ++i) {
        const std::string suffix = std::to_string(b + 1) + "_" + std::to_string(i + 1);
        out.push_back({"conv" + suffix, "relu" + suffix, in, widths[b], i == 0 && b > 0});
        in = widths[b];
      }
    }
    return out;
  }();
  return layers;
}

std::size_t tap_position(const std::string& tap) {
  const auto& layers = vgg19_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].tap == tap) {
      return i;
    }
  }
  throw ConfigError("unknown extractor layer '" + tap + "'");
}

std::string missing_hint(const fs::path& weights) {
  return "extractor weights not available at '" + weights.string() +
         "'; export pretrained VGG-19 weights with tools/export_vgg19.py or create desk weights with "
         "`photocari make-extractor --out " + weights.string() + "`";
}

}  // namespace

const std::vector<std::string>& vgg19_taps() {
  static const std::vector<std::string> taps = [] {
    std::vector<std::string> out;
    for (const auto& l : vgg19_layers()) {
      out.push_back(l.tap);
    }
    return out;
  }();
  return taps;
}

std::string deeper_tap(const std::string& a, const std::string& b) {
  return tap_position(a) >= tap_position(b) ? a : b;
}

PerceptualExtractorImpl::PerceptualExtractorImpl(const std::string& deepest_tap) {
  const std::size_t last = tap_position(deepest_tap);
  for (std::size_t i = 0; i <= last; ++i) {
    const auto& l = vgg19_layers()[i];
    stages_.push_back({l.conv, l.tap, l.pool_before});
    conv_names_.push_back(l.conv);
    convs_.push_back(
        register_module(l.conv, nn::Conv2d(nn::Conv2dOptions(l.in_channels, l.out_channels, 3).padding(1))));
  }
  mean_ = register_buffer("mean", torch::tensor({0.485f, 0.456f, 0.406f}).view({1, 3, 1, 1}));
  std_ = register_buffer("std", torch::tensor({0.229f, 0.224f, 0.225f}).view({1, 3, 1, 1}));
}

std::map<std::string, torch::Tensor> PerceptualExtractorImpl::forward(const torch::Tensor& images,
                                                                      const std::vector<std::string>& taps) {
  std::size_t last = 0;
  for (const auto& t : taps) {
    last = std::max(last, tap_position(t));
  }
  if (last >= stages_.size()) {
    throw ExtractorUnavailable("extractor was built without layer " + vgg19_layers()[last].tap);
  }
  std::map<std::string, torch::Tensor> out;
  auto x = ((images + 1.0) * 0.5 - mean_) / std_;
  for (std::size_t i = 0; i <= last; ++i) {
    if (stages_[i].pool_before) {
      x = torch::max_pool2d(x, 2);
    }
    x = torch::relu(convs_[i]->forward(x));
    if (std::find(taps.begin(), taps.end(), stages_[i].tap_name) != taps.end()) {
      out.emplace(stages_[i].tap_name, x);
    }
  }
  return out;
}

torch::Tensor PerceptualExtractorImpl::forward(const torch::Tensor& images, const std::string& tap) {
  return forward(images, std::vector<std::string>{tap}).at(tap);
}

PerceptualExtractor load_extractor(const fs::path& weights, const std::string& deepest_tap) {
  if (!fs::is_regular_file(weights)) {
    throw ExtractorUnavailable(missing_hint(weights));
  }
  PerceptualExtractor extractor(deepest_tap);
  torch::serialize::InputArchive archive;
  try {
    archive.load_from(weights.string());
  } catch (const c10::Error& e) {
    throw ExtractorUnavailable("cannot read extractor weights '" + weights.string() + "'");
  }
  torch::NoGradGuard no_grad;
  std::size_t i = 0;
  for (const auto& name : extractor->conv_names()) {
    auto& conv = extractor->conv(i++);
    // flat keys from write_extractor, or a scripted module with conv submodules
    torch::serialize::InputArchive sub;
    const bool nested = archive.try_read(name, sub);
    for (auto [suffix, param] : {std::pair{".weight", conv->weight}, std::pair{".bias", conv->bias}}) {
      torch::Tensor loaded;
      const bool found = nested ? sub.try_read(std::string(suffix).substr(1), loaded) : archive.try_read(name + suffix, loaded);
      if (!found) {
        throw ExtractorUnavailable("extractor weights '" + weights.string() + "' lack " + name + suffix + "; " +
                                   missing_hint(weights));
      }
      if (loaded.sizes() != param.sizes()) {
        throw ExtractorUnavailable("extractor tensor " + name + suffix + " has the wrong shape");
      }
      param.copy_(loaded.to(param.dtype()));
    }
  }
  for (auto& p : extractor->parameters()) {
    p.set_requires_grad(false);
  }
  extractor->eval();
  return extractor;
}

void write_extractor(const fs::path& weights, const std::map<std::string, torch::Tensor>& tensors) {
  torch::serialize::OutputArchive archive;
  for (const auto& [name, t] : tensors) {
    archive.write(name, t.detach().to(torch::kCPU, torch::kFloat32).contiguous());
  }
  if (weights.has_parent_path()) {
    fs::create_directories(weights.parent_path());
  }
  try {
    archive.save_to(weights.string());
  } catch (const c10::Error& e) {
    throw IoError("cannot write extractor weights '" + weights.string() + "'");
  }
}

void write_random_extractor(const fs::path& weights, const std::string& deepest_tap, std::uint64_t seed) {
  auto gen = at::make_generator<at::CPUGeneratorImpl>(seed);
  std::map<std::string, torch::Tensor> tensors;
  const std::size_t last = tap_position(deepest_tap);
  for (std::size_t i = 0; i <= last; ++i) {
    const auto& l = vgg19_layers()[i];
    const double fan_in = static_cast<double>(l.in_channels * 9);
    tensors[l.conv + ".weight"] =
        at::randn({l.out_channels, l.in_channels, 3, 3}, gen, torch::kFloat32) * std::sqrt(2.0 / fan_in);
    tensors[l.conv + ".bias"] = torch::zeros({l.out_channels});
  }
  write_extractor(weights, tensors);
}

}  // namespace photocari
