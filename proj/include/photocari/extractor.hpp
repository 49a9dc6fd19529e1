#ifndef PHOTOCARI_EXTRACTOR_HPP
#define PHOTOCARI_EXTRACTOR_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace photocari {

// Frozen VGG-19 style feature stack used for the perceptual content loss and
// the Gram style features. Layers are named conv{block}_{index} and taps are
// named relu{block}_{index}. Only the prefix up to the deepest requested tap
// is built.
//
// Weight files are libtorch archives with keys "conv1_1.weight",
// "conv1_1.bias", ... for every convolution up to the deepest tap, or saved
// TorchScript modules holding conv1_1, conv1_2, ... submodules (see
// tools/export_vgg19.py). Inputs are images in [-1, 1]; ImageNet normalisation happens inside forward.
class PerceptualExtractorImpl : public torch::nn::Module {
 public:
  explicit PerceptualExtractorImpl(const std::string& deepest_tap);

  // Returns one feature map per requested tap.
  std::map<std::string, torch::Tensor> forward(const torch::Tensor& images,
                                               const std::vector<std::string>& taps);
  torch::Tensor forward(const torch::Tensor& images, const std::string& tap);

  const std::vector<std::string>& conv_names() const { return conv_names_; }
  torch::nn::Conv2d& conv(std::size_t i) { return convs_.at(i); }

 private:
  struct Stage {
    std::string conv_name;
    std::string tap_name;
    bool pool_before;
  };
  std::vector<Stage> stages_;
  std::vector<std::string> conv_names_;
  std::vector<torch::nn::Conv2d> convs_;
  torch::Tensor mean_, std_;
};
TORCH_MODULE(PerceptualExtractor);

// All tap names in network order ("relu1_1" ... "relu5_4").
const std::vector<std::string>& vgg19_taps();

// Loads a frozen extractor able to produce `deepest_tap`. Throws
// ExtractorUnavailable when the file is missing or lacks a required layer.
PerceptualExtractor load_extractor(const std::filesystem::path& weights, const std::string& deepest_tap);

// Deeper of two tap names.
std::string deeper_tap(const std::string& a, const std::string& b);

// Writes He-initialised VGG-19 weights up to `deepest_tap`, seeded. Used when
// no pretrained weights are available (tests, desk runs).
void write_random_extractor(const std::filesystem::path& weights, const std::string& deepest_tap,
                            std::uint64_t seed);

// Writes named tensors in the extractor archive layout.
void write_extractor(const std::filesystem::path& weights, const std::map<std::string, torch::Tensor>& tensors);

}  // namespace photocari

#endif  // PHOTOCARI_EXTRACTOR_HPP
