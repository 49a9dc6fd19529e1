#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <torch/torch.h>

#include "photocari/config.hpp"
#include "photocari/data_pipeline.hpp"
#include "photocari/errors.hpp"
#include "photocari/extractor.hpp"
#include "photocari/image_io.hpp"
#include "photocari/inference.hpp"
#include "photocari/model.hpp"
#include "photocari/trainer.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace photocari;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

py::object to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_py(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

// `overrides` is merged into the preset the same way a partial JSON file is.
TrainConfig make_config(const py::object& overrides, const std::string& preset) {
  TrainConfig cfg;
  if (preset == "desk") {
    cfg = desk_preset();
  } else if (preset == "default") {
    cfg = load_defaults();
  } else {
    throw ConfigError("unknown preset '" + preset + "'");
  }
  if (!overrides.is_none()) {
    nlohmann::json j = cfg;
    j.merge_patch(from_py(overrides));
    cfg = j.get<TrainConfig>();
  }
  cfg.validate();
  return cfg;
}

RgbImage to_raster(const U8Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) {
    throw ShapeMismatch("expected an HxWx3 uint8 array");
  }
  RgbImage img;
  img.height = a.shape(0);
  img.width = a.shape(1);
  img.pixels.assign(a.data(), a.data() + a.size());
  return img;
}

U8Array to_array(const torch::Tensor& chw) {
  auto img = to_rgb8(chw);
  U8Array out({img.height, img.width, int64_t{3}});
  std::memcpy(out.mutable_data(), img.pixels.data(), img.pixels.size());
  return out;
}

Direction parse_direction(const std::string& d) {
  if (d == "p2c") return Direction::PhotoToCari;
  if (d == "c2p") return Direction::CariToPhoto;
  throw ConfigError("direction must be p2c or c2p");
}

class Model {
 public:
  explicit Model(const fs::path& path) : ckpt_(load_checkpoint(path)) {}
  explicit Model(Checkpoint ckpt) : ckpt_(std::move(ckpt)) {}

  int stage() const { return ckpt_.stage; }
  int64_t step() const { return ckpt_.step; }
  int64_t image_size() const { return ckpt_.config.image_size; }
  py::object config() const { return to_py(nlohmann::json(ckpt_.config)); }

  py::dict translate(const U8Array& image, const std::string& direction, double alpha,
                     std::optional<std::uint64_t> noise_seed, bool warp_c2p) {
    const auto dir = parse_direction(direction);
    auto raster = to_raster(image);
    Translation t;
    {
      py::gil_scoped_release release;
      auto x = preprocess(raster, ckpt_.config.image_size,
                          dir == Direction::PhotoToCari ? Domain::Photo : Domain::Caricature);
      TranslateOptions opts;
      opts.alpha = alpha;
      opts.noise_seed = noise_seed;
      opts.warp_cari_to_photo = warp_c2p;
      t = photocari::translate(ckpt_, x, dir, opts);
    }
    py::dict out;
    out["output"] = to_array(t.output.data[0]);
    out["rendered"] = to_array(t.rendered.data[0]);
    out["warped"] = t.warped;
    return out;
  }

  U8Array grid(const std::vector<U8Array>& images, const std::vector<double>& alphas,
               const std::vector<std::uint64_t>& seeds, double seed_alpha) {
    std::vector<ImageTensor> inputs;
    for (const auto& a : images) {
      inputs.push_back(preprocess(to_raster(a), ckpt_.config.image_size, Domain::Photo));
    }
    torch::Tensor m;
    {
      py::gil_scoped_release release;
      m = make_montage(ckpt_, inputs, alphas, seeds, seed_alpha);
    }
    return to_array(m);
  }

  py::dict eval_style(const fs::path& data, int64_t n, std::uint64_t seed) {
    StyleGapReport r;
    {
      py::gil_scoped_release release;
      r = eval_style_gap(ckpt_, load_corpus(data), n, seed);
    }
    py::dict out;
    out["n"] = r.n;
    out["to_caricature"] = r.to_caricature;
    out["to_photo"] = r.to_photo;
    out["ratio"] = r.ratio;
    return out;
  }

  void save(const fs::path& path) const { save_checkpoint(ckpt_, path); }

 private:
  Checkpoint ckpt_;
};

Model train(int stage, const py::object& overrides, const std::string& preset, std::optional<fs::path> stage1) {
  auto cfg = make_config(overrides, preset);
  if (stage != 1 && stage != 2) {
    throw ConfigError("stage must be 1 or 2");
  }
  py::gil_scoped_release release;
  if (stage == 1) {
    return Model(train_stage1(cfg));
  }
  const fs::path from = stage1 ? *stage1 : cfg.checkpoint_dir / "stage1.ckpt";
  return Model(train_stage2(cfg, load_checkpoint(from)));
}

}  // namespace

PYBIND11_MODULE(_photocari, m) {
  m.doc() = "Photo/caricature translation with learned warping";

  torch::set_num_threads(1);

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<MissingDomainDir>(m, "MissingDomainDir", base);
  py::register_exception<BadSize>(m, "BadSize", base);
  py::register_exception<ShapeMismatch>(m, "ShapeMismatch", base);
  py::register_exception<ChannelMismatch>(m, "ChannelMismatch", base);
  py::register_exception<DegenerateConfiguration>(m, "DegenerateConfiguration", base);
  py::register_exception<ExtractorUnavailable>(m, "ExtractorUnavailable", base);
  py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", base);
  py::register_exception<StageMismatch>(m, "StageMismatch", base);
  py::register_exception<IoError>(m, "IoError", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  m.attr("CHECKPOINT_FORMAT_VERSION") = kCheckpointFormatVersion;

  m.def(
      "config", [](const py::object& overrides, const std::string& preset) {
        return to_py(nlohmann::json(make_config(overrides, preset)));
      },
      py::arg("overrides") = py::none(), py::arg("preset") = "default",
      "Validated training config as a dict: the preset with `overrides` merged in.");

  m.def("make_extractor", &write_random_extractor, py::arg("path"), py::arg("deepest_tap") = "relu3_1",
        py::arg("seed") = 0, "Write randomly initialised extractor weights (for tests, not training).");

  m.def("train", &train, py::arg("stage"), py::arg("config") = py::none(), py::arg("preset") = "default",
        py::arg("stage1") = py::none(),
        "Run one training stage; writes logs and checkpoints under checkpoint_dir and returns the model.");

  py::class_<Model>(m, "Model")
      .def(py::init<const fs::path&>(), py::arg("path"))
      .def_property_readonly("stage", &Model::stage)
      .def_property_readonly("step", &Model::step)
      .def_property_readonly("image_size", &Model::image_size)
      .def_property_readonly("config", &Model::config)
      .def("translate", &Model::translate, py::arg("image"), py::arg("direction") = "p2c", py::arg("alpha") = 1.0,
           py::arg("noise_seed") = py::none(), py::arg("warp_c2p") = false,
           "Translate an HxWx3 uint8 image. Returns {'output', 'rendered', 'warped'}.")
      .def("grid", &Model::grid, py::arg("images"), py::arg("alphas") = std::vector<double>{},
           py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("seed_alpha") = 1.0)
      .def("eval_style", &Model::eval_style, py::arg("data"), py::arg("n") = 100, py::arg("seed") = 0)
      .def("save", &Model::save, py::arg("path"));
}
