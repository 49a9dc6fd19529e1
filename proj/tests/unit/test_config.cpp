#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "photocari/config.hpp"
#include "photocari/errors.hpp"
#include "support.hpp"

using namespace photocari;

TEST_SUITE("config") {
  TEST_CASE("defaults carry the published hyperparameters") {
    const auto cfg = load_defaults();
    const auto& hp = cfg.hp;
    CHECK(hp.alpha1 == 0.5);
    CHECK(hp.alpha2 == 0.5);
    CHECK(hp.alpha3 == 1.0);
    CHECK(hp.alpha4 == 1.0);
    CHECK(hp.lambda_r == 10.0);
    CHECK(hp.lambda_K == 1.0);
    CHECK(hp.lambda_a == 1.0);
    CHECK(hp.lambda_c == 1.0);
    CHECK(hp.lambda_ctr == 0.5);
    CHECK(hp.lambda_i == 8.0);
    CHECK(hp.mg == 2.0);
    CHECK(hp.lr == 1e-4);
    CHECK(hp.beta1 == 0.5);
    CHECK(hp.beta2 == 0.999);
    CHECK(hp.steps_stage1 == 100000);
    CHECK(hp.steps_stage2 == 50000);
    CHECK(cfg.batch_size == 1);
    CHECK(cfg.image_size == 256);
    CHECK(cfg.gan_loss == GanLoss::NonSaturating);
    CHECK(cfg.control_grid_k == 4);
    CHECK(cfg.d_max == 0.1);
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("desk preset") {
    const auto cfg = desk_preset();
    CHECK(cfg.image_size == 64);
    CHECK(cfg.latent_channels == 64);
    CHECK(cfg.control_grid_k == 4);
    CHECK(cfg.hp.steps_stage1 == 2000);
    CHECK(cfg.hp.steps_stage2 == 1000);
    CHECK(cfg.hp.lambda_r == load_defaults().hp.lambda_r);
    CHECK_NOTHROW(cfg.validate());
  }

  TEST_CASE("config file round trip") {
    testing::TempDir dir;
    auto cfg = load_defaults();
    save_config(dir / "a.json", cfg);
    CHECK(load_config(dir / "a.json") == cfg);

    auto odd = desk_preset();
    odd.gan_loss = GanLoss::Minimax;
    odd.seed = 12345678901234ULL;
    odd.hp.alpha3 = 0.25;
    odd.style_layer = "relu1_2";
    save_config(dir / "b.json", odd);
    CHECK(load_config(dir / "b.json") == odd);
  }

  TEST_CASE("keys mirror field names and absent keys keep the base") {
    testing::TempDir dir;
    nlohmann::json j = load_defaults();
    CHECK(j.contains("image_size"));
    CHECK(j.contains("control_grid_k"));
    CHECK(j["hp"].contains("lambda_ctr"));
    CHECK(j["gan_loss"] == "nonsaturating");

    std::ofstream(dir / "partial.json") << R"({"image_size": 128, "hp": {"mg": 3.0}})";
    auto cfg = load_config(dir / "partial.json", desk_preset());
    CHECK(cfg.image_size == 128);
    CHECK(cfg.hp.mg == 3.0);
    CHECK(cfg.hp.lambda_r == 10.0);
    CHECK(cfg.latent_channels == 64);
  }

  TEST_CASE("invalid documents and values") {
    testing::TempDir dir;
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    std::ofstream(dir / "loss.json") << R"({"gan_loss": "wasserstein"})";
    CHECK_THROWS_AS(load_config(dir / "loss.json"), ConfigError);

    auto cfg = load_defaults();
    cfg.image_size = 66;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = load_defaults();
    cfg.batch_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = load_defaults();
    cfg.hp.mg = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = load_defaults();
    cfg.hp.beta2 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = load_defaults();
    cfg.hp.lambda_i = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }

  TEST_CASE("gan loss names") {
    CHECK(gan_loss_from_string(to_string(GanLoss::Minimax)) == GanLoss::Minimax);
    CHECK(gan_loss_from_string(to_string(GanLoss::NonSaturating)) == GanLoss::NonSaturating);
    CHECK_THROWS_AS(gan_loss_from_string("hinge"), ConfigError);
  }
}
