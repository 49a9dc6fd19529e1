#ifndef PHOTOCARI_TRAINER_HPP
#define PHOTOCARI_TRAINER_HPP

#include <cstdint>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "photocari/config.hpp"
#include "photocari/data_pipeline.hpp"
#include "photocari/extractor.hpp"
#include "photocari/model.hpp"
#include "photocari/style_losses.hpp"

namespace photocari {

// Named scalar loss values of one step, in a fixed order.
using LossTerms = std::vector<std::pair<std::string, double>>;

double term(const LossTerms& terms, const std::string& name);

using StepCallback = std::function<void(int64_t step, const LossTerms& terms)>;

// Stage 1: alternating updates of {Enc_a, Enc_b, Dec_a, Dec_b} against
// lambda_r L_rec + lambda_K L_KL + lambda_a L_adv^G + lambda_c L_cont
// + lambda_ctr L_ctr, and of the four style discriminators against
// lambda_a L_adv^D. One generator step per discriminator step.
class Stage1Trainer {
 public:
  // `resume` must be a stage-1 checkpoint when given.
  Stage1Trainer(TrainConfig cfg, std::optional<Checkpoint> resume = std::nullopt);

  // One generator update followed by one discriminator update. Throws
  // NonFiniteLoss listing every term when any value is not finite.
  LossTerms step();

  // The two halves of step(), for callers that supply their own batches.
  // generator_step updates only the backbone and keeps the detached renders;
  // discriminator_step updates only the style discriminators against them.
  LossTerms generator_step(const ImageTensor& x, const ImageTensor& y);
  double discriminator_step(const ImageTensor& x, const ImageTensor& y);

  UnpairedBatch next_batch();

  int64_t steps_done() const { return step_; }
  Checkpoint checkpoint() const;
  CaricatureModel& model() { return model_; }

  // Loss terms on a given batch without updating anything.
  LossTerms evaluate(const ImageTensor& x, const ImageTensor& y);

 private:
  struct Forward;
  Forward forward(const ImageTensor& x, const ImageTensor& y);

  TrainConfig cfg_;
  CaricatureModel model_{nullptr};
  PerceptualExtractor extractor_{nullptr};
  std::unique_ptr<ImageBank> bank_;
  std::unique_ptr<torch::optim::Adam> opt_g_, opt_d_;
  std::optional<StyleFakes> last_fakes_;
  int64_t step_ = 0;
};

// Stage 2: the backbone is frozen; DPM_a, DPM_b minimise
// lambda_a L_adv^warpG + lambda_i L_idt and D_a, D_b minimise
// lambda_a L_adv^warpD.
class Stage2Trainer {
 public:
  // Throws StageMismatch unless `stage1.stage == 1` (or a stage-2 checkpoint
  // passed with `resume = true`).
  Stage2Trainer(TrainConfig cfg, const Checkpoint& stage1, bool resume = false);

  LossTerms step();

  int64_t steps_done() const { return step_; }
  Checkpoint checkpoint() const;
  CaricatureModel& model() { return model_; }

 private:
  TrainConfig cfg_;
  CaricatureModel model_{nullptr};
  std::unique_ptr<ImageBank> bank_;
  std::unique_ptr<torch::optim::Adam> opt_g_, opt_d_;
  int64_t step_ = 0;
};

// Runs cfg.hp.steps_stage1 steps, writes `step\tterm\tvalue` lines to
// <checkpoint_dir>/stage1.log every log_every steps, saves
// stage1_step<N>.ckpt every save_every steps and stage1.ckpt at the end.
Checkpoint train_stage1(const TrainConfig& cfg, const StepCallback& on_step = {});

// As train_stage1 for stage 2 (stage2.log, stage2.ckpt).
Checkpoint train_stage2(const TrainConfig& cfg, const Checkpoint& stage1, const StepCallback& on_step = {});

// Continues the stage of `ckpt` up to that stage's step count in cfg,
// appending to the existing log.
Checkpoint resume_training(const TrainConfig& cfg, const Checkpoint& ckpt, const StepCallback& on_step = {});

}  // namespace photocari

#endif  // PHOTOCARI_TRAINER_HPP
