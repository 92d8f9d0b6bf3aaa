// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "idn/dataset.hpp"
#include "idn/model.hpp"
#include "idn/tensor.hpp"

namespace idn {

template <class T>
struct LossResult {
  double value = 0.0;
  BasicTensor<T> grad;  // d loss / d prediction
};

/// (1/N) * sum_i ||I_i - Î_i||_1 with N the batch size. The subgradient at
/// exact ties is zero.
template <class T>
LossResult<T> loss_mae(const BasicTensor<T>& prediction, const BasicTensor<T>& truth);

/// (1/N) * sum_i ||I_i - Î_i||_2^2.
template <class T>
LossResult<T> loss_mse(const BasicTensor<T>& prediction, const BasicTensor<T>& truth);

enum class LossKind { MAE, MSE };

template <class T>
LossResult<T> compute_loss(LossKind kind, const BasicTensor<T>& prediction,
                           const BasicTensor<T>& truth);

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Classic L2 coupling: g += weight_decay * p before the moment updates.
  double weight_decay = 1e-4;
};

template <class T>
struct AdamState {
  AdamOptions options;
  std::uint64_t t = 0;
  std::map<std::string, BasicTensor<T>> m;
  std::map<std::string, BasicTensor<T>> v;

  AdamState() = default;
  explicit AdamState(AdamOptions o) : options(o) {}
};

/// One Adam update over named parameters. Every parameter needs a gradient
/// of the same shape; otherwise StateError / ShapeError.
template <class T>
void adam_step(const std::vector<std::pair<std::string, BasicTensor<T>*>>& params,
               const std::map<std::string, BasicTensor<T>>& grads, AdamState<T>& state);

template <class T>
void adam_step(ModelParams<T>& params, const std::map<std::string, BasicTensor<T>>& grads,
               AdamState<T>& state);

enum class Phase { Pretrain = 0, MaeTrain = 1, MseFinetune = 2 };

std::string_view phase_name(Phase phase);

struct PhasePlan {
  Phase phase = Phase::MaeTrain;
  std::size_t iterations = 0;
  double lr = 1e-4;
  LossKind loss = LossKind::MAE;
  PatchSpec patch;
};

/// Ordered phases plus the loop-wide settings.
struct TrainSchedule {
  std::vector<PhasePlan> phases;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  std::size_t log_every = 100;
  std::size_t checkpoint_every = 1000;
  /// Caps the total number of iterations across phases (nullopt = none).
  std::optional<std::size_t> max_iterations;
  AdamOptions adam;

  /// pretrain (MAE, training patches, lr) -> MAE train (training patches,
  /// lr) -> MSE fine-tune (fine-tuning patches, lr / 10).
  static TrainSchedule standard(std::size_t scale, std::size_t pretrain_iters,
                                std::size_t train_iters, std::size_t finetune_iters,
                                double lr = 1e-4);

  std::size_t total_iterations() const;
  void validate() const;
};

struct LogEntry {
  std::size_t iteration = 0;
  Phase phase = Phase::MaeTrain;
  double loss = 0.0;
  double lr = 0.0;
};

/// `iter<TAB>phase<TAB>loss<TAB>lr`
std::string format_log_entry(const LogEntry& entry);

/// Resume sidecar: where the loop stopped and the optimizer moments.
template <class T>
struct ResumeState {
  std::size_t iteration = 0;  // iterations completed
  Phase phase = Phase::Pretrain;
  std::string rng_state;
  AdamState<T> adam;
};

inline constexpr char kResumeMagic[4] = {'I', 'D', 'N', 'R'};
inline constexpr std::uint32_t kResumeVersion = 1;

template <class T>
void save_resume(const std::filesystem::path& path, const ResumeState<T>& state);
template <class T>
ResumeState<T> load_resume(const std::filesystem::path& path);

struct TrainOutputs {
  /// When set, checkpoints, the resume sidecar and loss.log go here.
  std::optional<std::filesystem::path> directory;
  std::string checkpoint_name = "idn.ckpt";
  std::function<void(const LogEntry&)> on_log;
};

template <class T>
struct TrainResult {
  ModelParams<T> params;
  std::vector<LogEntry> log;
  std::size_t iterations = 0;
};

/// Runs the schedule's phases in order. Deterministic in schedule.seed when
/// kernels run single-threaded. A non-finite loss throws DivergenceError and
/// leaves the last written checkpoint untouched.
template <class T>
TrainResult<T> train_loop(const TrainSchedule& schedule, const IdnConfig& config,
                          ModelParams<T> params, TrainingCorpus& corpus,
                          const TrainOutputs& outputs = {},
                          const ResumeState<T>* resume = nullptr);

/// Loss of `params` on a fixed batch, train-mode geometry.
template <class T>
double evaluate_loss(const ModelParams<T>& params, const IdnConfig& config, const Batch<T>& batch,
                     LossKind kind);

}  // namespace idn
