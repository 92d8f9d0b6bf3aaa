// SPDX-License-Identifier: Apache-2.0
#include "idn/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "idn/checkpoint.hpp"
#include "idn/error.hpp"
#include "idn/tape.hpp"

namespace idn {
namespace {

template <class T>
void check_pair(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": prediction " + a.shape().str() + " vs truth " +
                     b.shape().str());
  }
  if (a.empty()) throw ShapeError(std::string(what) + ": empty batch");
}

}  // namespace

template <class T>
LossResult<T> loss_mae(const BasicTensor<T>& prediction, const BasicTensor<T>& truth) {
  check_pair(prediction, truth, "loss_mae");
  const double inv_n = 1.0 / static_cast<double>(prediction.n());
  LossResult<T> out{0.0, BasicTensor<T>(prediction.shape())};
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction[i]) - static_cast<double>(truth[i]);
    sum += std::abs(d);
    out.grad[i] = static_cast<T>(d > 0 ? inv_n : (d < 0 ? -inv_n : 0.0));
  }
  out.value = sum * inv_n;
  return out;
}

template <class T>
LossResult<T> loss_mse(const BasicTensor<T>& prediction, const BasicTensor<T>& truth) {
  check_pair(prediction, truth, "loss_mse");
  const double inv_n = 1.0 / static_cast<double>(prediction.n());
  LossResult<T> out{0.0, BasicTensor<T>(prediction.shape())};
  double sum = 0.0;
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction[i]) - static_cast<double>(truth[i]);
    sum += d * d;
    out.grad[i] = static_cast<T>(2.0 * d * inv_n);
  }
  out.value = sum * inv_n;
  return out;
}

template <class T>
LossResult<T> compute_loss(LossKind kind, const BasicTensor<T>& prediction,
                           const BasicTensor<T>& truth) {
  return kind == LossKind::MAE ? loss_mae(prediction, truth) : loss_mse(prediction, truth);
}

template <class T>
void adam_step(const std::vector<std::pair<std::string, BasicTensor<T>*>>& params,
               const std::map<std::string, BasicTensor<T>>& grads, AdamState<T>& state) {
  for (const auto& [name, p] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) throw StateError("adam: no gradient for parameter " + name);
    if (it->second.shape() != p->shape()) {
      throw ShapeError("adam: gradient shape mismatch for " + name);
    }
  }
  const AdamOptions& o = state.options;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (const auto& [name, p] : params) {
    const BasicTensor<T>& g = grads.at(name);
    auto [mi, m_new] = state.m.try_emplace(name, p->shape());
    auto [vi, v_new] = state.v.try_emplace(name, p->shape());
    BasicTensor<T>& m = mi->second;
    BasicTensor<T>& v = vi->second;
    if (m.shape() != p->shape() || v.shape() != p->shape()) {
      throw StateError("adam: moment shape mismatch for " + name);
    }
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double pi = static_cast<double>((*p)[i]);
      const double gi = static_cast<double>(g[i]) + o.weight_decay * pi;
      const double mi_ = o.beta1 * static_cast<double>(m[i]) + (1.0 - o.beta1) * gi;
      const double vi_ = o.beta2 * static_cast<double>(v[i]) + (1.0 - o.beta2) * gi * gi;
      m[i] = static_cast<T>(mi_);
      v[i] = static_cast<T>(vi_);
      (*p)[i] = static_cast<T>(pi - o.lr * (mi_ / c1) / (std::sqrt(vi_ / c2) + o.eps));
    }
  }
}

template <class T>
void adam_step(ModelParams<T>& params, const std::map<std::string, BasicTensor<T>>& grads,
               AdamState<T>& state) {
  std::vector<std::pair<std::string, BasicTensor<T>*>> list;
  params.for_each_tensor([&](const std::string& name, BasicTensor<T>& t) { list.emplace_back(name, &t); });
  adam_step(list, grads, state);
}

std::string_view phase_name(Phase phase) {
  switch (phase) {
    case Phase::Pretrain: return "pretrain";
    case Phase::MaeTrain: return "mae_train";
    case Phase::MseFinetune: return "mse_finetune";
  }
  return "unknown";
}

TrainSchedule TrainSchedule::standard(std::size_t scale, std::size_t pretrain_iters,
                                      std::size_t train_iters, std::size_t finetune_iters,
                                      double lr) {
  TrainSchedule s;
  const PatchSpec train = PatchSpec::standard(scale, PatchPhase::Training);
  const PatchSpec fine = PatchSpec::standard(scale, PatchPhase::FineTuning);
  s.phases.push_back({Phase::Pretrain, pretrain_iters, lr, LossKind::MAE, train});
  s.phases.push_back({Phase::MaeTrain, train_iters, lr, LossKind::MAE, train});
  s.phases.push_back({Phase::MseFinetune, finetune_iters, lr / 10.0, LossKind::MSE, fine});
  return s;
}

std::size_t TrainSchedule::total_iterations() const {
  std::size_t total = 0;
  for (const auto& p : phases) total += p.iterations;
  if (max_iterations) total = std::min(total, *max_iterations);
  return total;
}

void TrainSchedule::validate() const {
  if (batch_size == 0) throw UsageError("schedule: batch size must be >= 1");
  if (log_every == 0) throw UsageError("schedule: log interval must be >= 1");
  for (const auto& p : phases) {
    if (!(p.lr > 0.0) || !std::isfinite(p.lr)) throw UsageError("schedule: learning rate must be > 0");
    p.patch.validate();
  }
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw UsageError("schedule: Adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0) || adam.weight_decay < 0.0) {
    throw UsageError("schedule: Adam eps must be > 0 and weight decay >= 0");
  }
}

std::string format_log_entry(const LogEntry& entry) {
  std::ostringstream os;
  os.precision(9);
  os << entry.iteration << '\t' << phase_name(entry.phase) << '\t' << entry.loss << '\t'
     << entry.lr;
  return os.str();
}

template <class T>
void save_resume(const std::filesystem::path& path, const ResumeState<T>& state) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(kResumeMagic, 4);
    write_u32(out, kResumeVersion);
    write_u64(out, state.iteration);
    write_u32(out, static_cast<std::uint32_t>(state.phase));
    write_u64(out, state.adam.t);
    write_u32(out, static_cast<std::uint32_t>(state.rng_state.size()));
    out.write(state.rng_state.data(), static_cast<std::streamsize>(state.rng_state.size()));
    write_u32(out, static_cast<std::uint32_t>(state.adam.m.size()));
    for (const auto& [name, t] : state.adam.m) {
      write_tensor_record(out, name, t.template cast<float>());
      write_tensor_record(out, name, state.adam.v.at(name).template cast<float>());
    }
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move resume record into place: " + ec.message());
}

template <class T>
ResumeState<T> load_resume(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open resume record " + path.string());
  char magic[4] = {};
  if (!in.read(magic, 4) || std::memcmp(magic, kResumeMagic, 4) != 0) {
    throw IoError(path.string() + ": not a resume record (bad magic)");
  }
  if (read_u32(in) != kResumeVersion) throw IoError(path.string() + ": unsupported version");
  ResumeState<T> s;
  s.iteration = read_u64(in);
  const std::uint32_t phase = read_u32(in);
  if (phase > 2) throw IoError(path.string() + ": bad phase");
  s.phase = static_cast<Phase>(phase);
  s.adam.t = read_u64(in);
  const std::uint32_t len = read_u32(in);
  if (len > (1u << 20)) throw IoError(path.string() + ": bad RNG state length");
  s.rng_state.resize(len);
  if (!in.read(s.rng_state.data(), len)) throw IoError(path.string() + ": truncated");
  const std::uint32_t count = read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord m = read_tensor_record(in);
    TensorRecord v = read_tensor_record(in);
    if (m.name != v.name) throw IoError(path.string() + ": moment records out of order");
    s.adam.m.emplace(m.name, m.value.template cast<T>());
    s.adam.v.emplace(v.name, v.value.template cast<T>());
  }
  return s;
}

template <class T>
double evaluate_loss(const ModelParams<T>& params, const IdnConfig& config, const Batch<T>& batch,
                     LossKind kind) {
  const BasicTensor<T> out = idn_forward(batch.lr, params, config, Mode::Train);
  return compute_loss(kind, out, batch.hr).value;
}

template <class T>
TrainResult<T> train_loop(const TrainSchedule& schedule, const IdnConfig& config,
                          ModelParams<T> params, TrainingCorpus& corpus,
                          const TrainOutputs& outputs, const ResumeState<T>* resume) {
  schedule.validate();
  config.validate();
  for (const auto& p : schedule.phases) {
    if (p.patch.scale != config.scale) throw UsageError("schedule patch scale differs from model scale");
  }

  TrainResult<T> result;
  std::mt19937_64 rng(schedule.seed);
  std::size_t global = 0;
  if (resume) {
    global = resume->iteration;
    std::istringstream is(resume->rng_state);
    is >> rng;
    if (!is) throw StateError("resume: corrupt RNG state");
  }
  const std::size_t total = schedule.total_iterations();

  std::filesystem::path ckpt_path, resume_path;
  std::ofstream log_file;
  if (outputs.directory) {
    std::filesystem::create_directories(*outputs.directory);
    ckpt_path = *outputs.directory / outputs.checkpoint_name;
    resume_path = ckpt_path;
    resume_path += ".resume";
    log_file.open(*outputs.directory / "loss.log", resume ? std::ios::app : std::ios::trunc);
    if (!log_file) throw IoError("cannot open loss log in " + outputs.directory->string());
  }

  AdamState<T> adam;
  Phase current = schedule.phases.empty() ? Phase::Pretrain : schedule.phases.front().phase;
  auto persist = [&] {
    if (!outputs.directory) return;
    save_checkpoint(ckpt_path, config, params);
    ResumeState<T> rs;
    rs.iteration = global;
    rs.phase = current;
    std::ostringstream os;
    os << rng;
    rs.rng_state = os.str();
    rs.adam = adam;
    save_resume(resume_path, rs);
  };

  std::size_t start = 0;
  for (const PhasePlan& plan : schedule.phases) {
    const std::size_t end = start + plan.iterations;
    const std::size_t begin = start;
    start = end;
    if (global >= end || plan.iterations == 0) continue;
    if (global >= total) break;
    current = plan.phase;

    AdamOptions opts = schedule.adam;
    opts.lr = plan.lr;
    if (resume && resume->iteration > begin && resume->iteration < end) {
      adam = resume->adam;
    } else {
      adam = AdamState<T>();  // each phase starts with fresh moments
    }
    adam.options = opts;

    while (global < end && global < total) {
      const Batch<T> batch = corpus.sample_batch<T>(plan.patch, schedule.batch_size, rng);
      Tape<T> tape;
      const Var x = tape.constant(batch.lr);
      const Var y = idn_forward(tape, x, params, config, Mode::Train);
      const LossResult<T> loss = compute_loss(plan.loss, tape.value(y), batch.hr);
      if (!std::isfinite(loss.value)) {
        throw DivergenceError("training diverged at iteration " + std::to_string(global + 1) +
                              " (" + std::string(phase_name(plan.phase)) + ")" +
                              (outputs.directory ? "; last good checkpoint: " + ckpt_path.string()
                                                 : std::string()));
      }
      const Gradients<T> grads = tape.backward(y, loss.grad);
      adam_step(params, grads.params, adam);
      ++global;
      ++result.iterations;

      if (global % schedule.log_every == 0 || global == end || global == total) {
        LogEntry entry{global, plan.phase, loss.value, plan.lr};
        result.log.push_back(entry);
        if (log_file.is_open()) log_file << format_log_entry(entry) << '\n' << std::flush;
        if (outputs.on_log) outputs.on_log(entry);
      }
      if (schedule.checkpoint_every > 0 && global % schedule.checkpoint_every == 0) persist();
    }
  }
  persist();
  result.params = std::move(params);
  return result;
}

#define IDN_TRAINING_INSTANTIATE(T)                                                              \
  template LossResult<T> loss_mae(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template LossResult<T> loss_mse(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template LossResult<T> compute_loss(LossKind, const BasicTensor<T>&, const BasicTensor<T>&);   \
  template void adam_step(const std::vector<std::pair<std::string, BasicTensor<T>*>>&,           \
                          const std::map<std::string, BasicTensor<T>>&, AdamState<T>&);         \
  template void adam_step(ModelParams<T>&, const std::map<std::string, BasicTensor<T>>&,         \
                          AdamState<T>&);                                                        \
  template void save_resume(const std::filesystem::path&, const ResumeState<T>&);                \
  template ResumeState<T> load_resume(const std::filesystem::path&);                             \
  template double evaluate_loss(const ModelParams<T>&, const IdnConfig&, const Batch<T>&,        \
                                LossKind);                                                       \
  template TrainResult<T> train_loop(const TrainSchedule&, const IdnConfig&, ModelParams<T>,     \
                                     TrainingCorpus&, const TrainOutputs&, const ResumeState<T>*);

IDN_TRAINING_INSTANTIATE(float)
IDN_TRAINING_INSTANTIATE(double)

}  // namespace idn
