#include "stabest/model.hpp"

#include <cmath>
#include <cstring>
#include <numeric>

#include "stabest/error.hpp"
#include "stabest/kernels.hpp"
#include "stabest/rng.hpp"

namespace stabest {

void ArchitectureSpec::validate() const {
  if (input_channels < 1 || input_length < 1) {
    throw ConfigError("model input shape must be positive");
  }
  if (convs.empty()) throw ConfigError("model needs at least one conv layer");
  int ch = input_channels;
  int len = input_length;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const ConvSpec& c = convs[i];
    if (c.in_channels != ch) {
      throw ConfigError("conv" + std::to_string(i + 1) + " expects " +
                        std::to_string(c.in_channels) + " channels, gets " + std::to_string(ch));
    }
    if (c.out_channels < 1 || c.kernel < 1 || c.stride < 1) {
      throw ConfigError("conv" + std::to_string(i + 1) + " has non-positive shape");
    }
    if (len < c.kernel) {
      throw ConfigError("conv" + std::to_string(i + 1) + " kernel " + std::to_string(c.kernel) +
                        " exceeds input length " + std::to_string(len));
    }
    len = (len - c.kernel) / c.stride + 1;
    ch = c.out_channels;
  }
  for (int w : dense_hidden) {
    if (w < 1) throw ConfigError("dense layer width must be positive");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw ConfigError("dropout_p must be in [0, 1)");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

namespace {

struct ConvPlan {
  int in_ch, out_ch, kernel, stride;
  int in_len, out_len, patch;  // patch = in_ch * kernel, one im2col row
  std::size_t w_off, b_off;
};

struct DensePlan {
  int in, out;
  bool relu;
  std::size_t w_off, b_off;
};

struct Plan {
  std::vector<ConvPlan> convs;
  std::vector<DensePlan> dense;  // hidden layers then the scalar output layer
  int gap_feats = 0;
  std::size_t total = 0;
};

Plan make_plan(const ArchitectureSpec& spec) {
  Plan plan;
  std::size_t off = 0;
  int len = spec.input_length;
  for (const ConvSpec& c : spec.convs) {
    ConvPlan cp;
    cp.in_ch = c.in_channels;
    cp.out_ch = c.out_channels;
    cp.kernel = c.kernel;
    cp.stride = c.stride;
    cp.in_len = len;
    cp.out_len = (len - c.kernel) / c.stride + 1;
    cp.patch = c.in_channels * c.kernel;
    cp.w_off = off;
    off += static_cast<std::size_t>(cp.out_ch) * cp.patch;
    cp.b_off = off;
    off += static_cast<std::size_t>(cp.out_ch);
    plan.convs.push_back(cp);
    len = cp.out_len;
  }
  plan.gap_feats = spec.convs.back().out_channels;

  int in = plan.gap_feats;
  for (int width : spec.dense_hidden) {
    DensePlan dp{in, width, true, off, 0};
    off += static_cast<std::size_t>(in) * width;
    dp.b_off = off;
    off += static_cast<std::size_t>(width);
    plan.dense.push_back(dp);
    in = width;
  }
  DensePlan out{in, 1, false, off, 0};
  off += static_cast<std::size_t>(in);
  out.b_off = off;
  off += 1;
  plan.dense.push_back(out);

  plan.total = off;
  return plan;
}

struct Workspace {
  std::vector<std::vector<double>> patches;  // per conv: out_len x patch
  std::vector<std::vector<double>> acts;     // per conv: out_ch x out_len, post-ReLU
  std::vector<double> gap, mask, dropped;
  std::vector<std::vector<double>> hidden;   // per dense layer, post-activation

  std::vector<std::vector<double>> dacts, dpatches;
  std::vector<double> dgap, ddropped;
  std::vector<std::vector<double>> dhidden;

  explicit Workspace(const Plan& plan) {
    patches.resize(plan.convs.size());
    acts.resize(plan.convs.size());
    dacts.resize(plan.convs.size());
    dpatches.resize(plan.convs.size());
    for (std::size_t l = 0; l < plan.convs.size(); ++l) {
      const ConvPlan& cp = plan.convs[l];
      patches[l].resize(static_cast<std::size_t>(cp.out_len) * cp.patch);
      acts[l].resize(static_cast<std::size_t>(cp.out_ch) * cp.out_len);
      dacts[l].resize(acts[l].size());
      dpatches[l].resize(patches[l].size());
    }
    gap.resize(static_cast<std::size_t>(plan.gap_feats));
    mask.resize(gap.size());
    dropped.resize(gap.size());
    dgap.resize(gap.size());
    ddropped.resize(gap.size());
    hidden.resize(plan.dense.size());
    dhidden.resize(plan.dense.size());
    for (std::size_t j = 0; j < plan.dense.size(); ++j) {
      hidden[j].resize(static_cast<std::size_t>(plan.dense[j].out));
      dhidden[j].resize(hidden[j].size());
    }
  }
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One sample through the network, caching every intermediate the backward
// pass needs. rng is non-null only for training-mode dropout.
double forward_sample(const Plan& plan, const ArchitectureSpec& spec, const double* params,
                      const double* x, Workspace& ws, Rng* rng) {
  const auto& K = kernels::active();

  const double* cur = x;
  int cur_len = spec.input_length;
  for (std::size_t l = 0; l < plan.convs.size(); ++l) {
    const ConvPlan& cp = plan.convs[l];
    double* patches = ws.patches[l].data();
    for (int ot = 0; ot < cp.out_len; ++ot) {
      double* row = patches + static_cast<std::size_t>(ot) * cp.patch;
      const double* base = cur + static_cast<std::size_t>(ot) * cp.stride;
      for (int c = 0; c < cp.in_ch; ++c) {
        std::memcpy(row + static_cast<std::size_t>(c) * cp.kernel,
                    base + static_cast<std::size_t>(c) * cur_len,
                    static_cast<std::size_t>(cp.kernel) * sizeof(double));
      }
    }
    double* act = ws.acts[l].data();
    for (int oc = 0; oc < cp.out_ch; ++oc) {
      const double* wrow = params + cp.w_off + static_cast<std::size_t>(oc) * cp.patch;
      const double bias = params[cp.b_off + static_cast<std::size_t>(oc)];
      double* arow = act + static_cast<std::size_t>(oc) * cp.out_len;
      for (int ot = 0; ot < cp.out_len; ++ot) {
        const double z = K.dot(wrow, patches + static_cast<std::size_t>(ot) * cp.patch, cp.patch) + bias;
        arow[ot] = z > 0.0 ? z : 0.0;
      }
    }
    cur = act;
    cur_len = cp.out_len;
  }

  const ConvPlan& last = plan.convs.back();
  for (int oc = 0; oc < last.out_ch; ++oc) {
    const double* arow = ws.acts.back().data() + static_cast<std::size_t>(oc) * last.out_len;
    double sum = 0.0;
    for (int ot = 0; ot < last.out_len; ++ot) sum += arow[ot];
    ws.gap[static_cast<std::size_t>(oc)] = sum / last.out_len;
  }

  // Inverted dropout: kept features are scaled by 1/keep so that the
  // eval-mode pass (mask = 1) matches the training-mode expectation.
  const double keep = 1.0 - spec.dropout_p;
  for (std::size_t i = 0; i < ws.gap.size(); ++i) {
    ws.mask[i] = (rng && spec.dropout_p > 0.0) ? (rng->uniform01() < keep ? 1.0 / keep : 0.0) : 1.0;
    ws.dropped[i] = ws.gap[i] * ws.mask[i];
  }

  const double* dcur = ws.dropped.data();
  for (std::size_t j = 0; j < plan.dense.size(); ++j) {
    const DensePlan& dp = plan.dense[j];
    double* out = ws.hidden[j].data();
    for (int o = 0; o < dp.out; ++o) {
      const double z =
          K.dot(params + dp.w_off + static_cast<std::size_t>(o) * dp.in, dcur, dp.in) +
          params[dp.b_off + static_cast<std::size_t>(o)];
      out[o] = dp.relu && z < 0.0 ? 0.0 : z;
    }
    dcur = out;
  }

  return sigmoid(ws.hidden.back()[0]);
}

// Accumulates dL/dparams for one sample into grads. dpred is dL/dprediction.
// The sample's activations are read back from the forward pass workspace.
void backward_sample(const Plan& plan, const double* params, Workspace& ws, double pred,
                     double dpred, double* grads) {
  const auto& K = kernels::active();

  double dlogit = dpred * pred * (1.0 - pred);

  // Dense chain, output layer first.
  for (std::size_t jr = plan.dense.size(); jr-- > 0;) {
    const DensePlan& dp = plan.dense[jr];
    double* dout = ws.dhidden[jr].data();
    if (jr == plan.dense.size() - 1) {
      dout[0] = dlogit;
    }
    if (dp.relu) {
      const double* h = ws.hidden[jr].data();
      for (int o = 0; o < dp.out; ++o) {
        if (h[o] <= 0.0) dout[o] = 0.0;  // ReLU gradient, zero at the kink
      }
    }
    const double* input = jr == 0 ? ws.dropped.data() : ws.hidden[jr - 1].data();
    double* dinput = jr == 0 ? ws.ddropped.data() : ws.dhidden[jr - 1].data();
    const std::size_t in_n = static_cast<std::size_t>(dp.in);
    std::memset(dinput, 0, in_n * sizeof(double));
    for (int o = 0; o < dp.out; ++o) {
      const double g = dout[o];
      grads[dp.b_off + static_cast<std::size_t>(o)] += g;
      if (g == 0.0) continue;
      const double* wrow = params + dp.w_off + static_cast<std::size_t>(o) * dp.in;
      K.axpy(g, input, grads + dp.w_off + static_cast<std::size_t>(o) * dp.in, in_n);
      K.axpy(g, wrow, dinput, in_n);
    }
  }

  for (std::size_t i = 0; i < ws.dgap.size(); ++i) {
    ws.dgap[i] = ws.ddropped[i] * ws.mask[i];
  }

  // Global average pool spreads gradient uniformly over time.
  const ConvPlan& last = plan.convs.back();
  for (int oc = 0; oc < last.out_ch; ++oc) {
    const double g = ws.dgap[static_cast<std::size_t>(oc)] / last.out_len;
    double* row = ws.dacts.back().data() + static_cast<std::size_t>(oc) * last.out_len;
    for (int ot = 0; ot < last.out_len; ++ot) row[ot] = g;
  }

  for (std::size_t lr = plan.convs.size(); lr-- > 0;) {
    const ConvPlan& cp = plan.convs[lr];
    double* dact = ws.dacts[lr].data();
    const double* act = ws.acts[lr].data();
    const double* patches = ws.patches[lr].data();

    for (std::size_t i = 0; i < ws.acts[lr].size(); ++i) {
      if (act[i] <= 0.0) dact[i] = 0.0;
    }

    const bool need_dinput = lr > 0;
    double* dpatch = ws.dpatches[lr].data();
    if (need_dinput) {
      std::memset(dpatch, 0, ws.dpatches[lr].size() * sizeof(double));
    }

    for (int oc = 0; oc < cp.out_ch; ++oc) {
      const double* drow = dact + static_cast<std::size_t>(oc) * cp.out_len;
      double* gw = grads + cp.w_off + static_cast<std::size_t>(oc) * cp.patch;
      const double* wrow = params + cp.w_off + static_cast<std::size_t>(oc) * cp.patch;
      double gb = 0.0;
      for (int ot = 0; ot < cp.out_len; ++ot) {
        const double g = drow[ot];
        gb += g;
        if (g == 0.0) continue;
        K.axpy(g, patches + static_cast<std::size_t>(ot) * cp.patch, gw, cp.patch);
        if (need_dinput) {
          K.axpy(g, wrow, dpatch + static_cast<std::size_t>(ot) * cp.patch, cp.patch);
        }
      }
      grads[cp.b_off + static_cast<std::size_t>(oc)] += gb;
    }

    if (need_dinput) {
      // col2im: scatter patch gradients back onto the previous activation.
      double* dprev = ws.dacts[lr - 1].data();
      const int prev_len = cp.in_len;
      std::memset(dprev, 0, ws.dacts[lr - 1].size() * sizeof(double));
      for (int ot = 0; ot < cp.out_len; ++ot) {
        const double* prow = dpatch + static_cast<std::size_t>(ot) * cp.patch;
        for (int c = 0; c < cp.in_ch; ++c) {
          double* dst = dprev + static_cast<std::size_t>(c) * prev_len + ot * cp.stride;
          const double* src = prow + static_cast<std::size_t>(c) * cp.kernel;
          for (int k = 0; k < cp.kernel; ++k) dst[k] += src[k];
        }
      }
    }
  }
}

void check_batch(const ArchitectureSpec& spec, std::span<const double> batch, int batch_size) {
  const std::size_t want = static_cast<std::size_t>(batch_size) * spec.input_channels *
                           spec.input_length;
  if (batch_size < 1 || batch.size() != want) {
    throw DataError("batch size mismatch: got " + std::to_string(batch.size()) +
                    " values for " + std::to_string(batch_size) + " samples");
  }
}

}  // namespace

ParamTable param_table(const ArchitectureSpec& spec) {
  spec.validate();
  const Plan plan = make_plan(spec);
  ParamTable table;
  for (std::size_t l = 0; l < plan.convs.size(); ++l) {
    const ConvPlan& cp = plan.convs[l];
    const std::string base = "conv" + std::to_string(l + 1);
    table.entries.push_back({base + ".weight",
                             {cp.out_ch, cp.in_ch, cp.kernel},
                             cp.w_off,
                             static_cast<std::size_t>(cp.out_ch) * cp.patch});
    table.entries.push_back(
        {base + ".bias", {cp.out_ch}, cp.b_off, static_cast<std::size_t>(cp.out_ch)});
  }
  for (std::size_t j = 0; j < plan.dense.size(); ++j) {
    const DensePlan& dp = plan.dense[j];
    const std::string base =
        j == plan.dense.size() - 1 ? "output" : "dense" + std::to_string(j + 1);
    table.entries.push_back({base + ".weight",
                             {dp.out, dp.in},
                             dp.w_off,
                             static_cast<std::size_t>(dp.out) * dp.in});
    table.entries.push_back(
        {base + ".bias", {dp.out}, dp.b_off, static_cast<std::size_t>(dp.out)});
  }
  table.total = plan.total;
  return table;
}

ModelCheckpoint init_weights(const ArchitectureSpec& spec, const TrainConfig& cfg,
                             std::uint64_t seed) {
  spec.validate();
  cfg.validate();
  const Plan plan = make_plan(spec);

  ModelCheckpoint ckpt;
  ckpt.spec = spec;
  ckpt.config = cfg;
  ckpt.params.assign(plan.total, 0.0);

  Rng rng(seed);
  for (const ConvPlan& cp : plan.convs) {
    const double bound = std::sqrt(6.0 / cp.patch);  // fan_in = in_ch * kernel
    const std::size_t n = static_cast<std::size_t>(cp.out_ch) * cp.patch;
    for (std::size_t i = 0; i < n; ++i) {
      ckpt.params[cp.w_off + i] = rng.uniform(-bound, bound);
    }
  }
  for (const DensePlan& dp : plan.dense) {
    const double bound = std::sqrt(6.0 / dp.in);
    const std::size_t n = static_cast<std::size_t>(dp.out) * dp.in;
    for (std::size_t i = 0; i < n; ++i) {
      ckpt.params[dp.w_off + i] = rng.uniform(-bound, bound);
    }
  }
  return ckpt;
}

std::vector<double> forward(const ModelCheckpoint& ckpt, std::span<const double> batch,
                            int batch_size, bool training, std::uint64_t dropout_seed) {
  ckpt.spec.validate();
  check_batch(ckpt.spec, batch, batch_size);
  const Plan plan = make_plan(ckpt.spec);
  if (ckpt.params.size() != plan.total) throw DataError("checkpoint parameter count mismatch");

  Workspace ws(plan);
  const std::size_t sample_n =
      static_cast<std::size_t>(ckpt.spec.input_channels) * ckpt.spec.input_length;
  std::vector<double> preds(static_cast<std::size_t>(batch_size));
  for (int s = 0; s < batch_size; ++s) {
    if (training) {
      Rng rng(derive_seed(dropout_seed, static_cast<std::uint64_t>(s)));
      preds[static_cast<std::size_t>(s)] = forward_sample(
          plan, ckpt.spec, ckpt.params.data(), batch.data() + sample_n * s, ws, &rng);
    } else {
      preds[static_cast<std::size_t>(s)] = forward_sample(
          plan, ckpt.spec, ckpt.params.data(), batch.data() + sample_n * s, ws, nullptr);
    }
  }
  return preds;
}

Gradients backward(const ModelCheckpoint& ckpt, std::span<const double> batch, int batch_size,
                   std::span<const double> targets, std::uint64_t dropout_seed) {
  ckpt.spec.validate();
  check_batch(ckpt.spec, batch, batch_size);
  if (targets.size() != static_cast<std::size_t>(batch_size)) {
    throw DataError("targets length mismatch");
  }
  const Plan plan = make_plan(ckpt.spec);
  if (ckpt.params.size() != plan.total) throw DataError("checkpoint parameter count mismatch");

  Workspace ws(plan);
  Gradients out;
  out.grads.assign(plan.total, 0.0);
  out.predictions.resize(static_cast<std::size_t>(batch_size));

  const std::size_t sample_n =
      static_cast<std::size_t>(ckpt.spec.input_channels) * ckpt.spec.input_length;
  double sq = 0.0;
  for (int s = 0; s < batch_size; ++s) {
    Rng rng(derive_seed(dropout_seed, static_cast<std::uint64_t>(s)));
    const double* x = batch.data() + sample_n * s;
    const double pred = forward_sample(plan, ckpt.spec, ckpt.params.data(), x, ws, &rng);
    out.predictions[static_cast<std::size_t>(s)] = pred;
    const double err = pred - targets[static_cast<std::size_t>(s)];
    sq += err * err;
    backward_sample(plan, ckpt.params.data(), ws, pred, 2.0 * err / batch_size,
                    out.grads.data());
  }
  out.loss = sq / batch_size;
  return out;
}

void adam_step(std::span<double> weights, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg) {
  if (weights.size() != grads.size() || weights.size() != state.m.size()) {
    throw DataError("adam_step: size mismatch");
  }
  state.step += 1;
  const kernels::AdamParams p{cfg.learning_rate,
                              cfg.beta1,
                              cfg.beta2,
                              cfg.epsilon,
                              1.0 - std::pow(cfg.beta1, static_cast<double>(state.step)),
                              1.0 - std::pow(cfg.beta2, static_cast<double>(state.step))};
  kernels::active().adam(weights.data(), grads.data(), state.m.data(), state.v.data(),
                         weights.size(), p);
}

namespace {

void flatten(const std::vector<ScoredWindow>& windows, const ArchitectureSpec& spec,
             std::vector<double>& x, std::vector<double>& y) {
  const std::size_t sample_n =
      static_cast<std::size_t>(spec.input_channels) * spec.input_length;
  x.resize(sample_n * windows.size());
  y.resize(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].frame.data.size() != sample_n) {
      throw DataError("window " + windows[i].id() + " does not match the model input shape");
    }
    std::memcpy(x.data() + sample_n * i, windows[i].frame.data.data(),
                sample_n * sizeof(double));
    y[i] = windows[i].gt;
  }
}

}  // namespace

ModelCheckpoint train(const std::vector<ScoredWindow>& train_set,
                      const std::vector<ScoredWindow>& val_set, const ArchitectureSpec& spec,
                      const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  if (val_set.empty()) throw ConfigError("validation set is empty");

  std::vector<double> x, y, xv, yv;
  flatten(train_set, spec, x, y);
  flatten(val_set, spec, xv, yv);

  ModelCheckpoint ckpt = init_weights(spec, cfg, cfg.init_seed);
  AdamState state(ckpt.params.size());

  const std::size_t n = train_set.size();
  const std::size_t sample_n =
      static_cast<std::size_t>(spec.input_channels) * spec.input_length;
  std::vector<std::size_t> order(n);
  std::vector<double> batch_x(static_cast<std::size_t>(cfg.batch_size) * sample_n);
  std::vector<double> batch_y(static_cast<std::size_t>(cfg.batch_size));

  std::uint64_t global_step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double sq_sum = 0.0;
    std::size_t pos = 0;
    while (pos < n) {
      const int b = static_cast<int>(std::min<std::size_t>(cfg.batch_size, n - pos));
      for (int s = 0; s < b; ++s) {
        const std::size_t src = order[pos + static_cast<std::size_t>(s)];
        std::memcpy(batch_x.data() + sample_n * static_cast<std::size_t>(s),
                    x.data() + sample_n * src, sample_n * sizeof(double));
        batch_y[static_cast<std::size_t>(s)] = y[src];
      }
      Gradients g = backward(ckpt, {batch_x.data(), sample_n * static_cast<std::size_t>(b)}, b,
                             {batch_y.data(), static_cast<std::size_t>(b)},
                             derive_seed(cfg.dropout_seed, global_step));
      sq_sum += g.loss * b;
      adam_step(ckpt.params, g.grads, state, cfg);
      ++global_step;
      pos += static_cast<std::size_t>(b);
    }

    const std::vector<double> val_preds =
        forward(ckpt, {xv.data(), xv.size()}, static_cast<int>(val_set.size()), false, 0);
    ckpt.curve.push_back({epoch, sq_sum / static_cast<double>(n),
                          mse(val_preds, {yv.data(), yv.size()})});
  }
  return ckpt;
}

std::vector<double> predict(const ModelCheckpoint& ckpt,
                            const std::vector<ScoredWindow>& windows) {
  if (windows.empty()) return {};
  std::vector<double> x, y;
  flatten(windows, ckpt.spec, x, y);
  return forward(ckpt, {x.data(), x.size()}, static_cast<int>(windows.size()), false, 0);
}

double mse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw DataError("mse: length mismatch");
  if (predictions.empty()) throw DataError("mse: empty input");
  double sq = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    sq += e * e;
  }
  return sq / static_cast<double>(predictions.size());
}

}  // namespace stabest
