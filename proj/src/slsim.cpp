#include "msc/slsim.hpp"

#include <cmath>
#include <cstdio>

#include "msc/wire.hpp"

namespace msc {

namespace {

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        out.at(i, j) += aik * b.at(k, j);
    }
  return out;
}

// a^T * b
Matrix matmul_at(const Matrix& a, const Matrix& b) {
  Matrix out(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k)
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = a.at(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j)
        out.at(i, j) += aki * b.at(k, j);
    }
  return out;
}

// a * b^T
Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < b.rows; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k)
        acc += a.at(i, k) * b.at(j, k);
      out.at(i, j) = acc;
    }
  return out;
}

std::vector<double> col_sums(const Matrix& m) {
  std::vector<double> s(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) s[j] += m.at(i, j);
  return s;
}

FeatureMap to_feature_map(const Matrix& m) {
  FeatureMap fm;
  fm.shape = {static_cast<std::uint32_t>(m.rows),
              static_cast<std::uint32_t>(m.cols)};
  fm.data.reserve(m.v.size());
  for (double v : m.v) fm.data.push_back(static_cast<float>(v));
  return fm;
}

Matrix to_matrix(const FeatureMap& fm, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.v.size(); ++i) m.v[i] = fm.data[i];
  return m;
}

double sq_norm(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.v) acc += v * v;
  return acc;
}

double sq_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double sq_distance(const Matrix& a, const Matrix& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    const double diff = a.v[i] - b.v[i];
    acc += diff * diff;
  }
  return acc;
}

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

Matrix predictions(const SplitModel& m, const Matrix& z) {
  Matrix pred = matmul(z, m.server_w);
  for (std::size_t i = 0; i < pred.rows; ++i)
    for (std::size_t j = 0; j < pred.cols; ++j)
      pred.at(i, j) += m.server_b[j];
  return pred;
}

// dL/dpred for both tasks; also returns the loss.
double loss_and_grad(const Matrix& pred, const Matrix& y, Task task,
                     Matrix& dpred) {
  dpred = Matrix(pred.rows, pred.cols);
  if (task == Task::SyntheticRegression) {
    const double n = static_cast<double>(pred.rows * pred.cols);
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
      const double diff = pred.v[i] - y.v[i];
      loss += diff * diff;
      dpred.v[i] = 2.0 * diff / n;
    }
    return loss / n;
  }
  // Softmax cross-entropy against one-hot rows.
  const double n = static_cast<double>(pred.rows);
  double loss = 0.0;
  for (std::size_t i = 0; i < pred.rows; ++i) {
    double mx = pred.at(i, 0);
    for (std::size_t j = 1; j < pred.cols; ++j)
      mx = std::max(mx, pred.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < pred.cols; ++j)
      denom += std::exp(pred.at(i, j) - mx);
    for (std::size_t j = 0; j < pred.cols; ++j) {
      const double p = std::exp(pred.at(i, j) - mx) / denom;
      dpred.at(i, j) = (p - y.at(i, j)) / n;
      if (y.at(i, j) > 0.0) loss -= std::log(std::max(p, 1e-300)) * y.at(i, j);
    }
  }
  return loss / n;
}

struct RoundEval {
  double loss = 0.0;
  SplitGradients grads;
};

RoundEval eval_client(const SplitModel& m, const Matrix& x,
                      const ClientForward& fwd, const Matrix& z_used,
                      const Matrix& y, Task task) {
  RoundEval ev;
  const Matrix pred = predictions(m, z_used);
  Matrix dpred;
  ev.loss = loss_and_grad(pred, y, task, dpred);
  ev.grads.server_w = matmul_at(z_used, dpred);
  ev.grads.server_b = col_sums(dpred);
  ev.grads.dloss_dz = matmul_bt(dpred, m.server_w);
  Matrix dpre = ev.grads.dloss_dz;
  for (std::size_t i = 0; i < dpre.v.size(); ++i)
    if (fwd.preact.v[i] <= 0.0) dpre.v[i] = 0.0;
  ev.grads.client_w = matmul_at(x, dpre);
  ev.grads.client_b = col_sums(dpre);
  return ev;
}

void add_scaled(Matrix& acc, const Matrix& g, double s) {
  for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += s * g.v[i];
}

void add_scaled(std::vector<double>& acc, const std::vector<double>& g,
                double s) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += s * g[i];
}

struct GradAccum {
  Matrix client_w;
  std::vector<double> client_b;
  Matrix server_w;
  std::vector<double> server_b;

  explicit GradAccum(const SplitModel& m)
      : client_w(m.client_w.rows, m.client_w.cols),
        client_b(m.client_b.size(), 0.0),
        server_w(m.server_w.rows, m.server_w.cols),
        server_b(m.server_b.size(), 0.0) {}

  void add(const SplitGradients& g, double s) {
    add_scaled(client_w, g.client_w, s);
    add_scaled(client_b, g.client_b, s);
    add_scaled(server_w, g.server_w, s);
    add_scaled(server_b, g.server_b, s);
  }
};

}  // namespace

SplitModel init_model(const SimConfig& cfg) {
  SeededRng rng(mix_seed(cfg.seed, 1));
  SplitModel m;
  const double client_scale = std::sqrt(2.0 / cfg.input_dim);
  const double server_scale = std::sqrt(2.0 / cfg.hidden_dim);
  m.client_w = Matrix(cfg.input_dim, cfg.hidden_dim);
  for (double& v : m.client_w.v) v = client_scale * rng.next_normal();
  m.client_b.assign(cfg.hidden_dim, 0.0);
  const std::uint32_t d_out =
      cfg.task == Task::TwoClassMoons ? 2u : cfg.output_dim;
  m.server_w = Matrix(cfg.hidden_dim, d_out);
  for (double& v : m.server_w.v) v = server_scale * rng.next_normal();
  m.server_b.assign(d_out, 0.0);
  return m;
}

std::vector<ClientData> make_dataset(const SimConfig& cfg) {
  std::vector<ClientData> shards;
  shards.reserve(cfg.n_clients);
  if (cfg.task == Task::SyntheticRegression) {
    SeededRng teacher_rng(mix_seed(cfg.seed, 2));
    Matrix teacher(cfg.input_dim, cfg.output_dim);
    const double teacher_scale = 1.0 / std::sqrt(cfg.input_dim);
    for (double& v : teacher.v) v = teacher_scale * teacher_rng.next_normal();
    // One global dataset, split evenly and deterministically by client index.
    SeededRng data_rng(mix_seed(cfg.seed, 3));
    for (std::uint32_t c = 0; c < cfg.n_clients; ++c) {
      ClientData shard;
      shard.x = Matrix(cfg.batch_size, cfg.input_dim);
      for (double& v : shard.x.v) {
        const double g = data_rng.next_normal();
        const double h = data_rng.next_normal();
        v = g * std::exp(cfg.input_tail * h);
      }
      shard.y = matmul(shard.x, teacher);
      for (double& v : shard.y.v)
        v += cfg.label_noise * data_rng.next_normal();
      shards.push_back(std::move(shard));
    }
    return shards;
  }
  // Two interleaving half moons, one-hot labels, alternating classes.
  SeededRng data_rng(mix_seed(cfg.seed, 3));
  for (std::uint32_t c = 0; c < cfg.n_clients; ++c) {
    ClientData shard;
    shard.x = Matrix(cfg.batch_size, 2);
    shard.y = Matrix(cfg.batch_size, 2);
    for (std::uint32_t i = 0; i < cfg.batch_size; ++i) {
      const int cls = static_cast<int>(i % 2);
      const double t = 3.14159265358979323846 * data_rng.next_double();
      double px, py;
      if (cls == 0) {
        px = std::cos(t);
        py = std::sin(t);
      } else {
        px = 1.0 - std::cos(t);
        py = 0.5 - std::sin(t);
      }
      shard.x.at(i, 0) = px + 0.1 * data_rng.next_normal();
      shard.x.at(i, 1) = py + 0.1 * data_rng.next_normal();
      shard.y.at(i, cls) = 1.0;
    }
    shards.push_back(std::move(shard));
  }
  return shards;
}

ClientForward client_forward_full(const SplitModel& m, const Matrix& x) {
  if (x.cols != m.client_w.rows) throw InputError("client_forward: shape mismatch");
  ClientForward fwd;
  fwd.preact = matmul(x, m.client_w);
  for (std::size_t i = 0; i < fwd.preact.rows; ++i)
    for (std::size_t j = 0; j < fwd.preact.cols; ++j)
      fwd.preact.at(i, j) += m.client_b[j];
  fwd.act = fwd.preact;
  for (double& v : fwd.act.v) v = v > 0.0 ? v : 0.0;
  return fwd;
}

FeatureMap client_forward(const SplitModel& m, const Matrix& x) {
  return to_feature_map(client_forward_full(m, x).act);
}

double server_forward_loss(const SplitModel& m, const Matrix& z,
                           const Matrix& y, Task task) {
  if (z.cols != m.server_w.rows || y.rows != z.rows)
    throw InputError("server_forward_loss: shape mismatch");
  Matrix dpred;
  return loss_and_grad(predictions(m, z), y, task, dpred);
}

SplitGradients backward_split(const SplitModel& m, const Matrix& x,
                              const ClientForward& fwd, const Matrix& z_used,
                              const Matrix& y, Task task) {
  return eval_client(m, x, fwd, z_used, y, task).grads;
}

SimState init_sim(const SimConfig& cfg) {
  SimConfig resolved = cfg;
  if (resolved.task == Task::TwoClassMoons) {
    resolved.input_dim = 2;
    resolved.output_dim = 2;
  }
  if (resolved.n_clients < 1) throw ParameterError("n_clients must be >= 1");
  if (!(resolved.learning_rate > 0.0))
    throw ParameterError("learning_rate must be positive");
  SimState state;
  state.cfg = resolved;
  state.model = init_model(resolved);
  state.shards = make_dataset(resolved);
  return state;
}

RoundRecord train_round(SimState& state) {
  const SimConfig& cfg = state.cfg;
  const std::size_t n = cfg.n_clients;
  GradAccum hat(state.model);
  GradAccum ghost(state.model);
  RoundRecord rec;
  rec.round = state.round + 1;

  double loss_sum = 0.0;
  double err_sum = 0.0;
  std::uint64_t bytes = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const ClientData& shard = state.shards[i];
    const ClientForward fwd = client_forward_full(state.model, shard.x);
    Matrix z_used;
    if (cfg.codec) {
      const FeatureMap fm = to_feature_map(fwd.act);
      CodecConfig ccfg = *cfg.codec;
      if (ccfg.codec == Codec::RT || ccfg.stochastic_rounding)
        ccfg.seed = mix_seed(mix_seed(cfg.seed, 4, ccfg.seed), state.round, i);
      const CompressedPayload payload = encode(fm, ccfg);
      const FeatureMap rebuilt = decode(payload);
      err_sum += l2_distance(fm, rebuilt);
      bytes += frame_size(payload);
      z_used = to_matrix(rebuilt, fwd.act.rows, fwd.act.cols);
    } else {
      z_used = fwd.act;
      bytes += 4ull * fwd.act.v.size();  // raw 32-bit values
    }
    const RoundEval ev =
        eval_client(state.model, shard.x, fwd, z_used, shard.y, cfg.task);
    loss_sum += ev.loss;
    hat.add(ev.grads, 1.0);
    if (cfg.codec) {
      const SplitGradients exact = backward_split(state.model, shard.x, fwd,
                                                  fwd.act, shard.y, cfg.task);
      ghost.add(exact, 1.0);
    } else {
      ghost.add(ev.grads, 1.0);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  rec.loss = loss_sum * inv_n;
  rec.E = err_sum * inv_n;
  rec.bytes_up = bytes;
  rec.grad_gap_server =
      std::sqrt((sq_distance(hat.server_w, ghost.server_w) +
                 sq_distance(hat.server_b, ghost.server_b))) *
      inv_n;
  rec.grad_gap_client =
      std::sqrt((sq_distance(hat.client_w, ghost.client_w) +
                 sq_distance(hat.client_b, ghost.client_b))) *
      inv_n;
  rec.grad_norm = std::sqrt(sq_norm(ghost.server_w) + sq_norm(ghost.server_b) +
                            sq_norm(ghost.client_w) + sq_norm(ghost.client_b)) *
                  inv_n;

  if (!std::isfinite(rec.loss) || rec.loss > cfg.divergence_limit) {
    rec.diverged = true;
    return rec;
  }

  const double step = cfg.learning_rate * inv_n;
  add_scaled(state.model.client_w, hat.client_w, -step);
  add_scaled(state.model.client_b, hat.client_b, -step);
  add_scaled(state.model.server_w, hat.server_w, -step);
  add_scaled(state.model.server_b, hat.server_b, -step);
  ++state.round;
  return rec;
}

TrainingTrace train(const SimConfig& cfg) {
  SimState state = init_sim(cfg);
  TrainingTrace trace;
  trace.rounds.reserve(cfg.rounds);
  for (std::uint32_t t = 0; t < cfg.rounds; ++t) {
    RoundRecord rec = train_round(state);
    trace.rounds.push_back(rec);
    if (rec.diverged) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

std::string trace_to_csv(const TrainingTrace& trace) {
  std::string csv =
      "round,loss,E,grad_gap_server,grad_gap_client,grad_norm,bytes_up\n";
  char line[256];
  for (const RoundRecord& r : trace.rounds) {
    std::snprintf(line, sizeof(line),
                  "%u,%.12g,%.12g,%.12g,%.12g,%.12g,%llu\n", r.round, r.loss,
                  r.E, r.grad_gap_server, r.grad_gap_client, r.grad_norm,
                  static_cast<unsigned long long>(r.bytes_up));
    csv += line;
  }
  return csv;
}

BiasProbeReport relu_bias_probe(std::size_t samples, std::uint64_t seed) {
  if (samples < 10000)
    throw ParameterError("relu_bias_probe: need at least 10^4 samples");
  SeededRng rng(seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double z = rng.next_normal();
    acc += z > 0.0 ? z : 0.0;
  }
  BiasProbeReport rep;
  rep.samples = samples;
  rep.mc_estimate = acc / static_cast<double>(samples);
  // relu applied to the exact mean E[Z] = 0; the contrast with the Monte
  // Carlo estimate of E[relu(Z)] is the bias demonstration.
  rep.relu_of_mean = std::max(0.0, 0.0);
  rep.gap = rep.mc_estimate - rep.relu_of_mean;
  return rep;
}

std::vector<GapProbeRow> gradient_gap_probe(
    const SplitModel& m, const ClientData& batch, Task task,
    std::span<const std::optional<CodecConfig>> sweep) {
  const ClientForward fwd = client_forward_full(m, batch.x);
  const SplitGradients exact =
      backward_split(m, batch.x, fwd, fwd.act, batch.y, task);
  std::vector<GapProbeRow> rows;
  rows.reserve(sweep.size());
  for (const auto& level : sweep) {
    GapProbeRow row;
    if (level) {
      const FeatureMap fm = to_feature_map(fwd.act);
      const CompressedPayload payload = encode(fm, *level);
      const FeatureMap rebuilt = decode(payload);
      row.E = l2_distance(fm, rebuilt);
      const Matrix z_used = to_matrix(rebuilt, fwd.act.rows, fwd.act.cols);
      const SplitGradients hat =
          backward_split(m, batch.x, fwd, z_used, batch.y, task);
      row.gap_server = std::sqrt(sq_distance(hat.server_w, exact.server_w) +
                                 sq_distance(hat.server_b, exact.server_b));
      row.gap_client = std::sqrt(sq_distance(hat.client_w, exact.client_w) +
                                 sq_distance(hat.client_b, exact.client_b));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace msc
