#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msc/codec.hpp"
#include "msc/tensor.hpp"

namespace msc {

/// Minimal row-major double matrix for the toy split network.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
};

enum class Task : std::uint8_t { SyntheticRegression = 0, TwoClassMoons = 1 };

struct SimConfig {
  std::uint32_t n_clients = 4;
  double learning_rate = 1e-3;
  std::uint32_t rounds = 400;
  std::optional<CodecConfig> codec;  // nullopt = uncompressed baseline
  Task task = Task::SyntheticRegression;
  std::uint64_t seed = 1;

  // Toy network and data shape (desk scale).
  std::uint32_t batch_size = 64;  // per client; each shard is one full batch
  std::uint32_t input_dim = 8;
  std::uint32_t hidden_dim = 64;
  std::uint32_t output_dim = 1;  // forced to 2 for TwoClassMoons

  // Regression data: inputs g*exp(tail*h) with g,h normal; linear teacher
  // targets plus label_noise gaussian noise.
  double input_tail = 1.25;
  double label_noise = 0.4;

  double divergence_limit = 1e6;
};

/// One linear+ReLU client layer, one linear server layer. The feature map
/// exchanged on the wire is the post-ReLU cutlayer activation.
struct SplitModel {
  Matrix client_w;               // input_dim x hidden_dim
  std::vector<double> client_b;  // hidden_dim
  Matrix server_w;               // hidden_dim x output_dim
  std::vector<double> server_b;  // output_dim
};

struct ClientData {
  Matrix x;       // batch x input_dim
  Matrix y;       // batch x output_dim (one-hot for classification)
};

struct RoundRecord {
  std::uint32_t round = 0;
  double loss = 0.0;             // aggregate over clients
  double E = 0.0;                // mean per-client l2 compression error
  double grad_gap_server = 0.0;  // |g_hat_s - g_s|
  double grad_gap_client = 0.0;  // |g_hat_c - g_c|
  double grad_norm = 0.0;        // uncompressed-gradient norm (ghost pass)
  std::uint64_t bytes_up = 0;
  bool diverged = false;
};

struct TrainingTrace {
  std::vector<RoundRecord> rounds;
  bool diverged = false;
};

struct ClientForward {
  Matrix preact;  // batch x hidden
  Matrix act;     // relu(preact)
};

struct SplitGradients {
  Matrix client_w;
  std::vector<double> client_b;
  Matrix server_w;
  std::vector<double> server_b;
  Matrix dloss_dz;  // gradient w.r.t. the cutlayer activation
};

SplitModel init_model(const SimConfig& cfg);
std::vector<ClientData> make_dataset(const SimConfig& cfg);

ClientForward client_forward_full(const SplitModel& m, const Matrix& x);
/// The smashed data: relu(x*Wc + bc) as a 32-bit feature map, shape
/// {batch, hidden}.
FeatureMap client_forward(const SplitModel& m, const Matrix& x);

/// MSE (regression) or softmax cross-entropy (classification) of
/// z*Ws + bs against y, averaged over the batch.
double server_forward_loss(const SplitModel& m, const Matrix& z,
                           const Matrix& y, Task task);

/// Exact analytic gradients of the toy network. z_used is the feature map
/// actually fed to the server (possibly a decoded reconstruction); the codec
/// is differentiated as the identity, so the ReLU mask comes from the true
/// preactivations in fwd.
SplitGradients backward_split(const SplitModel& m, const Matrix& x,
                              const ClientForward& fwd, const Matrix& z_used,
                              const Matrix& y, Task task);

struct SimState {
  SimConfig cfg;
  SplitModel model;
  std::vector<ClientData> shards;
  std::uint32_t round = 0;
};

SimState init_sim(const SimConfig& cfg);

/// One aggregation round: per client forward, encode/decode (or pass
/// through), server loss, backward; gradients averaged in client order; one
/// SGD step. A ghost uncompressed pass on the same batch fills the gap
/// fields without touching parameters.
RoundRecord train_round(SimState& state);

TrainingTrace train(const SimConfig& cfg);

/// CSV with header round,loss,E,grad_gap_server,grad_gap_client,grad_norm,bytes_up
std::string trace_to_csv(const TrainingTrace& trace);

struct BiasProbeReport {
  std::size_t samples = 0;
  double mc_estimate = 0.0;   // Monte Carlo E[relu(Z)], Z standard normal
  double relu_of_mean = 0.0;  // relu(E[Z]) = 0, computed not assumed
  double gap = 0.0;
};

/// Demonstrates E[relu(Z)] != relu(E[Z]) by direct sampling.
BiasProbeReport relu_bias_probe(std::size_t samples, std::uint64_t seed);

struct GapProbeRow {
  double E = 0.0;
  double gap_server = 0.0;
  double gap_client = 0.0;
};

/// For each compression level (nullopt = lossless), the compression error E
/// and both gradient gaps against the uncompressed gradients on the same
/// fixed model and batch.
std::vector<GapProbeRow> gradient_gap_probe(
    const SplitModel& m, const ClientData& batch, Task task,
    std::span<const std::optional<CodecConfig>> sweep);

}  // namespace msc
