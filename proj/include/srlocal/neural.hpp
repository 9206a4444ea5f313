#pragma once

#include "srlocal/pca.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace srlocal {

// Two-layer perceptron: 10 tanh hidden units, linear output.
struct MlpParams {
    int k_in = 0;
    std::vector<double> W1; // 10 x k_in, row-major
    std::vector<double> b1; // 10
    std::vector<double> w2; // 10
    double b2 = 0.0;

    int param_count() const { return 10 * k_in + 21; }
};

// Per-sample brightness context: the network works on (v - mu)/s values and
// predictions are mapped back through v = yhat*s + mu.
struct NormContext {
    double mu = 0.0;
    double s = 1.0; // floored at 1.0 gray level
};

struct TrainingSample {
    std::vector<double> input; // PCA coordinates of the normalized patch
    double target = 0.0;       // normalized HR pixel
    NormContext ctx;
};

struct TrainConfig {
    int max_iters = 500;
    double grad_tol = 1e-6;  // stop when the gradient inf-norm drops below
    std::uint64_t seed = 0;
    int restart_interval = 0; // 0 -> parameter count
    double armijo_c = 1e-4;
    double backtrack = 0.5;
    int max_halvings = 40;
};

struct TrainResult {
    MlpParams params;
    std::vector<double> history; // mse at init and after each accepted step
    bool line_search_failed = false;
};

struct LossGrad {
    double mse = 0.0;
    std::vector<double> grad; // flat: W1 row-major, b1, w2, b2
};

struct NormalizedPatch {
    CoeffPatch patch;
    std::optional<double> target;
    NormContext ctx;
};

// Centers the per-site DC coefficients on their mean and scales every entry by
// the support spread: mu = mean of the w*w DC entries, s = max(std of the
// support values, 1.0). The optional target is mapped to (target - mu)/s.
NormalizedPatch normalize(const CoeffPatch& patch, const std::vector<double>& support_values,
                          std::optional<double> target);

double denormalize(double yhat, const NormContext& ctx);

double mlp_forward(const MlpParams& params, const std::vector<double>& x);

// Mean squared error and its exact gradient. The sum over samples is done in
// fixed-size blocks merged in index order, so the OpenMP version is bitwise
// identical to the serial reference regardless of thread count.
LossGrad loss_and_grad(const MlpParams& params, const std::vector<TrainingSample>& samples);
LossGrad loss_and_grad_serial(const MlpParams& params,
                              const std::vector<TrainingSample>& samples);
double mlp_loss(const MlpParams& params, const std::vector<TrainingSample>& samples);

// Polak-Ribiere nonlinear conjugate gradient with Armijo backtracking and
// periodic steepest-descent restarts. Deterministic given (init, samples, cfg).
TrainResult train_cg(const MlpParams& init, const std::vector<TrainingSample>& samples,
                     const TrainConfig& cfg);

// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases.
MlpParams init_weights(int k_in, std::uint64_t seed);

// Text serialization, header "SRMLP 1", full decimal round-trip precision.
void save_mlp(const MlpParams& params, const std::string& path);
MlpParams load_mlp(const std::string& path);

// Training sample container: raw (un-normalized) coefficient patches with
// their targets and normalization contexts.
struct RawSample {
    CoeffPatch patch;
    double target = 0.0;
    NormContext ctx;
};

struct SampleSet {
    int k_raw = 0; // raw patch length (6*w*w)
    std::vector<RawSample> samples;
};

// Flat little-endian binary: u32 count, u32 k_raw, then per sample the raw
// patch, target, mu and s as 64-bit floats.
void save_samples(const SampleSet& set, const std::string& path);
SampleSet load_samples(const std::string& path);

// Normalizes each raw sample through its stored context, projects onto the
// first k eigenvectors and pairs it with the normalized target.
std::vector<TrainingSample> make_training_samples(const SampleSet& set, const EigenBasis& basis,
                                                  int k);

} // namespace srlocal
