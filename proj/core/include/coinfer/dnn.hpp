#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coinfer/quantizers.hpp"

namespace coinfer {

enum class Activation { ReLU, LeakyReLU, Tanh, Identity };

Activation activation_from_name(const std::string& name);
std::string to_string(Activation a);

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Induced 1-norm: maximum absolute column sum.
double induced_one_norm(const Matrix& m);

/// Entrywise L1: sum of absolute entries (the surrogate distortion metric,
/// distinct from the induced norm used in the layer coefficients).
double entrywise_l1(const Matrix& m);

/// Fully connected network y = W_L s(W_{L-1} s(... W_1 x)) with a 1-Lipschitz
/// activation fixing 0 (applied between layers, not after the last one).
struct DnnModel {
  std::vector<Matrix> layers;
  Activation activation = Activation::ReLU;
  double leaky_slope = 0.01;  // LeakyReLU only; must stay in [0, 1]

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().cols; }
  std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().rows; }
  std::size_t parameter_count() const;
};

void validate(const DnnModel& model);

/// Per-layer bounds on the induced 1-norm of the weight perturbation.
struct LayerTau {
  std::vector<double> taus;
};

/// Exact taus: ||W_l - What_l|| in the induced 1-norm.
LayerTau layer_taus(const DnnModel& model, const DnnModel& quantized);

struct BoundReport {
  double bound = 0.0;
  std::vector<double> per_layer_terms;
  std::optional<double> measured;
};

std::vector<double> forward(const DnnModel& model, std::span<const double> x);

/// Output-distortion upper bound: sum over layers of
/// A_l * ||W_l - What_l||, with A_l = prod_{j<l} ||W_j|| * prod_{k>l}(||W_k|| + tau_k),
/// all norms induced 1-norms.
BoundReport prop1_bound(const DnnModel& model, const DnnModel& quantized,
                        const LayerTau& taus);
BoundReport prop1_bound(const DnnModel& model, const DnnModel& quantized);

/// Max over inputs of ||f(x, W) - f(x, What)||_1. Inputs must satisfy the
/// normalization ||x||_1 <= 1.
double output_distortion(const DnnModel& model, const DnnModel& quantized,
                         std::span<const std::vector<double>> inputs);

struct CoefficientHOptions {
  int samples_per_scale = 4;
  std::uint64_t seed = 0x5eed;
};

/// Empirical upper-bound constant H for the first-order surrogate: max over
/// sampled entrywise-uniform perturbations of
/// (output L1 change) / (parameter L1 change). Zero-norm perturbations are
/// skipped; if everything is skipped this is an argument error.
double estimate_coefficient_h(const DnnModel& model,
                              std::span<const std::vector<double>> inputs,
                              std::span<const double> perturbation_scales,
                              const CoefficientHOptions& options = {});

/// Same ratio maximized over explicit perturbed copies of the model (the
/// data-driven default uses the quantized models themselves).
double coefficient_h_for_models(const DnnModel& model,
                                std::span<const DnnModel> perturbed,
                                std::span<const std::vector<double>> inputs);

/// Concatenated weights in layer order, row-major.
std::vector<double> model_weights(const DnnModel& model);

/// Rebuilds a structurally identical model from flattened weights.
DnnModel model_from_weights(const DnnModel& reference, std::span<const double> weights);

/// Quantizes every weight with the given scheme (theta_max taken from the
/// scheme; use model_theta_max for the percentile default).
DnnModel quantize_model(const DnnModel& model, const QuantScheme& scheme);

double model_theta_max(const DnnModel& model, double percentile = 0.999);

/// Random model with seeded exponential magnitudes and random signs; entry
/// magnitudes are Exp(rows / norm_target) so each induced column norm is
/// norm_target in expectation.
DnnModel random_model(std::span<const std::size_t> dims, Activation activation,
                      std::uint64_t seed, double norm_target = 1.0);

/// The toy autoencoder reference: encoder widths
/// {64,128,256,512,256,128,64,32} on top of input_dim, symmetric decoder,
/// ReLU. 16 weight matrices in total.
DnnModel fcdnn16(std::uint64_t seed, std::size_t input_dim = 784);

/// On-disk form: JSON manifest naming shapes/activation plus one .f32 blob of
/// concatenated row-major matrices.
void save_model(const DnnModel& model, const std::string& manifest_path,
                const std::string& blob_path);
DnnModel load_model(const std::string& manifest_path);

std::string to_json(const BoundReport& report);

}  // namespace coinfer
