#include "coinfer/dnn.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "coinfer/errors.hpp"
#include "coinfer/io.hpp"
#include "coinfer/rng.hpp"

namespace coinfer {

namespace {

double apply_activation(double v, Activation a, double leaky_slope) {
  switch (a) {
    case Activation::ReLU: return v > 0.0 ? v : 0.0;
    case Activation::LeakyReLU: return v > 0.0 ? v : leaky_slope * v;
    case Activation::Tanh: return std::tanh(v);
    case Activation::Identity: return v;
  }
  return v;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols) {
    throw shape_error("matrix-vector dimension mismatch: " + std::to_string(m.rows) + "x" +
                      std::to_string(m.cols) + " applied to length " +
                      std::to_string(x.size()));
  }
  std::vector<double> y(m.rows, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    const double* row = m.data.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
  return y;
}

double l1_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

void check_same_structure(const DnnModel& model, const DnnModel& quantized) {
  if (model.layers.size() != quantized.layers.size()) {
    throw shape_error("models have different depths");
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (model.layers[l].rows != quantized.layers[l].rows ||
        model.layers[l].cols != quantized.layers[l].cols) {
      throw shape_error("layer " + std::to_string(l) + " shapes differ");
    }
  }
}

}  // namespace

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "leaky_relu") return Activation::LeakyReLU;
  if (name == "tanh") return Activation::Tanh;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
  }
  return "unknown";
}

double induced_one_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m.cols; ++c) {
    double col = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) col += std::abs(m.at(r, c));
    best = std::max(best, col);
  }
  return best;
}

double entrywise_l1(const Matrix& m) {
  double acc = 0.0;
  for (double v : m.data) acc += std::abs(v);
  return acc;
}

std::size_t DnnModel::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix& m : layers) n += m.data.size();
  return n;
}

void validate(const DnnModel& model) {
  if (model.layers.empty()) throw shape_error("model has no layers");
  for (const Matrix& m : model.layers) {
    if (m.rows == 0 || m.cols == 0 || m.data.size() != m.rows * m.cols) {
      throw shape_error("malformed layer matrix");
    }
  }
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    if (model.layers[l + 1].cols != model.layers[l].rows) {
      throw shape_error("layers " + std::to_string(l) + " and " + std::to_string(l + 1) +
                        " do not compose");
    }
  }
  if (model.activation == Activation::LeakyReLU &&
      !(model.leaky_slope >= 0.0 && model.leaky_slope <= 1.0)) {
    throw std::invalid_argument("leaky_slope must lie in [0, 1] to stay 1-Lipschitz");
  }
}

LayerTau layer_taus(const DnnModel& model, const DnnModel& quantized) {
  check_same_structure(model, quantized);
  LayerTau taus;
  taus.taus.resize(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Matrix diff = model.layers[l];
    for (std::size_t i = 0; i < diff.data.size(); ++i) {
      diff.data[i] -= quantized.layers[l].data[i];
    }
    taus.taus[l] = induced_one_norm(diff);
  }
  return taus;
}

std::vector<double> forward(const DnnModel& model, std::span<const double> x) {
  validate(model);
  std::vector<double> v = matvec(model.layers.front(), x);
  for (std::size_t l = 1; l < model.layers.size(); ++l) {
    for (double& e : v) e = apply_activation(e, model.activation, model.leaky_slope);
    v = matvec(model.layers[l], v);
  }
  return v;
}

BoundReport prop1_bound(const DnnModel& model, const DnnModel& quantized,
                        const LayerTau& taus) {
  validate(model);
  validate(quantized);
  check_same_structure(model, quantized);
  const std::size_t depth = model.layers.size();
  if (taus.taus.size() != depth) {
    throw std::invalid_argument("tau count does not match model depth");
  }

  std::vector<double> norms(depth), diff_norms(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    norms[l] = induced_one_norm(model.layers[l]);
    Matrix diff = model.layers[l];
    for (std::size_t i = 0; i < diff.data.size(); ++i) {
      diff.data[i] -= quantized.layers[l].data[i];
    }
    diff_norms[l] = induced_one_norm(diff);
    if (taus.taus[l] < diff_norms[l] * (1.0 - 1e-12)) {
      throw std::invalid_argument("tau[" + std::to_string(l) +
                                  "] is below the actual perturbation norm");
    }
  }

  // prefix[l] = prod_{j<l} ||W_j||, suffix[l] = prod_{k>l} (||W_k|| + tau_k)
  std::vector<double> prefix(depth, 1.0), suffix(depth, 1.0);
  for (std::size_t l = 1; l < depth; ++l) prefix[l] = prefix[l - 1] * norms[l - 1];
  for (std::size_t l = depth - 1; l-- > 0;) {
    suffix[l] = suffix[l + 1] * (norms[l + 1] + taus.taus[l + 1]);
  }

  BoundReport report;
  report.per_layer_terms.resize(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    report.per_layer_terms[l] = prefix[l] * suffix[l] * diff_norms[l];
    report.bound += report.per_layer_terms[l];
  }
  return report;
}

BoundReport prop1_bound(const DnnModel& model, const DnnModel& quantized) {
  return prop1_bound(model, quantized, layer_taus(model, quantized));
}

double output_distortion(const DnnModel& model, const DnnModel& quantized,
                         std::span<const std::vector<double>> inputs) {
  check_same_structure(model, quantized);
  if (inputs.empty()) throw std::invalid_argument("input set is empty");
  double worst = 0.0;
  for (const std::vector<double>& x : inputs) {
    if (l1_norm(x) > 1.0 + 1e-9) {
      throw std::invalid_argument("input violates the L1 normalization assumption");
    }
    const std::vector<double> y = forward(model, x);
    const std::vector<double> y_hat = forward(quantized, x);
    double dist = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dist += std::abs(y[i] - y_hat[i]);
    worst = std::max(worst, dist);
  }
  return worst;
}

double estimate_coefficient_h(const DnnModel& model,
                              std::span<const std::vector<double>> inputs,
                              std::span<const double> perturbation_scales,
                              const CoefficientHOptions& options) {
  validate(model);
  if (inputs.empty()) throw std::invalid_argument("input set is empty");
  if (perturbation_scales.empty()) throw std::invalid_argument("no perturbation scales");
  if (options.samples_per_scale < 1) {
    throw std::invalid_argument("samples_per_scale must be >= 1");
  }

  Rng rng(options.seed);
  double h = 0.0;
  bool any_used = false;
  for (double scale : perturbation_scales) {
    for (int s = 0; s < options.samples_per_scale; ++s) {
      DnnModel perturbed = model;
      double param_l1 = 0.0;
      for (Matrix& layer : perturbed.layers) {
        for (double& w : layer.data) {
          const double delta = rng.uniform(-scale, scale);
          w += delta;
          param_l1 += std::abs(delta);
        }
      }
      if (!(param_l1 > 0.0)) continue;  // zero-norm perturbation, skipped
      any_used = true;
      for (const std::vector<double>& x : inputs) {
        const std::vector<double> y = forward(model, x);
        const std::vector<double> y_hat = forward(perturbed, x);
        double out_l1 = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) out_l1 += std::abs(y[i] - y_hat[i]);
        h = std::max(h, out_l1 / param_l1);
      }
    }
  }
  if (!any_used) {
    throw std::invalid_argument("all perturbations had zero norm");
  }
  return h;
}

double coefficient_h_for_models(const DnnModel& model,
                                std::span<const DnnModel> perturbed,
                                std::span<const std::vector<double>> inputs) {
  validate(model);
  if (inputs.empty()) throw std::invalid_argument("input set is empty");
  double h = 0.0;
  bool any_used = false;
  for (const DnnModel& candidate : perturbed) {
    check_same_structure(model, candidate);
    double param_l1 = 0.0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      for (std::size_t i = 0; i < model.layers[l].data.size(); ++i) {
        param_l1 += std::abs(model.layers[l].data[i] - candidate.layers[l].data[i]);
      }
    }
    if (!(param_l1 > 0.0)) continue;
    any_used = true;
    for (const std::vector<double>& x : inputs) {
      const std::vector<double> y = forward(model, x);
      const std::vector<double> y_hat = forward(candidate, x);
      double out_l1 = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) out_l1 += std::abs(y[i] - y_hat[i]);
      h = std::max(h, out_l1 / param_l1);
    }
  }
  if (!any_used) throw std::invalid_argument("all perturbations had zero norm");
  return h;
}

std::vector<double> model_weights(const DnnModel& model) {
  std::vector<double> flat;
  flat.reserve(model.parameter_count());
  for (const Matrix& m : model.layers) {
    flat.insert(flat.end(), m.data.begin(), m.data.end());
  }
  return flat;
}

DnnModel model_from_weights(const DnnModel& reference, std::span<const double> weights) {
  if (weights.size() != reference.parameter_count()) {
    throw shape_error("flattened weight count does not match the model");
  }
  DnnModel model = reference;
  std::size_t pos = 0;
  for (Matrix& m : model.layers) {
    std::copy(weights.begin() + static_cast<std::ptrdiff_t>(pos),
              weights.begin() + static_cast<std::ptrdiff_t>(pos + m.data.size()),
              m.data.begin());
    pos += m.data.size();
  }
  return model;
}

DnnModel quantize_model(const DnnModel& model, const QuantScheme& scheme) {
  const std::vector<double> flat = model_weights(model);
  return model_from_weights(model, quantize(flat, scheme));
}

double model_theta_max(const DnnModel& model, double percentile) {
  return magnitude_percentile(model_weights(model), percentile);
}

DnnModel random_model(std::span<const std::size_t> dims, Activation activation,
                      std::uint64_t seed, double norm_target) {
  if (dims.size() < 2) throw std::invalid_argument("need at least input and output dims");
  if (!(norm_target > 0.0)) throw std::invalid_argument("norm_target must be positive");
  Rng rng(seed);
  DnnModel model;
  model.activation = activation;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Matrix m(dims[l + 1], dims[l]);
    const double rate = static_cast<double>(m.rows) / norm_target;
    for (double& w : m.data) w = rng.sign() * rng.exponential(rate);
    model.layers.push_back(std::move(m));
  }
  validate(model);
  return model;
}

DnnModel fcdnn16(std::uint64_t seed, std::size_t input_dim) {
  const std::vector<std::size_t> encoder{64, 128, 256, 512, 256, 128, 64, 32};
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), encoder.begin(), encoder.end());
  for (std::size_t i = encoder.size() - 1; i-- > 0;) dims.push_back(encoder[i]);
  dims.push_back(input_dim);
  return random_model(dims, Activation::ReLU, seed);
}

void save_model(const DnnModel& model, const std::string& manifest_path,
                const std::string& blob_path) {
  validate(model);
  nlohmann::json manifest;
  manifest["activation"] = to_string(model.activation);
  if (model.activation == Activation::LeakyReLU) {
    manifest["leaky_slope"] = model.leaky_slope;
  }
  manifest["layers"] = nlohmann::json::array();
  for (const Matrix& m : model.layers) {
    manifest["layers"].push_back({{"rows", m.rows}, {"cols", m.cols}});
  }
  manifest["blob"] = std::filesystem::path(blob_path).filename().string();
  write_text_file(manifest_path, manifest.dump(2) + "\n");
  write_f32(blob_path, model_weights(model));
}

DnnModel load_model(const std::string& manifest_path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::parse_error& err) {
    throw std::runtime_error("invalid model manifest " + manifest_path + ": " + err.what());
  }

  DnnModel model;
  model.activation = activation_from_name(manifest.at("activation").get<std::string>());
  if (manifest.contains("leaky_slope")) {
    model.leaky_slope = manifest["leaky_slope"].get<double>();
  }
  for (const auto& layer : manifest.at("layers")) {
    model.layers.emplace_back(layer.at("rows").get<std::size_t>(),
                              layer.at("cols").get<std::size_t>());
  }
  const auto blob_name = manifest.at("blob").get<std::string>();
  const auto blob_path = std::filesystem::path(manifest_path).parent_path() / blob_name;
  const std::vector<double> flat = read_f32(blob_path.string());
  model = model_from_weights(model, flat);
  validate(model);
  return model;
}

std::string to_json(const BoundReport& report) {
  nlohmann::json j;
  j["bound"] = report.bound;
  j["per_layer_terms"] = report.per_layer_terms;
  if (report.measured.has_value()) j["measured"] = *report.measured;
  return j.dump(2);
}

}  // namespace coinfer
