#include "irpdfl/predictor.hpp"

#include <cmath>
#include <sstream>

#include "irpdfl/errors.hpp"
#include "irpdfl/io.hpp"
#include "irpdfl/rng.hpp"

namespace irpdfl {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw InvalidParameter("DemandModel: needs at least input and output dims");
  for (std::size_t d : dims)
    if (d == 0) throw InvalidParameter("DemandModel: layer widths must be positive");
  if (dims.back() != 1) throw InvalidParameter("DemandModel: output width must be 1");
}

}  // namespace

const char* to_string(Activation a) {
  return a == Activation::kRelu ? "relu" : "tanh";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw InvalidParameter("unknown activation \"" + name + "\" (expected tanh or relu)");
}

DemandModel::DemandModel(std::vector<std::size_t> dims, Activation activation,
                         OutputKind output)
    : dims_(std::move(dims)), activation_(activation), output_(output) {
  check_dims(dims_);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    layers_.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
  }
}

DemandModel DemandModel::glorot(std::vector<std::size_t> dims, Activation activation,
                                std::uint64_t seed, OutputKind output) {
  DemandModel model(std::move(dims), activation, output);
  Rng rng(seed);
  for (auto& layer : model.layers_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(layer.weight.rows() + layer.weight.cols()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = rng.uniform(-limit, limit);
  }
  return model;
}

std::size_t DemandModel::n_params() const {
  std::size_t total = 0;
  for (const auto& layer : layers_)
    total += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return total;
}

Eigen::VectorXd DemandModel::parameters() const {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(n_params()));
  Eigen::Index k = 0;
  for (const auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) theta[k++] = layer.weight(r, c);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) theta[k++] = layer.bias[r];
  }
  return theta;
}

void DemandModel::set_parameters(const Eigen::VectorXd& theta) {
  if (theta.size() != static_cast<Eigen::Index>(n_params()))
    throw DimensionError("DemandModel::set_parameters: expected " +
                         std::to_string(n_params()) + " values, got " +
                         std::to_string(theta.size()));
  if (!theta.allFinite()) throw InvalidParameter("DemandModel: non-finite parameter");
  Eigen::Index k = 0;
  for (auto& layer : layers_) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = theta[k++];
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = theta[k++];
  }
}

Eigen::VectorXd DemandModel::predict(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim())
    throw DimensionError("DemandModel: feature width " + std::to_string(x.cols()) +
                         " but model expects " + std::to_string(input_dim()));
  // Activations are kept column-per-sample.
  Eigen::MatrixXd a = x.transpose();
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * a;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) {
      a = activation_ == Activation::kTanh ? Eigen::MatrixXd(z.array().tanh())
                                           : Eigen::MatrixXd(z.cwiseMax(0.0));
    } else {
      a = output_ == OutputKind::kSoftplus ? Eigen::MatrixXd(z.unaryExpr(&softplus)) : z;
    }
  }
  return a.row(0).transpose();
}

Eigen::VectorXd DemandModel::gradient(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXd& adjoint) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim())
    throw DimensionError("DemandModel: feature width " + std::to_string(x.cols()) +
                         " but model expects " + std::to_string(input_dim()));
  if (adjoint.size() != x.rows())
    throw DimensionError("DemandModel: adjoint length " + std::to_string(adjoint.size()) +
                         " but " + std::to_string(x.rows()) + " samples");
  const std::size_t depth = layers_.size();
  std::vector<Eigen::MatrixXd> acts{x.transpose()};  // inputs to each layer
  std::vector<Eigen::MatrixXd> pre;
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::MatrixXd z = layers_[l].weight * acts.back();
    z.colwise() += layers_[l].bias;
    pre.push_back(z);
    if (l + 1 < depth)
      acts.push_back(activation_ == Activation::kTanh ? Eigen::MatrixXd(z.array().tanh())
                                                      : Eigen::MatrixXd(z.cwiseMax(0.0)));
  }

  Eigen::MatrixXd delta = adjoint.transpose();
  if (output_ == OutputKind::kSoftplus)
    delta = delta.cwiseProduct(pre.back().unaryExpr(&sigmoid));

  std::vector<Eigen::MatrixXd> dw(depth);
  std::vector<Eigen::VectorXd> db(depth);
  for (std::size_t l = depth; l-- > 0;) {
    dw[l] = delta * acts[l].transpose();
    db[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd up = layers_[l].weight.transpose() * delta;
    const Eigen::MatrixXd& a = acts[l];
    if (activation_ == Activation::kTanh) {
      delta = up.cwiseProduct((1.0 - a.array().square()).matrix());
    } else {
      // Subgradient 0 at the kink.
      delta = up.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }

  Eigen::VectorXd grad(static_cast<Eigen::Index>(n_params()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    for (Eigen::Index r = 0; r < dw[l].rows(); ++r)
      for (Eigen::Index c = 0; c < dw[l].cols(); ++c) grad[k++] = dw[l](r, c);
    for (Eigen::Index r = 0; r < db[l].size(); ++r) grad[k++] = db[l][r];
  }
  return grad;
}

bool DemandModel::operator==(const DemandModel& other) const {
  return dims_ == other.dims_ && activation_ == other.activation_ &&
         output_ == other.output_ && parameters() == other.parameters();
}

InstanceFeatures make_features(const DemandMatrix& demand,
                               const Eigen::VectorXd& history,
                               std::uint64_t noise_seed) {
  const auto n = static_cast<std::size_t>(demand.rows());
  const auto t = static_cast<std::size_t>(demand.cols());
  if (static_cast<std::size_t>(history.size()) != n)
    throw DimensionError("make_features: history length must equal the customer count");
  InstanceFeatures f;
  f.n = n;
  f.t = t;
  f.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n * t),
                              static_cast<Eigen::Index>(feature_dim(n)));
  Rng rng(noise_seed);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < t; ++p) {
      const auto row = static_cast<Eigen::Index>(i * t + p);
      f.x(row, static_cast<Eigen::Index>((p + 1) % 7)) = 1.0;
      f.x(row, static_cast<Eigen::Index>(7 + i)) = 1.0;
      const double prev = p == 0 ? history[static_cast<Eigen::Index>(i)]
                                 : demand(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(p - 1));
      f.x(row, static_cast<Eigen::Index>(7 + n)) = prev / kDemandScale;
      f.x(row, static_cast<Eigen::Index>(8 + n)) = rng.normal();
    }
  return f;
}

DemandMatrix forward(const DemandModel& model, const InstanceFeatures& features) {
  const Eigen::VectorXd flat = model.predict(features.x);
  DemandMatrix d(static_cast<Eigen::Index>(features.n), static_cast<Eigen::Index>(features.t));
  for (std::size_t i = 0; i < features.n; ++i)
    for (std::size_t p = 0; p < features.t; ++p)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
          flat[static_cast<Eigen::Index>(i * features.t + p)];
  return d;
}

Eigen::VectorXd backward(const DemandModel& model, const InstanceFeatures& features,
                         const DemandMatrix& dL_dpred) {
  if (static_cast<std::size_t>(dL_dpred.rows()) != features.n ||
      static_cast<std::size_t>(dL_dpred.cols()) != features.t)
    throw DimensionError("backward: adjoint must be " + std::to_string(features.n) + "x" +
                         std::to_string(features.t));
  Eigen::VectorXd adjoint(static_cast<Eigen::Index>(features.n * features.t));
  for (std::size_t i = 0; i < features.n; ++i)
    for (std::size_t p = 0; p < features.t; ++p)
      adjoint[static_cast<Eigen::Index>(i * features.t + p)] =
          dL_dpred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p));
  return model.gradient(features.x, adjoint);
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (grads.size() != params.size())
    throw DimensionError("adam_step: gradient length does not match parameters");
  if (!grads.allFinite()) throw InvalidParameter("adam_step: non-finite gradient");
  if (!(lr >= 0.0)) throw InvalidParameter("adam_step: learning rate must be >= 0");
  if (state.m.size() != params.size()) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
    state.step = 0;
  }
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grads;
  state.v = beta2 * state.v + (1.0 - beta2) * grads.cwiseProduct(grads);
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  params.array() -=
      lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + eps);
}

std::string serialize_model(const DemandModel& model) {
  std::string out = "IRPDFL-MLP v1\n";
  for (std::size_t l = 0; l < model.dims().size(); ++l) {
    if (l) out += ' ';
    out += std::to_string(model.dims()[l]);
  }
  out += '\n';
  for (const auto& layer : model.layers()) {
    bool first = true;
    auto put = [&](double v) {
      if (!first) out += ' ';
      first = false;
      out += format_double(v);
    };
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) put(layer.weight(r, c));
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) put(layer.bias[r]);
    out += '\n';
  }
  if (model.activation() != Activation::kTanh)
    out += std::string("activation ") + to_string(model.activation()) + "\n";
  if (model.output() != OutputKind::kSoftplus) out += "output identity\n";
  return out;
}

DemandModel parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "IRPDFL-MLP v1")
    throw FormatError("header", "model file: first line must be \"IRPDFL-MLP v1\"");
  if (!std::getline(in, line)) throw FormatError("dims", "model file: missing layer dims");
  std::vector<std::size_t> dims;
  {
    std::istringstream ds(line);
    long long d = 0;
    while (ds >> d) {
      if (d <= 0) throw FormatError("dims", "model file: layer dims must be positive");
      dims.push_back(static_cast<std::size_t>(d));
    }
    if (!ds.eof()) throw FormatError("dims", "model file: malformed layer dims");
  }
  std::vector<std::string> layer_lines;
  Activation activation = Activation::kTanh;
  OutputKind output = OutputKind::kSoftplus;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("activation ", 0) == 0) {
      try {
        activation = parse_activation(line.substr(11));
      } catch (const InvalidParameter& e) {
        throw FormatError("activation", std::string("model file: ") + e.what());
      }
    } else if (line == "output identity") {
      output = OutputKind::kIdentity;
    } else {
      layer_lines.push_back(line);
    }
  }
  DemandModel model;
  try {
    model = DemandModel(dims, activation, output);
  } catch (const InvalidParameter& e) {
    throw FormatError("dims", std::string("model file: ") + e.what());
  }
  if (layer_lines.size() != model.layers().size())
    throw FormatError("layers", "model file: expected " +
                                    std::to_string(model.layers().size()) +
                                    " layer lines, found " + std::to_string(layer_lines.size()));
  for (std::size_t l = 0; l < layer_lines.size(); ++l) {
    auto& layer = model.layers()[l];
    std::vector<double> values;
    std::istringstream ls(layer_lines[l]);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw FormatError("layer " + std::to_string(l),
                          "model file: bad number \"" + tok + "\" in layer " + std::to_string(l));
      }
    }
    const auto expected = static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    if (values.size() != expected)
      throw FormatError("layer " + std::to_string(l),
                        "model file: layer " + std::to_string(l) + " has " +
                            std::to_string(values.size()) + " values, expected " +
                            std::to_string(expected));
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = values[k++];
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = values[k++];
  }
  return model;
}

void save_model(const DemandModel& model, const std::filesystem::path& path) {
  write_text_atomic(path, serialize_model(model));
}

DemandModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text(path));
}

}  // namespace irpdfl
