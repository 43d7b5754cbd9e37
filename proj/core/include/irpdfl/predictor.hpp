#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irpdfl/instance.hpp"

namespace irpdfl {

enum class Activation { kTanh, kRelu };
// kIdentity drops the softplus and exists for linear checks only.
enum class OutputKind { kSoftplus, kIdentity };

const char* to_string(Activation a);
Activation parse_activation(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Feedforward regressor mapping one feature row to one demand value.
// Parameters flatten layer by layer: weight row-major, then bias.
class DemandModel {
 public:
  DemandModel() = default;
  // All parameters zero. dims = {F, hidden..., 1}.
  DemandModel(std::vector<std::size_t> dims, Activation activation,
              OutputKind output = OutputKind::kSoftplus);

  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static DemandModel glorot(std::vector<std::size_t> dims, Activation activation,
                            std::uint64_t seed,
                            OutputKind output = OutputKind::kSoftplus);

  const std::vector<std::size_t>& dims() const { return dims_; }
  Activation activation() const { return activation_; }
  OutputKind output() const { return output_; }
  std::size_t input_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  std::size_t n_params() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::VectorXd& theta);

  // One prediction per row of x (samples x F).
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  // Gradient of sum_r adjoint[r] * predict(x)[r] with respect to parameters().
  Eigen::VectorXd gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& adjoint) const;

  bool operator==(const DemandModel& other) const;

 private:
  std::vector<std::size_t> dims_;
  Activation activation_ = Activation::kTanh;
  OutputKind output_ = OutputKind::kSoftplus;
  std::vector<DenseLayer> layers_;
};

// Feature rows of one instance, row i*T + t for customer i and period t.
// Columns: day-of-week one-hot (7), customer one-hot (N), previous-period
// demand / kDemandScale, noise.
struct InstanceFeatures {
  Eigen::MatrixXd x;
  std::size_t n = 0;
  std::size_t t = 0;
};

inline constexpr double kDemandScale = 10.0;

inline std::size_t feature_dim(std::size_t n_customers) { return 9 + n_customers; }

// Periods are numbered from 1 for the day-of-week; history holds d_{i,0}.
InstanceFeatures make_features(const DemandMatrix& demand,
                               const Eigen::VectorXd& history,
                               std::uint64_t noise_seed);

DemandMatrix forward(const DemandModel& model, const InstanceFeatures& features);
Eigen::VectorXd backward(const DemandModel& model, const InstanceFeatures& features,
                         const DemandMatrix& dL_dpred);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
};

// In-place Adam update with bias correction. Throws InvalidParameter for a
// non-finite gradient or a negative rate.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// Text model file: "IRPDFL-MLP v1", the layer dims, then one line per layer
// holding the row-major weights followed by the biases. A non-default
// activation or output is recorded on trailing "activation"/"output" lines.
std::string serialize_model(const DemandModel& model);
DemandModel parse_model(const std::string& text);
void save_model(const DemandModel& model, const std::filesystem::path& path);
DemandModel load_model(const std::filesystem::path& path);

}  // namespace irpdfl
