#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "irpdfl/instance.hpp"
#include "irpdfl/predictor.hpp"

namespace irpdfl {

enum class Split { kTrain, kVal, kTest };
const char* to_string(Split split);

// Ground-truth demand law of a synthetic dataset.
//  seasonal: d_it = base_i (1 + 0.3 sin(2 pi t / 7)) + 0.1 base_i noise, a
//            multiplicative day-of-week effect a linear model cannot express.
//  linear:   d_it = 1 + 0.6 d_{i,t-1} + 0.4 w_{dow(t)} + 0.05 noise, exactly
//            linear in the features.
enum class DemandLaw { kSeasonal, kLinear };
const char* to_string(DemandLaw law);
DemandLaw parse_demand_law(const std::string& name);

struct Record {
  std::string id;
  Split split = Split::kTrain;
  IrpInstance instance;  // instance.demand is the true demand
  Eigen::VectorXd history;  // d_{i,0}, the period before the horizon
  InstanceFeatures features;
};

struct Dataset {
  std::vector<Record> records;
  DemandLaw law = DemandLaw::kSeasonal;
  std::uint64_t seed = 0;

  std::vector<const Record*> split(Split which) const;
  std::size_t feature_dim() const;
};

struct DatasetParams {
  std::size_t n_instances = 10;
  std::size_t n_customers = 2;
  std::size_t horizon = 3;
  std::size_t n_routes = 3;
  DemandLaw law = DemandLaw::kSeasonal;
};

// Instances from generate_instance with demand redrawn under `law`, then
// capacities refit to that demand. Split 60/20/20 by index (train first).
Dataset synthesize_dataset(const DatasetParams& params, std::uint64_t seed);

// Record for a fixed instance and history, split train.
Record make_record(std::string id, IrpInstance instance, Eigen::VectorXd history,
                   std::uint64_t noise_seed);

// A dataset lives in DIR/dataset.json.
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace irpdfl
