#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "wildfusion/core/rng.hpp"
#include "wildfusion/field/config.hpp"

namespace wf {

struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;          // 1 for vectors
  std::ptrdiff_t offset = 0;
  int size() const { return rows * cols; }
};

/// Names, shapes and offsets of every trainable tensor in the flat vector.
/// Order is fixed by construction and shared by parameters, gradients, and
/// optimizer moments.
class ParamLayout {
 public:
  explicit ParamLayout(const ModelConfig& cfg);

  const std::vector<TensorSpec>& tensors() const { return specs_; }
  std::ptrdiff_t total() const { return total_; }
  const TensorSpec& at(const std::string& name) const;

 private:
  std::ptrdiff_t add(const std::string& name, int rows, int cols);

  std::vector<TensorSpec> specs_;
  std::ptrdiff_t total_ = 0;
};

/// Trainable weights plus the frozen Fourier frequency matrix.
struct ModelParams {
  ModelConfig config;
  Eigen::MatrixXf fourier_b;   // [m x 3], sampled once, never updated
  Eigen::VectorXf theta;       // flat trainable vector, see ParamLayout
};

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

void write_checkpoint(const std::string& path, const ModelParams& params);
ModelParams read_checkpoint(const std::string& path);

}  // namespace wf
