#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "mplex/common.hpp"

namespace mplex {

// Piecewise-constant shift applied to the second trajectory coordinate.
// Level on segment k is multiplier[k] * radius of the node's dynamic group;
// segments are (0,tau1], (tau1,tau2], (tau2,tau3], (tau3,1].
struct StepSpec {
  std::array<double, 3> tau{0.25, 0.5, 0.75};
  std::array<double, 4> multipliers{0.0, 0.4, -0.3, 0.7};
};

struct DynamicGroupParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double radius = 0.0;
  double phase = 0.0;
};

struct LayerGroupParams {
  double offset = 0.0;  // additive constant in both coordinates
  double angle = 0.0;   // [offset + cos(angle), offset + sin(angle)]
};

struct BlockModelSpec {
  int n_groups_dynamic = 1;
  int n_groups_layer = 1;
  std::vector<DynamicGroupParams> dynamic_params;          // size G1
  std::vector<std::vector<LayerGroupParams>> layer_params; // [L][G2]
  // Either explicit labels or fractions resolved into contiguous blocks.
  std::vector<int> group_of_node;                          // z_i, optional
  std::vector<std::vector<int>> layer_group_of_node;       // v_i^l, optional
  std::vector<double> group_fractions;
  std::vector<double> layer_group_fractions;
  std::optional<StepSpec> discontinuity;
};

// Contiguous block assignment: counts are floored per fraction and the
// remainder goes to the last group.
std::vector<int> assign_groups(const std::vector<double>& fractions, int n);

// Time-varying node positions X_i(t), t in [0,1]. Evaluation is allowed at
// both endpoints; the event window itself is (0,1].
class Trajectory {
 public:
  virtual ~Trajectory() = default;
  virtual int n_nodes() const = 0;
  virtual int dim() const = 0;
  virtual RowVector eval_node(int i, double t) const = 0;
  // X(t) as an N x d matrix.
  virtual Matrix eval(double t) const;
  // Integral of X_i over [a,b], exact where a closed form exists,
  // 64-node Gauss-Legendre otherwise.
  virtual RowVector integral_node(int i, double a, double b) const;
  virtual Matrix integral(double a, double b) const;
  // Upper bound for sup_{t in [a,b]} X_i(t).y, safety factor included.
  virtual double sup_inner(int i, const RowVector& y, double a, double b) const;
  // Interior discontinuity locations, sorted.
  virtual std::vector<double> breakpoints() const { return {}; }
};

// Group sinusoids of the block simulation models, with optional step shift.
class BlockTrajectory final : public Trajectory {
 public:
  BlockTrajectory(std::vector<int> group_of_node,
                  std::vector<DynamicGroupParams> params,
                  std::optional<StepSpec> step);

  int n_nodes() const override { return int(group_of_node_.size()); }
  int dim() const override { return 2; }
  RowVector eval_node(int i, double t) const override;
  Matrix eval(double t) const override;
  RowVector integral_node(int i, double a, double b) const override;
  Matrix integral(double a, double b) const override;
  double sup_inner(int i, const RowVector& y, double a, double b) const override;
  std::vector<double> breakpoints() const override;

  int group_of(int i) const { return group_of_node_[i]; }
  const DynamicGroupParams& params(int g) const { return params_[g]; }
  double step_level(int g, double t) const;

 private:
  RowVector group_value(int g, double t) const;
  RowVector group_integral(int g, double a, double b) const;

  std::vector<int> group_of_node_;
  std::vector<DynamicGroupParams> params_;
  std::optional<StepSpec> step_;
};

// Piecewise-linear interpolation of sampled positions on a uniform-or-not
// knot grid covering [0,1]. Integrals are exact (trapezoid per segment);
// sup bounds use a 256-point grid with a 1.1 safety factor.
class TableTrajectory final : public Trajectory {
 public:
  TableTrajectory(std::vector<double> times, std::vector<Matrix> values);

  int n_nodes() const override { return int(values_.front().rows()); }
  int dim() const override { return int(values_.front().cols()); }
  RowVector eval_node(int i, double t) const override;
  RowVector integral_node(int i, double a, double b) const override;

 private:
  std::vector<double> times_;
  std::vector<Matrix> values_;  // one N x d matrix per knot
};

class LatentModel {
 public:
  LatentModel(std::shared_ptr<const Trajectory> trajectory, Matrix layer_positions,
              int n_layers);

  int n_nodes() const { return trajectory_->n_nodes(); }
  int n_layers() const { return n_layers_; }
  int dim() const { return trajectory_->dim(); }
  const Trajectory& trajectory() const { return *trajectory_; }
  const Matrix& layer_positions() const { return layer_positions_; }
  // N x d slice holding layer l's positions.
  Eigen::Block<const Matrix> layer_block(int l) const {
    return layer_positions_.block(l * n_nodes(), 0, n_nodes(), dim());
  }
  RowVector layer_position(int l, int j) const {
    return layer_positions_.row(l * n_nodes() + j);
  }

  // lambda_{lij}(t) = X_i(t).Y_{lj}; throws on out-of-range arguments and on
  // nonpositive values (the model contract requires positivity).
  double intensity(int i, int j, int l, double t) const;
  // Hot path for sampling and validation; no checks.
  double intensity_unchecked(int i, int j, int l, double t) const {
    return trajectory_->eval_node(i, t).dot(layer_positions_.row(l * n_nodes() + j));
  }

 private:
  std::shared_ptr<const Trajectory> trajectory_;
  Matrix layer_positions_;  // (N*L) x d, layer-major blocks
  int n_layers_;
};

struct PositivityReport {
  double min_value = 0.0;
  int min_i = -1, min_j = -1, min_layer = -1;
  double min_time = 0.0;
  long n_violations = 0;  // grid points with nonpositive intensity
  bool ok() const { return n_violations == 0; }
};

// Scans all (i,j,l) on a uniform time grid over [0,1]; group structure is
// deduplicated so block models cost G1*G2*L*resolution evaluations.
PositivityReport validate_positivity(const LatentModel& model, int grid_resolution);

LatentModel build_smooth_block_model(const BlockModelSpec& spec, int n_nodes,
                                     int n_layers);
LatentModel build_discontinuous_block_model(const BlockModelSpec& spec, int n_nodes,
                                            int n_layers);

}  // namespace mplex
