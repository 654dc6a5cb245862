#include "mplex/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mplex {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// 64-node Gauss-Legendre abscissas/weights on [-1,1] (positive half; the
// rule is symmetric). Values from Abramowitz & Stegun table 25.4.
constexpr int kGlHalf = 32;
constexpr double kGlX[kGlHalf] = {
    0.0243502926634244325089558, 0.0729931217877990394495429,
    0.1214628192961205544703765, 0.1696444204239928180373136,
    0.2174236437400070841496487, 0.2646871622087674163739642,
    0.3113228719902109561575127, 0.3572201583376681159504426,
    0.4022701579639916036957668, 0.4463660172534640879849477,
    0.4894031457070529574785263, 0.5312794640198945456580139,
    0.5718956462026340342838781, 0.6111553551723932502488530,
    0.6489654712546573398577612, 0.6852363130542332425635584,
    0.7198818501716108268489402, 0.7528199072605318966118638,
    0.7839723589433414076102205, 0.8132653151227975597419233,
    0.8406292962525803627516915, 0.8659993981540928197607834,
    0.8893154459951141058534040, 0.9105221370785028057563807,
    0.9295691721319395758214902, 0.9464113748584028160624815,
    0.9610087996520537189186141, 0.9733268277899109637418535,
    0.9833362538846259569312993, 0.9910133714767443207393824,
    0.9963401167719552793469245, 0.9993050417357721394569056};
constexpr double kGlW[kGlHalf] = {
    0.0486909570091397203833654, 0.0485754674415034269347991,
    0.0483447622348029571697695, 0.0479993885964583077281262,
    0.0475401657148303086622822, 0.0469681828162100173106682,
    0.0462847965813144172959532, 0.0454916279274181444797710,
    0.0445905581637565630601347, 0.0435837245293234533768279,
    0.0424735151236535890073398, 0.0412625632426235286101563,
    0.0399537411327203413866569, 0.0385501531786156291289625,
    0.0370551285402400460404151, 0.0354722132568823838106931,
    0.0338051618371416093915655, 0.0320579283548515535854675,
    0.0302346570724024788679741, 0.0283396726142594832275113,
    0.0263774697150546586716918, 0.0243527025687108733381776,
    0.0222701738083832541592983, 0.0201348231535302093723403,
    0.0179517157756973430850453, 0.0157260304760247193219660,
    0.0134630478967186425980608, 0.0111681394601311288185905,
    0.0088467598263639477230309, 0.0065044579689783628561174,
    0.0041470332605624676352875, 0.0017832807216964329472961};

}  // namespace

std::vector<int> assign_groups(const std::vector<double>& fractions, int n) {
  if (fractions.empty()) throw argument_error("assign_groups: empty fraction list");
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw argument_error("assign_groups: negative fraction");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw argument_error("assign_groups: fractions must sum to 1");
  const int g = int(fractions.size());
  std::vector<int> counts(g, 0);
  int assigned = 0;
  for (int k = 0; k + 1 < g; ++k) {
    counts[k] = int(std::floor(fractions[k] * n));
    assigned += counts[k];
  }
  counts[g - 1] = n - assigned;  // remainder to the last group
  std::vector<int> labels;
  labels.reserve(n);
  for (int k = 0; k < g; ++k)
    labels.insert(labels.end(), counts[k], k);
  return labels;
}

// ---------------------------------------------------------------------------
// Trajectory defaults

Matrix Trajectory::eval(double t) const {
  Matrix out(n_nodes(), dim());
  for (int i = 0; i < n_nodes(); ++i) out.row(i) = eval_node(i, t);
  return out;
}

RowVector Trajectory::integral_node(int i, double a, double b) const {
  // Composite GL-64, panels split at interior breakpoints.
  std::vector<double> cuts{a};
  for (double c : breakpoints())
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  RowVector acc = RowVector::Zero(dim());
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double mid = 0.5 * (cuts[s] + cuts[s + 1]);
    const double half = 0.5 * (cuts[s + 1] - cuts[s]);
    for (int k = 0; k < kGlHalf; ++k) {
      acc += kGlW[k] * half *
             (eval_node(i, mid - half * kGlX[k]) + eval_node(i, mid + half * kGlX[k]));
    }
  }
  return acc;
}

Matrix Trajectory::integral(double a, double b) const {
  Matrix out(n_nodes(), dim());
  for (int i = 0; i < n_nodes(); ++i) out.row(i) = integral_node(i, a, b);
  return out;
}

double Trajectory::sup_inner(int i, const RowVector& y, double a, double b) const {
  // 256-point grid, 1.1 safety factor.
  constexpr int kGrid = 256;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kGrid; ++k) {
    const double t = a + (b - a) * double(k) / double(kGrid - 1);
    best = std::max(best, eval_node(i, t).dot(y));
  }
  return best > 0 ? 1.1 * best : best / 1.1;
}

// ---------------------------------------------------------------------------
// BlockTrajectory

BlockTrajectory::BlockTrajectory(std::vector<int> group_of_node,
                                 std::vector<DynamicGroupParams> params,
                                 std::optional<StepSpec> step)
    : group_of_node_(std::move(group_of_node)),
      params_(std::move(params)),
      step_(std::move(step)) {
  for (int g : group_of_node_)
    if (g < 0 || g >= int(params_.size()))
      throw argument_error("BlockTrajectory: group label out of range");
  if (step_) {
    const auto& tau = step_->tau;
    if (!(tau[0] < tau[1] && tau[1] < tau[2]) || tau[0] <= 0.0 || tau[2] >= 1.0)
      throw argument_error("BlockTrajectory: breakpoints must satisfy 0 < tau1 < tau2 < tau3 < 1");
  }
}

double BlockTrajectory::step_level(int g, double t) const {
  if (!step_) return 0.0;
  const auto& s = *step_;
  const double r = params_[g].radius;
  if (t <= s.tau[0]) return s.multipliers[0] * r;
  if (t <= s.tau[1]) return s.multipliers[1] * r;
  if (t <= s.tau[2]) return s.multipliers[2] * r;
  return s.multipliers[3] * r;
}

RowVector BlockTrajectory::group_value(int g, double t) const {
  const auto& p = params_[g];
  RowVector x(2);
  x(0) = p.c1 + p.radius * std::sin(kTwoPi * t + p.phase);
  x(1) = p.c2 + p.radius * std::cos(kTwoPi * t + p.phase) + step_level(g, t);
  return x;
}

RowVector BlockTrajectory::eval_node(int i, double t) const {
  return group_value(group_of_node_[i], t);
}

Matrix BlockTrajectory::eval(double t) const {
  const int g1 = int(params_.size());
  Matrix by_group(g1, 2);
  for (int g = 0; g < g1; ++g) by_group.row(g) = group_value(g, t);
  Matrix out(n_nodes(), 2);
  for (int i = 0; i < n_nodes(); ++i) out.row(i) = by_group.row(group_of_node_[i]);
  return out;
}

RowVector BlockTrajectory::group_integral(int g, double a, double b) const {
  const auto& p = params_[g];
  // int sin(2 pi t + th) dt = -cos(2 pi t + th)/(2 pi)
  const double is = (std::cos(kTwoPi * a + p.phase) - std::cos(kTwoPi * b + p.phase)) / kTwoPi;
  const double ic = (std::sin(kTwoPi * b + p.phase) - std::sin(kTwoPi * a + p.phase)) / kTwoPi;
  RowVector acc(2);
  acc(0) = p.c1 * (b - a) + p.radius * is;
  acc(1) = p.c2 * (b - a) + p.radius * ic;
  if (step_) {
    const std::array<double, 5> cuts{0.0, step_->tau[0], step_->tau[1], step_->tau[2], 1.0};
    for (int s = 0; s < 4; ++s) {
      const double lo = std::max(a, cuts[s]);
      const double hi = std::min(b, cuts[s + 1]);
      if (hi > lo) acc(1) += step_->multipliers[s] * p.radius * (hi - lo);
    }
  }
  return acc;
}

RowVector BlockTrajectory::integral_node(int i, double a, double b) const {
  return group_integral(group_of_node_[i], a, b);
}

Matrix BlockTrajectory::integral(double a, double b) const {
  const int g1 = int(params_.size());
  Matrix by_group(g1, 2);
  for (int g = 0; g < g1; ++g) by_group.row(g) = group_integral(g, a, b);
  Matrix out(n_nodes(), 2);
  for (int i = 0; i < n_nodes(); ++i) out.row(i) = by_group.row(group_of_node_[i]);
  return out;
}

double BlockTrajectory::sup_inner(int i, const RowVector& y, double a, double b) const {
  // x(t).y = c1 y1 + c2 y2 + delta(t) y2 + R [sin(2pi t+th) y1 + cos(2pi t+th) y2];
  // the sinusoid is bounded by R ||y||, attained over any full period. Per
  // continuity segment the bound is exact up to partial-period slack.
  const int g = group_of_node_[i];
  const auto& p = params_[g];
  const double base = p.c1 * y(0) + p.c2 * y(1);
  const double amp = p.radius * y.norm();
  if (!step_) return base + amp;
  double best = -std::numeric_limits<double>::infinity();
  const std::array<double, 5> cuts{0.0, step_->tau[0], step_->tau[1], step_->tau[2], 1.0};
  for (int s = 0; s < 4; ++s) {
    if (cuts[s + 1] <= a || cuts[s] >= b) continue;
    best = std::max(best, base + step_->multipliers[s] * p.radius * y(1) + amp);
  }
  return best;
}

std::vector<double> BlockTrajectory::breakpoints() const {
  if (!step_) return {};
  return {step_->tau[0], step_->tau[1], step_->tau[2]};
}

// ---------------------------------------------------------------------------
// TableTrajectory

TableTrajectory::TableTrajectory(std::vector<double> times, std::vector<Matrix> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() < 2 || times_.size() != values_.size())
    throw argument_error("TableTrajectory: need matching times/values with >= 2 knots");
  if (std::abs(times_.front()) > 1e-12 || std::abs(times_.back() - 1.0) > 1e-12)
    throw argument_error("TableTrajectory: knots must cover [0,1]");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (times_[k] <= times_[k - 1])
      throw argument_error("TableTrajectory: knot times must increase");
    if (values_[k].rows() != values_[0].rows() || values_[k].cols() != values_[0].cols())
      throw argument_error("TableTrajectory: inconsistent value shapes");
  }
}

RowVector TableTrajectory::eval_node(int i, double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - times_.begin(), 1),
                                         times_.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return (1.0 - w) * values_[lo].row(i) + w * values_[hi].row(i);
}

RowVector TableTrajectory::integral_node(int i, double a, double b) const {
  // Exact on a piecewise-linear function: trapezoid per overlapped segment.
  RowVector acc = RowVector::Zero(dim());
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    const double lo = std::max(a, times_[k]);
    const double hi = std::min(b, times_[k + 1]);
    if (hi <= lo) continue;
    acc += 0.5 * (hi - lo) * (eval_node(i, lo) + eval_node(i, hi));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// LatentModel

LatentModel::LatentModel(std::shared_ptr<const Trajectory> trajectory,
                         Matrix layer_positions, int n_layers)
    : trajectory_(std::move(trajectory)),
      layer_positions_(std::move(layer_positions)),
      n_layers_(n_layers) {
  if (!trajectory_) throw argument_error("LatentModel: null trajectory");
  if (n_layers_ < 1) throw argument_error("LatentModel: need at least one layer");
  if (layer_positions_.rows() != Eigen::Index(trajectory_->n_nodes()) * n_layers_ ||
      layer_positions_.cols() != trajectory_->dim())
    throw argument_error("LatentModel: layer positions must be (N*L) x d");
  if (!layer_positions_.allFinite())
    throw model_validity_error("LatentModel: nonfinite layer position");
}

double LatentModel::intensity(int i, int j, int l, double t) const {
  if (i < 0 || i >= n_nodes() || j < 0 || j >= n_nodes() || l < 0 || l >= n_layers_)
    throw argument_error("intensity: index out of range");
  if (!(t >= 0.0 && t <= 1.0)) throw argument_error("intensity: time outside [0,1]");
  const double value = intensity_unchecked(i, j, l, t);
  if (!(value > 0.0))
    throw model_validity_error("intensity: nonpositive value at (" + std::to_string(i) +
                               "," + std::to_string(j) + "," + std::to_string(l) + ",t=" +
                               std::to_string(t) + ")");
  return value;
}

PositivityReport validate_positivity(const LatentModel& model, int grid_resolution) {
  if (grid_resolution < 2) throw argument_error("validate_positivity: resolution >= 2");
  const int n = model.n_nodes();
  const int L = model.n_layers();

  // Representative (i,j) pairs: with block structure many edges share the
  // same intensity function, so scan one per distinct (X_i, Y_lj) pair.
  const auto* block = dynamic_cast<const BlockTrajectory*>(&model.trajectory());
  std::vector<int> src_reps;
  if (block) {
    std::vector<int> seen;
    for (int i = 0; i < n; ++i) {
      if (std::find(seen.begin(), seen.end(), block->group_of(i)) == seen.end()) {
        seen.push_back(block->group_of(i));
        src_reps.push_back(i);
      }
    }
  } else {
    for (int i = 0; i < n; ++i) src_reps.push_back(i);
  }

  PositivityReport report;
  report.min_value = std::numeric_limits<double>::infinity();
  for (int l = 0; l < L; ++l) {
    // Deduplicate identical destination rows within the layer.
    std::vector<int> dst_reps;
    std::vector<RowVector> seen_rows;
    for (int j = 0; j < n; ++j) {
      RowVector y = model.layer_position(l, j);
      bool found = false;
      for (const auto& r : seen_rows)
        if (r == y) { found = true; break; }
      if (!found) {
        seen_rows.push_back(y);
        dst_reps.push_back(j);
      }
    }
    for (int i : src_reps) {
      for (int j : dst_reps) {
        for (int k = 0; k < grid_resolution; ++k) {
          const double t = double(k) / double(grid_resolution - 1);
          const double v = model.intensity_unchecked(i, j, l, t);
          if (v < report.min_value) {
            report.min_value = v;
            report.min_i = i;
            report.min_j = j;
            report.min_layer = l;
            report.min_time = t;
          }
          if (!(v > 0.0)) ++report.n_violations;
        }
      }
    }
  }
  return report;
}

namespace {

LatentModel build_block_model(const BlockModelSpec& spec, int n_nodes, int n_layers,
                              bool discontinuous) {
  if (n_nodes < 1 || n_layers < 1)
    throw argument_error("block model: need n_nodes >= 1 and n_layers >= 1");
  if (spec.n_groups_dynamic < 1 || spec.n_groups_layer < 1)
    throw argument_error("block model: need G1, G2 >= 1");
  if (int(spec.dynamic_params.size()) != spec.n_groups_dynamic)
    throw argument_error("block model: dynamic_params size != G1");
  if (int(spec.layer_params.size()) != n_layers)
    throw argument_error("block model: layer_params must list every layer");
  for (const auto& lp : spec.layer_params)
    if (int(lp.size()) != spec.n_groups_layer)
      throw argument_error("block model: layer_params entries must have G2 groups");
  if (discontinuous && !spec.discontinuity)
    throw argument_error("block model: discontinuity spec required");
  if (!discontinuous && spec.discontinuity)
    throw argument_error("block model: smooth build with discontinuity spec present");

  std::vector<int> z = spec.group_of_node;
  if (z.empty()) {
    if (spec.group_fractions.empty())
      throw argument_error("block model: need group_of_node or group_fractions");
    z = assign_groups(spec.group_fractions, n_nodes);
  }
  if (int(z.size()) != n_nodes)
    throw argument_error("block model: group_of_node size != n_nodes");

  std::vector<std::vector<int>> v = spec.layer_group_of_node;
  if (v.empty()) {
    std::vector<double> fr = spec.layer_group_fractions;
    if (fr.empty()) {
      if (spec.n_groups_layer == spec.n_groups_dynamic && !spec.group_fractions.empty())
        fr = spec.group_fractions;
      else if (spec.n_groups_layer == 1)
        fr = {1.0};
      else
        throw argument_error("block model: need layer group assignment");
    }
    v.assign(n_layers, assign_groups(fr, n_nodes));
  }
  if (int(v.size()) != n_layers)
    throw argument_error("block model: layer_group_of_node must list every layer");
  for (const auto& vl : v) {
    if (int(vl.size()) != n_nodes)
      throw argument_error("block model: layer group labels size != n_nodes");
    for (int q : vl)
      if (q < 0 || q >= spec.n_groups_layer)
        throw argument_error("block model: layer group label out of range");
  }

  Matrix Y(Eigen::Index(n_nodes) * n_layers, 2);
  for (int l = 0; l < n_layers; ++l) {
    for (int j = 0; j < n_nodes; ++j) {
      const auto& gp = spec.layer_params[l][v[l][j]];
      Y(l * n_nodes + j, 0) = gp.offset + std::cos(gp.angle);
      Y(l * n_nodes + j, 1) = gp.offset + std::sin(gp.angle);
    }
  }

  auto trajectory = std::make_shared<BlockTrajectory>(
      z, spec.dynamic_params, discontinuous ? spec.discontinuity : std::nullopt);
  LatentModel model(trajectory, std::move(Y), n_layers);

  const auto report = validate_positivity(model, 100);
  if (!report.ok())
    throw model_validity_error(
        "block model: nonpositive intensity " + std::to_string(report.min_value) +
        " at (i=" + std::to_string(report.min_i) + ", j=" + std::to_string(report.min_j) +
        ", layer=" + std::to_string(report.min_layer) +
        ", t=" + std::to_string(report.min_time) + ")");
  return model;
}

}  // namespace

LatentModel build_smooth_block_model(const BlockModelSpec& spec, int n_nodes,
                                     int n_layers) {
  return build_block_model(spec, n_nodes, n_layers, false);
}

LatentModel build_discontinuous_block_model(const BlockModelSpec& spec, int n_nodes,
                                            int n_layers) {
  return build_block_model(spec, n_nodes, n_layers, true);
}

}  // namespace mplex
