#include "mplex/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <unordered_map>

namespace mplex {

TrajectoryMatrix normalize_and_smooth(const Embedding& embedding, int window) {
  const int N = embedding.n_nodes;
  const int M = embedding.n_bins;
  const Eigen::Index d = embedding.left.cols();
  if (window < 1 || window > M || window % 2 == 0)
    throw argument_error("normalize_and_smooth: window must be odd and in [1, M]");

  TrajectoryMatrix out;
  out.n_nodes = N;
  out.n_bins = M;
  out.window = window;
  out.center = embedding.left.colwise().mean();
  Matrix centered = embedding.left.rowwise() - out.center;
  out.scale.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double sd = std::sqrt(centered.col(k).squaredNorm() / double(centered.rows()));
    if (sd <= 0.0)
      throw data_error("normalize_and_smooth: dimension " + std::to_string(k) +
                       " has zero variance");
    out.scale(k) = sd;
    centered.col(k) /= sd;
  }

  const int half = window / 2;
  out.data.resize(centered.rows(), d);
  for (int i = 0; i < N; ++i) {
    for (int m = 0; m < M; ++m) {
      const int lo = std::max(0, m - half);
      const int hi = std::min(M - 1, m + half);
      RowVector acc = RowVector::Zero(d);
      for (int w = lo; w <= hi; ++w) acc += centered.row(Eigen::Index(w) * N + i);
      out.data.row(Eigen::Index(m) * N + i) = acc / double(hi - lo + 1);
    }
  }
  return out;
}

Matrix trajectory_distances(const TrajectoryMatrix& trajectories) {
  const int N = trajectories.n_nodes;
  Matrix D = Matrix::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    const Matrix ti = trajectories.node(i);
    for (int j = i + 1; j < N; ++j) {
      const double dist = (ti - trajectories.node(j)).norm();
      D(i, j) = dist;
      D(j, i) = dist;
    }
  }
  return D;
}

Matrix row_distances(const Matrix& points) {
  const Eigen::Index n = points.rows();
  Matrix D = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (points.row(i) - points.row(j)).norm();
      D(i, j) = dist;
      D(j, i) = dist;
    }
  return D;
}

ClusterResult agglomerative_cluster(const Matrix& distances, int k) {
  const int n = int(distances.rows());
  if (distances.cols() != n) throw argument_error("agglomerative_cluster: square matrix required");
  if (k < 1 || k > n) throw argument_error("agglomerative_cluster: k outside [1, N]");
  if ((distances - distances.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      distances.diagonal().cwiseAbs().maxCoeff() > 1e-12)
    throw argument_error("agglomerative_cluster: need symmetric zero-diagonal distances");

  struct Cluster {
    int id;          // leaf index or n + merge step
    int smallest;    // lowest original member, for tie-breaking and labels
    int size;
    bool active;
  };
  std::vector<Cluster> clusters(n);
  Matrix D = distances;
  for (int i = 0; i < n; ++i) clusters[i] = {i, i, 1, true};

  ClusterResult result;
  std::vector<int> active(n);
  for (int i = 0; i < n; ++i) active[i] = i;

  // Slot-indexed O(N^3) sweep; clusters keep their slot in D after merging.
  const int n_merges_for_cut = n - k;
  std::vector<int> member_slot(n);
  for (int i = 0; i < n; ++i) member_slot[i] = i;

  for (int step = 0; step < n - 1; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const int ia = active[a];
        const int ib = active[b];
        const double dist = D(ia, ib);
        if (dist < best) {
          best = dist;
          bi = ia;
          bj = ib;
        } else if (dist == best && bi >= 0) {
          // tie: lowest (smallest-member, smallest-member) pair wins
          int ca = std::min(clusters[ia].smallest, clusters[ib].smallest);
          int cb = std::max(clusters[ia].smallest, clusters[ib].smallest);
          int pa = std::min(clusters[bi].smallest, clusters[bj].smallest);
          int pb = std::max(clusters[bi].smallest, clusters[bj].smallest);
          if (std::tie(ca, cb) < std::tie(pa, pb)) {
            bi = ia;
            bj = ib;
          }
        }
      }
    }

    // UPGMA update into slot bi: unweighted average over member pairs.
    const int sa = clusters[bi].size;
    const int sb = clusters[bj].size;
    for (int ic : active) {
      if (ic == bi || ic == bj) continue;
      const double merged = (sa * D(bi, ic) + sb * D(bj, ic)) / double(sa + sb);
      D(bi, ic) = merged;
      D(ic, bi) = merged;
    }
    result.merges.push_back(MergeStep{clusters[bi].id, clusters[bj].id, n + step, best});
    clusters[bi].id = n + step;
    clusters[bi].smallest = std::min(clusters[bi].smallest, clusters[bj].smallest);
    clusters[bi].size = sa + sb;
    clusters[bj].active = false;
    active.erase(std::remove(active.begin(), active.end(), bj), active.end());

    for (int m = 0; m < n; ++m)
      if (member_slot[m] == bj) member_slot[m] = bi;

    if (step + 1 == n_merges_for_cut) {
      // Label by order of smallest member within each surviving cluster.
      std::vector<int> slots = active;
      std::sort(slots.begin(), slots.end(), [&](int x, int y) {
        return clusters[x].smallest < clusters[y].smallest;
      });
      std::unordered_map<int, int> label_of_slot;
      for (std::size_t s = 0; s < slots.size(); ++s) label_of_slot[slots[s]] = int(s);
      result.labels.resize(n);
      for (int m = 0; m < n; ++m) result.labels[m] = label_of_slot[member_slot[m]];
    }
  }
  if (k == n) {
    result.labels.resize(n);
    for (int m = 0; m < n; ++m) result.labels[m] = m;
  }
  return result;
}

double compare_partitions(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw argument_error("compare_partitions: length mismatch");
  const int n = int(a.size());
  if (n == 0) return 1.0;

  auto relabel = [](const std::vector<int>& v) {
    std::unordered_map<int, int> map;
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out[i] = map.emplace(v[i], int(map.size())).first->second;
    }
    return std::pair{out, int(map.size())};
  };
  auto [la, ka] = relabel(a);
  auto [lb, kb] = relabel(b);

  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(ka, kb);
  for (int i = 0; i < n; ++i) table(la[i], lb[i])++;

  auto choose2 = [](double m) { return m * (m - 1.0) / 2.0; };
  double sum_ij = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) sum_ij += choose2(table(i, j));
  double sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < ka; ++i) sum_a += choose2(table.row(i).sum());
  for (int j = 0; j < kb; ++j) sum_b += choose2(table.col(j).sum());
  const double total = choose2(double(n));
  const double expected = total > 0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return la == lb ? 1.0 : 0.0;
  return (sum_ij - expected) / denom;
}

}  // namespace mplex
