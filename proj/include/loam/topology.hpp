#pragma once

#include <algorithm>
#include <memory>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "loam/common.hpp"

namespace loam {

/// An abstract collection of mesh entities. Stores no bulk data, only a count.
class Set {
public:
  explicit Set(int size, std::string name = "set") : size_(size), name_(std::move(name)) {
    require(size >= 0, ErrorKind::InvalidArgument, "Set size must be non-negative");
  }
  int size() const { return size_; }
  const std::string& name() const { return name_; }

private:
  int size_;
  std::string name_;
};

using SetPtr = std::shared_ptr<const Set>;

inline SetPtr make_set(int size, std::string name = "set") {
  return std::make_shared<const Set>(size, std::move(name));
}

/// Constant-arity indirection from a source set to a target set.
/// Values are stored row-major by source entity; every entry < target->size().
class Map {
public:
  Map(SetPtr source, SetPtr target, int arity, std::vector<int> values, std::string name = "map")
      : source_(std::move(source)), target_(std::move(target)), arity_(arity),
        values_(std::move(values)), name_(std::move(name)) {
    require(arity_ > 0, ErrorKind::InvalidArgument, "Map arity must be positive");
    require(static_cast<long>(values_.size()) == static_cast<long>(source_->size()) * arity_,
            ErrorKind::ArityMismatch,
            name_ + ": value table length != source size * arity");
    for (int v : values_)
      require(v >= 0 && v < target_->size(), ErrorKind::IndexOutOfRange,
              name_ + ": map entry " + std::to_string(v) + " outside target set of size " +
                  std::to_string(target_->size()));
  }

  const SetPtr& source() const { return source_; }
  const SetPtr& target() const { return target_; }
  int arity() const { return arity_; }
  const std::string& name() const { return name_; }

  /// Tuple of target indices for source entity e.
  const int* row(int e) const { return values_.data() + static_cast<long>(e) * arity_; }
  const std::vector<int>& values() const { return values_; }

private:
  SetPtr source_;
  SetPtr target_;
  int arity_;
  std::vector<int> values_;
  std::string name_;
};

using MapPtr = std::shared_ptr<const Map>;

inline MapPtr make_map(SetPtr source, SetPtr target, int arity, std::vector<int> values,
                       std::string name = "map") {
  return std::make_shared<const Map>(std::move(source), std::move(target), arity,
                                     std::move(values), std::move(name));
}

/// Partition of an iteration set such that no two entities of equal color
/// share a target index under any conflict map.
struct Coloring {
  std::vector<int> colors;
  int num_colors = 0;
};

/// Greedy first-fit coloring, visiting entities in ascending index and
/// assigning the smallest color not used by any already-colored entity that
/// shares a target under any conflict map. Deterministic by construction.
inline Coloring color_iteration(const SetPtr& iter, const std::vector<MapPtr>& conflict_maps) {
  for (const auto& m : conflict_maps)
    require(m->source() == iter, ErrorKind::SourceMismatch,
            "conflict map " + m->name() + " source differs from iteration set");

  const int n = iter->size();
  Coloring result;
  result.colors.assign(n, -1);

  // colors_at[m][t] lists colors already present at target t of map m.
  std::vector<std::vector<std::vector<int>>> colors_at(conflict_maps.size());
  for (size_t mi = 0; mi < conflict_maps.size(); ++mi)
    colors_at[mi].resize(conflict_maps[mi]->target()->size());

  std::vector<char> forbidden;
  for (int e = 0; e < n; ++e) {
    std::fill(forbidden.begin(), forbidden.end(), 0);
    for (size_t mi = 0; mi < conflict_maps.size(); ++mi) {
      const int* tuple = conflict_maps[mi]->row(e);
      for (int k = 0; k < conflict_maps[mi]->arity(); ++k)
        for (int c : colors_at[mi][tuple[k]])
          if (c < static_cast<int>(forbidden.size())) forbidden[c] = 1;
    }
    int color = 0;
    while (color < static_cast<int>(forbidden.size()) && forbidden[color]) ++color;
    result.colors[e] = color;
    if (color >= result.num_colors) {
      result.num_colors = color + 1;
      forbidden.resize(result.num_colors, 0);
    }
    for (size_t mi = 0; mi < conflict_maps.size(); ++mi) {
      const int* tuple = conflict_maps[mi]->row(e);
      for (int k = 0; k < conflict_maps[mi]->arity(); ++k) {
        auto& at = colors_at[mi][tuple[k]];
        if (std::find(at.begin(), at.end(), color) == at.end()) at.push_back(color);
      }
    }
  }
  return result;
}

/// Reverse Cuthill-McKee ordering. BFS from a minimum-degree vertex (ties by
/// index), neighbors visited in ascending-degree order (ties by index), final
/// order reversed. Disconnected components are seeded in ascending order of
/// their minimum-degree vertex. Returns r with r[new_position] = old_index.
inline std::vector<int> rcm_order(int n, const std::vector<std::vector<int>>& adjacency) {
  require(static_cast<int>(adjacency.size()) == n, ErrorKind::InvalidArgument,
          "adjacency list count != n");
  for (int u = 0; u < n; ++u)
    for (int v : adjacency[u]) {
      require(v >= 0 && v < n, ErrorKind::IndexOutOfRange, "adjacency index out of range");
      const auto& back = adjacency[v];
      require(std::find(back.begin(), back.end(), u) != back.end(),
              ErrorKind::AsymmetricAdjacency,
              "edge " + std::to_string(u) + "-" + std::to_string(v) + " not symmetric");
    }

  std::vector<int> degree(n);
  for (int u = 0; u < n; ++u) degree[u] = static_cast<int>(adjacency[u].size());

  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);

  auto next_seed = [&]() {
    int best = -1;
    for (int u = 0; u < n; ++u)
      if (!visited[u] && (best == -1 || degree[u] < degree[best])) best = u;
    return best;
  };

  std::vector<int> nbrs;
  for (int seed = next_seed(); seed != -1; seed = next_seed()) {
    visited[seed] = 1;
    std::queue<int> queue;
    queue.push(seed);
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop();
      order.push_back(u);
      nbrs.clear();
      for (int v : adjacency[u])
        if (!visited[v]) {
          visited[v] = 1;
          nbrs.push_back(v);
        }
      std::sort(nbrs.begin(), nbrs.end(),
                [&](int a, int b) { return degree[a] != degree[b] ? degree[a] < degree[b] : a < b; });
      for (int v : nbrs) queue.push(v);
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

/// Max |position(u) - position(v)| over all edges, for order[pos] = vertex.
inline int graph_bandwidth(const std::vector<int>& order,
                           const std::vector<std::vector<int>>& adjacency) {
  std::vector<int> pos(order.size());
  for (size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);
  int bw = 0;
  for (size_t u = 0; u < adjacency.size(); ++u)
    for (int v : adjacency[u]) bw = std::max(bw, std::abs(pos[u] - pos[v]));
  return bw;
}

} // namespace loam
