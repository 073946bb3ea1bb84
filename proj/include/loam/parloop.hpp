#pragma once

#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include "loam/data.hpp"
#include "loam/kernel.hpp"
#include "loam/topology.hpp"

namespace loam {

/// A parloop argument: a data object, its declared access, and zero maps
/// (direct), one map (indirect Dat) or two maps (Mat rows and columns).
struct Arg {
  DatPtr dat;
  MatPtr mat;
  GlobalPtr global;
  Access access = Access::READ;
  std::vector<MapPtr> maps;

  bool is_dat() const { return dat != nullptr; }
  bool is_mat() const { return mat != nullptr; }
  bool is_global() const { return global != nullptr; }
  bool direct() const { return maps.empty(); }
};

inline Arg arg(DatPtr dat, Access access, MapPtr map = nullptr) {
  Arg a;
  a.dat = std::move(dat);
  a.access = access;
  if (map) a.maps.push_back(std::move(map));
  return a;
}

inline Arg arg(MatPtr mat, Access access, MapPtr row_map, MapPtr col_map) {
  Arg a;
  a.mat = std::move(mat);
  a.access = access;
  a.maps.push_back(std::move(row_map));
  a.maps.push_back(std::move(col_map));
  return a;
}

inline Arg arg(GlobalPtr global, Access access) {
  Arg a;
  a.global = std::move(global);
  a.access = access;
  return a;
}

/// Application of a kernel once per iteration-set entity with staged args.
struct Parloop {
  ir::KernelPtr kernel;
  SetPtr iterset;
  std::vector<Arg> args;
};

namespace detail {

inline std::vector<int> staged_extents(const Arg& a) {
  if (a.is_global()) return {a.global->dim()};
  if (a.is_mat())
    return {a.maps[0]->arity(), a.maps[1]->arity()};
  if (a.direct()) return {a.dat->dim()};
  if (a.dat->dim() == 1) return {a.maps[0]->arity()};
  return {a.maps[0]->arity(), a.dat->dim()};
}

inline size_t staged_size(const Arg& a) {
  size_t n = 1;
  for (int e : staged_extents(a)) n *= e;
  return n;
}

inline bool writes(Access a) { return a != Access::READ; }

inline const void* underlying(const Arg& a) {
  if (a.is_dat()) return a.dat.get();
  if (a.is_mat()) return a.mat.get();
  return a.global.get();
}

} // namespace detail

/// Checks all Parloop and Arg invariants without touching any data.
inline void validate(const Parloop& loop) {
  require(loop.kernel != nullptr, ErrorKind::InvalidArgument, "parloop without kernel");
  require(loop.iterset != nullptr, ErrorKind::InvalidArgument, "parloop without iteration set");

  for (const auto& a : loop.args) {
    int kinds = int(a.is_dat()) + int(a.is_mat()) + int(a.is_global());
    require(kinds == 1, ErrorKind::InvalidArgument, "argument must target exactly one object");
    if (a.is_dat()) {
      require(a.access == Access::READ || a.access == Access::WRITE || a.access == Access::RW ||
                  a.access == Access::INC,
              ErrorKind::IllegalAccess,
              std::string("access ") + access_name(a.access) + " not legal for Dats");
      require(a.maps.size() <= 1, ErrorKind::InvalidArgument, "Dat argument with several maps");
      if (a.direct())
        require(a.dat->set() == loop.iterset, ErrorKind::MapSourceMismatch,
                "direct argument " + a.dat->name() + " not defined on the iteration set");
      else {
        require(a.maps[0]->source() == loop.iterset, ErrorKind::MapSourceMismatch,
                "map " + a.maps[0]->name() + " source differs from iteration set");
        require(a.maps[0]->target() == a.dat->set(), ErrorKind::MapSourceMismatch,
                "map " + a.maps[0]->name() + " target differs from set of " + a.dat->name());
      }
    } else if (a.is_mat()) {
      require(a.access == Access::WRITE || a.access == Access::INC, ErrorKind::IllegalAccess,
              "Mats are write-only: only WRITE and INC are permitted");
      require(a.maps.size() == 2, ErrorKind::InvalidArgument,
              "Mat argument requires row and column maps");
      for (const auto& m : a.maps)
        require(m->source() == loop.iterset, ErrorKind::MapSourceMismatch,
                "map " + m->name() + " source differs from iteration set");
      require(a.maps[0]->target()->size() == a.mat->nrows() &&
                  a.maps[1]->target()->size() == a.mat->ncols(),
              ErrorKind::ShapeMismatch, "matrix shape does not match its maps");
    } else {
      require(a.access == Access::READ || a.access == Access::SUM || a.access == Access::MIN ||
                  a.access == Access::MAX,
              ErrorKind::IllegalAccess,
              std::string("access ") + access_name(a.access) + " not legal for Globals");
      require(a.maps.empty(), ErrorKind::InvalidArgument, "Global argument cannot carry a map");
    }
  }

  // An object written by one argument may not appear in any other argument:
  // staged semantics would otherwise depend on execution order.
  for (size_t i = 0; i < loop.args.size(); ++i)
    for (size_t j = i + 1; j < loop.args.size(); ++j)
      if (detail::underlying(loop.args[i]) == detail::underlying(loop.args[j]))
        require(!detail::writes(loop.args[i].access) && !detail::writes(loop.args[j].access),
                ErrorKind::IllegalAccess, "aliased argument is written by this parloop");

  const auto& params = loop.kernel->params();
  require(params.size() == loop.args.size(), ErrorKind::ShapeMismatch,
          "kernel parameter count does not match argument count");
  for (size_t k = 0; k < params.size(); ++k)
    require(params[k].extents == detail::staged_extents(loop.args[k]), ErrorKind::ShapeMismatch,
            "staged shape of argument " + std::to_string(k) + " does not match kernel parameter " +
                params[k].name);
}

namespace detail {

/// Colorings are cached per (iteration set, conflict-map tuple). The key owns
/// its set and maps, so object identity is stable for as long as the entry
/// lives: a recycled heap address can never alias a cached entry.
inline Coloring conflict_coloring(const SetPtr& iterset, std::vector<MapPtr> conflict_maps) {
  std::sort(conflict_maps.begin(), conflict_maps.end());
  conflict_maps.erase(std::unique(conflict_maps.begin(), conflict_maps.end()),
                      conflict_maps.end());
  using Key = std::pair<SetPtr, std::vector<MapPtr>>;
  Key key{iterset, conflict_maps};

  static std::map<Key, Coloring> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> guard(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  Coloring coloring = color_iteration(iterset, conflict_maps);
  cache.emplace(std::move(key), coloring);
  return coloring;
}

struct ArgPlan {
  size_t offset = 0; // into the per-entity staging scratch
  size_t size = 0;
  std::span<Real> out;            // mutable data of written Dats
  std::span<const Real> in;       // readable data of READ Dats / Globals
  const Map* map = nullptr;       // indirect Dats
  const Map* row_map = nullptr;   // Mats
  const Map* col_map = nullptr;
};

} // namespace detail

/// Executes the kernel once per iteration-set entity.
///
/// Entities are grouped by conflict coloring over the maps of INC-, RW- and
/// WRITE-accessed indirect arguments; colors run in ascending order and the
/// entities of one color are split into `threads` contiguous ascending chunks.
/// Within a color all scatter targets are disjoint, so neither the thread
/// count nor the chunk partition affects any floating-point result: outcomes
/// are bitwise identical for every `threads` value. Global contributions are
/// computed into per-entity slots and folded color-major, entity-ascending.
inline void execute(const Parloop& loop, int threads = 1) {
  require(threads >= 1, ErrorKind::InvalidArgument, "thread count must be positive");
  validate(loop);

  const int n = loop.iterset->size();
  const size_t nargs = loop.args.size();

  std::vector<detail::ArgPlan> plans(nargs);
  std::vector<MapPtr> conflict_maps;
  size_t scratch_size = 0;
  for (size_t k = 0; k < nargs; ++k) {
    const Arg& a = loop.args[k];
    auto& plan = plans[k];
    plan.offset = scratch_size;
    plan.size = detail::staged_size(a);
    scratch_size += plan.size;
    if (a.is_dat()) {
      if (detail::writes(a.access))
        plan.out = a.dat->mutable_view();
      else
        plan.in = a.dat->view();
      if (!a.direct()) {
        plan.map = a.maps[0].get();
        if (detail::writes(a.access)) conflict_maps.push_back(a.maps[0]);
      }
    } else if (a.is_mat()) {
      plan.row_map = a.maps[0].get();
      plan.col_map = a.maps[1].get();
      conflict_maps.push_back(a.maps[0]);
      conflict_maps.push_back(a.maps[1]);
    } else {
      plan.in = a.global->view();
    }
  }

  Coloring coloring;
  if (conflict_maps.empty()) {
    coloring.colors.assign(n, 0);
    coloring.num_colors = n > 0 ? 1 : 0;
  } else {
    coloring = detail::conflict_coloring(loop.iterset, conflict_maps);
  }

  std::vector<std::vector<int>> by_color(coloring.num_colors);
  for (int e = 0; e < n; ++e) by_color[coloring.colors[e]].push_back(e);

  // Per-entity slots for Global contributions, folded after each color.
  std::vector<size_t> global_args;
  for (size_t k = 0; k < nargs; ++k)
    if (loop.args[k].is_global() && loop.args[k].access != Access::READ) global_args.push_back(k);
  std::vector<size_t> global_offset(nargs, 0);
  size_t global_stride = 0;
  for (size_t k : global_args) {
    global_offset[k] = global_stride;
    global_stride += plans[k].size;
  }
  std::vector<Real> global_slots(static_cast<size_t>(n) * global_stride);
  std::vector<Real> global_acc;
  for (size_t k : global_args)
    for (size_t d = 0; d < plans[k].size; ++d)
      global_acc.push_back(reduction_identity(loop.args[k].access));

  auto process = [&](int entity, std::vector<Real>& scratch, std::vector<Real*>& ptrs) {
    for (size_t k = 0; k < nargs; ++k) {
      const Arg& a = loop.args[k];
      const auto& plan = plans[k];
      Real* stage = scratch.data() + plan.offset;
      ptrs[k] = stage;
      if (a.is_dat()) {
        const int dim = a.dat->dim();
        if (a.access == Access::WRITE || a.access == Access::INC) {
          std::fill(stage, stage + plan.size, 0.0);
        } else if (a.direct()) {
          const Real* src =
              (detail::writes(a.access) ? plan.out.data() : plan.in.data()) +
              static_cast<size_t>(entity) * dim;
          std::copy(src, src + dim, stage);
        } else {
          const Real* base = detail::writes(a.access) ? plan.out.data() : plan.in.data();
          const int* tuple = plan.map->row(entity);
          for (int t = 0; t < plan.map->arity(); ++t)
            std::copy(base + static_cast<size_t>(tuple[t]) * dim,
                      base + static_cast<size_t>(tuple[t] + 1) * dim, stage + t * dim);
        }
      } else if (a.is_mat()) {
        std::fill(stage, stage + plan.size, 0.0);
      } else {
        if (a.access == Access::READ)
          std::copy(plan.in.begin(), plan.in.end(), stage);
        else
          for (size_t d = 0; d < plan.size; ++d) stage[d] = reduction_identity(a.access);
      }
    }

    ir::invoke(*loop.kernel, {ptrs.data(), nargs});

    for (size_t k = 0; k < nargs; ++k) {
      const Arg& a = loop.args[k];
      const auto& plan = plans[k];
      Real* stage = scratch.data() + plan.offset;
      if (a.is_dat()) {
        if (!detail::writes(a.access)) continue;
        const int dim = a.dat->dim();
        if (a.direct()) {
          Real* dst = plan.out.data() + static_cast<size_t>(entity) * dim;
          if (a.access == Access::INC)
            for (int d = 0; d < dim; ++d) dst[d] += stage[d];
          else
            std::copy(stage, stage + dim, dst);
        } else {
          const int* tuple = plan.map->row(entity);
          for (int t = 0; t < plan.map->arity(); ++t) {
            Real* dst = plan.out.data() + static_cast<size_t>(tuple[t]) * dim;
            if (a.access == Access::INC)
              for (int d = 0; d < dim; ++d) dst[d] += stage[t * dim + d];
            else
              std::copy(stage + t * dim, stage + (t + 1) * dim, dst);
          }
        }
      } else if (a.is_mat()) {
        a.mat->addto({plan.row_map->row(entity), static_cast<size_t>(plan.row_map->arity())},
                     {plan.col_map->row(entity), static_cast<size_t>(plan.col_map->arity())},
                     {stage, plan.size}, a.access);
      } else if (a.access != Access::READ) {
        Real* slot = global_slots.data() + static_cast<size_t>(entity) * global_stride +
                     global_offset[k];
        std::copy(stage, stage + plan.size, slot);
      }
    }
  };

  for (const auto& color_entities : by_color) {
    const int m = static_cast<int>(color_entities.size());
    auto run_chunk = [&](int begin, int end, std::vector<Real>& scratch,
                         std::vector<Real*>& ptrs) {
      for (int i = begin; i < end; ++i) process(color_entities[i], scratch, ptrs);
    };

    if (threads == 1 || m < 2 * threads) {
      std::vector<Real> scratch(scratch_size);
      std::vector<Real*> ptrs(nargs);
      run_chunk(0, m, scratch, ptrs);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (int t = 0; t < threads; ++t) {
        int begin = static_cast<int>(static_cast<long>(m) * t / threads);
        int end = static_cast<int>(static_cast<long>(m) * (t + 1) / threads);
        pool.emplace_back([&, t, begin, end]() {
          try {
            std::vector<Real> scratch(scratch_size);
            std::vector<Real*> ptrs(nargs);
            run_chunk(begin, end, scratch, ptrs);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    }

    // Fold this color's Global contributions in ascending entity order.
    if (!global_args.empty()) {
      for (int e : color_entities) {
        size_t acc_base = 0;
        for (size_t k : global_args) {
          const Arg& a = loop.args[k];
          const Real* slot =
              global_slots.data() + static_cast<size_t>(e) * global_stride + global_offset[k];
          for (size_t d = 0; d < plans[k].size; ++d) {
            Real& acc = global_acc[acc_base + d];
            switch (a.access) {
            case Access::SUM: acc += slot[d]; break;
            case Access::MIN: acc = std::min(acc, slot[d]); break;
            default: acc = std::max(acc, slot[d]); break;
            }
          }
          acc_base += plans[k].size;
        }
      }
    }
  }

  if (!global_args.empty()) {
    size_t acc_base = 0;
    for (size_t k : global_args) {
      auto value = loop.args[k].global->mutable_view();
      for (size_t d = 0; d < plans[k].size; ++d) value[d] = global_acc[acc_base + d];
      acc_base += plans[k].size;
    }
  }
}

} // namespace loam
