#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "loam/topology.hpp"

namespace loam {

/// Declared character of a kernel's access to an argument.
/// Dats admit READ/WRITE/RW/INC, Globals READ/SUM/MIN/MAX, Mats WRITE/INC.
enum class Access { READ, WRITE, RW, INC, SUM, MIN, MAX };

inline const char* access_name(Access a) {
  switch (a) {
  case Access::READ: return "READ";
  case Access::WRITE: return "WRITE";
  case Access::RW: return "RW";
  case Access::INC: return "INC";
  case Access::SUM: return "SUM";
  case Access::MIN: return "MIN";
  case Access::MAX: return "MAX";
  }
  return "?";
}

/// A vector of values, dim per entity of the set it is defined over.
/// Mutable access is mediated so the engine can track modification: the
/// version counter increments on any mutable view.
class Dat {
public:
  Dat(SetPtr set, int dim, std::string name = "dat")
      : set_(std::move(set)), dim_(dim), name_(std::move(name)),
        data_(static_cast<size_t>(set_->size()) * dim, 0.0) {
    require(dim > 0, ErrorKind::InvalidArgument, "Dat dim must be positive");
  }

  const SetPtr& set() const { return set_; }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  std::uint64_t version() const { return version_; }

  std::span<const Real> view() const { return {data_.data(), data_.size()}; }
  std::span<Real> mutable_view() {
    ++version_;
    return {data_.data(), data_.size()};
  }

private:
  SetPtr set_;
  int dim_;
  std::string name_;
  std::vector<Real> data_;
  std::uint64_t version_ = 0;
};

using DatPtr = std::shared_ptr<Dat>;

inline DatPtr make_dat(SetPtr set, int dim, std::string name = "dat") {
  return std::make_shared<Dat>(std::move(set), dim, std::move(name));
}

/// A tuple of values not associated with any set; target of reductions.
class Global {
public:
  explicit Global(int dim, std::string name = "global")
      : dim_(dim), name_(std::move(name)), value_(dim, 0.0) {
    require(dim > 0, ErrorKind::InvalidArgument, "Global dim must be positive");
  }
  Global(std::initializer_list<Real> init, std::string name = "global")
      : dim_(static_cast<int>(init.size())), name_(std::move(name)), value_(init) {}

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  std::span<const Real> view() const { return {value_.data(), value_.size()}; }
  std::span<Real> mutable_view() { return {value_.data(), value_.size()}; }

private:
  int dim_;
  std::string name_;
  std::vector<Real> value_;
};

using GlobalPtr = std::shared_ptr<Global>;

inline GlobalPtr make_global(int dim, std::string name = "global") {
  return std::make_shared<Global>(dim, std::move(name));
}

/// Left fold of an ordered list of dim-tuples under SUM/MIN/MAX.
inline std::vector<Real> global_reduce(Access mode, std::span<const Real> partials, int dim = 1) {
  require(mode == Access::SUM || mode == Access::MIN || mode == Access::MAX,
          ErrorKind::IllegalAccess, "global_reduce mode must be SUM, MIN or MAX");
  require(dim > 0 && partials.size() % dim == 0, ErrorKind::DimensionMismatch,
          "partials length not a multiple of dim");
  require(!partials.empty(), ErrorKind::EmptyPartials, "global_reduce over no partials");
  std::vector<Real> acc(partials.begin(), partials.begin() + dim);
  for (size_t k = dim; k < partials.size(); k += dim)
    for (int d = 0; d < dim; ++d) {
      Real v = partials[k + d];
      switch (mode) {
      case Access::SUM: acc[d] += v; break;
      case Access::MIN: acc[d] = std::min(acc[d], v); break;
      default: acc[d] = std::max(acc[d], v); break;
      }
    }
  return acc;
}

/// CSR pattern: column indices strictly increasing within each row.
class Sparsity {
public:
  Sparsity(int nrows, int ncols, std::vector<long> row_offsets, std::vector<int> col_indices)
      : nrows_(nrows), ncols_(ncols), row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)) {}

  int nrows() const { return nrows_; }
  int ncols() const { return ncols_; }
  long nnz() const { return row_offsets_.back(); }
  const std::vector<long>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }

  /// Position of (row, col) in the values array, or -1 if outside the pattern.
  long find(int row, int col) const {
    if (row < 0 || row >= nrows_) return -1;
    auto first = col_indices_.begin() + row_offsets_[row];
    auto last = col_indices_.begin() + row_offsets_[row + 1];
    auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return -1;
    return it - col_indices_.begin();
  }

private:
  int nrows_, ncols_;
  std::vector<long> row_offsets_;
  std::vector<int> col_indices_;
};

using SparsityPtr = std::shared_ptr<const Sparsity>;

/// CSR pattern for the operator coupling row_map and col_map: the union over
/// all source entities of the dense block dofs(row_map(e)) x dofs(col_map(e)),
/// where dofs expands node n to [n*dim, (n+1)*dim).
inline SparsityPtr build_sparsity(const MapPtr& row_map, const MapPtr& col_map, int row_dim = 1,
                                  int col_dim = 1) {
  require(row_map->source() == col_map->source(), ErrorKind::SourceMismatch,
          "row and column maps must share their source set");
  const int nrows = row_map->target()->size() * row_dim;
  const int ncols = col_map->target()->size() * col_dim;

  std::vector<std::vector<int>> rows(nrows);
  for (int e = 0; e < row_map->source()->size(); ++e) {
    const int* rn = row_map->row(e);
    const int* cn = col_map->row(e);
    for (int a = 0; a < row_map->arity(); ++a)
      for (int rd = 0; rd < row_dim; ++rd) {
        auto& row = rows[rn[a] * row_dim + rd];
        for (int b = 0; b < col_map->arity(); ++b)
          for (int cd = 0; cd < col_dim; ++cd) row.push_back(cn[b] * col_dim + cd);
      }
  }

  std::vector<long> offsets(nrows + 1, 0);
  for (int r = 0; r < nrows; ++r) {
    auto& row = rows[r];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    offsets[r + 1] = offsets[r] + static_cast<long>(row.size());
  }
  std::vector<int> cols(offsets[nrows]);
  for (int r = 0; r < nrows; ++r)
    std::copy(rows[r].begin(), rows[r].end(), cols.begin() + offsets[r]);
  return std::make_shared<const Sparsity>(nrows, ncols, std::move(offsets), std::move(cols));
}

/// Sparse matrix over a fixed sparsity. Write-only from kernels; reads happen
/// through spmv and friends outside any parloop.
class Mat {
public:
  explicit Mat(SparsityPtr sparsity, std::string name = "mat")
      : sparsity_(std::move(sparsity)), name_(std::move(name)),
        values_(sparsity_->nnz(), 0.0) {}

  const SparsityPtr& sparsity() const { return sparsity_; }
  const std::string& name() const { return name_; }
  int nrows() const { return sparsity_->nrows(); }
  int ncols() const { return sparsity_->ncols(); }
  const std::vector<Real>& values() const { return values_; }
  std::vector<Real>& values() { return values_; }

  Real at(int row, int col) const {
    long pos = sparsity_->find(row, col);
    return pos < 0 ? 0.0 : values_[pos];
  }

  void zero() { std::fill(values_.begin(), values_.end(), 0.0); }

  /// Add (INC) or overwrite (WRITE) a dense local block at rows x cols.
  /// Every (row, col) pair must lie inside the sparsity.
  void addto(std::span<const int> rows, std::span<const int> cols, std::span<const Real> block,
             Access mode = Access::INC) {
    require(mode == Access::INC || mode == Access::WRITE, ErrorKind::IllegalAccess,
            "Mats are write-only: only WRITE and INC are permitted");
    require(block.size() == rows.size() * cols.size(), ErrorKind::ShapeMismatch,
            "block shape does not match rows x cols");
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t j = 0; j < cols.size(); ++j) {
        long pos = sparsity_->find(rows[i], cols[j]);
        require(pos >= 0, ErrorKind::OutsideSparsity,
                name_ + ": entry (" + std::to_string(rows[i]) + ", " + std::to_string(cols[j]) +
                    ") outside sparsity");
        if (mode == Access::INC)
          values_[pos] += block[i * cols.size() + j];
        else
          values_[pos] = block[i * cols.size() + j];
      }
  }

private:
  SparsityPtr sparsity_;
  std::string name_;
  std::vector<Real> values_;
};

using MatPtr = std::shared_ptr<Mat>;

inline MatPtr make_mat(SparsityPtr sparsity, std::string name = "mat") {
  return std::make_shared<Mat>(std::move(sparsity), std::move(name));
}

/// y = A x by CSR traversal, rows ascending, entries folded in column order.
inline std::vector<Real> mat_spmv(const Mat& mat, std::span<const Real> x) {
  require(static_cast<int>(x.size()) == mat.ncols(), ErrorKind::DimensionMismatch,
          "spmv operand length != matrix column count");
  const auto& sp = *mat.sparsity();
  std::vector<Real> y(sp.nrows(), 0.0);
  const auto& vals = mat.values();
  for (int r = 0; r < sp.nrows(); ++r) {
    Real acc = 0.0;
    for (long k = sp.row_offsets()[r]; k < sp.row_offsets()[r + 1]; ++k)
      acc += vals[k] * x[sp.col_indices()[k]];
    y[r] = acc;
  }
  return y;
}

inline Real reduction_identity(Access mode) {
  switch (mode) {
  case Access::SUM: return 0.0;
  case Access::MIN: return std::numeric_limits<Real>::infinity();
  case Access::MAX: return -std::numeric_limits<Real>::infinity();
  default: fail(ErrorKind::IllegalAccess, "no reduction identity for this access mode");
  }
}

} // namespace loam
