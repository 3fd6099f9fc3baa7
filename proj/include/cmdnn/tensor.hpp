// cmdnn/tensor.hpp

// Copyright 2026  The cmdnn authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CMDNN_TENSOR_HPP_
#define CMDNN_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cmdnn {

/// Dense double-precision array with an explicit shape. Storage is flat,
/// row-major (last axis fastest). All numeric modules build on this type;
/// it deliberately has no views, strides or broadcasting.
class Tensor {
 public:
  Tensor() = default;

  /// Zero-initialized tensor of the given shape. Every dimension must be
  /// positive.
  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(checked_size(shape_), 0.0) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != checked_size(shape_)) {
      std::ostringstream msg;
      msg << "Tensor: data length " << data_.size()
          << " does not match shape " << shape_string(shape_);
      throw std::invalid_argument(msg.str());
    }
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  static std::string shape_string(const std::vector<std::size_t>& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) os << ",";
      os << shape[i];
    }
    os << "]";
    return os.str();
  }
  std::string shape_string() const { return shape_string(shape_); }

 private:
  static std::size_t checked_size(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) {
        throw std::invalid_argument("Tensor: zero-sized dimension in shape " +
                                    shape_string(shape));
      }
      n *= d;
    }
    return n;
  }

  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// c[i,j] = sum_t a[i,t] * b[t,j]. Both operands must be rank-2 with equal
/// inner dimensions.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw std::invalid_argument("matmul: incompatible shapes " +
                                a.shape_string() + " x " + b.shape_string());
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  const double* pa = a.raw();
  const double* pb = b.raw();
  double* pc = c.raw();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < k; ++t) {
      const double av = pa[i * k + t];
      const double* brow = pb + t * n;
      double* crow = pc + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

/// Applies f to every element; shape is preserved.
template <class F>
Tensor elementwise_map(const Tensor& t, F f) {
  Tensor out = t;
  for (double& v : out.data()) v = f(v);
  return out;
}

struct GroupMax {
  Tensor values;                     // one entry per group
  std::vector<std::size_t> indices;  // offset of the first maximum per group
};

/// Splits a rank-1 tensor of length n into n/k consecutive groups and takes
/// the maximum of each. Ties resolve to the lowest in-group offset, which
/// keeps gradient routing deterministic.
inline GroupMax argmax_over_groups(const Tensor& t, std::size_t k) {
  if (t.rank() != 1) {
    throw std::invalid_argument("argmax_over_groups: expected rank-1 tensor, got " +
                                t.shape_string());
  }
  if (k < 1) throw std::invalid_argument("argmax_over_groups: group size must be >= 1");
  const std::size_t n = t.size();
  if (n % k != 0) {
    std::ostringstream msg;
    msg << "argmax_over_groups: length " << n << " not divisible by group size " << k;
    throw std::invalid_argument(msg.str());
  }
  const std::size_t groups = n / k;
  GroupMax out{Tensor({groups}), std::vector<std::size_t>(groups, 0)};
  for (std::size_t g = 0; g < groups; ++g) {
    std::size_t best = 0;
    double best_val = t[g * k];
    for (std::size_t j = 1; j < k; ++j) {
      const double v = t[g * k + j];
      if (v > best_val) {
        best_val = v;
        best = j;
      }
    }
    out.values[g] = best_val;
    out.indices[g] = best;
  }
  return out;
}

namespace io {

inline void write_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_i32_le(std::ostream& os, std::int32_t v) {
  write_u32_le(os, static_cast<std::uint32_t>(v));
}

inline void write_f64_le(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

[[noreturn]] inline void throw_truncated(const std::istream& is, const std::string& what) {
  std::ostringstream msg;
  msg << "truncated stream while reading " << what;
  // gcount/tellg are unreliable after a failed read; report what we know.
  msg << " (stream failed at byte offset "
      << static_cast<long long>(const_cast<std::istream&>(is).tellg()) << ")";
  throw std::runtime_error(msg.str());
}

inline std::uint32_t read_u32_le(std::istream& is, const char* what) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw_truncated(is, what);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::int32_t read_i32_le(std::istream& is, const char* what) {
  return static_cast<std::int32_t>(read_u32_le(is, what));
}

inline double read_f64_le(std::istream& is, const char* what) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw_truncated(is, what);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace io

/// Binary tensor layout: u32 rank, then rank u32 dims, then product(dims)
/// 64-bit floats, all little-endian. Weight snapshots and dataset files use
/// this format.
inline void write_tensor(std::ostream& os, const Tensor& t) {
  io::write_u32_le(os, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) io::write_u32_le(os, static_cast<std::uint32_t>(d));
  for (double v : t.data()) io::write_f64_le(os, v);
}

inline Tensor read_tensor(std::istream& is) {
  const std::uint32_t rank = io::read_u32_le(is, "tensor rank");
  if (rank > 8) {
    std::ostringstream msg;
    msg << "tensor header: implausible rank " << rank;
    throw std::runtime_error(msg.str());
  }
  std::vector<std::size_t> shape(rank);
  std::size_t total = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    shape[i] = io::read_u32_le(is, "tensor dims");
    if (shape[i] == 0) throw std::runtime_error("tensor header: zero dimension");
    total *= shape[i];
  }
  std::vector<double> data(total);
  for (std::size_t i = 0; i < total; ++i) data[i] = io::read_f64_le(is, "tensor payload");
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace cmdnn

#endif  // CMDNN_TENSOR_HPP_
