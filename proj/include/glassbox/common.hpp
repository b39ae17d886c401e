#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace glassbox {

// Error taxonomy. Everything user-facing derives from Error so the CLI can
// map failures onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad call arguments: dimension mismatches, out-of-range parameters,
// unknown columns, schema mismatches.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input files (CSV cells, headers, schema documents).
class IngestionError : public Error {
 public:
  using Error::Error;
};

// A learner could not produce a model from the given data.
class FitError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for this task or model family.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A metric whose denominator group is empty.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent deterministic stream: one (seed, stream) pair per job so
// parallel and serial runs draw identical values.
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed270b7a4aa821ULL)));
}

inline std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Dense row-major matrix. Small on purpose: every dataset in this toolkit
// is desk scale and the learners only need row access and dot products.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values.data() + r * cols, cols);
  }

  std::vector<double> row_vector(std::size_t r) const {
    return std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(r * cols),
                               values.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols));
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace glassbox
