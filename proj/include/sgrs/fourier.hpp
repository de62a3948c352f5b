#ifndef SGRS_FOURIER_HPP
#define SGRS_FOURIER_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "sgrs/error.hpp"
#include "sgrs/state.hpp"

namespace sgrs {

/// Full Fourier cosine basis of a given order over [0, 1]^d: one feature
/// cos(pi * c . x) for every integer vector c in {0..order}^d. Coefficient
/// vectors are enumerated by counting in base order+1 with dimension 0 as the
/// least significant digit, so feature 0 is the constant c = 0.
class FourierBasis {
 public:
  FourierBasis(std::size_t order, std::size_t dim) : order_(order), dim_(dim) {
    if (dim == 0) throw ConfigError("FourierBasis: input dimension must be positive");
    std::size_t count = 1;
    for (std::size_t k = 0; k < dim; ++k) count *= order + 1;
    coefficients_.resize(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
      std::size_t rest = i;
      for (std::size_t k = 0; k < dim; ++k) {
        coefficients_[i * dim + k] = static_cast<double>(rest % (order + 1));
        rest /= order + 1;
      }
    }
  }

  std::size_t order() const noexcept { return order_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return coefficients_.size() / dim_; }

  std::span<const double> coefficients(std::size_t i) const { return {coefficients_.data() + i * dim_, dim_}; }

  void evaluate(std::span<const double> x, std::span<double> out) const {
    if (x.size() != dim_) throw DomainError("FourierBasis: input has wrong dimension");
    for (std::size_t k = 0; k < dim_; ++k)
      if (!(x[k] >= 0.0 && x[k] <= 1.0))
        throw DomainError("FourierBasis: input component " + std::to_string(k) + " outside [0, 1]");
    if (out.size() != size()) throw DomainError("FourierBasis: output has wrong size");
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double* c = coefficients_.data() + i * dim_;
      double arg = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) arg += c[k] * x[k];
      out[i] = std::cos(std::numbers::pi * arg);
    }
  }

  std::vector<double> evaluate(std::span<const double> x) const {
    std::vector<double> out(size());
    evaluate(x, out);
    return out;
  }

 private:
  std::size_t order_;
  std::size_t dim_;
  std::vector<double> coefficients_;
};

inline std::vector<double> fourier_features(std::span<const double> x, const FourierBasis& basis) {
  return basis.evaluate(x);
}

/// Affine map of each bounded component onto [0, 1].
inline std::vector<double> normalize(std::span<const double> values, std::span<const Bounds> bounds) {
  if (values.size() != bounds.size()) throw DomainError("normalize: bounds dimension mismatch");
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const Bounds b = bounds[k];
    if (!(b.upper > b.lower)) throw DomainError("normalize: empty bounds");
    if (!(values[k] >= b.lower && values[k] <= b.upper))
      throw DomainError("normalize: component " + std::to_string(k) + " outside its bounds");
    out[k] = (values[k] - b.lower) / (b.upper - b.lower);
  }
  return out;
}

}  // namespace sgrs

#endif  // SGRS_FOURIER_HPP
