#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "hnls/common.hpp"
#include "hnls/multi_index.hpp"

namespace hnls {

/// Complex coefficient vector over the graded-lex modes with |l| <= L.
/// Immutable-by-convention value type: operations return new fields.
class SpectralField {
 public:
  SpectralField(int dim, int max_level)
      : table_(ModeTable::get(dim, max_level)), coeffs_(table_->size()) {}

  SpectralField(int dim, int max_level, std::vector<cplx> coeffs)
      : table_(ModeTable::get(dim, max_level)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != table_->size())
      throw std::invalid_argument("SpectralField: coefficient count mismatch");
  }

  static SpectralField unit(int dim, int max_level, std::size_t flat) {
    SpectralField f(dim, max_level);
    f.coeffs_.at(flat) = 1.0;
    return f;
  }

  int dim() const { return table_->dim(); }
  int max_level() const { return table_->max_level(); }
  std::size_t size() const { return coeffs_.size(); }
  const ModeTable& modes() const { return *table_; }

  cplx& operator[](std::size_t i) { return coeffs_[i]; }
  const cplx& operator[](std::size_t i) const { return coeffs_[i]; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  std::vector<cplx>& coeffs() { return coeffs_; }

  double l2_norm() const {
    double s = 0.0;
    for (const auto& c : coeffs_) s += std::norm(c);
    return std::sqrt(s);
  }

  /// ||H^{s/2} u||_{L^2} = (sum lambda^s |c|^2)^{1/2}.
  double sobolev_norm(double s) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      acc += std::pow(static_cast<double>(table_->lambda(i)), s) * std::norm(coeffs_[i]);
    return std::sqrt(acc);
  }

  /// Exact linear flow e^{-itH}: c_l -> e^{-i lambda_l t} c_l.
  SpectralField propagated(double t) const {
    SpectralField out(*this);
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
      out.coeffs_[i] *= std::polar(1.0, -static_cast<double>(table_->lambda(i)) * t);
    return out;
  }

  SpectralField& operator+=(const SpectralField& o) {
    require_compatible(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_compatible(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
  }
  SpectralField& operator*=(cplx a) {
    for (auto& c : coeffs_) c *= a;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(cplx a, SpectralField f) { return f *= a; }

  bool all_finite() const {
    for (const auto& c : coeffs_)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
  }

 private:
  void require_compatible(const SpectralField& o) const {
    if (dim() != o.dim() || max_level() != o.max_level())
      throw std::invalid_argument("SpectralField: shape mismatch");
  }

  std::shared_ptr<const ModeTable> table_;
  std::vector<cplx> coeffs_;
};

inline double l2_distance(const SpectralField& a, const SpectralField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace hnls
