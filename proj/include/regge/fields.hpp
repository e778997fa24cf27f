#pragma once

#include "regge/core.hpp"

#include <array>
#include <memory>
#include <vector>

namespace regge::fields {

struct ScalarJet {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

/// Value, first and second Euclidean partials of a symmetric matrix field.
/// d2[k][l] = d^2 value / dx_k dx_l (symmetric in k,l).
struct TensorJet {
  int dim = 0;
  Mat value;
  std::array<Mat, 3> d1;
  std::array<std::array<Mat, 3>, 3> d2;

  static TensorJet zero(int dim);
};

TensorJet operator+(const TensorJet& a, const TensorJet& b);
TensorJet operator-(const TensorJet& a, const TensorJet& b);
TensorJet operator*(double s, const TensorJet& a);

/// Dense multivariate polynomial with exact differentiation; utility for
/// analytic test data.
class Poly {
 public:
  Poly() = default;
  explicit Poly(int dim) : dim_(dim) {}
  static Poly constant(int dim, double c);
  static Poly monomial(int dim, const std::array<int, 3>& exps, double coeff);
  /// 1 - x_axis^2 on (-1,1), the elementary bump factor.
  static Poly one_minus_sq(int dim, int axis);

  int dim() const { return dim_; }
  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(double s) const;
  Poly derivative(int axis) const;

  double eval(const Vec& x) const;
  ScalarJet jet(const Vec& x) const;

 private:
  int dim_ = 0;
  std::vector<std::pair<std::array<int, 3>, double>> terms_;
  void compress();
};

class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual int dim() const = 0;
  virtual ScalarJet jet(const Vec& x) const = 0;
  double value(const Vec& x) const { return jet(x).value; }
};

/// Analytic symmetric (0,2)-tensor field with exact jets.
class TensorField {
 public:
  virtual ~TensorField() = default;
  virtual int dim() const = 0;
  virtual TensorJet jet(const Vec& x) const = 0;
  Mat value(const Vec& x) const { return jet(x).value; }
};

class PolyScalarField : public ScalarField {
 public:
  explicit PolyScalarField(Poly p) : p_(std::move(p)) {}
  int dim() const override { return p_.dim(); }
  ScalarJet jet(const Vec& x) const override { return p_.jet(x); }

 private:
  Poly p_;
};

/// Symmetric matrix of polynomials; only the upper triangle is stored.
class PolyTensorField : public TensorField {
 public:
  PolyTensorField(int dim, std::vector<Poly> upper);
  static PolyTensorField constant(const Mat& value);
  int dim() const override { return dim_; }
  TensorJet jet(const Vec& x) const override;

 private:
  int dim_;
  std::vector<Poly> upper_;  // (0,0),(0,1),...,(1,1),... row-major upper
};

/// B(x) = prod_i (1 - x_i^2)^2: vanishes on the boundary of (-1,1)^dim
/// together with its first derivatives.
Poly bump_squared(int dim);

struct TestFieldFlags {
  bool compactly_supported = false;
  bool scalar_times_metric = false;
};

/// Test field: analytic tensor field plus support flags. When the field
/// claims compact support, `validate_support` samples the box boundary and
/// rejects magnitudes above 1e-13.
struct TestField {
  std::shared_ptr<const TensorField> field;
  TestFieldFlags flags;
};

void validate_support(const TestField& f);

/// Deterministic catalog of compactly supported fields: bump^2 times
/// low-order polynomial symmetric matrices. `index` selects the member.
TestField make_bump_test_field(int dim, int index);

/// Deterministic pseudo-random smooth (not compactly supported) field.
TestField make_smooth_test_field(int dim, std::uint64_t seed);

/// Deterministic smooth scalar field (polynomial, low order).
std::shared_ptr<const ScalarField> make_smooth_scalar_field(int dim, std::uint64_t seed);

}  // namespace regge::fields
