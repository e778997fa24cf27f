#include "regge/fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace regge::fields {

TensorJet TensorJet::zero(int dim) {
  TensorJet j;
  j.dim = dim;
  j.value = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) j.d1[k] = Mat::Zero(dim, dim);
  for (int k = 0; k < dim; ++k)
    for (int l = 0; l < dim; ++l) j.d2[k][l] = Mat::Zero(dim, dim);
  return j;
}

TensorJet operator+(const TensorJet& a, const TensorJet& b) {
  TensorJet r = a;
  r.value += b.value;
  for (int k = 0; k < a.dim; ++k) r.d1[k] += b.d1[k];
  for (int k = 0; k < a.dim; ++k)
    for (int l = 0; l < a.dim; ++l) r.d2[k][l] += b.d2[k][l];
  return r;
}

TensorJet operator-(const TensorJet& a, const TensorJet& b) {
  TensorJet r = a;
  r.value -= b.value;
  for (int k = 0; k < a.dim; ++k) r.d1[k] -= b.d1[k];
  for (int k = 0; k < a.dim; ++k)
    for (int l = 0; l < a.dim; ++l) r.d2[k][l] -= b.d2[k][l];
  return r;
}

TensorJet operator*(double s, const TensorJet& a) {
  TensorJet r = a;
  r.value *= s;
  for (int k = 0; k < a.dim; ++k) r.d1[k] *= s;
  for (int k = 0; k < a.dim; ++k)
    for (int l = 0; l < a.dim; ++l) r.d2[k][l] *= s;
  return r;
}

void Poly::compress() {
  std::map<std::array<int, 3>, double> acc;
  for (const auto& [e, c] : terms_) acc[e] += c;
  terms_.clear();
  for (const auto& [e, c] : acc)
    if (c != 0.0) terms_.push_back({e, c});
}

Poly Poly::constant(int dim, double c) {
  Poly p(dim);
  if (c != 0.0) p.terms_.push_back({{0, 0, 0}, c});
  return p;
}

Poly Poly::monomial(int dim, const std::array<int, 3>& exps, double coeff) {
  Poly p(dim);
  if (coeff != 0.0) p.terms_.push_back({exps, coeff});
  return p;
}

Poly Poly::one_minus_sq(int dim, int axis) {
  std::array<int, 3> e{0, 0, 0};
  e[axis] = 2;
  return constant(dim, 1.0) - monomial(dim, e, 1.0);
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  r.compress();
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + o * -1.0; }

Poly Poly::operator*(const Poly& o) const {
  Poly r(dim_);
  for (const auto& [ea, ca] : terms_)
    for (const auto& [eb, cb] : o.terms_) {
      std::array<int, 3> e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]};
      r.terms_.push_back({e, ca * cb});
    }
  r.compress();
  return r;
}

Poly Poly::operator*(double s) const {
  Poly r = *this;
  for (auto& [e, c] : r.terms_) c *= s;
  return r;
}

Poly Poly::derivative(int axis) const {
  Poly r(dim_);
  for (const auto& [e, c] : terms_) {
    if (e[axis] == 0) continue;
    std::array<int, 3> d = e;
    d[axis] -= 1;
    r.terms_.push_back({d, c * e[axis]});
  }
  r.compress();
  return r;
}

double Poly::eval(const Vec& x) const {
  double v = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (int a = 0; a < dim_; ++a)
      for (int p = 0; p < e[a]; ++p) t *= x(a);
    v += t;
  }
  return v;
}

ScalarJet Poly::jet(const Vec& x) const {
  ScalarJet j;
  j.grad = Vec::Zero(dim_);
  j.hess = Mat::Zero(dim_, dim_);
  auto pw = [&](int a, int p) {
    if (p < 0) return 0.0;
    double v = 1.0;
    for (int k = 0; k < p; ++k) v *= x(a);
    return v;
  };
  for (const auto& [e, c] : terms_) {
    double full = c;
    for (int a = 0; a < dim_; ++a) full *= pw(a, e[a]);
    j.value += full;
    for (int a = 0; a < dim_; ++a) {
      if (e[a] == 0) continue;
      double t = c * e[a];
      for (int b = 0; b < dim_; ++b) t *= pw(b, b == a ? e[b] - 1 : e[b]);
      j.grad(a) += t;
    }
    for (int a = 0; a < dim_; ++a)
      for (int b = a; b < dim_; ++b) {
        double t;
        if (a == b) {
          if (e[a] < 2) continue;
          t = c * e[a] * (e[a] - 1);
          for (int k = 0; k < dim_; ++k) t *= pw(k, k == a ? e[k] - 2 : e[k]);
        } else {
          if (e[a] == 0 || e[b] == 0) continue;
          t = c * e[a] * e[b];
          for (int k = 0; k < dim_; ++k) t *= pw(k, (k == a || k == b) ? e[k] - 1 : e[k]);
        }
        j.hess(a, b) += t;
        if (a != b) j.hess(b, a) += t;
      }
  }
  return j;
}

PolyTensorField::PolyTensorField(int dim, std::vector<Poly> upper) : dim_(dim), upper_(std::move(upper)) {
  require(static_cast<int>(upper_.size()) == dim * (dim + 1) / 2,
          "PolyTensorField: wrong number of components");
}

PolyTensorField PolyTensorField::constant(const Mat& value) {
  const int dim = static_cast<int>(value.rows());
  std::vector<Poly> upper;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) upper.push_back(Poly::constant(dim, value(i, j)));
  return PolyTensorField(dim, std::move(upper));
}

TensorJet PolyTensorField::jet(const Vec& x) const {
  TensorJet out = TensorJet::zero(dim_);
  int idx = 0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j, ++idx) {
      ScalarJet s = upper_[idx].jet(x);
      out.value(i, j) = s.value;
      out.value(j, i) = s.value;
      for (int k = 0; k < dim_; ++k) {
        out.d1[k](i, j) = s.grad(k);
        out.d1[k](j, i) = s.grad(k);
      }
      for (int k = 0; k < dim_; ++k)
        for (int l = 0; l < dim_; ++l) {
          out.d2[k][l](i, j) = s.hess(k, l);
          out.d2[k][l](j, i) = s.hess(k, l);
        }
    }
  return out;
}

Poly bump_squared(int dim) {
  Poly b = Poly::constant(dim, 1.0);
  for (int a = 0; a < dim; ++a) {
    Poly f = Poly::one_minus_sq(dim, a);
    b = b * f * f;
  }
  return b;
}

void validate_support(const TestField& f) {
  if (!f.flags.compactly_supported) return;
  const int dim = f.field->dim();
  const double eps = 1e-5;
  double worst = 0.0;
  // sample each box face on a coarse lattice; check value and an FD proxy
  // for the normal derivative
  const int n = 5;
  for (int axis = 0; axis < dim; ++axis)
    for (int side = -1; side <= 1; side += 2)
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= (dim == 3 ? n : 0); ++j) {
          Vec x = Vec::Zero(dim);
          x(axis) = side;
          x((axis + 1) % dim) = -1.0 + 2.0 * i / n;
          if (dim == 3) x((axis + 2) % dim) = -1.0 + 2.0 * j / n;
          TensorJet jet = f.field->jet(x);
          worst = std::max(worst, jet.value.cwiseAbs().maxCoeff());
          for (int k = 0; k < dim; ++k) worst = std::max(worst, jet.d1[k].cwiseAbs().maxCoeff());
          (void)eps;
        }
  require(worst <= 1e-13,
          "TestField: claimed compact support but boundary magnitude is " + std::to_string(worst));
}

TestField make_bump_test_field(int dim, int index) {
  Poly b = bump_squared(dim);
  const int ncomp = dim * (dim + 1) / 2;
  std::vector<Poly> upper;
  for (int c = 0; c < ncomp; ++c) {
    // low-order polynomial factor, deterministic in (index, component)
    Poly m = Poly::constant(dim, 0.2 + rng_uniform_sym(1234, index * 97 + c));
    for (int a = 0; a < dim; ++a) {
      std::array<int, 3> e{0, 0, 0};
      e[a] = 1;
      m = m + Poly::monomial(dim, e, 0.5 * rng_uniform_sym(5678, index * 131 + 7 * c + a));
    }
    upper.push_back(b * m);
  }
  TestField f;
  f.field = std::make_shared<PolyTensorField>(dim, std::move(upper));
  f.flags.compactly_supported = true;
  return f;
}

TestField make_smooth_test_field(int dim, std::uint64_t seed) {
  const int ncomp = dim * (dim + 1) / 2;
  std::vector<Poly> upper;
  for (int c = 0; c < ncomp; ++c) {
    Poly m = Poly::constant(dim, rng_uniform_sym(seed, 11 + c));
    int counter = 100 + 17 * c;
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b) {
        std::array<int, 3> e{0, 0, 0};
        e[a] += 1;
        e[b] += 1;
        m = m + Poly::monomial(dim, e, 0.4 * rng_uniform_sym(seed, counter++));
      }
    for (int a = 0; a < dim; ++a) {
      std::array<int, 3> e{0, 0, 0};
      e[a] = 1;
      m = m + Poly::monomial(dim, e, 0.6 * rng_uniform_sym(seed, counter++));
    }
    upper.push_back(m);
  }
  TestField f;
  f.field = std::make_shared<PolyTensorField>(dim, std::move(upper));
  return f;
}

std::shared_ptr<const ScalarField> make_smooth_scalar_field(int dim, std::uint64_t seed) {
  Poly p = Poly::constant(dim, 0.3 + rng_uniform_sym(seed, 1));
  int counter = 10;
  for (int a = 0; a < dim; ++a) {
    std::array<int, 3> e{0, 0, 0};
    e[a] = 1;
    p = p + Poly::monomial(dim, e, 0.5 * rng_uniform_sym(seed, counter++));
    e[a] = 2;
    p = p + Poly::monomial(dim, e, 0.25 * rng_uniform_sym(seed, counter++));
  }
  return std::make_shared<PolyScalarField>(p);
}

}  // namespace regge::fields
