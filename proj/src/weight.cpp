#include "soliton/weight.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "soliton/errors.hpp"
#include "soliton/integrate.hpp"

namespace soliton {

struct Weight::Data {
  Kind kind = Kind::Constant;
  double c = 1.0;  // Constant value or Scaled factor
  Eigen::VectorXd tau;
  Eigen::VectorXd xi;
  AffineFn ell;
  double p = 0.0;
  double big_n = 0.0;
  std::shared_ptr<const Weight> inner;
};

Weight::Weight(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

Weight Weight::constant(double c) {
  if (!(c > 0)) throw std::invalid_argument("constant weight must be > 0");
  auto d = std::make_shared<Data>();
  d->kind = Kind::Constant;
  d->c = c;
  return Weight(std::move(d));
}

Weight Weight::exp_linear(Eigen::VectorXd tau) {
  auto d = std::make_shared<Data>();
  d->kind = Kind::ExpLinear;
  d->tau = std::move(tau);
  return Weight(std::move(d));
}

Weight Weight::pow_affine(AffineFn ell, double p) {
  auto d = std::make_shared<Data>();
  d->kind = Kind::PowAffine;
  d->ell = std::move(ell);
  d->p = p;
  return Weight(std::move(d));
}

Weight Weight::tkrs(Eigen::VectorXd xi, Eigen::VectorXd tau, double p) {
  if (xi.size() != tau.size()) {
    throw std::invalid_argument("tkrs weight needs xi and tau of equal size");
  }
  auto d = std::make_shared<Data>();
  d->kind = Kind::TKRS;
  d->xi = std::move(xi);
  d->tau = std::move(tau);
  d->p = p;
  return Weight(std::move(d));
}

Weight Weight::qn(Eigen::VectorXd xi, double big_n) {
  if (!(big_n > 1)) throw std::invalid_argument("qn weight needs N > 1");
  auto d = std::make_shared<Data>();
  d->kind = Kind::QN;
  d->xi = std::move(xi);
  d->big_n = big_n;
  return Weight(std::move(d));
}

Weight Weight::scaled(double lambda, Weight inner) {
  if (!(lambda > 0)) throw std::invalid_argument("scale factor must be > 0");
  auto d = std::make_shared<Data>();
  d->kind = Kind::Scaled;
  d->c = lambda;
  d->inner = std::make_shared<Weight>(std::move(inner));
  return Weight(std::move(d));
}

Weight::Kind Weight::kind() const { return data_->kind; }

namespace {

double positive_or_throw(double t, const char* what) {
  if (!(t > 0)) {
    throw DomainViolationError(std::string(what) +
                               " is not positive at the evaluation point");
  }
  return t;
}

}  // namespace

double Weight::log_value(const Eigen::VectorXd& x) const {
  const Data& d = *data_;
  switch (d.kind) {
    case Kind::Constant:
      return std::log(d.c);
    case Kind::ExpLinear:
      return d.tau.dot(x);
    case Kind::PowAffine:
      return d.p * std::log(positive_or_throw(d.ell(x), "affine factor"));
    case Kind::TKRS: {
      const double ell = positive_or_throw(d.xi.dot(x) + 1.0, "l_xi");
      return d.tau.dot(x) / ell + d.p * std::log(ell);
    }
    case Kind::QN: {
      const double u = x.dot(d.xi) / d.big_n;
      positive_or_throw(1.0 - u, "1 - <x,xi>/N");
      return -d.big_n * std::log1p(-u);
    }
    case Kind::Scaled:
      return std::log(d.c) + d.inner->log_value(x);
  }
  return 0.0;
}

double Weight::operator()(const Eigen::VectorXd& x) const {
  return std::exp(log_value(x));
}

Eigen::VectorXd Weight::gradient(const Eigen::VectorXd& x) const {
  const Data& d = *data_;
  switch (d.kind) {
    case Kind::Constant:
      return Eigen::VectorXd::Zero(x.size());
    case Kind::ExpLinear:
      return (*this)(x)*d.tau;
    case Kind::PowAffine: {
      const double t = positive_or_throw(d.ell(x), "affine factor");
      return d.p * std::pow(t, d.p - 1.0) * d.ell.slope;
    }
    case Kind::TKRS: {
      const double ell = positive_or_throw(d.xi.dot(x) + 1.0, "l_xi");
      const Eigen::VectorXd glog = d.tau / ell -
                                   (d.tau.dot(x) / (ell * ell)) * d.xi +
                                   (d.p / ell) * d.xi;
      return (*this)(x)*glog;
    }
    case Kind::QN: {
      const double ell =
          positive_or_throw(1.0 - x.dot(d.xi) / d.big_n, "1 - <x,xi>/N");
      return (*this)(x) / ell * d.xi;
    }
    case Kind::Scaled:
      return d.c * d.inner->gradient(x);
  }
  return Eigen::VectorXd::Zero(x.size());
}

Eigen::MatrixXd Weight::hessian(const Eigen::VectorXd& x) const {
  const Data& d = *data_;
  const Eigen::Index n = x.size();
  switch (d.kind) {
    case Kind::Constant:
      return Eigen::MatrixXd::Zero(n, n);
    case Kind::ExpLinear:
      return (*this)(x)*d.tau * d.tau.transpose();
    case Kind::PowAffine: {
      const double t = positive_or_throw(d.ell(x), "affine factor");
      return d.p * (d.p - 1.0) * std::pow(t, d.p - 2.0) * d.ell.slope *
             d.ell.slope.transpose();
    }
    case Kind::TKRS: {
      const double ell = positive_or_throw(d.xi.dot(x) + 1.0, "l_xi");
      const double tx = d.tau.dot(x);
      const Eigen::VectorXd glog =
          d.tau / ell - (tx / (ell * ell)) * d.xi + (d.p / ell) * d.xi;
      Eigen::MatrixXd hlog =
          -(d.tau * d.xi.transpose() + d.xi * d.tau.transpose()) / (ell * ell);
      hlog += (2.0 * tx / (ell * ell * ell)) * d.xi * d.xi.transpose();
      hlog -= (d.p / (ell * ell)) * d.xi * d.xi.transpose();
      return (*this)(x) * (glog * glog.transpose() + hlog);
    }
    case Kind::QN: {
      const double ell =
          positive_or_throw(1.0 - x.dot(d.xi) / d.big_n, "1 - <x,xi>/N");
      return (*this)(x) * (1.0 + 1.0 / d.big_n) / (ell * ell) * d.xi *
             d.xi.transpose();
    }
    case Kind::Scaled:
      return d.c * d.inner->hessian(x);
  }
  return Eigen::MatrixXd::Zero(n, n);
}

void Weight::validate_on(const Polytope& p) const {
  const Data& d = *data_;
  const auto& vm = p.vertex_matrix();
  auto check_affine_positive = [&](const Eigen::VectorXd& slope,
                                   double constant, const char* what) {
    for (Eigen::Index j = 0; j < vm.cols(); ++j) {
      if (!(slope.dot(vm.col(j)) + constant > 0)) {
        throw DomainViolationError(
            std::string(what) + " is not strictly positive on the polytope");
      }
    }
  };
  switch (d.kind) {
    case Kind::Constant:
    case Kind::ExpLinear:
      return;
    case Kind::PowAffine:
      check_affine_positive(d.ell.slope, d.ell.constant, "affine factor");
      return;
    case Kind::TKRS:
      check_affine_positive(d.xi, 1.0, "l_xi");
      return;
    case Kind::QN:
      check_affine_positive(-d.xi / d.big_n, 1.0, "1 - <x,xi>/N");
      return;
    case Kind::Scaled:
      d.inner->validate_on(p);
      return;
  }
}

bool Weight::vertex_extremal() const {
  switch (data_->kind) {
    case Kind::Constant:
    case Kind::ExpLinear:
    case Kind::PowAffine:
    case Kind::QN:
      return true;
    case Kind::TKRS:
      return false;
    case Kind::Scaled:
      return data_->inner->vertex_extremal();
  }
  return false;
}

namespace {

[[noreturn]] void wrong_kind(const char* what) {
  throw std::logic_error(std::string("weight accessor mismatch: ") + what);
}

}  // namespace

double Weight::constant_value() const {
  if (data_->kind != Kind::Constant) wrong_kind("constant_value");
  return data_->c;
}
const Eigen::VectorXd& Weight::tau() const {
  if (data_->kind != Kind::ExpLinear && data_->kind != Kind::TKRS) {
    wrong_kind("tau");
  }
  return data_->tau;
}
const Eigen::VectorXd& Weight::xi() const {
  if (data_->kind != Kind::TKRS && data_->kind != Kind::QN) wrong_kind("xi");
  return data_->xi;
}
const AffineFn& Weight::affine() const {
  if (data_->kind != Kind::PowAffine) wrong_kind("affine");
  return data_->ell;
}
double Weight::exponent() const {
  if (data_->kind != Kind::PowAffine && data_->kind != Kind::TKRS) {
    wrong_kind("exponent");
  }
  return data_->p;
}
double Weight::big_n() const {
  if (data_->kind != Kind::QN) wrong_kind("big_n");
  return data_->big_n;
}
double Weight::scale() const {
  if (data_->kind != Kind::Scaled) wrong_kind("scale");
  return data_->c;
}
const Weight& Weight::inner() const {
  if (data_->kind != Kind::Scaled) wrong_kind("inner");
  return *data_->inner;
}

std::string Weight::describe() const {
  std::ostringstream os;
  auto vec = [&](const Eigen::VectorXd& v) {
    os << "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "]";
  };
  const Data& d = *data_;
  switch (d.kind) {
    case Kind::Constant:
      os << "const(" << d.c << ")";
      break;
    case Kind::ExpLinear:
      os << "exp_linear(tau=";
      vec(d.tau);
      os << ")";
      break;
    case Kind::PowAffine:
      os << "pow_affine(xi=";
      vec(d.ell.slope);
      os << ",c=" << d.ell.constant << ",p=" << d.p << ")";
      break;
    case Kind::TKRS:
      os << "tkrs(xi=";
      vec(d.xi);
      os << ",tau=";
      vec(d.tau);
      os << ",p=" << d.p << ")";
      break;
    case Kind::QN:
      os << "qn(xi=";
      vec(d.xi);
      os << ",N=" << d.big_n << ")";
      break;
    case Kind::Scaled:
      os << d.c << "*" << d.inner->describe();
      break;
  }
  return os.str();
}

NormalizedWeight normalize(const Weight& v, const Polytope& p,
                           const IntegrationConfig& cfg) {
  v.validate_on(p);
  MomentData m = integrate_weight(p, v, 0, cfg);
  if (!m.tolerance_met) {
    throw IntegrationFailureError(
        "normalization integral did not reach the requested tolerance");
  }
  if (!(m.mass > 0) || !std::isfinite(m.mass)) {
    throw IntegrationFailureError("weight mass is not positive and finite");
  }
  return NormalizedWeight{v, m.mass};
}

namespace {

struct ScalarField {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
};

struct FacetMatrix {
  Eigen::MatrixXd normals;  // #facets x n
  Eigen::VectorXd offsets;

  explicit FacetMatrix(const Polytope& p) {
    const auto& fs = p.facets();
    normals.resize(static_cast<Eigen::Index>(fs.size()), p.dim());
    offsets.resize(static_cast<Eigen::Index>(fs.size()));
    for (std::size_t i = 0; i < fs.size(); ++i) {
      offsets[static_cast<Eigen::Index>(i)] = to_double(fs[i].offset);
      for (int k = 0; k < p.dim(); ++k) {
        normals(static_cast<Eigen::Index>(i), k) =
            to_double(fs[i].normal[static_cast<std::size_t>(k)]);
      }
    }
  }

  bool inside(const Eigen::VectorXd& x, double slack) const {
    return ((normals * x + offsets).array() >= -slack).all();
  }
};

// Newton polish of a smooth field restricted to anchor + span(basis),
// iterates kept inside P. The field need not be convex away from the
// minimum, so the Hessian is lifted to positive definite.
std::pair<double, Eigen::VectorXd> polish(const FacetMatrix& fm,
                                          const ScalarField& f,
                                          Eigen::VectorXd x,
                                          const Eigen::MatrixXd& basis) {
  double fx = f.value(x);
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::VectorXd g = basis.transpose() * f.gradient(x);
    if (g.norm() < 1e-14 * (1.0 + std::abs(fx))) break;
    Eigen::MatrixXd h = basis.transpose() * f.hessian(x) * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const double lift =
        std::max(0.0, -es.eigenvalues().minCoeff()) + 1e-10 * (1.0 + h.norm());
    h += lift * Eigen::MatrixXd::Identity(h.rows(), h.cols());
    Eigen::VectorXd d = basis * h.ldlt().solve(-g);
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Eigen::VectorXd y = x + step * d;
      if (fm.inside(y, 1e-12)) {
        double fy = f.value(y);
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          moved = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return {fx, x};
}

// Deterministic seed points: a box grid restricted to P, the vertices, and
// barycentric samples of every facet. Grid resolution follows
// 10^max(4-n, 1) points per dimension, capped to keep the total bounded.
std::vector<Eigen::VectorXd> seed_points(const Polytope& p,
                                         const FacetMatrix& fm) {
  const int n = p.dim();
  std::vector<Eigen::VectorXd> pts;
  const auto [lo, hi] = p.bounding_box();

  long per_dim = static_cast<long>(std::pow(10.0, std::max(1, 4 - n)));
  while (std::pow(static_cast<double>(per_dim), n) > 2e5 && per_dim > 3) {
    --per_dim;
  }

  std::vector<long> digit(static_cast<std::size_t>(n), 0);
  while (true) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) {
      const double t =
          (static_cast<double>(digit[static_cast<std::size_t>(i)]) + 0.5) /
          static_cast<double>(per_dim);
      x[i] = lo[i] + t * (hi[i] - lo[i]);
    }
    if (fm.inside(x, 0.0)) pts.push_back(std::move(x));
    int carry = 0;
    while (carry < n) {
      if (++digit[static_cast<std::size_t>(carry)] < per_dim) break;
      digit[static_cast<std::size_t>(carry)] = 0;
      ++carry;
    }
    if (carry == n) break;
  }

  const auto& vm = p.vertex_matrix();
  for (Eigen::Index j = 0; j < vm.cols(); ++j) pts.push_back(vm.col(j));

  // Facet interiors: fixed-seed convex combinations of the tight vertices.
  std::mt19937_64 rng(0x5eedu);
  std::exponential_distribution<double> expd(1.0);
  for (std::size_t f = 0; f < p.facets().size(); ++f) {
    std::vector<Eigen::Index> tight;
    for (std::size_t j = 0; j < p.vertices().size(); ++j) {
      if (p.facet_value(f, p.vertices()[j]) == 0) {
        tight.push_back(static_cast<Eigen::Index>(j));
      }
    }
    if (tight.size() < 2) continue;
    for (int s = 0; s < 40 * n; ++s) {
      double sum = 0;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (Eigen::Index id : tight) {
        const double w = expd(rng);
        sum += w;
        x += w * vm.col(id);
      }
      pts.push_back(x / sum);
    }
  }
  return pts;
}

double minimize_field(const Polytope& p, const ScalarField& f) {
  const int n = p.dim();
  const FacetMatrix fm(p);
  const auto pts = seed_points(p, fm);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (const auto& x : pts) {
    const double v = f.value(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }

  // Polish the champion in the full space, then within each facet plane in
  // case the minimum sits on the boundary.
  best = std::min(best,
                  polish(fm, f, best_x, Eigen::MatrixXd::Identity(n, n)).first);

  for (Eigen::Index fi = 0; fi < fm.normals.rows(); ++fi) {
    if (n < 2) break;
    const Eigen::VectorXd normal = fm.normals.row(fi);
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(normal);
    Eigen::MatrixXd q = qr.matrixQ();
    Eigen::MatrixXd tangent = q.rightCols(n - 1);

    double fbest = std::numeric_limits<double>::infinity();
    Eigen::VectorXd fx;
    const double c = fm.offsets[fi];
    for (const auto& x : pts) {
      if (std::abs(normal.dot(x) + c) > 1e-9 * (1.0 + std::abs(c))) continue;
      const double v = f.value(x);
      if (v < fbest) {
        fbest = v;
        fx = x;
      }
    }
    if (!fx.size()) continue;
    best = std::min(best, polish(fm, f, fx, tangent).first);
  }
  return best;
}

}  // namespace

double min_on_polytope(const Weight& v, const Polytope& p) {
  v.validate_on(p);
  if (v.vertex_extremal()) {
    const auto& vm = p.vertex_matrix();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < vm.cols(); ++j) {
      best = std::min(best, v(vm.col(j)));
    }
    return best;
  }
  ScalarField f{[&](const Eigen::VectorXd& x) { return v(x); },
                [&](const Eigen::VectorXd& x) { return v.gradient(x); },
                [&](const Eigen::VectorXd& x) { return v.hessian(x); }};
  return minimize_field(p, f);
}

double weight_gap(const Weight& v0, const Weight& v1, const Polytope& p,
                  const IntegrationConfig& cfg) {
  const NormalizedWeight n0 = normalize(v0, p, cfg);
  const NormalizedWeight n1 = normalize(v1, p, cfg);
  ScalarField diff{
      [&](const Eigen::VectorXd& x) { return n1(x) - n0(x); },
      [&](const Eigen::VectorXd& x) {
        return (v1.gradient(x) / n1.norm_constant -
                v0.gradient(x) / n0.norm_constant)
            .eval();
      },
      [&](const Eigen::VectorXd& x) {
        return (v1.hessian(x) / n1.norm_constant -
                v0.hessian(x) / n0.norm_constant)
            .eval();
      }};
  const double inf = minimize_field(p, diff);
  return std::max(0.0, -inf);
}

}  // namespace soliton
