#pragma once

// Concrete finite-dimensional operators: diagonal unitaries, dense contractions,
// the truncated two-sided shift, multiplication operators on atomic measures of
// the circle, and Gillespie's cube-root-of-a-rotation Fourier multiplier.
//
// Diagonal kinds (diagonal unitary, multiplication, Gillespie) carry their
// eigen-angles exactly and jump to any power by angle multiplication.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "modlab/angle.hpp"
#include "modlab/error.hpp"
#include "modlab/numeric.hpp"

namespace modlab {

using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Measures on the circle
// ---------------------------------------------------------------------------

/// Finite atomic probability measure: atoms at angles t_i with weights w_i.
struct Measure {
  std::vector<Angle> angles;
  std::vector<double> weights;

  /// Uniform measure on {k / 2^m : 0 <= k < 2^m}; its Fourier coefficient is 1 at
  /// every multiple of 2^m and 0 elsewhere.
  static Measure dyadic_uniform(unsigned m) {
    if (m > 24) throw Error(ErrorCode::resource, "dyadic measure with more than 2^24 atoms");
    Measure mu;
    const std::uint64_t count = 1ULL << m;
    mu.angles.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) mu.angles.push_back(Angle::rational(static_cast<std::int64_t>(k), count));
    mu.weights.assign(count, 1.0 / static_cast<double>(count));
    return mu;
  }

  static Measure from_atoms(std::span<const std::pair<double, double>> atoms) {
    Measure mu;
    for (const auto& [t, w] : atoms) {
      if (!(t >= 0.0 && t < 1.0)) throw Error(ErrorCode::invalid_measure, "atom angles must lie in [0,1)");
      if (!(w >= 0.0)) throw Error(ErrorCode::invalid_measure, "atom weights must be >= 0");
      mu.angles.push_back(Angle::from_turns(t));
      mu.weights.push_back(w);
    }
    return mu;
  }

  std::size_t size() const { return angles.size(); }

  double total_mass() const {
    CompensatedSum<double> s;
    for (double w : weights) s.add(w);
    return s.value();
  }

  bool normalized(double tol = 1e-12) const {
    return !angles.empty() && angles.size() == weights.size() && std::abs(total_mass() - 1.0) <= tol &&
           std::all_of(weights.begin(), weights.end(), [](double w) { return w >= 0.0; });
  }
};

/// mu^(n) = sum_i w_i e(n t_i).
inline cplx measure_fourier_coefficient(const Measure& mu, std::int64_t n) {
  CompensatedSum<cplx> s;
  for (std::size_t i = 0; i < mu.size(); ++i) s.add(mu.weights[i] * mu.angles[i].times(n).unit());
  return s.value();
}

// ---------------------------------------------------------------------------
// Operator kinds
// ---------------------------------------------------------------------------

struct DiagonalUnitary {
  std::vector<Angle> angles;
};

struct DenseContraction {
  Matrix matrix;
  double spectral_radius = 1.0;
  double kappa = 1.0;  // ||T^n|| <= kappa * spectral_radius^n (eigenvector condition number)
  std::optional<std::uint64_t> seed;
  std::optional<double> cap;
};

/// Coordinate shift on basis indices -W..W; e_W is absorbed.
struct TruncatedShift {
  std::uint64_t window = 1;
};

struct Multiplication {
  Measure measure;
};

/// c_n -> e(alpha_n / 3) c_n on |n| <= W with alpha_n = n alpha mod 1.
struct Gillespie {
  Angle alpha;
  int window = 1;
  double p = 2.0;
  int grid = 8;
  std::vector<Angle> phases;  // alpha_n / 3, index i <-> n = i - W
};

class Operator {
 public:
  using Kind = std::variant<DiagonalUnitary, DenseContraction, TruncatedShift, Multiplication, Gillespie>;

  explicit Operator(Kind kind) : kind_(std::move(kind)) {}

  const Kind& kind() const { return kind_; }

  template <typename K>
  const K* as() const {
    return std::get_if<K>(&kind_);
  }

  std::size_t dim() const {
    return std::visit(
        [](const auto& k) -> std::size_t {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DiagonalUnitary>) return k.angles.size();
          if constexpr (std::is_same_v<K, DenseContraction>) return static_cast<std::size_t>(k.matrix.rows());
          if constexpr (std::is_same_v<K, TruncatedShift>) return 2 * k.window + 1;
          if constexpr (std::is_same_v<K, Multiplication>) return k.measure.size();
          if constexpr (std::is_same_v<K, Gillespie>) return k.phases.size();
        },
        kind_);
  }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, DiagonalUnitary>) return "diagonal_unitary";
          if constexpr (std::is_same_v<K, DenseContraction>) return "dense_contraction";
          if constexpr (std::is_same_v<K, TruncatedShift>) return "truncated_shift";
          if constexpr (std::is_same_v<K, Multiplication>) return "multiplication";
          if constexpr (std::is_same_v<K, Gillespie>) return "gillespie";
        },
        kind_);
  }

  /// Eigen-angles for the diagonal kinds, in coordinate order.
  std::optional<std::span<const Angle>> phases() const {
    if (const auto* d = as<DiagonalUnitary>()) return std::span<const Angle>(d->angles);
    if (const auto* m = as<Multiplication>()) return std::span<const Angle>(m->measure.angles);
    if (const auto* g = as<Gillespie>()) return std::span<const Angle>(g->phases);
    return std::nullopt;
  }

  /// Weights of the inner product (multiplication kind only).
  std::optional<std::span<const double>> weights() const {
    if (const auto* m = as<Multiplication>()) return std::span<const double>(m->measure.weights);
    return std::nullopt;
  }

  /// sup_k ||T^k|| in the operator's Hilbert norm.
  double power_bound() const { return as<DenseContraction>() ? 1.0 + 1e-9 : 1.0; }

  json to_json() const {
    return std::visit(
        [](const auto& k) -> json {
          using K = std::decay_t<decltype(k)>;
          json params;
          json out;
          if constexpr (std::is_same_v<K, DiagonalUnitary>) {
            params["angles"] = json::array();
            for (const auto& a : k.angles) params["angles"].push_back(a.to_string());
            out["kind"] = "diagonal_unitary";
          } else if constexpr (std::is_same_v<K, DenseContraction>) {
            params["dim"] = k.matrix.rows();
            if (k.cap) params["cap"] = *k.cap;
            params["spectral_radius"] = k.spectral_radius;
            params["kappa"] = k.kappa;
            out["kind"] = "dense_contraction";
            if (k.seed) out["seed"] = *k.seed;
          } else if constexpr (std::is_same_v<K, TruncatedShift>) {
            params["window"] = k.window;
            out["kind"] = "truncated_shift";
          } else if constexpr (std::is_same_v<K, Multiplication>) {
            params["atoms"] = json::array();
            for (std::size_t i = 0; i < k.measure.size(); ++i) {
              params["atoms"].push_back({k.measure.angles[i].to_string(), k.measure.weights[i]});
            }
            out["kind"] = "multiplication";
          } else {
            params["alpha"] = k.alpha.to_string();
            params["window"] = k.window;
            params["p"] = k.p;
            params["grid"] = k.grid;
            out["kind"] = "gillespie";
          }
          out["params"] = params;
          return out;
        },
        kind_);
  }

 private:
  Kind kind_;
};

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

inline Operator make_diagonal_unitary(std::vector<Angle> angles) {
  if (angles.empty()) throw Error(ErrorCode::invalid_argument, "diagonal unitary needs at least one angle");
  return Operator(DiagonalUnitary{std::move(angles)});
}

inline Operator make_diagonal_unitary(std::span<const double> turns) {
  std::vector<Angle> a;
  for (double t : turns) a.push_back(Angle::from_turns(t));
  return make_diagonal_unitary(std::move(a));
}

inline double largest_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline double spectral_radius(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Condition number of the (column-normalized) eigenvector matrix; infinity if defective.
inline double eigenvector_condition(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m, true);
  Matrix v = es.eigenvectors();
  for (Eigen::Index j = 0; j < v.cols(); ++j) v.col(j).normalize();
  Eigen::JacobiSVD<Matrix> svd(v);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 1e-14 * s(0))) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

/// Wraps a user matrix; its norm must not exceed 1 + 1e-9.
inline Operator make_dense_operator(Matrix m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw Error(ErrorCode::dim_mismatch, "dense operator must be square");
  const double norm = largest_singular_value(m);
  if (norm > 1.0 + 1e-9) throw Error(ErrorCode::invalid_argument, "matrix norm " + std::to_string(norm) + " exceeds 1");
  DenseContraction d;
  d.spectral_radius = spectral_radius(m);
  d.kappa = eigenvector_condition(m);
  d.matrix = std::move(m);
  return Operator(std::move(d));
}

/// Seeded Gaussian matrix with singular values clipped to <= 1; with a cap r < 1 it is
/// further scaled so that its spectral radius is at most r.
inline Operator make_random_contraction(std::size_t dim, std::uint64_t seed,
                                        std::optional<double> spectral_radius_cap = std::nullopt) {
  if (dim < 1) throw Error(ErrorCode::invalid_argument, "dimension must be >= 1");
  if (spectral_radius_cap && !(*spectral_radius_cap > 0.0 && *spectral_radius_cap <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "spectral radius cap must lie in (0,1]");
  }
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix g(n, n);
  const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(dim));
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = scale * rng.complex_normal();
  }
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd s = svd.singularValues().cwiseMin(1.0);
  Matrix m = svd.matrixU() * s.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();

  DenseContraction d;
  d.seed = seed;
  d.cap = spectral_radius_cap;
  double rho = spectral_radius(m);
  if (spectral_radius_cap && rho > *spectral_radius_cap) {
    m *= *spectral_radius_cap / rho;
    rho = *spectral_radius_cap;
  }
  d.spectral_radius = rho;
  d.kappa = eigenvector_condition(m);
  d.matrix = std::move(m);
  return Operator(std::move(d));
}

inline Operator make_truncated_shift(std::uint64_t window) {
  if (window < 1) throw Error(ErrorCode::invalid_argument, "shift window must be >= 1");
  return Operator(TruncatedShift{window});
}

inline Operator make_multiplication_operator(Measure mu) {
  if (!mu.normalized()) throw Error(ErrorCode::invalid_measure, "measure must be a probability (total mass 1)");
  return Operator(Multiplication{std::move(mu)});
}

inline Operator make_gillespie_multiplier(const Angle& alpha, int window, double p, int grid) {
  if (!(p > 1.0)) throw Error(ErrorCode::domain, "Gillespie multiplier needs p > 1");
  if (window < 1) throw Error(ErrorCode::invalid_argument, "Fourier window must be >= 1");
  if (grid < 8 * window) throw Error(ErrorCode::aliasing, "quadrature grid must be >= 8 * window");
  const double t = alpha.turns();
  if (!(t > 0.0 && t < 1.0)) throw Error(ErrorCode::domain, "alpha must lie in (0,1)");
  Gillespie g{alpha, window, p, grid, {}};
  for (int n = -window; n <= window; ++n) g.phases.push_back(alpha.times(n).third());
  return Operator(std::move(g));
}

// ---------------------------------------------------------------------------
// Action
// ---------------------------------------------------------------------------

namespace detail {
inline void check_dim(const Operator& op, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != op.dim()) {
    throw Error(ErrorCode::dim_mismatch,
                "vector has dimension " + std::to_string(x.size()) + ", operator " + std::to_string(op.dim()));
  }
}

inline Vector shift_by(const Vector& x, std::uint64_t k) {
  Vector y = Vector::Zero(x.size());
  const auto n = static_cast<std::uint64_t>(x.size());
  if (k < n) y.tail(static_cast<Eigen::Index>(n - k)) = x.head(static_cast<Eigen::Index>(n - k));
  return y;
}
}  // namespace detail

/// T x.
inline Vector apply(const Operator& op, const Vector& x) {
  detail::check_dim(op, x);
  if (const auto ph = op.phases()) {
    Vector y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = (*ph)[static_cast<std::size_t>(i)].unit() * x(i);
    return y;
  }
  if (const auto* d = op.as<DenseContraction>()) return d->matrix * x;
  return detail::shift_by(x, 1);
}

/// T^k x; diagonal kinds and the shift jump directly.
inline Vector apply_power(const Operator& op, const Vector& x, std::uint64_t k) {
  detail::check_dim(op, x);
  if (const auto ph = op.phases()) {
    Vector y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) = (*ph)[static_cast<std::size_t>(i)].times_u(k).unit() * x(i);
    return y;
  }
  if (op.as<TruncatedShift>()) return detail::shift_by(x, k);
  const auto& m = op.as<DenseContraction>()->matrix;
  Vector y = x;
  if (k <= 64) {
    for (std::uint64_t i = 0; i < k; ++i) y = m * y;
    return y;
  }
  Matrix base = m;
  while (k > 0) {
    if (k & 1) y = base * y;
    k >>= 1;
    if (k) base = base * base;
  }
  return y;
}

/// <x, y>, weighted by the atom masses for multiplication operators.
inline cplx inner(const Operator& op, const Vector& x, const Vector& y) {
  detail::check_dim(op, x);
  detail::check_dim(op, y);
  if (const auto w = op.weights()) {
    CompensatedSum<cplx> s;
    for (Eigen::Index i = 0; i < x.size(); ++i) s.add((*w)[static_cast<std::size_t>(i)] * x(i) * std::conj(y(i)));
    return s.value();
  }
  return y.dot(x);  // Eigen conjugates the left operand
}

inline double norm(const Operator& op, const Vector& x) {
  if (const auto w = op.weights()) {
    detail::check_dim(op, x);
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += (*w)[static_cast<std::size_t>(i)] * std::norm(x(i));
    return std::sqrt(s);
  }
  return x.norm();
}

/// Largest k for which T^k x is computed exactly (the truncated shift loses mass past the window).
inline std::uint64_t validity_horizon(const Operator& op, const Vector& x) {
  const auto* s = op.as<TruncatedShift>();
  if (!s) return std::numeric_limits<std::uint64_t>::max();
  for (Eigen::Index i = x.size() - 1; i >= 0; --i) {
    if (x(i) != cplx(0.0, 0.0)) return static_cast<std::uint64_t>(x.size() - 1 - i);
  }
  return std::numeric_limits<std::uint64_t>::max();
}

/// Basis vector e_m of the truncated shift, m in [-W, W].
inline Vector shift_basis_vector(const Operator& op, std::int64_t m) {
  const auto* s = op.as<TruncatedShift>();
  if (!s) throw Error(ErrorCode::invalid_argument, "not a truncated shift");
  const auto w = static_cast<std::int64_t>(s->window);
  if (m < -w || m > w) throw Error(ErrorCode::invalid_argument, "basis index outside the window");
  Vector e = Vector::Zero(static_cast<Eigen::Index>(op.dim()));
  e(static_cast<Eigen::Index>(m + w)) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Spectral decomposition
// ---------------------------------------------------------------------------

/// Unimodular eigenvalues with their orthogonal spectral projections, plus the residual
/// (orthocomplement) subspace.
struct SpectralDecomp {
  struct Component {
    Angle lambda;
    std::vector<std::size_t> coordinates;  // diagonal kinds: projection onto these coordinates
    Matrix basis;                          // dense kind: orthonormal basis of the eigenspace
    std::size_t rank() const { return coordinates.empty() ? static_cast<std::size_t>(basis.cols()) : coordinates.size(); }
  };

  std::size_t dim = 0;
  std::vector<Component> components;
  Matrix residual_basis;  // orthonormal basis of the complement (dense kind); empty otherwise

  Vector project(std::size_t i, const Vector& x) const {
    const auto& c = components.at(i);
    if (!c.coordinates.empty()) {
      Vector y = Vector::Zero(x.size());
      for (std::size_t j : c.coordinates) y(static_cast<Eigen::Index>(j)) = x(static_cast<Eigen::Index>(j));
      return y;
    }
    return c.basis * (c.basis.adjoint() * x);
  }

  Matrix projection_matrix(std::size_t i) const {
    const auto n = static_cast<Eigen::Index>(dim);
    const auto& c = components.at(i);
    if (!c.coordinates.empty()) {
      Matrix p = Matrix::Zero(n, n);
      for (std::size_t j : c.coordinates) p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
      return p;
    }
    return c.basis * c.basis.adjoint();
  }

  Matrix residual_projection() const {
    const auto n = static_cast<Eigen::Index>(dim);
    if (residual_basis.cols() == 0) return Matrix::Zero(n, n);
    return residual_basis * residual_basis.adjoint();
  }
};

/// Groups unimodular eigenvalues within `tol` turns. Supported: diagonal kinds and dense
/// matrices that are normal within `normal_tol`.
inline SpectralDecomp spectral_decompose(const Operator& op, double tol = 1e-8, double normal_tol = 1e-9) {
  SpectralDecomp out;
  out.dim = op.dim();
  if (const auto ph = op.phases()) {
    std::vector<std::size_t> order(ph->size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return (*ph)[a].turns() < (*ph)[b].turns(); });
    for (std::size_t idx : order) {
      const Angle& a = (*ph)[idx];
      if (!out.components.empty() && circular_distance(out.components.back().lambda, a) <= tol) {
        out.components.back().coordinates.push_back(idx);
      } else {
        out.components.push_back({a, {idx}, {}});
      }
    }
    // Merge across the 0/1 seam.
    if (out.components.size() > 1 &&
        circular_distance(out.components.front().lambda, out.components.back().lambda) <= tol) {
      auto& front = out.components.front().coordinates;
      front.insert(front.end(), out.components.back().coordinates.begin(), out.components.back().coordinates.end());
      out.components.pop_back();
    }
    for (auto& c : out.components) std::sort(c.coordinates.begin(), c.coordinates.end());
    return out;
  }
  if (op.as<TruncatedShift>()) {
    throw Error(ErrorCode::unsupported_decomposition, "truncated shift is not normal");
  }
  const Matrix& m = op.as<DenseContraction>()->matrix;
  const Matrix comm = m * m.adjoint() - m.adjoint() * m;
  if (comm.norm() > normal_tol * std::max(1.0, m.squaredNorm())) {
    throw Error(ErrorCode::unsupported_decomposition, "dense matrix is not normal");
  }
  Eigen::ComplexEigenSolver<Matrix> es(m, true);
  const auto& vals = es.eigenvalues();
  const Matrix& vecs = es.eigenvectors();
  struct Eig {
    Angle angle;
    Eigen::Index col;
  };
  std::vector<Eig> unimodular;
  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (std::abs(std::abs(vals(i)) - 1.0) <= 1e-8) {
      double t = std::arg(vals(i)) / (2.0 * std::numbers::pi);
      if (t < 0) t += 1.0;
      unimodular.push_back({Angle::from_turns(t), i});
    } else {
      rest.push_back(i);
    }
  }
  std::stable_sort(unimodular.begin(), unimodular.end(),
                   [](const Eig& a, const Eig& b) { return a.angle.turns() < b.angle.turns(); });
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Angle> reps;
  for (const auto& e : unimodular) {
    if (!reps.empty() && circular_distance(reps.back(), e.angle) <= tol) {
      groups.back().push_back(e.col);
    } else {
      reps.push_back(e.angle);
      groups.push_back({e.col});
    }
  }
  if (groups.size() > 1 && circular_distance(reps.front(), reps.back()) <= tol) {
    groups.front().insert(groups.front().end(), groups.back().begin(), groups.back().end());
    groups.pop_back();
    reps.pop_back();
  }
  const auto orthonormal = [&](const std::vector<Eigen::Index>& cols) {
    Matrix v(m.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = vecs.col(cols[j]);
    Eigen::HouseholderQR<Matrix> qr(v);
    return Matrix(qr.householderQ() * Matrix::Identity(m.rows(), v.cols()));
  };
  for (std::size_t g = 0; g < groups.size(); ++g) {
    out.components.push_back({reps[g], {}, orthonormal(groups[g])});
  }
  if (!rest.empty()) out.residual_basis = orthonormal(rest);
  return out;
}

// ---------------------------------------------------------------------------
// Trigonometric polynomials and L^p norms on the circle
// ---------------------------------------------------------------------------

/// sum_{n = lowest}^{lowest + size - 1} c_n e_n.
struct TrigPoly {
  int lowest = 0;
  std::vector<cplx> coeffs;

  int window() const {
    if (coeffs.empty()) return 0;
    const int hi = lowest + static_cast<int>(coeffs.size()) - 1;
    return std::max(std::abs(lowest), std::abs(hi));
  }

  /// e_1 + ... + e_n
  static TrigPoly dirichlet(int n) { return TrigPoly{1, std::vector<cplx>(static_cast<std::size_t>(n), cplx(1.0, 0.0))}; }
};

/// Evaluates window polynomials on the uniform grid j/G by a precomputed character matrix.
class TrigGrid {
 public:
  TrigGrid(int lowest, int size, int grid) : lowest_(lowest), grid_(grid), chars_(grid, size) {
    std::vector<cplx> roots(static_cast<std::size_t>(grid));
    for (int r = 0; r < grid; ++r) roots[static_cast<std::size_t>(r)] = Angle::rational(r, static_cast<std::uint64_t>(grid)).unit();
    for (int j = 0; j < grid; ++j) {
      for (int i = 0; i < size; ++i) {
        const std::int64_t n = lowest + i;
        std::int64_t r = (n * j) % grid;
        if (r < 0) r += grid;
        chars_(j, i) = roots[static_cast<std::size_t>(r)];
      }
    }
  }

  int grid() const { return grid_; }
  int lowest() const { return lowest_; }
  const Matrix& characters() const { return chars_; }

  Vector values(const Vector& coeffs) const { return chars_ * coeffs; }

  /// Window coefficients of grid samples (exact for window polynomials when G > 2W).
  Vector coefficients(const Vector& values) const { return chars_.adjoint() * values / static_cast<double>(grid_); }

  static double lp_norm_of_values(const Eigen::Ref<const Vector>& v, double p) {
    CompensatedSum<double> s;
    for (Eigen::Index j = 0; j < v.size(); ++j) s.add(std::pow(std::abs(v(j)), p));
    return std::pow(s.value() / static_cast<double>(v.size()), 1.0 / p);
  }

 private:
  int lowest_;
  int grid_;
  Matrix chars_;
};

/// (int_0^1 |sum c_n e(nt)|^p dt)^{1/p} by the trapezoidal rule on `grid` points; exact for
/// even integer p when grid > p * window.
inline double lp_norm_trig(const TrigPoly& c, double p, int grid) {
  if (!(p >= 1.0)) throw Error(ErrorCode::domain, "L^p norm needs p >= 1");
  if (grid < 1 || grid < 4 * c.window()) {
    throw Error(ErrorCode::aliasing, "grid " + std::to_string(grid) + " is below 4 * window " +
                                         std::to_string(c.window()));
  }
  if (c.coeffs.empty()) return 0.0;
  TrigGrid g(c.lowest, static_cast<int>(c.coeffs.size()), grid);
  Vector v = Eigen::Map<const Vector>(c.coeffs.data(), static_cast<Eigen::Index>(c.coeffs.size()));
  return TrigGrid::lp_norm_of_values(g.values(v), p);
}

// ---------------------------------------------------------------------------
// Gillespie multiplier: L^p operator-norm estimates
// ---------------------------------------------------------------------------

struct PowerNormEstimate {
  std::vector<int> powers;
  std::vector<double> norms;  // lower-bound estimates of ||T^n||_{L^p -> L^p}
  double norm_t = 0.0;        // estimate for n = 1
  double norm_t2 = 0.0;       // estimate for n = 2
  std::string method;
};

/// Estimates ||T^n||_{p->p} for |n| <= max_power on window polynomials: maximum of the ratio
/// over `samples` seeded random unit polynomials, refined by Boyd's dual power iteration
/// started from the best sample. Every reported value is a ratio actually attained, hence
/// a lower bound for the true norm.
inline PowerNormEstimate estimate_gillespie_power_norms(const Operator& op, int max_power, int samples = 200,
                                                        std::uint64_t seed = 1, int refine_steps = 25) {
  const auto* g = op.as<Gillespie>();
  if (!g) throw Error(ErrorCode::invalid_argument, "not a Gillespie multiplier");
  const int size = 2 * g->window + 1;
  TrigGrid tg(-g->window, size, g->grid);
  const double p = g->p;
  const double q = p / (p - 1.0);

  Rng rng(seed);
  Matrix c(size, samples);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < size; ++i) c(i, s) = rng.complex_normal();
  }
  const Matrix vals0 = tg.characters() * c;
  Eigen::VectorXd base_norm(samples);
  for (int s = 0; s < samples; ++s) base_norm(s) = TrigGrid::lp_norm_of_values(vals0.col(s), p);

  const auto symbol = [&](int n) {
    Vector m(size);
    for (int i = 0; i < size; ++i) {
      m(i) = g->phases[static_cast<std::size_t>(i)].times(n).unit();
    }
    return m;
  };

  PowerNormEstimate est;
  est.method = "max over " + std::to_string(samples) + " seeded random window polynomials + " +
               std::to_string(refine_steps) + " Boyd dual power iterations; lower bound";
  for (int n = -max_power; n <= max_power; ++n) {
    const Vector m = symbol(n);
    const Matrix vals = tg.characters() * (m.asDiagonal() * c);
    double best = 0.0;
    int best_s = 0;
    for (int s = 0; s < samples; ++s) {
      const double r = TrigGrid::lp_norm_of_values(vals.col(s), p) / base_norm(s);
      if (r > best) {
        best = r;
        best_s = s;
      }
    }
    // Boyd iteration: f -> J_q(T^* J_p(T f)), kept inside the window.
    Vector f = c.col(best_s);
    for (int it = 0; it < refine_steps; ++it) {
      const Vector fv = tg.values(f);
      const double fn = TrigGrid::lp_norm_of_values(fv, p);
      const Vector tv = tg.values(m.cwiseProduct(f));
      best = std::max(best, TrigGrid::lp_norm_of_values(tv, p) / fn);
      Vector h(tv.size());
      for (Eigen::Index j = 0; j < tv.size(); ++j) {
        const double a = std::abs(tv(j));
        h(j) = a > 0 ? std::pow(a, p - 1.0) * tv(j) / a : cplx(0.0, 0.0);
      }
      const Vector back = tg.values(m.conjugate().cwiseProduct(tg.coefficients(h)));
      Vector d(back.size());
      for (Eigen::Index j = 0; j < back.size(); ++j) {
        const double a = std::abs(back(j));
        d(j) = a > 0 ? std::pow(a, q - 1.0) * back(j) / a : cplx(0.0, 0.0);
      }
      f = tg.coefficients(d);
      if (f.norm() == 0.0) break;
    }
    est.powers.push_back(n);
    est.norms.push_back(best);
    if (n == 1) est.norm_t = best;
    if (n == 2) est.norm_t2 = best;
  }
  return est;
}

}  // namespace modlab
