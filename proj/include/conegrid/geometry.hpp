#pragma once

// Cone fields and Lorentz-Finsler length functionals on a discretized chart.
//
// A spacetime here is a bounded coordinate grid carrying per-node data: a
// sharp convex cone of causal directions (round, from a Lorentzian metric,
// or polyhedral, from generator rays) and a positive-homogeneous concave
// length functional F whose domain is the cone.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace conegrid {

constexpr int kMaxDim = 3;

// Chart tangent vector; component 0 is the time coordinate.
struct Vec {
  int dim = 2;
  std::array<double, kMaxDim> c{0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double t, double x) : dim(2), c{t, x, 0.0} {}
  Vec(double t, double x, double y) : dim(3), c{t, x, y} {}

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }

  Vec operator+(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r.c[i] += o.c[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r.c[i] -= o.c[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r = *this;
    for (int i = 0; i < dim; ++i) r.c[i] *= s;
    return r;
  }
  Vec operator-() const { return *this * -1.0; }

  double dot(const Vec& o) const {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += c[i] * o.c[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
  bool is_zero(double tol = 0.0) const { return norm() <= tol; }
};

// Symmetric bilinear form, row-major dim x dim.
struct SymMat {
  int dim = 2;
  std::array<double, kMaxDim * kMaxDim> m{};

  double at(int i, int j) const { return m[i * dim + j]; }
  double& at(int i, int j) { return m[i * dim + j]; }

  static SymMat minkowski(int dim) {
    SymMat g;
    g.dim = dim;
    for (int i = 0; i < dim; ++i) g.at(i, i) = (i == 0) ? -1.0 : 1.0;
    return g;
  }

  double bilinear(const Vec& a, const Vec& b) const {
    double s = 0;
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) s += at(i, j) * a[i] * b[j];
    return s;
  }
  double quad(const Vec& y) const { return bilinear(y, y); }

  SymMat scaled(double s) const {
    SymMat r = *this;
    for (auto& v : r.m) v *= s;
    return r;
  }
  SymMat minus_identity(double eps) const {
    SymMat r = *this;
    for (int i = 0; i < dim; ++i) r.at(i, i) -= eps;
    return r;
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) g(i, j) = at(i, j);
    return g;
  }
};

// Count of negative eigenvalues; a Lorentzian form has exactly one.
inline int negative_eigenvalue_count(const SymMat& g, double tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.to_eigen());
  int neg = 0;
  for (int i = 0; i < g.dim; ++i)
    if (es.eigenvalues()[i] < -tol) ++neg;
  return neg;
}

namespace detail {

// Lawson-Hanson nonnegative least squares: min_{c >= 0} |G c - y|.
// Returns the residual norm. Columns of G are the cone generators.
inline double nnls_residual(const Eigen::MatrixXd& G, const Eigen::VectorXd& y,
                            double tol = 1e-12) {
  const int m = static_cast<int>(G.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  std::vector<bool> passive(m, false);
  Eigen::VectorXd resid = y;
  for (int iter = 0; iter < 3 * m + 30; ++iter) {
    Eigen::VectorXd w = G.transpose() * resid;
    int best = -1;
    double bestw = tol * (1.0 + y.norm());
    for (int j = 0; j < m; ++j)
      if (!passive[j] && w[j] > bestw) {
        bestw = w[j];
        best = j;
      }
    if (best < 0) break;
    passive[best] = true;
    // Inner loop: solve on the passive set, clip negatives.
    for (int inner = 0; inner < 3 * m + 30; ++inner) {
      std::vector<int> idx;
      for (int j = 0; j < m; ++j)
        if (passive[j]) idx.push_back(j);
      Eigen::MatrixXd Gp(G.rows(), idx.size());
      for (size_t k = 0; k < idx.size(); ++k) Gp.col(k) = G.col(idx[k]);
      Eigen::VectorXd z = Gp.colPivHouseholderQr().solve(y);
      bool all_pos = true;
      for (size_t k = 0; k < idx.size(); ++k)
        if (z[k] <= 0) all_pos = false;
      if (all_pos) {
        x.setZero();
        for (size_t k = 0; k < idx.size(); ++k) x[idx[k]] = z[k];
        break;
      }
      double alpha = 1.0;
      for (size_t k = 0; k < idx.size(); ++k)
        if (z[k] <= 0) alpha = std::min(alpha, x[idx[k]] / (x[idx[k]] - z[k]));
      for (size_t k = 0; k < idx.size(); ++k) {
        x[idx[k]] += alpha * (z[k] - x[idx[k]]);
        if (x[idx[k]] <= tol) {
          x[idx[k]] = 0;
          passive[idx[k]] = false;
        }
      }
    }
    resid = y - G * x;
    if (resid.norm() <= tol * (1.0 + y.norm())) break;
  }
  return resid.norm();
}

}  // namespace detail

// Sharp convex cone at a tangent space.
struct ConeSpec {
  enum class Kind { Round, Polyhedral };

  Kind kind = Kind::Round;
  SymMat metric;          // round: Lorentzian-signature form
  Vec orientation;        // round: time-orientation covector
  std::vector<Vec> generators;  // polyhedral: extreme rays

  static constexpr double kMembershipTol = 1e-10;

  static ConeSpec round(const SymMat& g, const Vec& orient) {
    if (negative_eigenvalue_count(g) != 1)
      throw std::invalid_argument("round cone: metric must have Lorentzian signature");
    ConeSpec c;
    c.kind = Kind::Round;
    c.metric = g;
    c.orientation = orient;
    return c;
  }

  static ConeSpec polyhedral(std::vector<Vec> gens) {
    if (gens.empty()) throw std::invalid_argument("polyhedral cone: no generators");
    ConeSpec c;
    c.kind = Kind::Polyhedral;
    c.generators = std::move(gens);
    if (c.axis_margin() <= 0)
      throw std::invalid_argument("polyhedral cone: generators are not sharp");
    return c;
  }

  int dim() const {
    return kind == Kind::Round ? metric.dim : generators.front().dim;
  }

  // Mean generator direction (polyhedral) or orientation direction (round).
  Vec axis() const {
    if (kind == Kind::Round) {
      Vec a = orientation;
      return a * (1.0 / a.norm());
    }
    Vec a;
    a.dim = dim();
    for (const auto& g : generators) a = a + g * (1.0 / g.norm());
    return a * (1.0 / a.norm());
  }

  // min_i axis . g_i / |g_i|; positive means a strictly separating
  // functional exists, hence the cone is sharp.
  double axis_margin() const {
    Vec a = axis();
    double m = 1.0;
    for (const auto& g : generators) m = std::min(m, a.dot(g) / g.norm());
    return m;
  }

  bool contains(const Vec& y) const {
    if (y.is_zero()) throw std::invalid_argument("cone membership of zero vector");
    const double scale = y.dot(y);
    if (kind == Kind::Round) {
      return metric.quad(y) <= kMembershipTol * scale &&
             orientation.dot(y) > -kMembershipTol * y.norm();
    }
    const int d = dim();
    Eigen::MatrixXd G(d, generators.size());
    for (size_t j = 0; j < generators.size(); ++j)
      for (int i = 0; i < d; ++i) G(i, j) = generators[j][i] / generators[j].norm();
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = y[i] / y.norm();
    return detail::nnls_residual(G, v) <= kMembershipTol;
  }

  // Interior membership; for polyhedral cones tested by perturbation sampling.
  bool contains_interior(const Vec& y, double delta = 1e-7) const {
    if (y.is_zero()) throw std::invalid_argument("cone membership of zero vector");
    const double scale = y.dot(y);
    if (kind == Kind::Round) {
      return metric.quad(y) < -delta * scale && orientation.dot(y) > 0;
    }
    const double r = delta * y.norm();
    for (int i = 0; i < dim(); ++i) {
      for (double s : {-1.0, 1.0}) {
        Vec p = y;
        p[i] += s * r;
        if (!contains(p)) return false;
      }
    }
    return true;
  }
};

// Positive-homogeneous concave length functional on a cone.
struct FinslerSpec {
  enum class Kind { Lorentzian, Custom };

  Kind kind = Kind::Lorentzian;
  SymMat metric;  // lorentzian: F = sqrt(-g(y,y))

  // custom (2D): F(y) = y0 * P(y1/y0) with P tabulated at increasing slopes
  // and extended by positive homogeneity.
  std::vector<double> profile_slopes;
  std::vector<double> profile_values;

  static FinslerSpec lorentzian(const SymMat& g) {
    FinslerSpec f;
    f.kind = Kind::Lorentzian;
    f.metric = g;
    return f;
  }

  static FinslerSpec custom(std::vector<double> slopes, std::vector<double> values) {
    if (slopes.size() != values.size() || slopes.size() < 2)
      throw std::invalid_argument("custom finsler: need >= 2 profile samples");
    for (size_t i = 1; i < slopes.size(); ++i)
      if (slopes[i] <= slopes[i - 1])
        throw std::invalid_argument("custom finsler: slopes must increase");
    for (double v : values)
      if (v < 0) throw std::invalid_argument("custom finsler: negative profile value");
    FinslerSpec f;
    f.kind = Kind::Custom;
    f.profile_slopes = std::move(slopes);
    f.profile_values = std::move(values);
    return f;
  }

  double profile_at(double s) const {
    const auto& xs = profile_slopes;
    const auto& ys = profile_values;
    if (s <= xs.front()) {
      double slope = (ys[1] - ys[0]) / (xs[1] - xs[0]);
      return std::max(0.0, ys[0] + slope * (s - xs[0]));
    }
    if (s >= xs.back()) {
      size_t n = xs.size();
      double slope = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
      return std::max(0.0, ys[n - 1] + slope * (s - xs[n - 1]));
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), s);
    size_t i = it - xs.begin();
    double t = (s - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
  }

  // Raw evaluation without the cone-domain check.
  double value_unchecked(const Vec& y) const {
    if (kind == Kind::Lorentzian) {
      double q = -metric.quad(y);
      return std::sqrt(std::max(0.0, q));
    }
    if (y.dim != 2)
      throw std::invalid_argument("custom finsler profile is two-dimensional");
    if (y[0] <= 0) throw std::domain_error("custom finsler: nonpositive time component");
    return y[0] * profile_at(y[1] / y[0]);
  }
};

// F(y) for y in the cone; throws outside the domain.
inline double finsler_value(const FinslerSpec& f, const ConeSpec& cone, const Vec& y) {
  if (y.is_zero()) throw std::invalid_argument("finsler_value of zero vector");
  if (!cone.contains(y)) throw std::domain_error("finsler_value outside cone");
  return f.value_unchecked(y);
}

inline bool cone_contains(const ConeSpec& cone, const Vec& y) { return cone.contains(y); }

// Draws from the closed cone; boundary rays included (radius = 1 samples).
inline Vec sample_cone_vector(const ConeSpec& cone, std::mt19937& rng,
                              bool boundary_biased = false) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  if (cone.kind == ConeSpec::Kind::Polyhedral) {
    Vec y;
    y.dim = cone.dim();
    if (boundary_biased) {
      return cone.generators[rng() % cone.generators.size()];
    }
    for (const auto& g : cone.generators) y = y + g * u01(rng);
    if (y.is_zero(1e-14)) y = cone.generators.front();
    return y;
  }
  // Round: map the standard cone through the eigenbasis of the metric.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cone.metric.to_eigen());
  const int d = cone.metric.dim;
  int tidx = 0;
  for (int i = 0; i < d; ++i)
    if (es.eigenvalues()[i] < es.eigenvalues()[tidx]) tidx = i;
  double rho = boundary_biased ? 1.0 : u01(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec y;
  y.dim = d;
  std::array<double, kMaxDim> sp{0, 0, 0};
  double spn = 0;
  for (int i = 0; i < d; ++i)
    if (i != tidx) {
      sp[i] = gauss(rng);
      spn += sp[i] * sp[i];
    }
  spn = std::sqrt(spn);
  const double alpha = 0.1 + u01(rng);  // time amplitude
  for (int i = 0; i < d; ++i) {
    double coef;
    if (i == tidx)
      coef = alpha / std::sqrt(-es.eigenvalues()[tidx]);
    else
      coef = (spn > 0 ? alpha * rho * sp[i] / spn : 0.0) / std::sqrt(es.eigenvalues()[i]);
    for (int k = 0; k < d; ++k) y[k] += coef * es.eigenvectors()(k, i);
  }
  if (cone.orientation.dot(y) < 0) y = -y;
  return y;
}

namespace detail {

inline void validate_superadditivity(const FinslerSpec& f, const ConeSpec& cone,
                                     std::mt19937& rng, int samples = 64) {
  for (int i = 0; i < samples; ++i) {
    Vec a = sample_cone_vector(cone, rng);
    Vec b = sample_cone_vector(cone, rng);
    double lhs = f.value_unchecked(a + b);
    double rhs = f.value_unchecked(a) + f.value_unchecked(b);
    double scale = std::max(1.0, rhs);
    if (lhs < rhs - 1e-9 * scale)
      throw std::invalid_argument("finsler spec fails superadditivity sampling");
  }
}

inline Vec rotate2(const Vec& v, double theta) {
  return Vec(std::cos(theta) * v[0] - std::sin(theta) * v[1],
             std::sin(theta) * v[0] + std::cos(theta) * v[1]);
}

}  // namespace detail

// Widened pair (C_eps, F_eps): the cone strictly contains the original in
// its interior, and F_eps strictly dominates F on the original cone.
inline std::pair<ConeSpec, FinslerSpec> widen(const ConeSpec& cone, const FinslerSpec& f,
                                              double eps) {
  if (eps <= 0) throw std::invalid_argument("widen: eps must be positive");
  ConeSpec wc;
  if (cone.kind == ConeSpec::Kind::Round) {
    SymMat g = cone.metric.minus_identity(eps);
    if (negative_eigenvalue_count(g) != 1)
      throw std::invalid_argument("widen: eps destroys cone sharpness");
    wc = ConeSpec::round(g, cone.orientation);
  } else {
    // Tilt each generator outward (away from the cone axis) by angle eps.
    Vec axis = cone.axis();
    std::vector<Vec> gens;
    gens.reserve(cone.generators.size());
    for (const auto& g0 : cone.generators) {
      Vec g = g0 * (1.0 / g0.norm());
      Vec w = g - axis * axis.dot(g);
      if (w.is_zero(1e-12)) {
        gens.push_back(g);
        continue;
      }
      Vec wh = w * (1.0 / w.norm());
      double phi = std::atan2(w.norm(), axis.dot(g));
      double phi2 = phi + eps;
      gens.push_back(axis * std::cos(phi2) + wh * std::sin(phi2));
    }
    ConeSpec cand;
    cand.kind = ConeSpec::Kind::Polyhedral;
    cand.generators = std::move(gens);
    if (cand.axis_margin() <= 0)
      throw std::invalid_argument("widen: eps destroys cone sharpness");
    wc = std::move(cand);
  }

  FinslerSpec wf;
  if (f.kind == FinslerSpec::Kind::Lorentzian) {
    // (1+eps) * sqrt(-(g - eps I)(y,y)), kept in Lorentzian form.
    double s = (1.0 + eps) * (1.0 + eps);
    wf = FinslerSpec::lorentzian(f.metric.minus_identity(eps).scaled(s));
  } else {
    wf = f;
    for (auto& v : wf.profile_values) v *= (1.0 + eps);
    // Widened-cone slopes beyond the table rely on the linear extension.
  }
  return {std::move(wc), std::move(wf)};
}

// Bounded coordinate grid with per-node (cone, finsler) data.
struct Grid {
  int dim = 2;
  std::array<int, kMaxDim> dims{1, 1, 1};
  std::array<double, kMaxDim> spacing{1.0, 1.0, 1.0};
  std::array<double, kMaxDim> origin{0.0, 0.0, 0.0};
  std::array<bool, kMaxDim> periodic{false, false, false};

  int node_count() const {
    int n = 1;
    for (int a = 0; a < dim; ++a) n *= dims[a];
    return n;
  }

  int index(const std::array<int, kMaxDim>& c) const {
    int idx = 0;
    for (int a = 0; a < dim; ++a) idx = idx * dims[a] + c[a];
    return idx;
  }

  std::array<int, kMaxDim> coords(int idx) const {
    std::array<int, kMaxDim> c{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
      c[a] = idx % dims[a];
      idx /= dims[a];
    }
    return c;
  }

  // Wraps periodic axes; returns -1 if out of range on a bounded axis.
  int wrapped_index(std::array<int, kMaxDim> c) const {
    for (int a = 0; a < dim; ++a) {
      if (periodic[a]) {
        c[a] = ((c[a] % dims[a]) + dims[a]) % dims[a];
      } else if (c[a] < 0 || c[a] >= dims[a]) {
        return -1;
      }
    }
    return index(c);
  }

  Vec position(int idx) const {
    auto c = coords(idx);
    Vec p;
    p.dim = dim;
    for (int a = 0; a < dim; ++a) p[a] = origin[a] + c[a] * spacing[a];
    return p;
  }

  Vec displacement(const std::array<int, kMaxDim>& offset) const {
    Vec d;
    d.dim = dim;
    for (int a = 0; a < dim; ++a) d[a] = offset[a] * spacing[a];
    return d;
  }

  void validate() const {
    if (dim < 2 || dim > kMaxDim) throw std::invalid_argument("grid: dim must be 2 or 3");
    for (int a = 0; a < dim; ++a) {
      if (dims[a] < 2) throw std::invalid_argument("grid: dims must be >= 2 per axis");
      if (spacing[a] <= 0) throw std::invalid_argument("grid: spacing must be positive");
    }
  }
};

struct Spacetime {
  Grid grid;
  std::vector<ConeSpec> cones;
  std::vector<FinslerSpec> finslers;

  const ConeSpec& cone(int node) const { return cones[node]; }
  const FinslerSpec& finsler(int node) const { return finslers[node]; }

  void validate() const {
    grid.validate();
    if (static_cast<int>(cones.size()) != grid.node_count() ||
        static_cast<int>(finslers.size()) != grid.node_count())
      throw std::invalid_argument("spacetime: node data size mismatch");
  }
};

inline Spacetime widen_spacetime(const Spacetime& st, double eps) {
  Spacetime w;
  w.grid = st.grid;
  w.cones.reserve(st.cones.size());
  w.finslers.reserve(st.finslers.size());
  for (size_t i = 0; i < st.cones.size(); ++i) {
    auto [c, f] = widen(st.cones[i], st.finslers[i], eps);
    w.cones.push_back(std::move(c));
    w.finslers.push_back(std::move(f));
  }
  return w;
}

// Built-in example spacetimes.
//
//   minkowski2d(nt, nx, spacing)
//   minkowski3d(nt, nx, ny, spacing)
//   tilted_cones(nt, nx, spacing, omega)   cone axis rotated by omega * x
//   periodic_time(nt or period, nx, spacing)   time axis wrapped
//   custom_finsler_polyhedral(nt, nx, spacing)
inline Spacetime builtin_spacetime(const std::string& name,
                                   const std::map<std::string, double>& params = {}) {
  auto get = [&](const std::string& k, double dflt) {
    auto it = params.find(k);
    return it == params.end() ? dflt : it->second;
  };

  Spacetime st;
  const double h = get("spacing", 1.0);
  if (h <= 0) throw std::invalid_argument("builtin_spacetime: spacing must be positive");

  if (name == "minkowski2d" || name == "tilted_cones" || name == "periodic_time" ||
      name == "custom_finsler_polyhedral") {
    st.grid.dim = 2;
    st.grid.dims = {static_cast<int>(get("nt", 9)), static_cast<int>(get("nx", 9)), 1};
    st.grid.spacing = {h, h, 1.0};
  } else if (name == "minkowski3d") {
    st.grid.dim = 3;
    st.grid.dims = {static_cast<int>(get("nt", 7)), static_cast<int>(get("nx", 7)),
                    static_cast<int>(get("ny", 7))};
    st.grid.spacing = {h, h, h};
  } else {
    throw std::invalid_argument("unknown builtin spacetime: " + name);
  }

  if (name == "periodic_time") {
    double period = get("period", get("nt", 5) * h);
    if (period <= 0) throw std::invalid_argument("periodic_time: period must be positive");
    st.grid.dims[0] = std::max(2, static_cast<int>(std::lround(period / h)));
    st.grid.periodic[0] = true;
  }

  const int n = st.grid.node_count();
  st.cones.reserve(n);
  st.finslers.reserve(n);

  if (name == "minkowski2d" || name == "minkowski3d" || name == "periodic_time") {
    SymMat g = SymMat::minkowski(st.grid.dim);
    Vec orient;
    orient.dim = st.grid.dim;
    orient[0] = 1.0;
    ConeSpec c = ConeSpec::round(g, orient);
    FinslerSpec f = FinslerSpec::lorentzian(g);
    for (int i = 0; i < n; ++i) {
      st.cones.push_back(c);
      st.finslers.push_back(f);
    }
  } else if (name == "tilted_cones") {
    const double omega = get("omega", 0.0);
    for (int i = 0; i < n; ++i) {
      double x = st.grid.position(i)[1];
      double theta = omega * x;
      // g_theta(y, y) = eta(R(-theta) y, R(-theta) y)
      SymMat g;
      g.dim = 2;
      double ct = std::cos(theta), sn = std::sin(theta);
      // R(-theta) columns applied to eta = diag(-1, 1)
      g.at(0, 0) = -ct * ct + sn * sn;
      g.at(0, 1) = g.at(1, 0) = -ct * sn - sn * ct;
      g.at(1, 1) = -sn * sn + ct * ct;
      Vec orient(ct, sn);
      st.cones.push_back(ConeSpec::round(g, orient));
      st.finslers.push_back(FinslerSpec::lorentzian(g));
    }
  } else if (name == "custom_finsler_polyhedral") {
    std::vector<Vec> gens = {Vec(1.0, -1.0), Vec(1.0, 1.0)};
    ConeSpec c = ConeSpec::polyhedral(gens);
    std::vector<double> slopes, values;
    const int m = 33;
    for (int k = 0; k < m; ++k) {
      double s = -1.0 + 2.0 * k / (m - 1);
      slopes.push_back(s);
      values.push_back(1.0 - s * s);
    }
    FinslerSpec f = FinslerSpec::custom(slopes, values);
    std::mt19937 rng(20240901u);
    detail::validate_superadditivity(f, c, rng);
    for (int i = 0; i < n; ++i) {
      st.cones.push_back(c);
      st.finslers.push_back(f);
    }
  }

  st.validate();
  return st;
}

}  // namespace conegrid
