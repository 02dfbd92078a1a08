#pragma once

// Small fixed-size dense matrix/vector kernels, generic over the scalar type
// (float, double, or counted<T> for flop accounting). All kernels work on
// row-major views into caller-owned storage and never allocate, so the same
// code path runs inside scan workers and inside the PRAM simulator.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "parascan/flops.hpp"

namespace parascan {

inline constexpr int kMaxDim = 16;  // small-matrix regime

struct DimensionMismatch : std::logic_error {
  using std::logic_error::logic_error;
};
struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularMatrix : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateFactorization : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename S>
struct CMatView {
  const S* d = nullptr;
  int rows = 0;
  int cols = 0;
  const S& operator()(int i, int j) const { return d[i * cols + j]; }
};

template <typename S>
struct MatView {
  S* d = nullptr;
  int rows = 0;
  int cols = 0;
  S& operator()(int i, int j) const { return d[i * cols + j]; }
  operator CMatView<S>() const { return {d, rows, cols}; }
};

// Stack scratch for kernel-local temporaries (dims <= kMaxDim).
template <typename S>
struct ScratchMat {
  std::array<S, kMaxDim * kMaxDim> buf{};
  MatView<S> view(int r, int c) {
    if (r > kMaxDim || c > kMaxDim) throw DimensionMismatch("scratch too small");
    return {buf.data(), r, c};
  }
};

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw DimensionMismatch(what);
}
}  // namespace detail

template <typename S>
inline void mat_set_zero(MatView<S> a) {
  for (int i = 0; i < a.rows * a.cols; ++i) a.d[i] = S(0);
}

template <typename S>
inline void mat_set_identity(MatView<S> a) {
  mat_set_zero(a);
  for (int i = 0; i < a.rows && i < a.cols; ++i) a(i, i) = S(1);
}

template <typename S>
inline void mat_copy(MatView<S> out, std::type_identity_t<CMatView<S>> a) {
  detail::require(out.rows == a.rows && out.cols == a.cols, "copy dims");
  for (int i = 0; i < a.rows * a.cols; ++i) out.d[i] = a.d[i];
}

// out = a + b (elementwise); out may alias a or b.
template <typename S>
inline void mat_add(MatView<S> out, std::type_identity_t<CMatView<S>> a,
                    std::type_identity_t<CMatView<S>> b) {
  detail::require(a.rows == b.rows && a.cols == b.cols, "add dims");
  detail::require(out.rows == a.rows && out.cols == a.cols, "add out dims");
  for (int i = 0; i < a.rows * a.cols; ++i) out.d[i] = a.d[i] + b.d[i];
}

template <typename S>
inline void mat_sub(MatView<S> out, std::type_identity_t<CMatView<S>> a,
                    std::type_identity_t<CMatView<S>> b) {
  detail::require(a.rows == b.rows && a.cols == b.cols, "sub dims");
  detail::require(out.rows == a.rows && out.cols == a.cols, "sub out dims");
  for (int i = 0; i < a.rows * a.cols; ++i) out.d[i] = a.d[i] - b.d[i];
}

// out = a * b (schoolbook). out must not alias a or b.
template <typename S>
inline void mat_mul(MatView<S> out, std::type_identity_t<CMatView<S>> a,
                    std::type_identity_t<CMatView<S>> b) {
  detail::require(a.cols == b.rows, "mul inner dims");
  detail::require(out.rows == a.rows && out.cols == b.cols, "mul out dims");
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      S acc = a(i, 0) * b(0, j);
      for (int k = 1; k < a.cols; ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
}

// out = a^T. out must not alias a.
template <typename S>
inline void mat_transpose(MatView<S> out, std::type_identity_t<CMatView<S>> a) {
  detail::require(out.rows == a.cols && out.cols == a.rows, "transpose dims");
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
}

// a <- (a + a^T)/2, drift control for covariance outputs.
template <typename S>
inline void mat_symmetrize(MatView<S> a) {
  detail::require(a.rows == a.cols, "symmetrize square");
  const S half = scalar_from_double<S>(0.5);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = i + 1; j < a.cols; ++j) {
      S m = (a(i, j) + a(j, i)) * half;
      a(i, j) = m;
      a(j, i) = m;
    }
  }
}

template <typename S>
inline double mat_max_abs(CMatView<S> a) {
  double m = 0;
  for (int i = 0; i < a.rows * a.cols; ++i) {
    double x = std::abs(to_double(a.d[i]));
    if (x > m) m = x;
  }
  return m;
}

template <typename S>
inline double mat_max_abs(MatView<S> a) {
  return mat_max_abs(CMatView<S>(a));
}

// Lower-triangular Cholesky factor, L*L^T = a. Strict upper triangle of the
// output is set to exact zeros. Throws NotPositiveDefinite on a non-positive
// pivot. out must not alias a.
template <typename S>
inline void cholesky(MatView<S> out, std::type_identity_t<CMatView<S>> a) {
  detail::require(a.rows == a.cols, "cholesky square");
  detail::require(out.rows == a.rows && out.cols == a.cols, "cholesky out");
  const int n = a.rows;
  mat_set_zero(out);
  for (int j = 0; j < n; ++j) {
    S diag = a(j, j);
    for (int k = 0; k < j; ++k) diag -= out(j, k) * out(j, k);
    if (!(to_double(diag) > 0.0)) throw NotPositiveDefinite("cholesky pivot");
    using std::sqrt;
    S ljj = sqrt(diag);
    out(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      S acc = a(i, j);
      for (int k = 0; k < j; ++k) acc -= out(i, k) * out(j, k);
      out(i, j) = acc / ljj;
    }
  }
}

// In-place LU with partial pivoting: a <- combined L (unit diagonal, below)
// and U (on and above). perm[i] is the source row of pivoted row i.
template <typename S>
inline void lu_factor_inplace(MatView<S> a, int* perm) {
  detail::require(a.rows == a.cols, "lu square");
  const int n = a.rows;
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    double best = std::abs(to_double(a(c, c)));
    for (int r = c + 1; r < n; ++r) {
      double x = std::abs(to_double(a(r, c)));
      if (x > best) {
        best = x;
        piv = r;
      }
    }
    if (best == 0.0) throw SingularMatrix("lu zero pivot");
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(a.d[c * n + j], a.d[piv * n + j]);
      std::swap(perm[c], perm[piv]);
    }
    for (int r = c + 1; r < n; ++r) {
      S f = a(r, c) / a(c, c);
      a(r, c) = f;
      for (int j = c + 1; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
}

// Solves a*X = b given the in-place LU of a; X written into out.
// out may alias b only if they are the same view.
template <typename S>
inline void lu_solve(std::type_identity_t<CMatView<S>> lu, const int* perm,
                     std::type_identity_t<CMatView<S>> b, MatView<S> out) {
  const int n = lu.rows;
  detail::require(b.rows == n && out.rows == n && out.cols == b.cols,
                  "lu_solve dims");
  for (int col = 0; col < b.cols; ++col) {
    // apply permutation, then forward substitution (unit lower)
    std::array<S, kMaxDim> y;
    for (int i = 0; i < n; ++i) y[i] = b(perm[i], col);
    for (int i = 1; i < n; ++i)
      for (int k = 0; k < i; ++k) y[i] -= lu(i, k) * y[k];
    // back substitution (upper)
    for (int i = n - 1; i >= 0; --i) {
      for (int k = i + 1; k < n; ++k) y[i] -= lu(i, k) * y[k];
      y[i] /= lu(i, i);
    }
    for (int i = 0; i < n; ++i) out(i, col) = y[i];
  }
}

// General solve a*X = b via LU with partial pivoting; a and b are not
// modified. out must not alias a.
template <typename S>
inline void solve(std::type_identity_t<CMatView<S>> a,
                  std::type_identity_t<CMatView<S>> b, MatView<S> out) {
  detail::require(a.rows == a.cols && a.rows <= kMaxDim, "solve dims");
  std::array<S, kMaxDim * kMaxDim> lu_buf;
  std::array<int, kMaxDim> perm;
  MatView<S> lu{lu_buf.data(), a.rows, a.cols};
  mat_copy(lu, a);
  lu_factor_inplace(lu, perm.data());
  lu_solve(CMatView<S>(lu), perm.data(), b, out);
}

// SPD solve a*X = b via Cholesky. Throws NotPositiveDefinite if a is not.
template <typename S>
inline void solve_spd(std::type_identity_t<CMatView<S>> a,
                      std::type_identity_t<CMatView<S>> b, MatView<S> out) {
  detail::require(a.rows == a.cols && a.rows <= kMaxDim, "solve_spd dims");
  detail::require(b.rows == a.rows && out.rows == a.rows && out.cols == b.cols,
                  "solve_spd rhs dims");
  std::array<S, kMaxDim * kMaxDim> l_buf;
  MatView<S> l{l_buf.data(), a.rows, a.cols};
  cholesky(l, a);
  const int n = a.rows;
  for (int col = 0; col < b.cols; ++col) {
    std::array<S, kMaxDim> y;
    for (int i = 0; i < n; ++i) {
      S acc = b(i, col);
      for (int k = 0; k < i; ++k) acc -= l(i, k) * y[k];
      y[i] = acc / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      S acc = y[i];
      for (int k = i + 1; k < n; ++k) acc -= l(k, i) * y[k];
      y[i] = acc / l(i, i);
    }
    for (int i = 0; i < n; ++i) out(i, col) = y[i];
  }
}

// Orthonormal Q factor of a square matrix via Householder reflections, with
// the sign convention that R's diagonal is non-negative (makes Q unique and
// generated models platform-stable). Throws DegenerateFactorization when a
// column collapses to numerical zero. out must not alias a.
template <typename S>
inline void qr_qfactor(MatView<S> out, std::type_identity_t<CMatView<S>> a) {
  detail::require(a.rows == a.cols && a.rows <= kMaxDim, "qr square");
  detail::require(out.rows == a.rows && out.cols == a.cols, "qr out dims");
  const int n = a.rows;
  std::array<S, kMaxDim * kMaxDim> r_buf;
  MatView<S> r{r_buf.data(), n, n};
  mat_copy(r, a);
  mat_set_identity(out);  // accumulates Q
  std::array<S, kMaxDim> v;
  using std::sqrt;
  for (int c = 0; c < n; ++c) {
    S norm2 = S(0);
    for (int i = c; i < n; ++i) norm2 += r(i, c) * r(i, c);
    if (!(to_double(norm2) > 0.0))
      throw DegenerateFactorization("qr rank deficient");
    S norm = sqrt(norm2);
    // reflect onto -sign(x0)*norm*e1 for stability
    S alpha = to_double(r(c, c)) >= 0.0 ? S(0) - norm : norm;
    for (int i = c; i < n; ++i) v[i] = r(i, c);
    v[c] -= alpha;
    S vnorm2 = S(0);
    for (int i = c; i < n; ++i) vnorm2 += v[i] * v[i];
    if (to_double(vnorm2) == 0.0) continue;  // column already reduced
    S beta = S(2) / vnorm2;
    for (int j = c; j < n; ++j) {  // R <- (I - beta v v^T) R
      S dot = S(0);
      for (int i = c; i < n; ++i) dot += v[i] * r(i, j);
      S f = beta * dot;
      for (int i = c; i < n; ++i) r(i, j) -= f * v[i];
    }
    for (int j = 0; j < n; ++j) {  // Q <- Q (I - beta v v^T)
      S dot = S(0);
      for (int i = c; i < n; ++i) dot += out(j, i) * v[i];
      S f = beta * dot;
      for (int i = c; i < n; ++i) out(j, i) -= f * v[i];
    }
  }
  // flip columns so that diag(R) >= 0
  for (int c = 0; c < n; ++c) {
    if (to_double(r(c, c)) < 0.0)
      for (int i = 0; i < n; ++i) out(i, c) = S(0) - out(i, c);
  }
}

// Owning row-major matrix for sequential-side code and tests.
template <typename S>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), d_(size_t(rows) * cols, S(0)) {
    detail::require(rows >= 1 && cols >= 1 && rows <= kMaxDim && cols <= kMaxDim,
                    "mat dims");
  }
  static Mat identity(int n) {
    Mat m(n, n);
    mat_set_identity(m.view());
    return m;
  }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  S& operator()(int i, int j) { return d_[size_t(i) * cols_ + j]; }
  const S& operator()(int i, int j) const { return d_[size_t(i) * cols_ + j]; }
  MatView<S> view() { return {d_.data(), rows_, cols_}; }
  CMatView<S> view() const { return {d_.data(), rows_, cols_}; }
  operator MatView<S>() { return view(); }
  operator CMatView<S>() const { return view(); }
  S* data() { return d_.data(); }
  const S* data() const { return d_.data(); }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<S> d_;
};

template <typename S>
class Vec {
 public:
  Vec() = default;
  explicit Vec(int len) : d_(size_t(len), S(0)) {
    detail::require(len >= 1, "vec len");
  }
  int len() const { return int(d_.size()); }
  S& operator[](int i) { return d_[size_t(i)]; }
  const S& operator[](int i) const { return d_[size_t(i)]; }
  // column view
  MatView<S> view() { return {d_.data(), len(), 1}; }
  CMatView<S> view() const { return {d_.data(), len(), 1}; }
  operator MatView<S>() { return view(); }
  operator CMatView<S>() const { return view(); }

 private:
  std::vector<S> d_;
};

}  // namespace parascan
