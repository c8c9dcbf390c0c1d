#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace pwap {

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using BlockOperator = std::function<DenseMatrix<Scalar>(const DenseMatrix<Scalar>&)>;

template <class Scalar>
struct EigenResult {
  Eigen::VectorXd values;
  DenseMatrix<Scalar> vectors;
  Eigen::VectorXd residuals;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

template <class Scalar>
Scalar random_scalar(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  if constexpr (std::is_same_v<Scalar, double>) {
    return n(rng);
  } else {
    const double re = n(rng);
    return Scalar(re, n(rng));
  }
}

template <class Scalar>
DenseMatrix<Scalar> random_block(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  DenseMatrix<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = random_scalar<Scalar>(rng);
  return m;
}

// Coefficients C such that S C has orthonormal columns spanning the
// numerically nonsingular part of span(S) (SVQB, one pass).
template <class Scalar>
DenseMatrix<Scalar> svqb(const DenseMatrix<Scalar>& s, double drop) {
  DenseMatrix<Scalar> gram = s.adjoint() * s;
  gram = (0.5 * (gram + gram.adjoint())).eval();
  const Eigen::Index k = gram.rows();
  Eigen::VectorXd d(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double g = std::real(gram(i, i));
    d[i] = g > 0.0 ? 1.0 / std::sqrt(g) : 0.0;
  }
  const DenseMatrix<Scalar> scaled = d.asDiagonal() * gram * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> eig(scaled);
  const Eigen::VectorXd theta = eig.eigenvalues();
  const double top = theta.size() ? theta.maxCoeff() : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    if (theta[i] > drop * top && theta[i] > 0.0) keep.push_back(i);
  DenseMatrix<Scalar> c(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j)
    c.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(keep[j]) / std::sqrt(theta[keep[j]]);
  return d.asDiagonal() * c;
}

template <class Scalar>
DenseMatrix<Scalar> orthonormalize(const DenseMatrix<Scalar>& s, double drop = 1e-13) {
  DenseMatrix<Scalar> c = svqb<Scalar>(s, drop);
  const DenseMatrix<Scalar> once = s * c;
  return c * svqb<Scalar>(once, drop);
}

template <class Scalar>
DenseMatrix<Scalar> select_columns(const DenseMatrix<Scalar>& m, const std::vector<Eigen::Index>& cols) {
  DenseMatrix<Scalar> out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
  return out;
}

template <class Scalar>
DenseMatrix<Scalar> hconcat(std::initializer_list<const DenseMatrix<Scalar>*> parts, Eigen::Index rows) {
  Eigen::Index cols = 0;
  for (auto* p : parts) cols += p->cols();
  DenseMatrix<Scalar> out(rows, cols);
  Eigen::Index at = 0;
  for (auto* p : parts) {
    if (p->cols() == 0) continue;
    out.middleCols(at, p->cols()) = *p;
    at += p->cols();
  }
  return out;
}

}  // namespace detail

// Lowest eigenpairs of a Hermitian operator by block LOBPCG (SVQB
// orthonormalization, soft locking). The block size is x0.cols(); only the
// first nev pairs must reach ||A x - lambda x|| <= tol. When `project` is
// given, iterates are confined to its range (it must commute with A).
// Small problems (3 * block >= dimension) are diagonalized densely.
template <class Scalar>
EigenResult<Scalar> lobpcg(const BlockOperator<Scalar>& apply, DenseMatrix<Scalar> x0, int nev,
                           double tol, int max_iterations,
                           const BlockOperator<Scalar>& precondition = nullptr,
                           const BlockOperator<Scalar>& project = nullptr,
                           std::uint64_t seed = 7) {
  using Mat = DenseMatrix<Scalar>;
  const Eigen::Index n = x0.rows();
  const Eigen::Index m = x0.cols();
  if (nev < 1 || nev > m) throw std::invalid_argument("lobpcg: need 1 <= nev <= block size");
  std::mt19937_64 rng(seed);
  EigenResult<Scalar> result;

  auto residuals_of = [](const Mat& x, const Mat& ax, const Eigen::VectorXd& lam) {
    return (ax - x * lam.asDiagonal()).colwise().norm().transpose().eval();
  };

  if (3 * m >= n) {
    Mat q = Mat::Identity(n, n);
    if (project) q = project(q);
    q = (q * detail::orthonormalize<Scalar>(q, 1e-10)).eval();
    const Mat aq = apply(q);
    Mat h = q.adjoint() * aq;
    h = (0.5 * (h + h.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat> eig(h);
    const Eigen::Index k = std::min<Eigen::Index>(m, q.cols());
    if (k < nev) throw std::invalid_argument("lobpcg: constrained space smaller than nev");
    result.values = eig.eigenvalues().head(k);
    result.vectors = q * eig.eigenvectors().leftCols(k);
    result.residuals = residuals_of(result.vectors, aq * eig.eigenvectors().leftCols(k), result.values);
    result.converged = true;
    return result;
  }

  Mat x = project ? project(x0) : x0;
  {
    Mat c = detail::orthonormalize<Scalar>(x);
    x = (x * c).eval();
    while (x.cols() < m) {
      Mat extra = detail::random_block<Scalar>(n, m - x.cols(), rng);
      if (project) extra = project(extra);
      Mat s = detail::hconcat<Scalar>({&x, &extra}, n);
      x = (s * detail::orthonormalize<Scalar>(s)).eval();
    }
    x.conservativeResize(Eigen::NoChange, m);
  }
  Mat ax = apply(x);
  Eigen::VectorXd lam;
  {
    Mat h = x.adjoint() * ax;
    h = (0.5 * (h + h.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat> eig(h);
    lam = eig.eigenvalues();
    x = (x * eig.eigenvectors()).eval();
    ax = (ax * eig.eigenvectors()).eval();
  }
  Mat p(n, 0), ap(n, 0);
  int since_refresh = 0;

  for (int it = 0; it <= max_iterations; ++it) {
    Eigen::VectorXd res = residuals_of(x, ax, lam);
    bool done = res.head(nev).maxCoeff() <= tol;
    if (done || since_refresh >= 20) {
      // Recursively updated X and A X drift; rebuild them and confirm.
      x = (x * detail::orthonormalize<Scalar>(x)).eval();
      x.conservativeResize(Eigen::NoChange, m);
      ax = apply(x);
      Mat h = x.adjoint() * ax;
      h = (0.5 * (h + h.adjoint())).eval();
      Eigen::SelfAdjointEigenSolver<Mat> eig(h);
      lam = eig.eigenvalues();
      x = (x * eig.eigenvectors()).eval();
      ax = (ax * eig.eigenvectors()).eval();
      res = residuals_of(x, ax, lam);
      done = res.head(nev).maxCoeff() <= tol;
      since_refresh = 0;
    }
    result.iterations = it;
    if (done || it == max_iterations) {
      result.values = lam;
      result.vectors = x;
      result.residuals = res;
      result.converged = done;
      return result;
    }

    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < m; ++i)
      if (res[i] > tol) active.push_back(i);
    Mat w = detail::select_columns<Scalar>(ax - x * lam.asDiagonal(), active);
    if (precondition) w = precondition(w);
    if (project) w = project(w);
    for (int pass = 0; pass < 2; ++pass) w -= x * (x.adjoint() * w);
    Mat aw = apply(w);
    if (p.cols() > 0) {
      const Mat xp = x.adjoint() * p;
      p -= x * xp;
      ap -= ax * xp;
    }

    // Search directions orthogonal to X; the Ritz update below only ever
    // forms linear combinations of (v, A v) pairs, so P and A P stay
    // consistent without cancellation.
    Mat d = detail::hconcat<Scalar>({&w, &p}, n);
    Mat ad = detail::hconcat<Scalar>({&aw, &ap}, n);
    Mat c = detail::orthonormalize<Scalar>(d);
    if (c.cols() == 0) {
      d = detail::random_block<Scalar>(n, m, rng);
      if (project) d = project(d);
      for (int pass = 0; pass < 2; ++pass) d -= x * (x.adjoint() * d);
      ad = apply(d);
      c = detail::orthonormalize<Scalar>(d);
    }
    d = (d * c).eval();
    ad = (ad * c).eval();
    for (int pass = 0; pass < 2; ++pass) {
      const Mat xd = x.adjoint() * d;
      d -= x * xd;
      ad -= ax * xd;
    }

    const Eigen::Index k = d.cols();
    Mat h(m + k, m + k);
    h.topLeftCorner(m, m) = x.adjoint() * ax;
    h.topRightCorner(m, k) = x.adjoint() * ad;
    h.bottomLeftCorner(k, m) = h.topRightCorner(m, k).adjoint();
    h.bottomRightCorner(k, k) = d.adjoint() * ad;
    h = (0.5 * (h + h.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Mat> eig(h);
    const Mat y = eig.eigenvectors().leftCols(m);
    p = d * y.bottomRows(k);
    ap = ad * y.bottomRows(k);
    x = (x * y.topRows(m) + p).eval();
    ax = (ax * y.topRows(m) + ap).eval();
    lam = eig.eigenvalues().head(m);
    ++since_refresh;
  }
  return result;
}

}  // namespace pwap
