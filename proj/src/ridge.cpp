#include "tsckit/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

namespace tsckit {

std::vector<double> default_ridge_lambdas() {
  std::vector<double> out(10);
  for (int i = 0; i < 10; ++i) out[i] = std::pow(10.0, -3.0 + 6.0 * double(i) / 9.0);
  return out;
}

namespace {

struct EigenBasis {
  // Working matrix factored as either X X^T (dual) or X^T X (primal).
  bool dual = false;
  Eigen::VectorXd eigs;  // ascending, clamped at 0
  Eigen::MatrixXd proj;  // dual: U^T Y (n x C); primal: V^T X^T Y (q x C)
  Eigen::MatrixXd vecs;  // eigenvectors
  double y_sq = 0.0;     // ||Y||^2, primal residual bookkeeping
  double tol = 0.0;      // eigenvalues <= tol are treated as exact zeros
};

// GCV(lambda) = (RSS/n) / (1 - df/n)^2 with df the effective degrees of
// freedom; returns +inf when df reaches n (interpolating fit).
double gcv_score(const EigenBasis& eb, double lambda, std::size_t n) {
  double rss = eb.dual ? 0.0 : eb.y_sq;
  double df = 0.0;
  for (Eigen::Index i = 0; i < eb.eigs.size(); ++i) {
    const double d = eb.eigs[i];
    const bool zero_mode = d <= eb.tol;
    double row_sq = 0.0;
    for (Eigen::Index c = 0; c < eb.proj.cols(); ++c) row_sq += eb.proj(i, c) * eb.proj(i, c);
    if (eb.dual) {
      const double shrink = zero_mode ? 1.0 : lambda / (d + lambda);  // residual factor per mode
      rss += shrink * shrink * row_sq;
      df += zero_mode ? 0.0 : d / (d + lambda);
    } else {
      if (!zero_mode) {
        const double inv = 1.0 / (d + lambda);
        rss += row_sq * (d * inv * inv - 2.0 * inv);
        df += d * inv;
      }
    }
  }
  rss = std::max(rss, 0.0);
  const double denom = 1.0 - df / double(n);
  if (denom <= 1e-12) return std::numeric_limits<double>::infinity();
  return (rss / double(n)) / (denom * denom);
}

}  // namespace

RidgeModel ridge_fit(const FeatureMatrix& Z, const std::vector<uint32_t>& y, const RidgeOptions& opts) {
  const std::size_t n = Z.rows;
  const std::size_t q = Z.cols;
  if (n < 2) throw std::runtime_error("ridge_fit requires at least 2 training instances");
  if (y.size() != n) throw std::runtime_error("ridge_fit: label count does not match feature rows");
  uint32_t C = 0;
  for (uint32_t label : y) C = std::max(C, label + 1);
  bool single_class = true;
  for (uint32_t label : y)
    if (label != y[0]) { single_class = false; break; }
  if (C < 2 || single_class) throw std::runtime_error("ridge_fit requires at least 2 distinct classes");
  std::vector<double> lambdas = opts.lambdas.empty() ? default_ridge_lambdas() : opts.lambdas;
  for (double lam : lambdas)
    if (!(lam >= 0.0)) throw std::runtime_error("ridge_fit: lambda candidates must be >= 0");

  RidgeModel m;
  m.q = static_cast<uint32_t>(q);
  m.C = C;
  m.mean.assign(q, 0.0);
  m.scale.assign(q, 1.0);

  Eigen::MatrixXd X(n, q);
  bool finite = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double* src = Z.row(i);
    for (std::size_t j = 0; j < q; ++j) {
      X(Eigen::Index(i), Eigen::Index(j)) = src[j];
      finite = finite && std::isfinite(src[j]);
    }
  }
  if (!finite) throw std::runtime_error("ridge_fit: non-finite feature value");

  if (opts.standardize) {
    for (std::size_t j = 0; j < q; ++j) {
      const double mu = X.col(Eigen::Index(j)).mean();
      X.col(Eigen::Index(j)).array() -= mu;
      const double sd = std::sqrt(X.col(Eigen::Index(j)).squaredNorm() / double(n));
      const double sc = sd > 1e-12 ? sd : 1.0;
      X.col(Eigen::Index(j)) /= sc;
      m.mean[j] = mu;
      m.scale[j] = sc;
    }
  }

  Eigen::MatrixXd Y(n, C);
  for (std::size_t i = 0; i < n; ++i)
    for (uint32_t c = 0; c < C; ++c) Y(Eigen::Index(i), Eigen::Index(c)) = y[i] == c ? 1.0 : -1.0;

  Eigen::RowVectorXd x_center = Eigen::RowVectorXd::Zero(q);
  Eigen::RowVectorXd y_center = Eigen::RowVectorXd::Zero(C);
  if (opts.fit_intercept) {
    x_center = X.colwise().mean();
    y_center = Y.colwise().mean();
    X.rowwise() -= x_center;
    Y.rowwise() -= y_center;
  }

  EigenBasis eb;
  eb.dual = n <= q;
  {
    Eigen::MatrixXd gram = eb.dual ? Eigen::MatrixXd(X * X.transpose()) : Eigen::MatrixXd(X.transpose() * X);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw std::runtime_error("ridge_fit: eigendecomposition failed");
    eb.eigs = solver.eigenvalues().cwiseMax(0.0);
    eb.vecs = solver.eigenvectors();
  }
  const double top = eb.eigs.size() > 0 ? eb.eigs[eb.eigs.size() - 1] : 0.0;
  eb.tol = top * double(std::max(n, q)) * std::numeric_limits<double>::epsilon();
  eb.proj = eb.dual ? Eigen::MatrixXd(eb.vecs.transpose() * Y) : Eigen::MatrixXd(eb.vecs.transpose() * (X.transpose() * Y));
  eb.y_sq = Y.squaredNorm();

  double best_lambda = lambdas[0];
  double best_score = std::numeric_limits<double>::infinity();
  for (double lam : lambdas) {
    const double score = gcv_score(eb, lam, n);
    if (score < best_score) {
      best_score = score;
      best_lambda = lam;
    }
  }
  m.lambda = best_lambda;

  // beta from the same eigenbasis: dual beta = X^T U diag(inv) U^T Y,
  // primal beta = V diag(inv) V^T X^T Y; zero modes use the pseudo-inverse.
  Eigen::VectorXd inv(eb.eigs.size());
  for (Eigen::Index i = 0; i < eb.eigs.size(); ++i) {
    const double d = eb.eigs[i];
    if (d <= eb.tol)
      inv[i] = best_lambda > 0.0 ? (eb.dual ? 1.0 / best_lambda : 0.0) : 0.0;
    else
      inv[i] = 1.0 / (d + best_lambda);
  }
  Eigen::MatrixXd beta;
  if (eb.dual)
    beta = X.transpose() * (eb.vecs * (inv.asDiagonal() * eb.proj));
  else
    beta = eb.vecs * (inv.asDiagonal() * eb.proj);

  m.beta = FeatureMatrix(q, C);
  for (std::size_t j = 0; j < q; ++j)
    for (uint32_t c = 0; c < C; ++c) m.beta.at(j, c) = beta(Eigen::Index(j), Eigen::Index(c));
  m.intercept.assign(C, 0.0);
  if (opts.fit_intercept) {
    const Eigen::RowVectorXd b = y_center - x_center * beta;
    for (uint32_t c = 0; c < C; ++c) m.intercept[c] = b[c];
  }
  return m;
}

FeatureMatrix ridge_scores(const RidgeModel& m, const FeatureMatrix& Z) {
  if (Z.cols != m.q)
    throw std::runtime_error("ridge_scores: feature count " + std::to_string(Z.cols) + " does not match model (q=" +
                             std::to_string(m.q) + ")");
  FeatureMatrix out(Z.rows, m.C);
  std::vector<double> zs(m.q);
  for (std::size_t i = 0; i < Z.rows; ++i) {
    const double* src = Z.row(i);
    for (std::size_t j = 0; j < m.q; ++j) zs[j] = (src[j] - m.mean[j]) / m.scale[j];
    double* dst = out.row(i);
    for (uint32_t c = 0; c < m.C; ++c) {
      double s = m.intercept[c];
      for (std::size_t j = 0; j < m.q; ++j) s += zs[j] * m.beta.at(j, c);
      dst[c] = s;
    }
  }
  return out;
}

std::vector<uint32_t> ridge_predict(const RidgeModel& m, const FeatureMatrix& Z) {
  return argmax_rows(ridge_scores(m, Z));
}

static constexpr char kRidgeMagic[] = "RIDG";
static constexpr uint32_t kRidgeVersion = 1;

void ridge_save(const RidgeModel& m, BlobWriter& w) {
  w.magic(kRidgeMagic);
  w.u32(kRidgeVersion);
  w.u32(m.q);
  w.u32(m.C);
  w.f64(m.lambda);
  w.vec(m.mean);
  w.vec(m.scale);
  w.vec(m.beta.data);
  w.vec(m.intercept);
}

RidgeModel ridge_load(BlobReader& r) {
  r.expect_magic(kRidgeMagic);
  const uint32_t version = r.u32();
  if (version != kRidgeVersion) throw std::runtime_error("unsupported ridge model version " + std::to_string(version));
  RidgeModel m;
  m.q = r.u32();
  m.C = r.u32();
  m.lambda = r.f64();
  m.mean = r.vec<double>();
  m.scale = r.vec<double>();
  m.beta.rows = m.q;
  m.beta.cols = m.C;
  m.beta.data = r.vec<double>();
  m.intercept = r.vec<double>();
  if (m.mean.size() != m.q || m.scale.size() != m.q || m.beta.data.size() != std::size_t(m.q) * m.C ||
      m.intercept.size() != m.C)
    throw std::runtime_error("ridge model blob has inconsistent sizes");
  return m;
}

}  // namespace tsckit
