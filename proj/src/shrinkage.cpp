#include "volcast/shrinkage.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "volcast/error.hpp"

namespace volcast {

std::string_view to_string(PenaltyKind k) noexcept {
  switch (k) {
    case PenaltyKind::None: return "ols";
    case PenaltyKind::Lasso: return "lasso";
    case PenaltyKind::AdaptiveLasso: return "alasso";
    case PenaltyKind::ElasticNet: return "enet";
  }
  return "?";
}

PenaltyKind parse_penalty(std::string_view text) {
  std::string s;
  for (char c : text) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s == "ols" || s == "none") return PenaltyKind::None;
  if (s == "lasso") return PenaltyKind::Lasso;
  if (s == "alasso" || s == "adaptive" || s == "adaptive-lasso") return PenaltyKind::AdaptiveLasso;
  if (s == "enet" || s == "elastic" || s == "elastic-net") return PenaltyKind::ElasticNet;
  throw Error(ErrorCode::InvalidConfig, "unknown penalty '" + std::string(text) + "'");
}

void PenaltySpec::validate(std::size_t p) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorCode::InvalidConfig, "lambda must be finite and >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw Error(ErrorCode::InvalidConfig, "eta must lie in [0,1]");
  if (!(gamma > 0.0) || !std::isfinite(gamma))
    throw Error(ErrorCode::InvalidConfig, "gamma must be > 0");
  if (weights.size() != 0) {
    if (static_cast<std::size_t>(weights.size()) != p)
      throw Error(ErrorCode::InvalidConfig, "penalty weights have length " +
                                                std::to_string(weights.size()) + ", expected " +
                                                std::to_string(p));
    for (Eigen::Index j = 0; j < weights.size(); ++j)
      if (!std::isfinite(weights(j)) || weights(j) < 0.0)
        throw Error(ErrorCode::InvalidConfig, "penalty weights must be finite and >= 0");
  }
}

double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& X,
                    const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (X.rows() != y.size())
    throw Error(ErrorCode::InvalidConfig, "design has " + std::to_string(X.rows()) +
                                              " rows but target has " + std::to_string(y.size()));
  if (X.rows() == 0) throw Error(ErrorCode::TooFewRows, "no observations");
  if (!X.allFinite() || !y.allFinite())
    throw Error(ErrorCode::NonFiniteInput, "design or target contains NaN/Inf");
}

// Centered cross products scaled by 1/T. The intercept is profiled out.
struct Gram {
  Eigen::MatrixXd G;
  Eigen::VectorXd c;
  Eigen::VectorXd xbar;
  double ybar = 0.0;
  double y_scale = 1.0;
  double T = 0.0;
};

Gram make_gram(const Eigen::Ref<const Eigen::MatrixXd>& X,
               const Eigen::Ref<const Eigen::VectorXd>& y, bool intercept = true) {
  Gram g;
  g.T = static_cast<double>(X.rows());
  if (intercept) {
    g.xbar = X.colwise().mean().transpose();
    g.ybar = y.mean();
  } else {
    g.xbar = Eigen::VectorXd::Zero(X.cols());
  }
  const Eigen::MatrixXd Xc = X.rowwise() - g.xbar.transpose();
  const Eigen::VectorXd yc = y.array() - g.ybar;
  g.G = (Xc.transpose() * Xc) / g.T;
  g.c = (Xc.transpose() * yc) / g.T;
  const double sd = std::sqrt(yc.squaredNorm() / g.T);
  g.y_scale = sd > 0.0 ? sd : 1.0;
  return g;
}

// Condition number of the correlation-scaled Gram matrix; infinite when a
// column has no variation.
double scaled_condition(const Eigen::MatrixXd& G) {
  const Eigen::Index p = G.rows();
  if (p == 0) return 1.0;
  Eigen::VectorXd d(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(G(j, j) > 0.0)) return std::numeric_limits<double>::infinity();
    d(j) = 1.0 / std::sqrt(G(j, j));
  }
  const Eigen::MatrixXd C = d.asDiagonal() * G * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

constexpr double kMaxCondition = 1e12;

Eigen::VectorXd resolved_weights(const PenaltySpec& spec, std::size_t p) {
  if (spec.weights.size() != 0) return spec.weights;
  return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p));
}

struct Solution {
  Eigen::VectorXd beta;
  std::size_t sweeps = 0;
  bool converged = false;
};

class CoordinateSolver {
 public:
  CoordinateSolver(const Gram& gram, const PenaltySpec& spec, const Eigen::VectorXd& weights,
                   const SolverOptions& options)
      : g_(gram), w_(weights), opt_(options) {
    lambda_ = spec.effective_lambda();
    a_ = spec.l1_mix();
    ridge_ = 2.0 * lambda_ * (1.0 - a_);
  }

  Solution solve(Eigen::VectorXd beta) {
    const Eigen::Index p = g_.G.rows();
    Solution sol;
    grad_ = g_.c - g_.G * beta;
    const double tol = opt_.tol * g_.y_scale;
    std::vector<Eigen::Index> last_attempt;
    bool full = true;
    while (sol.sweeps < opt_.max_iter) {
      ++sol.sweeps;
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!full && beta(j) == 0.0) continue;
        max_change = std::max(max_change, update(beta, j));
      }
      if (max_change < tol) {
        if (full) {
          sol.converged = true;
          break;
        }
        full = true;
        continue;
      }
      full = false;
      if (sol.sweeps % 10 == 0) {
        auto active = support(beta);
        if (active == last_attempt && polish(beta, active)) {
          sol.converged = true;
          break;
        }
        last_attempt = std::move(active);
      }
    }
    if (sol.converged) polish(beta, support(beta));
    sol.beta = std::move(beta);
    return sol;
  }

 private:
  double update(Eigen::VectorXd& beta, Eigen::Index j) {
    const double gjj = g_.G(j, j);
    const double denom = gjj + ridge_;
    const double old = beta(j);
    double next = 0.0;
    if (denom > 0.0) next = soft_threshold(grad_(j) + gjj * old, lambda_ * a_ * w_(j)) / denom;
    const double delta = next - old;
    if (delta == 0.0) return 0.0;
    beta(j) = next;
    grad_ -= g_.G.col(j) * delta;
    return std::abs(delta) * std::sqrt(gjj);
  }

  static std::vector<Eigen::Index> support(const Eigen::VectorXd& beta) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
      if (beta(j) != 0.0) s.push_back(j);
    return s;
  }

  // Solves the stationarity equations on a fixed support and sign pattern.
  // Accepted only if the result keeps every sign and leaves the excluded
  // coordinates inside their subgradient bounds.
  bool polish(Eigen::VectorXd& beta, const std::vector<Eigen::Index>& active) {
    const auto k = static_cast<Eigen::Index>(active.size());
    const Eigen::Index p = beta.size();
    Eigen::VectorXd candidate = Eigen::VectorXd::Zero(p);
    if (k > 0) {
      Eigen::MatrixXd M(k, k);
      Eigen::VectorXd rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        const auto ja = active[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b < k; ++b) M(a, b) = g_.G(ja, active[static_cast<std::size_t>(b)]);
        M(a, a) += ridge_;
        const double s = beta(ja) > 0.0 ? 1.0 : -1.0;
        rhs(a) = g_.c(ja) - lambda_ * a_ * w_(ja) * s;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
      const Eigen::VectorXd sol = ldlt.solve(rhs);
      if (!sol.allFinite()) return false;
      for (Eigen::Index a = 0; a < k; ++a) {
        const auto ja = active[static_cast<std::size_t>(a)];
        if (sol(a) == 0.0 || (sol(a) > 0.0) != (beta(ja) > 0.0)) return false;
        candidate(ja) = sol(a);
      }
    }
    const Eigen::VectorXd grad = g_.c - g_.G * candidate;
    const double cmax = p > 0 ? g_.c.cwiseAbs().maxCoeff() : 0.0;
    const double slack = 1e-10 * (cmax + lambda_ + 1e-300);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (candidate(j) != 0.0) continue;
      if (std::abs(grad(j)) > lambda_ * a_ * w_(j) + slack) return false;
    }
    beta = std::move(candidate);
    grad_ = grad;
    return true;
  }

  const Gram& g_;
  const Eigen::VectorXd& w_;
  SolverOptions opt_;
  double lambda_ = 0.0;
  double a_ = 1.0;
  double ridge_ = 0.0;
  Eigen::VectorXd grad_;
};

PenaltySpec with_weights(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y, PenaltySpec spec) {
  if (spec.kind == PenaltyKind::AdaptiveLasso && spec.weights.size() == 0)
    spec.weights = adaptive_weights(pilot_coefficients(X, y), spec.gamma);
  return spec;
}

PenaltyFit finish(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, const Gram& gram,
                  const PenaltySpec& spec, Solution sol) {
  if (!sol.converged)
    throw Error(ErrorCode::NotConverged, "coordinate descent did not converge in " +
                                             std::to_string(sol.sweeps) + " sweeps (lambda " +
                                             std::to_string(spec.lambda) + ")");
  PenaltyFit fit;
  fit.coefficients = std::move(sol.beta);
  fit.intercept = gram.ybar - gram.xbar.dot(fit.coefficients);
  for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j)
    if (fit.coefficients(j) != 0.0) fit.active_set.push_back(static_cast<std::size_t>(j));
  fit.lambda = spec.lambda;
  fit.iterations = sol.sweeps;
  fit.converged = true;
  fit.penalty_weights = spec.weights;
  fit.objective = penalized_objective(X, y, fit.intercept, fit.coefficients, spec);
  return fit;
}

}  // namespace

OlsFit fit_ols(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
               bool intercept) {
  require_finite(X, y);
  const Gram gram = make_gram(X, y, intercept);
  if (X.cols() > 0 && scaled_condition(gram.G) > kMaxCondition)
    throw Error(ErrorCode::SingularDesign, "cross-product matrix is singular or ill-conditioned");
  OlsFit fit;
  fit.coefficients = X.cols() > 0 ? Eigen::VectorXd(gram.G.ldlt().solve(gram.c))
                                  : Eigen::VectorXd(0);
  fit.intercept = intercept ? gram.ybar - gram.xbar.dot(fit.coefficients) : 0.0;
  return fit;
}

double penalty_value(const Eigen::Ref<const Eigen::VectorXd>& beta, const PenaltySpec& spec) {
  const double lambda = spec.effective_lambda();
  if (lambda == 0.0) return 0.0;
  const double a = spec.l1_mix();
  double l1 = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    l1 += spec.weight(static_cast<std::size_t>(j)) * std::abs(beta(j));
  return lambda * (a * l1 + (1.0 - a) * beta.squaredNorm());
}

double penalized_objective(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y, double intercept,
                           const Eigen::Ref<const Eigen::VectorXd>& beta, const PenaltySpec& spec) {
  const Eigen::VectorXd r = (y - X * beta).array() - intercept;
  return r.squaredNorm() / (2.0 * static_cast<double>(X.rows())) + penalty_value(beta, spec);
}

PenaltyFit fit_penalized(const Eigen::Ref<const Eigen::MatrixXd>& X,
                         const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec_in,
                         const SolverOptions& options) {
  require_finite(X, y);
  const auto p = static_cast<std::size_t>(X.cols());
  spec_in.validate(p);
  const PenaltySpec spec = with_weights(X, y, spec_in);
  const Gram gram = make_gram(X, y);
  const Eigen::VectorXd w = resolved_weights(spec, p);
  CoordinateSolver solver(gram, spec, w, options);
  return finish(X, y, gram, spec, solver.solve(Eigen::VectorXd::Zero(X.cols())));
}

std::vector<PenaltyFit> fit_path(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                 const Eigen::Ref<const Eigen::VectorXd>& y, PenaltySpec spec,
                                 const std::vector<double>& grid, const SolverOptions& options) {
  require_finite(X, y);
  const auto p = static_cast<std::size_t>(X.cols());
  spec.validate(p);
  spec = with_weights(X, y, spec);
  const Gram gram = make_gram(X, y);
  const Eigen::VectorXd w = resolved_weights(spec, p);
  std::vector<PenaltyFit> out;
  out.reserve(grid.size());
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(X.cols());
  for (double lambda : grid) {
    spec.lambda = lambda;
    spec.validate(p);
    CoordinateSolver solver(gram, spec, w, options);
    out.push_back(finish(X, y, gram, spec, solver.solve(warm)));
    warm = out.back().coefficients;
  }
  return out;
}

double kkt_violation(const Eigen::Ref<const Eigen::MatrixXd>& X,
                     const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltyFit& fit,
                     const PenaltySpec& spec) {
  const double T = static_cast<double>(X.rows());
  const Eigen::VectorXd r = (y - X * fit.coefficients).array() - fit.intercept;
  const Eigen::VectorXd grad = X.transpose() * r / T;
  const double lambda = spec.effective_lambda();
  const double a = spec.l1_mix();
  const Eigen::VectorXd& w = spec.weights.size() != 0 ? spec.weights : fit.penalty_weights;
  double worst = std::abs(r.mean());
  for (Eigen::Index j = 0; j < grad.size(); ++j) {
    const double wj = w.size() != 0 ? w(j) : 1.0;
    const double bj = fit.coefficients(j);
    double v;
    if (bj != 0.0) {
      const double s = bj > 0.0 ? 1.0 : -1.0;
      v = std::abs(grad(j) - lambda * a * wj * s - 2.0 * lambda * (1.0 - a) * bj);
    } else {
      v = std::max(std::abs(grad(j)) - lambda * a * wj, 0.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

Eigen::VectorXd adaptive_weights(const Eigen::Ref<const Eigen::VectorXd>& pilot, double gamma,
                                 double floor) {
  if (!pilot.allFinite()) throw Error(ErrorCode::NonFiniteInput, "pilot coefficients not finite");
  Eigen::VectorXd w(pilot.size());
  for (Eigen::Index j = 0; j < pilot.size(); ++j)
    w(j) = 1.0 / std::pow(std::max(std::abs(pilot(j)), floor), gamma);
  return w;
}

Eigen::VectorXd pilot_coefficients(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  require_finite(X, y);
  const Gram gram = make_gram(X, y);
  const double T = static_cast<double>(X.rows());
  if (static_cast<double>(X.cols()) < 0.9 * T && scaled_condition(gram.G) <= kMaxCondition)
    return gram.G.ldlt().solve(gram.c);
  Eigen::MatrixXd M = gram.G;
  M.diagonal().array() += 2.0 * 1e-3;
  return M.ldlt().solve(gram.c);
}

double lambda_max(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec_in) {
  require_finite(X, y);
  const auto p = static_cast<std::size_t>(X.cols());
  spec_in.validate(p);
  const PenaltySpec spec = with_weights(X, y, spec_in);
  const double a = spec.l1_mix();
  if (a == 0.0)
    throw Error(ErrorCode::InvalidConfig, "a pure ridge penalty never zeroes every slope");
  const Gram gram = make_gram(X, y);
  double out = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    const double wj = spec.weight(j);
    if (wj > 0.0) out = std::max(out, std::abs(gram.c(static_cast<Eigen::Index>(j))) / (a * wj));
  }
  return out;
}

std::vector<double> lambda_grid(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec,
                                std::size_t n_grid, double ratio) {
  if (n_grid < 2) throw Error(ErrorCode::InvalidConfig, "lambda grid needs at least 2 points");
  if (!(ratio > 0.0 && ratio < 1.0))
    throw Error(ErrorCode::InvalidConfig, "lambda grid ratio must lie in (0,1)");
  double top = lambda_max(X, y, spec);
  if (!(top > 0.0)) top = std::numeric_limits<double>::min() / ratio;
  std::vector<double> grid(n_grid);
  const double step = std::log(ratio) / static_cast<double>(n_grid - 1);
  for (std::size_t k = 0; k < n_grid; ++k) grid[k] = top * std::exp(step * static_cast<double>(k));
  grid.front() = top;
  grid.back() = top * ratio;
  return grid;
}

std::vector<std::size_t> assign_folds(std::size_t rows, std::size_t folds, FoldScheme scheme,
                                      std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidConfig, "cross-validation needs at least 2 folds");
  if (rows < folds)
    throw Error(ErrorCode::TooFewRows, std::to_string(rows) + " rows cannot fill " +
                                           std::to_string(folds) + " folds");
  std::vector<std::size_t> label(rows);
  const std::size_t base = rows / folds;
  const std::size_t extra = rows % folds;
  std::size_t r = 0;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t size = base + (k < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) label[r++] = k;
  }
  if (scheme == FoldScheme::Shuffled) {
    std::mt19937_64 rng(seed);
    std::shuffle(label.begin(), label.end(), rng);
  }
  return label;
}

CvResult cross_validate(const Eigen::Ref<const Eigen::MatrixXd>& X,
                        const Eigen::Ref<const Eigen::VectorXd>& y, const PenaltySpec& spec,
                        const std::vector<double>& grid, const CvOptions& options) {
  require_finite(X, y);
  if (grid.empty()) throw Error(ErrorCode::InvalidConfig, "empty lambda grid");
  const auto T = static_cast<std::size_t>(X.rows());
  CvResult cv;
  cv.lambda_grid = grid;
  cv.folds = options.folds;
  cv.fold_of_row = assign_folds(T, options.folds, options.scheme, options.seed);
  std::vector<double> sse(grid.size(), 0.0);
  Eigen::MatrixXd fold_mse(options.folds, grid.size());

  for (std::size_t k = 0; k < options.folds; ++k) {
    std::vector<Eigen::Index> train, test;
    for (std::size_t r = 0; r < T; ++r)
      (cv.fold_of_row[r] == k ? test : train).push_back(static_cast<Eigen::Index>(r));
    if (train.empty())
      throw Error(ErrorCode::TooFewRows, "fold " + std::to_string(k) + " leaves no training rows");
    const Eigen::MatrixXd Xtr = X(train, Eigen::all);
    const Eigen::VectorXd ytr = y(train);
    const Eigen::MatrixXd Xte = X(test, Eigen::all);
    const Eigen::VectorXd yte = y(test);
    const auto path = fit_path(Xtr, ytr, spec, grid, options.solver);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const Eigen::VectorXd e = (yte - Xte * path[g].coefficients).array() - path[g].intercept;
      sse[g] += e.squaredNorm();
      fold_mse(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(g)) =
          e.squaredNorm() / static_cast<double>(e.size());
    }
  }

  cv.cv_error.resize(grid.size());
  cv.cv_se.resize(grid.size());
  const double kf = static_cast<double>(options.folds);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    cv.cv_error[g] = sse[g] / static_cast<double>(T);
    const auto col = fold_mse.col(static_cast<Eigen::Index>(g)).array();
    cv.cv_se[g] = std::sqrt((col - col.mean()).square().sum() / (kf - 1.0) / kf);
  }
  // Visit the grid from the largest lambda so that exact ties keep the larger one.
  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
  std::size_t best = order.front();
  for (std::size_t g : order)
    if (cv.cv_error[g] < cv.cv_error[best]) best = g;
  cv.min_index = best;
  if (options.rule == CvRule::OneStandardError) {
    const double cap = cv.cv_error[best] + cv.cv_se[best];
    for (std::size_t g : order)
      if (cv.cv_error[g] <= cap) {
        best = g;
        break;
      }
  }
  cv.chosen_index = best;
  cv.lambda = grid[best];
  return cv;
}

}  // namespace volcast
