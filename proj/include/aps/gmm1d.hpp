#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "aps/error.hpp"

namespace aps {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Two-component 1-D Gaussian mixture. After fitting, component 1 has the
/// lower mean.
template <typename Scalar>
struct Gmm2 {
  Scalar w1 = Scalar(0.5);
  Scalar w2 = Scalar(0.5);
  Scalar mu1 = Scalar(0);
  Scalar mu2 = Scalar(1);
  Scalar var1 = Scalar(1);
  Scalar var2 = Scalar(1);
};

struct EmOptions {
  int max_iter = 100;
  double tol = 1e-6;
  double var_floor = 1e-8;
};

template <typename Scalar>
struct EmTrace {
  Gmm2<Scalar> model;
  /// Log-likelihood of the initial model, then after every EM iteration.
  std::vector<Scalar> log_likelihood;
  int iterations = 0;
  bool converged = false;
};

template <typename Scalar>
Scalar normal_log_density(Scalar x, Scalar mean, Scalar var) {
  const Scalar d = x - mean;
  return Scalar(-0.5) * (std::log(Scalar(2) * std::numbers::pi_v<Scalar> * var) + d * d / var);
}

namespace detail {

// Per-sample log of the weighted component densities.
template <typename Scalar>
void weighted_log_densities(const Gmm2<Scalar>& m, const ArrayX<Scalar>& x, ArrayX<Scalar>& a, ArrayX<Scalar>& b) {
  const Scalar lw1 = std::log(m.w1);
  const Scalar lw2 = std::log(m.w2);
  a.resize(x.size());
  b.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    a[i] = lw1 + normal_log_density(x[i], m.mu1, m.var1);
    b[i] = lw2 + normal_log_density(x[i], m.mu2, m.var2);
  }
}

template <typename Scalar>
Scalar log_add(Scalar a, Scalar b) {
  const Scalar hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace detail

template <typename Derived>
auto log_likelihood(const Gmm2<typename Derived::Scalar>& model, const Eigen::ArrayBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  const ArrayX<Scalar> x = samples.derived();
  ArrayX<Scalar> a, b;
  detail::weighted_log_densities(model, x, a, b);
  Scalar ll = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) ll += detail::log_add(a[i], b[i]);
  return ll;
}

/// Posterior (r1, r2) per sample; each row sums to one.
template <typename Derived>
auto responsibilities(const Gmm2<typename Derived::Scalar>& model, const Eigen::ArrayBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  const ArrayX<Scalar> x = samples.derived();
  ArrayX<Scalar> a, b;
  detail::weighted_log_densities(model, x, a, b);
  Eigen::Array<Scalar, Eigen::Dynamic, 2> r(x.size(), 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const Scalar lse = detail::log_add(a[i], b[i]);
    r(i, 0) = std::exp(a[i] - lse);
    r(i, 1) = Scalar(1) - r(i, 0);
  }
  return r;
}

/// EM fit from min/max mean initialization, keeping the log-likelihood of
/// every iterate. Samples are sorted first, so the result does not depend on
/// their order.
template <typename Derived>
auto fit_em_traced(const Eigen::ArrayBase<Derived>& samples, const EmOptions& opts = {}) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = samples.size();
  if (n < 2) throw InsufficientDataError("fit_em needs at least 2 samples");
  if (!samples.derived().allFinite()) throw ContractError("fit_em samples must be finite");

  ArrayX<Scalar> x = samples.derived();
  std::sort(x.begin(), x.end());
  const Scalar lo = x[0];
  const Scalar hi = x[n - 1];
  if (!(lo < hi)) throw DegenerateDataError("fit_em samples have zero spread");

  const Scalar floor = static_cast<Scalar>(opts.var_floor);
  const Scalar mean = x.mean();
  const Scalar var = std::max(floor, (x - mean).square().mean());

  EmTrace<Scalar> trace;
  Gmm2<Scalar>& m = trace.model;
  m = {Scalar(0.5), Scalar(0.5), lo, hi, var, var};
  trace.log_likelihood.push_back(log_likelihood(m, x));

  // Keeps weights inside (0, 1) if a component loses all of its mass.
  const Scalar w_min = Scalar(1e-12);
  ArrayX<Scalar> a, b, r1(n), r2(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    detail::weighted_log_densities(m, x, a, b);
    for (Eigen::Index i = 0; i < n; ++i) {
      r1[i] = std::exp(a[i] - detail::log_add(a[i], b[i]));
      r2[i] = Scalar(1) - r1[i];
    }
    const Scalar n1 = r1.sum();
    const Scalar n2 = r2.sum();
    if (n1 <= Scalar(0) || n2 <= Scalar(0)) break;

    Gmm2<Scalar> next;
    next.w1 = std::clamp(n1 / Scalar(n), w_min, Scalar(1) - w_min);
    next.w2 = Scalar(1) - next.w1;
    next.mu1 = (r1 * x).sum() / n1;
    next.mu2 = (r2 * x).sum() / n2;
    next.var1 = std::max(floor, (r1 * (x - next.mu1).square()).sum() / n1);
    next.var2 = std::max(floor, (r2 * (x - next.mu2).square()).sum() / n2);

    m = next;
    ++trace.iterations;
    const Scalar ll = log_likelihood(m, x);
    const Scalar gain = ll - trace.log_likelihood.back();
    trace.log_likelihood.push_back(ll);
    if (gain < static_cast<Scalar>(opts.tol)) {
      trace.converged = true;
      break;
    }
  }

  if (m.mu2 < m.mu1) {
    std::swap(m.w1, m.w2);
    std::swap(m.mu1, m.mu2);
    std::swap(m.var1, m.var2);
  }
  return trace;
}

template <typename Derived>
Gmm2<typename Derived::Scalar> fit_em(const Eigen::ArrayBase<Derived>& samples, const EmOptions& opts = {}) {
  return fit_em_traced(samples, opts).model;
}

inline Gmm2<double> fit_em(const std::vector<double>& samples, const EmOptions& opts = {}) {
  return fit_em(Eigen::Map<const ArrayX<double>>(samples.data(), static_cast<Eigen::Index>(samples.size())), opts);
}

} // namespace aps
