#pragma once

#include <cmath>
#include <string>

#include <Eigen/Core>

#include "aps/error.hpp"

namespace aps {

template <typename Scalar>
using ScoreArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Numerically stable softmax over the whole array.
template <typename Derived>
ScoreArray<typename Derived::Scalar> softmax(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  if (x.size() == 0) return ScoreArray<Scalar>();
  const ScoreArray<Scalar> e = (x - x.maxCoeff()).exp();
  return e / e.sum();
}

namespace detail {

template <typename A, typename B>
void require_same_length(const Eigen::ArrayBase<A>& a, const Eigen::ArrayBase<B>& b, const char* op) {
  if (a.size() != b.size()) throw ContractError(std::string(op) + ": loss vectors differ in length");
  if (!a.allFinite() || !b.allFinite()) throw ContractError(std::string(op) + ": losses must be finite");
}

} // namespace detail

/// Unfitness: mean of the per-task softmax distributions over candidates.
template <typename A, typename B>
ScoreArray<typename A::Scalar> unfitness_scores(const Eigen::ArrayBase<A>& cls, const Eigen::ArrayBase<B>& reg) {
  detail::require_same_length(cls, reg, "unfitness_scores");
  if (cls.size() == 0) throw ContractError("unfitness_scores: need at least one candidate");
  return (softmax(cls) + softmax(reg)) / typename A::Scalar(2);
}

/// Misalignment: logistic of the absolute per-candidate loss difference, in [0.5, 1).
template <typename A, typename B>
ScoreArray<typename A::Scalar> misalignment_scores(const Eigen::ArrayBase<A>& cls, const Eigen::ArrayBase<B>& reg) {
  using Scalar = typename A::Scalar;
  detail::require_same_length(cls, reg, "misalignment_scores");
  return Scalar(1) / (Scalar(1) + (-(cls - reg).abs()).exp());
}

template <typename A, typename B>
ScoreArray<typename A::Scalar> combined_scores(const Eigen::ArrayBase<A>& s_u, const Eigen::ArrayBase<B>& s_m) {
  using Scalar = typename A::Scalar;
  if (s_u.size() != s_m.size()) throw ContractError("combined_scores: score vectors differ in length");
  if ((s_u < Scalar(0)).any() || (s_m < Scalar(0)).any())
    throw ContractError("combined_scores: scores must be non-negative");
  return (s_u * s_m).sqrt();
}

} // namespace aps
