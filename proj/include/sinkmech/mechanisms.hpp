#pragma once

// Deterministic mechanisms: affine maximizers, VCG with Clarke payments, the
// single-sink budget-balanced mechanism, and the adversarial profiles that
// drive their worst-case inefficiency.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "sinkmech/core.hpp"

namespace sinkmech {

/// argmax_a ( sum_i w_i v_i(a) + offset(a) ); neutral when the offset is zero.
template <Scalar T>
struct AffineMaximizer {
  std::vector<T> weights;
  std::vector<T> offset;

  AffineMaximizer(std::vector<T> w, std::vector<T> kappa) : weights(std::move(w)), offset(std::move(kappa)) {
    bool any_positive = false;
    for (const T& x : weights) {
      if (x < T(0)) throw ArgumentError("affine maximizer weights must be nonnegative");
      any_positive = any_positive || x > T(0);
    }
    if (!any_positive) throw ArgumentError("affine maximizer weights must not all be zero");
  }

  static AffineMaximizer neutral(std::vector<T> w, std::size_t alternatives) {
    return AffineMaximizer(std::move(w), std::vector<T>(alternatives, T(0)));
  }

  bool is_neutral() const {
    return std::all_of(offset.begin(), offset.end(), [](const T& x) { return x == T(0); });
  }

  T score(const ValuationProfile<T>& profile, std::size_t a) const {
    T s = offset[a];
    for (std::size_t i = 0; i < profile.agents(); ++i) s += weights[i] * profile.value(i, a);
    return s;
  }
};

template <Scalar T>
Alternative affine_maximizer_choose(const AffineMaximizer<T>& am, const ValuationProfile<T>& profile) {
  if (am.weights.size() != profile.agents()) throw ArgumentError("weight vector length must equal n");
  if (am.offset.size() != profile.alternatives()) throw ArgumentError("offset vector length must equal m");
  std::size_t best = 0;
  T best_score = am.score(profile, 0);
  for (std::size_t a = 1; a < profile.alternatives(); ++a) {
    T s = am.score(profile, a);
    if (s > best_score) {
      best_score = s;
      best = a;
    }
  }
  return Alternative{best};
}

/// Clarke payments for the agents outside `excluded`, given the chosen
/// alternative: each pays the others' best welfare without her minus the
/// others' welfare at `chosen`. Excluded agents get 0.
template <Scalar T>
std::vector<T> clarke_payments(const ValuationProfile<T>& profile, const AgentSet& excluded, Alternative chosen) {
  std::vector<T> payments(profile.agents(), T(0));
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    if (excluded.contains(i)) continue;
    AgentSet without_i = excluded;
    without_i.insert(i);
    if (without_i.size() == profile.agents()) continue;  // nobody else: no externality
    const Alternative best = efficient_alternative(profile, without_i);
    payments[i] = partial_welfare(profile, best, without_i) - partial_welfare(profile, chosen, without_i);
  }
  return payments;
}

template <Scalar T>
Outcome<T> vcg(const ValuationProfile<T>& profile) {
  const Alternative chosen = efficient_alternative(profile);
  return Outcome<T>{chosen, clarke_payments(profile, {}, chosen)};
}

struct SinkSpec {
  std::size_t sink = 0;
};

/// Efficient choice for everyone but the sink, Clarke payments computed in
/// the world without the sink, and the surplus handed to the sink.
template <Scalar T>
Outcome<T> single_sink(SinkSpec spec, const ValuationProfile<T>& profile) {
  if (profile.agents() < 2) throw ArgumentError("single-sink mechanism needs at least two agents");
  if (spec.sink >= profile.agents()) throw ArgumentError("sink index out of range");
  const AgentSet excluded{spec.sink};
  const Alternative chosen = efficient_alternative(profile, excluded);
  auto payments = clarke_payments(profile, excluded, chosen);
  T collected(0);
  for (const T& p : payments) collected += p;
  payments[spec.sink] = -collected;
  return Outcome<T>{chosen, std::move(payments)};
}

template <Scalar T>
Mechanism<T> vcg_mechanism() {
  return deterministic_mechanism<T>("vcg", [](const ValuationProfile<T>& v) { return vcg(v); });
}

template <Scalar T>
Mechanism<T> single_sink_mechanism(std::size_t sink) {
  return deterministic_mechanism<T>("single-sink-" + std::to_string(sink + 1),
                                    [sink](const ValuationProfile<T>& v) { return single_sink(SinkSpec{sink}, v); });
}

/// Always picks the first alternative, no payments.
template <Scalar T>
Mechanism<T> constant_mechanism() {
  return deterministic_mechanism<T>("constant", [](const ValuationProfile<T>& v) {
    return Outcome<T>{Alternative{0}, std::vector<T>(v.agents(), T(0))};
  });
}

/// Profile on which the single-sink mechanism loses almost M of welfare:
/// the sink strongly prefers the first alternative while everyone else
/// mildly prefers the second. `margin` keeps every value strictly inside
/// (-M/2, M/2); the resulting loss is M - 5/2 * margin.
template <Scalar T>
ValuationProfile<T> worst_case_profile_single_sink(std::size_t agents, std::size_t alternatives, const T& range,
                                                   const T& margin, std::size_t sink = 0) {
  if (agents < 2 || alternatives < 2) throw ArgumentError("need n >= 2 and m >= 2");
  if (sink >= agents) throw ArgumentError("sink index out of range");
  if (!(margin > T(0))) throw ArgumentError("margin must be positive");
  if (!(margin < range / 4)) throw ArgumentError("margin must be below M/4");
  const T half = range / 2;
  // Non-sink margin shrinks with n so their combined tilt stays margin / 2.
  const T eps = margin / T(static_cast<long>(agents - 1));
  std::vector<T> values(agents * alternatives);
  for (std::size_t i = 0; i < agents; ++i) {
    for (std::size_t a = 0; a < alternatives; ++a) {
      T& v = values[i * alternatives + a];
      if (i == sink) {
        v = a == 0 ? T(half - margin) : T(-half + margin);
      } else {
        v = a == 1 ? T(-half + eps) : T(-half + eps / 2);
      }
    }
  }
  return ValuationProfile<T>(agents, alternatives, range, std::move(values));
}

/// Weighted affine maximizer with agent 0 as sink (weight 0), agents 1 and 2
/// weighted `w_high` and `w_low`, everyone else weight 1.
template <Scalar T>
AffineMaximizer<T> sink_affine_maximizer(std::size_t agents, std::size_t alternatives, const T& w_high,
                                         const T& w_low) {
  if (agents < 3) throw ArgumentError("need at least three agents");
  std::vector<T> w(agents, T(1));
  w[0] = T(0);
  w[1] = w_high;
  w[2] = w_low;
  return AffineMaximizer<T>::neutral(std::move(w), alternatives);
}

/// Profile on which `sink_affine_maximizer(n, m, w_high, w_low)` loses more
/// than M when w_high > w_low: it picks the first alternative while the
/// second is efficient by M + (1 - w_low / w_high) M - 5/2 * margin.
template <Scalar T>
ValuationProfile<T> unequal_weights_counterexample(std::size_t agents, std::size_t alternatives, const T& range,
                                                   const T& w_high, const T& w_low, const T& margin) {
  if (agents < 3 || alternatives < 2) throw ArgumentError("need n >= 3 and m >= 2");
  if (!(w_low > T(0)) || !(w_high > w_low)) throw ArgumentError("need w_high > w_low > 0");
  if (!(margin > T(0))) throw ArgumentError("margin must be positive");
  const T half = range / 2;
  const T ratio = w_low / w_high;
  const T low_pad = margin / 4;  // keeps the first alternative strictly ahead in weighted score
  if (!(ratio * range + margin < range) || !(margin < range / 4)) {
    throw ArgumentError("margin too large for this weight ratio");
  }
  std::vector<T> values(agents * alternatives, T(-half + low_pad / 2));
  auto at = [&](std::size_t i, std::size_t a) -> T& { return values[i * alternatives + a]; };
  at(0, 0) = -half + low_pad;
  at(0, 1) = half - margin;
  at(1, 0) = half - margin;
  at(1, 1) = half - ratio * range - margin;
  at(2, 0) = -half + low_pad;
  at(2, 1) = half - margin;
  for (std::size_t i = 3; i < agents; ++i) {
    at(i, 0) = T(0);
    at(i, 1) = T(0);
  }
  return ValuationProfile<T>(agents, alternatives, range, std::move(values));
}

}  // namespace sinkmech
