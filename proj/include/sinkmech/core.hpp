#pragma once

// Domain types shared by every module: valuation profiles, deterministic
// and randomized outcomes, and the welfare / inefficiency metrics.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sinkmech/errors.hpp"
#include "sinkmech/scalar.hpp"

namespace sinkmech {

struct Alternative {
  std::size_t index = 0;

  friend auto operator<=>(const Alternative&, const Alternative&) = default;
};

using AgentSet = std::set<std::size_t>;

/// n agents' valuations over m alternatives, each in [-M/2, M/2].
template <Scalar T>
class ValuationProfile {
 public:
  ValuationProfile(std::size_t agents, std::size_t alternatives, T range, std::vector<T> values)
      : n_(agents), m_(alternatives), range_(std::move(range)), values_(std::move(values)) {
    if (n_ < 1) throw ArgumentError("profile needs at least one agent");
    if (m_ < 2) throw ArgumentError("profile needs at least two alternatives");
    if (!(range_ > T(0))) throw ArgumentError("valuation range M must be positive");
    if (values_.size() != n_ * m_) throw ArgumentError("profile has wrong number of entries");
    const T half = range_ / 2;
    for (const T& v : values_) {
      if (v > half || v < -half) {
        throw ArgumentError("valuation " + format_scalar(v) + " outside [-M/2, M/2]");
      }
    }
  }

  std::size_t agents() const noexcept { return n_; }
  std::size_t alternatives() const noexcept { return m_; }
  const T& range() const noexcept { return range_; }

  const T& value(std::size_t agent, std::size_t alternative) const {
    return values_[agent * m_ + alternative];
  }

  std::span<const T> row(std::size_t agent) const {
    return std::span<const T>(values_).subspan(agent * m_, m_);
  }

  /// Copy with agent's row replaced (a unilateral misreport).
  ValuationProfile with_row(std::size_t agent, std::span<const T> row) const {
    if (agent >= n_ || row.size() != m_) throw ArgumentError("bad replacement row");
    std::vector<T> values = values_;
    std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(agent * m_));
    return ValuationProfile(n_, m_, range_, std::move(values));
  }

  const std::vector<T>& values() const noexcept { return values_; }

  friend bool operator==(const ValuationProfile& a, const ValuationProfile& b) {
    return a.n_ == b.n_ && a.m_ == b.m_ && a.range_ == b.range_ && a.values_ == b.values_;
  }

 private:
  std::size_t n_;
  std::size_t m_;
  T range_;
  std::vector<T> values_;
};

/// Chosen alternative plus per-agent payments (positive = agent pays).
template <Scalar T>
struct Outcome {
  Alternative alternative;
  std::vector<T> payments;

  T surplus() const {
    T total(0);
    for (const T& p : payments) total += p;
    return total;
  }
};

template <Scalar T>
struct LotteryEntry {
  T probability;
  Outcome<T> outcome;
};

/// Finite mixture of outcomes.
template <Scalar T>
struct RandomizedOutcome {
  std::vector<LotteryEntry<T>> support;

  static RandomizedOutcome certain(Outcome<T> outcome) {
    return RandomizedOutcome{{LotteryEntry<T>{T(1), std::move(outcome)}}};
  }

  /// Probability of each alternative.
  std::vector<T> allocation(std::size_t alternatives) const {
    std::vector<T> probs(alternatives, T(0));
    for (const auto& e : support) probs.at(e.outcome.alternative.index) += e.probability;
    return probs;
  }

  std::vector<T> expected_payments(std::size_t agents) const {
    std::vector<T> pay(agents, T(0));
    for (const auto& e : support) {
      for (std::size_t i = 0; i < agents; ++i) pay[i] += e.probability * e.outcome.payments.at(i);
    }
    return pay;
  }

  /// Throws ContractError unless probabilities are nonnegative and sum to one
  /// (exactly in exact mode, within 1e-12 in float mode).
  void validate(std::size_t agents) const {
    if (support.empty()) throw ContractError("empty lottery");
    T total(0);
    for (const auto& e : support) {
      if (e.probability < T(0)) throw ContractError("negative lottery probability");
      if (e.outcome.payments.size() != agents) throw ContractError("payment vector has wrong length");
      total += e.probability;
    }
    if constexpr (ScalarTraits<T>::exact) {
      if (total != T(1)) throw ContractError("lottery probabilities do not sum to 1");
    } else {
      if (std::abs(total - 1.0) > 1e-12) throw ContractError("lottery probabilities do not sum to 1");
    }
  }
};

/// Uniform profile -> lottery interface; deterministic mechanisms return a
/// single-entry lottery.
template <Scalar T>
struct Mechanism {
  std::string name;
  std::function<RandomizedOutcome<T>(const ValuationProfile<T>&)> evaluate;

  RandomizedOutcome<T> operator()(const ValuationProfile<T>& profile) const { return evaluate(profile); }
};

template <Scalar T>
Mechanism<T> deterministic_mechanism(std::string name,
                                     std::function<Outcome<T>(const ValuationProfile<T>&)> rule) {
  return Mechanism<T>{std::move(name), [rule = std::move(rule)](const ValuationProfile<T>& v) {
                        return RandomizedOutcome<T>::certain(rule(v));
                      }};
}

namespace detail {

template <Scalar T>
void check_alternative(const ValuationProfile<T>& profile, Alternative a) {
  if (a.index >= profile.alternatives()) {
    throw ArgumentError("alternative " + std::to_string(a.index) + " out of range");
  }
}

}  // namespace detail

template <Scalar T>
T social_welfare(const ValuationProfile<T>& profile, Alternative a) {
  detail::check_alternative(profile, a);
  T total(0);
  for (std::size_t i = 0; i < profile.agents(); ++i) total += profile.value(i, a.index);
  return total;
}

/// Welfare of `a` among agents not in `excluded`.
template <Scalar T>
T partial_welfare(const ValuationProfile<T>& profile, Alternative a, const AgentSet& excluded) {
  detail::check_alternative(profile, a);
  T total(0);
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    if (!excluded.contains(i)) total += profile.value(i, a.index);
  }
  return total;
}

/// Argmax of welfare over agents outside `excluded`, smallest index on ties.
template <Scalar T>
Alternative efficient_alternative(const ValuationProfile<T>& profile, const AgentSet& excluded = {}) {
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < profile.agents(); ++i) remaining += excluded.contains(i) ? 0 : 1;
  if (remaining == 0) throw ArgumentError("every agent is excluded");
  Alternative best{0};
  T best_welfare = partial_welfare(profile, best, excluded);
  for (std::size_t a = 1; a < profile.alternatives(); ++a) {
    T w = partial_welfare(profile, Alternative{a}, excluded);
    if (w > best_welfare) {
      best_welfare = w;
      best = Alternative{a};
    }
  }
  return best;
}

template <Scalar T>
T max_welfare(const ValuationProfile<T>& profile) {
  return social_welfare(profile, efficient_alternative(profile));
}

template <Scalar T>
T absolute_inefficiency(const ValuationProfile<T>& profile, const Outcome<T>& outcome) {
  return max_welfare(profile) - social_welfare(profile, outcome.alternative);
}

/// Expected welfare loss of a lottery.
template <Scalar T>
T absolute_inefficiency(const ValuationProfile<T>& profile, const RandomizedOutcome<T>& outcome) {
  const T best = max_welfare(profile);
  T loss(0);
  for (const auto& e : outcome.support) {
    loss += e.probability * (best - social_welfare(profile, e.outcome.alternative));
  }
  return loss;
}

/// abs / (n M).
template <Scalar T>
T sample_inefficiency_normalize(const T& absolute, std::size_t agents, const T& range) {
  if (agents < 1) throw ArgumentError("need at least one agent");
  if (!(range > T(0))) throw ArgumentError("valuation range M must be positive");
  return absolute / (T(static_cast<long>(agents)) * range);
}

/// (lambda * T1 + (1 - lambda) * T2) / (n M) for one profile, where T1 is the
/// expected welfare loss and T2 the absolute expected payment surplus.
template <Scalar T>
T spillover(const ValuationProfile<T>& profile, const Mechanism<T>& mechanism, const T& lambda) {
  if (lambda < T(0) || lambda > T(1)) throw ArgumentError("lambda must lie in [0, 1]");
  const auto outcome = mechanism(profile);
  const T loss = absolute_inefficiency(profile, outcome);
  T surplus(0);
  for (const T& p : outcome.expected_payments(profile.agents())) surplus += p;
  const T combined = lambda * loss + (T(1) - lambda) * abs_value(surplus);
  return sample_inefficiency_normalize(combined, profile.agents(), profile.range());
}

}  // namespace sinkmech
