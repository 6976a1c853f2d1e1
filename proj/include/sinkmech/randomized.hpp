#pragma once

// Generalized sink mechanisms: a profile-dependent lottery over which single
// agent acts as the sink, after which the single-sink mechanism runs.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sinkmech/core.hpp"
#include "sinkmech/mechanisms.hpp"

namespace sinkmech {

/// g(v): probability of each agent being the sink.
template <Scalar T>
struct SinkDistribution {
  std::vector<T> probs;

  /// Throws ContractError unless entries are >= 0 and sum to one (exactly in
  /// exact mode, within 1e-12 in float mode).
  void validate(std::size_t agents) const {
    if (probs.size() != agents) throw ContractError("sink distribution has wrong length");
    T total(0);
    for (const T& p : probs) {
      if (p < T(0)) throw ContractError("negative sink probability");
      total += p;
    }
    if constexpr (ScalarTraits<T>::exact) {
      if (total != T(1)) throw ContractError("sink probabilities do not sum to 1");
    } else {
      if (std::abs(total - 1.0) > 1e-12) throw ContractError("sink probabilities do not sum to 1");
    }
  }

  static SinkDistribution point_mass(std::size_t agents, std::size_t agent) {
    SinkDistribution d{std::vector<T>(agents, T(0))};
    d.probs.at(agent) = T(1);
    return d;
  }

  static SinkDistribution uniform(std::size_t agents) {
    return SinkDistribution{std::vector<T>(agents, T(1) / T(static_cast<long>(agents)))};
  }

  friend bool operator==(const SinkDistribution&, const SinkDistribution&) = default;
};

/// Deterministic map from profiles to sink distributions.
template <Scalar T>
using SinkRule = std::function<SinkDistribution<T>(const ValuationProfile<T>&)>;

template <Scalar T>
RandomizedOutcome<T> generalized_sink_outcome(const SinkRule<T>& rule, const ValuationProfile<T>& profile) {
  if (profile.agents() < 2) throw ArgumentError("generalized sink mechanisms need at least two agents");
  const auto dist = rule(profile);
  dist.validate(profile.agents());
  RandomizedOutcome<T> outcome;
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    if (dist.probs[i] > T(0)) outcome.support.push_back({dist.probs[i], single_sink(SinkSpec{i}, profile)});
  }
  return outcome;
}

template <Scalar T>
SinkDistribution<T> nrs_rule(const ValuationProfile<T>& profile) {
  return SinkDistribution<T>::uniform(profile.agents());
}

/// Agents i outside `excluded` whose removal leaves an argmax (among the
/// remaining non-excluded agents) that beats every other alternative by more
/// than `range`, so no report of i can move it.
template <Scalar T>
AgentSet find_irrelevant_agents(const ValuationProfile<T>& profile, const T& range, const AgentSet& excluded = {}) {
  AgentSet irrelevant;
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    if (excluded.contains(i)) continue;
    AgentSet without_i = excluded;
    without_i.insert(i);
    if (without_i.size() == profile.agents()) continue;
    const Alternative best = efficient_alternative(profile, without_i);
    const T best_welfare = partial_welfare(profile, best, without_i);
    bool decisive = true;
    for (std::size_t a = 0; a < profile.alternatives() && decisive; ++a) {
      if (a == best.index) continue;
      decisive = best_welfare - partial_welfare(profile, Alternative{a}, without_i) > range;
    }
    if (decisive) irrelevant.insert(i);
  }
  return irrelevant;
}

/// Lowest-index irrelevant agent as sink if one exists, else uniform.
/// Not strategyproof.
template <Scalar T>
SinkDistribution<T> irrelevant_sink_rule(const ValuationProfile<T>& profile, const T& range) {
  const auto irrelevant = find_irrelevant_agents(profile, range);
  if (!irrelevant.empty()) return SinkDistribution<T>::point_mass(profile.agents(), *irrelevant.begin());
  return SinkDistribution<T>::uniform(profile.agents());
}

/// Draw a default sink i from `default_dist`; if some agent is irrelevant
/// among the others (scan of N \ {i}), the lowest-index one becomes the sink,
/// otherwise i does. Returns the induced distribution over realized sinks.
template <Scalar T>
SinkDistribution<T> mis_rule(const ValuationProfile<T>& profile, const T& range,
                             const SinkDistribution<T>& default_dist) {
  default_dist.validate(profile.agents());
  SinkDistribution<T> realized{std::vector<T>(profile.agents(), T(0))};
  for (std::size_t i = 0; i < profile.agents(); ++i) {
    if (!(default_dist.probs[i] > T(0))) continue;
    const auto irrelevant = find_irrelevant_agents(profile, range, AgentSet{i});
    const std::size_t sink = irrelevant.empty() ? i : *irrelevant.begin();
    realized.probs[sink] += default_dist.probs[i];
  }
  return realized;
}

template <Scalar T>
Mechanism<T> generalized_sink_mechanism(std::string name, SinkRule<T> rule) {
  return Mechanism<T>{std::move(name), [rule = std::move(rule)](const ValuationProfile<T>& v) {
                        return generalized_sink_outcome(rule, v);
                      }};
}

template <Scalar T>
Mechanism<T> nrs_mechanism() {
  return generalized_sink_mechanism<T>("nrs", [](const ValuationProfile<T>& v) { return nrs_rule(v); });
}

/// Irrelevance threshold defaults to each profile's own M.
template <Scalar T>
Mechanism<T> irrelevant_sink_mechanism() {
  return generalized_sink_mechanism<T>(
      "irrelevant-sink", [](const ValuationProfile<T>& v) { return irrelevant_sink_rule(v, v.range()); });
}

/// Uniform default sink unless `default_dist` is given.
template <Scalar T>
Mechanism<T> mis_mechanism(std::optional<SinkDistribution<T>> default_dist = std::nullopt) {
  return generalized_sink_mechanism<T>("mis", [default_dist](const ValuationProfile<T>& v) {
    return mis_rule(v, v.range(), default_dist ? *default_dist : SinkDistribution<T>::uniform(v.agents()));
  });
}

/// Profile-independent sink lottery.
template <Scalar T>
Mechanism<T> fixed_sink_mechanism(SinkDistribution<T> dist) {
  return generalized_sink_mechanism<T>("fixed-sink", [dist](const ValuationProfile<T>&) { return dist; });
}

/// Profile (m > n) on which every choice of sink loses at least M - epsilon:
/// agent i dislikes a_i, likes every other a_j (j < n), and everyone likes
/// a_n slightly less; removing i always flips the choice to a_i.
template <Scalar T>
ValuationProfile<T> gen_sink_worst_profile_m_gt_n(std::size_t agents, std::size_t alternatives, const T& range,
                                                  const T& epsilon) {
  if (agents < 2) throw ArgumentError("need at least two agents");
  if (alternatives <= agents) throw ArgumentError("need more alternatives than agents");
  if (!(epsilon > T(0)) || !(epsilon < range / 2)) throw ArgumentError("epsilon must lie in (0, M/2)");
  const T half = range / 2;
  // loss per sink is M - eta (n + 2) / 2 = M - epsilon (n + 2) / (2 (n + 1))
  const T eta = epsilon / T(static_cast<long>(agents + 1));
  std::vector<T> values(agents * alternatives);
  for (std::size_t i = 0; i < agents; ++i) {
    for (std::size_t a = 0; a < alternatives; ++a) {
      T v;
      if (a == i || a > agents) {
        v = -half + eta / 2;
      } else if (a == agents) {
        v = half - eta;
      } else {
        v = half - eta / 2;
      }
      values[i * alternatives + a] = v;
    }
  }
  return ValuationProfile<T>(agents, alternatives, range, std::move(values));
}

/// Profile on which NRS has expected sample inefficiency
/// ceil(n/2) (M - 2 margin) / (n^2 M). With c = ceil(n/2), agents 0..c-1
/// prefer the first alternative by M - margin, the rest together prefer the
/// second by just enough that the first wins by M - 2 margin overall, so
/// removing any of the first c agents flips the choice. Extra alternatives
/// are valued -M/2 by everyone.
template <Scalar T>
ValuationProfile<T> nrs_worst_profile(std::size_t agents, std::size_t alternatives, const T& range,
                                      const T& margin) {
  if (agents < 2 || alternatives < 2) throw ArgumentError("need n >= 2 and m >= 2");
  if (!(margin > T(0)) || !(margin < range / 4)) throw ArgumentError("margin must lie in (0, M/4)");
  const std::size_t c = (agents + 1) / 2;
  const T half = range / 2;
  const T strong = range - margin;
  const T rest_total = T(static_cast<long>(c) - 1) * (-range) + T(static_cast<long>(c) - 2) * margin;
  const T rest = rest_total / T(static_cast<long>(agents - c));
  std::vector<T> values(agents * alternatives, -half);
  for (std::size_t i = 0; i < agents; ++i) {
    const T d = i < c ? strong : rest;
    values[i * alternatives + 0] = d / 2;
    values[i * alternatives + 1] = -d / 2;
  }
  return ValuationProfile<T>(agents, alternatives, range, std::move(values));
}

}  // namespace sinkmech
