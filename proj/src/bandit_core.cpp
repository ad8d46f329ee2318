#include "autoalpha/bandit_core.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace autoalpha {

std::size_t argmax_tiebreak(std::span<const double> scores, TieBreak mode,
                            std::uint64_t seed) {
  if (scores.empty()) throw std::invalid_argument("argmax_tiebreak: empty scores");
  std::size_t best = 0;
  std::size_t n_best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw std::invalid_argument("argmax_tiebreak: NaN score");
    if (n_best == 0 || scores[i] > scores[best]) {
      best = i;
      n_best = 1;
    } else if (scores[i] == scores[best]) {
      ++n_best;
    }
  }
  if (mode == TieBreak::lowest_index || n_best == 1) return best;

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n_best - 1);
  std::size_t k = pick(rng);
  for (std::size_t i = best; i < scores.size(); ++i) {
    if (scores[i] == scores[best] && k-- == 0) return i;
  }
  return best;
}

RegretCurve compute_regret(std::span<const RoundRecord> log) {
  RegretCurve curve;
  curve.cumulative.reserve(log.size());
  double total = 0.0;
  for (const auto& rec : log) {
    if (!rec.optimal_reward) {
      throw UnsupportedEnvironmentError("round " + std::to_string(rec.t) +
                                        " has no counterfactual optimal reward");
    }
    total += *rec.optimal_reward - rec.reward;
    curve.cumulative.push_back(total);
  }
  return curve;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

}  // namespace autoalpha
