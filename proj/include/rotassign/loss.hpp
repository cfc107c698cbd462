#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotassign/weighting.hpp"

namespace rotassign {

enum class RegressionReduction {
  sum_of_components,  // sum_c smooth_l1(t_hat_c - t*_c)
  vector_norm,        // smooth_l1(||t_hat - t*||)
};

struct LossConfig {
  double delta = 0.25;
  double gamma = 2.0;
  double beta = 0.01;
  double lambda = 1.0;
  bool normalize_offsets_by_stride = false;
  RegressionReduction reduction = RegressionReduction::sum_of_components;

  void validate() const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("loss delta must lie in (0, 1)");
    if (!(gamma >= 0.0)) throw std::invalid_argument("loss gamma must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("smooth-L1 beta must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("loss lambda must be positive");
  }
};

inline constexpr double score_epsilon = 1e-7;

inline double clamp_score(double score) {
  return std::clamp(score, score_epsilon, 1.0 - score_epsilon);
}

// Weighted focal term for one (anchor, category) pair. Positives are pulled
// toward their spatial weight rather than toward 1.
inline double focal_term(double score, bool positive, double weight, const LossConfig& cfg) {
  const double c = clamp_score(score);
  if (positive) return -cfg.delta * std::pow(std::abs(weight - c), cfg.gamma) * std::log(c);
  return -cfg.delta * std::pow(c, cfg.gamma) * std::log(1.0 - c);
}

// d(focal_term)/d(score), valid inside the clamp interval.
inline double focal_term_dscore(double score, bool positive, double weight, const LossConfig& cfg) {
  const double c = clamp_score(score);
  const double g = cfg.gamma;
  if (positive) {
    const double diff = weight - c;
    const double mag = std::abs(diff);
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    const double dmod = g == 0.0 ? 0.0 : -g * std::pow(mag, g - 1.0) * sign;
    return -cfg.delta * (dmod * std::log(c) + std::pow(mag, g) / c);
  }
  const double dmod = g == 0.0 ? 0.0 : g * std::pow(c, g - 1.0);
  return -cfg.delta * (dmod * std::log(1.0 - c) - std::pow(c, g) / (1.0 - c));
}

// d(focal_term)/d(weight) for a positive pair.
inline double focal_term_dweight(double score, double weight, const LossConfig& cfg) {
  const double c = clamp_score(score);
  const double diff = weight - c;
  if (cfg.gamma == 0.0 || diff == 0.0) return 0.0;
  const double sign = diff > 0.0 ? 1.0 : -1.0;
  return -cfg.delta * cfg.gamma * std::pow(std::abs(diff), cfg.gamma - 1.0) * sign * std::log(c);
}

inline double smooth_l1(double x, double beta) {
  const double ax = std::abs(x);
  return ax < beta ? 0.5 * x * x / beta : ax - 0.5 * beta;
}

inline double smooth_l1_grad(double x, double beta) {
  if (std::abs(x) < beta) return x / beta;
  return x > 0.0 ? 1.0 : -1.0;
}

// Network outputs for one anchor: per-category scores in [0, 1] and the
// regression vector (dx, dy, w, h, theta).
struct PredictionRecord {
  std::vector<double> scores;
  std::array<double, 5> regression{};
};

struct LossReport {
  double cls = 0.0;    // classification sum / N_pos
  double reg = 0.0;    // regression sum / N_pos
  double total = 0.0;  // cls + lambda * reg
  double cls_sum = 0.0;
  double reg_sum = 0.0;
  std::size_t n_pos = 0;
};

inline std::array<double, 5> target_vector(const PositiveSample& p, const PyramidSpec& spec,
                                           const LossConfig& cfg) {
  std::array<double, 5> t{p.regression.dx, p.regression.dy, p.regression.w, p.regression.h,
                          p.regression.theta};
  if (cfg.normalize_offsets_by_stride) {
    const double s = spec.level(p.anchor.level).stride;
    t[0] /= s;
    t[1] /= s;
  }
  return t;
}

// Unweighted regression loss for one positive.
inline double regression_term(const std::array<double, 5>& pred, const std::array<double, 5>& target,
                              const LossConfig& cfg) {
  if (cfg.reduction == RegressionReduction::vector_norm) {
    double sq = 0.0;
    for (std::size_t i = 0; i < 5; ++i) sq += (pred[i] - target[i]) * (pred[i] - target[i]);
    return smooth_l1(std::sqrt(sq), cfg.beta);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < 5; ++i) s += smooth_l1(pred[i] - target[i], cfg.beta);
  return s;
}

// Pairwise sum with a fixed split topology, so results do not depend on how
// partial sums might be scheduled.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t mid = v.size() / 2;
  return pairwise_sum(v.first(mid)) + pairwise_sum(v.subspan(mid));
}

// Dense loss over every anchor. preds is indexed by enumerate_anchors order.
inline LossReport total_loss(const WeightedAssignment& weighted,
                             std::span<const PredictionRecord> preds, const LossConfig& cfg) {
  cfg.validate();
  const AssignmentResult& res = weighted.assignment;
  const std::size_t anchors = res.anchor_total();
  if (preds.size() != anchors) {
    throw std::invalid_argument("predictions cover " + std::to_string(preds.size()) +
                                " anchors, pyramid has " + std::to_string(anchors));
  }
  const std::size_t ncat = anchors ? preds[0].scores.size() : 0;

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> pos_of(anchors, none);
  for (std::size_t i = 0; i < res.positives.size(); ++i) pos_of[res.positives[i].anchor_index] = i;

  std::vector<double> cls_terms(anchors, 0.0);
  std::vector<double> reg_terms;
  reg_terms.reserve(res.positives.size());
  for (std::size_t a = 0; a < anchors; ++a) {
    const PredictionRecord& pr = preds[a];
    if (pr.scores.size() != ncat) throw std::invalid_argument("ragged prediction scores");
    std::size_t pos_cat = none;
    double w = 0.0;
    if (pos_of[a] != none) {
      const PositiveSample& p = res.positives[pos_of[a]];
      pos_cat = static_cast<std::size_t>(res.scene[p.target_index].category);
      if (pos_cat >= ncat) throw std::invalid_argument("positive category outside score vector");
      w = p.weight;
      reg_terms.push_back(w * regression_term(pr.regression, target_vector(p, res.spec, cfg), cfg));
    }
    double s = 0.0;
    for (std::size_t c = 0; c < ncat; ++c) s += focal_term(pr.scores[c], c == pos_cat, w, cfg);
    cls_terms[a] = s;
  }

  LossReport r;
  r.n_pos = res.positives.size();
  const double norm = static_cast<double>(std::max<std::size_t>(r.n_pos, 1));
  r.cls_sum = pairwise_sum(cls_terms);
  r.reg_sum = pairwise_sum(reg_terms);
  r.cls = r.cls_sum / norm;
  r.reg = r.reg_sum / norm;
  r.total = r.cls + cfg.lambda * r.reg;
  return r;
}

}  // namespace rotassign
