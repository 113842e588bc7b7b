#pragma once

// Exact inference for the three-position chain
//   BEGIN -> entity-1 -> relation -> entity-2 -> END
// with separate entity (E) and relation (R) label sets. All scores are in
// log space; sums over paths use max-shifted log-sum-exp.

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "slotcnn/nn/ops.hpp"
#include "slotcnn/nn/tensor.hpp"

namespace slotcnn::crf {

using nn::Index;
using nn::Tensor2;
using nn::Vector;

template <typename Scalar>
struct CrfParams {
  Vector<Scalar> begin_ent;   // |E|
  Tensor2<Scalar> ent_rel;    // |E| x |R|
  Tensor2<Scalar> rel_ent;    // |R| x |E|
  Vector<Scalar> ent_end;     // |E|

  static CrfParams zeros(Index num_ent, Index num_rel) {
    return {Vector<Scalar>::Zero(num_ent), Tensor2<Scalar>::Zero(num_ent, num_rel),
            Tensor2<Scalar>::Zero(num_rel, num_ent),
            Vector<Scalar>::Zero(num_ent)};
  }
  Index num_entities() const { return begin_ent.size(); }
  Index num_relations() const { return ent_rel.cols(); }
};

template <typename Scalar>
struct ChainEmissions {
  Vector<Scalar> e1;
  Vector<Scalar> rel;
  Vector<Scalar> e2;

  static ChainEmissions zeros(Index num_ent, Index num_rel) {
    return {Vector<Scalar>::Zero(num_ent), Vector<Scalar>::Zero(num_rel),
            Vector<Scalar>::Zero(num_ent)};
  }
};

struct ChainLabels {
  Index e1 = 0;
  Index rel = 0;
  Index e2 = 0;
  friend bool operator==(const ChainLabels&, const ChainLabels&) = default;
};

template <typename Scalar>
struct ChainMarginals {
  Vector<Scalar> e1;
  Vector<Scalar> rel;
  Vector<Scalar> e2;
  Tensor2<Scalar> e1_rel;  // P(e1 = a, rel = r)
  Tensor2<Scalar> rel_e2;  // P(rel = r, e2 = b)
  Scalar log_z = 0;
};

template <typename Scalar>
struct CrfGradients {
  Scalar loss = 0;
  ChainEmissions<Scalar> d_emissions;
  CrfParams<Scalar> d_params;
};

template <typename Scalar>
void check_dims(const ChainEmissions<Scalar>& em, const CrfParams<Scalar>& p) {
  const Index ne = p.num_entities();
  const Index nr = p.num_relations();
  nn::require_shape(ne >= 1 && nr >= 1, "CRF needs at least one label per position");
  nn::require_shape(p.ent_rel.rows() == ne && p.rel_ent.rows() == nr &&
                        p.rel_ent.cols() == ne && p.ent_end.size() == ne,
                    "inconsistent CRF transition tables");
  nn::require_shape(em.e1.size() == ne && em.e2.size() == ne && em.rel.size() == nr,
                    "emissions do not match CRF label sets");
}

template <typename Scalar>
void check_labels(const CrfParams<Scalar>& p, const ChainLabels& s) {
  const Index ne = p.num_entities();
  const Index nr = p.num_relations();
  if (s.e1 < 0 || s.e1 >= ne || s.e2 < 0 || s.e2 >= ne || s.rel < 0 || s.rel >= nr)
    throw LabelError("chain labels (" + std::to_string(s.e1) + ", " +
                     std::to_string(s.rel) + ", " + std::to_string(s.e2) +
                     ") out of range");
}

template <typename Scalar>
Scalar chain_score(const ChainEmissions<Scalar>& em, const CrfParams<Scalar>& p,
                   const ChainLabels& s) {
  check_dims(em, p);
  check_labels(p, s);
  return p.begin_ent(s.e1) + em.e1(s.e1) + p.ent_rel(s.e1, s.rel) + em.rel(s.rel) +
         p.rel_ent(s.rel, s.e2) + em.e2(s.e2) + p.ent_end(s.e2);
}

namespace detail {

template <typename Scalar>
struct ForwardBackward {
  Vector<Scalar> alpha1, alpha2, alpha3;
  Vector<Scalar> beta1, beta2, beta3;
  Scalar log_z;
};

template <typename Scalar>
ForwardBackward<Scalar> forward_backward(const ChainEmissions<Scalar>& em,
                                         const CrfParams<Scalar>& p) {
  check_dims(em, p);
  const Index ne = p.num_entities();
  const Index nr = p.num_relations();
  ForwardBackward<Scalar> fb;
  fb.alpha1 = p.begin_ent + em.e1;
  fb.alpha2.resize(nr);
  for (Index r = 0; r < nr; ++r)
    fb.alpha2(r) = nn::log_sum_exp(fb.alpha1 + p.ent_rel.col(r)) + em.rel(r);
  fb.alpha3.resize(ne);
  for (Index b = 0; b < ne; ++b)
    fb.alpha3(b) = nn::log_sum_exp(fb.alpha2 + p.rel_ent.col(b)) + em.e2(b);
  fb.log_z = nn::log_sum_exp(fb.alpha3 + p.ent_end);

  fb.beta3 = p.ent_end;
  fb.beta2.resize(nr);
  const Vector<Scalar> after_e2 = em.e2 + fb.beta3;
  for (Index r = 0; r < nr; ++r)
    fb.beta2(r) = nn::log_sum_exp(p.rel_ent.row(r).transpose() + after_e2);
  fb.beta1.resize(ne);
  const Vector<Scalar> after_rel = em.rel + fb.beta2;
  for (Index a = 0; a < ne; ++a)
    fb.beta1(a) = nn::log_sum_exp(p.ent_rel.row(a).transpose() + after_rel);
  return fb;
}

}  // namespace detail

/// log of the sum over all |E| * |R| * |E| label sequences of exp(score).
template <typename Scalar>
Scalar log_partition(const ChainEmissions<Scalar>& em, const CrfParams<Scalar>& p) {
  return detail::forward_backward(em, p).log_z;
}

/// Per-position and pairwise posteriors from forward-backward.
template <typename Scalar>
ChainMarginals<Scalar> marginals(const ChainEmissions<Scalar>& em,
                                 const CrfParams<Scalar>& p) {
  const auto fb = detail::forward_backward(em, p);
  const Index ne = p.num_entities();
  const Index nr = p.num_relations();
  ChainMarginals<Scalar> m;
  m.log_z = fb.log_z;
  m.e1 = ((fb.alpha1 + fb.beta1).array() - fb.log_z).exp().matrix();
  m.rel = ((fb.alpha2 + fb.beta2).array() - fb.log_z).exp().matrix();
  m.e2 = ((fb.alpha3 + fb.beta3).array() - fb.log_z).exp().matrix();
  m.e1_rel.resize(ne, nr);
  for (Index a = 0; a < ne; ++a)
    for (Index r = 0; r < nr; ++r)
      m.e1_rel(a, r) = std::exp(fb.alpha1(a) + p.ent_rel(a, r) + em.rel(r) +
                                fb.beta2(r) - fb.log_z);
  m.rel_e2.resize(nr, ne);
  for (Index r = 0; r < nr; ++r)
    for (Index b = 0; b < ne; ++b)
      m.rel_e2(r, b) = std::exp(fb.alpha2(r) + p.rel_ent(r, b) + em.e2(b) +
                                fb.beta3(b) - fb.log_z);
  return m;
}

/// Negative log-likelihood of `gold` and its gradient with respect to every
/// emission and transition entry: (model expectation) - (gold indicator).
template <typename Scalar>
CrfGradients<Scalar> nll_and_gradients(const ChainEmissions<Scalar>& em,
                                       const CrfParams<Scalar>& p,
                                       const ChainLabels& gold) {
  check_labels(p, gold);
  const auto m = marginals(em, p);
  CrfGradients<Scalar> g;
  g.loss = m.log_z - chain_score(em, p, gold);
  g.d_emissions = {m.e1, m.rel, m.e2};
  g.d_emissions.e1(gold.e1) -= 1;
  g.d_emissions.rel(gold.rel) -= 1;
  g.d_emissions.e2(gold.e2) -= 1;
  g.d_params.begin_ent = m.e1;
  g.d_params.begin_ent(gold.e1) -= 1;
  g.d_params.ent_rel = m.e1_rel;
  g.d_params.ent_rel(gold.e1, gold.rel) -= 1;
  g.d_params.rel_ent = m.rel_e2;
  g.d_params.rel_ent(gold.rel, gold.e2) -= 1;
  g.d_params.ent_end = m.e2;
  g.d_params.ent_end(gold.e2) -= 1;
  return g;
}

/// Highest-scoring sequence and its score. Ties go to the lowest label
/// index at every decision.
template <typename Scalar>
std::pair<ChainLabels, Scalar> viterbi(const ChainEmissions<Scalar>& em,
                                       const CrfParams<Scalar>& p) {
  check_dims(em, p);
  const Index ne = p.num_entities();
  const Index nr = p.num_relations();
  const Vector<Scalar> delta1 = p.begin_ent + em.e1;

  Vector<Scalar> delta2(nr);
  std::vector<Index> back2(static_cast<size_t>(nr));
  for (Index r = 0; r < nr; ++r) {
    Index best = 0;
    Scalar best_score = delta1(0) + p.ent_rel(0, r);
    for (Index a = 1; a < ne; ++a) {
      const Scalar s = delta1(a) + p.ent_rel(a, r);
      if (s > best_score) best_score = s, best = a;
    }
    delta2(r) = best_score + em.rel(r);
    back2[static_cast<size_t>(r)] = best;
  }

  Vector<Scalar> delta3(ne);
  std::vector<Index> back3(static_cast<size_t>(ne));
  for (Index b = 0; b < ne; ++b) {
    Index best = 0;
    Scalar best_score = delta2(0) + p.rel_ent(0, b);
    for (Index r = 1; r < nr; ++r) {
      const Scalar s = delta2(r) + p.rel_ent(r, b);
      if (s > best_score) best_score = s, best = r;
    }
    delta3(b) = best_score + em.e2(b);
    back3[static_cast<size_t>(b)] = best;
  }

  Index last = 0;
  Scalar best_total = delta3(0) + p.ent_end(0);
  for (Index b = 1; b < ne; ++b) {
    const Scalar s = delta3(b) + p.ent_end(b);
    if (s > best_total) best_total = s, last = b;
  }
  ChainLabels path;
  path.e2 = last;
  path.rel = back3[static_cast<size_t>(last)];
  path.e1 = back2[static_cast<size_t>(path.rel)];
  return {path, best_total};
}

}  // namespace slotcnn::crf
