#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epilab/lsc.hpp"
#include "epilab/stochastic/rng.hpp"
#include "epilab/verdict.hpp"

namespace epilab {

/// Slack on value comparisons against I_E(f) + eps, so that values equal up
/// to rounding (e.g. (±1)^2 - 1 evaluated in floating point) tie.
inline constexpr double kValueSlack = 1e-12;

/// A(f, eps) = {t : f(t) <= I_E(f) + eps}. The whole lattice when f ≡ +inf,
/// {f = -inf} when I_E(f) = -inf.
inline ClosedSet eps_argmin(const LscFunction& f, double eps) {
  if (!(eps >= 0.0)) throw usage_error("eps_argmin: eps must be >= 0");
  if (!f.grid()) throw usage_error("eps_argmin: function has no grid");
  const ExtReal inf = inf_all(f);
  if (inf.is_pos_inf()) return ClosedSet::full(f.grid());
  std::vector<ClosedSet::index_type> out;
  if (inf.is_neg_inf()) {
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i].is_neg_inf()) out.push_back(static_cast<ClosedSet::index_type>(i));
    }
  } else {
    const double level = inf.value() + eps + kValueSlack * std::max(1.0, std::abs(inf.value()));
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] <= ExtReal(level)) out.push_back(static_cast<ClosedSet::index_type>(i));
    }
  }
  return ClosedSet::from_sorted(f.grid(), std::move(out));
}

inline ClosedSet argmin(const LscFunction& f) { return eps_argmin(f, 0.0); }

enum class SelectionRule { lexicographic_min, random_uniform };

inline std::string_view to_string(SelectionRule r) noexcept {
  return r == SelectionRule::lexicographic_min ? "lexicographic-min" : "random-uniform";
}

inline SelectionRule parse_selection_rule(std::string_view s) {
  if (s == "lexicographic-min") return SelectionRule::lexicographic_min;
  if (s == "random-uniform") return SelectionRule::random_uniform;
  throw usage_error("unknown selection rule '" + std::string(s) + "'");
}

/// Picks a member of a nonempty set by rule; random picks use `rng`.
inline std::size_t select_member(const ClosedSet& A, SelectionRule rule, Rng& rng) {
  if (A.empty()) throw usage_error("select: empty solution set");
  if (rule == SelectionRule::lexicographic_min) return A.members().front();
  return A.members()[rng.below(A.size())];
}

/// A member of A(f, eps). Lexicographic-min is the smallest point in
/// row-major order; random-uniform is uniform over members, fixed by seed.
inline Point select(const LscFunction& f, double eps, SelectionRule rule, std::uint64_t seed = 0) {
  const ClosedSet A = eps_argmin(f, eps);
  Rng rng = Rng::substream(seed, 0, 0);
  return Point(f.grid(), select_member(A, rule, rng));
}

struct PkInclusionReport {
  Verdict verdict = Verdict::fail;
  double tol = 0.0;
  std::size_t tail_start = 0;
  double eps = 0.0;
  double eps_tail_sup = 0.0;
  bool eps_ok = false;
  EpiConvergence epi;
  SetConvergence solutions;  // upper-Fell check of A(f_n, eps_n) against A(f, eps)
  std::size_t limit_size = 0;
  std::string note;
};

/// Upper-Fell inclusion of the eps-solution sets. The hypotheses (eps
/// sequence converging in the left-order sense, epi-convergence of the
/// functions) are checked first; if either fails the verdict is
/// hypothesis_not_met rather than fail.
inline PkInclusionReport check_pk_inclusion(std::span<const LscFunction> f_seq, std::span<const double> eps_seq,
                                            const LscFunction& f, double eps, std::size_t tail_start, double tol) {
  if (f_seq.size() != eps_seq.size()) throw usage_error("check_pk_inclusion: f_seq and eps_seq differ in length");
  PkInclusionReport rep;
  rep.tol = tol;
  rep.tail_start = tail_start;
  rep.eps = eps;
  if (f_seq.empty() || tail_start >= f_seq.size()) throw usage_error("check_pk_inclusion: empty tail");
  rep.eps_tail_sup = *std::max_element(eps_seq.begin() + static_cast<std::ptrdiff_t>(tail_start), eps_seq.end());
  rep.eps_ok = rep.eps_tail_sup <= eps + tol + kSlack;
  rep.epi = epi_converges(f_seq, f, tail_start, tol);
  const ClosedSet limit = eps_argmin(f, eps);
  rep.limit_size = limit.size();
  std::vector<ClosedSet> sets;
  sets.reserve(f_seq.size());
  for (std::size_t n = 0; n < f_seq.size(); ++n) {
    sets.push_back(n < tail_start ? ClosedSet(f_seq[n].grid()) : eps_argmin(f_seq[n], eps_seq[n]));
  }
  rep.solutions = upper_fell_converges<CarrierSpace>(sets, limit, tail_start, tol);
  if (!rep.eps_ok) {
    rep.verdict = Verdict::hypothesis_not_met;
    rep.note = "eps sequence does not converge to eps in the left-order sense";
  } else if (!rep.epi.converged) {
    rep.verdict = Verdict::hypothesis_not_met;
    rep.note = "function sequence does not epi-converge to the limit";
  } else {
    rep.verdict = rep.solutions.upper_ok ? Verdict::pass : Verdict::fail;
  }
  return rep;
}

}  // namespace epilab
