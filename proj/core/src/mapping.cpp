#include "gleam/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "gleam/error.hpp"
#include "gleam/parallel.hpp"

namespace gleam {

std::vector<std::size_t> ScanResult::selected() const {
  std::vector<std::size_t> out;
  for (const auto& l : loci)
    if (l.selected) out.push_back(l.locus);
  return out;
}

std::size_t ScanResult::skipped_count() const {
  return static_cast<std::size_t>(std::count_if(loci.begin(), loci.end(), [](const auto& l) { return l.skipped; }));
}

Eigen::VectorXd ancestry_column(const AncestryDraws& draws, std::size_t m, std::size_t locus) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(draws.subjects));
  for (std::size_t i = 0; i < draws.subjects; ++i) v[static_cast<Eigen::Index>(i)] = draws(m, i, locus);
  return v;
}

namespace {

void check_alignment(const AncestryDraws& draws, const TraitData& trait, const ScanOptions& options) {
  if (draws.count() == 0) throw FormatError("ancestry draws are empty");
  if (trait.subjects() != draws.subjects)
    throw AlignmentError(
        fmt::format("trait has {} subjects but the draws have {}", trait.subjects(), draws.subjects));
  if (!options.weights.empty() && options.weights.size() != draws.count())
    throw AlignmentError(
        fmt::format("{} averaging weights for {} draws", options.weights.size(), draws.count()));
  if (std::isnan(options.delta)) throw ConfigError("delta must not be NaN");
}

std::string locus_name(const AncestryDraws& draws, std::size_t j) {
  return j < draws.marker_ids.size() ? draws.marker_ids[j] : fmt::format("#{}", j);
}

}  // namespace

BfValue score_subset(const AncestryDraws& draws, const TraitData& trait, const std::vector<std::size_t>& loci,
                     std::span<const double> weights, std::vector<std::string>* notes) {
  const std::size_t M = draws.count();
  const auto n = static_cast<Eigen::Index>(draws.subjects);
  std::vector<BfValue> values(M);
  std::size_t degenerate = 0, failed = 0;
  for (std::size_t m = 0; m < M; ++m) {
    Eigen::MatrixXd raw(n, static_cast<Eigen::Index>(loci.size()));
    for (std::size_t k = 0; k < loci.size(); ++k) raw.col(static_cast<Eigen::Index>(k)) = ancestry_column(draws, m, loci[k]);
    try {
      const auto design = center_ancestries(raw, loci);
      const auto fit = fit_glm(trait, design);
      values[m] = evaluate_bf(fit, draws.subjects);
      if (values[m].flagged()) ++failed;
    } catch (const DegenerateDesignError&) {
      values[m].status = BfStatus::FitFailed;
      values[m].p = loci.size();
      ++degenerate;
    }
  }
  if (notes && (degenerate > 0 || failed > 0)) {
    std::string names;
    for (std::size_t k = 0; k < loci.size(); ++k) names += (k ? "," : "") + locus_name(draws, loci[k]);
    notes->push_back(fmt::format("{}: {} of {} draws degenerate, {} of {} fits failed", names, degenerate, M,
                                 failed, M));
  }
  return average_bf(values, weights);
}

ScanResult stage1_scan(const AncestryDraws& draws, const TraitData& trait, const ScanOptions& options) {
  check_alignment(draws, trait, options);
  trait.validate();
  ScanResult result;
  result.delta = options.delta;
  result.draws = draws.count();
  result.loci.resize(draws.loci);
  std::vector<std::vector<std::string>> notes(draws.loci);
  parallel_for(draws.loci, options.workers, [&](std::size_t j) {
    const BfValue v = score_subset(draws, trait, {j}, options.weights, &notes[j]);
    auto& s = result.loci[j];
    s.locus = j;
    s.draws_used = v.draws_used;
    if (v.flagged()) {
      s.skipped = true;
      return;
    }
    s.log10_bf = v.log10_bf;
    s.T = v.T;
    s.tau_hat = v.tau_hat;
    s.selected = v.log10_bf > options.delta;
  });
  for (std::size_t j = 0; j < draws.loci; ++j) {
    for (auto& note : notes[j]) result.diagnostics.push_back(std::move(note));
    if (result.loci[j].skipped) result.diagnostics.push_back(fmt::format("{}: skipped", locus_name(draws, j)));
  }
  return result;
}

std::size_t subset_count(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) k = n;
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0, binom = 1;  // binom = C(n, r)
  for (std::size_t r = 1; r <= k; ++r) {
    // C(n, r) = C(n, r - 1) * (n - r + 1) / r, exact in this order when it fits.
    const std::size_t factor = n - r + 1;
    if (binom > kMax / factor) return kMax;
    binom = binom * factor / r;
    if (total > kMax - binom) return kMax;
    total += binom;
  }
  return total;
}

namespace {

std::vector<std::vector<std::size_t>> enumerate_subsets(const std::vector<std::size_t>& items, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  const std::size_t n = items.size();
  if (k == 0 || k > n) k = n;
  for (std::size_t r = 1; r <= k; ++r) {
    std::vector<std::size_t> idx(r);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::vector<std::size_t> s(r);
      for (std::size_t t = 0; t < r; ++t) s[t] = items[idx[t]];
      out.push_back(std::move(s));
      std::size_t t = r;
      while (t > 0 && idx[t - 1] == n - r + t - 1) --t;
      if (t == 0) break;
      ++idx[t - 1];
      for (std::size_t u = t; u < r; ++u) idx[u] = idx[u - 1] + 1;
    }
  }
  return out;
}

bool ranks_before(const SubsetScore& a, const SubsetScore& b) {
  if (a.skipped != b.skipped) return !a.skipped;
  if (!a.skipped && a.log10_bf != b.log10_bf) return a.log10_bf > b.log10_bf;
  return a.loci < b.loci;
}

}  // namespace

void stage2_joint(ScanResult& result, const AncestryDraws& draws, const TraitData& trait, const ScanOptions& options) {
  check_alignment(draws, trait, options);
  if (result.loci.size() != draws.loci) throw AlignmentError("stage-1 result does not match the draws");
  result.subsets.clear();
  result.stage2_done = true;
  const auto sel = result.selected();
  if (sel.empty()) return;
  if (sel.size() == 1) {
    const auto& l = result.loci[sel.front()];
    result.subsets.push_back({{l.locus}, l.log10_bf, false, l.draws_used});
    return;
  }
  const std::size_t count = subset_count(sel.size(), options.max_cardinality);
  if (count > options.subset_cap)
    throw ConfigError(fmt::format(
        "{} selected loci give {} stage-2 subsets, above the cap of {}; raise delta or set a cardinality bound",
        sel.size(), count == std::numeric_limits<std::size_t>::max() ? std::string("too many") : fmt::format("{}", count),
        options.subset_cap));

  const auto subsets = enumerate_subsets(sel, options.max_cardinality);
  std::vector<SubsetScore> scores(subsets.size());
  std::vector<std::vector<std::string>> notes(subsets.size());
  parallel_for(subsets.size(), options.workers, [&](std::size_t s) {
    const BfValue v = score_subset(draws, trait, subsets[s], options.weights, &notes[s]);
    scores[s].loci = subsets[s];
    scores[s].draws_used = v.draws_used;
    scores[s].skipped = v.flagged();
    if (!v.flagged()) scores[s].log10_bf = v.log10_bf;
  });
  for (auto& n : notes)
    for (auto& note : n) result.diagnostics.push_back(std::move(note));
  std::stable_sort(scores.begin(), scores.end(), ranks_before);
  result.subsets = std::move(scores);
}

std::vector<std::size_t> identified_subsets(const ScanResult& result) {
  std::vector<std::size_t> out;
  const auto& subs = result.subsets;
  for (std::size_t s = 0; s < subs.size(); ++s) {
    if (subs[s].skipped || !(subs[s].log10_bf > result.delta)) continue;
    bool top = true;
    for (std::size_t t = 0; t < s && top; ++t) {
      const auto& a = subs[t].loci;
      const auto& b = subs[s].loci;
      for (std::size_t x : a)
        if (std::find(b.begin(), b.end(), x) != b.end()) {
          top = false;
          break;
        }
    }
    if (top) out.push_back(s);
  }
  return out;
}

std::vector<std::size_t> identified_loci(const ScanResult& result) {
  std::vector<std::size_t> out;
  for (std::size_t s : identified_subsets(result))
    out.insert(out.end(), result.subsets[s].loci.begin(), result.subsets[s].loci.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

AldResult ald_correlation(const AncestryDraws& draws) {
  const std::size_t M = draws.count();
  const std::size_t I = draws.subjects;
  const std::size_t J = draws.loci;
  if (M * I < 2) throw DomainError("ancestry correlation needs at least two pooled samples");
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(J));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(J));
  Eigen::MatrixXd block(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(J));
  for (std::size_t m = 0; m < M; ++m) {
    const auto d = draws.draw(m);
    for (std::size_t i = 0; i < I; ++i)
      for (std::size_t j = 0; j < J; ++j)
        block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d[i * J + j];
    // Shift by 1 (the middle category) to keep the sums well conditioned.
    block.array() -= 1.0;
    cross.selfadjointView<Eigen::Lower>().rankUpdate(block.transpose());
    sum += block.colwise().sum().transpose();
  }
  const double N = static_cast<double>(M * I);
  Eigen::MatrixXd cov = cross.selfadjointView<Eigen::Lower>();
  cov -= sum * sum.transpose() / N;

  AldResult out;
  out.constant.assign(J, 0);
  Eigen::VectorXd sd(static_cast<Eigen::Index>(J));
  for (std::size_t j = 0; j < J; ++j) {
    const double v = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
    // Integer sums make a constant column's variance exactly zero; a
    // nonconstant one is at least (N - 1) / N.
    if (!(v > 0.5)) out.constant[j] = 1;
    sd[static_cast<Eigen::Index>(j)] = std::sqrt(std::max(v, 0.0));
  }
  out.correlation.resize(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(J));
  for (std::size_t a = 0; a < J; ++a) {
    for (std::size_t b = 0; b < J; ++b) {
      const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
      if (a == b) {
        out.correlation(ia, ib) = 1.0;
      } else if (out.constant[a] || out.constant[b]) {
        out.correlation(ia, ib) = 0.0;
      } else {
        out.correlation(ia, ib) = std::clamp(cov(ia, ib) / (sd[ia] * sd[ib]), -1.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace gleam
