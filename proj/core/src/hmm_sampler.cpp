#include "gleam/hmm_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gleam/error.hpp"
#include "gleam/parallel.hpp"

namespace gleam {

namespace {

constexpr double kSampledFreqFloor = 1e-10;

enum Phase : std::uint64_t { kInitPhase = 0, kSubjectPhase = 1, kLocusPhase = 2, kTauPhase = 3 };

double clamp_open(double v, double eps) { return std::clamp(v, eps, 1.0 - eps); }

std::array<Mat3, 3> conditional_transitions(double rho) {
  return {conditional_transition(0, rho), conditional_transition(1, rho), conditional_transition(2, rho)};
}

double log_beta_density(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

}  // namespace

// --- hyperparameters & priors ----------------------------------------------

void HmmHyperparams::validate(const AimPanel& panel, std::size_t subjects) const {
  if (!(lambda > 0.0)) throw ConfigError(fmt::format("lambda must be positive (got {})", lambda));
  if (!(mu0 > 0.0)) throw ConfigError(fmt::format("mu0 must be positive (got {})", mu0));
  double max_var = 0.0;
  bool has_transition = false;
  for (std::size_t j = 0; j < panel.size(); ++j) {
    if (panel.is_chromosome_start(j)) continue;
    has_transition = true;
    const double g0 = std::clamp(1.0 - std::exp(-lambda * panel.distance(j)), kGammaFloor, 1.0 - kGammaFloor);
    max_var = std::max(max_var, g0 * (1.0 - g0));
  }
  if (has_transition && !(mu0 < max_var))
    throw ConfigError(fmt::format("mu0 = {} must be below max_j gamma0_j (1 - gamma0_j) = {}", mu0, max_var));
  if (!rho0.empty() && rho0.size() != subjects)
    throw ConfigError(fmt::format("rho0 has {} entries for {} subjects", rho0.size(), subjects));
  for (std::size_t i = 0; i < subjects; ++i) {
    const double r = rho0_for(i);
    if (!(r > 0.0 && r < 1.0)) throw ConfigError(fmt::format("rho0[{}] = {} outside (0, 1)", i, r));
    if (!(nu0 > 0.0 && nu0 < r * (1.0 - r)))
      throw ConfigError(fmt::format("nu0 = {} must lie in (0, rho0 (1 - rho0)) = (0, {})", nu0, r * (1.0 - r)));
  }
  if (!(mh_sigma > 0.0)) throw ConfigError("mh_sigma must be positive");
  if (!(tau_init > kTauMin && tau_init < kTauMax)) throw ConfigError("tau_init must lie in (50, 1000)");
  if (burn_in < 1 || n_draws < 1 || thin < 1) throw ConfigError("burn_in, n_draws and thin must be >= 1");
  if (n_draws < thin) throw ConfigError("n_draws must be at least thin so that one draw is retained");
}

HmmPriors HmmPriors::build(const AimPanel& panel, const HmmHyperparams& hyper, std::size_t subjects) {
  HmmPriors p;
  const std::size_t J = panel.size();
  p.gamma0.resize(J);
  p.tau_gamma.resize(J);
  p.pA0.resize(J);
  p.pB0.resize(J);
  p.start.assign(panel.start_flags().begin(), panel.start_flags().end());
  for (std::size_t j = 0; j < J; ++j) {
    p.pA0[j] = panel.marker(j).pA0;
    p.pB0[j] = panel.marker(j).pB0;
    if (p.start[j]) {
      p.gamma0[j] = 1.0;
      p.tau_gamma[j] = 0.0;
      continue;
    }
    const double g0 = std::clamp(1.0 - std::exp(-hyper.lambda * panel.distance(j)), kGammaFloor, 1.0 - kGammaFloor);
    p.gamma0[j] = g0;
    p.tau_gamma[j] = std::max(1.0, g0 * (1.0 - g0) / hyper.mu0 - 1.0);
  }
  p.rho0.resize(subjects);
  p.tau_rho.resize(subjects);
  for (std::size_t i = 0; i < subjects; ++i) {
    const double r = hyper.rho0_for(i);
    p.rho0[i] = r;
    p.tau_rho[i] = r * (1.0 - r) / hyper.nu0 - 1.0;
  }
  return p;
}

// --- state containers --------------------------------------------------------

void HmmState::check_invariants(std::span<const std::uint8_t> start_flags) const {
  auto fail = [](const std::string& what) { throw NumericalError("sampler state invariant violated: " + what); };
  for (std::size_t k = 0; k < ancestry.size(); ++k) {
    if (ancestry[k] > 2) fail(fmt::format("S[{}] = {}", k, int(ancestry[k])));
    if (recombination[k] > 2) fail(fmt::format("R[{}] = {}", k, int(recombination[k])));
    if (genotypes[k] > 2) fail(fmt::format("X[{}] = {}", k, int(genotypes[k])));
  }
  for (std::size_t j = 0; j < loci; ++j) {
    if (!(pA[j] > 0.0 && pA[j] < 1.0)) fail(fmt::format("pA[{}] = {}", j, pA[j]));
    if (!(pB[j] > 0.0 && pB[j] < 1.0)) fail(fmt::format("pB[{}] = {}", j, pB[j]));
    if (start_flags[j]) {
      if (gamma[j] != 1.0) fail(fmt::format("gamma[{}] = {} at chromosome start", j, gamma[j]));
    } else if (!(gamma[j] > 0.0 && gamma[j] < 1.0)) {
      fail(fmt::format("gamma[{}] = {}", j, gamma[j]));
    }
  }
  for (std::size_t i = 0; i < subjects; ++i)
    if (!(rho[i] > 0.0 && rho[i] < 1.0)) fail(fmt::format("rho[{}] = {}", i, rho[i]));
  if (!(tauA > kTauMin && tauA < kTauMax)) fail(fmt::format("tauA = {}", tauA));
  if (!(tauB > kTauMin && tauB < kTauMax)) fail(fmt::format("tauB = {}", tauB));
}

void AncestryDraws::append(std::span<const std::uint8_t> matrix, std::uint64_t iteration) {
  if (matrix.size() != subjects * loci) throw AlignmentError("draw has the wrong number of cells");
  values.insert(values.end(), matrix.begin(), matrix.end());
  iterations.push_back(iteration);
}

AncestryDraws AncestryDraws::select_subjects(std::span<const std::size_t> rows) const {
  AncestryDraws out;
  out.subjects = rows.size();
  out.loci = loci;
  out.seed = seed;
  out.iterations = iterations;
  out.marker_ids = marker_ids;
  out.values.reserve(count() * rows.size() * loci);
  for (std::size_t m = 0; m < count(); ++m) {
    for (std::size_t r : rows) {
      if (r >= subjects) throw AlignmentError(fmt::format("subject row {} out of range", r));
      const auto* src = values.data() + (m * subjects + r) * loci;
      out.values.insert(out.values.end(), src, src + loci);
    }
  }
  if (!subject_ids.empty())
    for (std::size_t r : rows) out.subject_ids.push_back(subject_ids[r]);
  if (!trace.empty()) {
    out.trace = trace;
    out.trace.rho.clear();
    for (std::size_t m = 0; m < count(); ++m)
      for (std::size_t r : rows) out.trace.rho.push_back(trace.rho[m * subjects + r]);
  }
  return out;
}

void AncestryDraws::validate() const {
  if (count() == 0) throw FormatError("ancestry draws contain no retained draw");
  if (values.size() != count() * subjects * loci) throw FormatError("ancestry draw payload has the wrong size");
  for (auto v : values)
    if (v > 2) throw FormatError(fmt::format("ancestry value {} outside {{0,1,2}}", int(v)));
  if (!subject_ids.empty() && subject_ids.size() != subjects) throw FormatError("subject id count mismatch");
  if (!marker_ids.empty() && marker_ids.size() != loci) throw FormatError("marker id count mismatch");
}

// --- genotype imputation -----------------------------------------------------

void impute_missing_genotypes(std::span<std::uint8_t> genotypes_row, std::span<const std::uint8_t> observed_row,
                              std::span<const std::uint8_t> ancestry_row, std::span<const double> pA,
                              std::span<const double> pB, Rng& rng) {
  for (std::size_t j = 0; j < observed_row.size(); ++j) {
    if (observed_row[j] != kMissingGenotype) continue;
    const Mat3 P = observation_matrix(pA[j], pB[j]);
    genotypes_row[j] = static_cast<std::uint8_t>(draw_categorical(P[ancestry_row[j]], rng));
  }
}

// --- FFBS --------------------------------------------------------------------

std::vector<Vec3> forward_filter(const ChainSlice& chain) {
  const std::size_t L = chain.genotypes.size();
  std::vector<Vec3> alpha(L);
  if (L == 0) return alpha;
  const auto Q = conditional_transitions(chain.rho);
  const Vec3 q0 = initial_state_vector(chain.rho);

  for (std::size_t k = 0; k < L; ++k) {
    const std::uint8_t x = chain.genotypes[k];
    const Mat3 P = observation_matrix(chain.pA[k], chain.pB[k]);
    Vec3 a{};
    if (k == 0) {
      for (int n = 0; n < 3; ++n) a[n] = q0[n];
    } else {
      const Mat3& T = Q[chain.recombination[k]];
      const Vec3& prev = alpha[k - 1];
      for (int n = 0; n < 3; ++n) a[n] = prev[0] * T[0][n] + prev[1] * T[1][n] + prev[2] * T[2][n];
    }
    if (x != kMissingGenotype)
      for (int n = 0; n < 3; ++n) a[n] *= P[n][x];
    const double norm = a[0] + a[1] + a[2];
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw NumericalError(fmt::format("forward mass vanished at locus {}", chain.first_locus + k));
    for (auto& v : a) v /= norm;
    alpha[k] = a;
  }
  return alpha;
}

void ffbs_sample_path(const ChainSlice& chain, std::span<std::uint8_t> path, Rng& rng) {
  const std::size_t L = chain.genotypes.size();
  if (path.size() != L) throw AlignmentError("path length does not match chain slice");
  if (L == 0) return;
  const auto alpha = forward_filter(chain);
  const auto Q = conditional_transitions(chain.rho);

  path[L - 1] = static_cast<std::uint8_t>(draw_categorical(alpha[L - 1], rng));
  for (std::size_t k = L - 1; k-- > 0;) {
    const Mat3& T = Q[chain.recombination[k + 1]];
    const int next = path[k + 1];
    const Vec3 w{alpha[k][0] * T[0][next], alpha[k][1] * T[1][next], alpha[k][2] * T[2][next]};
    path[k] = static_cast<std::uint8_t>(draw_categorical(w, rng));
  }
}

// --- recombination counts ----------------------------------------------------

Vec3 recombination_conditional(int from, int to, double rho, double gamma) {
  Vec3 w{};
  double total = 0.0;
  for (int r = 0; r < 3; ++r) {
    w[r] = conditional_transition(r, rho)[from][to] * recombination_weight(r, gamma);
    total += w[r];
  }
  if (!(total > 0.0))
    throw NumericalError(fmt::format("recombination conditional has no mass ({} -> {}, rho {}, gamma {})", from, to,
                                     rho, gamma));
  for (auto& v : w) v /= total;
  return w;
}

void sample_recombination_counts(std::span<std::uint8_t> recombination_row, std::span<const std::uint8_t> ancestry_row,
                                 std::span<const double> gamma, std::span<const std::uint8_t> start_flags,
                                 double rho, Rng& rng) {
  const auto Q = conditional_transitions(rho);
  for (std::size_t j = 0; j < ancestry_row.size(); ++j) {
    if (start_flags[j]) {
      recombination_row[j] = 2;
      continue;
    }
    const int m = ancestry_row[j - 1];
    const int n = ancestry_row[j];
    const Vec3 w{Q[0][m][n] * recombination_weight(0, gamma[j]), Q[1][m][n] * recombination_weight(1, gamma[j]),
                 Q[2][m][n] * recombination_weight(2, gamma[j])};
    recombination_row[j] = static_cast<std::uint8_t>(draw_categorical(w, rng));
  }
}

// --- conjugate and MH updates ------------------------------------------------

std::pair<double, double> gamma_posterior(double tau_gamma, double gamma0, long recombination_sum,
                                          std::size_t subjects) {
  const double two_i = 2.0 * static_cast<double>(subjects);
  return {tau_gamma * gamma0 + recombination_sum, tau_gamma * (1.0 - gamma0) + two_i - recombination_sum};
}

RhoCounts tabulate_rho_counts(std::span<const std::uint8_t> ancestry_row,
                              std::span<const std::uint8_t> recombination_row,
                              std::span<const std::uint8_t> start_flags) {
  RhoCounts c;
  for (std::size_t j = 0; j < ancestry_row.size(); ++j) {
    const int l = ancestry_row[j];
    switch (recombination_row[j]) {
      case 1: {
        if (start_flags[j]) break;
        const int k = ancestry_row[j - 1];
        // Single recombination: moves that pick an A chromosome are successes.
        if ((k == 0 && l == 1) || (k == 1 && l == 2) || (k == 2 && l == 2)) ++c.successes;
        if ((k == 0 && l == 0) || (k == 1 && l == 0) || (k == 2 && l == 1)) ++c.failures;
        break;
      }
      case 2:
        c.successes += l;
        c.failures += 2 - l;
        break;
      default:
        break;
    }
  }
  return c;
}

std::pair<double, double> rho_posterior(double tau_rho, double rho0, const RhoCounts& counts) {
  return {tau_rho * rho0 + counts.successes, tau_rho * (1.0 - rho0) + counts.failures};
}

double variant_on_a_probability(double pA, double pB) {
  const double a = pA * (1.0 - pB);
  const double b = pB * (1.0 - pA);
  return a / (a + b);
}

AlleleFreqPosterior allele_freq_posterior(const AlleleCounts& n, long n11_va, double tauA, double tauB, double pA0,
                                          double pB0) {
  const long n11_vb = n[1][1] - n11_va;
  AlleleFreqPosterior post{};
  // Ancestry-1 genotypes X=2 and X=0 pin both alleles, so they inform pA and pB alike.
  post.a_alpha = tauA * pA0 + n[2][1] + 2 * n[2][2] + n11_va + n[1][2];
  post.a_beta = tauA * (1.0 - pA0) + n[2][1] + 2 * n[2][0] + n11_vb + n[1][0];
  post.b_alpha = tauB * pB0 + n[0][1] + 2 * n[0][2] + n11_vb + n[1][2];
  post.b_beta = tauB * (1.0 - pB0) + n[0][1] + 2 * n[0][0] + n11_va + n[1][0];
  return post;
}

double tau_log_target(double tau, std::span<const double> freqs, std::span<const double> ref_freqs) {
  if (!(tau > kTauMin && tau < kTauMax)) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (std::size_t j = 0; j < freqs.size(); ++j)
    s += log_beta_density(freqs[j], tau * ref_freqs[j], tau * (1.0 - ref_freqs[j]));
  return s;
}

bool tau_mh_step(double& tau, double sigma, std::span<const double> freqs, std::span<const double> ref_freqs,
                 Rng& rng) {
  const double proposal = tau + sigma * draw_normal(rng);
  const double u = draw_uniform(rng);
  const double log_new = tau_log_target(proposal, freqs, ref_freqs);
  if (!std::isfinite(log_new)) return false;
  const double log_old = tau_log_target(tau, freqs, ref_freqs);
  if (std::log(u) < log_new - log_old) {
    tau = proposal;
    return true;
  }
  return false;
}

StepSizeTuner::StepSizeTuner(double sigma, double target, int batch) : sigma_(sigma), target_(target), batch_(batch) {}

void StepSizeTuner::record(bool accepted) {
  ++total_;
  accepted_total_ += accepted;
  ++in_batch_;
  accepted_in_batch_ += accepted;
  if (in_batch_ < batch_) return;
  const double rate = double(accepted_in_batch_) / in_batch_;
  ++rounds_;
  const double gain = 1.0 / std::sqrt(static_cast<double>(rounds_));
  sigma_ = std::clamp(sigma_ * std::exp(2.0 * gain * (rate - target_)), 1e-2, 2.0 * (kTauMax - kTauMin));
  in_batch_ = 0;
  accepted_in_batch_ = 0;
}

// --- sampler -----------------------------------------------------------------

AncestrySampler::AncestrySampler(const AimPanel& panel, const GenotypeMatrix& genotypes, HmmHyperparams hyper)
    : panel_(panel),
      observed_(genotypes),
      hyper_(std::move(hyper)),
      tunerA_(hyper_.mh_sigma),
      tunerB_(hyper_.mh_sigma) {
  observed_.validate(panel_);
  hyper_.validate(panel_, observed_.subjects());
  priors_ = HmmPriors::build(panel_, hyper_, observed_.subjects());
  initialize();
}

void AncestrySampler::initialize() {
  const std::size_t I = observed_.subjects();
  const std::size_t J = panel_.size();
  state_.subjects = I;
  state_.loci = J;
  state_.ancestry.assign(I * J, 0);
  state_.recombination.assign(I * J, 0);
  state_.genotypes.assign(observed_.cells().begin(), observed_.cells().end());
  state_.pA = priors_.pA0;
  state_.pB = priors_.pB0;
  state_.gamma = priors_.gamma0;
  state_.rho = priors_.rho0;
  state_.tauA = hyper_.tau_init;
  state_.tauB = hyper_.tau_init;

  parallel_for(I, hyper_.workers, [&](std::size_t i) {
    Rng rng = make_stream(hyper_.seed, {kInitPhase, i});
    const Vec3 q0 = initial_state_vector(state_.rho[i]);
    auto s = state_.ancestry_row(i);
    for (std::size_t j = 0; j < J; ++j) {
      Vec3 w = q0;
      const auto x = observed_(i, j);
      if (x != kMissingGenotype) {
        const Mat3 P = observation_matrix(state_.pA[j], state_.pB[j]);
        for (int n = 0; n < 3; ++n) w[n] *= P[n][x];
      }
      s[j] = static_cast<std::uint8_t>(draw_categorical(w, rng));
    }
    impute_missing_genotypes(state_.genotype_row(i), observed_.row(i), s, state_.pA, state_.pB, rng);
    sample_recombination_counts(state_.recombination_row(i), s, state_.gamma, priors_.start, state_.rho[i], rng);
  });
}

void AncestrySampler::update_subject(std::size_t i, Rng& rng) {
  auto s = state_.ancestry_row(i);
  auto x = state_.genotype_row(i);
  auto r = state_.recombination_row(i);
  const std::span<const double> pA = state_.pA;
  const std::span<const double> pB = state_.pB;

  impute_missing_genotypes(x, observed_.row(i), s, pA, pB, rng);

  for (const auto& [begin, end] : panel_.segments()) {
    const std::size_t len = end - begin;
    ChainSlice chain{x.subspan(begin, len), r.subspan(begin, len), pA.subspan(begin, len), pB.subspan(begin, len),
                     state_.rho[i], begin};
    try {
      ffbs_sample_path(chain, s.subspan(begin, len), rng);
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("subject {}: {}", i, e.what()));
    }
  }

  sample_recombination_counts(r, s, state_.gamma, priors_.start, state_.rho[i], rng);

  const auto [a, b] = rho_posterior(priors_.tau_rho[i], priors_.rho0[i], tabulate_rho_counts(s, r, priors_.start));
  state_.rho[i] = clamp_open(draw_beta(a, b, rng), kSampledFreqFloor);  // 1 - rho needs no separate draw
}

void AncestrySampler::update_locus(std::size_t j, Rng& rng) {
  const std::size_t I = state_.subjects;
  const std::size_t J = state_.loci;

  if (!priors_.start[j]) {
    long sum_r = 0;
    for (std::size_t i = 0; i < I; ++i) sum_r += state_.recombination[i * J + j];
    const auto [a, b] = gamma_posterior(priors_.tau_gamma[j], priors_.gamma0[j], sum_r, I);
    state_.gamma[j] = clamp_open(draw_beta(a, b, rng), kSampledFreqFloor);
  }

  AlleleCounts n{};
  for (std::size_t i = 0; i < I; ++i) n[state_.ancestry[i * J + j]][state_.genotypes[i * J + j]] += 1;
  const long n11_va = draw_binomial(static_cast<int>(n[1][1]), variant_on_a_probability(state_.pA[j], state_.pB[j]), rng);
  const auto post = allele_freq_posterior(n, n11_va, state_.tauA, state_.tauB, priors_.pA0[j], priors_.pB0[j]);
  state_.pA[j] = clamp_open(draw_beta(post.a_alpha, post.a_beta, rng), kSampledFreqFloor);
  state_.pB[j] = clamp_open(draw_beta(post.b_alpha, post.b_beta, rng), kSampledFreqFloor);
}

void AncestrySampler::update_tau(Rng& rng, bool adapt) {
  const bool acc_a = tau_mh_step(state_.tauA, tunerA_.sigma(), state_.pA, priors_.pA0, rng);
  const bool acc_b = tau_mh_step(state_.tauB, tunerB_.sigma(), state_.pB, priors_.pB0, rng);
  if (adapt) {
    tunerA_.record(acc_a);
    tunerB_.record(acc_b);
  }
}

void AncestrySampler::sweep(std::uint64_t index, bool adapt) {
  try {
    parallel_for(state_.subjects, hyper_.workers, [&](std::size_t i) {
      Rng rng = make_stream(hyper_.seed, {index, kSubjectPhase, i});
      update_subject(i, rng);
    });
    parallel_for(state_.loci, hyper_.workers, [&](std::size_t j) {
      Rng rng = make_stream(hyper_.seed, {index, kLocusPhase, j});
      update_locus(j, rng);
    });
    Rng rng = make_stream(hyper_.seed, {index, kTauPhase});
    update_tau(rng, adapt);
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format("iteration {}: {}", index, e.what()));
  }
}

AncestryDraws run_mcmc(const GenotypeMatrix& genotypes, const AimPanel& panel, const HmmHyperparams& hyper,
                       bool keep_trace) {
  AncestrySampler sampler(panel, genotypes, hyper);
  AncestryDraws draws;
  draws.subjects = genotypes.subjects();
  draws.loci = panel.size();
  draws.seed = hyper.seed;
  draws.subject_ids = genotypes.subject_ids;
  draws.marker_ids = panel.ids();

  std::uint64_t t = 0;
  for (int b = 0; b < hyper.burn_in; ++b) sampler.sweep(t++, hyper.adapt_mh);
  for (int k = 1; k <= hyper.n_draws; ++k) {
    sampler.sweep(t, false);
    if (k % hyper.thin == 0) {
      const HmmState& st = sampler.state();
      draws.append(st.ancestry, t);
      if (keep_trace) {
        auto& tr = draws.trace;
        tr.gamma.insert(tr.gamma.end(), st.gamma.begin(), st.gamma.end());
        tr.rho.insert(tr.rho.end(), st.rho.begin(), st.rho.end());
        tr.pA.insert(tr.pA.end(), st.pA.begin(), st.pA.end());
        tr.pB.insert(tr.pB.end(), st.pB.begin(), st.pB.end());
        tr.tauA.push_back(st.tauA);
        tr.tauB.push_back(st.tauB);
      }
    }
    ++t;
  }
  return draws;
}

}  // namespace gleam
