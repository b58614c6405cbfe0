#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gleam/genetics.hpp"
#include "gleam/hmm_model.hpp"
#include "gleam/rng.hpp"

namespace gleam {

struct HmmHyperparams {
  double lambda = 6.0;            // recombinations per Morgan since admixture
  double mu0 = 1e-4;              // prior variance of each gamma_j
  std::vector<double> rho0;       // per-subject prior mean; empty means default_rho0 for all
  double default_rho0 = 0.8;
  double nu0 = 0.01;              // prior variance of each rho_i
  double mh_sigma = 50.0;         // initial random-walk step for tauA / tauB
  bool adapt_mh = true;           // tune mh_sigma during burn-in, then freeze
  double tau_init = 200.0;
  int burn_in = 500;
  int n_draws = 1000;
  int thin = 50;
  std::uint64_t seed = 1;
  unsigned workers = 1;

  double rho0_for(std::size_t subject) const { return rho0.empty() ? default_rho0 : rho0.at(subject); }
  /// Throws ConfigError on any violated bound.
  void validate(const AimPanel& panel, std::size_t subjects) const;
};

/// Bounds of the uniform prior on tauA and tauB.
inline constexpr double kTauMin = 50.0;
inline constexpr double kTauMax = 1000.0;
/// Floor applied to gamma_0j so that Beta shapes stay positive at zero distance.
inline constexpr double kGammaFloor = 1e-6;

/// Prior quantities derived once from the panel and hyperparameters.
struct HmmPriors {
  std::vector<double> gamma0;     // 1 at chromosome starts
  std::vector<double> tau_gamma;  // per-locus Beta concentration, floored at 1
  std::vector<double> rho0;
  std::vector<double> tau_rho;
  std::vector<double> pA0;
  std::vector<double> pB0;
  std::vector<std::uint8_t> start;

  static HmmPriors build(const AimPanel& panel, const HmmHyperparams& hyper, std::size_t subjects);
};

/// Every parameter and latent variable of one sampler iteration.
///
/// At a chromosome start the chain restarts from the initial vector. This is
/// represented as gamma_j = 1 and R_ij = 2 (a full redraw from Q_i0), which
/// makes the first marker's ancestry count towards the rho update.
struct HmmState {
  std::size_t subjects = 0;
  std::size_t loci = 0;
  std::vector<std::uint8_t> ancestry;       // S, subjects × loci
  std::vector<std::uint8_t> recombination;  // R, subjects × loci
  std::vector<std::uint8_t> genotypes;      // X with missing cells imputed
  std::vector<double> pA, pB, gamma;        // per locus
  std::vector<double> rho;                  // per subject
  double tauA = 200.0;
  double tauB = 200.0;

  std::span<std::uint8_t> ancestry_row(std::size_t i) { return {ancestry.data() + i * loci, loci}; }
  std::span<const std::uint8_t> ancestry_row(std::size_t i) const { return {ancestry.data() + i * loci, loci}; }
  std::span<std::uint8_t> recombination_row(std::size_t i) { return {recombination.data() + i * loci, loci}; }
  std::span<const std::uint8_t> recombination_row(std::size_t i) const {
    return {recombination.data() + i * loci, loci};
  }
  std::span<std::uint8_t> genotype_row(std::size_t i) { return {genotypes.data() + i * loci, loci}; }
  std::span<const std::uint8_t> genotype_row(std::size_t i) const { return {genotypes.data() + i * loci, loci}; }

  /// Throws NumericalError describing the first violated range invariant.
  void check_invariants(std::span<const std::uint8_t> start_flags) const;
};

/// M retained posterior draws of the subjects × loci ancestry matrix.
struct AncestryDraws {
  std::size_t subjects = 0;
  std::size_t loci = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> iterations;  // sweep index of each retained draw
  std::vector<std::uint8_t> values;       // M × subjects × loci
  std::vector<std::string> subject_ids;
  std::vector<std::string> marker_ids;

  struct Trace {
    std::vector<double> gamma, rho, pA, pB;  // each M × length
    std::vector<double> tauA, tauB;          // M
    bool empty() const noexcept { return tauA.empty(); }
  } trace;

  std::size_t count() const noexcept { return iterations.size(); }
  std::uint8_t operator()(std::size_t m, std::size_t i, std::size_t j) const {
    return values[(m * subjects + i) * loci + j];
  }
  std::span<const std::uint8_t> draw(std::size_t m) const {
    return {values.data() + m * subjects * loci, subjects * loci};
  }

  void append(std::span<const std::uint8_t> matrix, std::uint64_t iteration);
  /// Keeps only the listed subjects, in the listed order.
  AncestryDraws select_subjects(std::span<const std::size_t> rows) const;
  /// Throws FormatError on inconsistent sizes or out-of-range values.
  void validate() const;

  friend bool operator==(const AncestryDraws&, const AncestryDraws&) = default;
};

inline bool operator==(const AncestryDraws::Trace& a, const AncestryDraws::Trace& b) {
  return a.gamma == b.gamma && a.rho == b.rho && a.pA == b.pA && a.pB == b.pB && a.tauA == b.tauA &&
         a.tauB == b.tauB;
}

// --- individual sweep steps -------------------------------------------------

/// Redraws every missing genotype of one subject from row S_ij of P_j.
void impute_missing_genotypes(std::span<std::uint8_t> genotypes_row, std::span<const std::uint8_t> observed_row,
                              std::span<const std::uint8_t> ancestry_row, std::span<const double> pA,
                              std::span<const double> pB, Rng& rng);

/// One chromosome segment of one subject, conditioned on recombination counts.
struct ChainSlice {
  std::span<const std::uint8_t> genotypes;
  std::span<const std::uint8_t> recombination;  // entry 0 ignored: the chain starts at Q_i0
  std::span<const double> pA;
  std::span<const double> pB;
  double rho = 0.8;
  std::size_t first_locus = 0;  // global index, for diagnostics
};

/// Forward filtering with per-locus normalization followed by
/// backward sampling. Writes a path drawn from Prob(S | X, R) into `path`.
/// Throws NumericalError naming the locus if the forward mass vanishes.
void ffbs_sample_path(const ChainSlice& chain, std::span<std::uint8_t> path, Rng& rng);

/// Normalized forward probabilities (3 per locus) for the slice; exposed for tests.
std::vector<Vec3> forward_filter(const ChainSlice& chain);

/// Full conditional of R_j given S_{j-1} = from, S_j = to.
Vec3 recombination_conditional(int from, int to, double rho, double gamma);

/// Samples the recombination counts for one subject. Chromosome starts receive R = 2.
void sample_recombination_counts(std::span<std::uint8_t> recombination_row, std::span<const std::uint8_t> ancestry_row,
                                 std::span<const double> gamma, std::span<const std::uint8_t> start_flags,
                                 double rho, Rng& rng);

/// Beta parameters of the gamma_j full conditional.
std::pair<double, double> gamma_posterior(double tau_gamma, double gamma0, long recombination_sum,
                                          std::size_t subjects);

/// Success/failure counts entering the rho_i full conditional.
struct RhoCounts {
  long successes = 0;
  long failures = 0;
};
RhoCounts tabulate_rho_counts(std::span<const std::uint8_t> ancestry_row,
                              std::span<const std::uint8_t> recombination_row,
                              std::span<const std::uint8_t> start_flags);
std::pair<double, double> rho_posterior(double tau_rho, double rho0, const RhoCounts& counts);

/// n_kl = #{subjects : S_ij = k, X_ij = l} at one locus.
using AlleleCounts = std::array<std::array<long, 3>, 3>;

struct AlleleFreqPosterior {
  double a_alpha, a_beta;  // Beta shapes for pA
  double b_alpha, b_beta;  // Beta shapes for pB
};
/// Beta shapes for pA, pB given the counts and a fixed split n11_va of the
/// heterozygous-ancestry heterozygotes (variant allele on the A chromosome).
AlleleFreqPosterior allele_freq_posterior(const AlleleCounts& n, long n11_va, double tauA, double tauB, double pA0,
                                          double pB0);
/// Probability that a S=1, X=1 genotype carries its variant on the A chromosome.
double variant_on_a_probability(double pA, double pB);

/// Log of the unnormalized tau posterior: Σ_j log Beta(p_j; tau p0_j, tau (1 - p0_j)),
/// or -inf outside (kTauMin, kTauMax).
double tau_log_target(double tau, std::span<const double> freqs, std::span<const double> ref_freqs);

/// One random-walk Metropolis-Hastings move. Returns whether the proposal was accepted.
bool tau_mh_step(double& tau, double sigma, std::span<const double> freqs, std::span<const double> ref_freqs,
                 Rng& rng);

/// Batch Robbins-Monro tuner of the random-walk step size on the log scale.
class StepSizeTuner {
 public:
  StepSizeTuner(double sigma, double target = 0.375, int batch = 25);
  void record(bool accepted);
  double sigma() const noexcept { return sigma_; }
  double acceptance_rate() const noexcept { return total_ ? double(accepted_total_) / total_ : 0.0; }

 private:
  double sigma_;
  double target_;
  int batch_;
  int in_batch_ = 0;
  int accepted_in_batch_ = 0;
  int rounds_ = 0;
  long total_ = 0;
  long accepted_total_ = 0;
};

/// Gibbs/MH sampler over the admixture HMM. One `sweep` runs a
/// subject-parallel phase (impute, FFBS, recombinations, rho), a
/// locus-parallel phase (gamma, allele frequencies), then the tau moves.
/// Each task draws from its own stream keyed by (seed, sweep, phase, index).
class AncestrySampler {
 public:
  AncestrySampler(const AimPanel& panel, const GenotypeMatrix& genotypes, HmmHyperparams hyper);

  const HmmState& state() const noexcept { return state_; }
  HmmState& mutable_state() noexcept { return state_; }
  const HmmPriors& priors() const noexcept { return priors_; }
  const HmmHyperparams& hyper() const noexcept { return hyper_; }

  /// Runs one full sweep; `adapt` enables step-size tuning for the tau moves.
  void sweep(std::uint64_t index, bool adapt);

  /// Imputes missing genotypes, resamples S, R and rho for one subject.
  void update_subject(std::size_t i, Rng& rng);
  /// Resamples gamma and the allele frequencies at one locus.
  void update_locus(std::size_t j, Rng& rng);
  /// Random-walk MH moves for tauA and tauB.
  void update_tau(Rng& rng, bool adapt);

  double tauA_acceptance() const noexcept { return tunerA_.acceptance_rate(); }
  double tauB_acceptance() const noexcept { return tunerB_.acceptance_rate(); }
  double sigmaA() const noexcept { return tunerA_.sigma(); }
  double sigmaB() const noexcept { return tunerB_.sigma(); }

 private:
  void initialize();

  const AimPanel& panel_;
  const GenotypeMatrix& observed_;
  HmmHyperparams hyper_;
  HmmPriors priors_;
  HmmState state_;
  StepSizeTuner tunerA_;
  StepSizeTuner tunerB_;
};

/// Runs burn_in + n_draws sweeps and retains every thin-th post-burn-in sweep.
AncestryDraws run_mcmc(const GenotypeMatrix& genotypes, const AimPanel& panel, const HmmHyperparams& hyper,
                       bool keep_trace = true);

}  // namespace gleam
