#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gleam {

/// Reference frequencies are clamped into [kFrequencyFloor, 1 - kFrequencyFloor].
inline constexpr double kFrequencyFloor = 1e-4;

/// Sentinel for an unobserved genotype cell.
inline constexpr std::uint8_t kMissingGenotype = 0xFF;

struct Marker {
  std::string id;
  int chromosome = 1;
  double position = 0.0;  // Morgans
  double pA0 = 0.5;       // variant-allele frequency, high-risk reference population
  double pB0 = 0.5;       // variant-allele frequency, low-risk reference population
};

/// Ordered ancestry-informative marker panel. Markers of one chromosome are
/// contiguous; each chromosome starts a fresh Markov chain.
class AimPanel {
 public:
  AimPanel() = default;
  explicit AimPanel(std::vector<Marker> markers);

  std::size_t size() const noexcept { return markers_.size(); }
  const Marker& marker(std::size_t j) const { return markers_.at(j); }
  const std::vector<Marker>& markers() const noexcept { return markers_; }

  /// Genetic distance (Morgans) to the previous marker; 0 at a chromosome start.
  double distance(std::size_t j) const { return distance_.at(j); }
  bool is_chromosome_start(std::size_t j) const { return start_.at(j) != 0; }
  std::span<const std::uint8_t> start_flags() const noexcept { return start_; }

  /// Half-open [begin, end) marker ranges, one per chromosome, in panel order.
  const std::vector<std::pair<std::size_t, std::size_t>>& segments() const noexcept { return segments_; }

  std::vector<std::string> ids() const;

 private:
  std::vector<Marker> markers_;
  std::vector<double> distance_;
  std::vector<std::uint8_t> start_;
  std::vector<std::pair<std::size_t, std::size_t>> segments_;
};

/// Row-major subjects × markers matrix of 0/1/2 variant-allele counts with
/// kMissingGenotype for unobserved cells.
class GenotypeMatrix {
 public:
  GenotypeMatrix() = default;
  GenotypeMatrix(std::size_t subjects, std::size_t markers);

  std::size_t subjects() const noexcept { return subjects_; }
  std::size_t markers() const noexcept { return markers_; }

  std::uint8_t operator()(std::size_t i, std::size_t j) const { return cells_[i * markers_ + j]; }
  std::uint8_t& operator()(std::size_t i, std::size_t j) { return cells_[i * markers_ + j]; }

  std::span<const std::uint8_t> row(std::size_t i) const { return {cells_.data() + i * markers_, markers_}; }
  std::span<const std::uint8_t> cells() const noexcept { return cells_; }

  bool is_missing(std::size_t i, std::size_t j) const { return (*this)(i, j) == kMissingGenotype; }
  std::size_t missing_count() const;

  std::vector<std::string> subject_ids;

  /// Throws AlignmentError if dimensions disagree with the panel, DomainError
  /// if a cell is neither 0, 1, 2 nor missing.
  void validate(const AimPanel& panel) const;

  friend bool operator==(const GenotypeMatrix&, const GenotypeMatrix&) = default;

 private:
  std::size_t subjects_ = 0;
  std::size_t markers_ = 0;
  std::vector<std::uint8_t> cells_;
};

}  // namespace gleam
