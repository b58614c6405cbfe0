#include "gleam/genetics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "gleam/error.hpp"

namespace gleam {

AimPanel::AimPanel(std::vector<Marker> markers) : markers_(std::move(markers)) {
  if (markers_.empty()) throw DomainError("marker panel is empty");
  const std::size_t J = markers_.size();
  distance_.assign(J, 0.0);
  start_.assign(J, 0);

  std::set<int> finished;
  std::size_t seg_begin = 0;
  for (std::size_t j = 0; j < J; ++j) {
    Marker& m = markers_[j];
    if (!std::isfinite(m.position) || m.position < 0.0)
      throw DomainError(fmt::format("marker {} has invalid position {}", m.id, m.position));
    if (!(m.pA0 >= 0.0 && m.pA0 <= 1.0))
      throw DomainError(fmt::format("marker {} has invalid pA0 {}", m.id, m.pA0));
    if (!(m.pB0 >= 0.0 && m.pB0 <= 1.0))
      throw DomainError(fmt::format("marker {} has invalid pB0 {}", m.id, m.pB0));
    m.pA0 = std::clamp(m.pA0, kFrequencyFloor, 1.0 - kFrequencyFloor);
    m.pB0 = std::clamp(m.pB0, kFrequencyFloor, 1.0 - kFrequencyFloor);

    const bool start = j == 0 || markers_[j - 1].chromosome != m.chromosome;
    if (start) {
      if (finished.contains(m.chromosome))
        throw DomainError(fmt::format("chromosome {} is not contiguous in the panel (marker {})", m.chromosome, m.id));
      if (j > 0) {
        finished.insert(markers_[j - 1].chromosome);
        segments_.emplace_back(seg_begin, j);
      }
      seg_begin = j;
      start_[j] = 1;
    } else {
      const double d = m.position - markers_[j - 1].position;
      if (d < 0.0)
        throw DomainError(fmt::format("marker {} position decreases within chromosome {}", m.id, m.chromosome));
      distance_[j] = d;
    }
  }
  segments_.emplace_back(seg_begin, J);
}

std::vector<std::string> AimPanel::ids() const {
  std::vector<std::string> out;
  out.reserve(markers_.size());
  for (const auto& m : markers_) out.push_back(m.id);
  return out;
}

GenotypeMatrix::GenotypeMatrix(std::size_t subjects, std::size_t markers)
    : subjects_(subjects), markers_(markers), cells_(subjects * markers, 0) {}

std::size_t GenotypeMatrix::missing_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), kMissingGenotype));
}

void GenotypeMatrix::validate(const AimPanel& panel) const {
  if (markers_ != panel.size())
    throw AlignmentError(fmt::format("genotype matrix has {} markers, panel has {}", markers_, panel.size()));
  if (subjects_ == 0) throw AlignmentError("genotype matrix has no subjects");
  if (!subject_ids.empty() && subject_ids.size() != subjects_)
    throw AlignmentError("subject id list does not match genotype rows");
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto v = cells_[k];
    if (v > 2 && v != kMissingGenotype)
      throw DomainError(fmt::format("genotype cell ({}, {}) has value {}", k / markers_, k % markers_, int(v)));
  }
}

}  // namespace gleam
