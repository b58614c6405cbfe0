#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gleam/genetics.hpp"
#include "gleam/glm.hpp"
#include "gleam/hmm_sampler.hpp"
#include "gleam/mapping.hpp"
#include "gleam/qnm.hpp"

namespace gleam {

namespace fs = std::filesystem;

// --- panel --------------------------------------------------------------------

enum class PositionUnit { Morgan, CentiMorgan, Megabase };

std::string_view to_string(PositionUnit unit);
PositionUnit parse_position_unit(std::string_view text);

struct PanelReadOptions {
  PositionUnit unit = PositionUnit::Morgan;
  double cm_per_mb = 1.0;  // only used for Megabase positions
};

/// Columns: marker_id, chrom, position, pA0, pB0. A header row is required;
/// blank lines and lines starting with '#' are skipped.
AimPanel read_panel(const fs::path& path, const PanelReadOptions& options = {});
/// Writes positions in Morgans.
void write_panel(const fs::path& path, const AimPanel& panel);

// --- genotypes ------------------------------------------------------------------

/// Header: subject_id then marker ids; cells 0, 1, 2 or NA. Columns are matched
/// to the panel by id and returned in panel order.
GenotypeMatrix read_genotypes(const fs::path& path, const AimPanel& panel);
void write_genotypes(const fs::path& path, const GenotypeMatrix& genotypes, const AimPanel& panel);

// --- phenotypes -----------------------------------------------------------------

struct Phenotypes {
  std::vector<std::string> subject_ids;
  TraitData trait;
  std::vector<std::string> dropped;  // ids removed for NA trait or covariate values
};

/// Header: subject_id, trait, covariates... `covariates` picks columns by name;
/// empty means every column after the trait.
Phenotypes read_phenotypes(const fs::path& path, TraitKind kind, const std::vector<std::string>& covariates = {});
void write_phenotypes(const fs::path& path, std::span<const std::string> ids, const TraitData& trait);

/// Row index in `ancestry_ids` for each phenotype subject. Phenotype subjects
/// without ancestry raise AlignmentError listing the first 10 offenders.
std::vector<std::size_t> align_subjects(std::span<const std::string> ancestry_ids,
                                        std::span<const std::string> phenotype_ids);

// --- ancestry draws -------------------------------------------------------------

inline constexpr char kDrawsMagic[8] = {'G', 'L', 'E', 'A', 'M', 'D', 'R', 'W'};
inline constexpr std::uint32_t kDrawsVersion = 1;

std::vector<std::uint8_t> encode_draws(const AncestryDraws& draws);
AncestryDraws decode_draws(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");

void write_draws(const fs::path& path, const AncestryDraws& draws);
/// Throws FormatError on a checksum, magic or version mismatch.
AncestryDraws read_draws(const fs::path& path);

// --- result tables -------------------------------------------------------------

/// Fixed-precision decimal used for every numeric output cell.
std::string format_real(double value);

void write_scan_table(const fs::path& path, const ScanResult& result, std::span<const std::string> marker_ids);
void write_subset_table(const fs::path& path, const ScanResult& result, std::span<const std::string> marker_ids);
void write_ald_table(const fs::path& path, const AldResult& ald, std::span<const std::string> marker_ids);
void write_density_table(const fs::path& path, std::span<const DensityPoint> points, bool bivariate);

// --- small file helpers ---------------------------------------------------------

std::string read_text_file(const fs::path& path);
/// Writes through a temporary file and renames it into place.
void write_text_file(const fs::path& path, std::string_view text);
std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace gleam
