#include "gleam/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <zlib.h>

#include "gleam/error.hpp"

namespace gleam {

// --- helpers ------------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open '{}' for reading", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(fmt::format("cannot open '{}' for writing", tmp.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw FormatError(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes a uInt length, so feed large buffers in pieces.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string format_real(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.10g}", value);
}

namespace {

struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

Table read_table(const fs::path& path) {
  Table t;
  t.file = path.string();
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_tabs(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(t.file, lineno, std::min(fields.size(), t.header.size()) + 1,
                       fmt::format("expected {} fields, found {}", t.header.size(), fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw ParseError(t.file, lineno, 1, "missing header row");
  return t;
}

double parse_real(const Table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(t.file, t.line_numbers[row], col + 1, fmt::format("'{}' is not a number", s));
  return v;
}

long parse_integer(const Table& t, std::size_t row, std::size_t col) {
  const std::string& s = t.rows[row][col];
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ParseError(t.file, t.line_numbers[row], col + 1, fmt::format("'{}' is not an integer", s));
  return v;
}

bool is_na(std::string_view s) { return s == "NA" || s == "na" || s == "."; }

std::string offender_list(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t k = 0; k < shown; ++k) out += (k ? ", " : "") + ids[k];
  if (ids.size() > shown) out += fmt::format(" (and {} more)", ids.size() - shown);
  return out;
}

}  // namespace

// --- panel --------------------------------------------------------------------

std::string_view to_string(PositionUnit unit) {
  switch (unit) {
    case PositionUnit::Morgan: return "morgan";
    case PositionUnit::CentiMorgan: return "cM";
    case PositionUnit::Megabase: return "Mb";
  }
  return "unknown";
}

PositionUnit parse_position_unit(std::string_view text) {
  if (text == "morgan" || text == "M" || text == "morgans") return PositionUnit::Morgan;
  if (text == "cM" || text == "cm" || text == "centimorgan") return PositionUnit::CentiMorgan;
  if (text == "Mb" || text == "mb" || text == "megabase") return PositionUnit::Megabase;
  throw ConfigError(fmt::format("unknown position unit '{}' (use morgan, cM or Mb)", text));
}

AimPanel read_panel(const fs::path& path, const PanelReadOptions& options) {
  if (!(options.cm_per_mb > 0.0)) throw ConfigError("cM per Mb must be positive");
  const Table t = read_table(path);
  if (t.header.size() != 5)
    throw ParseError(t.file, 1, 1, "panel needs columns marker_id, chrom, position, pA0, pB0");
  double scale = 1.0;
  if (options.unit == PositionUnit::CentiMorgan) scale = 0.01;
  if (options.unit == PositionUnit::Megabase) scale = 0.01 * options.cm_per_mb;
  std::vector<Marker> markers;
  markers.reserve(t.rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Marker m;
    m.id = t.rows[r][0];
    if (m.id.empty()) throw ParseError(t.file, t.line_numbers[r], 1, "empty marker id");
    if (!seen.insert(m.id).second)
      throw ParseError(t.file, t.line_numbers[r], 1, fmt::format("duplicate marker id '{}'", m.id));
    m.chromosome = static_cast<int>(parse_integer(t, r, 1));
    m.position = parse_real(t, r, 2) * scale;
    m.pA0 = parse_real(t, r, 3);
    m.pB0 = parse_real(t, r, 4);
    for (std::size_t c : {std::size_t{3}, std::size_t{4}}) {
      const double p = c == 3 ? m.pA0 : m.pB0;
      if (!(p >= 0.0 && p <= 1.0))
        throw ParseError(t.file, t.line_numbers[r], c + 1, fmt::format("frequency {} outside [0, 1]", p));
    }
    if (!(m.position >= 0.0))
      throw ParseError(t.file, t.line_numbers[r], 3, "position must be a nonnegative number");
    markers.push_back(std::move(m));
  }
  try {
    return AimPanel(std::move(markers));
  } catch (const DomainError& e) {
    throw ParseError(t.file, 0, 0, e.what());
  }
}

void write_panel(const fs::path& path, const AimPanel& panel) {
  std::string out = "marker_id\tchrom\tposition\tpA0\tpB0\n";
  for (const auto& m : panel.markers())
    out += fmt::format("{}\t{}\t{:.17g}\t{:.17g}\t{:.17g}\n", m.id, m.chromosome, m.position, m.pA0, m.pB0);
  write_text_file(path, out);
}

// --- genotypes ------------------------------------------------------------------

GenotypeMatrix read_genotypes(const fs::path& path, const AimPanel& panel) {
  const Table t = read_table(path);
  if (t.header.size() < 2) throw ParseError(t.file, 1, 1, "genotype header needs subject_id and marker columns");
  std::unordered_map<std::string, std::size_t> panel_index;
  for (std::size_t j = 0; j < panel.size(); ++j) panel_index.emplace(panel.marker(j).id, j);

  std::vector<std::size_t> column_to_marker(t.header.size(), 0);
  std::vector<std::string> unknown;
  std::vector<std::uint8_t> covered(panel.size(), 0);
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    const auto it = panel_index.find(t.header[c]);
    if (it == panel_index.end()) {
      unknown.push_back(t.header[c]);
      continue;
    }
    if (covered[it->second]) throw ParseError(t.file, 1, c + 1, fmt::format("duplicate marker '{}'", t.header[c]));
    covered[it->second] = 1;
    column_to_marker[c] = it->second;
  }
  if (!unknown.empty())
    throw AlignmentError(fmt::format("{} genotype markers are not in the panel: {}", unknown.size(),
                                     offender_list(unknown)));
  std::vector<std::string> absent;
  for (std::size_t j = 0; j < panel.size(); ++j)
    if (!covered[j]) absent.push_back(panel.marker(j).id);
  if (!absent.empty())
    throw AlignmentError(
        fmt::format("{} panel markers have no genotype column: {}", absent.size(), offender_list(absent)));

  GenotypeMatrix g(t.rows.size(), panel.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (!seen.insert(row[0]).second)
      throw ParseError(t.file, t.line_numbers[r], 1, fmt::format("duplicate subject id '{}'", row[0]));
    g.subject_ids.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      const std::string& cell = row[c];
      std::uint8_t v;
      if (is_na(cell))
        v = kMissingGenotype;
      else if (cell == "0" || cell == "1" || cell == "2")
        v = static_cast<std::uint8_t>(cell[0] - '0');
      else
        throw ParseError(t.file, t.line_numbers[r], c + 1,
                         fmt::format("genotype '{}' for marker {} is not 0, 1, 2 or NA", cell, t.header[c]));
      g(r, column_to_marker[c]) = v;
    }
  }
  return g;
}

void write_genotypes(const fs::path& path, const GenotypeMatrix& g, const AimPanel& panel) {
  g.validate(panel);
  std::string out = "subject_id";
  for (const auto& m : panel.markers()) out += "\t" + m.id;
  out += '\n';
  for (std::size_t i = 0; i < g.subjects(); ++i) {
    out += i < g.subject_ids.size() ? g.subject_ids[i] : fmt::format("S{:05d}", i + 1);
    for (std::size_t j = 0; j < g.markers(); ++j) {
      out += '\t';
      if (g.is_missing(i, j))
        out += "NA";
      else
        out += static_cast<char>('0' + g(i, j));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

// --- phenotypes -----------------------------------------------------------------

Phenotypes read_phenotypes(const fs::path& path, TraitKind kind, const std::vector<std::string>& covariates) {
  const Table t = read_table(path);
  if (t.header.size() < 2) throw ParseError(t.file, 1, 1, "phenotype header needs subject_id and trait columns");
  std::vector<std::size_t> cov_cols;
  if (covariates.empty()) {
    for (std::size_t c = 2; c < t.header.size(); ++c) cov_cols.push_back(c);
  } else {
    for (const auto& name : covariates) {
      const auto it = std::find(t.header.begin() + 2, t.header.end(), name);
      if (it == t.header.end()) throw ConfigError(fmt::format("covariate column '{}' not found in {}", name, t.file));
      cov_cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
    }
  }
  Phenotypes out;
  out.trait.kind = kind;
  for (std::size_t c : cov_cols) out.trait.covariate_names.push_back(t.header[c]);
  std::vector<double> y;
  std::vector<double> cov;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (!seen.insert(row[0]).second)
      throw ParseError(t.file, t.line_numbers[r], 1, fmt::format("duplicate subject id '{}'", row[0]));
    bool missing = is_na(row[1]);
    for (std::size_t c : cov_cols) missing = missing || is_na(row[c]);
    if (missing) {
      out.dropped.push_back(row[0]);
      continue;
    }
    out.subject_ids.push_back(row[0]);
    y.push_back(parse_real(t, r, 1));
    for (std::size_t c : cov_cols) cov.push_back(parse_real(t, r, c));
  }
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto q = static_cast<Eigen::Index>(cov_cols.size());
  out.trait.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  out.trait.covariates.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < q; ++k) out.trait.covariates(i, k) = cov[static_cast<std::size_t>(i * q + k)];
  out.trait.validate();
  return out;
}

void write_phenotypes(const fs::path& path, std::span<const std::string> ids, const TraitData& trait) {
  if (ids.size() != trait.subjects()) throw AlignmentError("phenotype ids do not match trait length");
  std::string out = "subject_id\ttrait";
  for (const auto& name : trait.covariate_names) out += "\t" + name;
  out += '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out += fmt::format("{}\t{:.17g}", ids[i], trait.y[ii]);
    for (Eigen::Index k = 0; k < trait.covariates.cols(); ++k) out += fmt::format("\t{:.17g}", trait.covariates(ii, k));
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<std::size_t> align_subjects(std::span<const std::string> ancestry_ids,
                                        std::span<const std::string> phenotype_ids) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < ancestry_ids.size(); ++i) index.emplace(ancestry_ids[i], i);
  std::vector<std::size_t> rows;
  std::vector<std::string> missing;
  for (const auto& id : phenotype_ids) {
    const auto it = index.find(id);
    if (it == index.end())
      missing.push_back(id);
    else
      rows.push_back(it->second);
  }
  if (!missing.empty())
    throw AlignmentError(fmt::format("{} phenotype subjects have no ancestry: {}", missing.size(),
                                     offender_list(missing)));
  return rows;
}

// --- ancestry draws -------------------------------------------------------------

namespace {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  void text(std::string_view s) {
    u64(s.size());
    bytes(s);
  }
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string source) : b_(bytes), source_(std::move(source)) {}

  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw FormatError(fmt::format("{}: unexpected end of draws file", source_));
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * k);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b_[pos_++]) << (8 * k);
    return v;
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::string_view text() { return bytes(static_cast<std::size_t>(u64())); }
  std::size_t remaining() const { return b_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
  std::string source_;
};

void write_ids(ByteWriter& w, const std::vector<std::string>& ids) {
  std::string joined;
  for (const auto& id : ids) {
    if (id.find_first_of("\t\n") != std::string::npos)
      throw FormatError(fmt::format("identifier '{}' contains a tab or newline", id));
    joined += id;
    joined += '\n';
  }
  w.u32(static_cast<std::uint32_t>(ids.size()));
  w.text(joined);
}

std::vector<std::string> read_ids(ByteReader& r) {
  const std::uint32_t n = r.u32();
  const std::string_view joined = r.text();
  std::vector<std::string> ids;
  ids.reserve(n);
  std::size_t start = 0;
  while (start < joined.size()) {
    const std::size_t nl = joined.find('\n', start);
    if (nl == std::string_view::npos) throw FormatError(fmt::format("{}: malformed id block", r.source()));
    ids.emplace_back(joined.substr(start, nl - start));
    start = nl + 1;
  }
  if (ids.size() != n) throw FormatError(fmt::format("{}: id block holds {} ids, header says {}", r.source(), ids.size(), n));
  return ids;
}

std::string trace_block(std::span<const double> values, std::size_t rows) {
  std::string out;
  if (rows == 0) return out;
  const std::size_t cols = values.size() / rows;
  for (std::size_t m = 0; m < rows; ++m) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out += '\t';
      out += fmt::format("{:.17g}", values[m * cols + c]);
    }
    out += '\n';
  }
  return out;
}

std::vector<double> parse_trace_block(std::string_view text, std::size_t rows, std::size_t cols,
                                      const std::string& source, std::string_view name) {
  std::vector<double> out;
  out.reserve(rows * cols);
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (p < end) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) throw FormatError(fmt::format("{}: bad number in trace block '{}'", source, name));
    out.push_back(v);
    p = ptr;
    if (p < end && (*p == '\t' || *p == '\n')) ++p;
  }
  if (out.size() != rows * cols)
    throw FormatError(fmt::format("{}: trace block '{}' has {} values, expected {}", source, name, out.size(),
                                  rows * cols));
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_draws(const AncestryDraws& d) {
  d.validate();
  const auto fits32 = [](std::size_t v) { return v <= 0xFFFFFFFFu; };
  if (!fits32(d.subjects) || !fits32(d.loci) || !fits32(d.count()))
    throw FormatError("draw dimensions exceed the 32-bit header fields");
  ByteWriter w;
  w.bytes(std::string_view(kDrawsMagic, sizeof kDrawsMagic));
  w.u32(kDrawsVersion);
  w.u32(static_cast<std::uint32_t>(d.subjects));
  w.u32(static_cast<std::uint32_t>(d.loci));
  w.u32(static_cast<std::uint32_t>(d.count()));
  w.u64(d.seed);
  for (auto it : d.iterations) w.u64(it);
  write_ids(w, d.subject_ids);
  write_ids(w, d.marker_ids);

  // Four 2-bit values per byte, first value in the low bits.
  const std::size_t cells = d.values.size();
  std::vector<std::uint8_t> packed((cells + 3) / 4, 0);
  for (std::size_t k = 0; k < cells; ++k) packed[k / 4] |= static_cast<std::uint8_t>(d.values[k] << (2 * (k % 4)));
  w.u64(packed.size());
  w.buffer().insert(w.buffer().end(), packed.begin(), packed.end());

  const std::size_t M = d.count();
  if (d.trace.empty()) {
    w.u32(0);
  } else {
    std::vector<double> tau(2 * M);
    for (std::size_t m = 0; m < M; ++m) {
      tau[2 * m] = d.trace.tauA[m];
      tau[2 * m + 1] = d.trace.tauB[m];
    }
    const std::pair<std::string_view, std::span<const double>> blocks[] = {
        {"gamma", d.trace.gamma}, {"rho", d.trace.rho}, {"pA", d.trace.pA}, {"pB", d.trace.pB}, {"tau", tau}};
    w.u32(static_cast<std::uint32_t>(std::size(blocks)));
    for (const auto& [name, values] : blocks) {
      w.text(name);
      w.text(trace_block(values, M));
    }
  }
  w.u32(crc32_of(w.buffer()));
  return std::move(w.buffer());
}

AncestryDraws decode_draws(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < sizeof kDrawsMagic + 4)
    throw FormatError(fmt::format("{}: checksum mismatch (file too short, probably truncated)", source));
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored = 0;
  for (int k = 0; k < 4; ++k) stored |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + k]) << (8 * k);
  if (crc32_of(body) != stored)
    throw FormatError(fmt::format("{}: checksum mismatch (file corrupted or truncated)", source));

  ByteReader r(body, source);
  if (r.bytes(sizeof kDrawsMagic) != std::string_view(kDrawsMagic, sizeof kDrawsMagic))
    throw FormatError(fmt::format("{}: not a draws file (bad magic)", source));
  const std::uint32_t version = r.u32();
  if (version != kDrawsVersion)
    throw FormatError(fmt::format("{}: unsupported draws version {} (expected {})", source, version, kDrawsVersion));
  AncestryDraws d;
  d.subjects = r.u32();
  d.loci = r.u32();
  const std::size_t M = r.u32();
  d.seed = r.u64();
  d.iterations.resize(M);
  for (auto& it : d.iterations) it = r.u64();
  d.subject_ids = read_ids(r);
  d.marker_ids = read_ids(r);

  const std::size_t cells = M * d.subjects * d.loci;
  const std::size_t packed_size = r.u64();
  if (packed_size != (cells + 3) / 4)
    throw FormatError(fmt::format("{}: ancestry block has {} bytes, expected {}", source, packed_size, (cells + 3) / 4));
  const std::string_view packed = r.bytes(packed_size);
  d.values.resize(cells);
  for (std::size_t k = 0; k < cells; ++k)
    d.values[k] = static_cast<std::uint8_t>((static_cast<std::uint8_t>(packed[k / 4]) >> (2 * (k % 4))) & 0x3u);

  const std::uint32_t nblocks = r.u32();
  for (std::uint32_t b = 0; b < nblocks; ++b) {
    const std::string name(r.text());
    const std::string_view text = r.text();
    if (name == "gamma") d.trace.gamma = parse_trace_block(text, M, d.loci, source, name);
    else if (name == "rho") d.trace.rho = parse_trace_block(text, M, d.subjects, source, name);
    else if (name == "pA") d.trace.pA = parse_trace_block(text, M, d.loci, source, name);
    else if (name == "pB") d.trace.pB = parse_trace_block(text, M, d.loci, source, name);
    else if (name == "tau") {
      const auto tau = parse_trace_block(text, M, 2, source, name);
      for (std::size_t m = 0; m < M; ++m) {
        d.trace.tauA.push_back(tau[2 * m]);
        d.trace.tauB.push_back(tau[2 * m + 1]);
      }
    } else {
      throw FormatError(fmt::format("{}: unknown trace block '{}'", source, name));
    }
  }
  if (r.remaining() != 0) throw FormatError(fmt::format("{}: trailing bytes after trace blocks", source));
  d.validate();
  return d;
}

void write_draws(const fs::path& path, const AncestryDraws& draws) {
  const auto bytes = encode_draws(draws);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

AncestryDraws read_draws(const fs::path& path) {
  const std::string raw = read_text_file(path);
  return decode_draws(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()), path.string());
}

// --- result tables -------------------------------------------------------------

namespace {

std::string marker_name(std::span<const std::string> ids, std::size_t j) {
  return j < ids.size() ? ids[j] : fmt::format("#{}", j);
}

}  // namespace

void write_scan_table(const fs::path& path, const ScanResult& result, std::span<const std::string> marker_ids) {
  std::string out = "marker_id\tindex\tlog10_bf\tT\ttau_hat\tselected\tskipped\tdraws_used\n";
  for (const auto& l : result.loci)
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", marker_name(marker_ids, l.locus), l.locus,
                       format_real(l.log10_bf), format_real(l.T), format_real(l.tau_hat), l.selected ? 1 : 0,
                       l.skipped ? 1 : 0, l.draws_used);
  write_text_file(path, out);
}

void write_subset_table(const fs::path& path, const ScanResult& result, std::span<const std::string> marker_ids) {
  const auto identified = identified_subsets(result);
  std::string out = "rank\tsize\tmarkers\tlog10_bf\tidentified\tdraws_used\n";
  for (std::size_t s = 0; s < result.subsets.size(); ++s) {
    const auto& sub = result.subsets[s];
    std::string names;
    for (std::size_t k = 0; k < sub.loci.size(); ++k) names += (k ? "," : "") + marker_name(marker_ids, sub.loci[k]);
    const bool id = std::find(identified.begin(), identified.end(), s) != identified.end();
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", s + 1, sub.loci.size(), names, format_real(sub.log10_bf), id ? 1 : 0,
                       sub.draws_used);
  }
  write_text_file(path, out);
}

void write_ald_table(const fs::path& path, const AldResult& ald, std::span<const std::string> marker_ids) {
  const auto J = static_cast<std::size_t>(ald.correlation.rows());
  std::string out = "marker_id";
  for (std::size_t j = 0; j < J; ++j) out += "\t" + marker_name(marker_ids, j);
  out += "\tconstant\n";
  for (std::size_t a = 0; a < J; ++a) {
    out += marker_name(marker_ids, a);
    for (std::size_t b = 0; b < J; ++b)
      out += "\t" + format_real(ald.correlation(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    out += fmt::format("\t{}\n", ald.constant[a]);
  }
  write_text_file(path, out);
}

void write_density_table(const fs::path& path, std::span<const DensityPoint> points, bool bivariate) {
  std::string out = bivariate ? "latent_correlation\ttau_sigma2\tbeta1\tbeta2\tdensity\n" : "paap\ttau\tbeta\tdensity\n";
  for (const auto& p : points) {
    if (bivariate)
      out += fmt::format("{}\t{}\t{}\t{}\t{}\n", format_real(p.construction), format_real(p.tau), format_real(p.beta1),
                         format_real(p.beta2), format_real(p.density));
    else
      out += fmt::format("{}\t{}\t{}\t{}\n", format_real(p.construction), format_real(p.tau), format_real(p.beta1),
                         format_real(p.density));
  }
  write_text_file(path, out);
}

}  // namespace gleam
