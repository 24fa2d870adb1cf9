#include "joinsim/trace.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <sstream>

#include "csv.hpp"

namespace joinsim {

namespace {

constexpr std::string_view kHeader = "joinsim-trace v";
constexpr int kVersion = 1;

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex(std::uint64_t value, int width = 0) {
  char buf[17];
  auto [end, ec] = std::to_chars(buf, buf + 16, value, 16);
  std::string out(buf, end);
  if (static_cast<int>(out.size()) < width) out.insert(0, static_cast<std::size_t>(width) - out.size(), '0');
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t at = text.find(sep, start);
    out.push_back(text.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view text, const char* what, int base = 10) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError(std::string("trace: bad ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

double parse_double(std::string_view text) {
  double value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("trace: bad selectivity '" + std::string(text) + "'");
  }
  return value;
}

Cardinality parse_cardinality(std::string_view text) {
  try {
    return Cardinality{parse_uint128(text)};
  } catch (const FormatError&) {
    throw FormatError("trace: bad cardinality '" + std::string(text) + "'");
  }
}

}  // namespace

std::optional<Cardinality>& OptimalCosts::operator[](Regime regime) {
  if (regime.plan_type == PlanType::left_deep) return regime.allow_cp ? left_deep_cp : left_deep_no_cp;
  return regime.allow_cp ? bushy_cp : bushy_no_cp;
}

const std::optional<Cardinality>& OptimalCosts::operator[](Regime regime) const {
  return const_cast<OptimalCosts&>(*this)[regime];
}

Trace::Trace(std::string query_id, std::vector<SlotIndex> slots, std::vector<double> selectivities)
    : query_id_(std::move(query_id)), slots_(std::move(slots)), selectivities_(std::move(selectivities)) {
  if (slots_.size() != selectivities_.size()) throw FormatError("trace: one selectivity per slot required");
  if (slots_.empty() || slots_.size() > 24) throw LimitError("trace: table count out of range");
  if (!std::is_sorted(slots_.begin(), slots_.end()) ||
      std::adjacent_find(slots_.begin(), slots_.end()) != slots_.end()) {
    throw FormatError("trace: slots must be strictly ascending");
  }
  if (slots_.back() >= 64) throw LimitError("trace: slot index out of range");
  entries_.assign(std::size_t{1} << slots_.size(), Cardinality{});
  present_.assign(entries_.size(), 0);
}

SubsetKey Trace::full_set() const {
  std::uint64_t bits = 0;
  for (SlotIndex s : slots_) bits |= 1ULL << s;
  return {bits};
}

std::uint64_t Trace::to_local(SubsetKey subset) const {
  std::uint64_t local = 0;
  std::uint64_t remaining = subset.bits;
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    if (subset.bits >> slots_[k] & 1) {
      local |= 1ULL << k;
      remaining &= ~(1ULL << slots_[k]);
    }
  }
  if (remaining != 0) throw LimitError("subset names slots outside query " + query_id_);
  return local;
}

SubsetKey Trace::to_global(std::uint64_t local_mask) const {
  std::uint64_t bits = 0;
  for (std::uint64_t m = local_mask; m != 0; m &= m - 1) bits |= 1ULL << slots_[std::countr_zero(m)];
  return {bits};
}

void Trace::set(SubsetKey subset, Cardinality value) { set_local(to_local(subset), value); }

void Trace::set_local(std::uint64_t local_mask, Cardinality value) {
  if (local_mask == 0 || local_mask >= entries_.size()) throw LimitError("trace: subset out of range");
  if (!present_[local_mask]) ++present_count_;
  present_[local_mask] = 1;
  entries_[local_mask] = value;
}

bool Trace::contains(SubsetKey subset) const {
  std::uint64_t local = to_local(subset);
  return local != 0 && present_[local];
}

Cardinality Trace::lookup(SubsetKey subset) const {
  std::uint64_t local = to_local(subset);
  if (local == 0) throw LimitError("trace: empty subset");
  return lookup_local(local);
}

void Trace::missing(std::uint64_t local_mask) const {
  throw MissingEntryError("trace " + query_id_ + " has no entry for subset " + hex(to_global(local_mask).bits));
}

std::string serialize_trace(const Trace& trace) {
  std::string out;
  out += kHeader;
  out += std::to_string(kVersion);
  out += '\n';
  out += trace.query_id();
  out += ',';
  for (std::size_t k = 0; k < trace.table_count(); ++k) {
    if (k) out += ';';
    out += std::to_string(trace.slots()[k]);
    out += '=';
    out += format_double(trace.selectivities()[k]);
  }
  out += '\n';
  std::vector<std::pair<std::uint64_t, Cardinality>> rows;
  for (std::uint64_t local = 1; local < (std::uint64_t{1} << trace.table_count()); ++local) {
    SubsetKey key = trace.to_global(local);
    if (trace.contains(key)) rows.emplace_back(key.bits, trace.lookup_local(local));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [bits, value] : rows) {
    out += hex(bits);
    out += ',';
    out += to_string(value);
    out += value.saturated() ? ",1\n" : ",0\n";
  }
  out += "optimal";
  for (Regime regime : kAllRegimes) {
    out += ',';
    const auto& c = trace.optimal()[regime];
    out += c ? to_string(*c) : "-";
  }
  out += '\n';
  out += trace.complete() ? "complete,1\n" : "complete,0\n";
  std::uint64_t sum = fnv1a(out);
  out += "checksum,";
  out += hex(sum, 16);
  out += '\n';
  return out;
}

Trace parse_trace(std::string_view text, bool require_complete) {
  std::size_t checksum_at = text.rfind("checksum,");
  if (checksum_at == std::string_view::npos || (checksum_at != 0 && text[checksum_at - 1] != '\n')) {
    throw ChecksumError("trace: checksum line missing (truncated file?)");
  }
  std::string_view stored = text.substr(checksum_at + 9);
  if (!stored.empty() && stored.back() == '\n') stored.remove_suffix(1);
  if (!stored.empty() && stored.back() == '\r') stored.remove_suffix(1);
  if (stored.size() != 16) throw ChecksumError("trace: malformed checksum");
  std::uint64_t expected = parse_number<std::uint64_t>(stored, "checksum", 16);
  std::string_view body = text.substr(0, checksum_at);
  if (fnv1a(body) != expected) throw ChecksumError("trace: checksum mismatch");

  if (!body.empty() && body.back() == '\n') body.remove_suffix(1);
  std::vector<std::string_view> lines = split(body, '\n');
  if (lines.size() < 4) throw FormatError("trace: too few lines");
  if (lines[0].substr(0, kHeader.size()) != kHeader) throw FormatError("trace: not a trace file");
  int version = parse_number<int>(lines[0].substr(kHeader.size()), "version");
  if (version != kVersion) {
    throw FormatError("trace: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kVersion) + ")");
  }

  std::size_t comma = lines[1].find(',');
  if (comma == std::string_view::npos) throw FormatError("trace: bad query line");
  std::string query_id(lines[1].substr(0, comma));
  std::vector<SlotIndex> slots;
  std::vector<double> selectivities;
  for (std::string_view part : split(lines[1].substr(comma + 1), ';')) {
    std::size_t eq = part.find('=');
    if (eq == std::string_view::npos) throw FormatError("trace: bad selectivity entry");
    slots.push_back(parse_number<SlotIndex>(part.substr(0, eq), "slot"));
    selectivities.push_back(parse_double(part.substr(eq + 1)));
  }
  Trace trace(std::move(query_id), std::move(slots), std::move(selectivities));

  std::size_t i = 2;
  std::uint64_t previous = 0;
  for (; i < lines.size() && lines[i].substr(0, 8) != "optimal,"; ++i) {
    auto fields = split(lines[i], ',');
    if (fields.size() != 3) throw FormatError("trace: entry line " + std::to_string(i + 1) + " needs 3 fields");
    std::uint64_t bits = parse_number<std::uint64_t>(fields[0], "subset", 16);
    if (bits <= previous) throw FormatError("trace: entries out of order at line " + std::to_string(i + 1));
    previous = bits;
    Cardinality value = parse_cardinality(fields[1]);
    if (fields[2] != "0" && fields[2] != "1") throw FormatError("trace: bad saturation flag");
    if ((fields[2] == "1") != value.saturated()) throw FormatError("trace: saturation flag disagrees with value");
    trace.set({bits}, value);
  }
  if (i >= lines.size()) throw FormatError("trace: optimal line missing");
  auto optimal = split(lines[i], ',');
  if (optimal.size() != 5) throw FormatError("trace: optimal line needs 4 values");
  for (std::size_t r = 0; r < 4; ++r) {
    if (optimal[r + 1] != "-") trace.optimal()[kAllRegimes[r]] = parse_cardinality(optimal[r + 1]);
  }
  ++i;
  if (i >= lines.size() || (lines[i] != "complete,0" && lines[i] != "complete,1")) {
    throw FormatError("trace: complete line missing");
  }
  if ((lines[i] == "complete,1") != trace.complete()) throw FormatError("trace: completeness flag disagrees");
  if (i + 1 != lines.size()) throw FormatError("trace: trailing data");
  if (require_complete && !trace.complete()) {
    throw FormatError("trace " + trace.query_id() + " is partial (" + std::to_string(trace.entry_count()) +
                      " entries)");
  }
  return trace;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  csv::write_file(path, serialize_trace(trace));
}

Trace load_trace(const std::filesystem::path& path, bool require_complete) {
  std::string text = csv::read_file(path);
  try {
    return parse_trace(text, require_complete);
  } catch (const ChecksumError& e) {
    throw ChecksumError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_manifest(const std::vector<std::pair<std::string, std::string>>& entries,
                   const std::filesystem::path& path) {
  std::string out;
  for (const auto& [id, relpath] : entries) {
    if (id.find_first_of(" \n") != std::string::npos) throw FormatError("manifest: query id contains whitespace");
    out += id + ' ' + relpath + '\n';
  }
  csv::write_file(path, out);
}

std::vector<std::pair<std::string, std::string>> load_manifest(const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t number = 0;
  for (const std::string& line : csv::read_lines(path)) {
    ++number;
    if (line.empty()) continue;
    std::size_t space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size()) {
      throw FormatError(path.string() + ":" + std::to_string(number) + ": expected 'query_id path'");
    }
    entries.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  return entries;
}

TraceStore TraceStore::from_manifest(const std::filesystem::path& manifest, bool require_complete) {
  TraceStore store;
  std::filesystem::path base = manifest.parent_path();
  for (const auto& [id, relpath] : load_manifest(manifest)) {
    auto trace = std::make_shared<Trace>(load_trace(base / relpath, require_complete));
    if (trace->query_id() != id) {
      throw FormatError("manifest names " + id + " but " + relpath + " holds " + trace->query_id());
    }
    store.add(std::move(trace));
  }
  return store;
}

void TraceStore::add(std::shared_ptr<const Trace> trace) {
  std::string id = trace->query_id();
  if (!traces_.emplace(id, std::move(trace)).second) throw FormatError("duplicate trace for " + id);
}

std::shared_ptr<const Trace> TraceStore::find(std::string_view query_id) const {
  auto it = traces_.find(query_id);
  return it == traces_.end() ? nullptr : it->second;
}

const Trace& TraceStore::at(std::string_view query_id) const {
  auto it = traces_.find(query_id);
  if (it == traces_.end()) throw MissingEntryError("no trace for query " + std::string(query_id));
  return *it->second;
}

std::vector<std::string> TraceStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, trace] : traces_) out.push_back(id);
  return out;
}

}  // namespace joinsim
