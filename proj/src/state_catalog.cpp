#include "tdcstate/state_catalog.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tdcstate/error.hpp"
#include "tdcstate/text_parse.hpp"

namespace tdcstate {

std::int64_t seq_value(const RawState& state) {
  const auto pop = static_cast<std::int64_t>(state.popcount());
  return state.inverted() ? pop + static_cast<std::int64_t>(state.size()) + 1 : pop;
}

bool catalog_less(const StateRecord& a, const StateRecord& b) {
  if (a.seq != b.seq) return a.seq < b.seq;
  return RawState::compare_bits(a.state, b.state) < 0;
}

StateCatalog::StateCatalog(std::vector<StateRecord> records, std::uint64_t total_events,
                           TimeFs covered_range)
    : records_(std::move(records)), total_events_(total_events), covered_range_(covered_range) {
  std::sort(records_.begin(), records_.end(), catalog_less);
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].state.size() != records_.front().state.size())
      throw InputError("catalog mixes states of different tap counts");
    if (!index_.emplace(records_[i].state, i).second)
      throw InputError("catalog has duplicate state " + records_[i].state.to_hex());
  }
}

bool StateCatalog::has_widths() const {
  return !records_.empty() &&
         std::all_of(records_.begin(), records_.end(), [](const auto& r) { return r.width.value > 0; });
}

std::vector<TimeFs> StateCatalog::widths() const {
  std::vector<TimeFs> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.width);
  return out;
}

std::vector<std::uint64_t> StateCatalog::counts() const {
  std::vector<std::uint64_t> out;
  out.reserve(records_.size());
  for (const auto& r : records_) out.push_back(r.count);
  return out;
}

std::size_t StateCatalog::tie_count() const {
  std::size_t ties = 0;
  for (std::size_t i = 0; i < records_.size();) {
    std::size_t j = i;
    while (j < records_.size() && records_[j].seq == records_[i].seq) ++j;
    if (j - i > 1) ties += j - i;
    i = j;
  }
  return ties;
}

std::optional<std::size_t> StateCatalog::find(const RawState& state) const {
  if (auto it = index_.find(state); it != index_.end()) return it->second;
  return std::nullopt;
}

StateCounter::StateCounter(std::uint64_t discovery_block) : block_(discovery_block) {
  if (block_ == 0) throw ConfigError("discovery block must be positive");
}

void StateCounter::add(const RawState& state) {
  if (total_ % block_ == 0) discovery_.push_back(0);
  ++total_;
  auto [it, inserted] = counts_.try_emplace(state, 0);
  ++it->second;
  if (inserted) ++discovery_.back();
}

std::vector<std::uint64_t> StateCounter::discovery_curve() const { return discovery_; }

StateCatalog StateCounter::finish(TimeFs covered_range) const {
  if (total_ == 0) throw InputError("empty input: no states collected");
  if (covered_range.value <= 0) throw ConfigError("covered range must be positive");
  std::vector<StateRecord> records;
  records.reserve(counts_.size());
  for (const auto& [state, count] : counts_)
    records.push_back({state, seq_value(state), count, TimeFs{0}});
  return StateCatalog(std::move(records), total_, covered_range);
}

StateCatalog build_catalog(std::span<const RawState> samples, TimeFs covered_range) {
  StateCounter counter;
  for (const auto& s : samples) counter.add(s);
  return counter.finish(covered_range);
}

std::vector<std::int64_t> apportion(std::int64_t total, std::span<const std::uint64_t> weights) {
  const unsigned __int128 sum =
      std::accumulate(weights.begin(), weights.end(), static_cast<unsigned __int128>(0));
  if (sum == 0) throw InputError("cannot apportion over a zero total count");
  if (total < 0) throw ContractViolation("apportion: negative total");

  std::vector<std::int64_t> out(weights.size());
  std::vector<unsigned __int128> remainder(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const unsigned __int128 num = static_cast<unsigned __int128>(total) * weights[i];
    out[i] = static_cast<std::int64_t>(num / sum);
    remainder[i] = num % sum;
    assigned += out[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::int64_t k = 0; k < total - assigned; ++k) ++out[order[static_cast<std::size_t>(k)]];
  return out;
}

StateCatalog estimate_widths(const StateCatalog& catalog, std::span<const std::uint64_t> counts) {
  if (counts.size() != catalog.size())
    throw ContractViolation("estimate_widths: " + std::to_string(counts.size()) +
                            " counts for " + std::to_string(catalog.size()) + " records");
  const auto widths = apportion(catalog.covered_range().value, counts);
  std::vector<StateRecord> records(catalog.records().begin(), catalog.records().end());
  for (std::size_t i = 0; i < records.size(); ++i) records[i].width = TimeFs{widths[i]};
  return StateCatalog(std::move(records), catalog.total_events(), catalog.covered_range());
}

void write_catalog(std::ostream& out, const StateCatalog& catalog,
                   const std::vector<std::string>& provenance) {
  out << "# state catalog\n";
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "# covered_range_fs=" << catalog.covered_range().value << '\n';
  out << "# total_events=" << catalog.total_events() << '\n';
  out << "# n_taps=" << catalog.n_taps() << '\n';
  out << "# tie_count=" << catalog.tie_count() << '\n';
  out << "seq,polarity,hex,count,width_fs\n";
  for (const auto& r : catalog.records())
    out << r.seq << ',' << (r.state.inverted() ? 1 : 0) << ',' << r.state.to_hex() << ','
        << r.count << ',' << r.width.value << '\n';
}

namespace {

std::optional<std::string> header_value(const std::string& line, const std::string& key) {
  const auto pos = line.find(key + "=");
  if (pos == std::string::npos) return std::nullopt;
  // Must be a whole key, not a suffix of another one.
  if (pos > 0 && line[pos - 1] != ' ' && line[pos - 1] != '#') return std::nullopt;
  std::istringstream rest(line.substr(pos + key.size() + 1));
  std::string value;
  rest >> value;
  return value;
}

}  // namespace

StateCatalog read_catalog(std::istream& in) {
  std::optional<std::int64_t> covered;
  std::optional<std::uint64_t> total;
  std::optional<std::size_t> n_taps;
  std::vector<StateRecord> records;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (auto v = header_value(line, "covered_range_fs")) covered = parse_integer<std::int64_t>(*v, "catalog covered_range_fs");
      if (auto v = header_value(line, "total_events")) total = parse_integer<std::uint64_t>(*v, "catalog total_events");
      if (auto v = header_value(line, "n_taps")) n_taps = parse_integer<std::size_t>(*v, "catalog n_taps");
      continue;
    }
    if (!header_seen) {
      if (line != "seq,polarity,hex,count,width_fs")
        throw InputError("catalog line " + std::to_string(line_no) + ": expected header");
      if (!covered || !total || !n_taps)
        throw InputError("catalog is missing covered_range_fs/total_events/n_taps");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string seq, polarity, hex, count, width;
    if (!std::getline(fields, seq, ',') || !std::getline(fields, polarity, ',') ||
        !std::getline(fields, hex, ',') || !std::getline(fields, count, ',') ||
        !std::getline(fields, width))
      throw InputError("catalog line " + std::to_string(line_no) + ": malformed record");
    StateRecord r;
    r.state = RawState::from_hex(hex, *n_taps, polarity == "1");
    r.seq = parse_integer<std::int64_t>(seq, "catalog seq");
    if (r.seq != seq_value(r.state))
      throw InputError("catalog line " + std::to_string(line_no) + ": seq does not match state");
    r.count = parse_integer<std::uint64_t>(count, "catalog count");
    r.width = TimeFs{parse_integer<std::int64_t>(width, "catalog width_fs")};
    records.push_back(std::move(r));
  }
  if (!header_seen) throw InputError("catalog has no header");
  if (records.empty()) throw InputError("catalog has no records");
  return StateCatalog(std::move(records), *total, TimeFs{*covered});
}

}  // namespace tdcstate
