#include "tdcstate/encoder.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

#include "tdcstate/error.hpp"
#include "tdcstate/text_parse.hpp"

namespace tdcstate {

void StateEncoder::index() {
  table_.clear();
  table_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) table_.emplace(entries_[i].state, i);
}

EncodeResult StateEncoder::encode(const RawState& state, const EncodeOptions& options) const {
  if (state.size() != n_taps_)
    throw ContractViolation("encode: state has " + std::to_string(state.size()) +
                            " taps, encoder expects " + std::to_string(n_taps_));
  if (auto it = table_.find(state); it != table_.end()) return FineCode{entries_[it->second].group};
  if (!options.nearest_seq_fallback || entries_.empty()) return MissingCode{state};

  // entries_ are in seq order; take the closest seq, lower index on ties.
  const std::int64_t seq = seq_value(state);
  auto it = std::lower_bound(entries_.begin(), entries_.end(), seq,
                             [](const Entry& e, std::int64_t s) { return e.seq < s; });
  std::size_t pick;
  if (it == entries_.end()) {
    pick = entries_.size() - 1;
  } else if (it == entries_.begin()) {
    pick = 0;
  } else {
    const auto below = std::prev(it);
    pick = (seq - below->seq <= it->seq - seq) ? static_cast<std::size_t>(below - entries_.begin())
                                               : static_cast<std::size_t>(it - entries_.begin());
  }
  return FineCode{entries_[pick].group, true};
}

StateEncoder build_encoder(const StateCatalog& catalog, const BinConfiguration& config) {
  if (catalog.empty()) throw InputError("cannot build an encoder from an empty catalog");
  if (config.n_states() != catalog.size())
    throw InputError("configuration covers " + std::to_string(config.n_states()) +
                     " states but the catalog has " + std::to_string(catalog.size()));
  validate_boundaries(config.boundaries, catalog.size());

  StateEncoder enc;
  enc.n_groups_ = config.n_groups();
  enc.n_taps_ = catalog.n_taps();
  enc.lsb_ = config.lsb;
  enc.entries_.reserve(catalog.size());
  std::size_t group = 0;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    while (i >= config.boundaries[group + 1]) ++group;
    const auto& r = catalog.records()[i];
    enc.entries_.push_back({r.state, r.seq, group});
  }
  enc.index();
  return enc;
}

void write_encoder(std::ostream& out, const StateEncoder& encoder,
                   const std::vector<std::string>& provenance) {
  out << "# state encoder\n";
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "# n_groups=" << encoder.n_groups() << '\n';
  out << "# n_taps=" << encoder.n_taps() << '\n';
  out << "# lsb_fs=" << encoder.lsb().value << '\n';
  out << "polarity,hex,group\n";
  for (const auto& e : encoder.entries())
    out << (e.state.inverted() ? 1 : 0) << ',' << e.state.to_hex() << ',' << e.group << '\n';
}

StateEncoder read_encoder(std::istream& in) {
  std::optional<std::size_t> n_groups, n_taps;
  std::optional<std::int64_t> lsb;
  StateEncoder enc;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  auto read_key = [&](const std::string& key) -> std::optional<std::string> {
    const auto pos = line.find("# " + key + "=");
    if (pos != 0) return std::nullopt;
    return line.substr(key.size() + 3);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (auto v = read_key("n_groups")) n_groups = parse_integer<std::size_t>(*v, "encoder n_groups");
      if (auto v = read_key("n_taps")) n_taps = parse_integer<std::size_t>(*v, "encoder n_taps");
      if (auto v = read_key("lsb_fs")) lsb = parse_integer<std::int64_t>(*v, "encoder lsb_fs");
      continue;
    }
    if (!header_seen) {
      if (line != "polarity,hex,group" || !n_groups || !n_taps || !lsb)
        throw InputError("encoder line " + std::to_string(line_no) + ": expected header");
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string polarity, hex, group;
    if (!std::getline(fields, polarity, ',') || !std::getline(fields, hex, ',') ||
        !std::getline(fields, group))
      throw InputError("encoder line " + std::to_string(line_no) + ": malformed row");
    RawState s = RawState::from_hex(hex, *n_taps, polarity == "1");
    const auto g = parse_integer<std::size_t>(group, "encoder group");
    if (g >= *n_groups) throw InputError("encoder line " + std::to_string(line_no) + ": bad group");
    const auto seq = seq_value(s);
    enc.entries_.push_back({std::move(s), seq, g});
  }
  if (!header_seen) throw InputError("encoder file has no header");
  enc.n_groups_ = *n_groups;
  enc.n_taps_ = *n_taps;
  enc.lsb_ = TimeFs{*lsb};
  enc.index();
  if (enc.table_.size() != enc.entries_.size()) throw InputError("encoder file repeats a state");
  return enc;
}

}  // namespace tdcstate
