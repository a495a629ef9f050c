#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "tdcstate/bin_config.hpp"
#include "tdcstate/raw_state.hpp"
#include "tdcstate/state_catalog.hpp"

namespace tdcstate {

struct FineCode {
  std::size_t group = 0;
  // Set when the state was unknown and the nearest-Seq fallback supplied the
  // group. Callers count these as missing codes.
  bool substituted = false;
};

struct MissingCode {
  RawState state;
};

using EncodeResult = std::variant<FineCode, MissingCode>;

inline bool is_missing(const EncodeResult& r) { return std::holds_alternative<MissingCode>(r); }

struct EncodeOptions {
  bool nearest_seq_fallback = false;
};

// Exact state -> group lookup table built from a catalog and a configuration.
class StateEncoder {
 public:
  StateEncoder() = default;

  std::size_t n_groups() const { return n_groups_; }
  std::size_t n_taps() const { return n_taps_; }
  TimeFs lsb() const { return lsb_; }
  std::size_t size() const { return entries_.size(); }

  // Throws ContractViolation if the state's tap count differs.
  EncodeResult encode(const RawState& state, const EncodeOptions& options = {}) const;

  struct Entry {
    RawState state;
    std::int64_t seq;
    std::size_t group;
  };
  // Table in catalog order.
  const std::vector<Entry>& entries() const { return entries_; }

  friend StateEncoder build_encoder(const StateCatalog&, const BinConfiguration&);
  friend StateEncoder read_encoder(std::istream&);

 private:
  void index();

  std::vector<Entry> entries_;
  std::unordered_map<RawState, std::size_t, RawStateHash> table_;
  std::size_t n_groups_ = 0;
  std::size_t n_taps_ = 0;
  TimeFs lsb_{0};
};

// Throws InputError when the configuration does not partition this catalog.
StateEncoder build_encoder(const StateCatalog& catalog, const BinConfiguration& config);

// Encoder file: '#' provenance lines (n_groups, n_taps, lsb_fs), a
// "polarity,hex,group" header, then one row per known state in catalog order.
void write_encoder(std::ostream& out, const StateEncoder& encoder,
                   const std::vector<std::string>& provenance = {});
StateEncoder read_encoder(std::istream& in);

}  // namespace tdcstate
