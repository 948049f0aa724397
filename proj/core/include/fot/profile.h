#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "fot/instance.h"

namespace fot {

/// Waiting time at a node as an affine function of network entry time.
struct AffineWait {
  double offset = 0.0;
  double slope = 0.0;

  double at(double theta) const { return offset + slope * theta; }
};

/// Mass `mass` entering the network at a single instant.
struct EntryAtom {
  double time = 0.0;
  double mass = 0.0;
};

/// Agents entering at constant `rate` over the entry interval [start, end).
struct EntryInterval {
  double start = 0.0;
  double end = 0.0;
  double rate = 0.0;
};

using Entry = std::variant<EntryAtom, EntryInterval>;

/// A set of agents sharing a path and an affine waiting rule.
/// `waiting[i]` applies at the i-th node of the path (index 0 is the source,
/// the last index is the sink), so waiting.size() == path.size() + 1.
struct StrategyClass {
  std::vector<std::size_t> path;  // arc indices
  Entry entry;
  std::vector<AffineWait> waiting;
  std::string label;

  bool is_atom() const { return std::holds_alternative<EntryAtom>(entry); }
  double entry_begin() const;
  double entry_end() const;
  double mass() const;
  /// Nodes visited along the path, starting with the source.
  std::vector<std::size_t> nodes(const Instance& inst) const;
};

using StrategyProfile = std::vector<StrategyClass>;

/// Throws InstanceError when a path is not a simple source-sink path or the
/// waiting vector has the wrong length.
void validate_class(const Instance& inst, const StrategyClass& c);

}  // namespace fot
