#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fot/instance.h"
#include "fot/loading.h"
#include "fot/packets.h"
#include "fot/profile.h"
#include "fot/thinflow.h"
#include "fot/trajectory.h"

namespace fot {

/// File access failure; the message starts with the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Parses `{"nodes": [...], "arcs": [{"id","from","to","tau","nu"}, ...],
/// "source", "sink", "u0"}`. Errors are ParseError with a field path.
Instance parse_instance(const std::string& document);
Instance load_instance(const std::filesystem::path& path);
std::string serialize_instance(const Instance& inst);

/// `{"lambda": {node: value}, "x": {arc: value}}`
std::string thin_flow_to_json(const Instance& inst, const ThinFlow& tf);

/// Input of the thinflow subcommand: an instance (inline or by path,
/// relative to `base_dir`), the configuration and an optional subnetwork.
struct ThinFlowRequest {
  Instance instance;
  Configuration config;
  GeneralizedSubnetwork subnetwork;
};
ThinFlowRequest parse_thin_flow_request(const std::string& document,
                                        const std::filesystem::path& base_dir = {});

/// `{"phases": [{"theta_start", "theta_end" (null when unbounded),
/// "label_start", "direction", "active", "resetting"}]}`
std::string trajectory_to_json(const Trajectory& traj);

/// `{"classes": [{"path": [...], "entry": {...}, "waiting": [...], "label"}]}`
/// with entry either {"atom": time, "mass": m} or
/// {"start": a, "end": b, "rate": r}.
std::string profile_to_json(const Instance& inst, const StrategyProfile& profile);
StrategyProfile parse_profile(const Instance& inst, const std::string& document);

/// `{"paths": {"1": ["e1"], "2": ["e2"], ...}}`
std::string packet_profile_to_json(const Instance& inst, const PacketProfile& prof);
PacketProfile parse_packet_profile(const Instance& inst, const std::string& document);

/// Per-arc rows `arc,time,F_in,F_out,z` at the breakpoints of F_in and F_out.
std::string outcome_csv(const Outcome& out);

/// Rows `packet,arc,entry,proc_start,proc_end,tail_arrival`.
std::string packet_outcome_csv(const Instance& inst, const PacketOutcome& out);

}  // namespace fot
