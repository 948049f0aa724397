#pragma once

#include <cstddef>
#include <vector>

namespace fot::detail {

struct FlowEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;
};

struct MaxFlowResult {
  double value = 0.0;
  std::vector<double> flow;        // per input edge
  std::vector<bool> source_side;   // residual reachability from the source
};

/// Maximum s-t flow on a small directed graph with real capacities.
/// Residual capacities at or below `tol` are treated as saturated when
/// computing the source side of the minimum cut.
MaxFlowResult max_flow(std::size_t num_nodes, const std::vector<FlowEdge>& edges,
                       std::size_t source, std::size_t sink, double tol);

}  // namespace fot::detail
