#include "maxflow.h"

#include <deque>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/edmonds_karp_max_flow.hpp>

namespace fot::detail {

namespace {

using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
using Graph = boost::adjacency_list<
    boost::vecS, boost::vecS, boost::directedS, boost::no_property,
    boost::property<boost::edge_capacity_t, double,
                    boost::property<boost::edge_residual_capacity_t, double,
                                    boost::property<boost::edge_reverse_t,
                                                    Traits::edge_descriptor>>>>;
using EdgeDesc = boost::graph_traits<Graph>::edge_descriptor;

}  // namespace

MaxFlowResult max_flow(std::size_t num_nodes, const std::vector<FlowEdge>& edges,
                       std::size_t source, std::size_t sink, double tol) {
  Graph g(num_nodes);
  auto capacity = boost::get(boost::edge_capacity, g);
  auto reverse = boost::get(boost::edge_reverse, g);
  auto residual = boost::get(boost::edge_residual_capacity, g);

  std::vector<EdgeDesc> forward;
  forward.reserve(edges.size());
  for (const auto& fe : edges) {
    EdgeDesc e = boost::add_edge(fe.from, fe.to, g).first;
    EdgeDesc r = boost::add_edge(fe.to, fe.from, g).first;
    capacity[e] = fe.capacity;
    capacity[r] = 0.0;
    reverse[e] = r;
    reverse[r] = e;
    forward.push_back(e);
  }

  MaxFlowResult result;
  result.value = boost::edmonds_karp_max_flow(g, source, sink);
  result.flow.resize(edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    result.flow[i] = capacity[forward[i]] - residual[forward[i]];
  }

  result.source_side.assign(num_nodes, false);
  std::deque<std::size_t> queue{source};
  result.source_side[source] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (auto [it, end] = boost::out_edges(v, g); it != end; ++it) {
      const std::size_t w = boost::target(*it, g);
      if (!result.source_side[w] && residual[*it] > tol) {
        result.source_side[w] = true;
        queue.push_back(w);
      }
    }
  }
  return result;
}

}  // namespace fot::detail
