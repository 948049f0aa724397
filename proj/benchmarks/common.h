#pragma once

#include <string>
#include <vector>

#include "fot/instance.h"

namespace fot::bench {

// n parallel s-t arcs with transit times 1, 2, ..., n and unit capacity.
inline Instance parallel(int n, double u0) {
  std::vector<ArcSpec> arcs;
  for (int i = 0; i < n; ++i) {
    arcs.push_back({"e" + std::to_string(i + 1), "s", "t", static_cast<double>(i + 1), 1.0});
  }
  return Instance({"s", "t"}, std::move(arcs), "s", "t", u0);
}

// Grid of width w and depth d: layers of w nodes, every node linked to the
// next layer's node with the same index and its successor.
inline Instance layered(int w, int d) {
  std::vector<std::string> nodes{"s"};
  for (int l = 0; l < d; ++l) {
    for (int i = 0; i < w; ++i) nodes.push_back("v" + std::to_string(l) + "_" + std::to_string(i));
  }
  nodes.push_back("t");
  auto name = [&](int l, int i) { return "v" + std::to_string(l) + "_" + std::to_string(i); };
  std::vector<ArcSpec> arcs;
  int id = 0;
  auto add = [&](std::string a, std::string b, double tau, double nu) {
    arcs.push_back({"a" + std::to_string(id++), std::move(a), std::move(b), tau, nu});
  };
  for (int i = 0; i < w; ++i) add("s", name(0, i), 1.0 + i, 1.0);
  for (int l = 0; l + 1 < d; ++l) {
    for (int i = 0; i < w; ++i) {
      add(name(l, i), name(l + 1, i), 1.0, 1.0 + 0.5 * i);
      add(name(l, i), name(l + 1, (i + 1) % w), 1.5, 1.0);
    }
  }
  for (int i = 0; i < w; ++i) add(name(d - 1, i), "t", 1.0, 1.0);
  return Instance(std::move(nodes), std::move(arcs), "s", "t", 2.0 * w);
}

}  // namespace fot::bench
