#pragma once

#include <string>
#include <vector>

#include "lyapctl/flow.hpp"
#include "lyapctl/objective.hpp"
#include "lyapctl/sampling.hpp"

namespace lyapctl::testing {

inline std::vector<Objective> corpus() {
  return {quadratic_conditioned(2, 10.0), rosenbrock(2), norm_power(2, 1.0), norm_power(2, 2.0)};
}

struct NamedFlow {
  std::string label;
  FlowSystem fs;
};

// Every catalog flow over every corpus problem.
inline std::vector<NamedFlow> flow_corpus(bool include_rmsprop = true) {
  std::vector<NamedFlow> out;
  for (const Objective& o : corpus()) {
    const std::string tag = o.name + (o.lojasiewicz_alpha ? "/a=" + std::to_string(*o.lojasiewicz_alpha) : "");
    out.push_back({"gd " + tag, make_gd(o)});
    out.push_back({"momentum " + tag, make_momentum(o, 1.0)});
    out.push_back({"momentum(b=3) " + tag, make_momentum(o, 3.0)});
    if (include_rmsprop) out.push_back({"rmsprop " + tag, make_rmsprop(o, 1e-2)});
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      out.push_back({"pgd p=" + std::to_string(p) + " " + tag, make_pgd(o, PGDParams{p})});
    }
  }
  return out;
}

// Random state inside the flow's natural domain: theta in [-2, 2]^N, momentum
// velocities in [-2, 2], RMSProp accumulators in [0, 4].
inline Vector random_state(Rng& rng, const FlowSystem& fs) {
  Vector y(fs.dim);
  for (const Block& b : fs.blocks) {
    const double lo = b.name == "s" ? 0.0 : -2.0;
    const double hi = b.name == "s" ? 4.0 : 2.0;
    y.segment(b.offset, b.size) = sample_box(rng, b.size, lo, hi);
  }
  return y;
}

}  // namespace lyapctl::testing
