#pragma once

#include <cmath>

#include "subord/bernstein.hpp"

namespace fixtures {

// Levy density 2 e^{-y}: phi(x) = 2x / (1 + x). Bounded by 2 and carries no
// certificates, so every certified report must refuse it.
inline subord::BernsteinFunction bounded_phi() {
  using namespace subord;
  ClosedForm closed;
  closed.phi = [](double x) { return std::isinf(x) ? 2.0 : 2.0 * x / (1.0 + x); };
  return BernsteinFunction("bounded", 0.0,
                           LevyMeasure::from_density([](double y) { return 2.0 * std::exp(-y); }),
                           closed);
}

}  // namespace fixtures
