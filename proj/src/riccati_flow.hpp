#pragma once

#include "hyperlq/riccati.hpp"

namespace hyperlq::detail {

// Exact flow of the Riccati equation over a step in linear-fractional form:
// E(t + h) = H + A^T E (I + G E)^{-1} A.
struct FlowTriple {
  Mat a, g, h;
};

FlowTriple HamiltonianTriple(const FirstOrderMatrices& fo, double step);
Mat ApplyTriple(const FlowTriple& t, const Mat& e);
/// Flow over the first step followed by the second.
FlowTriple Compose(const FlowTriple& first, const FlowTriple& second);
/// Flow over k repetitions of the step.
FlowTriple Power(const FlowTriple& t, long k);

}  // namespace hyperlq::detail
