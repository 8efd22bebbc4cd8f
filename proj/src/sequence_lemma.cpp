#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>

#include "hyperlq/closed_loop.hpp"
#include "hyperlq/errors.hpp"

namespace hyperlq {

SequenceLemmaResult sequence_lemma_check(double c, double alpha, long m_max, double a0) {
  if (!(c > 0.0)) throw DomainError("C must be positive");
  if (!(alpha > -1.0)) throw DomainError("alpha must exceed -1");
  if (m_max < 10) throw DomainError("m_max must be at least 10");
  if (!(a0 >= 0.0)) throw DomainError("a_0 must be nonnegative");
  const double p = 1.0 / (1.0 + alpha);
  SequenceLemmaResult r;
  r.m_max = m_max;
  double a = a0;
  r.bound_constant = a0;  // m = 0 term
  for (long m = 0; m < m_max; ++m) {
    double next = 0.0;
    if (a > 0.0) {
      auto f = [&](double x) { return x + c * std::pow(x, 2.0 + alpha) - a; };
      std::uintmax_t iters = 200;
      const auto tol = boost::math::tools::eps_tolerance<double>(52);
      const auto bracket = boost::math::tools::toms748_solve(f, 0.0, a, -a, c * std::pow(a, 2.0 + alpha),
                                                             tol, iters);
      if (iters >= 200) throw NumericError("sequence root finder did not converge");
      next = 0.5 * (bracket.first + bracket.second);
    }
    // Monotone and positive; the recursion holds with equality up to rounding.
    if (next > a || next < 0.0 ||
        next > a - c * std::pow(next, 2.0 + alpha) + 1e-15 * std::max(1.0, a)) {
      r.violations.push_back(m + 1);
    }
    a = next;
    r.bound_constant = std::max(r.bound_constant, a * std::pow(m + 2.0, p));
  }
  r.final_product = a * std::pow(m_max + 1.0, p);
  return r;
}

bool power_law_satisfies_recursion(double c, double alpha, double m_const, long m_from, long m_to) {
  const double p = 1.0 / (1.0 + alpha);
  for (long m = m_from; m <= m_to; ++m) {
    const double am = m_const * std::pow(m + 1.0, -p);
    const double an = m_const * std::pow(m + 2.0, -p);
    if (an > am - c * std::pow(an, 2.0 + alpha)) return false;
  }
  return true;
}

}  // namespace hyperlq
