#pragma once

#include <cstddef>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace rbc::testing {

struct ChiSquare {
  double statistic = 0;
  int dof = 0;
  double critical = 0;  // upper alpha quantile
  bool pass = true;
};

// Goodness of fit of observed counts to expected probabilities. Classes
// with zero expected probability must have zero counts.
inline ChiSquare chi_square(const std::vector<long>& counts, const std::vector<double>& probs, double alpha = 0.01) {
  ChiSquare r;
  long n = 0;
  for (long c : counts) n += c;
  int classes = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = probs[i] * static_cast<double>(n);
    if (e == 0) {
      if (counts[i] != 0) r.pass = false;
      continue;
    }
    ++classes;
    r.statistic += (counts[i] - e) * (counts[i] - e) / e;
  }
  r.dof = classes - 1;
  if (r.dof < 1) return r;  // a single class: nothing left to test
  r.critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(r.dof), alpha));
  r.pass = r.pass && r.statistic <= r.critical;
  return r;
}

}  // namespace rbc::testing
