#pragma once

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace artc {

/// P(|N(0,1)| >= |z|)
inline double normal_two_sided_p(double z) {
  if (std::isnan(z)) return 1.0;
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

/// P(|T_df| >= |t|)
inline double t_two_sided_p(double t, double df) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

/// P(F_{d1,d2} >= f)
inline double f_upper_p(double f, double df_num, double df_den) {
  if (std::isnan(f) || f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const boost::math::fisher_f dist(df_num, df_den);
  return boost::math::cdf(boost::math::complement(dist, f));
}

}  // namespace artc
