#include "artc/errors.hpp"
#include "artc/harness.hpp"
#include "artc/rank_align.hpp"

#include <sstream>

namespace artc {

ResidualDiagnostic diagnose_residuals(const Dataset& data, const ContrastSpec& spec) {
  validate(spec, data);
  if (data.rows() < 4) throw InsufficientDataError("kurtosis needs at least 4 observations");
  const AlignedColumns aligned = align_artc(data, spec.target_factors);

  const Eigen::ArrayXd centered = aligned.y_prime.array() - aligned.y_prime.mean();
  const double scale = std::max(1.0, aligned.y_prime.cwiseAbs().maxCoeff());
  if (centered.abs().maxCoeff() <= 1e-12 * scale)
    throw DegenerateVarianceError("aligned responses are constant; kurtosis is undefined");

  ResidualDiagnostic out;
  out.target_factors = spec.target_factors;
  out.n = data.rows();
  out.excess_kurtosis = excess_kurtosis(aligned.y_prime);
  out.fat_tails = out.excess_kurtosis > fat_tail_kurtosis_threshold;

  std::ostringstream advice;
  if (out.fat_tails) {
    advice << "aligned responses are fat-tailed (excess kurtosis " << out.excess_kurtosis << " > "
           << fat_tail_kurtosis_threshold
           << "); avoid using ART-C if the data may come from a Cauchy-like population, "
              "its Type I error rate is inflated there";
  } else {
    advice << "no sign of fat tails (excess kurtosis " << out.excess_kurtosis << ")";
  }
  out.advice = advice.str();
  return out;
}

}  // namespace artc
