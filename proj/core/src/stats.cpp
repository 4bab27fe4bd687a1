#include "twinverify/stats.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>

namespace twinverify {

namespace {

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

std::uint64_t chernoff_runs(double epsilon, double alpha) {
  if (!open_unit(epsilon) || !open_unit(alpha)) throw ParameterError("epsilon and alpha must lie in (0,1)");
  return static_cast<std::uint64_t>(std::ceil(std::log(2.0 / alpha) / (2.0 * epsilon * epsilon)));
}

Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double alpha) {
  if (n == 0 || k > n) throw ParameterError("clopper_pearson needs 0 <= k <= n, n > 0");
  if (!open_unit(alpha)) throw ParameterError("alpha must lie in (0,1)");
  const double kk = static_cast<double>(k);
  const double nn = static_cast<double>(n);
  Interval iv;
  iv.lower = k == 0 ? 0.0 : boost::math::ibeta_inv(kk, nn - kk + 1.0, alpha / 2.0);
  iv.upper = k == n ? 1.0 : boost::math::ibeta_inv(kk + 1.0, nn - kk, 1.0 - alpha / 2.0);
  return iv;
}

double normal_quantile(double p) {
  if (!open_unit(p)) throw ParameterError("normal quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal(), p);
}

Sprt::Sprt(double p0, double p1, double alpha, double beta) {
  if (!open_unit(p0) || !open_unit(p1) || !(p0 < p1))
    throw ParameterError("SPRT needs 0 < p0 < p1 < 1");
  if (!open_unit(alpha) || !open_unit(beta)) throw ParameterError("alpha and beta must lie in (0,1)");
  step_success_ = std::log(p1 / p0);
  step_failure_ = std::log((1.0 - p1) / (1.0 - p0));
  a_ = std::log(beta / (1.0 - alpha));
  b_ = std::log((1.0 - beta) / alpha);
}

SprtDecision Sprt::add(bool success) {
  if (decision_ != SprtDecision::Continue) return decision_;
  ++n_;
  llr_ += success ? step_success_ : step_failure_;
  if (llr_ <= a_) decision_ = SprtDecision::AcceptH0;
  else if (llr_ >= b_) decision_ = SprtDecision::AcceptH1;
  return decision_;
}

void RunningStats::add(double x) {
  ++n_;
  const double d = x - mean_;
  mean_ += d / static_cast<double>(n_);
  m2_ += d * (x - mean_);
}

}  // namespace twinverify
