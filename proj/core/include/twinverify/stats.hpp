#pragma once

#include <cstdint>
#include <stdexcept>

namespace twinverify {

class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Chernoff-Hoeffding run count ceil(ln(2/alpha) / (2 eps^2)).
std::uint64_t chernoff_runs(double epsilon, double alpha);

struct Interval {
  double lower = 0;
  double upper = 1;
};

/// Exact two-sided (1 - alpha) Clopper-Pearson interval for k of n.
Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double alpha);

/// Standard normal quantile.
double normal_quantile(double p);

enum class SprtDecision : std::uint8_t { Continue, AcceptH0, AcceptH1 };

/// Wald's sequential probability ratio test of H0: p <= p0 against
/// H1: p >= p1 with type-I error alpha and type-II error beta.
class Sprt {
public:
  Sprt(double p0, double p1, double alpha, double beta);

  SprtDecision add(bool success);
  SprtDecision decision() const noexcept { return decision_; }
  double log_ratio() const noexcept { return llr_; }
  std::uint64_t samples() const noexcept { return n_; }
  double lower_boundary() const noexcept { return a_; }
  double upper_boundary() const noexcept { return b_; }

private:
  double step_success_;
  double step_failure_;
  double a_;
  double b_;
  double llr_ = 0;
  std::uint64_t n_ = 0;
  SprtDecision decision_ = SprtDecision::Continue;
};

/// Running mean and variance (Welford).
class RunningStats {
public:
  void add(double x);
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double sample_variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

private:
  std::uint64_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

}  // namespace twinverify
