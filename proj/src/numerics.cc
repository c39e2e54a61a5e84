//
// Copyright 2026 The mia-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "mia_audit/numerics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "mia_audit/error.h"

namespace mia {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Acklam's rational approximation to the lower half of Phi^{-1}.
double AcklamLower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double StirlingCorrection(double z) {
  const double inv = 1.0 / z;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 -
                inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
}

double LogBeta(double a, double b) {
  const double small = std::min(a, b);
  const double big = std::max(a, b);
  return std::lgamma(small) - LogGammaDifference(big, small);
}

// Continued fraction for I_x(a, b) in modified Lentz form.
double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta continued fraction did not converge (a=" +
              std::to_string(a) + ", b=" + std::to_string(b) +
              ", x=" + std::to_string(x) + ")");
}

// Positive s with StudentTSf(s, df) == q, for 0 < q < 0.5.
double StudentTUpperQuantile(double q, double df) {
  const double z = -NormalQuantile(q);
  const double z3 = z * z * z;
  double s = z + (z3 + z) / (4.0 * df) +
             (5.0 * z3 * z * z + 16.0 * z3 + 3.0 * z) / (96.0 * df * df);
  if (!(s > 0.0) || !std::isfinite(s)) s = z;

  double lo = 0.0;
  double hi = std::max(s, 1.0);
  while (StudentTSf(hi, df) > q) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
  }
  s = std::clamp(s, lo, hi);
  for (int it = 0; it < 500; ++it) {
    const double f = StudentTSf(s, df) - q;
    if (f == 0.0) return s;
    if (f > 0.0) {
      lo = s;
    } else {
      hi = s;
    }
    const double pdf = StudentTPdf(s, df);
    double next = pdf > 0.0 ? s + f / pdf : kNaN;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - s) <= 4e-16 * std::fabs(next) || hi - lo <= 4e-16 * hi) {
      return next;
    }
    s = next;
  }
  return s;
}

struct ProfileResult {
  double log_likelihood;
  double scale_squared;
  bool converged;
};

// Log-likelihood of a location-0 t(df) with the scale at its EM fixed point.
ProfileResult ProfileScale(std::span<const double> xs, double df,
                           double scale_squared) {
  const double n = static_cast<double>(xs.size());
  bool converged = false;
  for (int it = 0; it < 500; ++it) {
    double acc = 0.0;
    for (double x : xs) {
      const double x2 = x * x;
      acc += x2 * (df + 1.0) / (df + x2 / scale_squared);
    }
    const double next = acc / n;
    const bool done = std::fabs(next - scale_squared) <= 1e-12 * scale_squared;
    scale_squared = next;
    if (done) {
      converged = true;
      break;
    }
  }
  double sum_log = 0.0;
  for (double x : xs) sum_log += std::log1p(x * x / (df * scale_squared));
  const double ll = n * (-LogBeta(0.5 * df, 0.5) - 0.5 * std::log(df) -
                         0.5 * std::log(scale_squared)) -
                    0.5 * (df + 1.0) * sum_log;
  return {ll, scale_squared, converged};
}

}  // namespace

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double NormalSf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("NormalQuantile: p must lie in (0, 1), got " +
                          std::to_string(p));
  }
  // 1 - p is exact for p >= 0.5, so the upper half reflects losslessly.
  if (p > 0.5) return -NormalQuantile(1.0 - p);
  double x = AcklamLower(p);
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (pdf > 0.0) {
    const double u = (NormalCdf(x) - p) / pdf;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double LogGammaDifference(double x, double h) {
  if (x < 15.0) return std::lgamma(x + h) - std::lgamma(x);
  return (x - 0.5) * std::log1p(h / x) + h * std::log(x + h) - h +
         StirlingCorrection(x + h) - StirlingCorrection(x);
}

double RegularizedIncompleteBeta(double a, double b, double x, double y) {
  if (!(a > 0.0 && b > 0.0)) {
    throw InvalidArgument("RegularizedIncompleteBeta: a and b must be positive");
  }
  if (!(x >= 0.0 && y >= 0.0) || std::fabs(x + y - 1.0) > 1e-12) {
    throw InvalidArgument("RegularizedIncompleteBeta: need x in [0,1], y = 1-x");
  }
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  // Large a or b magnify any rounding in log(x); take the log of whichever
  // of x, y is small directly and the other through log1p.
  const double log_x = x > 0.5 ? std::log1p(-y) : std::log(x);
  const double log_y = y > 0.5 ? std::log1p(-x) : std::log(y);
  const double log_front = a * log_x + b * log_y - LogBeta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * BetaContinuedFraction(b, a, y) / b;
}

double StudentTSf(double t, double df) {
  if (!(df > 0.0) || !std::isfinite(df)) {
    throw InvalidArgument("Student-t: df must be positive and finite");
  }
  if (std::isnan(t)) return kNaN;
  if (t == 0.0) return 0.5;
  if (std::isinf(t)) return t > 0.0 ? 0.0 : 1.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  const double tail = 0.5 * RegularizedIncompleteBeta(0.5 * df, 0.5, x, y);
  return t > 0.0 ? tail : 1.0 - tail;
}

double StudentTCdf(double t, double df) { return StudentTSf(-t, df); }

double StudentTPdf(double t, double df) {
  if (!(df > 0.0) || !std::isfinite(df)) {
    throw InvalidArgument("Student-t: df must be positive and finite");
  }
  return std::exp(-LogBeta(0.5 * df, 0.5) - 0.5 * std::log(df) -
                  0.5 * (df + 1.0) * std::log1p(t * t / df));
}

double StudentTQuantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("StudentTQuantile: p must lie in (0, 1)");
  }
  if (!(df > 0.0) || !std::isfinite(df)) {
    throw InvalidArgument("StudentTQuantile: df must be positive and finite");
  }
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -StudentTUpperQuantile(p, df);
  return StudentTUpperQuantile(1.0 - p, df);
}

StudentTFit FitStudentT(std::span<const double> samples) {
  if (samples.size() < 10) {
    throw InvalidArgument("FitStudentT: need at least 10 samples, got " +
                          std::to_string(samples.size()));
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  if (*lo_it == *hi_it) {
    throw InvalidArgument("FitStudentT: all samples are equal");
  }
  double mean_square = 0.0;
  for (double x : samples) {
    if (!std::isfinite(x)) throw InvalidArgument("FitStudentT: non-finite sample");
    mean_square += x * x;
  }
  mean_square /= static_cast<double>(samples.size());

  double warm = mean_square;
  auto objective = [&](double log_df) {
    ProfileResult r = ProfileScale(samples, std::exp(log_df), warm);
    if (std::isfinite(r.scale_squared) && r.scale_squared > 0.0) {
      warm = r.scale_squared;
    }
    return r;
  };

  // Golden-section maximization over log(df).
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(kStudentTMinDf);
  double b = std::log(kStudentTMaxDf);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  ProfileResult fc = objective(c);
  ProfileResult fd = objective(d);
  while (b - a > 1e-5) {
    if (fc.log_likelihood >= fd.log_likelihood) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  // The interval edges are admissible optima too (df at its clamp).
  const double mid = 0.5 * (a + b);
  ProfileResult best = objective(mid);
  double best_log_df = mid;
  for (double edge : {std::log(kStudentTMinDf), std::log(kStudentTMaxDf)}) {
    if (std::fabs(edge - mid) < 1e-3) {
      ProfileResult r = objective(edge);
      if (r.log_likelihood > best.log_likelihood) {
        best = r;
        best_log_df = edge;
      }
    }
  }

  StudentTFit fit;
  if (!best.converged || !std::isfinite(best.log_likelihood)) {
    fit.df = kStudentTMaxDf;
    fit.scale = std::sqrt(mean_square);
    fit.converged = false;
    fit.log_likelihood = kNaN;
    return fit;
  }
  fit.df = std::clamp(std::exp(best_log_df), kStudentTMinDf, kStudentTMaxDf);
  fit.scale = std::sqrt(best.scale_squared);
  fit.log_likelihood = best.log_likelihood;
  return fit;
}

std::size_t EmpiricalQuantileIndex(std::size_t n, double p) {
  if (n == 0) throw InvalidArgument("empirical quantile of an empty sequence");
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("empirical quantile: p must lie in (0, 1)");
  }
  const double r = p * static_cast<double>(n);
  const double nearest = std::round(r);
  // p * n that should be an integer but picked up rounding is snapped back.
  double k = std::fabs(r - nearest) <= 1e-9 * std::max(1.0, r) ? nearest
                                                              : std::ceil(r);
  k = std::clamp(k, 1.0, static_cast<double>(n));
  return static_cast<std::size_t>(k) - 1;
}

double EmpiricalQuantile(std::span<const double> sorted, double p) {
  return sorted[EmpiricalQuantileIndex(sorted.size(), p)];
}

void MomentAccumulator::Add(double value) {
  ++count_;
  const double delta = value - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (value - mean_);
  if (m2_ < 0.0) m2_ = 0.0;
}

void MomentAccumulator::Remove(double value) {
  if (count_ < 2) {
    throw InvalidArgument("MomentAccumulator::Remove needs count >= 2");
  }
  const double remaining = static_cast<double>(count_ - 1);
  const double reduced_mean = mean_ - (value - mean_) / remaining;
  m2_ -= (value - reduced_mean) * (value - mean_);
  if (m2_ < 0.0) m2_ = 0.0;
  mean_ = reduced_mean;
  --count_;
}

void MomentAccumulator::Merge(const MomentAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  count_ += other.count_;
}

double MomentAccumulator::Variance() const {
  if (count_ < 2) return kNaN;
  return m2_ / static_cast<double>(count_ - 1);
}

double MomentAccumulator::StdDev() const { return std::sqrt(Variance()); }

MomentAccumulator LooDowndate(MomentAccumulator acc, double value) {
  acc.Remove(value);
  return acc;
}

}  // namespace mia
