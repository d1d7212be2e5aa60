#include "uneval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace uneval {

void validate(const Gaussian& g) {
  if (!std::isfinite(g.mean) || !std::isfinite(g.variance)) {
    throw std::invalid_argument("Gaussian: mean and variance must be finite");
  }
  if (g.variance < 0.0) {
    throw std::invalid_argument("Gaussian: variance must be >= 0");
  }
}

namespace {

// Cody's rational Chebyshev kernels for erf/erfc (Math. Comp. 23, 1969).
// Coefficients as distributed with netlib SPECFUN (double precision set).
// jint = 0 -> erf(x), jint = 1 -> erfc(x).
double calerf(double x, int jint) {
  static const double a[5] = {3.1611237438705656, 113.864154151050156,
                              377.485237685302021, 3209.37758913846947,
                              0.185777706184603153};
  static const double b[4] = {23.6012909523441209, 244.024637934444173,
                              1282.61652607737228, 2844.23683343917062};
  static const double c[9] = {0.564188496988670089, 8.88314979438837594,
                              66.1191906371416295,  298.635138197400131,
                              881.95222124176909,   1712.04761263407058,
                              2051.07837782607147,  1230.33935479799725,
                              2.15311535474403846e-8};
  static const double d[8] = {15.7449261107098347, 117.693950891312499,
                              537.181101862009858, 1621.38957456669019,
                              3290.79923573345963, 4362.61909014324716,
                              3439.36767414372164, 1230.33935480374942};
  static const double p[6] = {0.305326634961232344, 0.360344899949804439,
                              0.125781726111229246, 0.0160837851487422766,
                              6.58749161529837803e-4, 0.0163153871373020978};
  static const double q[5] = {2.56852019228982242, 1.87295284992346047,
                              0.527905102951428412, 0.0605183413124413191,
                              0.00233520497626869185};

  const double sqrpi = 0.56418958354775628695;  // 1/sqrt(pi)
  const double thresh = 0.46875;
  const double xbig = 26.543;
  const double xsmall = 1.11e-16;

  const double y = std::fabs(x);
  double result = 0.0;

  if (y <= thresh) {
    // |x| <= 0.46875: erf via the first rational form.
    double ysq = (y > xsmall) ? y * y : 0.0;
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
      xnum = (xnum + a[i]) * ysq;
      xden = (xden + b[i]) * ysq;
    }
    result = x * (xnum + a[3]) / (xden + b[3]);
    if (jint == 1) result = 1.0 - result;
    return result;
  }

  if (y <= 4.0) {
    // 0.46875 < |x| <= 4: erfc via the second rational form.
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
      xnum = (xnum + c[i]) * y;
      xden = (xden + d[i]) * y;
    }
    result = (xnum + c[7]) / (xden + d[7]);
    // exp(-y^2) split as exp(-ysq^2)*exp(-del) with ysq = trunc(16y)/16
    // preserves accuracy of the exponential for large arguments.
    double ysq = std::trunc(y * 16.0) / 16.0;
    double del = (y - ysq) * (y + ysq);
    result = std::exp(-ysq * ysq) * std::exp(-del) * result;
  } else {
    // |x| > 4: erfc via the asymptotic rational form.
    if (y >= xbig) {
      result = 0.0;
    } else {
      double ysq = 1.0 / (y * y);
      double xnum = p[5] * ysq;
      double xden = ysq;
      for (int i = 0; i < 4; ++i) {
        xnum = (xnum + p[i]) * ysq;
        xden = (xden + q[i]) * ysq;
      }
      result = ysq * (xnum + p[4]) / (xden + q[4]);
      result = (sqrpi - result) / y;
      double ysq2 = std::trunc(y * 16.0) / 16.0;
      double del = (y - ysq2) * (y + ysq2);
      result = std::exp(-ysq2 * ysq2) * std::exp(-del) * result;
    }
  }

  // Assemble erf/erfc for the requested sign.
  if (jint == 0) {
    result = (0.5 - result) + 0.5;
    if (x < 0.0) result = -result;
  } else if (x < 0.0) {
    result = 2.0 - result;
  }
  return result;
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

double std_normal_cdf(double x) {
  if (std::isnan(x)) throw std::invalid_argument("std_normal_cdf: x must be finite");
  // Phi(x) = erfc(-x / sqrt(2)) / 2; the erfc branch keeps full relative
  // accuracy in the left tail.
  return 0.5 * calerf(-x * kInvSqrt2, 1);
}

double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("std_normal_quantile: p must be in (0, 1)");
  }

  // Acklam's piecewise rational approximation.
  static const double pa[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
  static const double pb[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
  static const double pc[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
  static const double pd[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  double x;
  if (p < plow) {
    double qv = std::sqrt(-2.0 * std::log(p));
    x = (((((pc[0] * qv + pc[1]) * qv + pc[2]) * qv + pc[3]) * qv + pc[4]) * qv + pc[5]) /
        ((((pd[0] * qv + pd[1]) * qv + pd[2]) * qv + pd[3]) * qv + 1.0);
  } else if (p <= 1.0 - plow) {
    double qv = p - 0.5;
    double r = qv * qv;
    x = (((((pa[0] * r + pa[1]) * r + pa[2]) * r + pa[3]) * r + pa[4]) * r + pa[5]) * qv /
        (((((pb[0] * r + pb[1]) * r + pb[2]) * r + pb[3]) * r + pb[4]) * r + 1.0);
  } else {
    double qv = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((pc[0] * qv + pc[1]) * qv + pc[2]) * qv + pc[3]) * qv + pc[4]) * qv + pc[5]) /
        ((((pd[0] * qv + pd[1]) * qv + pd[2]) * qv + pd[3]) * qv + 1.0);
  }

  // One Halley step against the forward CDF.
  double e = std_normal_cdf(x) - p;
  double u = e / std_normal_pdf(x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

Gaussian fit_gaussian(std::span<const double> samples, VarianceEstimator estimator) {
  if (samples.empty()) {
    throw std::invalid_argument("fit_gaussian: insufficient data");
  }
  const auto n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    ss += d * d;
  }
  double variance;
  if (estimator == VarianceEstimator::ml) {
    variance = ss / n;
  } else {
    if (samples.size() < 2) {
      throw std::invalid_argument("fit_gaussian: unbiased variance needs >= 2 samples");
    }
    variance = ss / (n - 1.0);
  }
  Gaussian g{mean, variance};
  validate(g);
  return g;
}

Gaussian fit_gaussian_ml(std::span<const double> samples) {
  return fit_gaussian(samples, VarianceEstimator::ml);
}

Histogram make_histogram(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw std::invalid_argument("make_histogram: empty input");
  if (bins == 0) throw std::invalid_argument("make_histogram: bins must be >= 1");

  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram h;
  h.bin_edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) {
    h.bin_edges[i] = lo + width * static_cast<double>(i);
  }
  h.bin_edges.back() = hi;  // guard against accumulated rounding
  h.counts.assign(bins, 0);

  for (double v : values) {
    auto idx = static_cast<std::ptrdiff_t>((v - lo) / width);
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(bins) - 1);
    // the rightmost bin is closed
    if (v >= h.bin_edges[static_cast<std::size_t>(idx) + 1] &&
        idx + 1 < static_cast<std::ptrdiff_t>(bins)) {
      ++idx;
    }
    ++h.counts[static_cast<std::size_t>(idx)];
  }
  return h;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RngStream RngStream::substream(std::uint64_t index) const {
  const std::uint64_t combined = seed_ ^ ((index + 1) * 0x9E3779B97F4A7C15ULL);
  return RngStream(mix64(mix64(combined)));
}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform01() {
  // 53 random bits, offset by half an ulp: the result is always in (0, 1),
  // never exactly 0 or 1, so it is safe to feed the quantile transform.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
    throw std::invalid_argument("uniform: requires finite bounds with lo <= hi");
  }
  return lo + (hi - lo) * uniform01();
}

double RngStream::normal() { return std_normal_quantile(uniform01()); }

double RngStream::normal(double mean, double stddev) {
  if (!std::isfinite(mean) || !std::isfinite(stddev) || stddev < 0.0) {
    throw std::invalid_argument("normal: requires finite mean and stddev >= 0");
  }
  return mean + stddev * normal();
}

std::vector<double> sample(const Gaussian& g, RngStream& rng, std::size_t k) {
  validate(g);
  if (k == 0) throw std::invalid_argument("sample: k must be >= 1");
  const double sd = std::sqrt(g.variance);
  std::vector<double> out(k);
  for (auto& v : out) v = rng.normal(g.mean, sd);
  return out;
}

}  // namespace uneval
