#include "navgraph/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace navgraph {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110453;

// Asymptotic tail series 1 - 1/x^2 + 3/x^4 - 15/x^6 + ... for the Mills
// ratio; converges quickly for |x| >= 10.
double mills_tail_series(double x) {
  const double r2 = 1.0 / (x * x);
  double term = 1.0, sum = 1.0, k = 1.0;
  for (int i = 0; i < 8; ++i) {
    term *= -(2.0 * k - 1.0) * r2;
    sum += term;
    k += 1.0;
  }
  return sum;
}
}  // namespace

double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_log_cdf(double x) {
  if (x > -34.0) {
    return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  }
  // log Phi(x) = -x^2/2 - log(-x) - log sqrt(2 pi) + log(series)
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi +
         std::log(mills_tail_series(x));
}

double norm_log_ccdf(double x) { return norm_log_cdf(-x); }

double norm_hazard(double x) {
  if (x < 34.0) {
    const double ccdf = 0.5 * std::erfc(x * kInvSqrt2);
    return norm_pdf(x) / ccdf;
  }
  return x / mills_tail_series(x);
}

double inverse_mills(double mu, int branch) {
  // M(mu,1) = phi/Phi = hazard(-mu); M(mu,0) = -phi/(1-Phi) = -hazard(mu).
  return branch == 1 ? norm_hazard(-mu) : -norm_hazard(mu);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("norm_quantile: p must lie in (0,1)");
  }
  // Acklam's rational approximation, then one Newton polish step.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Newton step on Phi(x) - p in log space friendly form.
  const double e = norm_cdf(x) - p;
  const double u = e * kSqrt2Pi * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double digamma(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error("digamma: x must be positive");
  }
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double r = 1.0 / x, r2 = r * r;
  result += std::log(x) - 0.5 * r;
  // Bernoulli-number asymptotic series.
  result -= r2 * (1.0 / 12.0 -
                  r2 * (1.0 / 120.0 -
                        r2 * (1.0 / 252.0 -
                              r2 * (1.0 / 240.0 -
                                    r2 * (1.0 / 132.0 -
                                          r2 * 691.0 / 32760.0)))));
  return result;
}

double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

namespace {
// Kronrod-15 abscissae/weights on [-1,1]; Gauss-7 weights sit at the odd
// Kronrod nodes.
const double kXgk[8] = {0.991455371120813, 0.949107912342759,
                        0.864864423359769, 0.741531185599394,
                        0.586087235467691, 0.405845151377397,
                        0.207784955007898, 0.000000000000000};
const double kWgk[8] = {0.022935322010529, 0.063092092629979,
                        0.104790010322250, 0.140653259715525,
                        0.169004726639267, 0.190350578064785,
                        0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277,
                       0.381830050505119, 0.417959183673469};

struct GkResult {
  double value;
  double error;
};

GkResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double res_k = kWgk[7] * fc;
  double res_g = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double fsum = f(c - x) + f(c + x);
    res_k += kWgk[j] * fsum;
    if (j % 2 == 1) res_g += kWg[j / 2] * fsum;
  }
  res_k *= h;
  res_g *= h;
  const double diff = std::fabs(res_k - res_g);
  return {res_k, std::pow(200.0 * diff, 1.5) < 1.0
                     ? std::pow(200.0 * diff, 1.5)
                     : diff};
}
}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol, int max_intervals) {
  if (a == b) return 0.0;
  struct Interval {
    double a, b, value, error;
  };
  std::vector<Interval> heap;
  GkResult first = gk15(f, a, b);
  heap.push_back({a, b, first.value, first.error});
  double total = first.value, total_err = first.error;
  while (total_err > abs_tol &&
         static_cast<int>(heap.size()) < max_intervals) {
    std::size_t worst = 0;
    for (std::size_t i = 1; i < heap.size(); ++i) {
      if (heap[i].error > heap[worst].error) worst = i;
    }
    const Interval iv = heap[worst];
    const double mid = 0.5 * (iv.a + iv.b);
    if (mid == iv.a || mid == iv.b) break;  // cannot refine further
    GkResult left = gk15(f, iv.a, mid);
    GkResult right = gk15(f, mid, iv.b);
    total += left.value + right.value - iv.value;
    total_err += left.error + right.error - iv.error;
    heap[worst] = {iv.a, mid, left.value, left.error};
    heap.push_back({mid, iv.b, right.value, right.error});
  }
  return total;
}

double owen_t(double h, double a) {
  if (a == 0.0 || std::isnan(h) || std::isnan(a)) return 0.0 * h * a;
  // Symmetries: even in h, odd in a.
  double sign = 1.0;
  if (a < 0.0) {
    sign = -1.0;
    a = -a;
  }
  h = std::fabs(h);
  if (a <= 1.0) {
    const double hh = h;
    auto integrand = [hh](double x) {
      return std::exp(-0.5 * hh * hh * (1.0 + x * x)) / (1.0 + x * x);
    };
    return sign * integrate_adaptive(integrand, 0.0, a, 1e-14) /
           (2.0 * M_PI);
  }
  // T(h,a) = Phi(h)/2 + Phi(ah)/2 - Phi(h) Phi(ah) - T(ah, 1/a) for a > 0.
  const double ah = a * h;
  const double t = 0.5 * (norm_cdf(h) + norm_cdf(ah)) -
                   norm_cdf(h) * norm_cdf(ah) - owen_t(ah, 1.0 / a);
  return sign * t;
}

}  // namespace navgraph
