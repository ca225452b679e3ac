#pragma once

// Continuous, strictly increasing noise distributions on the real line:
// normal, Student t, logistic, tabulated (monotone cubic), plus translation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rpf/errors.hpp"

namespace rpf {

/// Default accuracy targets; every evaluation that iterates accepts an override.
struct Tolerances {
  double cdf = 1e-10;
  double quantile = 1e-10;
  double pdf = 1e-8;
};

namespace detail {

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }
inline double normal_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }
inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Acklam's rational approximation (relative error ~1e-9) for p <= 0.5,
// followed by Halley steps against the erfc-based cdf.
inline double normal_lower_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549671010466288e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int i = 0; i < 2; ++i) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

inline double normal_quantile(double q) {
  if (q > 0.5) return -normal_lower_quantile(1.0 - q);
  return normal_lower_quantile(q);
}

// Modified Lentz continued fraction for the regularized incomplete beta.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

/// I_x(a, b) with the complement xc = 1 - x supplied separately so callers can
/// avoid cancellation when x is close to one.
inline double incomplete_beta(double a, double b, double x, double xc) {
  if (x <= 0.0) return 0.0;
  if (xc <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(xc);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, xc) / b;
}

}  // namespace detail

struct Normal {};

struct StudentT {
  double nu;
};

struct Logistic {
  double scale = 1.0;
};

/// Cdf given by (x, F(x)) knots, interpolated with a monotone (Fritsch-Butland)
/// cubic Hermite spline and continued by exponential tails outside the knots.
class TabulatedCdf {
 public:
  TabulatedCdf(std::vector<double> xs, std::vector<double> cdf, bool has_density = false) {
    const std::size_t n = xs.size();
    if (n < 2 || cdf.size() != n) throw DomainError("tabulated cdf needs at least two (x, F) pairs");
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(cdf[i])) throw DomainError("tabulated cdf values must be finite");
      if (cdf[i] < 0.0 || cdf[i] > 1.0) throw DomainError("tabulated cdf values must lie in [0, 1]");
      if (i > 0 && !(xs[i] > xs[i - 1])) throw DomainError("tabulated x grid must be strictly increasing");
      if (i > 0 && !(cdf[i] > cdf[i - 1])) throw DomainError("tabulated cdf values must be strictly increasing");
    }
    auto data = std::make_shared<Data>();
    data->xs = std::move(xs);
    data->fs = std::move(cdf);
    data->has_density = has_density;
    auto& d = data->slopes;
    d.resize(n);
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = data->xs[i + 1] - data->xs[i];
      delta[i] = (data->fs[i + 1] - data->fs[i]) / h[i];
    }
    d.front() = delta.front();
    d.back() = delta.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    data->lambda_lo = data->fs.front() > 0.0 ? d.front() / data->fs.front() : 0.0;
    data->lambda_hi = data->fs.back() < 1.0 ? d.back() / (1.0 - data->fs.back()) : 0.0;
    data_ = std::move(data);

    symmetric_ = true;
    for (double x : data_->xs) {
      if (std::abs(cdf_at(-x) + cdf_at(x) - 1.0) > 1e-9) {
        symmetric_ = false;
        break;
      }
    }
  }

  const std::vector<double>& xs() const { return data_->xs; }
  const std::vector<double>& values() const { return data_->fs; }
  bool has_density() const { return data_->has_density; }
  bool symmetric() const { return symmetric_; }

  double cdf_at(double x) const {
    const auto& xs = data_->xs;
    const auto& fs = data_->fs;
    if (x < xs.front()) {
      return fs.front() > 0.0 ? fs.front() * std::exp(data_->lambda_lo * (x - xs.front())) : 0.0;
    }
    if (x > xs.back()) return 1.0 - sf_upper_tail(x);
    return hermite(x, 0);
  }

  double sf_at(double x) const {
    if (x > data_->xs.back()) return sf_upper_tail(x);
    return 1.0 - cdf_at(x);
  }

  double pdf_at(double x) const {
    require_density();
    const auto& xs = data_->xs;
    const auto& fs = data_->fs;
    if (x < xs.front()) return data_->lambda_lo * cdf_at(x);
    if (x > xs.back()) return fs.back() < 1.0 ? data_->lambda_hi * sf_upper_tail(x) : 0.0;
    return hermite(x, 1);
  }

  double pdf_derivative_at(double x) const {
    require_density();
    const auto& xs = data_->xs;
    if (x < xs.front()) return data_->lambda_lo * pdf_at(x);
    if (x > xs.back()) return -data_->lambda_hi * pdf_at(x);
    return hermite(x, 2);
  }

  double quantile_at(double q) const {
    const auto& xs = data_->xs;
    const auto& fs = data_->fs;
    if (q < fs.front()) return xs.front() + std::log(q / fs.front()) / data_->lambda_lo;
    if (q > fs.back()) return xs.back() - std::log((1.0 - q) / (1.0 - fs.back())) / data_->lambda_hi;
    auto it = std::upper_bound(fs.begin(), fs.end(), q);
    std::size_t i = it == fs.end() ? fs.size() - 2 : static_cast<std::size_t>(it - fs.begin()) - 1;
    i = std::min(i, fs.size() - 2);
    double lo = xs[i];
    double hi = xs[i + 1];
    for (int k = 0; k < 80 && hi - lo > 0.0; ++k) {
      const double mid = lo + 0.5 * (hi - lo);
      if (mid <= lo || mid >= hi) break;
      if (hermite(mid, 0) < q) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return lo + 0.5 * (hi - lo);
  }

 private:
  struct Data {
    std::vector<double> xs, fs, slopes;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    bool has_density = false;
  };

  void require_density() const {
    if (!data_->has_density) throw UnsupportedOperation("tabulated distribution was loaded without a density");
  }

  double sf_upper_tail(double x) const {
    const double tail = 1.0 - data_->fs.back();
    return tail > 0.0 ? tail * std::exp(-data_->lambda_hi * (x - data_->xs.back())) : 0.0;
  }

  // order 0: value, 1: first derivative, 2: second derivative of the spline.
  double hermite(double x, int order) const {
    const auto& xs = data_->xs;
    const auto& fs = data_->fs;
    const auto& d = data_->slopes;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    i = std::min(i, xs.size() - 2);
    const double h = xs[i + 1] - xs[i];
    const double t = (x - xs[i]) / h;
    const double f0 = fs[i], f1 = fs[i + 1], d0 = d[i], d1 = d[i + 1];
    switch (order) {
      case 0: {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
               (t3 - t2) * h * d1;
      }
      case 1:
        return (6 * t * t - 6 * t) / h * f0 + (3 * t * t - 4 * t + 1) * d0 + (-6 * t * t + 6 * t) / h * f1 +
               (3 * t * t - 2 * t) * d1;
      default:
        return (12 * t - 6) / (h * h) * f0 + (6 * t - 4) / h * d0 + (-12 * t + 6) / (h * h) * f1 +
               (6 * t - 2) / h * d1;
    }
  }

  std::shared_ptr<const Data> data_;
  bool symmetric_ = false;
};

/// Noise distribution F with density f and quantile F^-1. Immutable value type.
/// A translated distribution keeps its base family and a location offset t,
/// with cdf(x) = base_cdf(x + t).
class NoiseDistribution {
 public:
  using Base = std::variant<Normal, StudentT, Logistic, TabulatedCdf>;

  static NoiseDistribution normal() { return NoiseDistribution(Normal{}); }

  static NoiseDistribution student_t(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("student_t degrees of freedom must be positive");
    return NoiseDistribution(StudentT{nu});
  }

  static NoiseDistribution logistic(double scale = 1.0) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("logistic scale must be positive");
    return NoiseDistribution(Logistic{scale});
  }

  static NoiseDistribution tabulated(std::vector<double> xs, std::vector<double> cdf, bool has_density = false) {
    return NoiseDistribution(TabulatedCdf(std::move(xs), std::move(cdf), has_density));
  }

  const Base& base() const { return base_; }
  double offset() const { return offset_; }

  /// Symmetric about zero: cdf(-x) = 1 - cdf(x).
  bool symmetric() const {
    if (offset_ != 0.0) return false;
    if (const auto* tab = std::get_if<TabulatedCdf>(&base_)) return tab->symmetric();
    return true;
  }

  bool has_density() const {
    if (const auto* tab = std::get_if<TabulatedCdf>(&base_)) return tab->has_density();
    return true;
  }

  std::string kind_name() const {
    std::string base = std::visit(
        [](const auto& b) -> std::string {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Normal>) return "normal";
          else if constexpr (std::is_same_v<T, StudentT>) return "student_t";
          else if constexpr (std::is_same_v<T, Logistic>) return "logistic";
          else return "tabulated";
        },
        base_);
    return offset_ == 0.0 ? base : "shifted(" + base + ")";
  }

  std::string description() const {
    std::string text = std::visit(
        [](const auto& b) -> std::string {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Normal>) return "normal(0,1)";
          else if constexpr (std::is_same_v<T, StudentT>) return "student_t(nu=" + trimmed(b.nu) + ")";
          else if constexpr (std::is_same_v<T, Logistic>) return "logistic(scale=" + trimmed(b.scale) + ")";
          else return "tabulated(" + std::to_string(b.xs().size()) + " knots)";
        },
        base_);
    if (offset_ != 0.0) text += " shifted by " + trimmed(offset_);
    return text;
  }

  double cdf(double x) const { return base_cdf(x + offset_); }

  /// 1 - cdf(x), evaluated without cancellation in the upper tail.
  double sf(double x) const { return base_sf(x + offset_); }

  double pdf(double x) const { return base_pdf(x + offset_); }

  /// f'(x); used by second-order and unimodality checks.
  double pdf_derivative(double x) const { return base_pdf_derivative(x + offset_); }

  double quantile(double q, const Tolerances& tol = {}) const {
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile requires q in (0, 1)");
    return base_quantile(q, tol) - offset_;
  }

  /// Interquartile range rescaled to a normal standard deviation; a scale
  /// proxy that exists for heavy-tailed families too.
  double robust_scale() const { return (quantile(0.75) - quantile(0.25)) / 1.3489795003921634; }

  double median() const { return quantile(0.5); }

  friend NoiseDistribution shift_distribution(const NoiseDistribution& d, double t);

 private:
  explicit NoiseDistribution(Base base) : base_(std::move(base)) {}

  static std::string trimmed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
  }

  double base_cdf(double x) const {
    return std::visit(
        [x](const auto& b) -> double {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Normal>) return detail::normal_cdf(x);
          else if constexpr (std::is_same_v<T, StudentT>) return t_sf(-x, b.nu);
          else if constexpr (std::is_same_v<T, Logistic>) return 1.0 / (1.0 + std::exp(-x / b.scale));
          else return b.cdf_at(x);
        },
        base_);
  }

  double base_sf(double x) const {
    return std::visit(
        [x](const auto& b) -> double {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Normal>) return detail::normal_sf(x);
          else if constexpr (std::is_same_v<T, StudentT>) return t_sf(x, b.nu);
          else if constexpr (std::is_same_v<T, Logistic>) return 1.0 / (1.0 + std::exp(x / b.scale));
          else return b.sf_at(x);
        },
        base_);
  }

  double base_pdf(double x) const {
    return std::visit(
        [x](const auto& b) -> double {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Normal>) return detail::normal_pdf(x);
          else if constexpr (std::is_same_v<T, StudentT>) return t_pdf(x, b.nu);
          else if constexpr (std::is_same_v<T, Logistic>) {
            const double z = std::exp(-std::abs(x) / b.scale);
            return z / (b.scale * (1.0 + z) * (1.0 + z));
          } else return b.pdf_at(x);
        },
        base_);
  }

  double base_pdf_derivative(double x) const {
    return std::visit(
        [x](const auto& b) -> double {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Normal>) return -x * detail::normal_pdf(x);
          else if constexpr (std::is_same_v<T, StudentT>) return -t_pdf(x, b.nu) * (b.nu + 1.0) * x / (b.nu + x * x);
          else if constexpr (std::is_same_v<T, Logistic>) {
            // f' = f (1 - 2F) / s = f (sf - cdf) / s
            const double z = std::exp(-std::abs(x) / b.scale);
            const double f = z / (b.scale * (1.0 + z) * (1.0 + z));
            const double tanh_half = (1.0 - z) / (1.0 + z);
            return -(x > 0 ? 1.0 : -1.0) * f * tanh_half / b.scale;
          } else return b.pdf_derivative_at(x);
        },
        base_);
  }

  double base_quantile(double q, const Tolerances& tol) const {
    return std::visit(
        [q, &tol](const auto& b) -> double {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Normal>) return detail::normal_quantile(q);
          else if constexpr (std::is_same_v<T, StudentT>) return t_quantile(q, b.nu, tol);
          else if constexpr (std::is_same_v<T, Logistic>) return b.scale * (std::log(q) - std::log1p(-q));
          else return b.quantile_at(q);
        },
        base_);
  }

  static double t_sf(double t, double nu) {
    if (nu == 1.0) return std::atan2(1.0, t) / std::numbers::pi;
    if (nu == 2.0) {
      const double r = std::sqrt(2.0 + t * t);
      if (t > 0.0) return 1.0 / (r * (r + t));
      return 0.5 - 0.5 * t / r;
    }
    const double t2 = t * t;
    const double x = nu / (nu + t2);
    const double xc = t2 / (nu + t2);
    const double tail = 0.5 * detail::incomplete_beta(0.5 * nu, 0.5, x, xc);
    return t > 0.0 ? tail : 1.0 - tail;
  }

  static double t_pdf(double t, double nu) {
    if (nu == 1.0) return 1.0 / (std::numbers::pi * (1.0 + t * t));
    const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(t * t / nu));
  }

  static double t_quantile(double q, double nu, const Tolerances& tol) {
    if (q == 0.5) return 0.0;
    const bool upper = q > 0.5;
    const double tail = upper ? 1.0 - q : q;
    if (nu == 1.0) {
      const double x = 1.0 / std::tan(std::numbers::pi * tail);
      return upper ? x : -x;
    }
    if (nu == 2.0) {
      const double x = (1.0 - 2.0 * tail) / std::sqrt(2.0 * tail * (1.0 - tail));
      return upper ? x : -x;
    }
    // Upper-tail root of sf(x) = tail on x > 0, safeguarded Newton.
    double lo = 0.0;
    double hi = 1.0;
    while (t_sf(hi, nu) > tail) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NumericError("student_t quantile bracket overflow");
    }
    double x = 0.5 * (lo + hi);
    const double step_tol = 1e-3 * tol.quantile;
    for (int i = 0; i < 300; ++i) {
      const double g = t_sf(x, nu) - tail;  // decreasing in x
      if (g > 0.0) lo = x; else hi = x;
      double next = x + g / t_pdf(x, nu);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double dx = std::abs(next - x);
      x = next;
      if (dx <= step_tol * std::max(1.0, x) || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * x) break;
    }
    return upper ? x : -x;
  }

  Base base_;
  double offset_ = 0.0;
};

/// Translation: the result has cdf(x) = d.cdf(x + t).
inline NoiseDistribution shift_distribution(const NoiseDistribution& d, double t) {
  if (!std::isfinite(t)) throw DomainError("shift must be finite");
  NoiseDistribution out = d;
  out.offset_ = d.offset_ + t;
  return out;
}

}  // namespace rpf
