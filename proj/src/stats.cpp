#include "patenthan/stats.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "patenthan/error.hpp"

namespace patenthan {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw InvalidInput("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw InvalidInput("degrees of freedom must be positive");
  if (std::isnan(t)) throw NumericError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_tailed_p(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

GroupSummary summarize(std::span<const double> values) {
  GroupSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    for (double v : values) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= static_cast<double>(s.n - 1);
  }
  return s;
}

WelchResult welch_ttest(std::span<const double> group1, std::span<const double> group2) {
  if (group1.size() < 2 || group2.size() < 2) {
    throw InvalidInput("welch_ttest needs at least two observations per group");
  }
  WelchResult r;
  r.group1 = summarize(group1);
  r.group2 = summarize(group2);
  const double a = r.group1.variance / static_cast<double>(r.group1.n);
  const double b = r.group2.variance / static_cast<double>(r.group2.n);
  if (a + b == 0.0) throw InvalidInput("welch_ttest: both groups have zero variance");
  const double diff = r.group1.mean - r.group2.mean;
  r.t = diff / std::sqrt(a + b);
  r.df = (a + b) * (a + b) /
         (a * a / static_cast<double>(r.group1.n - 1) + b * b / static_cast<double>(r.group2.n - 1));
  r.p = student_t_two_tailed_p(r.t, r.df);
  return r;
}

void write_ttest_table(std::ostream& out, std::span<const TTestColumn> columns) {
  auto row = [&](const char* label, auto field, const char* fmt) {
    out << label;
    for (const auto& c : columns) {
      char buf[64];
      std::snprintf(buf, sizeof buf, fmt, field(c.result));
      out << '\t' << buf;
    }
    out << '\n';
  };
  out << "statistic";
  for (const auto& c : columns) out << '\t' << c.heading;
  out << '\n';
  row("t-statistic", [](const WelchResult& r) { return r.t; }, "%.6g");
  row("Degree of freedom", [](const WelchResult& r) { return r.df; }, "%.6g");
  row("Mean of scores in group 1", [](const WelchResult& r) { return r.group1.mean; }, "%.4f");
  row("Variance of scores in group 1", [](const WelchResult& r) { return r.group1.variance; }, "%.4f");
  row("Mean of scores in group 2", [](const WelchResult& r) { return r.group2.mean; }, "%.4f");
  row("Variance of scores in group 2", [](const WelchResult& r) { return r.group2.variance; }, "%.4f");
  row("p-value", [](const WelchResult& r) { return r.p; }, "%.6g");
}

}  // namespace patenthan
