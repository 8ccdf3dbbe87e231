#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

namespace patenthan {

// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Student t distribution with `df` > 0 degrees of freedom.
double student_t_cdf(double t, double df);
double student_t_two_tailed_p(double t, double df);

struct GroupSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance (n - 1 denominator)
};

GroupSummary summarize(std::span<const double> values);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;  // Welch-Satterthwaite
  double p = 1.0;   // two-tailed
  GroupSummary group1;
  GroupSummary group2;
};

// Two-sample t-test for unequal sizes and variances.
WelchResult welch_ttest(std::span<const double> group1, std::span<const double> group2);

struct TTestColumn {
  std::string heading;
  WelchResult result;
};

// Row order: t-statistic, degrees of freedom, group 1 mean and variance,
// group 2 mean and variance, p-value.
void write_ttest_table(std::ostream& out, std::span<const TTestColumn> columns);

}  // namespace patenthan
