#pragma once

#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

namespace nudge::stats {

struct GroupStats {
  double mean = 0.0;
  double sd = 0.0;  // sample sd (n - 1); NaN when n < 2
  std::size_t n = 0;
};

GroupStats describe(std::span<const double> sample);

struct TestResult {
  double statistic = 0.0;
  double df1 = 0.0;
  std::optional<double> df2;  // second degree of freedom for F
  double p_value = 1.0;
  bool infinite = false;      // zero variance with separated means
};

nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const GroupStats& g);

// Regularized incomplete beta I_x(a, b), evaluated with the continued
// fraction (modified Lentz) on whichever side of the mean converges faster.
double incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with df.
double t_two_sided_p(double t, double df);
/// P(T <= t).
double t_cdf(double t, double df);
/// Upper tail P(F >= f).
double f_upper_p(double f, double df1, double df2);

/// Pooled-variance two-sample t test (two-sided). Needs n >= 2 per side.
TestResult student_t(std::span<const double> a, std::span<const double> b);
TestResult t_from_summary(double mean1, double sd1, std::size_t n1, double mean2,
                          double sd2, std::size_t n2);

/// Ranks starting at 1, ties share their average rank.
std::vector<double> average_ranks(std::span<const double> x);
double pearson(std::span<const double> x, std::span<const double> y);

/// Rank correlation, p from the t approximation on n - 2 df. Throws
/// ErrorKind::UndefinedMetrics for a constant input.
TestResult spearman(std::span<const double> x, std::span<const double> y);

/// One-way ANOVA, F on (k - 1, N - k).
TestResult oneway_anova(const std::vector<std::vector<double>>& groups);

}  // namespace nudge::stats
