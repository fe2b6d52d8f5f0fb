#include "nudge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nudge/error.hpp"

namespace nudge::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sum_sq_dev(std::span<const double> x, double m) {
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s;
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
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
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

TestResult pooled_t(double m1, double ss1, std::size_t n1, double m2, double ss2,
                    std::size_t n2) {
  if (n1 < 2 || n2 < 2) {
    throw Error(ErrorKind::Input, "t test needs at least two observations per group");
  }
  TestResult r;
  r.df1 = static_cast<double>(n1 + n2 - 2);
  const double pooled_var = (ss1 + ss2) / r.df1;
  const double diff = m1 - m2;
  const double se = std::sqrt(pooled_var * (1.0 / n1 + 1.0 / n2));
  if (se == 0.0) {
    if (diff == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = diff > 0 ? kInf : -kInf;
      r.p_value = 0.0;
      r.infinite = true;
    }
    return r;
  }
  r.statistic = diff / se;
  r.p_value = t_two_sided_p(r.statistic, r.df1);
  return r;
}

}  // namespace

GroupStats describe(std::span<const double> sample) {
  GroupStats g;
  g.n = sample.size();
  if (g.n == 0) {
    g.mean = kNaN;
    g.sd = kNaN;
    return g;
  }
  g.mean = mean_of(sample);
  g.sd = g.n < 2 ? kNaN : std::sqrt(sum_sq_dev(sample, g.mean) / (g.n - 1));
  return g;
}

nlohmann::json to_json(const TestResult& r) {
  nlohmann::json j;
  j["statistic"] = r.infinite ? nlohmann::json(r.statistic > 0 ? "inf" : "-inf")
                              : nlohmann::json(r.statistic);
  j["df"] = r.df2 ? nlohmann::json::array({r.df1, *r.df2}) : nlohmann::json(r.df1);
  j["p_value"] = r.p_value;
  return j;
}

nlohmann::json to_json(const GroupStats& g) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"mean", num(g.mean)}, {"sd", num(g.sd)}, {"n", g.n}};
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorKind::Input, "incomplete_beta: a, b must be > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(df / 2.0, 0.5, x), 0.0, 1.0);
}

double t_cdf(double t, double df) {
  const double tail = t_two_sided_p(t, df) / 2.0;
  return t >= 0.0 ? 1.0 - tail : tail;
}

double f_upper_p(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double x = df2 / (df2 + df1 * f);
  return std::clamp(incomplete_beta(df2 / 2.0, df1 / 2.0, x), 0.0, 1.0);
}

TestResult student_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorKind::Input, "t test needs at least two observations per group");
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  return pooled_t(ma, sum_sq_dev(a, ma), a.size(), mb, sum_sq_dev(b, mb), b.size());
}

TestResult t_from_summary(double mean1, double sd1, std::size_t n1, double mean2,
                          double sd2, std::size_t n2) {
  if (sd1 < 0.0 || sd2 < 0.0) throw Error(ErrorKind::Input, "t test: negative sd");
  const double ss1 = sd1 * sd1 * (static_cast<double>(n1) - 1.0);
  const double ss2 = sd2 * sd2 * (static_cast<double>(n2) - 1.0);
  return pooled_t(mean1, ss1, n1, mean2, ss2, n2);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::Input, "pearson: need equal-length samples of size >= 2");
  }
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my);
  const double denom = std::sqrt(sum_sq_dev(x, mx) * sum_sq_dev(y, my));
  if (denom == 0.0) throw Error(ErrorKind::UndefinedMetrics, "correlation of a constant vector");
  return std::clamp(sxy / denom, -1.0, 1.0);
}

TestResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::Input, "spearman: length mismatch");
  if (x.size() < 3) throw Error(ErrorKind::Input, "spearman: need at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  TestResult r;
  r.statistic = pearson(rx, ry);
  r.df1 = static_cast<double>(x.size() - 2);
  const double one_minus = 1.0 - r.statistic * r.statistic;
  if (one_minus <= 0.0) {
    r.p_value = 0.0;
  } else {
    const double t = r.statistic * std::sqrt(r.df1 / one_minus);
    r.p_value = t_two_sided_p(t, r.df1);
  }
  return r;
}

TestResult oneway_anova(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorKind::Input, "anova: need at least two groups");
  std::size_t total_n = 0;
  double grand_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorKind::Input, "anova: each group needs >= 2 values");
    total_n += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double grand_mean = grand_sum / static_cast<double>(total_n);
  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    ss_between += static_cast<double>(g.size()) * (m - grand_mean) * (m - grand_mean);
    ss_within += sum_sq_dev(g, m);
  }
  TestResult r;
  r.df1 = static_cast<double>(groups.size() - 1);
  r.df2 = static_cast<double>(total_n - groups.size());
  const double ms_between = ss_between / r.df1;
  const double ms_within = ss_within / *r.df2;
  if (ms_within == 0.0) {
    if (ss_between == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
    } else {
      r.statistic = kInf;
      r.p_value = 0.0;
      r.infinite = true;
    }
    return r;
  }
  r.statistic = ms_between / ms_within;
  r.p_value = f_upper_p(r.statistic, r.df1, *r.df2);
  return r;
}

}  // namespace nudge::stats
