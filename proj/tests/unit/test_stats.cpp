#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <random>

#include "doctest.h"
#include "nudge/error.hpp"
#include "nudge/stats.hpp"
#include "oracles/textbook.hpp"

using namespace nudge;
using namespace nudge::stats;
using V = std::vector<double>;

namespace {


V random_sample(std::mt19937_64& gen, std::size_t n, bool ties) {
  std::normal_distribution<double> normal(0.5, 0.2);
  std::uniform_int_distribution<int> small(0, 5);
  V v(n);
  for (auto& x : v) x = ties ? small(gen) : normal(gen);
  return v;
}

}  // namespace

TEST_CASE("frozen reference values") {
  SUBCASE("pooled t from summary statistics") {
    const auto r = t_from_summary(0.76, 0.08, 19, 0.59, 0.14, 19);
    CHECK(r.statistic == doctest::Approx(4.595566425287614).epsilon(1e-12));
    CHECK(r.df1 == 36);
    CHECK(r.p_value == doctest::Approx(5.133785202968878e-05).epsilon(1e-9));
    const auto lull = t_from_summary(8.77, 6.82, 19, 3.60, 3.01, 19);
    CHECK(lull.statistic == doctest::Approx(3.0229946342244207).epsilon(1e-12));
    CHECK(lull.p_value == doctest::Approx(0.00459171652064485).epsilon(1e-9));
  }
  SUBCASE("critical value of t at 36 df") {
    CHECK(t_two_sided_p(2.0280940009804502, 36) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(t_two_sided_p(2.028, 36) == doctest::Approx(0.05001006660639858).epsilon(1e-10));
    CHECK(std::fabs(t_two_sided_p(2.028, 36) - 0.05) < 1e-3);
    CHECK(t_cdf(2.0280940009804502, 36) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(t_cdf(0.0, 36) == doctest::Approx(0.5));
  }
  SUBCASE("two-sample t") {
    const auto r = student_t(V{0.61, 0.72, 0.55, 0.80, 0.67}, V{0.52, 0.49, 0.63, 0.58});
    CHECK(r.statistic == doctest::Approx(2.0469152302231257).epsilon(1e-12));
    CHECK(r.df1 == 7);
    CHECK(r.p_value == doctest::Approx(0.07989331863727636).epsilon(1e-9));
  }
  SUBCASE("spearman with ties") {
    const auto r = spearman(V{1, 2, 2, 4, 5, 7}, V{3, 1, 4, 4, 9, 8});
    CHECK(r.statistic == doctest::Approx(0.8088235294117647).epsilon(1e-12));
    CHECK(r.df1 == 4);
    CHECK(r.p_value == doctest::Approx(0.051329063199674334).epsilon(1e-9));
  }
  SUBCASE("one-way anova") {
    const auto r = oneway_anova({{1, 2, 3}, {2, 4, 5}, {7, 8, 6.5, 9}});
    CHECK(r.statistic == doctest::Approx(20.03521126760562).epsilon(1e-12));
    CHECK(r.df1 == 2);
    REQUIRE(r.df2);
    CHECK(*r.df2 == 7);
    CHECK(r.p_value == doctest::Approx(0.0012683082023577737).epsilon(1e-9));
  }
  SUBCASE("F tail and incomplete beta") {
    CHECK(f_upper_p(4.94, 1, 36) == doctest::Approx(0.03261190887939269).epsilon(1e-10));
    CHECK(incomplete_beta(2, 3, 0.3) == doctest::Approx(0.3483).epsilon(1e-12));
    CHECK(incomplete_beta(0.5, 18, 0.05) == doctest::Approx(0.8228297406515257).epsilon(1e-10));
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
  }
}

TEST_CASE("incomplete beta agrees with Boost across its domain") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> ab(0.2, 60.0), x01(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = ab(gen), b = ab(gen), x = x01(gen);
    REQUIRE(incomplete_beta(a, b, x) ==
            doctest::Approx(boost::math::ibeta(a, b, x)).epsilon(1e-10));
  }
}

TEST_CASE("describe") {
  const auto g = describe(V{2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(g.mean == 5.0);
  CHECK(g.sd == doctest::Approx(std::sqrt(32.0 / 7)));
  CHECK(g.n == 8);
  CHECK(std::isnan(describe(V{3}).sd));
  CHECK(std::isnan(describe(V{}).mean));
}

TEST_CASE("average ranks") {
  CHECK(average_ranks(V{10, 20, 20, 5}) == V{2, 3.5, 3.5, 1});
  CHECK(average_ranks(V{1, 1, 1}) == V{2, 2, 2});
}

TEST_CASE("property: agreement with textbook oracles on 500 random samples") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::size_t> size(3, 12);
  std::uniform_int_distribution<int> groups(2, 5);
  for (int i = 0; i < 500; ++i) {
    const bool ties = i % 4 == 0;
    const V a = random_sample(gen, size(gen), false);
    const V b = random_sample(gen, size(gen), false);
    const auto t = student_t(a, b);
    const auto [ot, op] = textbook::student(a, b);
    REQUIRE(std::fabs(t.statistic - ot) < 1e-9);
    REQUIRE(std::fabs(t.p_value - op) < 1e-9);

    const std::size_t n = size(gen);
    const V x = random_sample(gen, n, ties), y = random_sample(gen, n, ties);
    bool constant = true;
    for (std::size_t k = 1; k < n; ++k) constant &= x[k] == x[0];
    bool constant_y = true;
    for (std::size_t k = 1; k < n; ++k) constant_y &= y[k] == y[0];
    if (!constant && !constant_y) {
      const auto s = spearman(x, y);
      const auto [orho, osp] = textbook::spearman(x, y);
      REQUIRE(std::fabs(s.statistic - orho) < 1e-9);
      if (std::fabs(orho) < 1.0 - 1e-12) REQUIRE(std::fabs(s.p_value - osp) < 1e-9);
    }

    std::vector<V> gs;
    for (int k = groups(gen); k > 0; --k) gs.push_back(random_sample(gen, size(gen), false));
    const auto f = oneway_anova(gs);
    const auto [of, ofp] = textbook::anova(gs);
    REQUIRE(std::fabs(f.statistic - of) < 1e-9 * std::max(1.0, of));
    REQUIRE(std::fabs(f.p_value - ofp) < 1e-9);
  }
}

TEST_CASE("property: F equals t squared for two groups") {
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<std::size_t> size(2, 15);
  for (int i = 0; i < 500; ++i) {
    const V a = random_sample(gen, size(gen), false), b = random_sample(gen, size(gen), false);
    const auto t = student_t(a, b);
    const auto f = oneway_anova({a, b});
    REQUIRE(std::fabs(f.statistic - t.statistic * t.statistic) <
            1e-9 * std::max(1.0, f.statistic));
    REQUIRE(std::fabs(f.p_value - t.p_value) < 1e-9);
  }
}

TEST_CASE("property: t is antisymmetric and p is monotone in |t|") {
  std::mt19937_64 gen(9);
  for (int i = 0; i < 200; ++i) {
    const V a = random_sample(gen, 6, false), b = random_sample(gen, 7, false);
    const auto ab = student_t(a, b), ba = student_t(b, a);
    REQUIRE(ab.statistic == doctest::Approx(-ba.statistic).epsilon(1e-14));
    REQUIRE(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-14));
  }
  for (double df : {1.0, 4.0, 36.0, 200.0}) {
    double prev = 1.0;
    for (double t = 0.0; t <= 12.0; t += 0.05) {
      const double p = t_two_sided_p(t, df);
      REQUIRE(p <= prev + 1e-15);
      REQUIRE(p >= 0.0);
      REQUIRE(t_two_sided_p(-t, df) == p);
      prev = p;
    }
  }
}

TEST_CASE("property: spearman is invariant under monotone transforms") {
  std::mt19937_64 gen(13);
  for (int i = 0; i < 200; ++i) {
    const V x = random_sample(gen, 10, i % 2 == 0), y = random_sample(gen, 10, false);
    V fx(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) fx[k] = std::exp(3 * x[k]) + 7;
    bool constant = true;
    for (double v : x) constant &= v == x[0];
    if (constant) continue;
    const auto r1 = spearman(x, y), r2 = spearman(fx, y);
    REQUIRE(r1.statistic == doctest::Approx(r2.statistic).epsilon(1e-12));
    V neg(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
    REQUIRE(spearman(neg, y).statistic == doctest::Approx(-r1.statistic).epsilon(1e-12));
  }
}

TEST_CASE("degenerate inputs") {
  SUBCASE("zero variance, equal means") {
    const auto r = student_t(V{1, 1, 1}, V{1, 1});
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
    CHECK_FALSE(r.infinite);
  }
  SUBCASE("zero variance, separated means") {
    const auto r = student_t(V{2, 2, 2}, V{1, 1});
    CHECK(r.infinite);
    CHECK(r.p_value == 0.0);
    CHECK(to_json(r)["statistic"] == "inf");
    const auto f = oneway_anova({{2, 2}, {1, 1}});
    CHECK(f.infinite);
    CHECK(f.p_value == 0.0);
  }
  SUBCASE("perfect rank agreement") {
    const auto r = spearman(V{1, 2, 3, 4}, V{10, 20, 30, 40});
    CHECK(r.statistic == doctest::Approx(1.0));
    CHECK(r.p_value == 0.0);
  }
  SUBCASE("constant input is undefined") {
    try {
      spearman(V{3, 3, 3, 3}, V{1, 2, 3, 4});
      FAIL("constant input accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UndefinedMetrics);
    }
  }
  SUBCASE("too few observations") {
    CHECK_THROWS_AS(student_t(V{1}, V{1, 2}), Error);
    CHECK_THROWS_AS(spearman(V{1, 2}, V{1, 2}), Error);
    CHECK_THROWS_AS(spearman(V{1, 2, 3}, V{1, 2}), Error);
    CHECK_THROWS_AS(oneway_anova({{1, 2}}), Error);
    CHECK_THROWS_AS(oneway_anova({{1, 2}, {3}}), Error);
    CHECK_THROWS_AS(t_from_summary(1, -1, 5, 1, 1, 5), Error);
  }
}

TEST_CASE("json forms") {
  const auto f = oneway_anova({{1, 2, 3}, {2, 4, 5}});
  const auto j = to_json(f);
  CHECK(j["df"] == nlohmann::json::array({1.0, 4.0}));
  const auto g = to_json(describe(V{1, 2, 3}));
  CHECK(g["n"] == 3);
  CHECK(g["mean"] == 2.0);
}
