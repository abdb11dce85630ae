#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "scif/error.hpp"
#include "scif/metrics.hpp"
#include "support.hpp"

using namespace scif;
using namespace scif::testing;

namespace {

EpochEstimate at(const Pose2& p, std::int64_t epoch = 0) {
  EpochEstimate e;
  e.epoch = epoch;
  SplitState s;
  s.mean = p;
  e.state = s;
  return e;
}

ErrorSeries series(std::initializer_list<double> v) {
  ErrorSeries out;
  for (double x : v) out.emplace_back(x);
  return out;
}

}  // namespace

TEST_CASE("position_errors examples") {
  Gen g(101);
  std::vector<Pose2> truth;
  std::vector<EpochEstimate> same, shifted;
  for (int k = 0; k < 50; ++k) {
    truth.push_back(g.pose());
    same.push_back(at(truth.back(), k));
    shifted.push_back(at(Pose2(truth.back().x() + 0.3, truth.back().y(), truth.back().theta()), k));
  }
  for (const auto& e : position_errors(same, truth)) CHECK(*e == 0.0);
  for (const auto& e : position_errors(shifted, truth)) CHECK(*e == doctest::Approx(0.3));

  std::vector<EpochEstimate> gaps = same;
  gaps[3].state.reset();
  const ErrorSeries s = position_errors(gaps, truth);
  CHECK_FALSE(s[3].has_value());

  truth.pop_back();
  try {
    position_errors(same, truth);
    FAIL("expected length mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kLengthMismatch);
  }
}

TEST_CASE("position_errors match a direct recomputation") {
  Gen g(102);
  std::vector<Pose2> truth;
  std::vector<EpochEstimate> est;
  for (int k = 0; k < 200; ++k) {
    truth.push_back(g.pose());
    est.push_back(at(g.pose(), k));
  }
  const ErrorSeries s = position_errors(est, truth);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double dx = est[k].state->mean.x() - truth[k].x();
    const double dy = est[k].state->mean.y() - truth[k].y();
    CHECK(*s[k] == doctest::Approx(std::hypot(dx, dy)).epsilon(1e-14));
  }
}

TEST_CASE("summarize examples") {
  const ErrorReport c = summarize(series({0.4, 0.4, 0.4}));
  CHECK(c.rmse == doctest::Approx(0.4));
  CHECK(c.mean == doctest::Approx(0.4));
  CHECK(c.std == doctest::Approx(0.0));

  const ErrorReport two = summarize(series({0.0, 2.0}));
  CHECK(two.mean == doctest::Approx(1.0));
  CHECK(two.rmse == doctest::Approx(std::sqrt(2.0)));
  CHECK(two.std == doctest::Approx(1.0));

  const ErrorReport half = summarize(series({0.1, 1.5, 0.2, 2.0}), 1.0);
  CHECK(half.success_rate == doctest::Approx(0.5));
}

TEST_CASE("summarize counts absent epochs as failures") {
  ErrorSeries s = series({0.1, 0.2});
  s.emplace_back(std::nullopt);
  s.emplace_back(std::nullopt);
  const ErrorReport r = summarize(s);
  CHECK(r.present == 2);
  CHECK(r.epochs == 4);
  CHECK(r.success_rate == doctest::Approx(0.5));
  CHECK(r.mean == doctest::Approx(0.15));
}

TEST_CASE("summarize errors") {
  try {
    summarize(ErrorSeries{});
    FAIL("expected empty input");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyInput);
  }
  CHECK_THROWS_AS(summarize(ErrorSeries{std::nullopt}), Error);
  CHECK_THROWS_AS(summarize(series({1.0, NAN})), Error);
}

TEST_CASE("summarize identities and permutation invariance") {
  Gen g(103);
  for (int i = 0; i < 200; ++i) {
    ErrorSeries s;
    const int n = g.integer(1, 60);
    for (int k = 0; k < n; ++k) s.emplace_back(std::abs(g.normal()));
    const ErrorReport r = summarize(s);
    CHECK(std::abs(r.rmse * r.rmse - (r.mean * r.mean + r.std * r.std)) < 1e-9);
    CHECK(r.rmse >= r.mean - 1e-15);
    CHECK(r.success_rate >= 0.0);
    CHECK(r.success_rate <= 1.0);
    std::shuffle(s.begin(), s.end(), g.engine());
    const ErrorReport p = summarize(s);
    CHECK(p.rmse == doctest::Approx(r.rmse).epsilon(1e-13));
    CHECK(p.mean == doctest::Approx(r.mean).epsilon(1e-13));
    CHECK(p.std == doctest::Approx(r.std).epsilon(1e-9));
    CHECK(p.success_rate == r.success_rate);
  }
}

TEST_CASE("proportional_reduction examples") {
  ErrorReport base;
  base.rmse = 0.79;
  base.mean = 0.6;
  base.std = 0.5;
  const Reduction same = proportional_reduction(base, base);
  CHECK(*same.rmse == doctest::Approx(0.0));

  ErrorReport m = base;
  m.rmse = 0.45;
  // Published pair: 0.79 m baseline, 0.45 m method, reported as 43 %.
  CHECK(std::round(*proportional_reduction(base, m).rmse) == 43.0);

  ErrorReport zero;
  const Reduction all = proportional_reduction(base, zero);
  CHECK(*all.rmse == doctest::Approx(100.0));
  CHECK(*all.std == doctest::Approx(100.0));

  const Reduction na = proportional_reduction(zero, base);
  CHECK_FALSE(na.rmse.has_value());
  CHECK_FALSE(na.mean.has_value());
}

TEST_CASE("proportional_reduction is antisymmetric around the baseline") {
  ErrorReport base;
  base.rmse = base.mean = base.std = 1.0;
  ErrorReport lo = base, hi = base;
  lo.rmse = 0.7;
  hi.rmse = 1.3;
  CHECK(*proportional_reduction(base, lo).rmse == doctest::Approx(-*proportional_reduction(base, hi).rmse));
}
