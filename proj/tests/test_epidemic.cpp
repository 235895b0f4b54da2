#include <cmath>
#include <random>

#include "doctest.h"
#include "surge/epidemic.hpp"

using namespace surge;

namespace {

double group_total(const GroupPair& g) { return g[0].total() + g[1].total(); }

}  // namespace

TEST_CASE("R0 matches the contact-weighted formula") {
  SeirParams p;
  // (30^2 * 900000 + 35^2 * 20000) / (30 * 900000 + 35 * 20000) = 30.1263...
  const double mean_rate = (900.0 * 900000 + 1225.0 * 20000) / (30.0 * 900000 + 35.0 * 20000);
  CHECK(basic_reproduction_number(p, 0.01) == doctest::Approx(mean_rate * 0.01 * 4.1));
  CHECK(basic_reproduction_number(p, 0.01) == doctest::Approx(1.235).epsilon(0.001));
  CHECK(basic_reproduction_number(p, 0.012) == doctest::Approx(1.482).epsilon(0.001));
}

TEST_CASE("one step matches a hand computation") {
  SeirParams p;
  p.dampening = 0.5;
  GroupPair g;
  g[0] = {1000.0, 10.0, 20.0, 5.0};
  g[1] = {100.0, 0.0, 2.0, 0.0};
  const double l1 = 30.0 * 1015.0 / 1035.0;
  const double l2 = 35.0 * 100.0 / 102.0;
  const double beta = (l1 * 20.0 + l2 * 2.0) / (l1 * 1035.0 + l2 * 102.0);
  const double pc = 0.02;

  const StepResult r = step(g, p, pc, false);
  CHECK(r.contact_rate[0] == doctest::Approx(l1));
  CHECK(r.beta == doctest::Approx(beta));
  const double esc = std::exp(-l1 * beta * pc);
  CHECK(r.next[0].S == doctest::Approx(1000.0 * esc));
  CHECK(r.next[0].E == doctest::Approx(10.0 * std::exp(-1 / 1.9) + 1000.0 * (1 - esc)));
  CHECK(r.next[0].I == doctest::Approx(20.0 * std::exp(-1 / 4.1) + 10.0 * (1 - std::exp(-1 / 1.9))));
  CHECK(r.next[0].R == doctest::Approx(5.0 + 20.0 * (1 - std::exp(-1 / 4.1))));

  const StepResult d = step(g, p, pc, true);
  CHECK(d.contact_rate[0] == doctest::Approx(0.5 * l1));
  CHECK(d.contact_rate[1] == doctest::Approx(0.5 * l2));
}

TEST_CASE("empty workforce group has no contacts") {
  SeirParams p;
  p.population = {1000.0, 0.0};
  p.initial_infectives = {1.0, 0.0};
  const GroupPair g = initial_state(p);
  CHECK(effective_contact_rate(1, g[1], p, false) == 0.0);
  const StepResult r = step(g, p, 0.02, false);
  CHECK(r.next[1].total() == 0.0);
}

TEST_CASE("population is conserved and compartments stay nonnegative") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pr(0.005, 0.03);
  std::uniform_int_distribution<int> dd(1, 330);
  SeirParams p;
  for (int k = 0; k < 25; ++k) {
    const ContagionTuple t{pr(rng), pr(rng), dd(rng)};
    const Trajectory tr = simulate(p, t);
    const double n0 = p.total_population();
    for (const auto& day : tr.days) {
      CHECK(group_total(day.state) == doctest::Approx(n0).epsilon(1e-12));
      for (const auto& s : day.state) {
        CHECK(s.S >= 0.0);
        CHECK(s.E >= 0.0);
        CHECK(s.I >= 0.0);
        CHECK(s.R >= 0.0);
      }
    }
    CHECK(group_total(tr.final_state) == doctest::Approx(n0).epsilon(1e-12));
  }
}

TEST_CASE("susceptibles never increase") {
  SeirParams p;
  const Trajectory tr = simulate(p, {0.011, 0.013, 150});
  for (int a = 2; a <= tr.horizon(); ++a) {
    CHECK(tr.day(a).state[0].S <= tr.day(a - 1).state[0].S);
    CHECK(tr.day(a).state[1].S <= tr.day(a - 1).state[1].S);
  }
}

TEST_CASE("mortality removes infectives from the population") {
  SeirParams p;
  p.survival_fraction = 0.9;
  const Trajectory tr = simulate(p, {0.012, 0.012, 1});
  CHECK(group_total(tr.final_state) < p.total_population());
}

TEST_CASE("no initial infectives means no epidemic") {
  SeirParams p;
  p.initial_infectives = {0.0, 0.0};
  const Trajectory tr = simulate(p, {0.012, 0.013, 140});
  CHECK_FALSE(tr.declaration_day.has_value());
  CHECK(tr.final_state[0].S == doctest::Approx(p.population[0]));
}

TEST_CASE("contagion switches on the change day") {
  const ContagionTuple t{0.01, 0.02, 5};
  CHECK(t.contagion_on(4) == 0.01);
  CHECK(t.contagion_on(5) == 0.02);
  SeirParams p;
  const Trajectory tr = simulate(p, t);
  CHECK(tr.day(4).contagion == 0.01);
  CHECK(tr.day(5).contagion == 0.02);
}

TEST_CASE("declaration is the first day reaching the threshold") {
  SeirParams p;
  const Trajectory tr = simulate(p, {0.011, 0.0135, 140});
  REQUIRE(tr.declaration_day.has_value());
  const int dday = *tr.declaration_day;
  const double level = p.declaration_threshold * p.total_population();
  CHECK(tr.day(dday).new_exposed >= level);
  for (int a = 1; a < dday; ++a) CHECK(tr.day(a).new_exposed < level);
  CHECK(detect_declaration(tr, p) == tr.declaration_day);

  // Dampening is in force from the next day only.
  CHECK_FALSE(tr.day(dday).dampened);
  CHECK(tr.day(dday + 1).dampened);
}

TEST_CASE("detect_declaration on synthetic flows") {
  std::vector<DayRecord> days(5);
  const double flows[] = {1.0, 3.0, 4.0, 9.0, 2.0};
  for (int i = 0; i < 5; ++i) {
    days[static_cast<std::size_t>(i)].new_exposed = flows[i];
    days[static_cast<std::size_t>(i)].new_onset = 10.0 - flows[i];
  }
  CHECK(detect_declaration(days, 1000.0, 0.004, DeclarationFlow::kExposure) == 3);
  CHECK(detect_declaration(days, 1000.0, 0.004, DeclarationFlow::kOnset) == 1);
  CHECK_FALSE(detect_declaration(days, 1000.0, 0.01, DeclarationFlow::kExposure).has_value());
}

TEST_CASE("dampening window closes once growth slows") {
  SeirParams p;
  const Trajectory tr = simulate(p, {0.012, 0.012, 1});
  REQUIRE(tr.declaration_day.has_value());
  int closed = 0;
  for (int a = *tr.declaration_day + 1; a <= tr.horizon(); ++a) {
    if (tr.day(a - 1).dampened && !tr.day(a).dampened) ++closed;
    if (closed) CHECK_FALSE(tr.day(a).dampened);
  }
  CHECK(closed == 1);

  p.dampening_enabled = false;
  for (const auto& d : simulate(p, {0.012, 0.012, 1}).days) CHECK_FALSE(d.dampened);
}

TEST_CASE("dampening lowers the peak") {
  SeirParams on, off;
  off.dampening_enabled = false;
  auto peak = [](const Trajectory& tr) {
    double m = 0.0;
    for (const auto& d : tr.days) m = std::max(m, d.state[0].I);
    return m;
  };
  const ContagionTuple t{0.012, 0.0135, 150};
  CHECK(peak(simulate(on, t)) < peak(simulate(off, t)));
}

TEST_CASE("parameter validation lists every problem") {
  SeirParams p;
  p.dampening = 1.5;
  p.latent_period = -1.0;
  try {
    p.validate();
    FAIL("expected ModelError");
  } catch (const ModelError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("theta") != std::string::npos);
    CHECK(msg.find("latent") != std::string::npos);
  }
  CHECK_THROWS_AS(validate_tuple({0.0, 0.01, 10}, 330), ModelError);
  CHECK_THROWS_AS(validate_tuple({0.01, 1.0, 10}, 330), ModelError);
  CHECK_THROWS_AS(validate_tuple({0.01, 0.01, 0}, 330), ModelError);
  CHECK_THROWS_AS(validate_tuple({0.01, 0.01, 331}, 330), ModelError);
  CHECK_NOTHROW(validate_tuple({0.01, 0.01, 330}, 330));
}
