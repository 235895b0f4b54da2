#include "surge/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace surge {

namespace {

constexpr double kGrowthFloor = 1e-12;

double flow_of(const DayRecord& d, DeclarationFlow flow) {
  return flow == DeclarationFlow::kExposure ? d.new_exposed : d.new_onset;
}

}  // namespace

void SeirParams::validate() const {
  std::ostringstream err;
  auto check = [&err](bool ok, const char* what) {
    if (!ok) err << "  " << what << "\n";
  };
  check(base_contact_rate[0] > 0 && base_contact_rate[1] > 0, "contact rates must be > 0");
  check(latent_period > 0, "latent period must be > 0");
  check(infectious_period > 0, "infectious period must be > 0");
  check(survival_fraction >= 0 && survival_fraction <= 1, "survival fraction f must lie in [0, 1]");
  check(dampening > 0 && dampening <= 1, "dampening theta must lie in (0, 1]");
  check(population[0] >= 0 && population[1] >= 0, "group sizes must be >= 0");
  check(total_population() > 0, "total population must be > 0");
  for (int j = 0; j < 2; ++j) {
    check(initial_infectives[j] >= 0, "initial infectives must be >= 0");
    check(initial_infectives[j] <= population[j], "initial infectives cannot exceed group size");
  }
  check(declaration_threshold > 0 && declaration_threshold < 1,
        "declaration threshold must lie in (0, 1)");
  check(std::isfinite(dampening_off_threshold), "dampening-off threshold must be finite");
  check(horizon >= 1, "horizon must be >= 1 day");
  const std::string msg = err.str();
  if (!msg.empty()) throw ModelError("invalid SEIR parameters:\n" + msg);
}

void validate_tuple(const ContagionTuple& tuple, int horizon) {
  if (!(tuple.p1 > 0 && tuple.p1 < 1) || !(tuple.p2 > 0 && tuple.p2 < 1)) {
    throw ModelError("contagion probabilities must lie in (0, 1)");
  }
  if (tuple.change_day < 1 || tuple.change_day > horizon) {
    throw ModelError("change day " + std::to_string(tuple.change_day) + " outside [1, " +
                     std::to_string(horizon) + "]");
  }
}

GroupPair initial_state(const SeirParams& params) {
  GroupPair s;
  for (int j = 0; j < 2; ++j) {
    s[j].I = params.initial_infectives[j];
    s[j].S = params.population[j] - params.initial_infectives[j];
  }
  return s;
}

double contact_probability(const GroupPair& states, std::array<double, 2> rates) {
  const double weighted_pop = rates[0] * states[0].total() + rates[1] * states[1].total();
  if (!(weighted_pop > 0)) throw ModelError("degenerate population");
  const double weighted_inf = rates[0] * states[0].I + rates[1] * states[1].I;
  return weighted_inf / weighted_pop;
}

double effective_contact_rate(int group, const GroupState& state, const SeirParams& params,
                              bool dampened) {
  const double n = state.total();
  // An empty group has no contacts and carries no weight in beta.
  if (n <= 0) return 0.0;
  double rate = params.base_contact_rate[group] * state.active() / n;
  if (dampened) rate *= params.dampening;
  return rate;
}

StepResult step(const GroupPair& states, const SeirParams& params, double contagion,
                bool dampened) {
  StepResult out;
  for (int j = 0; j < 2; ++j) {
    out.contact_rate[j] = effective_contact_rate(j, states[j], params, dampened);
  }
  out.beta = contact_probability(states, out.contact_rate);

  const double stay_latent = std::exp(-params.latent_exit_rate());
  const double stay_infectious = std::exp(-params.removal_rate());
  for (int j = 0; j < 2; ++j) {
    const GroupState& s = states[j];
    const double escape = std::exp(-out.contact_rate[j] * out.beta * contagion);
    const double exposed = s.S * (1.0 - escape);
    const double onset = s.E * (1.0 - stay_latent);
    GroupState& n = out.next[j];
    n.S = s.S * escape;
    n.E = s.E * stay_latent + exposed;
    n.I = s.I * params.survival_fraction * stay_infectious + onset;
    n.R = s.R + s.I * (1.0 - stay_infectious);
    out.new_exposed += exposed;
    out.new_onset += onset;
  }
  return out;
}

std::optional<int> detect_declaration(std::span<const DayRecord> days, double total_population,
                                      double threshold, DeclarationFlow flow) {
  const double level = threshold * total_population;
  for (std::size_t a = 0; a < days.size(); ++a) {
    if (flow_of(days[a], flow) >= level) return static_cast<int>(a) + 1;
  }
  return std::nullopt;
}

std::optional<int> detect_declaration(const Trajectory& trajectory, const SeirParams& params) {
  return detect_declaration(trajectory.days, params.total_population(),
                            params.declaration_threshold, params.declaration_flow);
}

Trajectory simulate(const SeirParams& params, const ContagionTuple& tuple) {
  Trajectory traj;
  traj.tuple = tuple;
  traj.days.reserve(static_cast<std::size_t>(params.horizon));

  const double level = params.declaration_threshold * params.total_population();
  GroupPair state = initial_state(params);
  bool dampened = false;
  bool window_closed = false;

  for (int day = 1; day <= params.horizon; ++day) {
    const double p = tuple.contagion_on(day);
    StepResult r = step(state, params, p, dampened);

    DayRecord rec;
    rec.state = state;
    rec.beta = r.beta;
    rec.contact_rate = r.contact_rate;
    rec.contagion = p;
    rec.new_exposed = r.new_exposed;
    rec.new_onset = r.new_onset;
    rec.dampened = dampened;
    traj.days.push_back(rec);

    if (!traj.declaration_day) {
      const double flow =
          params.declaration_flow == DeclarationFlow::kExposure ? r.new_exposed : r.new_onset;
      if (flow >= level) {
        traj.declaration_day = day;
        // Dampening takes effect from the next step, at most once per run.
        if (params.dampening_enabled && params.dampening < 1.0) dampened = true;
      }
    } else if (dampened && !window_closed) {
      const double before = state[0].I + state[1].I;
      const double after = r.next[0].I + r.next[1].I;
      const double growth = (after - before) / std::max(before, kGrowthFloor);
      if (growth < params.dampening_off_threshold) {
        dampened = false;
        window_closed = true;
      }
    }
    state = r.next;
  }
  traj.final_state = state;
  return traj;
}

double basic_reproduction_number(const SeirParams& params, double contagion) {
  const auto& L = params.base_contact_rate;
  const auto& N = params.population;
  const double mean_rate = (L[0] * L[0] * N[0] + L[1] * L[1] * N[1]) / (L[0] * N[0] + L[1] * N[1]);
  return mean_rate * contagion * params.infectious_period;
}

}  // namespace surge
