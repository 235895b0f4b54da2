#pragma once

// Deterministic two-group discrete-time SEIR model.
//
// Group 1 is the general population, group 2 the workforce of interest.
// Compartments are real-valued (mean-field); one simulated step is one day.
// Absolute day 1 is the first simulated day.

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace surge {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Which compartment boundary counts as "new infections" for declaration.
enum class DeclarationFlow {
  kExposure,  // S -> E
  kOnset,     // E -> I
};

struct SeirParams {
  std::array<double, 2> base_contact_rate{30.0, 35.0};  // Lambda_j, contacts/day
  double latent_period = 1.9;                           // 1/mu_E, days
  double infectious_period = 4.1;                       // 1/mu_RR, days
  double survival_fraction = 1.0;                       // f
  double dampening = 0.7;                               // theta
  bool dampening_enabled = true;
  std::array<double, 2> population{900000.0, 20000.0};  // N_j
  std::array<double, 2> initial_infectives{5.0, 0.0};   // I0_j
  double declaration_threshold = 0.004;   // fraction of N1+N2 per day
  DeclarationFlow declaration_flow = DeclarationFlow::kExposure;
  double dampening_off_threshold = 0.02;  // daily infective growth rate
  int horizon = 330;                      // T, days

  double latent_exit_rate() const { return 1.0 / latent_period; }
  double removal_rate() const { return 1.0 / infectious_period; }
  double total_population() const { return population[0] + population[1]; }

  /// Throws ModelError listing every violated invariant.
  void validate() const;
};

struct GroupState {
  double S = 0.0;
  double E = 0.0;
  double I = 0.0;
  double R = 0.0;

  double total() const { return S + E + I + R; }
  /// Individuals who are not infectious (S + E + R); the mixing pool.
  double active() const { return S + E + R; }
};

using GroupPair = std::array<GroupState, 2>;

/// Adversary's choice: p1 before change day d, p2 from day d on.
struct ContagionTuple {
  double p1 = 0.0;
  double p2 = 0.0;
  int change_day = 1;

  double contagion_on(int day) const { return day < change_day ? p1 : p2; }

  auto operator<=>(const ContagionTuple&) const = default;
};

/// Throws ModelError if the tuple violates 0 < p < 1 or 1 <= d <= horizon.
void validate_tuple(const ContagionTuple& tuple, int horizon);

struct DayRecord {
  GroupPair state;  // at the start of the day, before the step
  double beta = 0.0;
  std::array<double, 2> contact_rate{};  // lambda^j_t, dampening applied
  double contagion = 0.0;                // p_t
  double new_exposed = 0.0;              // S -> E flow, both groups
  double new_onset = 0.0;                // E -> I flow, both groups
  bool dampened = false;
};

struct Trajectory {
  ContagionTuple tuple;
  std::vector<DayRecord> days;  // days[a - 1] is absolute day a
  GroupPair final_state;        // after the last step
  std::optional<int> declaration_day;

  const DayRecord& day(int absolute_day) const { return days.at(absolute_day - 1); }
  int horizon() const { return static_cast<int>(days.size()); }
};

GroupPair initial_state(const SeirParams& params);

/// beta_t = (l1 I1 + l2 I2) / (l1 N1 + l2 N2), shared by both groups.
double contact_probability(const GroupPair& states, std::array<double, 2> rates);

/// lambda^j_t = Lambda_j (S+E+R)/N, times theta while dampened.
double effective_contact_rate(int group, const GroupState& state,
                              const SeirParams& params, bool dampened);

struct StepResult {
  GroupPair next;
  double beta = 0.0;
  std::array<double, 2> contact_rate{};
  double new_exposed = 0.0;
  double new_onset = 0.0;
};

/// One day of the two-group system. Rates and beta come from the pre-step
/// state; all compartments update simultaneously.
StepResult step(const GroupPair& states, const SeirParams& params, double contagion,
                bool dampened);

/// First day whose new-infection count reaches threshold * (N1 + N2).
std::optional<int> detect_declaration(std::span<const DayRecord> days, double total_population,
                                      double threshold, DeclarationFlow flow);
std::optional<int> detect_declaration(const Trajectory& trajectory, const SeirParams& params);

Trajectory simulate(const SeirParams& params, const ContagionTuple& tuple);

/// ((L1^2 N1 + L2^2 N2) / (L1 N1 + L2 N2)) * p / mu_RR.
double basic_reproduction_number(const SeirParams& params, double contagion);

}  // namespace surge
