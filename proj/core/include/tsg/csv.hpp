#pragma once

#include <ostream>
#include <vector>

#include "tsg/integrator.hpp"
#include "tsg/modal.hpp"
#include "tsg/statics.hpp"

namespace tsg {

// All writers print numbers with 17 significant digits so that values round-trip exactly.

// t, q_0.., qdot_0.. (free), then l, f, slack per cable
void write_trajectory_csv(std::ostream& os, const ForceModel& model, const SimulationResult& r);
// t, kinetic, gravity, cable, total
void write_energy_csv(std::ostream& os, const ForceModel& model, const SimulationResult& r);
// t, cable, status
void write_slack_events_csv(std::ostream& os, const ForceModel& model, const SimulationResult& r);
// mode, frequency_Hz, omega2
void write_frequencies_csv(std::ostream& os, const ModeSet& ms);
// mode, frequency_Hz, then the free-coordinate displacement Ň ξ̂ of each mass-normalized mode
void write_modes_csv(std::ostream& os, const LinearizedModel& lin, const ModeSet& ms);
// cable, l, mu, gamma, f
void write_rest_lengths_csv(std::ostream& os, const ForceModel& model, const VectorXd& q, const RestLengthResult& r);

}  // namespace tsg
