#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hystab/config.hpp"

namespace hystab {

/// One of the built-in closed-loop experiments: the four single-state toy
/// interconnections (ex_case_a .. ex_case_d) and the four mass-damper-spring
/// runs with a hysteretic actuator (vii_a_* with the CCW actuator, vii_b_*
/// with the CW one).
struct ExperimentSetup {
    std::string id;
    Interconnection ic;
    Matrix qp;                    // Q (cases a/c) or P (cases b/d)
    Certificate certificate;
    RunSpec run;
    InvariantSetDescriptor invariant;
    bool check_invariant = true;  // whether |N z| -> 0 is an asserted check
    bool check_velocity = false;  // plant velocity / position-drift checks
    nlohmann::json config;        // equivalent config file content
};

std::vector<std::string> reproduce_ids();
ExperimentSetup make_experiment(const std::string& id);

/// Convenience builders shared with the tests.
DuhemOperator ccw_actuator_operator();  // Coleman-Hodgdon, f_an(v) = 0.475 v
DuhemOperator cw_actuator_operator();   // Dahl form, rates 0.25 (1 -+ gamma)
LinearSystem mass_damper_spring();      // m = 1, b = 2, k = 1, y = x1 + u

struct CheckLine {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double tol = 0.0;
};

struct ReproOutcome {
    bool pass = false;
    std::vector<CheckLine> checks;
    Trajectory traj;
    VerifyReport cert_report;
    nlohmann::json manifest;
};

/// Runs one built-in experiment end to end: verify the certificate, simulate,
/// monitor the Lyapunov function, measure the invariant-set distance, write
/// config/trajectory/manifest under out_dir (when given).
ReproOutcome run_reproduce(const std::string& id, const std::filesystem::path& out_dir = {});

}  // namespace hystab
