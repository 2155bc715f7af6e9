#pragma once

#include <vector>

#include "hystab/certify.hpp"
#include "hystab/duhem.hpp"
#include "hystab/geometry.hpp"

namespace hystab {

/// Feedback interconnection u = sign * y_phi, u_phi = y between a linear
/// system and a Duhem operator.
struct Interconnection {
    LinearSystem sys;
    DuhemOperator op;
    int sign = -1;  // +1 positive feedback, -1 negative feedback
    FeedbackCase fb = FeedbackCase::B;

    /// Checks case/sign/orientation consistency (a, d positive; b, c negative;
    /// a, b need a CCW operator; c, d a CW one).
    void validate() const;

    Interconnection(LinearSystem s, DuhemOperator o, int sgn, FeedbackCase f)
        : sys(std::move(s)), op(std::move(o)), sign(sgn), fb(f) {}
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> x;  // state row per sample
    std::vector<double> u;               // sign * y_phi
    std::vector<double> y;               // Cx + D u
    std::vector<double> y_phi;
    std::vector<double> h_cl;            // filled by lyapunov_monitor
    std::vector<double> invariant_dist;  // filled by invariant_distance
    /// Every accepted integration step used a branch consistent with the
    /// resolved u_phi derivative sign at its start.
    bool branch_audit_ok = true;
    /// Accepted floor-size steps where the branch flipped mid-step (turning
    /// points resolved at dt/64 granularity).
    std::size_t floor_flips = 0;

    std::size_t size() const { return times.size(); }
};

struct SimulateOptions {
    double dt = 1e-3;
    int output_every = 10;      // samples every this many base steps
    int max_bisect = 6;         // step floor dt / 2^max_bisect
    double blowup_scale = 1e6;  // state blowup guard: |x| > scale * (1 + |x0|)
};

Trajectory simulate_closed_loop(const Interconnection& ic, const std::vector<double>& x0,
                                double t_end, const SimulateOptions& opt = {});

struct MonitorResult {
    std::vector<double> h_cl;
    double max_increment = 0.0;
    double tol = 0.0;  // 1e-6 * (1 + max |H_cl|)
    bool pass = false;
};

/// Evaluates the case-appropriate closed-loop Lyapunov function at every
/// trajectory sample. `qp` is Q for cases (a)/(c) and P for (b)/(d);
/// `verified` must be a passing report for that certificate.
MonitorResult lyapunov_monitor(const Trajectory& traj, const Interconnection& ic,
                               const Matrix& qp, const VerifyReport& verified,
                               const GeomOptions& gopt = {});

struct DistanceResult {
    std::vector<double> series;  // |N [x; y_phi]| per sample
    double final_max = 0.0;      // max over the last 10% of samples
    double tol_conv = 1e-3;
    bool converged = false;
};

DistanceResult invariant_distance(const Trajectory& traj, const InvariantSetDescriptor& n,
                                  double tol_conv = 1e-3);

}  // namespace hystab
