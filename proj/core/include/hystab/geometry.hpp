#pragma once

#include <map>
#include <memory>
#include <vector>

#include "hystab/duhem.hpp"

namespace hystab {

/// Which evaluation path to use for the geometric objects.
///  - Closed: the model's explicit formulas (presets only).
///  - Generic: RK4 traversing curves + bracketed bisection + adaptive Simpson.
///  - Auto: Closed when available, Generic otherwise.
/// Generic never consults the closed forms, so the two routes can be used as
/// independent cross-checks.
enum class Route { Auto, Closed, Generic };

struct GeomOptions {
    Route route = Route::Auto;
    double tol_root = 1e-10;        // bisection tolerance (f_an, Omega, Lambda)
    double quad_tol = 1e-9;         // absolute tolerance per integral term
    int max_bracket_expansions = 60;
    double traversing_step = 1e-2;  // RK4 step along sigma for generic curves
};

enum class StorageBranch { Above, Below };

struct StorageValue {
    double value = 0.0;
    double intersect_point = 0.0;  // Omega (CCW) or Lambda (CW)
    StorageBranch branch = StorageBranch::Above;
};

struct DissipationReport {
    double max_violation = 0.0;  // max over steps of (dH - supply)/dt
    std::size_t steps = 0;
};

struct RadialProbeReport {
    bool monotone = false;
    std::vector<double> h_values;  // aligned with the probed gamma list
    std::string witness;
};

/// Evaluates the geometric objects of one operator with per-anchor caching of
/// generic traversing curves. A single evaluator is not meant to be shared
/// across threads; separate evaluators never share state.
class StorageEvaluator {
public:
    explicit StorageEvaluator(const DuhemOperator& op, GeomOptions opt = {});
    ~StorageEvaluator();
    StorageEvaluator(StorageEvaluator&&) noexcept;
    StorageEvaluator& operator=(StorageEvaluator&&) noexcept;

    const DuhemOperator& op() const { return *op_; }
    const GeomOptions& options() const { return opt_; }

    /// gamma with f1(gamma, v) = f2(gamma, v).
    double anhysteresis(double v) const;
    /// omega_Phi(v; gamma0, v0): f1-solution rightward, f2-solution leftward.
    double traversing(double gamma0, double v0, double v) const;
    /// Omega(gamma, v): traversing curve meets f_an with Omega >= v iff gamma >= f_an(v).
    double intersect_ccw(double gamma, double v) const;
    /// Lambda(gamma, v): meets f_an with Lambda <= v iff gamma >= f_an(v).
    double intersect_cw(double gamma, double v) const;

    StorageValue storage_ccw(double gamma, double v) const;
    StorageValue storage_cw(double gamma, double v) const;

private:
    struct Impl;
    const DuhemOperator* op_;
    GeomOptions opt_;
    std::unique_ptr<Impl> impl_;
};

// Convenience one-shot wrappers (no cache reuse across calls).
double anhysteresis(const DuhemOperator& op, double v, const GeomOptions& opt = {});
double traversing(const DuhemOperator& op, double gamma0, double v0, double v,
                  const GeomOptions& opt = {});
double intersect_ccw(const DuhemOperator& op, double gamma, double v, const GeomOptions& opt = {});
double intersect_cw(const DuhemOperator& op, double gamma, double v, const GeomOptions& opt = {});
StorageValue storage_ccw(const DuhemOperator& op, double gamma, double v,
                         const GeomOptions& opt = {});
StorageValue storage_cw(const DuhemOperator& op, double gamma, double v,
                        const GeomOptions& opt = {});

/// Integrates the operator along u and checks the dissipation inequality
/// dH <= supply, where the supply is ydot*u for CCW and y*udot for CW.
/// The supply integral is carried as an extra RK4 state so the residual is
/// quadrature-consistent with the trajectory itself.
DissipationReport dissipation_check(const DuhemOperator& op, const InputSignal& u,
                                    Orientation mode, const IntegrateOptions& iopt = {},
                                    const GeomOptions& gopt = {});

/// Probes H along a list of gammas at fixed v; reports whether the values
/// eventually strictly increase with |gamma - f_an(v)| on each side.
RadialProbeReport radial_probe(const DuhemOperator& op, double v,
                               const std::vector<double>& gamma_list,
                               const GeomOptions& opt = {});

}  // namespace hystab
