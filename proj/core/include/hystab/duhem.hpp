#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hystab/errors.hpp"

namespace hystab {

/// Working rectangle in the (output, input) = (gamma, v) plane.
struct Rect {
    double gamma_lo = -1.0;
    double gamma_hi = 1.0;
    double v_lo = -1.0;
    double v_hi = 1.0;

    bool contains(double gamma, double v) const {
        return gamma >= gamma_lo && gamma <= gamma_hi && v >= v_lo && v <= v_hi;
    }
    double gamma_span() const { return gamma_hi - gamma_lo; }
    double v_span() const { return v_hi - v_lo; }
};

enum class ModelTag { ColemanHodgdon, Dahl, Custom };

enum class Orientation { CCW, CW, Neither };

struct ColemanHodgdonParams {
    double c_alpha = 0.0;  // > 0
    double a = 0.0;        // > 0, constant g(u) = a
    double b = 0.0;        // > 0, anhysteresis slope f(u) = b*u
};

struct DahlParams {
    double f_c = 0.0;  // Coulomb level, > 0
    double rho = 0.0;  // rest stiffness, > 0
    double r = 1.0;    // loop-shape exponent, restricted to r >= 1 (C^1 requirement)
};

/// Rate field (gamma, v) -> slope. Used for the two directional branches.
using RateField = std::function<double(double, double)>;

/// Duhem hysteresis operator: y' = f1(y,u) u'_+ + f2(y,u) u'_-.
/// Immutable after construction; all member calls are const and thread-safe.
class DuhemOperator {
public:
    static DuhemOperator coleman_hodgdon(double c_alpha, double a, double b, double y0 = 0.0);
    static DuhemOperator dahl(double f_c, double rho, double r = 1.0, double y0 = 0.0);
    static DuhemOperator custom(RateField f1, RateField f2, double y0, Rect working_rect,
                                bool restrict_domain = false);

    double f1(double gamma, double v) const;
    double f2(double gamma, double v) const;
    /// Both branch slopes at once.
    std::pair<double, double> eval_rates(double gamma, double v) const;

    double y0() const { return y0_; }
    ModelTag tag() const { return tag_; }
    const Rect& working_rect() const { return rect_; }
    double blowup_bound() const { return blowup_bound_; }
    double output_scale() const { return output_scale_; }

    const ColemanHodgdonParams& coleman_hodgdon_params() const;
    const DahlParams& dahl_params() const;

    /// Known I/O orientation. Presets carry theirs; custom operators get one
    /// only after classify() (see with_orientation).
    std::optional<Orientation> orientation() const { return orientation_; }
    DuhemOperator with_orientation(Orientation o) const;
    DuhemOperator with_y0(double y0) const;
    DuhemOperator with_rect(Rect r) const;

    /// True when the model's closed-form geometry (traversing curve,
    /// intersecting function, storage) is available.
    bool has_closed_forms() const;

private:
    DuhemOperator() = default;

    ModelTag tag_ = ModelTag::Custom;
    ColemanHodgdonParams ch_{};
    DahlParams dahl_{};
    RateField f1_, f2_;
    double y0_ = 0.0;
    Rect rect_{};
    bool restrict_domain_ = false;
    double blowup_bound_ = 1e6;
    double output_scale_ = 1.0;
    std::optional<Orientation> orientation_;
};

/// Piecewise-linear absolutely continuous input signal.
class InputSignal {
public:
    InputSignal(std::vector<double> times, std::vector<double> values);

    static InputSignal constant(double value, double t_end, double t0 = 0.0);
    static InputSignal ramp(double u0, double u1, double t_end);
    /// Periodic triangle wave of the given amplitude starting at 0.
    static InputSignal triangle(double amplitude, double period, int cycles);

    std::size_t segments() const { return times_.size() - 1; }
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    double value_at(double t) const;
    double slope(std::size_t segment) const;

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

struct ExistenceReport {
    bool satisfied = false;
    double lambda1_max = 0.0;  // sampled Lipschitz magnitude of f1 in gamma
    double lambda2_max = 0.0;  // same for f2
    struct Pair {
        double gamma1 = 0.0;
        double gamma2 = 0.0;
        double v = 0.0;
    } worst_pair;
    std::string note;
};

struct ClassifyOptions {
    int grid = 61;          // samples per axis
    double margin = 1e-6;   // epsilon in the slope conditions
};

struct ClassifyReport {
    Orientation orientation = Orientation::Neither;
    std::vector<std::string> failures;  // failing conditions with witnesses
    bool positive_rates = false;
    bool ordering_ok = false;
    bool fan_monotone = false;
    bool ccw_slopes_ok = false;
    bool cw_slopes_ok = false;
    bool fan_zero_at_origin = false;
};

struct TracePoint {
    double t;
    double y;
};

struct IntegrateOptions {
    double dt_max = 1e-3;
    /// Override for the blowup bound; 0 keeps the operator default.
    double blowup_bound = 0.0;
};

/// Both directional slopes at (gamma, v); exactly the model definition.
std::pair<double, double> eval_rates(const DuhemOperator& op, double gamma, double v);

/// Integrate the Duhem ODE along a piecewise-linear input. Steps are split at
/// every signal knot so the active branch is constant within a step; classic
/// RK4 with fixed substep <= dt_max inside each segment.
std::vector<TracePoint> integrate(const DuhemOperator& op, const InputSignal& u,
                                  const IntegrateOptions& opt = {});

/// Sampled check of the one-sided existence conditions on a rectangle.
/// Reports sampled Lipschitz-in-gamma magnitudes (always valid one-sided
/// constants); `satisfied` additionally requires the needed one-sided bound to
/// saturate between the half- and full-size gamma windows.  Sampled
/// verification, not a proof.
ExistenceReport check_existence(const DuhemOperator& op, const Rect& rect, int grid = 41);

/// Sampled CCW/CW classification on a rectangle per the sufficient conditions:
/// rate positivity, the f1/f2 ordering about the anhysteresis curve, monotone
/// f_an, and the branch slope bounds against f_an' (with margin epsilon).
/// Throws AnhysteresisDegenerate when f1 == f2 on a full grid cell.
ClassifyReport classify(const DuhemOperator& op, const Rect& rect, const ClassifyOptions& opt = {});

ClassifyReport classify(const DuhemOperator& op, const ClassifyOptions& opt = {});

const char* to_string(Orientation o);

}  // namespace hystab
