#include "hystab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hystab {

namespace {

// ---------------------------------------------------------------------------
// Closed forms, Coleman-Hodgdon with f(u) = b u, g(u) = a (requires b > a).

struct ChForms {
    double ca, a, b;
    explicit ChForms(const ColemanHodgdonParams& p) : ca(p.c_alpha), a(p.a), b(p.b) {}

    double fan(double v) const { return b * v; }
    double omega(double sigma, double g, double v) const {
        if (sigma >= v)
            return b * sigma + (a - b) / ca + (g - b * v + (b - a) / ca) * std::exp(-ca * (sigma - v));
        return b * sigma + (b - a) / ca + (g - b * v + (a - b) / ca) * std::exp(ca * (sigma - v));
    }
    double omega_big(double g, double v) const {
        double q = (b - a) / ca;
        return v - std::log(q / (g - b * v + q)) / ca;
    }
    double omega_small(double g, double v) const {
        double q = (a - b) / ca;
        return v + std::log(q / (g - b * v + q)) / ca;
    }
    double intersect(double g, double v) const {
        return g >= fan(v) ? omega_big(g, v) : omega_small(g, v);
    }
    double storage(double g, double v) const {
        double us = intersect(g, v);
        if (g >= fan(v))
            return v * g - 0.5 * b * v * v + (a - b) / ca * (us - v) +
                   (g - b * v + (b - a) / ca) / ca * (1.0 - std::exp(ca * (v - us)));
        return v * g - 0.5 * b * v * v + (b - a) / ca * (us - v) +
               (g - b * v + (a - b) / ca) / ca * (std::exp(ca * (us - v)) - 1.0);
    }
};

// Dahl with r = 1.

struct DahlForms {
    double fc, rho;
    explicit DahlForms(const DahlParams& p) : fc(p.f_c), rho(p.rho) {}

    double omega(double sigma, double g, double v) const {
        if (sigma >= v) return fc + (g - fc) * std::exp(rho / fc * (v - sigma));
        return -fc + (g + fc) * std::exp(rho / fc * (sigma - v));
    }
    double intersect(double g, double v) const {
        if (g >= 0) return v + fc / rho * std::log(fc / (g + fc));
        return v - fc / rho * std::log(-fc / (g - fc));
    }
    double storage(double g, double v) const {
        double us = intersect(g, v);
        if (g >= 0)
            return -fc * (v - us) + fc / rho * (g + fc) * (1.0 - std::exp(rho / fc * (us - v)));
        return fc * (v - us) + fc / rho * (g - fc) * (std::exp(rho / fc * (v - us)) - 1.0);
    }
};

// ---------------------------------------------------------------------------
// Generic traversing curve: RK4 nodes with cubic Hermite dense output,
// extended on demand in either direction from the anchor.

struct CurveNode {
    double sigma, z, d;
};

class GenericCurve {
public:
    GenericCurve(const DuhemOperator& op, double gamma0, double v0, double h, double blowup)
        : op_(&op), v0_(v0), h_(h), blowup_(blowup) {
        right_.push_back({v0, gamma0, op.f1(gamma0, v0)});
        left_.push_back({v0, gamma0, op.f2(gamma0, v0)});
    }

    double eval(double sigma) {
        if (sigma >= v0_) {
            while (sigma > right_.back().sigma) step(right_, +1);
            return locate(right_, sigma);
        }
        while (sigma < left_.back().sigma) step(left_, -1);
        return locate(left_, sigma);
    }

private:
    // Nodes ordered by distance from the anchor; the derivative field is the
    // branch rate of that side (f1 rightward, f2 leftward).
    double locate(const std::vector<CurveNode>& nodes, double sigma) const {
        auto cmp = [&](const CurveNode& n, double s) {
            return std::abs(n.sigma - v0_) < std::abs(s - v0_);
        };
        auto it = std::lower_bound(nodes.begin(), nodes.end(), sigma, cmp);
        if (it == nodes.begin()) return it->z;
        if (it == nodes.end()) return nodes.back().z;
        return hermite(*(it - 1), *it, sigma);
    }

    static double hermite(const CurveNode& a, const CurveNode& b, double s) {
        double h = b.sigma - a.sigma;
        if (h == 0.0) return a.z;
        double t = (s - a.sigma) / h;
        double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * a.z + (t3 - 2 * t2 + t) * h * a.d +
               (-2 * t3 + 3 * t2) * b.z + (t3 - t2) * h * b.d;
    }

    void step(std::vector<CurveNode>& nodes, int dir) {
        const CurveNode& n = nodes.back();
        auto f = [&](double s, double z) { return dir > 0 ? op_->f1(z, s) : op_->f2(z, s); };
        double h = dir * h_;
        double k1 = f(n.sigma, n.z);
        double k2 = f(n.sigma + 0.5 * h, n.z + 0.5 * h * k1);
        double k3 = f(n.sigma + 0.5 * h, n.z + 0.5 * h * k2);
        double k4 = f(n.sigma + h, n.z + h * k3);
        double z = n.z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        double s = n.sigma + h;
        if (!std::isfinite(z) || std::abs(z) > blowup_)
            throw BlowupError("traversing curve exceeded blowup bound");
        nodes.push_back({s, z, f(s, z)});
    }

    const DuhemOperator* op_;
    double v0_;
    double h_;
    double blowup_;
    std::vector<CurveNode> right_;  // anchor outward, ascending sigma
    std::vector<CurveNode> left_;   // anchor outward, descending sigma
};

// Adaptive Simpson on a signed interval, absolute tolerance.
template <class F>
double simpson_rec(F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double integrate_simpson(F f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    return sign * simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

// ---------------------------------------------------------------------------
// StorageEvaluator

struct StorageEvaluator::Impl {
    mutable std::map<std::pair<double, double>, std::unique_ptr<GenericCurve>> curves;

    GenericCurve& curve(const DuhemOperator& op, const GeomOptions& opt, double g0, double v0) const {
        auto key = std::make_pair(g0, v0);
        auto it = curves.find(key);
        if (it == curves.end()) {
            it = curves
                     .emplace(key, std::make_unique<GenericCurve>(op, g0, v0, opt.traversing_step,
                                                                  op.blowup_bound()))
                     .first;
        }
        return *it->second;
    }
};

StorageEvaluator::StorageEvaluator(const DuhemOperator& op, GeomOptions opt)
    : op_(&op), opt_(opt), impl_(std::make_unique<Impl>()) {}
StorageEvaluator::~StorageEvaluator() = default;
StorageEvaluator::StorageEvaluator(StorageEvaluator&&) noexcept = default;
StorageEvaluator& StorageEvaluator::operator=(StorageEvaluator&&) noexcept = default;

namespace {

bool use_closed(const DuhemOperator& op, const GeomOptions& opt) {
    switch (opt.route) {
        case Route::Closed:
            if (!op.has_closed_forms())
                throw ShapeError("closed-form route requested for a model without closed forms");
            return true;
        case Route::Generic: return false;
        default: return op.has_closed_forms();
    }
}

void require_orientation(const DuhemOperator& op, Orientation want, const char* what) {
    if (op.orientation() != want)
        throw Error(std::string(what) + " requires an operator classified " + to_string(want) +
                    "; classify it (or declare the orientation) first");
}

}  // namespace

double StorageEvaluator::anhysteresis(double v) const {
    if (use_closed(*op_, opt_)) {
        if (op_->tag() == ModelTag::ColemanHodgdon) return ChForms(op_->coleman_hodgdon_params()).fan(v);
        return 0.0;  // Dahl
    }
    const Rect& r = op_->working_rect();
    auto d = [&](double g) { return op_->f1(g, v) - op_->f2(g, v); };
    const int scan = 257;
    const double center = 0.5 * (r.gamma_lo + r.gamma_hi);
    // The curve can leave the declared gamma range for v outside the window;
    // widen the scan geometrically (restricted custom domains stop at level 0
    // via DomainError).
    for (int level = 0; level < 16; ++level) {
        double half = 0.5 * r.gamma_span() * std::pow(2.0, level);
        double glo = center - half;
        double prev_g = glo, prev_d;
        try {
            prev_d = d(prev_g);
        } catch (const DomainError&) {
            break;
        }
        for (int i = 1; i < scan; ++i) {
            double g = glo + 2.0 * half * i / (scan - 1);
            double cur;
            try {
                cur = d(g);
            } catch (const DomainError&) {
                break;
            }
            if (prev_d == 0.0) return prev_g;
            if (prev_d * cur <= 0.0) {
                double lo = prev_g, hi = g, dlo = prev_d;
                for (int it = 0; it < 200; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (hi - lo <= opt_.tol_root * (1.0 + std::abs(mid))) return mid;
                    double dm = d(mid);
                    if (dm == 0.0) return mid;
                    if (dlo * dm < 0.0) {
                        hi = mid;
                    } else {
                        lo = mid;
                        dlo = dm;
                    }
                }
                return 0.5 * (lo + hi);
            }
            prev_g = g;
            prev_d = cur;
        }
    }
    std::ostringstream os;
    os << "f1 - f2 has no sign change in gamma range at v=" << v;
    throw NoRootError(os.str());
}

double StorageEvaluator::traversing(double gamma0, double v0, double v) const {
    if (use_closed(*op_, opt_)) {
        if (op_->tag() == ModelTag::ColemanHodgdon)
            return ChForms(op_->coleman_hodgdon_params()).omega(v, gamma0, v0);
        return DahlForms(op_->dahl_params()).omega(v, gamma0, v0);
    }
    return impl_->curve(*op_, opt_, gamma0, v0).eval(v);
}

namespace {

// Bracketed bisection for the intersecting functions. g must be nonnegative at
// sigma0 and the search proceeds in the given direction until g < 0.
template <class G>
double intersect_bisect(G g, double sigma0, double dir, const GeomOptions& opt,
                        const char* label) {
    double g0 = g(sigma0);
    if (g0 == 0.0) return sigma0;
    double step = 0.5 * (1.0 + std::abs(sigma0) * 0.1);
    double lo = sigma0, hi = sigma0;
    double glo = g0;
    bool bracketed = false;
    for (int k = 0; k < opt.max_bracket_expansions; ++k) {
        double cand = sigma0 + dir * step;
        double gc = g(cand);
        if (gc == 0.0) return cand;
        if (glo * gc < 0.0) {
            hi = cand;
            bracketed = true;
            break;
        }
        lo = cand;
        glo = gc;
        step *= 2.0;
    }
    if (!bracketed)
        throw NoIntersectError(std::string(label) +
                               ": bracket expansion exhausted without a sign change");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (std::abs(hi - lo) <= opt.tol_root * (1.0 + std::abs(mid))) return mid;
        double gm = g(mid);
        if (gm == 0.0) return mid;
        if (glo * gm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double StorageEvaluator::intersect_ccw(double gamma, double v) const {
    require_orientation(*op_, Orientation::CCW, "intersect_ccw");
    if (use_closed(*op_, opt_)) return ChForms(op_->coleman_hodgdon_params()).intersect(gamma, v);
    double fan_v = anhysteresis(v);
    double dir = gamma >= fan_v ? +1.0 : -1.0;
    auto g = [&](double s) {
        double w = traversing(gamma, v, s);
        double diff = w - anhysteresis(s);
        return gamma >= fan_v ? diff : -diff;
    };
    return intersect_bisect(g, v, dir, opt_, "intersect_ccw");
}

double StorageEvaluator::intersect_cw(double gamma, double v) const {
    require_orientation(*op_, Orientation::CW, "intersect_cw");
    if (use_closed(*op_, opt_)) return DahlForms(op_->dahl_params()).intersect(gamma, v);
    double fan_v = anhysteresis(v);
    double dir = gamma >= fan_v ? -1.0 : +1.0;
    auto g = [&](double s) {
        double w = traversing(gamma, v, s);
        double diff = w - anhysteresis(s);
        return gamma >= fan_v ? diff : -diff;
    };
    return intersect_bisect(g, v, dir, opt_, "intersect_cw");
}

StorageValue StorageEvaluator::storage_ccw(double gamma, double v) const {
    require_orientation(*op_, Orientation::CCW, "storage_ccw");
    StorageValue out;
    out.branch = gamma >= anhysteresis(v) ? StorageBranch::Above : StorageBranch::Below;
    if (use_closed(*op_, opt_)) {
        ChForms ch(op_->coleman_hodgdon_params());
        out.intersect_point = ch.intersect(gamma, v);
        out.value = ch.storage(gamma, v);
        return out;
    }
    double omega_star = intersect_ccw(gamma, v);
    out.intersect_point = omega_star;
    auto w = [&](double s) { return traversing(gamma, v, s); };
    double i1 = integrate_simpson(w, 0.0, v, opt_.quad_tol);
    auto wf = [&](double s) { return traversing(gamma, v, s) - anhysteresis(s); };
    double i2 = integrate_simpson(wf, 0.0, omega_star, opt_.quad_tol);
    out.value = gamma * v - i1 + i2;
    return out;
}

StorageValue StorageEvaluator::storage_cw(double gamma, double v) const {
    require_orientation(*op_, Orientation::CW, "storage_cw");
    double fan0 = anhysteresis(0.0);
    if (std::abs(fan0) > 1e-9 * (1.0 + op_->output_scale()))
        throw Error("storage_cw requires f_an(0) = 0");
    StorageValue out;
    out.branch = gamma >= anhysteresis(v) ? StorageBranch::Above : StorageBranch::Below;
    if (use_closed(*op_, opt_)) {
        DahlForms dl(op_->dahl_params());
        out.intersect_point = dl.intersect(gamma, v);
        out.value = dl.storage(gamma, v);
        return out;
    }
    double lambda_star = intersect_cw(gamma, v);
    out.intersect_point = lambda_star;
    auto fa = [&](double s) { return anhysteresis(s); };
    double i1 = integrate_simpson(fa, 0.0, lambda_star, opt_.quad_tol);
    auto w = [&](double s) { return traversing(gamma, v, s); };
    double i2 = integrate_simpson(w, v, lambda_star, opt_.quad_tol);
    out.value = i1 - i2;
    return out;
}

// ---------------------------------------------------------------------------
// One-shot wrappers

double anhysteresis(const DuhemOperator& op, double v, const GeomOptions& opt) {
    return StorageEvaluator(op, opt).anhysteresis(v);
}
double traversing(const DuhemOperator& op, double gamma0, double v0, double v,
                  const GeomOptions& opt) {
    return StorageEvaluator(op, opt).traversing(gamma0, v0, v);
}
double intersect_ccw(const DuhemOperator& op, double gamma, double v, const GeomOptions& opt) {
    return StorageEvaluator(op, opt).intersect_ccw(gamma, v);
}
double intersect_cw(const DuhemOperator& op, double gamma, double v, const GeomOptions& opt) {
    return StorageEvaluator(op, opt).intersect_cw(gamma, v);
}
StorageValue storage_ccw(const DuhemOperator& op, double gamma, double v, const GeomOptions& opt) {
    return StorageEvaluator(op, opt).storage_ccw(gamma, v);
}
StorageValue storage_cw(const DuhemOperator& op, double gamma, double v, const GeomOptions& opt) {
    return StorageEvaluator(op, opt).storage_cw(gamma, v);
}

// ---------------------------------------------------------------------------
// Dissipation inequality check

DissipationReport dissipation_check(const DuhemOperator& op, const InputSignal& u,
                                    Orientation mode, const IntegrateOptions& iopt,
                                    const GeomOptions& gopt) {
    if (mode != Orientation::CCW && mode != Orientation::CW)
        throw ShapeError("dissipation_check mode must be CCW or CW");
    require_orientation(op, mode, "dissipation_check");
    if (!(iopt.dt_max > 0)) throw ShapeError("dissipation_check requires dt_max > 0");
    const double bound = iopt.blowup_bound > 0 ? iopt.blowup_bound : op.blowup_bound();

    StorageEvaluator eval(op, gopt);
    auto storage = [&](double g, double v) {
        return mode == Orientation::CCW ? eval.storage_ccw(g, v).value
                                        : eval.storage_cw(g, v).value;
    };

    DissipationReport rep;
    double y = op.y0();
    double q = 0.0;  // running supply integral
    double h_prev = storage(y, u.value_at(u.t_begin()));

    for (std::size_t seg = 0; seg < u.segments(); ++seg) {
        const double t0 = u.times()[seg];
        const double t1 = u.times()[seg + 1];
        const double u0 = u.values()[seg];
        const double s = u.slope(seg);
        const int nsub = std::max(1, static_cast<int>(std::ceil((t1 - t0) / iopt.dt_max)));
        const double h = (t1 - t0) / nsub;
        for (int k = 0; k < nsub; ++k) {
            const double ta = t0 + k * h;
            double q_new = q;
            double y_new = y;
            if (s != 0.0) {
                // State (y, q): q' = ydot*u (CCW) or y*udot (CW).
                auto rate = [&](double t, double z) {
                    double v = u0 + s * (t - t0);
                    return (s > 0 ? op.f1(z, v) : op.f2(z, v)) * s;
                };
                auto qrate = [&](double t, double z, double zdot) {
                    double v = u0 + s * (t - t0);
                    return mode == Orientation::CCW ? zdot * v : z * s;
                };
                double k1 = rate(ta, y), q1 = qrate(ta, y, k1);
                double k2 = rate(ta + 0.5 * h, y + 0.5 * h * k1), q2 = qrate(ta + 0.5 * h, y + 0.5 * h * k1, k2);
                double k3 = rate(ta + 0.5 * h, y + 0.5 * h * k2), q3 = qrate(ta + 0.5 * h, y + 0.5 * h * k2, k3);
                double k4 = rate(ta + h, y + h * k3), q4 = qrate(ta + h, y + h * k3, k4);
                y_new = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
                q_new = q + h / 6.0 * (q1 + 2 * q2 + 2 * q3 + q4);
                if (!std::isfinite(y_new) || std::abs(y_new) > bound)
                    throw BlowupError("dissipation_check: output exceeded blowup bound");
            }
            double h_new = storage(y_new, u0 + s * (ta + h - t0));
            double viol = ((h_new - h_prev) - (q_new - q)) / h;
            rep.max_violation = std::max(rep.max_violation, viol);
            ++rep.steps;
            y = y_new;
            q = q_new;
            h_prev = h_new;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Radial unboundedness probe

RadialProbeReport radial_probe(const DuhemOperator& op, double v,
                               const std::vector<double>& gamma_list, const GeomOptions& opt) {
    StorageEvaluator eval(op, opt);
    const bool ccw = op.orientation() == Orientation::CCW;
    const double fan_v = eval.anhysteresis(v);

    RadialProbeReport rep;
    rep.h_values.reserve(gamma_list.size());
    std::vector<std::pair<double, double>> above, below;  // (distance, H)
    for (double g : gamma_list) {
        double h = ccw ? eval.storage_ccw(g, v).value : eval.storage_cw(g, v).value;
        rep.h_values.push_back(h);
        double d = g - fan_v;
        if (d >= 0)
            above.emplace_back(d, h);
        else
            below.emplace_back(-d, h);
    }
    auto tail_increases = [&](std::vector<std::pair<double, double>>& side, const char* name) {
        if (side.size() < 2) return true;
        std::sort(side.begin(), side.end());
        // Find the point past which H strictly increases all the way out.
        std::size_t start = side.size() - 1;
        while (start > 0 && side[start].second > side[start - 1].second) --start;
        bool ok = start + 1 < side.size() || side.size() == 1;
        if (!ok) {
            std::ostringstream os;
            os << "H not increasing at outermost probes on the " << name << " side (v=" << v << ")";
            rep.witness = os.str();
        }
        return ok;
    };
    bool a_ok = tail_increases(above, "upper");
    bool b_ok = tail_increases(below, "lower");
    rep.monotone = a_ok && b_ok;
    return rep;
}

}  // namespace hystab
