#include "hystab/duhem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hystab {

namespace {

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

std::string point_str(double gamma, double v) {
    std::ostringstream os;
    os << "(gamma=" << gamma << ", v=" << v << ")";
    return os.str();
}

}  // namespace

const char* to_string(Orientation o) {
    switch (o) {
        case Orientation::CCW: return "CCW";
        case Orientation::CW: return "CW";
        default: return "Neither";
    }
}

DuhemOperator DuhemOperator::coleman_hodgdon(double c_alpha, double a, double b, double y0) {
    if (c_alpha <= 0 || a <= 0 || b <= 0)
        throw ShapeError("coleman_hodgdon requires c_alpha, a, b > 0");
    DuhemOperator op;
    op.tag_ = ModelTag::ColemanHodgdon;
    op.ch_ = {c_alpha, a, b};
    op.y0_ = y0;
    // Default window: the largest centered rectangle on which both rate
    // fields stay nonnegative (|gamma - b v| <= a/c_alpha must hold at the
    // corners), capped at |v| <= 10.
    double v_hw = std::min(10.0, 0.5 * a / (b * c_alpha));
    double g_hw = a / c_alpha - b * v_hw;
    op.rect_ = {-g_hw, g_hw, -v_hw, v_hw};
    op.output_scale_ = std::max(1.0, b * v_hw + a / c_alpha);
    op.blowup_bound_ = 1e6 * op.output_scale_;
    op.orientation_ = (b > a) ? std::optional<Orientation>(Orientation::CCW) : std::nullopt;
    return op;
}

DuhemOperator DuhemOperator::dahl(double f_c, double rho, double r, double y0) {
    if (f_c <= 0 || rho <= 0) throw ShapeError("dahl requires f_c, rho > 0");
    if (r < 1.0)
        throw ShapeError("dahl preset restricted to r >= 1: the rate fields are not C^1 at "
                         "gamma = +/-f_c for r < 1");
    DuhemOperator op;
    op.tag_ = ModelTag::Dahl;
    op.dahl_ = {f_c, rho, r};
    op.y0_ = y0;
    // The rates vanish at gamma = +/-f_c; keep the classification window
    // strictly inside so the CW slope margin survives.
    double v_hw = 10.0 * std::max(1.0, f_c);
    op.rect_ = {-0.9 * f_c, 0.9 * f_c, -v_hw, v_hw};
    op.output_scale_ = f_c;
    op.blowup_bound_ = 1e6 * f_c;
    op.orientation_ = Orientation::CW;
    return op;
}

DuhemOperator DuhemOperator::custom(RateField f1, RateField f2, double y0, Rect rect,
                                    bool restrict_domain) {
    if (!f1 || !f2) throw ShapeError("custom operator requires both rate fields");
    if (rect.gamma_span() <= 0 || rect.v_span() <= 0)
        throw ShapeError("custom operator requires a nonempty working rectangle");
    DuhemOperator op;
    op.tag_ = ModelTag::Custom;
    op.f1_ = std::move(f1);
    op.f2_ = std::move(f2);
    op.y0_ = y0;
    op.rect_ = rect;
    op.restrict_domain_ = restrict_domain;
    op.output_scale_ = std::max(std::abs(rect.gamma_lo), std::abs(rect.gamma_hi));
    if (op.output_scale_ <= 0) op.output_scale_ = 1.0;
    op.blowup_bound_ = 1e6 * op.output_scale_;
    return op;
}

double DuhemOperator::f1(double gamma, double v) const {
    switch (tag_) {
        case ModelTag::ColemanHodgdon:
            return ch_.c_alpha * (ch_.b * v - gamma) + ch_.a;
        case ModelTag::Dahl: {
            double w = 1.0 - gamma / dahl_.f_c;
            return dahl_.rho * std::pow(std::abs(w), dahl_.r) * sgn(w);
        }
        default:
            if (restrict_domain_ && !rect_.contains(gamma, v))
                throw DomainError("rate field evaluated outside working rectangle at " +
                                  point_str(gamma, v));
            return f1_(gamma, v);
    }
}

double DuhemOperator::f2(double gamma, double v) const {
    switch (tag_) {
        case ModelTag::ColemanHodgdon:
            return -ch_.c_alpha * (ch_.b * v - gamma) + ch_.a;
        case ModelTag::Dahl: {
            double w = 1.0 + gamma / dahl_.f_c;
            return dahl_.rho * std::pow(std::abs(w), dahl_.r) * sgn(w);
        }
        default:
            if (restrict_domain_ && !rect_.contains(gamma, v))
                throw DomainError("rate field evaluated outside working rectangle at " +
                                  point_str(gamma, v));
            return f2_(gamma, v);
    }
}

std::pair<double, double> DuhemOperator::eval_rates(double gamma, double v) const {
    return {f1(gamma, v), f2(gamma, v)};
}

const ColemanHodgdonParams& DuhemOperator::coleman_hodgdon_params() const {
    if (tag_ != ModelTag::ColemanHodgdon)
        throw ShapeError("not a Coleman-Hodgdon operator");
    return ch_;
}

const DahlParams& DuhemOperator::dahl_params() const {
    if (tag_ != ModelTag::Dahl) throw ShapeError("not a Dahl operator");
    return dahl_;
}

DuhemOperator DuhemOperator::with_orientation(Orientation o) const {
    DuhemOperator op = *this;
    op.orientation_ = o;
    return op;
}

DuhemOperator DuhemOperator::with_y0(double y0) const {
    DuhemOperator op = *this;
    op.y0_ = y0;
    return op;
}

DuhemOperator DuhemOperator::with_rect(Rect r) const {
    DuhemOperator op = *this;
    op.rect_ = r;
    return op;
}

bool DuhemOperator::has_closed_forms() const {
    if (tag_ == ModelTag::ColemanHodgdon) return ch_.b > ch_.a;
    if (tag_ == ModelTag::Dahl) return dahl_.r == 1.0;
    return false;
}

std::pair<double, double> eval_rates(const DuhemOperator& op, double gamma, double v) {
    return op.eval_rates(gamma, v);
}

// ---------------------------------------------------------------------------
// InputSignal

InputSignal::InputSignal(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() < 2 || times_.size() != values_.size())
        throw ShapeError("InputSignal needs at least two (t, u) samples");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw ShapeError("InputSignal times must be strictly increasing");
}

InputSignal InputSignal::constant(double value, double t_end, double t0) {
    return InputSignal({t0, t_end}, {value, value});
}

InputSignal InputSignal::ramp(double u0, double u1, double t_end) {
    return InputSignal({0.0, t_end}, {u0, u1});
}

InputSignal InputSignal::triangle(double amplitude, double period, int cycles) {
    std::vector<double> t, u;
    t.push_back(0.0);
    u.push_back(0.0);
    for (int c = 0; c < cycles; ++c) {
        double base = c * period;
        t.push_back(base + 0.25 * period);
        u.push_back(amplitude);
        t.push_back(base + 0.75 * period);
        u.push_back(-amplitude);
        t.push_back(base + period);
        u.push_back(0.0);
    }
    return InputSignal(std::move(t), std::move(u));
}

double InputSignal::value_at(double t) const {
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    double w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    return values_[k] + w * (values_[k + 1] - values_[k]);
}

double InputSignal::slope(std::size_t k) const {
    return (values_[k + 1] - values_[k]) / (times_[k + 1] - times_[k]);
}

// ---------------------------------------------------------------------------
// Integration

std::vector<TracePoint> integrate(const DuhemOperator& op, const InputSignal& u,
                                  const IntegrateOptions& opt) {
    if (!(opt.dt_max > 0)) throw ShapeError("integrate requires dt_max > 0");
    const double bound = opt.blowup_bound > 0 ? opt.blowup_bound : op.blowup_bound();

    std::vector<TracePoint> trace;
    double y = op.y0();
    trace.push_back({u.t_begin(), y});

    for (std::size_t seg = 0; seg < u.segments(); ++seg) {
        const double t0 = u.times()[seg];
        const double t1 = u.times()[seg + 1];
        const double u0 = u.values()[seg];
        const double s = u.slope(seg);
        const int nsub = std::max(1, static_cast<int>(std::ceil((t1 - t0) / opt.dt_max)));
        const double h = (t1 - t0) / nsub;

        for (int k = 0; k < nsub; ++k) {
            const double ta = t0 + k * h;
            if (s == 0.0) {
                trace.push_back({ta + h, y});
                continue;
            }
            // Branch is fixed by the (constant) slope sign on this segment.
            auto rate = [&](double t, double z) {
                double v = u0 + s * (t - t0);
                return (s > 0 ? op.f1(z, v) : op.f2(z, v)) * s;
            };
            double k1 = rate(ta, y);
            double k2 = rate(ta + 0.5 * h, y + 0.5 * h * k1);
            double k3 = rate(ta + 0.5 * h, y + 0.5 * h * k2);
            double k4 = rate(ta + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!std::isfinite(y) || std::abs(y) > bound)
                throw BlowupError("hysteresis output exceeded blowup bound during integration");
            trace.push_back({ta + h, y});
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Existence check

ExistenceReport check_existence(const DuhemOperator& op, const Rect& rect, int grid) {
    if (grid < 2) throw ShapeError("check_existence requires grid >= 2");
    ExistenceReport rep;

    const double gc = 0.5 * (rect.gamma_lo + rect.gamma_hi);
    const double ghw = 0.5 * rect.gamma_span();

    // One-sided constants needed on a centered sub-window of half width w.
    auto needed_on = [&](double w, ExistenceReport::Pair* worst, double* lip1, double* lip2) {
        double need1 = 0.0, need2 = 0.0, l1 = 0.0, l2 = 0.0;
        for (int iv = 0; iv < grid; ++iv) {
            double v = rect.v_lo + rect.v_span() * iv / (grid - 1);
            std::vector<double> gs(grid), r1(grid), r2(grid);
            for (int ig = 0; ig < grid; ++ig) {
                gs[ig] = gc - w + 2.0 * w * ig / (grid - 1);
                r1[ig] = op.f1(gs[ig], v);
                r2[ig] = op.f2(gs[ig], v);
            }
            for (int i = 0; i < grid; ++i)
                for (int j = i + 1; j < grid; ++j) {
                    double dg = gs[i] - gs[j];
                    double s1 = (r1[i] - r1[j]) / dg;
                    double s2 = (r2[i] - r2[j]) / dg;
                    l1 = std::max(l1, std::abs(s1));
                    l2 = std::max(l2, std::abs(s2));
                    double n1 = std::max(0.0, s1);   // f1 needs an upper one-sided bound
                    double n2 = std::max(0.0, -s2);  // f2 needs a lower one-sided bound
                    if (std::max(n1, n2) > std::max(need1, need2) && worst)
                        *worst = {gs[i], gs[j], v};
                    need1 = std::max(need1, n1);
                    need2 = std::max(need2, n2);
                }
        }
        if (lip1) *lip1 = l1;
        if (lip2) *lip2 = l2;
        return std::pair<double, double>{need1, need2};
    };

    ExistenceReport::Pair worst_full{gc, gc, rect.v_lo};
    auto [need1_full, need2_full] = needed_on(ghw, &worst_full, &rep.lambda1_max, &rep.lambda2_max);
    auto [need1_half, need2_half] = needed_on(0.5 * ghw, nullptr, nullptr, nullptr);

    auto saturates = [](double full, double half) {
        return full <= 1.25 * half + 1e-9 * (1.0 + half);
    };
    rep.satisfied = saturates(need1_full, need1_half) && saturates(need2_full, need2_half);
    rep.worst_pair = worst_full;
    rep.note = rep.satisfied
                   ? "sampled one-sided bounds saturate on nested windows (not a proof)"
                   : "sampled one-sided bound keeps growing with the window";
    return rep;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

// Root of f1 - f2 in gamma at fixed v, bisected from a grid sign change.
std::optional<double> fan_root(const DuhemOperator& op, const Rect& rect, double v, int grid) {
    auto d = [&](double g) { return op.f1(g, v) - op.f2(g, v); };
    double prev_g = rect.gamma_lo;
    double prev_d = d(prev_g);
    for (int i = 1; i < grid; ++i) {
        double g = rect.gamma_lo + rect.gamma_span() * i / (grid - 1);
        double cur = d(g);
        if (prev_d == 0.0) return prev_g;
        if (prev_d * cur <= 0.0) {
            double lo = prev_g, hi = g, dlo = prev_d;
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                double dm = d(mid);
                if (dm == 0.0 || hi - lo < 1e-14 * (1.0 + std::abs(mid))) return mid;
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
    return std::nullopt;
}

}  // namespace

ClassifyReport classify(const DuhemOperator& op, const Rect& rect, const ClassifyOptions& opt) {
    const int n = std::max(3, opt.grid);
    ClassifyReport rep;

    std::vector<double> gs(n), vs(n);
    for (int i = 0; i < n; ++i) {
        gs[i] = rect.gamma_lo + rect.gamma_span() * i / (n - 1);
        vs[i] = rect.v_lo + rect.v_span() * i / (n - 1);
    }
    std::vector<std::vector<double>> F1(n, std::vector<double>(n)), F2 = F1;
    double scale = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            F1[i][j] = op.f1(gs[i], vs[j]);
            F2[i][j] = op.f2(gs[i], vs[j]);
            scale = std::max({scale, std::abs(F1[i][j]), std::abs(F2[i][j])});
        }
    if (scale == 0.0) scale = 1.0;

    // Degenerate anhysteresis: f1 == f2 across a whole grid cell.
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            double m = std::max({std::abs(F1[i][j] - F2[i][j]), std::abs(F1[i + 1][j] - F2[i + 1][j]),
                                 std::abs(F1[i][j + 1] - F2[i][j + 1]),
                                 std::abs(F1[i + 1][j + 1] - F2[i + 1][j + 1])});
            if (m <= 1e-12 * scale)
                throw AnhysteresisDegenerate("f1 == f2 on a grid cell near " +
                                             point_str(gs[i], vs[j]));
        }

    // Anhysteresis curve per v column.
    std::vector<double> fan(n);
    for (int j = 0; j < n; ++j) {
        auto root = fan_root(op, rect, vs[j], n);
        if (!root) {
            rep.failures.push_back("no anhysteresis root in gamma range at v=" +
                                   std::to_string(vs[j]));
            rep.orientation = Orientation::Neither;
            return rep;
        }
        fan[j] = *root;
    }

    const double tol = 1e-10 * scale;

    rep.positive_rates = true;
    rep.ordering_ok = true;
    for (int j = 0; j < n && (rep.positive_rates || rep.ordering_ok); ++j)
        for (int i = 0; i < n; ++i) {
            if (F1[i][j] < -tol || F2[i][j] < -tol) {
                if (rep.positive_rates)
                    rep.failures.push_back("negative rate at " + point_str(gs[i], vs[j]));
                rep.positive_rates = false;
            }
            bool below = gs[i] <= fan[j];
            if (below ? (F1[i][j] < F2[i][j] - tol) : (F1[i][j] >= F2[i][j] + tol)) {
                if (rep.ordering_ok)
                    rep.failures.push_back("f1/f2 ordering violated at " + point_str(gs[i], vs[j]));
                rep.ordering_ok = false;
            }
        }

    rep.fan_monotone = true;
    for (int j = 1; j < n; ++j)
        if (fan[j] < fan[j - 1] - 1e-10 * (1.0 + rect.gamma_span())) {
            rep.failures.push_back("f_an not monotone increasing near v=" + std::to_string(vs[j]));
            rep.fan_monotone = false;
            break;
        }

    // f_an slope by central differences on the sampled curve.
    std::vector<double> fan_slope(n);
    for (int j = 0; j < n; ++j) {
        int a = std::max(0, j - 1), b = std::min(n - 1, j + 1);
        fan_slope[j] = (fan[b] - fan[a]) / (vs[b] - vs[a]);
    }

    const double gtol = 1e-12 * (1.0 + rect.gamma_span());
    rep.ccw_slopes_ok = true;
    rep.cw_slopes_ok = true;
    std::string ccw_fail, cw_fail;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            bool above = gs[i] > fan[j] + gtol;
            bool below = gs[i] < fan[j] - gtol;
            double lim_ccw = fan_slope[j] - opt.margin;
            double lim_cw = fan_slope[j] + opt.margin;
            if (above) {
                if (!(F1[i][j] < lim_ccw) && rep.ccw_slopes_ok) {
                    rep.ccw_slopes_ok = false;
                    ccw_fail = "f1 >= f_an' - eps above curve at " + point_str(gs[i], vs[j]);
                }
                if (!(F1[i][j] > lim_cw) && rep.cw_slopes_ok) {
                    rep.cw_slopes_ok = false;
                    cw_fail = "f1 <= f_an' + eps above curve at " + point_str(gs[i], vs[j]);
                }
            } else if (below) {
                if (!(F2[i][j] < lim_ccw) && rep.ccw_slopes_ok) {
                    rep.ccw_slopes_ok = false;
                    ccw_fail = "f2 >= f_an' - eps below curve at " + point_str(gs[i], vs[j]);
                }
                if (!(F2[i][j] > lim_cw) && rep.cw_slopes_ok) {
                    rep.cw_slopes_ok = false;
                    cw_fail = "f2 <= f_an' + eps below curve at " + point_str(gs[i], vs[j]);
                }
            }
        }

    rep.fan_zero_at_origin = false;
    if (rect.v_lo <= 0.0 && rect.v_hi >= 0.0) {
        auto root0 = fan_root(op, rect, 0.0, n);
        rep.fan_zero_at_origin =
            root0 && std::abs(*root0) <= 1e-9 * (1.0 + rect.gamma_span());
    }

    bool common = rep.positive_rates && rep.ordering_ok && rep.fan_monotone;
    if (common && rep.ccw_slopes_ok) {
        rep.orientation = Orientation::CCW;
    } else if (common && rep.cw_slopes_ok && rep.fan_zero_at_origin) {
        rep.orientation = Orientation::CW;
    } else {
        rep.orientation = Orientation::Neither;
        if (!rep.ccw_slopes_ok) rep.failures.push_back(ccw_fail);
        if (!rep.cw_slopes_ok) rep.failures.push_back(cw_fail);
        if (!rep.fan_zero_at_origin) rep.failures.push_back("f_an(0) != 0 or v=0 not in range");
    }
    return rep;
}

ClassifyReport classify(const DuhemOperator& op, const ClassifyOptions& opt) {
    return classify(op, op.working_rect(), opt);
}

}  // namespace hystab
