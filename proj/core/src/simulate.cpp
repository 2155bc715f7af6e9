#include "hystab/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace hystab {

void Interconnection::validate() const {
    sys.validate();
    bool positive = (fb == FeedbackCase::A || fb == FeedbackCase::D);
    if (sign != (positive ? +1 : -1))
        throw ShapeError("feedback sign inconsistent with the interconnection case");
    auto o = op.orientation();
    bool needs_ccw = (fb == FeedbackCase::A || fb == FeedbackCase::B);
    if (!o || *o != (needs_ccw ? Orientation::CCW : Orientation::CW))
        throw ShapeError(std::string("case ") + to_string(fb) + " requires a " +
                         (needs_ccw ? "CCW" : "CW") + " operator");
}

namespace {

struct LoopState {
    std::vector<double> x;
    double yp = 0.0;
};

// One closed-loop stepper; resolves the derivative loop and the active branch.
class Stepper {
public:
    Stepper(const Interconnection& ic, const SimulateOptions& opt)
        : ic_(ic), n_(ic.sys.order()), opt_(opt) {}

    // Consistent branch at a state: +1 (f1), -1 (f2), 0 (frozen / turning).
    int resolve_branch(const LoopState& z) const {
        double cx = cxdot(z);
        if (ic_.sys.D == 0.0) return cx > 0 ? +1 : (cx < 0 ? -1 : 0);
        double u1 = resolved_updot(z, +1, cx);
        double u2 = resolved_updot(z, -1, cx);
        bool c1 = u1 > 0, c2 = u2 < 0;
        if (c1 && !c2) return +1;
        if (c2 && !c1) return -1;
        return 0;  // both or neither consistent: y_phi frozen for this step
    }

    // Advances by h with the branch frozen; bisects when the branch flips
    // mid-step, down to a floor of h_base / 2^max_bisect.
    void advance(LoopState& z, double h, double floor, Trajectory& audit) const {
        int branch = resolve_branch(z);
        LoopState trial = rk4(z, h, branch);
        if (resolve_branch(trial) != branch && h > floor * (1.0 + 1e-12)) {
            advance(z, 0.5 * h, floor, audit);
            advance(z, 0.5 * h, floor, audit);
            return;
        }
        if (resolve_branch(trial) != branch) ++audit.floor_flips;
        z = trial;
    }

    double uphi(const LoopState& z) const {
        double cx = 0.0;
        for (std::size_t i = 0; i < n_; ++i) cx += ic_.sys.C(0, i) * z.x[i];
        return cx + ic_.sys.D * ic_.sign * z.yp;
    }

private:
    double cxdot(const LoopState& z) const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            double xd = ic_.sign * ic_.sys.B(i, 0) * z.yp;
            for (std::size_t j = 0; j < n_; ++j) xd += ic_.sys.A(i, j) * z.x[j];
            s += ic_.sys.C(0, i) * xd;
        }
        return s;
    }

    double rate(const LoopState& z, int branch) const {
        double v = uphi(z);
        return branch > 0 ? ic_.op.f1(z.yp, v) : ic_.op.f2(z.yp, v);
    }

    double resolved_updot(const LoopState& z, int branch, double cx) const {
        double f = rate(z, branch);
        double denom = 1.0 - ic_.sign * ic_.sys.D * f;
        if (std::abs(denom) < 1e-9)
            throw AlgebraicLoopSingular("derivative loop |1 - s D f_i| < 1e-9");
        return cx / denom;
    }

    void rhs(const LoopState& z, int branch, std::vector<double>& dx, double& dyp) const {
        for (std::size_t i = 0; i < n_; ++i) {
            double xd = ic_.sign * ic_.sys.B(i, 0) * z.yp;
            for (std::size_t j = 0; j < n_; ++j) xd += ic_.sys.A(i, j) * z.x[j];
            dx[i] = xd;
        }
        if (branch == 0) {
            dyp = 0.0;
            return;
        }
        double cx = 0.0;
        for (std::size_t i = 0; i < n_; ++i) cx += ic_.sys.C(0, i) * dx[i];
        double f = rate(z, branch);
        double denom = 1.0 - ic_.sign * ic_.sys.D * f;
        if (std::abs(denom) < 1e-9)
            throw AlgebraicLoopSingular("derivative loop |1 - s D f_i| < 1e-9");
        dyp = f * cx / denom;
    }

    LoopState rk4(const LoopState& z, double h, int branch) const {
        std::vector<double> k1x(n_), k2x(n_), k3x(n_), k4x(n_);
        double k1y, k2y, k3y, k4y;
        LoopState tmp = z;
        rhs(z, branch, k1x, k1y);
        axpy(tmp, z, k1x, k1y, 0.5 * h);
        rhs(tmp, branch, k2x, k2y);
        axpy(tmp, z, k2x, k2y, 0.5 * h);
        rhs(tmp, branch, k3x, k3y);
        axpy(tmp, z, k3x, k3y, h);
        rhs(tmp, branch, k4x, k4y);
        LoopState out = z;
        for (std::size_t i = 0; i < n_; ++i)
            out.x[i] += h / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
        out.yp += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
        return out;
    }

    static void axpy(LoopState& out, const LoopState& z, const std::vector<double>& dx,
                     double dyp, double h) {
        for (std::size_t i = 0; i < z.x.size(); ++i) out.x[i] = z.x[i] + h * dx[i];
        out.yp = z.yp + h * dyp;
    }

    const Interconnection& ic_;
    std::size_t n_;
    SimulateOptions opt_;
};

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

Trajectory simulate_closed_loop(const Interconnection& ic, const std::vector<double>& x0,
                                double t_end, const SimulateOptions& opt) {
    ic.validate();
    if (x0.size() != ic.sys.order()) throw ShapeError("x0 dimension mismatch");
    if (!(opt.dt > 0)) throw ShapeError("simulate requires dt > 0");

    Stepper stepper(ic, opt);
    LoopState z{x0, ic.op.y0()};
    const double floor = opt.dt / std::pow(2.0, opt.max_bisect);
    const double x_guard = opt.blowup_scale * (1.0 + norm(x0));

    Trajectory traj;
    auto emit = [&](double t) {
        traj.times.push_back(t);
        traj.x.push_back(z.x);
        traj.y_phi.push_back(z.yp);
        traj.u.push_back(ic.sign * z.yp);
        traj.y.push_back(stepper.uphi(z));
    };
    emit(0.0);

    const long steps = std::lround(t_end / opt.dt);
    for (long k = 0; k < steps; ++k) {
        stepper.advance(z, opt.dt, floor, traj);
        if (!std::isfinite(z.yp) || std::abs(z.yp) > ic.op.blowup_bound() ||
            norm(z.x) > x_guard)
            throw BlowupError("closed-loop state exceeded blowup bound");
        if ((k + 1) % opt.output_every == 0 || k + 1 == steps) emit((k + 1) * opt.dt);
    }
    return traj;
}

MonitorResult lyapunov_monitor(const Trajectory& traj, const Interconnection& ic,
                               const Matrix& qp, const VerifyReport& verified,
                               const GeomOptions& gopt) {
    if (!verified.pass())
        throw UnverifiedCertificate("lyapunov_monitor requires a verified certificate");
    ic.validate();
    const std::size_t n = ic.sys.order();
    const bool extended = (ic.fb == FeedbackCase::B || ic.fb == FeedbackCase::D);
    if (qp.rows() != (extended ? n + 1 : n)) throw ShapeError("certificate matrix size mismatch");

    StorageEvaluator eval(ic.op, gopt);
    MonitorResult res;
    res.h_cl.reserve(traj.size());

    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& x = traj.x[k];
        double yp = traj.y_phi[k];
        double cx = 0.0;
        for (std::size_t i = 0; i < n; ++i) cx += ic.sys.C(0, i) * x[i];
        double h = 0.0;
        switch (ic.fb) {
            case FeedbackCase::A:
                h = 0.5 * quadratic_form(qp, x) + eval.storage_ccw(yp, cx).value - cx * yp;
                break;
            case FeedbackCase::B: {
                double uph = cx - ic.sys.D * yp;
                std::vector<double> z(n + 1);
                z[0] = -yp;
                std::copy(x.begin(), x.end(), z.begin() + 1);
                h = eval.storage_ccw(yp, uph).value + 0.5 * quadratic_form(qp, z);
                break;
            }
            case FeedbackCase::C:
                h = 0.5 * quadratic_form(qp, x) + eval.storage_cw(yp, cx).value;
                break;
            case FeedbackCase::D: {
                double yv = cx + ic.sys.D * yp;
                std::vector<double> z(n + 1);
                z[0] = yp;
                std::copy(x.begin(), x.end(), z.begin() + 1);
                h = eval.storage_cw(yp, yv).value + 0.5 * quadratic_form(qp, z) - yv * yp;
                break;
            }
        }
        res.h_cl.push_back(h);
    }

    double hmax = 0.0;
    for (double h : res.h_cl) hmax = std::max(hmax, std::abs(h));
    double inc = 0.0;
    for (std::size_t k = 1; k < res.h_cl.size(); ++k)
        inc = std::max(inc, res.h_cl[k] - res.h_cl[k - 1]);
    res.max_increment = inc;
    res.tol = 1e-6 * (1.0 + hmax);
    res.pass = inc <= res.tol;
    return res;
}

DistanceResult invariant_distance(const Trajectory& traj, const InvariantSetDescriptor& n,
                                  double tol_conv) {
    DistanceResult res;
    res.tol_conv = tol_conv;
    if (traj.size() == 0) return res;
    const std::size_t dim = n.N.cols();
    if (traj.x.front().size() + 1 != dim)
        throw ShapeError("invariant set descriptor dimension mismatch");
    res.series.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        double s = n.N(0, dim - 1) * traj.y_phi[k];
        for (std::size_t i = 0; i + 1 < dim; ++i) s += n.N(0, i) * traj.x[k][i];
        res.series.push_back(std::abs(s));
    }
    std::size_t start = traj.size() - std::max<std::size_t>(1, traj.size() / 10);
    res.final_max = *std::max_element(res.series.begin() + start, res.series.end());
    res.converged = res.final_max <= tol_conv;
    return res;
}

}  // namespace hystab
