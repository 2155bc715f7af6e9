// Acceptance suite: runs every top-level reproduction criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion (plus per-item detail
// lines). Exit code 0 only when all criteria pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "hystab/experiments.hpp"
#include "hystab/geometry.hpp"

using namespace hystab;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void line(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%-58s %s  %s\n", name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

LinearSystem toy_ac() {
    LinearSystem s;
    s.A = {{-1}};
    s.B = {{1}};
    s.C = {{1}};
    s.D = 0;
    return s;
}

LinearSystem toy_bd() {
    LinearSystem s;
    s.A = {{-3}};
    s.B = {{1}};
    s.C = {{-2}};
    s.D = 1;
    return s;
}

// --------------------------------------------------------------------------
// 1. Certificate suite: the six reference certificates verify with every
//    equality residual <= 1e-9 (1 + ||P||_F) and every semidefinite check
//    within 1e-8 scaled.  Runtime < 1 s.

void criterion_1() {
    Timer t;
    bool all = true;
    auto fan = [](double v) { return 0.475 * v; };

    CertificateCwCcw b_toy{Matrix{{1, -2}, {-2, 6}}, Matrix{{1, -3}}, 2.0};
    VerifyReport rb = verify_cw_ccw(toy_bd(), b_toy);
    line("  1(i)   toy case b: P = [[1,-2],[-2,6]]", rb.pass(),
         fmt("worst residual %.3e", rb.worst_residual()));
    all = all && rb.pass();

    CertificateCcwCcw a_toy{Matrix{{1}}, 0.5};
    VerifyReport ra = verify_ccw_ccw(toy_ac(), a_toy, fan, {-10, 10});
    line("  1(ii)  toy case a: Q = 1, xi = 0.5", ra.pass(),
         fmt("worst residual %.3e", ra.worst_residual()));
    all = all && ra.pass();

    CertificateCcwCw c_toy{Matrix{{1}}};
    VerifyReport rc = verify_ccw_cw(toy_ac(), c_toy);
    line("  1(iii) toy case c: Q = 1", rc.pass(),
         fmt("worst residual %.3e", rc.worst_residual()));
    all = all && rc.pass();

    auto d_op = DuhemOperator::dahl(1.0, 0.125);
    CertificateCwCw d_toy{Matrix{{1, -2}, {-2, 6}}, Matrix{{1, -3}}, 2.0, 0.5};
    VerifyReport rd = verify_cw_cw(toy_bd(), d_toy, d_op, d_op.working_rect());
    line("  1(iv)  toy case d: P, L=[1,-3], delta=2, eta=1/2", rd.pass(),
         fmt("worst residual %.3e", rd.worst_residual()));
    all = all && rd.pass();

    auto sa = make_experiment("vii_a_negative");
    VerifyReport r5 = verify_cw_ccw(sa.ic.sys, std::get<CertificateCwCcw>(sa.certificate));
    line("  1(v)   mds 5x5 P with L=[0,0,1/4,0,0] (delta=1e-3)", r5.pass(),
         fmt("worst residual %.3e", r5.worst_residual()));
    all = all && r5.pass();

    auto sq = make_experiment("vii_a_positive");
    VerifyReport r5q = verify_ccw_ccw(sq.ic.sys, std::get<CertificateCcwCcw>(sq.certificate),
                                      fan, {-20, 20});
    line("  1(v)   mds 4x4 Q with xi = 0.5", r5q.pass(),
         fmt("worst residual %.3e", r5q.worst_residual()));
    all = all && r5q.pass();

    auto sc = make_experiment("vii_b_negative");
    VerifyReport r6 = verify_ccw_cw(sc.ic.sys, std::get<CertificateCcwCw>(sc.certificate));
    line("  1(vi)  mds 4x4 P (case c)", r6.pass(),
         fmt("worst residual %.3e", r6.worst_residual()));
    all = all && r6.pass();

    auto sd = make_experiment("vii_b_positive");
    auto d_cert = std::get<CertificateCwCw>(sd.certificate);
    VerifyReport r6d = verify_cw_cw(sd.ic.sys, d_cert, sd.ic.op, sd.ic.op.working_rect());
    line("  1(vi)  mds 5x5 P, L=[0,1/4,0,0,0], eta=0.5 (delta=1e-6)", r6d.pass(),
         fmt("worst residual %.3e (flagged rate bound)", r6d.worst_residual()));
    all = all && r6d.pass();
    std::printf("         note: the same gains at the stated delta = 1 cannot verify;\n"
                "         that check lives in acceptance_expected_defects.\n");

    bool timed = t.seconds() < 1.0;
    line("criterion 1: certificate suite", all && timed, fmt("%.2f s", t.seconds()));
}

// --------------------------------------------------------------------------
// 2. Dissipation inequalities over 100 seeded random piecewise-linear inputs
//    per model, dt = 1e-3, normalized violation <= 1e-6.  Runtime < 30 s.

void criterion_2() {
    Timer t;
    double worst_ccw = 0.0, worst_cw = 0.0;
    for (int model = 0; model < 2; ++model) {
        DuhemOperator op = model == 0 ? DuhemOperator::coleman_hodgdon(1e-2, 2.5e-3, 5e-3)
                                      : DuhemOperator::dahl(0.75, 1.5);
        Orientation mode = model == 0 ? Orientation::CCW : Orientation::CW;
        double amp = model == 0 ? 15.0 : 2.5;
        std::mt19937_64 rng(2024 + model);
        std::uniform_real_distribution<double> ud(-amp, amp);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> ts, us;
            for (int k = 0; k < 8; ++k) {
                ts.push_back(0.5 * k);
                us.push_back(k == 0 ? 0.0 : ud(rng));
            }
            auto rep = dissipation_check(op, InputSignal(ts, us), mode, {1e-3, 0});
            (model == 0 ? worst_ccw : worst_cw) =
                std::max(model == 0 ? worst_ccw : worst_cw, rep.max_violation);
        }
    }
    bool pass = worst_ccw <= 1e-6 && worst_cw <= 1e-6 && t.seconds() < 30.0;
    line("criterion 2: dissipation inequalities (100 inputs each)", pass,
         fmt("max violation ccw %.2e / cw %.2e", worst_ccw, worst_cw) +
             fmt(", %.1f s", t.seconds()));
}

// --------------------------------------------------------------------------
// 3. Closed forms vs the generic quadrature/root-finding route on 20x20
//    grids, 1e-6 relative, plus the two frozen spot values.  Runtime < 10 s.

void criterion_3() {
    Timer t;
    GeomOptions gen;
    gen.route = Route::Generic;

    auto ch = DuhemOperator::coleman_hodgdon(1e-2, 2.5e-3, 5e-3);
    StorageEvaluator ch_closed(ch), ch_generic(ch, gen);
    double worst = 0.0;
    const Rect& r = ch.working_rect();
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            double g = r.gamma_lo + r.gamma_span() * i / 19.0;
            double v = r.v_lo + r.v_span() * j / 19.0;
            double oc = ch_closed.intersect_ccw(g, v);
            double og = ch_generic.intersect_ccw(g, v);
            worst = std::max(worst, std::abs(oc - og) / (1.0 + std::abs(oc)));
            double hc = ch_closed.storage_ccw(g, v).value;
            double hg = ch_generic.storage_ccw(g, v).value;
            worst = std::max(worst, std::abs(hc - hg) / (1.0 + std::abs(hc)));
        }

    auto dl = DuhemOperator::dahl(0.75, 1.5);
    StorageEvaluator dl_closed(dl), dl_generic(dl, gen);
    const Rect& rd = dl.working_rect();
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            double g = rd.gamma_lo + rd.gamma_span() * i / 19.0;
            double v = rd.v_lo + rd.v_span() * j / 19.0;
            double lc = dl_closed.intersect_cw(g, v);
            double lg = dl_generic.intersect_cw(g, v);
            worst = std::max(worst, std::abs(lc - lg) / (1.0 + std::abs(lc)));
            double hc = dl_closed.storage_cw(g, v).value;
            double hg = dl_generic.storage_cw(g, v).value;
            worst = std::max(worst, std::abs(hc - hg) / (1.0 + std::abs(hc)));
        }

    double omega_spot = ch_closed.intersect_ccw(0.1, 0.0);
    double lambda_spot = dl_closed.intersect_cw(0.5, 0.0);
    bool spots = std::abs(omega_spot - 33.6472) <= 5e-5 &&
                 std::abs(omega_spot - 100.0 * std::log(1.4)) <= 1e-10 &&
                 std::abs(lambda_spot + 0.255413) <= 5e-7 &&
                 std::abs(lambda_spot - 0.5 * std::log(0.6)) <= 1e-12;

    bool pass = worst <= 1e-6 && spots && t.seconds() < 10.0;
    line("criterion 3: closed forms vs generic oracle (20x20)", pass,
         fmt("worst rel dev %.2e", worst) +
             fmt(", Omega %.4f", omega_spot) + fmt(", Lambda %.6f", lambda_spot) +
             fmt(", %.1f s", t.seconds()));
}

// --------------------------------------------------------------------------
// 4. The four mass-damper-spring runs: |velocity(T)| <= 1e-3, position drift
//    over the last 10% <= 1e-3, H_cl max increment <= 1e-6 scaled.  < 60 s.

void criterion_4() {
    Timer t;
    bool all = true;
    for (const char* id :
         {"vii_a_negative", "vii_a_positive", "vii_b_negative", "vii_b_positive"}) {
        ReproOutcome out = run_reproduce(id);
        double vel = 0, drift = 0, hinc = 0, htol = 0;
        bool vp = false, dp = false, hp = false;
        for (const auto& c : out.checks) {
            if (c.name == "velocity_converged") {
                vel = c.value;
                vp = c.pass;
            } else if (c.name == "position_drift") {
                drift = c.value;
                dp = c.pass;
            } else if (c.name == "h_cl_monotone") {
                hinc = c.value;
                htol = c.tol;
                hp = c.pass;
            }
        }
        bool pass = vp && dp && hp;
        line(std::string("  4: ") + id, pass,
             fmt("|vel| %.2e, drift %.2e", vel, drift) +
                 fmt(", dH max %.2e (tol %.2e)", hinc, htol));
        all = all && pass;
    }
    bool timed = t.seconds() < 60.0;
    line("criterion 4: closed-loop convergence (4 runs)", all && timed,
         fmt("%.1f s", t.seconds()));
}

// --------------------------------------------------------------------------
// 5. Toy invariant sets, distances from the certificate-derived rows N:
//    case b |y_phi + 3x|, case a |y_phi - x|, case c |CAx - CB y_phi| =
//    |x + y_phi| (the row N = [CA, -CB]; the loop's equilibria satisfy
//    x = -y_phi, so the x = y_phi reading fails by construction and is kept
//    in acceptance_expected_defects), case d |y_phi - 3x|.  All <= 1e-3.

void criterion_5() {
    Timer t;
    bool all = true;
    const char* ids[4] = {"ex_case_a", "ex_case_b", "ex_case_c", "ex_case_d"};
    const char* sets[4] = {"|y_phi - x|", "|y_phi + 3x|", "|x + y_phi|", "|y_phi - 3x|"};
    for (int k = 0; k < 4; ++k) {
        ReproOutcome out = run_reproduce(ids[k]);
        double dist = 0;
        bool pass = false;
        for (const auto& c : out.checks)
            if (c.name == "invariant_convergence") {
                dist = c.value;
                pass = c.pass;
            }
        line(std::string("  5: ") + ids[k] + " -> " + sets[k], pass,
             fmt("final distance %.2e", dist));
        all = all && pass;
    }
    line("criterion 5: toy invariant sets", all, fmt("%.1f s", t.seconds()));
}

// --------------------------------------------------------------------------
// 6. Rate independence under the t -> t^2 reparameterization, <= 1e-6.

void criterion_6() {
    Timer t;
    double worst = 0.0;
    for (int model = 0; model < 2; ++model) {
        DuhemOperator op = model == 0 ? DuhemOperator::coleman_hodgdon(1e-2, 2.5e-3, 5e-3)
                                      : DuhemOperator::dahl(0.75, 1.5);
        auto u = InputSignal::triangle(model == 0 ? 3.0 : 1.5, 2.0, 2);
        double tend = u.t_end();
        std::vector<double> t2, u2;
        for (std::size_t k = 0; k < u.times().size(); ++k) {
            t2.push_back(std::sqrt(tend * u.times()[k]));
            u2.push_back(u.values()[k]);
        }
        auto a = integrate(op, u, {1e-3, 0});
        auto b = integrate(op, InputSignal(t2, u2), {1e-3, 0});
        for (std::size_t k = 1; k < u.times().size(); ++k) {
            double ya = 0, yb = 0;
            for (const auto& p : a)
                if (std::abs(p.t - u.times()[k]) < 1e-12) ya = p.y;
            for (const auto& p : b)
                if (std::abs(p.t - t2[k]) < 1e-12) yb = p.y;
            worst = std::max(worst, std::abs(ya - yb));
        }
    }
    line("criterion 6: rate independence (t -> t^2)", worst <= 1e-6,
         fmt("max path deviation %.2e, %.1f s", worst, t.seconds()));
}

// --------------------------------------------------------------------------
// 7. Radial unboundedness probes at v in {-1, 0, 1} for both presets.

void criterion_7() {
    Timer t;
    bool all = true;
    auto ch = DuhemOperator::coleman_hodgdon(1e-2, 2.5e-3, 5e-3);
    auto dl = DuhemOperator::dahl(0.75, 1.5);
    for (double v : {-1.0, 0.0, 1.0}) {
        all = all && radial_probe(ch, v, {-4, -2, -1, -0.5, 0.5, 1, 2, 4}).monotone;
        all = all &&
              radial_probe(dl, v, {-0.7, -0.5, -0.3, -0.1, 0.1, 0.3, 0.5, 0.7}).monotone;
    }
    line("criterion 7: radial unboundedness probes", all, fmt("%.1f s", t.seconds()));
}

// --------------------------------------------------------------------------
// 8. Step-halving order check on a smooth segment: difference ratio >= 12.

void criterion_8() {
    Timer t;
    auto op = DuhemOperator::coleman_hodgdon(1.0, 0.3, 0.475);
    auto final_y = [&](double dt) {
        return integrate(op, InputSignal::ramp(0.0, 5.0, 5.0), {dt, 0}).back().y;
    };
    double d1 = std::abs(final_y(0.1) - final_y(0.05));
    double d2 = std::abs(final_y(0.05) - final_y(0.025));
    double ratio = d1 / d2;
    line("criterion 8: RK4 step-halving order", ratio >= 12.0,
         fmt("difference ratio %.1f (>= 12 expected)", ratio));
}

}  // namespace

int main() {
    std::printf("acceptance suite\n================\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    std::printf("================\n%s (%d failing line%s)\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT", g_failures,
                g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
