#include <doctest.h>

#include <cmath>
#include <random>

#include "hystab/geometry.hpp"

using namespace hystab;

namespace {

DuhemOperator ch_small() { return DuhemOperator::coleman_hodgdon(1e-2, 2.5e-3, 5e-3); }
DuhemOperator dahl_ref() { return DuhemOperator::dahl(0.75, 1.5, 1.0); }

// Frozen reference values (independent derivations in the test, not the
// library): Omega from the logarithmic inverse of the traversing exponential,
// Lambda likewise, storage from the explicit antiderivatives.
const double kOmegaSpot = 100.0 * std::log(1.4);              // Omega(0.1, 0) for ch_small
const double kStorageCcwSpot = 10.0 - 25.0 * std::log(1.4);   // H(0.1, 0) for ch_small
const double kLambdaSpot = 0.5 * std::log(0.6);               // Lambda(0.5, 0) for dahl_ref
const double kStorageCwSpot = 0.25 + 0.75 * 0.5 * std::log(0.6);  // H(0.5, 0) for dahl_ref

GeomOptions generic_route() {
    GeomOptions g;
    g.route = Route::Generic;
    return g;
}

}  // namespace

TEST_CASE("anhysteresis curve at reference points") {
    CHECK(anhysteresis(ch_small(), 10.0) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(anhysteresis(dahl_ref(), 3.3) == doctest::Approx(0.0));
    // affine operator with f_an(v) = 0.475 v, solved by bisection
    auto op = DuhemOperator::custom(
        [](double g, double v) { return -g + 0.475 * v + 0.3; },
        [](double g, double v) { return g - 0.475 * v + 0.3; }, 0.0, Rect{-2, 2, -3, 3});
    CHECK(anhysteresis(op, 2.0) == doctest::Approx(0.95).epsilon(1e-9));

    auto no_root = DuhemOperator::custom([](double, double) { return 1.0; },
                                         [](double, double) { return 2.0; }, 0.0,
                                         Rect{-1, 1, -1, 1});
    CHECK_THROWS_AS(anhysteresis(no_root, 0.0), NoRootError);
}

TEST_CASE("root residual of the anhysteresis bisection") {
    auto op = DuhemOperator::custom(
        [](double g, double v) { return -std::tanh(g - 0.2 * v) + 0.4; },
        [](double g, double v) { return std::tanh(g - 0.2 * v) + 0.4; }, 0.0,
        Rect{-2, 2, -4, 4});
    for (double v : {-3.0, -1.0, 0.0, 0.5, 3.0}) {
        double g = anhysteresis(op, v);
        double scale = std::max(std::abs(op.f1(g, v)), 1.0);
        CHECK(std::abs(op.f1(g, v) - op.f2(g, v)) <= 1e-10 * scale);
    }
}

TEST_CASE("traversing curve anchors and reference values") {
    auto op = ch_small();
    CHECK(traversing(op, 0.3, -2.0, -2.0) == doctest::Approx(0.3));
    // closed form at v = 100 from the anchor (0, 0)
    double w = traversing(op, 0.0, 0.0, 100.0);
    CHECK(w == doctest::Approx(0.25 + 0.25 / std::exp(1.0)).epsilon(1e-12));
    // generic route agrees to 1e-8 relative
    double wg = traversing(op, 0.0, 0.0, 100.0, generic_route());
    CHECK(std::abs(wg - w) <= 1e-8 * std::abs(w));

    // Dahl saturates at the Coulomb level going right
    double far = traversing(dahl_ref(), 0.0, 0.0, 40.0);
    CHECK(far == doctest::Approx(0.75).epsilon(1e-10));
    double farg = traversing(dahl_ref(), 0.0, 0.0, 40.0, generic_route());
    CHECK(std::abs(farg - far) <= 1e-8 * 0.75);
}

TEST_CASE("ccw intersecting function: spot value, anchor, ordering") {
    auto op = ch_small();
    CHECK(intersect_ccw(op, 0.1, 0.0) == doctest::Approx(kOmegaSpot).epsilon(1e-12));
    // anchor already on the curve
    CHECK(intersect_ccw(op, 5e-3 * 2.0, 2.0) == doctest::Approx(2.0).epsilon(1e-10));
    // definitional ordering below the curve
    CHECK(intersect_ccw(op, -0.1, 0.0) < 0.0);

    double og = intersect_ccw(op, 0.1, 0.0, generic_route());
    CHECK(std::abs(og - kOmegaSpot) <= 1e-6 * std::abs(kOmegaSpot));
}

TEST_CASE("cw intersecting function: spot values and symmetry") {
    auto op = dahl_ref();
    CHECK(intersect_cw(op, 0.5, 0.0) == doctest::Approx(kLambdaSpot).epsilon(1e-12));
    CHECK(intersect_cw(op, -0.5, 0.0) == doctest::Approx(-kLambdaSpot).epsilon(1e-12));
    CHECK(intersect_cw(op, 0.0, 1.7) == doctest::Approx(1.7));

    double lg = intersect_cw(op, 0.5, 0.0, generic_route());
    CHECK(std::abs(lg - kLambdaSpot) <= 1e-6 * std::abs(kLambdaSpot));
}

TEST_CASE("intersection residual and side ordering on random probes") {
    std::mt19937 rng(7);
    auto op = ch_small();
    StorageEvaluator closed(op);
    std::uniform_real_distribution<double> gd(-0.2, 0.2), vd(-10, 10);
    for (int k = 0; k < 40; ++k) {
        double g = gd(rng), v = vd(rng);
        double omega = closed.intersect_ccw(g, v);
        double fan_at = closed.anhysteresis(omega);
        CHECK(std::abs(closed.traversing(g, v, omega) - fan_at) <= 1e-8);
        bool above = g >= closed.anhysteresis(v);
        CHECK((omega >= v) == above);
    }
    auto opd = dahl_ref();
    StorageEvaluator dl(opd);
    std::uniform_real_distribution<double> gd2(-0.67, 0.67);
    for (int k = 0; k < 40; ++k) {
        double g = gd2(rng), v = vd(rng);
        double lam = dl.intersect_cw(g, v);
        CHECK(std::abs(dl.traversing(g, v, lam) - 0.0) <= 1e-8);
        CHECK((lam <= v) == (g >= 0.0));
    }
}

TEST_CASE("traversing curve is monotone when both rates are nonnegative") {
    auto op = dahl_ref();  // rates >= 0 on |gamma| <= f_c
    StorageEvaluator eval(op, generic_route());
    double prev = eval.traversing(0.2, 0.0, -6.0);
    for (double v = -5.5; v <= 6.0; v += 0.5) {
        double cur = eval.traversing(0.2, 0.0, v);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("bracket exhaustion raises NoIntersectError") {
    // The true intersection sits near 33.6; a tiny expansion budget cannot
    // reach it on the generic route.
    GeomOptions opt = generic_route();
    opt.max_bracket_expansions = 2;
    CHECK_THROWS_AS(intersect_ccw(ch_small(), 0.1, 0.0, opt), NoIntersectError);
}

TEST_CASE("storage values: reference spots and trivial zeros") {
    auto op = ch_small();
    StorageValue s = storage_ccw(op, 0.1, 0.0);
    CHECK(s.value == doctest::Approx(kStorageCcwSpot).epsilon(1e-12));
    CHECK(s.branch == StorageBranch::Above);
    CHECK(s.intersect_point == doctest::Approx(kOmegaSpot).epsilon(1e-12));
    CHECK(storage_ccw(op, 0.0, 0.0).value == doctest::Approx(0.0));

    auto opd = dahl_ref();
    StorageValue sd = storage_cw(opd, 0.5, 0.0);
    CHECK(sd.value == doctest::Approx(kStorageCwSpot).epsilon(1e-12));
    for (double v : {-2.0, 0.0, 1.0}) CHECK(storage_cw(opd, 0.0, v).value == doctest::Approx(0.0));
}

TEST_CASE("storage on the anhysteresis curve equals the f_an integral") {
    // H(f_an(v), v) = int_0^v (f_an(v) - f_an(s)) ds; for f_an = b v this is
    // b v^2 / 2, zero only at v = 0.
    auto op = ch_small();
    for (double v : {-8.0, -1.0, 0.0, 3.0}) {
        double h = storage_ccw(op, 5e-3 * v, v).value;
        CHECK(h == doctest::Approx(0.5 * 5e-3 * v * v).epsilon(1e-9));
    }
}

TEST_CASE("storage nonnegativity over the working rectangle") {
    auto op = ch_small();
    const Rect& r = op.working_rect();
    StorageEvaluator eval(op);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
            double g = r.gamma_lo + r.gamma_span() * i / 49.0;
            double v = r.v_lo + r.v_span() * j / 49.0;
            CHECK(eval.storage_ccw(g, v).value >= -1e-9);
        }
    auto opd = dahl_ref();
    const Rect& rd = opd.working_rect();
    StorageEvaluator evald(opd);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) {
            double g = rd.gamma_lo + rd.gamma_span() * i / 49.0;
            double v = rd.v_lo + rd.v_span() * j / 49.0;
            CHECK(evald.storage_cw(g, v).value >= -1e-9);
        }
}

TEST_CASE("generic and closed storage routes agree") {
    auto op = ch_small();
    StorageEvaluator closed(op), generic(op, generic_route());
    const Rect& r = op.working_rect();
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            double g = r.gamma_lo + r.gamma_span() * i / 7.0;
            double v = r.v_lo + r.v_span() * j / 7.0;
            double a = closed.storage_ccw(g, v).value;
            double b = generic.storage_ccw(g, v).value;
            CHECK(std::abs(a - b) <= 1e-6 * (1.0 + std::abs(a)));
        }
}

TEST_CASE("dissipation inequality: trivial and model runs") {
    auto op = ch_small();
    auto rep0 = dissipation_check(op, InputSignal::constant(2.0, 5.0), Orientation::CCW);
    CHECK(rep0.max_violation == doctest::Approx(0.0));

    // sinusoid approximated by a fine piecewise-linear signal
    std::vector<double> t, u;
    for (int k = 0; k <= 400; ++k) {
        t.push_back(k * 0.01);
        u.push_back(3.0 * std::sin(2.0 * 3.14159265358979 * 0.25 * t.back()));
    }
    auto rep = dissipation_check(op, InputSignal(t, u), Orientation::CCW, {1e-3, 0});
    CHECK(rep.max_violation <= 1e-6);

    auto repd = dissipation_check(dahl_ref(), InputSignal::triangle(1.5, 4.0, 2),
                                  Orientation::CW, {1e-3, 0});
    CHECK(repd.max_violation <= 1e-6);
}

TEST_CASE("radial unboundedness probes") {
    auto op = ch_small();
    auto rep = radial_probe(op, 0.0, {-4, -2, -1, -0.5, 0.5, 1, 2, 4});
    CHECK(rep.monotone);

    auto opd = dahl_ref();
    std::vector<double> gl;
    for (double g = 0.1; g < 0.75; g += 0.1) {
        gl.push_back(g);
        gl.push_back(-g);
    }
    auto repd = radial_probe(opd, 0.0, gl);
    CHECK(repd.monotone);

    // H at the curve itself is the side minimum
    auto rep2 = radial_probe(op, 1.0, {5e-3, 0.05, 0.1, 0.2});
    CHECK(rep2.monotone);
    CHECK(rep2.h_values.front() <= rep2.h_values.back());
}

TEST_CASE("storage preconditions enforce classification") {
    auto unclassified = DuhemOperator::custom([](double g, double) { return 1.0 - g; },
                                              [](double g, double) { return 1.0 + g; }, 0.0,
                                              Rect{-0.9, 0.9, -1, 1});
    CHECK_THROWS_AS(storage_ccw(unclassified, 0.1, 0.0), Error);
    CHECK_THROWS_AS(intersect_cw(ch_small(), 0.1, 0.0), Error);   // CCW op, CW query
    CHECK_THROWS_AS(intersect_ccw(dahl_ref(), 0.1, 0.0), Error);  // CW op, CCW query
}
