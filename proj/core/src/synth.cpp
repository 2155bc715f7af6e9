#include "hystab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hystab {

namespace {

// Basis of symmetric n x n matrices: diagonal units, then unit pairs.
std::vector<Matrix> sym_basis(std::size_t n) {
    std::vector<Matrix> basis;
    for (std::size_t i = 0; i < n; ++i) {
        Matrix e(n, n);
        e(i, i) = 1.0;
        basis.push_back(e);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            Matrix e(n, n);
            e(i, j) = e(j, i) = 1.0;
            basis.push_back(e);
        }
    return basis;
}

std::vector<double> top_eigvec(const Matrix& m, bool smallest = false) {
    EigResult e = eig_symmetric(m);
    std::size_t col = smallest ? 0 : m.rows() - 1;
    std::vector<double> u(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) u[i] = e.vectors(i, col);
    return u;
}

// min-norm least squares solution and null space of T theta = rhs via the
// eigendecomposition of T'T (tiny systems).
struct LinSolve {
    std::vector<double> particular;
    std::vector<std::vector<double>> null_basis;
    double residual = 0.0;
};

LinSolve solve_equality(const Matrix& t, const std::vector<double>& rhs) {
    Matrix gram = t.transpose() * t;
    EigResult e = eig_symmetric(gram);
    double lmax = std::max(e.values.back(), 0.0);
    double cut = std::max(1e-12 * lmax, 1e-300);

    std::vector<double> trhs = matvec(t.transpose(), rhs);
    LinSolve out;
    out.particular.assign(t.cols(), 0.0);
    for (std::size_t k = 0; k < e.values.size(); ++k) {
        std::vector<double> u(t.cols());
        for (std::size_t i = 0; i < t.cols(); ++i) u[i] = e.vectors(i, k);
        if (e.values[k] <= cut) {
            out.null_basis.push_back(u);
            continue;
        }
        double coeff = 0.0;
        for (std::size_t i = 0; i < t.cols(); ++i) coeff += u[i] * trhs[i];
        coeff /= e.values[k];
        for (std::size_t i = 0; i < t.cols(); ++i) out.particular[i] += coeff * u[i];
    }
    std::vector<double> check = matvec(t, out.particular);
    double r = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) r += (check[i] - rhs[i]) * (check[i] - rhs[i]);
    out.residual = std::sqrt(r);
    return out;
}

double vnorm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Shared subgradient engine. The feasible sets here touch the semidefinite
// cone boundary along a structural ray r (W r = 0 for every feasible point),
// so that condition is eliminated as linear equalities up front and the
// max-eigenvalue objective is deflated along r; the leftover problem has a
// strict interior and Polyak steps converge quickly.

struct AffineLmi {
    Matrix w_const;            // W(theta) = w_const + sum theta_k w_basis[k]
    std::vector<Matrix> w_basis;
};

std::vector<double> ray_or_empty(const LinearSystem& sys, bool extended) {
    std::vector<double> b(sys.order());
    for (std::size_t i = 0; i < sys.order(); ++i) b[i] = sys.B(i, 0);
    std::vector<double> x;
    try {
        x = solve(sys.A, b);
    } catch (const ShapeError&) {
        return {};
    }
    std::vector<double> r;
    if (extended) {
        r.resize(sys.order() + 1);
        r[0] = 1.0;
        for (std::size_t i = 0; i < sys.order(); ++i) r[i + 1] = -x[i];
    } else {
        r = x;  // A^{-1} B
    }
    double n = vnorm(r);
    if (n < 1e-300) return {};
    for (double& v : r) v /= n;
    return r;
}

// Minimizes max(lmax(deflate(W)), mu - lmin(pd_k)) over theta by projected
// subgradient with Polyak steps, checking acceptance through `accept` (the
// certify tolerances). Returns the first accepted theta.
struct SubgradientProblem {
    AffineLmi lmi;
    std::vector<double> ray;                 // deflation direction, may be empty
    std::vector<AffineLmi> pd_blocks;        // require lmin(block) > mu
    std::function<bool(const std::vector<double>&)> accept;
};

std::optional<std::vector<double>> minimize_lmax(const SubgradientProblem& prob,
                                                 std::vector<double> theta, int max_iter) {
    const double mu = 1e-7;
    const std::size_t m = theta.size();
    auto w_of = [&](const AffineLmi& l, const std::vector<double>& th) {
        Matrix w = l.w_const;
        for (std::size_t k = 0; k < m; ++k)
            if (th[k] != 0.0) {
                Matrix t = l.w_basis[k];
                t *= th[k];
                w += t;
            }
        return w;
    };
    Matrix deflate;
    if (!prob.ray.empty()) {
        deflate = outer(prob.ray, prob.ray);
        deflate *= -1.0;  // pushes the structural ray to eigenvalue -1
    }

    auto objective = [&](const std::vector<double>& th, int* piece) {
        Matrix w = w_of(prob.lmi, th);
        if (!prob.ray.empty()) {
            double scale = 1.0 + w.frobenius();
            Matrix d = deflate;
            d *= scale;
            w += d;
        }
        double f = max_eigenvalue(w);
        int act = 0;
        for (std::size_t b = 0; b < prob.pd_blocks.size(); ++b) {
            double g = mu - min_eigenvalue(w_of(prob.pd_blocks[b], th));
            if (g > f) {
                f = g;
                act = static_cast<int>(b) + 1;
            }
        }
        if (piece) *piece = act;
        return f;
    };

    if (prob.accept(theta)) return theta;
    std::vector<double> best = theta;
    double best_f = objective(theta, nullptr);
    for (int it = 0; it < max_iter && m > 0; ++it) {
        int act = 0;
        double f = objective(theta, &act);
        if (f < best_f) {
            best_f = f;
            best = theta;
            if (prob.accept(best)) return best;
        }
        std::vector<double> grad(m, 0.0);
        if (act == 0) {
            Matrix w = w_of(prob.lmi, theta);
            if (!prob.ray.empty()) {
                double scale = 1.0 + w.frobenius();
                Matrix d = deflate;
                d *= scale;
                w += d;
            }
            auto u = top_eigvec(w);
            for (std::size_t k = 0; k < m; ++k)
                grad[k] = quadratic_form(prob.lmi.w_basis[k], u);
        } else {
            const AffineLmi& blk = prob.pd_blocks[act - 1];
            auto u = top_eigvec(w_of(blk, theta), /*smallest=*/true);
            for (std::size_t k = 0; k < m; ++k)
                grad[k] = -quadratic_form(blk.w_basis[k], u);
        }
        double gn = vnorm(grad);
        if (gn < 1e-300) break;
        double alpha = (f + mu) / (gn * gn);
        for (std::size_t k = 0; k < m; ++k) theta[k] -= alpha * grad[k];
        if (it % 16 == 15 && prob.accept(theta)) return theta;
    }
    if (prob.accept(best)) return best;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Cases (a)/(c): Q subject to QB = -A'C' and the kernel rows W(Q) z0 = 0.

std::optional<Matrix> search_q(const LinearSystem& sys, bool with_sector, double xi,
                               const SearchHints& hints) {
    const std::size_t n = sys.order();
    auto basis = sym_basis(n);
    const std::size_t m = basis.size();

    const double eps = 1.0 / sys.cb();
    Matrix at = sys.A.transpose();
    Matrix ctc = sys.C.transpose() * sys.C;
    Matrix w_const = eps * (at * ctc * sys.A);
    std::vector<Matrix> w_basis;
    for (std::size_t k = 0; k < m; ++k)
        w_basis.push_back(symmetrize(at * basis[k] + basis[k] * sys.A) * 0.5);

    auto ray = ray_or_empty(sys, /*extended=*/false);

    // linear constraints: (Q B)_i = -(A'C')_i, then W(Q) z0 = 0
    std::size_t rows = n + (ray.empty() ? 0 : n);
    Matrix t(rows, m);
    std::vector<double> rhs(rows, 0.0);
    Matrix rhs_m = at * sys.C.transpose();
    for (std::size_t k = 0; k < m; ++k) {
        Matrix qb = basis[k] * sys.B;
        for (std::size_t i = 0; i < n; ++i) t(i, k) = qb(i, 0);
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -rhs_m(i, 0);
    if (!ray.empty()) {
        for (std::size_t k = 0; k < m; ++k) {
            auto col = matvec(w_basis[k], ray);
            for (std::size_t i = 0; i < n; ++i) t(n + i, k) = col[i];
        }
        auto c0 = matvec(w_const, ray);
        for (std::size_t i = 0; i < n; ++i) rhs[n + i] = -c0[i];
    }
    LinSolve ls = solve_equality(t, rhs);
    if (ls.residual > 1e-7 * (1.0 + vnorm(rhs))) return std::nullopt;

    auto q_of = [&](const std::vector<double>& th) {
        Matrix q(n, n);
        for (std::size_t k = 0; k < m; ++k) {
            double c = ls.particular[k];
            for (std::size_t j = 0; j < ls.null_basis.size(); ++j)
                c += th[j] * ls.null_basis[j][k];
            if (c != 0.0) {
                Matrix scaled = basis[k];
                scaled *= c;
                q += scaled;
            }
        }
        return q;
    };

    // Rebase the affine objective onto the null-space coordinates.
    auto embed = [&](const Matrix& constant, const std::vector<Matrix>& full_basis,
                     double extra_scale = 1.0) {
        AffineLmi out;
        out.w_const = constant;
        for (std::size_t k = 0; k < m; ++k) {
            Matrix scaled = full_basis[k];
            scaled *= ls.particular[k] * extra_scale;
            out.w_const += scaled;
        }
        for (std::size_t j = 0; j < ls.null_basis.size(); ++j) {
            Matrix dir(full_basis.front().rows(), full_basis.front().cols());
            for (std::size_t k = 0; k < m; ++k)
                if (ls.null_basis[j][k] != 0.0) {
                    Matrix scaled = full_basis[k];
                    scaled *= ls.null_basis[j][k] * extra_scale;
                    dir += scaled;
                }
            out.w_basis.push_back(dir);
        }
        return out;
    };

    SubgradientProblem prob;
    prob.lmi = embed(w_const, w_basis);
    prob.ray = ray;
    prob.pd_blocks.push_back(embed(Matrix(n, n), basis));  // Q > 0
    if (with_sector) {
        Matrix neg_sector = ctc;
        neg_sector *= -xi;
        prob.pd_blocks.push_back(embed(neg_sector, basis));  // Q - xi C'C > 0
    }
    VerifyTolerances tol;
    prob.accept = [&](const std::vector<double>& th) {
        Matrix q = q_of(th);
        Matrix lmi = symmetrize(at * q + q * sys.A) * 0.5 + w_const;
        if (max_eigenvalue(lmi) > tol.psd_rel * (1.0 + lmi.frobenius())) return false;
        if (min_eigenvalue(q) <= tol.pd_abs) return false;
        if (with_sector && min_eigenvalue(q - xi * ctc) <= tol.pd_abs) return false;
        Matrix r = q * sys.B + at * sys.C.transpose();
        return r.frobenius() <= tol.eq_rel * (1.0 + q.frobenius());
    };

    std::vector<double> theta(ls.null_basis.size(), 0.0);
    auto got = minimize_lmax(prob, theta, hints.max_iterations);
    if (!got) return std::nullopt;
    return q_of(*got);
}

// Any workable L must be orthogonal to the structural ray [1; -A^{-1}B];
// candidates are projected accordingly (hint first, then coordinate
// directions, then seeded random draws).
std::vector<Matrix> l_candidates(const LinearSystem& sys, const SearchHints& hints,
                                 std::mt19937_64& rng) {
    const std::size_t me = sys.order() + 1;
    auto ray = ray_or_empty(sys, /*extended=*/true);
    auto project = [&](std::vector<double> v) -> std::optional<Matrix> {
        if (!ray.empty()) {
            double dot = 0.0;
            for (std::size_t i = 0; i < me; ++i) dot += v[i] * ray[i];
            for (std::size_t i = 0; i < me; ++i) v[i] -= dot * ray[i];
        }
        double n = vnorm(v);
        if (n < 1e-9) return std::nullopt;
        for (double& x : v) x /= n;
        return Matrix::row(v);
    };

    std::vector<Matrix> out;
    if (hints.L) {
        std::vector<double> v(me);
        for (std::size_t i = 0; i < me; ++i) v[i] = (*hints.L)(0, i);
        if (auto m = project(v)) out.push_back(*m);
    }
    for (std::size_t i = 0; i < me && out.size() < static_cast<std::size_t>(hints.restarts); ++i) {
        std::vector<double> v(me, 0.0);
        v[i] = 1.0;
        if (auto m = project(v)) out.push_back(*m);
    }
    std::normal_distribution<double> gauss;
    while (out.size() < static_cast<std::size_t>(hints.restarts)) {
        std::vector<double> v(me);
        for (double& x : v) x = gauss(rng);
        if (auto m = project(v)) out.push_back(*m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cases (b)/(d): P carries its first column [D; C'] from the equality; in the
// Schur-complement coordinates the decay LMI reads
//   a = CB + delta lw^2 < 0,
//   G(S) = sym(SA) + delta lx lx' + w1(S) w1(S)'/|a| <= 0,
//   w1(S) = (A'C' + SB)/2 + delta lw lx,
// and G(S) = 0 is an extreme feasible point (W becomes negative semidefinite
// of rank one). Damped Newton solves G(S) = 0 directly; the boundary double
// root costs Newton its quadratic rate but keeps it linearly convergent.

std::optional<Matrix> search_p_block(const LinearSystem& sys, const Matrix& lrow, double delta,
                                     double eta, const VerifyTolerances& tol) {
    const std::size_t n = sys.order();
    const std::size_t m = n * (n + 1) / 2;
    auto basis = sym_basis(n);

    const double lw = lrow(0, 0);
    std::vector<double> lx(n);
    for (std::size_t i = 0; i < n; ++i) lx[i] = lrow(0, i + 1);
    const double a = sys.cb() + delta * lw * lw;
    if (a >= -1e-9) return std::nullopt;

    Matrix atct = sys.A.transpose() * sys.C.transpose();
    auto w1_of = [&](const Matrix& s) {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) {
            double sb = 0;
            for (std::size_t j = 0; j < n; ++j) sb += s(i, j) * sys.B(j, 0);
            w[i] = 0.5 * (atct(i, 0) + sb) + delta * lw * lx[i];
        }
        return w;
    };
    auto g_of = [&](const Matrix& s) {
        auto w1 = w1_of(s);
        Matrix g = symmetrize(s * sys.A + sys.A.transpose() * s) * 0.5;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                g(i, j) += delta * lx[i] * lx[j] + w1[i] * w1[j] / std::abs(a);
        return g;
    };

    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t i = 0; i < n; ++i) idx.push_back({i, i});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) idx.push_back({i, j});

    Matrix s(n, n);
    double gn_prev = 1e300;
    for (int it = 0; it < 120; ++it) {
        Matrix g = g_of(s);
        double gn = g.frobenius();
        if (gn < 1e-10 * (1.0 + s.frobenius())) break;
        if (gn >= gn_prev * (1.0 - 1e-12) && gn > 1e-8) return std::nullopt;  // stalled
        gn_prev = gn;

        auto w1 = w1_of(s);
        Matrix jac(m, m);
        std::vector<double> rhs(m);
        for (std::size_t k = 0; k < m; ++k) {
            Matrix dg = symmetrize(basis[k] * sys.A + sys.A.transpose() * basis[k]) * 0.5;
            std::vector<double> bk(n);
            for (std::size_t i = 0; i < n; ++i) {
                double s2 = 0;
                for (std::size_t j = 0; j < n; ++j) s2 += basis[k](i, j) * sys.B(j, 0);
                bk[i] = 0.5 * s2;
            }
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    dg(i, j) += (w1[i] * bk[j] + bk[i] * w1[j]) / std::abs(a);
            for (std::size_t q = 0; q < m; ++q) jac(q, k) = dg(idx[q].first, idx[q].second);
        }
        for (std::size_t q = 0; q < m; ++q) rhs[q] = -g(idx[q].first, idx[q].second);
        Matrix jtj = jac.transpose() * jac;
        for (std::size_t i = 0; i < m; ++i) jtj(i, i) += 1e-12 * (1.0 + jtj(i, i));
        std::vector<double> step;
        try {
            step = solve(jtj, matvec(jac.transpose(), rhs));
        } catch (const ShapeError&) {
            return std::nullopt;
        }
        double t = 1.0;
        bool moved = false;
        for (int halve = 0; halve < 30; ++halve) {
            Matrix trial = s;
            for (std::size_t k = 0; k < m; ++k) {
                trial(idx[k].first, idx[k].second) += t * step[k];
                if (idx[k].first != idx[k].second)
                    trial(idx[k].second, idx[k].first) += t * step[k];
            }
            if (g_of(trial).frobenius() < gn) {
                s = trial;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) return std::nullopt;
    }

    Matrix p(n + 1, n + 1);
    p(0, 0) = sys.D;
    for (std::size_t i = 0; i < n; ++i) {
        p(i + 1, 0) = sys.C(0, i);
        p(0, i + 1) = sys.C(0, i);
        for (std::size_t j = 0; j < n; ++j) p(i + 1, j + 1) = s(i, j);
    }
    if (min_eigenvalue(p) <= tol.pd_abs) return std::nullopt;
    if (eta > 0) {
        std::vector<double> fc(n + 1);
        fc[0] = sys.D;
        for (std::size_t i = 0; i < n; ++i) fc[i + 1] = sys.C(0, i);
        Matrix gap = p - eta * outer(fc, fc);
        EigResult e = eig_symmetric(gap);
        double lead = (std::abs(1.0 - eta * sys.D) <= 1e-12 && e.values.size() > 1)
                          ? e.values[1]
                          : e.values[0];
        if (lead <= tol.pd_abs) return std::nullopt;
    }
    return p;
}

}  // namespace

std::optional<Certificate> feasibility_search(const LinearSystem& sys, FeedbackCase fb,
                                              const SearchHints& hints) {
    sys.validate();
    VerifyTolerances tol;

    if (fb == FeedbackCase::A || fb == FeedbackCase::C) {
        if (std::abs(sys.D) > 1e-12 || sys.cb() <= 0) return std::nullopt;
        bool with_sector = (fb == FeedbackCase::A);
        double xi = with_sector ? std::max(hints.xi_min, 1e-6) : 0.0;
        auto q = search_q(sys, with_sector, xi, hints);
        if (!q) return std::nullopt;
        if (fb == FeedbackCase::A) {
            CertificateCcwCcw cert{*q, xi};
            auto fan = [&](double v) { return hints.xi_min * v; };
            VerifyReport rep = verify_ccw_ccw(sys, cert, fan, {-1.0, 1.0}, tol);
            if (rep.pass()) return Certificate{cert};
            return std::nullopt;
        }
        CertificateCcwCw cert{*q};
        VerifyReport rep = verify_ccw_cw(sys, cert, tol);
        if (rep.pass()) return Certificate{cert};
        return std::nullopt;
    }

    // Cases (b)/(d): extended-state search.
    if (sys.D <= 0) return std::nullopt;  // P(0,0) = D > 0 needed

    std::mt19937_64 rng(hints.seed);
    auto ls = l_candidates(sys, hints, rng);
    std::vector<double> deltas;
    for (int e = -4; e <= 4; ++e) deltas.push_back(std::pow(10.0, e));

    const double eta = (fb == FeedbackCase::D) ? hints.eta : 0.0;

    for (const Matrix& l : ls) {
        // largest workable delta first
        for (auto it = deltas.rbegin(); it != deltas.rend(); ++it) {
            double delta = *it;
            auto p = search_p_block(sys, l, delta, eta, tol);
            if (!p) continue;
            if (fb == FeedbackCase::B) {
                CertificateCwCcw cert{*p, l, delta};
                VerifyReport rep = verify_cw_ccw(sys, cert, tol);
                if (rep.pass()) return Certificate{cert};
            } else {
                CertificateCwCw cert{*p, l, delta, eta};
                // Matrix-only validation here; the op-dependent rate bound is
                // the caller's job (eta already encodes the measured bound).
                VerifyReport rep = verify_cw_ccw(sys, CertificateCwCcw{*p, l, delta}, tol);
                std::vector<double> fc(sys.order() + 1);
                fc[0] = sys.D;
                for (std::size_t i = 0; i < sys.order(); ++i) fc[i + 1] = sys.C(0, i);
                Matrix gap = *p - eta * outer(fc, fc);
                EigResult e = eig_symmetric(gap);
                double lead = (std::abs(1.0 - eta * sys.D) <= 1e-12 && e.values.size() > 1)
                                  ? e.values[1]
                                  : e.values[0];
                if (rep.pass() && lead > tol.pd_abs) return Certificate{cert};
            }
        }
    }
    return std::nullopt;
}

DesignOutcome design(const DesignProblem& problem) {
    problem.plant.validate();
    DesignOutcome out;
    if (problem.candidates.empty()) {
        out.diagnostics.push_back("no candidate controllers supplied");
        return out;
    }
    const bool ccw = problem.hysteresis.orientation == Orientation::CCW;
    if (ccw && problem.hysteresis.fan_samples.empty())
        throw ShapeError("CCW design requires f_an samples");
    if (!ccw && !(problem.hysteresis.rate_bound > 0))
        throw ShapeError("CW design requires a positive rate bound");

    double xi_min = 0.0;
    bool sector_ok = true;
    for (auto [v, f] : problem.hysteresis.fan_samples) {
        if (v == 0.0) continue;
        double ratio = f / v;
        if (ratio < 0) sector_ok = false;
        xi_min = std::max(xi_min, ratio);
    }

    for (std::size_t idx = 0; idx < problem.candidates.size(); ++idx) {
        const LinearSystem& cand = problem.candidates[idx];
        LinearSystem closed;
        try {
            closed = cascade(problem.plant, cand, problem.topology);
        } catch (const ShapeError& e) {
            out.diagnostics.push_back("candidate " + std::to_string(idx) + ": " + e.what());
            continue;
        }

        SearchHints hints;
        hints.seed = problem.seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1));
        Matrix l_hint;
        if (problem.target_L) {
            l_hint = *problem.target_L;
            hints.L = &l_hint;
        }
        hints.xi_min = xi_min;
        hints.eta = 2.0 * problem.hysteresis.rate_bound;

        // Negative feedback first, then positive (the algorithm's step order).
        FeedbackCase order[2] = {ccw ? FeedbackCase::B : FeedbackCase::C,
                                 ccw ? FeedbackCase::A : FeedbackCase::D};
        int signs[2] = {-1, +1};
        for (int attempt = 0; attempt < 2; ++attempt) {
            FeedbackCase fb = order[attempt];
            if ((fb == FeedbackCase::A) && (!sector_ok)) {
                out.diagnostics.push_back("candidate " + std::to_string(idx) +
                                          ": f_an samples leave the [0, xi] sector");
                continue;
            }
            auto cert = feasibility_search(closed, fb, hints);
            if (!cert) {
                out.diagnostics.push_back("candidate " + std::to_string(idx) + ": case " +
                                          to_string(fb) + " infeasible within budget");
                continue;
            }
            DesignResult res;
            res.controller = cand;
            res.closed = closed;
            res.sign = signs[attempt];
            res.fb = fb;
            res.certificate = *cert;
            res.seed = hints.seed;
            res.candidate_index = idx;
            // Re-verify through the public checkers so the stored report is
            // exactly what a later audit would recompute.
            VerifyTolerances tol;
            if (auto* a = std::get_if<CertificateCcwCcw>(&*cert)) {
                auto fan = [&](double v) { return xi_min * v; };
                res.report = verify_ccw_ccw(closed, *a, fan, {-1.0, 1.0}, tol);
            } else if (auto* b = std::get_if<CertificateCwCcw>(&*cert)) {
                res.report = verify_cw_ccw(closed, *b, tol);
            } else if (auto* c = std::get_if<CertificateCcwCw>(&*cert)) {
                res.report = verify_ccw_cw(closed, *c, tol);
            } else if (auto* d = std::get_if<CertificateCwCw>(&*cert)) {
                res.report = verify_cw_ccw(closed, CertificateCwCcw{d->P, d->L, d->delta}, tol);
            }
            if (!res.report.pass()) {
                out.diagnostics.push_back("candidate " + std::to_string(idx) +
                                          ": search result failed re-verification");
                continue;
            }
            out.result = std::move(res);
            return out;
        }
    }
    return out;
}

}  // namespace hystab
