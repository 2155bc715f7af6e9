#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hystab/linalg.hpp"

namespace hystab {

/// SISO state-space system (A, B, C, D).
struct LinearSystem {
    Matrix A;  // n x n
    Matrix B;  // n x 1
    Matrix C;  // 1 x n
    double D = 0.0;

    std::size_t order() const { return A.rows(); }
    void validate() const;  // throws ShapeError on inconsistent dimensions
    double cb() const;      // scalar C*B
};

enum class FeedbackCase { A, B, C, D };  // Table-1 cells (a)..(d)

struct CertificateCcwCcw {
    Matrix Q;          // n x n symmetric positive definite
    double xi = 0.0;   // sector bound, > 0
};

struct CertificateCwCcw {
    Matrix P;          // (n+1) x (n+1) symmetric positive definite
    Matrix L;          // 1 x (n+1) over the extended state (w, x)
    double delta = 0.0;
};

struct CertificateCcwCw {
    Matrix Q;  // n x n symmetric positive definite
};

struct CertificateCwCw {
    Matrix P;
    Matrix L;
    double delta = 0.0;
    double eta = 0.0;  // rate bound: f1, f2 <= eta/2
};

struct VerifyTolerances {
    double eq_rel = 1e-9;    // tol_eq  = eq_rel  * (1 + ||P||_F)
    double psd_rel = 1e-8;   // tol_psd = psd_rel * (1 + ||M||_F)
    double pd_abs = 1e-10;   // tol_pd
    double asym_rel = 1e-12; // report asymmetry above this
};

struct ConditionResult {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    /// True for margin-style checks (min-eigenvalue conditions) where a large
    /// residual is good; false for error-style checks (equality, decay LMIs).
    bool margin = false;
    /// True for sampled side conditions (sector, rate bound) that are not
    /// matrix residuals; excluded from worst_residual().
    bool side = false;
    std::string note;
};

struct VerifyReport {
    std::vector<ConditionResult> conditions;
    std::vector<std::string> warnings;  // non-fatal (asymmetry, minimality, rate-bound caveats)
    bool flagged = false;               // a caveat was flagged (see warnings)

    bool pass() const;
    double worst_residual() const;
    const ConditionResult& condition(const std::string& name) const;
};

class DuhemOperator;
struct Rect;

/// Case (a): CCW plant + CCW operator, positive feedback, D = 0, CB > 0.
/// Conditions: sym(A'Q + QA)/2 + eps A'C'CA <= 0, QB + A'C' = 0,
/// Q - xi C'C > 0, and f_an inside the sector [0, xi] on `range`.
VerifyReport verify_ccw_ccw(const LinearSystem& sys, const CertificateCcwCcw& cert,
                            const std::function<double(double)>& f_an,
                            std::pair<double, double> range, const VerifyTolerances& tol = {});

/// Case (b): CW plant + CCW operator, negative feedback.
/// Conditions: P e1 = [D; C'], sym(P M_ext) + delta L'L <= 0, P > 0.
VerifyReport verify_cw_ccw(const LinearSystem& sys, const CertificateCwCcw& cert,
                           const VerifyTolerances& tol = {});

/// Case (c): CCW plant + CW operator, negative feedback, D = 0, CB > 0.
VerifyReport verify_ccw_cw(const LinearSystem& sys, const CertificateCcwCw& cert,
                           const VerifyTolerances& tol = {});

/// Case (d): CW plant + CW operator, positive feedback. Adds
/// P - eta [D;C'][D;C']' >= 0 (strict on the complement of the structural
/// kernel when eta*D = 1) and the sampled rate bound f1, f2 <= eta/2.
VerifyReport verify_cw_cw(const LinearSystem& sys, const CertificateCwCw& cert,
                          const DuhemOperator& op, const Rect& rect,
                          const VerifyTolerances& tol = {});

enum class Topology { Actuator, Sensor };

/// Series composition of plant G and controller C with state order (x_G, x_C).
LinearSystem cascade(const LinearSystem& g, const LinearSystem& c, Topology topology);

/// Row matrix N over (x, y_phi) describing the invariant set {N z = 0}.
struct InvariantSetDescriptor {
    Matrix N;  // 1 x (n+1)
};

InvariantSetDescriptor invariant_set(const LinearSystem& sys, FeedbackCase fb,
                                     const VerifyReport& verified, const Matrix* L = nullptr);

/// Extended-state matrix [[0, 0],[B, A]] used by the case (b)/(d) LMIs.
Matrix extended_state_matrix(const LinearSystem& sys);

/// Controllability/observability rank warnings (SVD threshold 1e-10).
std::vector<std::string> minimality_warnings(const LinearSystem& sys);

const char* to_string(FeedbackCase fb);

}  // namespace hystab
