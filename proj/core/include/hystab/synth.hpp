#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "hystab/certify.hpp"
#include "hystab/duhem.hpp"

namespace hystab {

using Certificate =
    std::variant<CertificateCcwCcw, CertificateCwCcw, CertificateCcwCw, CertificateCwCw>;

struct SearchHints {
    const Matrix* L = nullptr;   // desired L over the extended state, if any
    double xi_min = 0.0;         // case (a): smallest sector bound covering f_an
    double eta = 0.0;            // case (d): rate bound, fixed before the search
    std::uint64_t seed = 1;
    int max_iterations = 5000;   // subgradient budget (cases a/c)
    int restarts = 32;           // L restarts on the unit sphere (cases b/d)
};

/// Searches for a certificate of the given case for `sys`. Cases (a)/(c)
/// parameterize Q over the null space of the coupling equality QB = -A'C' and
/// run projected subgradient descent on the max-eigenvalue objective; cases
/// (b)/(d) fix P's first column from the equality, then search the trailing
/// block over a delta log-grid and L restarts. Returns the first certificate
/// whose matrix conditions pass the certify tolerances, or nullopt when the
/// budget is exhausted.
std::optional<Certificate> feasibility_search(const LinearSystem& sys, FeedbackCase fb,
                                              const SearchHints& hints = {});

struct HysteresisInfo {
    Orientation orientation = Orientation::CCW;
    /// (v, f_an(v)) samples; required for a CCW operator.
    std::vector<std::pair<double, double>> fan_samples;
    /// max of f1, f2 over the working rectangle; required for a CW operator.
    double rate_bound = 0.0;
};

struct DesignProblem {
    LinearSystem plant;
    Topology topology = Topology::Actuator;
    HysteresisInfo hysteresis;
    std::vector<LinearSystem> candidates;
    std::optional<Matrix> target_L;  // desired invariant-set row, over (w, x)
    std::uint64_t seed = 1;
};

struct DesignResult {
    LinearSystem controller;
    LinearSystem closed;  // cascade of plant and controller
    int sign = -1;
    FeedbackCase fb = FeedbackCase::B;
    Certificate certificate;
    VerifyReport report;
    std::uint64_t seed = 1;
    std::size_t candidate_index = 0;
};

struct DesignOutcome {
    std::optional<DesignResult> result;
    std::vector<std::string> diagnostics;  // per-candidate failing conditions
    bool feasible() const { return result.has_value(); }
};

/// The controller-design loop: for each candidate, cascade with the plant and
/// attempt the negative-feedback certificate first (case b for a CCW operator,
/// case c for CW), then the positive-feedback one (a for CCW, d for CW).
/// First fully verified candidate wins; candidates are tried in list order.
DesignOutcome design(const DesignProblem& problem);

}  // namespace hystab
