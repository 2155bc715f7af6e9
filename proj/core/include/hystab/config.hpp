#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "hystab/certify.hpp"
#include "hystab/duhem.hpp"
#include "hystab/geometry.hpp"
#include "hystab/simulate.hpp"
#include "hystab/synth.hpp"

namespace hystab {

struct RunSpec {
    std::vector<double> x0;
    double y_phi0 = 0.0;
    double t_end = 50.0;
    double dt = 1e-3;
    int output_every = 10;
};

struct StorageGridSpec {
    double gamma_lo = 0, gamma_hi = 0;
    double v_lo = 0, v_hi = 0;
    int n_gamma = 20, n_v = 20;
    Route route = Route::Auto;
};

/// Parsed experiment configuration. The schema is strict: unknown keys are
/// rejected up front, before any computation.
struct ExperimentConfig {
    std::optional<DuhemOperator> op;
    std::optional<LinearSystem> system;
    std::optional<LinearSystem> controller;
    std::optional<Topology> topology;
    std::optional<int> sign;
    std::optional<FeedbackCase> fb;
    std::optional<Certificate> certificate;
    std::optional<RunSpec> run;
    std::optional<Orientation> assert_class;
    std::optional<StorageGridSpec> storage_grid;
    std::optional<DesignProblem> design_problem;
    VerifyTolerances tol;
    GeomOptions geom;
    double tol_conv = 1e-3;
    nlohmann::json raw;

    /// The system under test: controller present => cascade, else system.
    LinearSystem effective_system() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit over the canonical JSON dump.
std::string config_hash(const nlohmann::json& j);

/// Full-precision scientific formatting used in every CSV/JSON number we emit.
std::string format_double(double x);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_trace_csv(std::ostream& os, const InputSignal& u, const std::vector<TracePoint>& trace);
void write_storage_grid_csv(std::ostream& os, const DuhemOperator& op,
                            const StorageGridSpec& grid, const GeomOptions& gopt);

nlohmann::json verify_report_json(const VerifyReport& rep);
nlohmann::json certificate_json(const Certificate& cert);
nlohmann::json design_outcome_json(const DesignOutcome& outcome);
nlohmann::json matrix_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);

}  // namespace hystab
