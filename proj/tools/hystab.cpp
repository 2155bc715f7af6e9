#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include "hystab/config.hpp"
#include "hystab/experiments.hpp"

namespace fs = std::filesystem;
using namespace hystab;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitConfigError = 2;

struct TolFlags {
    double eq = -1, psd = -1, pd = -1, root = -1, quad = -1, conv = -1;
    void apply(ExperimentConfig& cfg) const {
        if (eq > 0) cfg.tol.eq_rel = eq;
        if (psd > 0) cfg.tol.psd_rel = psd;
        if (pd > 0) cfg.tol.pd_abs = pd;
        if (root > 0) cfg.geom.tol_root = root;
        if (quad > 0) cfg.geom.quad_tol = quad;
        if (conv > 0) cfg.tol_conv = conv;
    }
};

void add_tol_flags(CLI::App* cmd, TolFlags& t) {
    cmd->add_option("--tol-eq", t.eq, "equality residual tolerance (relative)");
    cmd->add_option("--tol-psd", t.psd, "semidefinite tolerance (relative)");
    cmd->add_option("--tol-pd", t.pd, "positive-definite margin (absolute)");
    cmd->add_option("--tol-root", t.root, "root-finding tolerance");
    cmd->add_option("--tol-quad", t.quad, "quadrature tolerance (absolute)");
    cmd->add_option("--tol-conv", t.conv, "invariant-set convergence tolerance");
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream os(out_path);
        os << j.dump(2) << "\n";
    }
}

int cmd_classify(const std::string& config_path, const std::string& out_path) {
    ExperimentConfig cfg = load_config(config_path);
    if (!cfg.op) throw ConfigError("classify needs an operator section");
    ClassifyReport rep = classify(*cfg.op);

    nlohmann::json j;
    j["orientation"] = to_string(rep.orientation);
    j["failures"] = rep.failures;
    j["config_hash"] = config_hash(cfg.raw);
    emit(j, out_path);

    if (!cfg.assert_class) return rep.orientation != Orientation::Neither ? kExitPass : kExitChecksFailed;
    return rep.orientation == *cfg.assert_class ? kExitPass : kExitChecksFailed;
}

int cmd_storage_grid(const ExperimentConfig& cfg, const std::string& out_path) {
    if (!cfg.op || !cfg.storage_grid)
        throw ConfigError("storage-grid needs operator and storage_grid sections");
    DuhemOperator op = *cfg.op;
    if (!op.orientation()) {
        ClassifyReport rep = classify(op);
        if (rep.orientation == Orientation::Neither)
            throw ConfigError("operator classification failed; cannot pick a storage function");
        op = op.with_orientation(rep.orientation);
    }
    std::ofstream os(out_path.empty() ? "storage_grid.csv" : out_path);
    write_storage_grid_csv(os, op, *cfg.storage_grid, cfg.geom);
    return kExitPass;
}

int cmd_certify(const ExperimentConfig& cfg, const std::string& out_path) {
    if (!cfg.certificate || !cfg.fb) throw ConfigError("certify needs certificate + interconnection");
    LinearSystem sys = cfg.effective_system();
    VerifyReport rep;
    if (const auto* a = std::get_if<CertificateCcwCcw>(&*cfg.certificate)) {
        if (!cfg.op) throw ConfigError("case a verification needs the operator (for f_an)");
        StorageEvaluator eval(*cfg.op, cfg.geom);
        auto fan = [&](double v) { return eval.anhysteresis(v); };
        const Rect& r = cfg.op->working_rect();
        rep = verify_ccw_ccw(sys, *a, fan, {r.v_lo, r.v_hi}, cfg.tol);
    } else if (const auto* b = std::get_if<CertificateCwCcw>(&*cfg.certificate)) {
        rep = verify_cw_ccw(sys, *b, cfg.tol);
    } else if (const auto* c = std::get_if<CertificateCcwCw>(&*cfg.certificate)) {
        rep = verify_ccw_cw(sys, *c, cfg.tol);
    } else if (const auto* d = std::get_if<CertificateCwCw>(&*cfg.certificate)) {
        if (!cfg.op) throw ConfigError("case d verification needs the operator (rate bound)");
        rep = verify_cw_cw(sys, *d, *cfg.op, cfg.op->working_rect(), cfg.tol);
    }
    nlohmann::json j = verify_report_json(rep);
    j["config_hash"] = config_hash(cfg.raw);
    emit(j, out_path);
    return rep.pass() ? kExitPass : kExitChecksFailed;
}

int cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (!cfg.op || !cfg.run || !cfg.fb || !cfg.sign)
        throw ConfigError("simulate needs operator, interconnection, and run sections");
    LinearSystem sys = cfg.effective_system();
    DuhemOperator op = cfg.op->with_y0(cfg.run->y_phi0);
    if (!op.orientation()) {
        ClassifyReport crep = classify(op);
        if (crep.orientation == Orientation::Neither)
            throw ConfigError("operator did not classify as CCW or CW");
        op = op.with_orientation(crep.orientation);
    }
    Interconnection ic(sys, op, *cfg.sign, *cfg.fb);

    SimulateOptions sopt;
    sopt.dt = cfg.run->dt;
    sopt.output_every = cfg.run->output_every;
    Trajectory traj = simulate_closed_loop(ic, cfg.run->x0, cfg.run->t_end, sopt);

    nlohmann::json checks = nlohmann::json::array();
    bool pass = traj.branch_audit_ok;
    checks.push_back({{"name", "branch_audit"}, {"pass", traj.branch_audit_ok}});

    if (cfg.certificate) {
        VerifyReport rep;
        const Matrix* qp = nullptr;
        const Matrix* l = nullptr;
        if (const auto* a = std::get_if<CertificateCcwCcw>(&*cfg.certificate)) {
            StorageEvaluator eval(op, cfg.geom);
            auto fan = [&](double v) { return eval.anhysteresis(v); };
            const Rect& r = op.working_rect();
            rep = verify_ccw_ccw(sys, *a, fan, {r.v_lo, r.v_hi}, cfg.tol);
            qp = &a->Q;
        } else if (const auto* b = std::get_if<CertificateCwCcw>(&*cfg.certificate)) {
            rep = verify_cw_ccw(sys, *b, cfg.tol);
            qp = &b->P;
            l = &b->L;
        } else if (const auto* c = std::get_if<CertificateCcwCw>(&*cfg.certificate)) {
            rep = verify_ccw_cw(sys, *c, cfg.tol);
            qp = &c->Q;
        } else if (const auto* d = std::get_if<CertificateCwCw>(&*cfg.certificate)) {
            rep = verify_cw_cw(sys, *d, op, op.working_rect(), cfg.tol);
            qp = &d->P;
            l = &d->L;
        }
        checks.push_back({{"name", "certificate"}, {"pass", rep.pass()},
                          {"value", rep.worst_residual()}});
        pass = pass && rep.pass();
        if (rep.pass()) {
            MonitorResult mon = lyapunov_monitor(traj, ic, *qp, rep, cfg.geom);
            traj.h_cl = mon.h_cl;
            checks.push_back({{"name", "h_cl_monotone"}, {"pass", mon.pass},
                              {"value", mon.max_increment}, {"tol", mon.tol}});
            pass = pass && mon.pass;

            InvariantSetDescriptor n = invariant_set(sys, *cfg.fb, rep, l);
            DistanceResult dist = invariant_distance(traj, n, cfg.tol_conv);
            traj.invariant_dist = dist.series;
            checks.push_back({{"name", "invariant_convergence"}, {"pass", dist.converged},
                              {"value", dist.final_max}, {"tol", dist.tol_conv}});
            pass = pass && dist.converged;
        }
    }

    fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    fs::create_directories(dir);
    std::ofstream csv(dir / "trajectory.csv");
    write_trajectory_csv(csv, traj);
    nlohmann::json manifest;
    manifest["config_hash"] = config_hash(cfg.raw);
    manifest["tolerances"] = {{"eq_rel", cfg.tol.eq_rel}, {"psd_rel", cfg.tol.psd_rel},
                              {"pd_abs", cfg.tol.pd_abs}, {"tol_conv", cfg.tol_conv}};
    manifest["checks"] = checks;
    manifest["pass"] = pass;
    std::ofstream man(dir / "manifest.json");
    man << manifest.dump(2) << "\n";
    return pass ? kExitPass : kExitChecksFailed;
}

int cmd_design(const ExperimentConfig& cfg, const std::string& out_path, std::uint64_t seed) {
    if (!cfg.design_problem) throw ConfigError("design needs a design section");
    DesignProblem problem = *cfg.design_problem;
    if (seed != 0) problem.seed = seed;
    DesignOutcome outcome = design(problem);
    nlohmann::json j = design_outcome_json(outcome);
    j["config_hash"] = config_hash(cfg.raw);
    emit(j, out_path);
    return outcome.feasible() ? kExitPass : kExitChecksFailed;
}

int cmd_reproduce(const std::string& id, const std::string& out_dir) {
    auto ids = reproduce_ids();
    std::vector<std::string> todo;
    if (id == "all") {
        todo = ids;
    } else if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
        todo.push_back(id);
    } else {
        std::cerr << "unknown experiment id '" << id << "'; valid ids:";
        for (const auto& k : ids) std::cerr << " " << k;
        std::cerr << "\n";
        return kExitConfigError;
    }

    fs::path base = out_dir.empty() ? fs::path("reproduce_out") : fs::path(out_dir);
    std::vector<std::future<ReproOutcome>> futs;
    for (const auto& k : todo)
        futs.push_back(std::async(std::launch::async,
                                  [k, base] { return run_reproduce(k, base / k); }));
    bool all_pass = true;
    for (std::size_t i = 0; i < todo.size(); ++i) {
        ReproOutcome out = futs[i].get();
        for (const auto& c : out.checks)
            std::cout << todo[i] << ": " << c.name << " " << (c.pass ? "PASS" : "FAIL")
                      << " (value=" << c.value << ", tol=" << c.tol << ")\n";
        all_pass = all_pass && out.pass;
    }
    return all_pass ? kExitPass : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Duhem hysteresis storage functions, stability certificates, and "
                 "closed-loop simulation"};
    app.require_subcommand(1);

    std::string config_path, out_path, repro_id;
    std::uint64_t seed = 0;
    TolFlags tol;

    auto* classify_cmd = app.add_subcommand("classify", "classify an operator as CCW/CW");
    classify_cmd->add_option("--config", config_path)->required();
    classify_cmd->add_option("--out", out_path);

    auto* grid_cmd = app.add_subcommand("storage-grid", "emit an H(gamma, v) grid as CSV");
    grid_cmd->add_option("--config", config_path)->required();
    grid_cmd->add_option("--out", out_path);
    add_tol_flags(grid_cmd, tol);

    auto* certify_cmd = app.add_subcommand("certify", "verify a stability certificate");
    certify_cmd->add_option("--config", config_path)->required();
    certify_cmd->add_option("--out", out_path);
    add_tol_flags(certify_cmd, tol);

    auto* sim_cmd = app.add_subcommand("simulate", "integrate the closed loop");
    sim_cmd->add_option("--config", config_path)->required();
    sim_cmd->add_option("--out", out_path);
    add_tol_flags(sim_cmd, tol);

    auto* design_cmd = app.add_subcommand("design", "search controllers and certificates");
    design_cmd->add_option("--config", config_path)->required();
    design_cmd->add_option("--out", out_path);
    design_cmd->add_option("--seed", seed);
    add_tol_flags(design_cmd, tol);

    auto* repro_cmd = app.add_subcommand("reproduce", "run a built-in experiment end to end");
    repro_cmd->add_option("id", repro_id, "experiment id or 'all'")->required();
    repro_cmd->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(classify_cmd)) return cmd_classify(config_path, out_path);
        if (app.got_subcommand(grid_cmd)) {
            ExperimentConfig cfg = load_config(config_path);
            tol.apply(cfg);
            return cmd_storage_grid(cfg, out_path);
        }
        if (app.got_subcommand(certify_cmd)) {
            ExperimentConfig cfg = load_config(config_path);
            tol.apply(cfg);
            return cmd_certify(cfg, out_path);
        }
        if (app.got_subcommand(sim_cmd)) {
            ExperimentConfig cfg = load_config(config_path);
            tol.apply(cfg);
            return cmd_simulate(cfg, out_path);
        }
        if (app.got_subcommand(design_cmd)) {
            ExperimentConfig cfg = load_config(config_path);
            tol.apply(cfg);
            return cmd_design(cfg, out_path, seed);
        }
        if (app.got_subcommand(repro_cmd)) return cmd_reproduce(repro_id, out_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}
