#include "hystab/config.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>

namespace hystab {

namespace {

using nlohmann::json;

void expect_object(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ConfigError(ctx + " must be an object");
}

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
    expect_object(j, ctx);
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + ctx);
}

double get_num(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key)) throw ConfigError("missing key '" + key + "' in " + ctx);
    if (!j[key].is_number()) throw ConfigError("'" + key + "' in " + ctx + " must be a number");
    return j[key].get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return j[key].get<double>();
}

std::vector<double> get_vec(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + " must be an array of numbers");
    std::vector<double> v;
    for (const auto& x : j) {
        if (!x.is_number()) throw ConfigError(what + " must contain only numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

Rect parse_rect(const json& j, const std::string& ctx) {
    expect_keys(j, {"gamma", "v"}, ctx);
    auto g = get_vec(j.at("gamma"), ctx + ".gamma");
    auto v = get_vec(j.at("v"), ctx + ".v");
    if (g.size() != 2 || v.size() != 2) throw ConfigError(ctx + " ranges must be [lo, hi]");
    Rect r{g[0], g[1], v[0], v[1]};
    if (r.gamma_span() <= 0 || r.v_span() <= 0) throw ConfigError(ctx + " ranges must be increasing");
    return r;
}

DuhemOperator parse_operator(const json& j) {
    expect_keys(j, {"model", "c_alpha", "a", "b", "f_c", "rho", "r", "f1", "f2", "y0", "rect"},
                "operator");
    if (!j.contains("model")) throw ConfigError("operator.model is required");
    std::string model = j.at("model").get<std::string>();
    double y0 = get_num_or(j, "y0", 0.0);

    DuhemOperator op = [&] {
        if (model == "coleman_hodgdon") {
            return DuhemOperator::coleman_hodgdon(get_num(j, "c_alpha", "operator"),
                                                  get_num(j, "a", "operator"),
                                                  get_num(j, "b", "operator"), y0);
        }
        if (model == "dahl") {
            return DuhemOperator::dahl(get_num(j, "f_c", "operator"), get_num(j, "rho", "operator"),
                                       get_num_or(j, "r", 1.0), y0);
        }
        if (model == "affine") {
            // f_i(gamma, v) = c[0]*gamma + c[1]*v + c[2]
            if (!j.contains("f1") || !j.contains("f2") || !j.contains("rect"))
                throw ConfigError("affine operator needs f1, f2 coefficient triples and a rect");
            auto c1 = get_vec(j.at("f1"), "operator.f1");
            auto c2 = get_vec(j.at("f2"), "operator.f2");
            if (c1.size() != 3 || c2.size() != 3)
                throw ConfigError("affine coefficients must be [c_gamma, c_v, c_0]");
            Rect rect = parse_rect(j.at("rect"), "operator.rect");
            auto f1 = [c1](double g, double v) { return c1[0] * g + c1[1] * v + c1[2]; };
            auto f2 = [c2](double g, double v) { return c2[0] * g + c2[1] * v + c2[2]; };
            return DuhemOperator::custom(f1, f2, y0, rect);
        }
        throw ConfigError("unknown operator.model '" + model + "'");
    }();
    if (j.contains("rect") && model != "affine")
        op = op.with_rect(parse_rect(j.at("rect"), "operator.rect"));
    return op;
}

LinearSystem parse_system(const json& j, const std::string& ctx) {
    expect_keys(j, {"A", "B", "C", "D"}, ctx);
    LinearSystem s;
    s.A = matrix_from_json(j.at("A"), ctx + ".A");
    s.B = Matrix::col(get_vec(j.at("B"), ctx + ".B"));
    s.C = Matrix::row(get_vec(j.at("C"), ctx + ".C"));
    s.D = get_num_or(j, "D", 0.0);
    s.validate();
    return s;
}

FeedbackCase parse_case(const std::string& s) {
    if (s == "a") return FeedbackCase::A;
    if (s == "b") return FeedbackCase::B;
    if (s == "c") return FeedbackCase::C;
    if (s == "d") return FeedbackCase::D;
    throw ConfigError("interconnection.case must be one of a, b, c, d");
}

Certificate parse_certificate(const json& j, FeedbackCase fb) {
    expect_keys(j, {"Q", "xi", "P", "L", "delta", "eta"}, "certificate");
    switch (fb) {
        case FeedbackCase::A: {
            CertificateCcwCcw c;
            c.Q = matrix_from_json(j.at("Q"), "certificate.Q");
            c.xi = get_num(j, "xi", "certificate");
            return c;
        }
        case FeedbackCase::B: {
            CertificateCwCcw c;
            c.P = matrix_from_json(j.at("P"), "certificate.P");
            c.L = Matrix::row(get_vec(j.at("L"), "certificate.L"));
            c.delta = get_num(j, "delta", "certificate");
            return c;
        }
        case FeedbackCase::C: {
            CertificateCcwCw c;
            c.Q = matrix_from_json(j.contains("Q") ? j.at("Q") : j.at("P"), "certificate.Q");
            return c;
        }
        default: {
            CertificateCwCw c;
            c.P = matrix_from_json(j.at("P"), "certificate.P");
            c.L = Matrix::row(get_vec(j.at("L"), "certificate.L"));
            c.delta = get_num(j, "delta", "certificate");
            c.eta = get_num(j, "eta", "certificate");
            return c;
        }
    }
}

RunSpec parse_run(const json& j) {
    expect_keys(j, {"x0", "y_phi0", "T", "dt", "output_every"}, "run");
    RunSpec r;
    r.x0 = get_vec(j.at("x0"), "run.x0");
    r.y_phi0 = get_num_or(j, "y_phi0", 0.0);
    r.t_end = get_num(j, "T", "run");
    r.dt = get_num(j, "dt", "run");
    if (!(r.dt > 0)) throw ConfigError("run.dt must be positive");
    if (!(r.t_end > 0)) throw ConfigError("run.T must be positive");
    r.output_every = static_cast<int>(get_num_or(j, "output_every", 10));
    if (r.output_every < 1) throw ConfigError("run.output_every must be >= 1");
    return r;
}

DesignProblem parse_design(const json& j) {
    expect_keys(j, {"plant", "topology", "hysteresis", "candidates", "target_L", "seed"}, "design");
    DesignProblem p;
    p.plant = parse_system(j.at("plant"), "design.plant");
    std::string topo = j.contains("topology") ? j.at("topology").get<std::string>() : "actuator";
    if (topo == "actuator") {
        p.topology = Topology::Actuator;
    } else if (topo == "sensor") {
        p.topology = Topology::Sensor;
    } else {
        throw ConfigError("design.topology must be 'actuator' or 'sensor'");
    }
    const json& h = j.at("hysteresis");
    expect_keys(h, {"type", "fan_samples", "rate_bound"}, "design.hysteresis");
    std::string type = h.at("type").get<std::string>();
    if (type == "ccw") {
        p.hysteresis.orientation = Orientation::CCW;
        for (const auto& s : h.at("fan_samples")) {
            auto pr = get_vec(s, "fan_samples entry");
            if (pr.size() != 2) throw ConfigError("fan_samples entries must be [v, f_an(v)]");
            p.hysteresis.fan_samples.emplace_back(pr[0], pr[1]);
        }
    } else if (type == "cw") {
        p.hysteresis.orientation = Orientation::CW;
        p.hysteresis.rate_bound = get_num(h, "rate_bound", "design.hysteresis");
    } else {
        throw ConfigError("design.hysteresis.type must be 'ccw' or 'cw'");
    }
    for (const auto& c : j.at("candidates")) p.candidates.push_back(parse_system(c, "candidate"));
    if (j.contains("target_L")) p.target_L = Matrix::row(get_vec(j.at("target_L"), "target_L"));
    p.seed = static_cast<std::uint64_t>(get_num_or(j, "seed", 1.0));
    return p;
}

}  // namespace

Matrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty 2-d array");
    Matrix m;
    std::size_t cols = 0;
    for (std::size_t i = 0; i < j.size(); ++i) {
        auto row = get_vec(j[i], what + " row");
        if (i == 0) {
            cols = row.size();
            m = Matrix(j.size(), cols);
        } else if (row.size() != cols) {
            throw ConfigError(what + " rows have inconsistent lengths");
        }
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = row[k];
    }
    return m;
}

LinearSystem ExperimentConfig::effective_system() const {
    if (!system) throw ConfigError("config has no system section");
    if (controller) {
        Topology t = topology.value_or(Topology::Actuator);
        return cascade(*system, *controller, t);
    }
    return *system;
}

ExperimentConfig parse_config_impl(const nlohmann::json& j);

ExperimentConfig parse_config(const nlohmann::json& j) {
    try {
        return parse_config_impl(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config structure error: ") + e.what());
    }
}

ExperimentConfig parse_config_impl(const nlohmann::json& j) {
    expect_keys(j,
                {"operator", "system", "controller", "topology", "interconnection", "certificate",
                 "run", "tolerances", "assert_class", "storage_grid", "design"},
                "config");
    ExperimentConfig cfg;
    cfg.raw = j;

    if (j.contains("operator")) cfg.op = parse_operator(j.at("operator"));
    if (j.contains("system")) cfg.system = parse_system(j.at("system"), "system");
    if (j.contains("controller")) cfg.controller = parse_system(j.at("controller"), "controller");
    if (j.contains("topology")) {
        std::string t = j.at("topology").get<std::string>();
        if (t == "actuator") {
            cfg.topology = Topology::Actuator;
        } else if (t == "sensor") {
            cfg.topology = Topology::Sensor;
        } else {
            throw ConfigError("topology must be 'actuator' or 'sensor'");
        }
    }
    if (j.contains("interconnection")) {
        const json& ic = j.at("interconnection");
        expect_keys(ic, {"sign", "case"}, "interconnection");
        cfg.fb = parse_case(ic.at("case").get<std::string>());
        double s = get_num(ic, "sign", "interconnection");
        if (s != 1.0 && s != -1.0) throw ConfigError("interconnection.sign must be +1 or -1");
        cfg.sign = static_cast<int>(s);
    }
    if (j.contains("certificate")) {
        if (!cfg.fb) throw ConfigError("certificate requires an interconnection.case");
        cfg.certificate = parse_certificate(j.at("certificate"), *cfg.fb);
    }
    if (j.contains("run")) cfg.run = parse_run(j.at("run"));
    if (j.contains("assert_class")) {
        std::string c = j.at("assert_class").get<std::string>();
        if (c == "ccw") {
            cfg.assert_class = Orientation::CCW;
        } else if (c == "cw") {
            cfg.assert_class = Orientation::CW;
        } else {
            throw ConfigError("assert_class must be 'ccw' or 'cw'");
        }
    }
    if (j.contains("storage_grid")) {
        const json& g = j.at("storage_grid");
        expect_keys(g, {"gamma", "v", "route"}, "storage_grid");
        auto gv = get_vec(g.at("gamma"), "storage_grid.gamma");
        auto vv = get_vec(g.at("v"), "storage_grid.v");
        if (gv.size() != 3 || vv.size() != 3)
            throw ConfigError("storage_grid ranges must be [lo, hi, count]");
        StorageGridSpec s;
        s.gamma_lo = gv[0];
        s.gamma_hi = gv[1];
        s.n_gamma = static_cast<int>(gv[2]);
        s.v_lo = vv[0];
        s.v_hi = vv[1];
        s.n_v = static_cast<int>(vv[2]);
        if (g.contains("route")) {
            std::string r = g.at("route").get<std::string>();
            if (r == "closed") {
                s.route = Route::Closed;
            } else if (r == "generic") {
                s.route = Route::Generic;
            } else if (r == "auto") {
                s.route = Route::Auto;
            } else {
                throw ConfigError("storage_grid.route must be auto, closed, or generic");
            }
        }
        cfg.storage_grid = s;
    }
    if (j.contains("tolerances")) {
        const json& t = j.at("tolerances");
        expect_keys(t, {"eq_rel", "psd_rel", "pd_abs", "tol_root", "quad_tol", "tol_conv"},
                    "tolerances");
        cfg.tol.eq_rel = get_num_or(t, "eq_rel", cfg.tol.eq_rel);
        cfg.tol.psd_rel = get_num_or(t, "psd_rel", cfg.tol.psd_rel);
        cfg.tol.pd_abs = get_num_or(t, "pd_abs", cfg.tol.pd_abs);
        cfg.geom.tol_root = get_num_or(t, "tol_root", cfg.geom.tol_root);
        cfg.geom.quad_tol = get_num_or(t, "quad_tol", cfg.geom.quad_tol);
        cfg.tol_conv = get_num_or(t, "tol_conv", cfg.tol_conv);
    }
    if (j.contains("design")) cfg.design_problem = parse_design(j.at("design"));
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

std::string config_hash(const nlohmann::json& j) {
    std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    std::size_t n = traj.x.empty() ? 0 : traj.x.front().size();
    os << "t";
    for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
    os << ",u,y,y_phi,H_cl,invariant_dist\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_double(traj.times[k]);
        for (std::size_t i = 0; i < n; ++i) os << "," << format_double(traj.x[k][i]);
        os << "," << format_double(traj.u[k]) << "," << format_double(traj.y[k]) << ","
           << format_double(traj.y_phi[k]);
        os << "," << (k < traj.h_cl.size() ? format_double(traj.h_cl[k]) : "nan");
        os << "," << (k < traj.invariant_dist.size() ? format_double(traj.invariant_dist[k]) : "nan");
        os << "\n";
    }
}

void write_trace_csv(std::ostream& os, const InputSignal& u, const std::vector<TracePoint>& trace) {
    os << "t,u,y_phi\n";
    for (const auto& p : trace)
        os << format_double(p.t) << "," << format_double(u.value_at(p.t)) << ","
           << format_double(p.y) << "\n";
}

void write_storage_grid_csv(std::ostream& os, const DuhemOperator& op, const StorageGridSpec& grid,
                            const GeomOptions& gopt) {
    GeomOptions opt = gopt;
    opt.route = grid.route;
    StorageEvaluator eval(op, opt);
    const bool ccw = op.orientation() == Orientation::CCW;
    os << "gamma,v,H,branch,intersect\n";
    for (int i = 0; i < grid.n_gamma; ++i) {
        double g = grid.gamma_lo +
                   (grid.gamma_hi - grid.gamma_lo) * i / std::max(1, grid.n_gamma - 1);
        for (int k = 0; k < grid.n_v; ++k) {
            double v = grid.v_lo + (grid.v_hi - grid.v_lo) * k / std::max(1, grid.n_v - 1);
            StorageValue s = ccw ? eval.storage_ccw(g, v) : eval.storage_cw(g, v);
            os << format_double(g) << "," << format_double(v) << "," << format_double(s.value)
               << "," << (s.branch == StorageBranch::Above ? "above" : "below") << ","
               << format_double(s.intersect_point) << "\n";
        }
    }
}

nlohmann::json matrix_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json verify_report_json(const VerifyReport& rep) {
    nlohmann::json j;
    j["pass"] = rep.pass();
    j["flagged"] = rep.flagged;
    j["worst_residual"] = rep.worst_residual();
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : rep.conditions) {
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["residual"] = c.residual;
        jc["tolerance"] = c.tolerance;
        jc["pass"] = c.pass;
        if (!c.note.empty()) jc["note"] = c.note;
        conds.push_back(jc);
    }
    j["conditions"] = conds;
    j["warnings"] = rep.warnings;
    return j;
}

nlohmann::json certificate_json(const Certificate& cert) {
    nlohmann::json j;
    if (const auto* a = std::get_if<CertificateCcwCcw>(&cert)) {
        j["case"] = "a";
        j["Q"] = matrix_json(a->Q);
        j["xi"] = a->xi;
    } else if (const auto* b = std::get_if<CertificateCwCcw>(&cert)) {
        j["case"] = "b";
        j["P"] = matrix_json(b->P);
        j["L"] = matrix_json(b->L);
        j["delta"] = b->delta;
    } else if (const auto* c = std::get_if<CertificateCcwCw>(&cert)) {
        j["case"] = "c";
        j["Q"] = matrix_json(c->Q);
    } else if (const auto* d = std::get_if<CertificateCwCw>(&cert)) {
        j["case"] = "d";
        j["P"] = matrix_json(d->P);
        j["L"] = matrix_json(d->L);
        j["delta"] = d->delta;
        j["eta"] = d->eta;
    }
    return j;
}

nlohmann::json design_outcome_json(const DesignOutcome& outcome) {
    nlohmann::json j;
    j["feasible"] = outcome.feasible();
    j["diagnostics"] = outcome.diagnostics;
    if (outcome.result) {
        const DesignResult& r = *outcome.result;
        j["candidate_index"] = r.candidate_index;
        j["sign"] = r.sign;
        j["case"] = to_string(r.fb);
        j["seed"] = r.seed;
        j["certificate"] = certificate_json(r.certificate);
        j["report"] = verify_report_json(r.report);
        j["controller"] = {{"A", matrix_json(r.controller.A)},
                           {"B", matrix_json(r.controller.B)},
                           {"C", matrix_json(r.controller.C)},
                           {"D", r.controller.D}};
    }
    return j;
}

}  // namespace hystab
