#include "relnet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace relnet {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvFile {
    std::ofstream out;
    explicit CsvFile(const std::filesystem::path& p) : out(p) {
        if (!out) throw ScenarioError(kExitSchema, "cannot open output file " + p.string());
    }
    void comment(const std::string& text) { out << "# " << text << "\n"; }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << "\n";
    }
};

// The published probability table's scenario; noise is calibrated once from
// the direct link at SINR threshold 0.2.
PhyGeometry paper_geometry() { return PhyGeometry{}; }

PhyEnvironment calibrated_env(const PhyGeometry& geom, double sinr, double target) {
    LinkSpec direct;
    direct.tx_power_w = geom.user_tx_power_w;
    direct.distance_m = geom.user_dest_distance_m;
    direct.pathloss_exponent = geom.pathloss_exponent;
    const double nu = calibrate_noise(target, direct, 0.2);
    return PhyEnvironment{nu, sinr};
}

// N-user tables with the conventions that reproduce the published figures:
// destination reception degrades with the interferer count, relay reception
// uses the single-transmitter value.
struct NUserTables {
    std::vector<double> ps_d, ps_r;
};

NUserTables nuser_tables(const PhyGeometry& geom, double sinr, double target, int N) {
    const PhyEnvironment env = calibrated_env(geom, sinr, target);
    LinkSpec d, r;
    d.tx_power_w = geom.user_tx_power_w;
    d.distance_m = geom.user_dest_distance_m;
    d.pathloss_exponent = geom.pathloss_exponent;
    r.tx_power_w = geom.user_tx_power_w;
    r.distance_m = geom.user_relay_distance_m;
    r.pathloss_exponent = geom.pathloss_exponent;
    const double pd1 = rayleigh_success(d, env);
    const double pr1 = rayleigh_success(r, env);
    NUserTables t;
    for (int i = 1; i <= N; ++i) {
        t.ps_d.push_back(pd1 / std::pow(1.0 + sinr, i - 1));
        t.ps_r.push_back(pr1);
    }
    return t;
}

SystemParams paper_symmetric_params() {
    SystemParams p;
    p.t1 = p.t2 = 0.1;
    p.alpha1 = p.alpha2 = 0.7;
    p.alpha1_star = p.alpha2_star = 1.0;
    p.pa[0][0] = p.pa[0][1] = 0.5;
    p.pa[1][0] = p.pa[1][1] = 0.5;
    return p;
}

NUserInputs paper_nuser_inputs(double sinr, int N) {
    const PhyGeometry geom = paper_geometry();
    const auto tables = nuser_tables(geom, sinr, 0.74, N);
    NUserInputs in;
    in.n_users = N;
    in.t = 0.1;
    in.ps_d = tables.ps_d;
    in.ps_r1 = in.ps_r2 = tables.ps_r;
    in.pa1 = in.pa2 = 0.5;
    in.relay = paper_symmetric_params();
    in.relay_probs = build_success_matrix(geom, calibrated_env(geom, sinr, 0.74), ChannelModel::mpr);
    in.arrivals = NUserArrivalModel::paper_series;
    return in;
}

void write_gnuplot(const std::filesystem::path& dir, const std::string& name,
                   const std::string& body) {
    std::ofstream gp(dir / (name + ".gp"));
    gp << "# gnuplot script for " << name << ".csv\n" << body;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario document
// ---------------------------------------------------------------------------

ScenarioDoc ScenarioDoc::parse_string(const std::string& text, const std::string& name) {
    ScenarioDoc doc;
    doc.name_ = name;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ScenarioError(kExitSchema,
                                    name + ":" + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ScenarioError(kExitSchema,
                                    name + ":" + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ScenarioError(kExitSchema, name + ":" + std::to_string(lineno) +
                                                 ": expected `key = value`, got `" + line + "`");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ScenarioError(kExitSchema, name + ":" + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (doc.values.count(full))
            throw ScenarioError(kExitSchema, name + ":" + std::to_string(lineno) +
                                                 ": duplicate key `" + full + "`");
        doc.values[full] = {value, lineno};
    }
    return doc;
}

ScenarioDoc ScenarioDoc::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ScenarioError(kExitSchema, "cannot read scenario file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path.string());
}

void ScenarioDoc::fail(const std::string& key, const std::string& what) const {
    auto it = values.find(key);
    const int line = it != values.end() ? it->second.line : 0;
    throw ScenarioError(kExitSchema,
                        name_ + ":" + std::to_string(line) + ": key `" + key + "` " + what);
}

std::string ScenarioDoc::get_string(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) fail(key, "is required but missing");
    return it->second.value;
}

std::string ScenarioDoc::get_string_or(const std::string& key, const std::string& dflt) const {
    auto it = values.find(key);
    return it == values.end() ? dflt : it->second.value;
}

double ScenarioDoc::get_number(const std::string& key) const {
    const std::string v = get_string(key);
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail(key, "has a non-numeric value `" + v + "`");
    }
}

double ScenarioDoc::get_number_or(const std::string& key, double dflt) const {
    return has(key) ? get_number(key) : dflt;
}

long long ScenarioDoc::get_int_or(const std::string& key, long long dflt) const {
    if (!has(key)) return dflt;
    const double v = get_number(key);
    if (v != std::floor(v)) fail(key, "must be an integer");
    return (long long)(v);
}

std::vector<double> ScenarioDoc::get_list(const std::string& key) const {
    const std::string v = get_string(key);
    std::vector<double> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail(key, "has a non-numeric list item `" + item + "`");
        }
    }
    if (out.empty()) fail(key, "is an empty list");
    return out;
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

Scenario Scenario::from_doc(const ScenarioDoc& doc) {
    Scenario sc;
    sc.task = doc.get_string("task");
    static const char* kTasks[] = {"phy-table", "region",   "throughput", "delay-closed-form",
                                   "delay-bvp", "simulate", "probe",      "figure",
                                   "compare"};
    if (std::find_if(std::begin(kTasks), std::end(kTasks),
                     [&](const char* t) { return sc.task == t; }) == std::end(kTasks))
        throw ScenarioError(kExitSchema, "unknown task `" + sc.task + "`");
    if (sc.task == "figure") sc.figure_id = doc.get_string("figure");
    sc.out_dir = doc.get_string_or("out", ".");
    sc.seed = std::uint64_t(doc.get_int_or("seed", 1));
    sc.grid_size = int(doc.get_int_or("grid_size", 512));
    sc.replications = int(doc.get_int_or("reps", 10));

    const bool has_phy = doc.has("phy.sinr_threshold") || doc.has("phy.user_tx_power_w");
    bool has_probs = false;
    for (const auto& [k, v] : doc.values)
        if (k.rfind("probs.", 0) == 0) has_probs = true;
    if (has_phy && has_probs)
        throw ScenarioError(kExitSchema, "[phy] and [probs] are mutually exclusive");

    const std::string chan = doc.get_string_or("phy.channel", doc.get_string_or("probs.channel", "capture"));
    if (chan == "capture") sc.channel = ChannelModel::capture;
    else if (chan == "mpr") sc.channel = ChannelModel::mpr;
    else throw ScenarioError(kExitSchema, "channel must be `capture` or `mpr`");

    if (has_phy || !has_probs) {
        PhyGeometry g;
        g.user_tx_power_w = doc.get_number_or("phy.user_tx_power_w", g.user_tx_power_w);
        g.relay_tx_power_w = doc.get_number_or("phy.relay_tx_power_w", g.relay_tx_power_w);
        g.user_dest_distance_m = doc.get_number_or("phy.user_dest_distance_m", g.user_dest_distance_m);
        g.user_relay_distance_m =
            doc.get_number_or("phy.user_relay_distance_m", g.user_relay_distance_m);
        g.relay_dest_distance_m =
            doc.get_number_or("phy.relay_dest_distance_m", g.relay_dest_distance_m);
        g.pathloss_exponent = doc.get_number_or("phy.pathloss_exponent", g.pathloss_exponent);
        sc.phy = g;
        sc.sinr_threshold = doc.get_number_or("phy.sinr_threshold", 0.2);
        sc.calibration_target = doc.get_number_or("phy.calibration_target", 0.74);
    }
    if (has_probs) {
        SuccessProbabilities s;
        if (doc.has("probs.q")) {
            s = SuccessProbabilities::symmetric_capture(
                doc.get_number("probs.q"), doc.get_number_or("probs.q_tilde", 0.2),
                doc.get_number("probs.r"), doc.get_number("probs.s_bar"),
                doc.get_number("probs.s_tilde"), doc.get_number("probs.s_12"));
        } else {
            auto need = [&](const std::string& k) { return doc.get_number("probs." + k); };
            s.channel = sc.channel;
            for (int k = 0; k < 2; ++k) {
                const std::string u = std::to_string(k + 1);
                s.ps_d_only[k] = need("ps_d_only_" + u);
                s.ps_d_both[k] = need("ps_d_both_" + u);
                for (int i = 0; i < 2; ++i) {
                    const std::string ri = std::to_string(i + 1);
                    s.ps_r_single[k][i] = doc.get_number_or("probs.ps_r_single_" + u + "_" + ri, 0.0);
                    s.ps_r_bothfail[k][i] =
                        doc.get_number_or("probs.ps_r_bothfail_" + u + "_" + ri, 0.0);
                    s.ps_r_capture[k][i] =
                        doc.get_number_or("probs.ps_r_capture_" + u + "_" + ri, 0.0);
                }
            }
            for (int i = 0; i < 2; ++i) {
                const std::string ri = std::to_string(i + 1);
                s.ps_rd_single[i] = need("ps_rd_single_" + ri);
                s.ps_rd_alone[i] = need("ps_rd_alone_" + ri);
                s.ps_rd_both[i] = need("ps_rd_both_" + ri);
            }
            s.ps_d_none = 1.0 - s.ps_d_both[0] - s.ps_d_both[1];
            for (int i = 0; i < 2; ++i)
                s.ps_r_bothfail_none[i] = 1.0 - s.ps_r_bothfail[0][i] - s.ps_r_bothfail[1][i];
        }
        try {
            s.validate();
        } catch (const std::exception& e) {
            throw ScenarioError(kExitSchema, std::string("[probs] invalid: ") + e.what());
        }
        sc.probs_override = s;
    }

    SystemParams& p = sc.params;
    p.t1 = doc.get_number_or("params.t1", 0.1);
    p.t2 = doc.get_number_or("params.t2", 0.1);
    p.alpha1 = doc.get_number_or("params.alpha1", 0.7);
    p.alpha2 = doc.get_number_or("params.alpha2", 0.7);
    p.alpha1_star = doc.get_number_or("params.alpha1_star", 1.0);
    p.alpha2_star = doc.get_number_or("params.alpha2_star", 1.0);
    p.lambda_hat1 = doc.get_number_or("params.lambda_hat_1", 0.0);
    p.lambda_hat2 = doc.get_number_or("params.lambda_hat_2", 0.0);
    p.pa[0][0] = doc.get_number_or("params.pa_1_1", 0.5);
    p.pa[0][1] = doc.get_number_or("params.pa_1_2", 0.5);
    p.pa[1][0] = doc.get_number_or("params.pa_2_1", 0.5);
    p.pa[1][1] = doc.get_number_or("params.pa_2_2", 0.5);
    p.n_users = int(doc.get_int_or("params.n_users", 2));
    const std::string storage = doc.get_string_or("params.storage", "exclusive");
    if (storage == "exclusive") p.storage = StorageMode::exclusive;
    else if (storage == "duplicate") p.storage = StorageMode::duplicate;
    else throw ScenarioError(kExitSchema, "storage must be `exclusive` or `duplicate`");
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ScenarioError(kExitSchema, std::string("[params] invalid: ") + e.what());
    }

    sc.horizon = std::uint64_t(doc.get_int_or("sim.horizon_slots", 1'000'000));
    sc.warmup = std::uint64_t(doc.get_int_or("sim.warmup_slots", 10'000));
    sc.replications = int(doc.get_int_or("sim.replications", sc.replications));
    sc.probe_dir1 = doc.get_number_or("probe.direction_1", 1.0);
    sc.probe_dir2 = doc.get_number_or("probe.direction_2", 0.0);
    for (const auto& [k, v] : doc.values)
        if (k.rfind("grid.", 0) == 0) sc.grid[k.substr(5)] = doc.get_list(k);
    sc.compare_analytic = doc.get_string_or("compare.analytic", "delay-closed-form");
    sc.compare_simulated = doc.get_string_or("compare.simulated", "simulate");
    sc.compare_tolerance = doc.get_number_or("compare.tolerance_rel", 0.02);
    return sc;
}

Scenario Scenario::load(const std::filesystem::path& path) {
    return from_doc(ScenarioDoc::parse_file(path));
}

SuccessProbabilities Scenario::resolve_probs() const {
    if (probs_override) return *probs_override;
    const PhyGeometry g = phy.value_or(paper_geometry());
    return build_success_matrix(g, calibrated_env(g, sinr_threshold, calibration_target), channel);
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

namespace {

void task_phy_table(const Scenario& sc) {
    const PhyGeometry g = sc.phy.value_or(paper_geometry());
    CsvFile csv(sc.out_dir / "phy_table.csv");
    csv.comment("link success probabilities; noise " +
                fmt(calibrated_env(g, sc.sinr_threshold, sc.calibration_target).noise_power_w) +
                " W calibrated from P_s(D,1) = " + fmt(sc.calibration_target) +
                " at threshold 0.2; powers W, distances m, pathloss exponent " +
                fmt(g.pathloss_exponent));
    csv.row({"sinr_threshold", "ps_d_1", "ps_r_1", "ps_rd_single", "ps_rd_pair_marginal"});
    for (double gam : {0.2, 1.0}) {
        const PhyEnvironment env = calibrated_env(g, gam, sc.calibration_target);
        LinkSpec d{g.user_tx_power_w, g.user_dest_distance_m, g.pathloss_exponent, {}};
        LinkSpec r{g.user_tx_power_w, g.user_relay_distance_m, g.pathloss_exponent, {}};
        LinkSpec rd{g.relay_tx_power_w, g.relay_dest_distance_m, g.pathloss_exponent, {}};
        LinkSpec rdp{g.relay_tx_power_w,
                     g.relay_dest_distance_m,
                     g.pathloss_exponent,
                     {{g.relay_tx_power_w, g.relay_dest_distance_m}}};
        const PhyEnvironment envp =
            g.interference_limited_relay_pair ? PhyEnvironment{0.0, gam} : env;
        csv.row({fmt(gam), fmt(rayleigh_success(d, env)), fmt(rayleigh_success(r, env)),
                 fmt(rayleigh_success(rd, env)), fmt(rayleigh_success(rdp, envp))});
    }
}

void write_region_csv(CsvFile& csv, const std::string& label, const StabilityRegion& reg) {
    const auto poly = reg.polygon();
    for (const auto& [x, y] : poly)
        csv.row({label, fmt(x), fmt(y), reg.convex ? "convex" : "nonconvex"});
}

void task_region(const Scenario& sc) {
    const auto probs = sc.resolve_probs();
    const auto c = derive_coefficients(sc.params, probs);
    const auto reg = stability_region_two_user(c);
    CsvFile csv(sc.out_dir / "region.csv");
    csv.comment("two-user stability region polygon; arrival rates in packets/slot");
    csv.row({"label", "lambda1", "lambda2", "convexity"});
    write_region_csv(csv, "region", reg);
}

void task_throughput(const Scenario& sc) {
    const auto probs = sc.resolve_probs();
    const auto rep = throughput_two_user(sc.params, probs);
    CsvFile csv(sc.out_dir / "throughput.csv");
    csv.comment("two-user throughput split, packets/slot");
    csv.row({"T1_D", "T1_R", "T1", "T2_D", "T2_R", "T2", "T_aggregate", "inside_region"});
    csv.row({fmt(rep.T1_D), fmt(rep.T1_R), fmt(rep.T1), fmt(rep.T2_D), fmt(rep.T2_R), fmt(rep.T2),
             fmt(rep.T_aggregate), rep.inside_stability_region ? "1" : "0"});
    if (!rep.inside_stability_region)
        throw ScenarioError(kExitDomain, "arrival rates lie outside the stability region");
}

SymmetricParams symmetric_from_scenario(const Scenario& sc) {
    const auto probs = sc.resolve_probs();
    const auto& p = sc.params;
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
    if (!near(p.t1, p.t2) || !near(p.alpha1, p.alpha2) || !near(p.alpha1_star, p.alpha2_star) ||
        !near(p.lambda_hat1, p.lambda_hat2))
        throw ScenarioError(kExitDomain, "closed-form delay needs a symmetric configuration");
    SymmetricParams s;
    s.lambda_hat = p.lambda_hat1;
    s.t = p.t1;
    s.alpha = p.alpha1;
    s.alpha_star = p.alpha1_star;
    s.q = probs.ps_d_only[0];
    s.r = probs.ps_r_single[0][0];
    s.s_bar = probs.ps_rd_single[0];
    s.s_tilde = probs.ps_rd_alone[0];
    s.s12 = probs.ps_rd_both[0];
    return s;
}

void task_delay_closed_form(const Scenario& sc) {
    const SymmetricParams s = symmetric_from_scenario(sc);
    SymmetricDelay d;
    try {
        d = symmetric_delay_closed_form(s);
    } catch (const std::domain_error& e) {
        throw ScenarioError(kExitDomain, e.what());
    }
    CsvFile csv(sc.out_dir / "delay_closed_form.csv");
    csv.comment("symmetric closed-form relay queue metrics");
    csv.row({"E_packets", "D_slots", "lambda", "service"});
    csv.row({fmt(d.E), fmt(d.D), fmt(d.lambda), fmt(d.service)});
}

void task_delay_bvp(const Scenario& sc) {
    if (sc.grid_size < 8 || sc.grid_size % 2 != 0)
        throw ScenarioError(kExitSchema, "grid_size must be even and at least 8");
    const auto probs = sc.resolve_probs();
    if (probs.channel != ChannelModel::capture)
        throw ScenarioError(kExitDomain, "the delay model needs capture-channel probabilities");
    BvpSolution sol;
    try {
        sol = solve_bvp(sc.params, probs, BvpOptions{sc.grid_size, 1e-6, 1e-9});
    } catch (const std::domain_error& e) {
        throw ScenarioError(kExitDomain, e.what());
    }
    CsvFile csv(sc.out_dir / "delay_bvp.csv");
    csv.comment("boundary-value solution; E packets, D slots");
    csv.row({"case", "chi", "pole_r", "H00", "H10", "H01", "E1", "E2", "D1", "D2", "consv_r1",
             "consv_r2"});
    csv.row({sol.kind == CaseKind::dirichlet ? "dirichlet" : "riemann-hilbert",
             std::to_string(sol.chi), std::to_string(sol.pole_r), fmt(sol.H00), fmt(sol.H10),
             fmt(sol.H01), fmt(sol.E1), fmt(sol.E2), fmt(sol.D1), fmt(sol.D2), fmt(sol.consv_r1),
             fmt(sol.consv_r2)});
    if (sc.verbose) dump_solution_artifacts(sol, (sc.out_dir / "bvp_debug").string());
}

void task_simulate(const Scenario& sc) {
    SimConfig cfg;
    cfg.params = sc.params;
    cfg.probs = sc.resolve_probs();
    cfg.mode = sc.params.n_users > 2 ? SimMode::n_user_symmetric : SimMode::two_user_asymmetric;
    if (cfg.mode == SimMode::n_user_symmetric) {
        const auto t = nuser_tables(sc.phy.value_or(paper_geometry()), sc.sinr_threshold,
                                    sc.calibration_target, sc.params.n_users);
        cfg.nuser_ps_d = t.ps_d;
        cfg.nuser_ps_r1 = cfg.nuser_ps_r2 = t.ps_r;
    }
    cfg.horizon = sc.horizon;
    cfg.warmup = sc.warmup;
    cfg.replications = sc.replications;
    cfg.seed = sc.seed;
    const SimStats st = run(cfg);
    CsvFile csv(sc.out_dir / "simulate.csv");
    csv.comment("slot-level simulation, " + std::to_string(st.slots_counted) +
                " measured slots, seed " + std::to_string(sc.seed));
    csv.row({"metric", "relay1", "relay1_ci", "relay2", "relay2_ci"});
    auto r = [&](const char* name, const EstimateCI& a, const EstimateCI& b) {
        csv.row({name, fmt(a.value), fmt(a.half_width), fmt(b.value), fmt(b.half_width)});
    };
    r("mean_queue", st.mean_queue[0], st.mean_queue[1]);
    r("delay", st.delay[0], st.delay[1]);
    r("pr_empty", st.pr_empty[0], st.pr_empty[1]);
    r("arrival_rate", st.arrival_rate[0], st.arrival_rate[1]);
    r("thr_direct_user", st.throughput_direct[0], st.throughput_direct[1]);
    r("thr_relayed_user", st.throughput_relayed[0], st.throughput_relayed[1]);
    csv.row({"pr_both_empty", fmt(st.pr_both_empty.value), fmt(st.pr_both_empty.half_width), "", ""});
    csv.row({"drift_slope", fmt(st.drift_slope[0]), "", fmt(st.drift_slope[1]), ""});
    csv.row({"unstable", st.unstable ? "1" : "0", "", "", ""});
    csv.row({"conservation_ok", st.conservation_ok ? "1" : "0", "", "", ""});
}

void task_probe(const Scenario& sc) {
    SimConfig cfg;
    cfg.params = sc.params;
    cfg.probs = sc.resolve_probs();
    cfg.horizon = sc.horizon;
    cfg.warmup = sc.warmup;
    cfg.replications = std::max(1, sc.replications / 2);
    cfg.seed = sc.seed;
    const double radius = region_probe(cfg, sc.probe_dir1, sc.probe_dir2);
    const auto c = derive_coefficients(sc.params, cfg.probs);
    const auto reg = stability_region_two_user(c);
    const double analytic = reg.boundary_radius(sc.probe_dir1, sc.probe_dir2);
    CsvFile csv(sc.out_dir / "probe.csv");
    csv.comment("empirical stability frontier along a direction in (lambda_hat_1, lambda_hat_2)");
    csv.row({"dir1", "dir2", "empirical_radius", "analytic_radius"});
    csv.row({fmt(sc.probe_dir1), fmt(sc.probe_dir2), fmt(radius), fmt(analytic)});
}

// --- figures ----------------------------------------------------------------

void figure_stability(const Scenario& sc, double sinr, const std::string& name) {
    CsvFile csv(sc.out_dir / (name + ".csv"));
    csv.comment("stability region polygons vs user count; SINR threshold " + fmt(sinr) +
                "; t=0.1 alpha=0.7 alpha*=1 pa=0.5; geometry: powers 1mW/10mW, distances "
                "110m/80m/80m, pathloss 4; rates packets/slot");
    csv.row({"N", "lambda1", "lambda2", "convexity", "stable_at_endogenous_load"});
    for (int N = 1; N <= 11; ++N) {
        const auto rep = symmetric_n_user(paper_nuser_inputs(sinr, N));
        for (const auto& [x, y] : rep.region.polygon())
            csv.row({std::to_string(N), fmt(x), fmt(y), rep.region.convex ? "convex" : "nonconvex",
                     rep.relays_stable ? "1" : "0"});
    }
    write_gnuplot(sc.out_dir, name,
                  "set datafile separator ','\nset key off\nset xlabel 'lambda_1'\n"
                  "set ylabel 'lambda_2'\nplot for [n=1:11] '" + name +
                      ".csv' using 2:($1==n?$3:1/0) with lines\n");
}

void figure_throughput(const Scenario& sc, bool aggregate) {
    const std::string name = aggregate ? "thr-aggregate" : "thr-user";
    CsvFile csv(sc.out_dir / (name + ".csv"));
    csv.comment("throughput vs user count, pure relays (lambda_hat = 0); packets/slot");
    csv.row({"sinr_threshold", "N", aggregate ? "aggregate" : "per_user", "relays_stable"});
    for (double sinr : {0.2, 1.0}) {
        for (int N = 1; N <= 15; ++N) {
            const auto rep = symmetric_n_user(paper_nuser_inputs(sinr, N));
            csv.row({fmt(sinr), std::to_string(N),
                     fmt(aggregate ? rep.aggregate : rep.per_user_total),
                     rep.relays_stable ? "1" : "0"});
        }
    }
    write_gnuplot(sc.out_dir, name,
                  "set datafile separator ','\nset xlabel 'N'\nplot '" + name +
                      ".csv' using 2:($1==0.2?$3:1/0) with linespoints title 'SINR 0.2', '" +
                      name + ".csv' using 2:($1==1?$3:1/0) with linespoints title 'SINR 1'\n");
}

void figure_delay_sym(const Scenario& sc, const std::string& name,
                      const std::vector<double>& alphas, const std::vector<double>& alstars,
                      const std::vector<double>& ts, const std::vector<double>& lhats,
                      const std::vector<double>& rs) {
    CsvFile csv(sc.out_dir / (name + ".csv"));
    csv.comment("symmetric closed-form delay; q=0.5 s_bar=0.8 s_tilde=0.9 s_12=0.4; slots");
    csv.row({"alpha", "alpha_star", "t", "lambda_hat", "r", "E_packets", "D_slots", "stable"});
    for (double a : alphas)
        for (double as : alstars)
            for (double t : ts)
                for (double lh : lhats)
                    for (double r : rs) {
                        SymmetricParams p;
                        p.lambda_hat = lh;
                        p.t = t;
                        p.alpha = a;
                        p.alpha_star = std::max(a, as);
                        p.q = 0.5;
                        p.r = r;
                        p.s_bar = 0.8;
                        p.s_tilde = 0.9;
                        p.s12 = 0.4;
                        try {
                            const auto d = symmetric_delay_closed_form(p);
                            csv.row({fmt(a), fmt(p.alpha_star), fmt(t), fmt(lh), fmt(r), fmt(d.E),
                                     fmt(d.D), "1"});
                        } catch (const std::domain_error&) {
                            csv.row({fmt(a), fmt(p.alpha_star), fmt(t), fmt(lh), fmt(r), "", "", "0"});
                        }
                    }
    write_gnuplot(sc.out_dir, name,
                  "set datafile separator ','\nset xlabel 'alpha'\nset ylabel 'D (slots)'\n"
                  "plot '" + name + ".csv' using 1:7 with points\n");
}

void figure_region_sweep(const Scenario& sc, const std::string& name, bool sweep_t1) {
    CsvFile csv(sc.out_dir / (name + ".csv"));
    csv.comment("stability region polygons, capture example: alpha1=0.7 alpha2=0.6 "
                "alpha2*=0.9 P*=0.9 P=0.8 P(pair)=0.4 t2=0.3; rates packets/slot");
    csv.row({"sweep", "lambda1", "lambda2", "convexity"});
    SuccessProbabilities probs;
    probs.channel = ChannelModel::capture;
    for (int k = 0; k < 2; ++k) {
        probs.ps_d_only[k] = 0.5;
        probs.ps_d_both[k] = 0.2;
    }
    probs.ps_d_none = 0.6;
    for (int i = 0; i < 2; ++i) {
        probs.ps_rd_single[i] = 0.8;
        probs.ps_rd_alone[i] = 0.9;
        probs.ps_rd_both[i] = 0.4;
        probs.ps_r_bothfail_none[i] = 1.0;
    }
    SystemParams p;
    p.t2 = 0.3;
    p.alpha1 = 0.7;
    p.alpha2 = 0.6;
    p.alpha2_star = 0.9;
    const std::vector<double> sweep = sweep_t1 ? std::vector<double>{0.2, 0.4}
                                               : std::vector<double>{0.7, 0.9};
    for (double v : sweep) {
        if (sweep_t1) {
            p.t1 = v;
            p.alpha1_star = 0.9;
        } else {
            p.t1 = 0.2;
            p.alpha1_star = v;
        }
        const auto c = derive_coefficients(p, probs);
        const auto reg = stability_region_two_user(c);
        for (const auto& [x, y] : reg.polygon())
            csv.row({fmt(v), fmt(x), fmt(y), reg.convex ? "convex" : "nonconvex"});
    }
    write_gnuplot(sc.out_dir, name,
                  "set datafile separator ','\nset xlabel 'lambda_1'\nset ylabel 'lambda_2'\n"
                  "plot '" + name + ".csv' using 2:3 with lines\n");
}

void task_figure(const Scenario& sc) {
    const std::string& id = sc.figure_id;
    if (id == "stab-gamma02") figure_stability(sc, 0.2, id);
    else if (id == "stab-gamma1") figure_stability(sc, 1.0, id);
    else if (id == "thr-user") figure_throughput(sc, false);
    else if (id == "thr-aggregate") figure_throughput(sc, true);
    else if (id == "delay-sym-r")
        figure_delay_sym(sc, id, {0.5, 0.7, 0.9}, {1.0}, {0.1}, {0.05, 0.1, 0.15}, {0.5, 0.9});
    else if (id == "delay-sym-t")
        figure_delay_sym(sc, id, {0.7}, {1.0}, {0.1, 0.2, 0.3, 0.4}, {0.1, 0.15}, {0.9});
    else if (id == "delay-sym-alphastar")
        figure_delay_sym(sc, id, {0.7}, {0.7, 0.8, 0.9, 1.0}, {0.3, 0.4}, {0.05, 0.1}, {0.9});
    else if (id == "region-t1") figure_region_sweep(sc, id, true);
    else if (id == "region-alpha1star") figure_region_sweep(sc, id, false);
    else
        throw ScenarioError(kExitSchema, "unknown figure id `" + id + "`");
}

int task_compare(const Scenario& sc) {
    if (sc.grid.empty()) throw ScenarioError(kExitSchema, "compare needs a non-empty [grid]");
    if (sc.compare_simulated != "simulate")
        throw ScenarioError(kExitSchema, "compare supports simulated = `simulate` only");
    const bool use_bvp = sc.compare_analytic == "delay-bvp";
    if (!use_bvp && sc.compare_analytic != "delay-closed-form")
        throw ScenarioError(kExitSchema,
                            "compare supports analytic = `delay-closed-form` or `delay-bvp`");
    auto grid_of = [&](const char* key, double dflt) {
        auto it = sc.grid.find(key);
        return it != sc.grid.end() ? it->second : std::vector<double>{dflt};
    };
    const auto alphas = grid_of("alpha", sc.params.alpha1);
    const auto lhats = grid_of("lambda_hat", sc.params.lambda_hat1);
    const auto rs = grid_of("r", 0.9);
    const SuccessProbabilities base = sc.resolve_probs();
    if (base.channel != ChannelModel::capture)
        throw ScenarioError(kExitDomain, "compare runs on the capture-channel delay model");

    CsvFile csv(sc.out_dir / "compare.csv");
    csv.comment("analytic (" + sc.compare_analytic + ") vs simulation; tolerance " +
                fmt(sc.compare_tolerance));
    csv.row({"alpha", "lambda_hat", "r", "D_analytic", "D_sim", "D_sim_ci", "rel_err",
             "within_tolerance", "ci_covers"});
    bool all_ok = true;
    std::uint64_t point = 0;
    for (double a : alphas)
        for (double lh : lhats)
            for (double r : rs) {
                SystemParams p = sc.params;
                p.alpha1 = p.alpha2 = a;
                p.lambda_hat1 = p.lambda_hat2 = lh;
                SuccessProbabilities probs = SuccessProbabilities::symmetric_capture(
                    base.ps_d_only[0], base.ps_d_both[0], r, base.ps_rd_single[0],
                    base.ps_rd_alone[0], base.ps_rd_both[0]);
                double Dana;
                if (use_bvp) {
                    const auto sol = solve_bvp(p, probs, BvpOptions{sc.grid_size, 1e-6, 1e-9});
                    Dana = sol.D1;
                } else {
                    SymmetricParams s;
                    s.lambda_hat = lh;
                    s.t = p.t1;
                    s.alpha = a;
                    s.alpha_star = p.alpha1_star;
                    s.q = probs.ps_d_only[0];
                    s.r = r;
                    s.s_bar = probs.ps_rd_single[0];
                    s.s_tilde = probs.ps_rd_alone[0];
                    s.s12 = probs.ps_rd_both[0];
                    Dana = symmetric_delay_closed_form(s).D;
                }
                SimConfig cfg;
                cfg.params = p;
                cfg.probs = probs;
                cfg.horizon = sc.horizon;
                cfg.warmup = sc.warmup;
                cfg.replications = sc.replications;
                cfg.seed = SlotRng::substream(sc.seed, point++);
                const SimStats st = run(cfg);
                const double Dsim = 0.5 * (st.delay[0].value + st.delay[1].value);
                const double ci = 0.5 * (st.delay[0].half_width + st.delay[1].half_width);
                const double rel = std::abs(Dsim - Dana) / Dana;
                const bool ok = rel <= sc.compare_tolerance;
                const bool covers = std::abs(Dsim - Dana) <= 2.0 * std::max(ci, 1e-12);
                all_ok = all_ok && ok;
                csv.row({fmt(a), fmt(lh), fmt(r), fmt(Dana), fmt(Dsim), fmt(ci), fmt(rel),
                         ok ? "1" : "0", covers ? "1" : "0"});
            }
    return all_ok ? kExitOk : kExitCompareFailed;
}

int dispatch(const Scenario& sc) {
    std::filesystem::create_directories(sc.out_dir);
    if (sc.task == "phy-table") task_phy_table(sc);
    else if (sc.task == "region") task_region(sc);
    else if (sc.task == "throughput") task_throughput(sc);
    else if (sc.task == "delay-closed-form") task_delay_closed_form(sc);
    else if (sc.task == "delay-bvp") task_delay_bvp(sc);
    else if (sc.task == "simulate") task_simulate(sc);
    else if (sc.task == "probe") task_probe(sc);
    else if (sc.task == "figure") task_figure(sc);
    else if (sc.task == "compare") return task_compare(sc);
    return kExitOk;
}

Scenario with_overrides(Scenario sc, const CliOverrides& o) {
    if (o.seed) sc.seed = *o.seed;
    if (o.grid_size) sc.grid_size = *o.grid_size;
    if (o.replications) sc.replications = *o.replications;
    if (o.out_dir) sc.out_dir = *o.out_dir;
    sc.verbose = o.verbose;
    return sc;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

}  // namespace

int run_scenario(const std::filesystem::path& path, const CliOverrides& overrides) {
    return guarded([&] { return dispatch(with_overrides(Scenario::load(path), overrides)); });
}

int run_compare(const std::filesystem::path& path, const CliOverrides& overrides) {
    return guarded([&] {
        Scenario sc = with_overrides(Scenario::load(path), overrides);
        sc.task = "compare";
        return dispatch(sc);
    });
}

int run_figure(const std::string& figure_id, const CliOverrides& overrides) {
    return guarded([&] {
        Scenario sc;
        sc.task = "figure";
        sc.figure_id = figure_id;
        sc = with_overrides(std::move(sc), overrides);
        return dispatch(sc);
    });
}

std::vector<std::string> figure_ids() {
    return {"stab-gamma02",  "stab-gamma1",        "thr-user",
            "thr-aggregate", "delay-sym-r",        "delay-sym-t",
            "delay-sym-alphastar", "region-t1",    "region-alpha1star"};
}

}  // namespace relnet
