#include "msk/config.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "msk/errors.hpp"
#include "msk/oracle.hpp"

namespace msk {

using nlohmann::json;

ModelSpec preset_model(const std::string& name, double beta, double h, int n) {
    ModelSpec spec;
    spec.beta = beta;
    spec.h = h;
    spec.n = n;
    if (name == "sk") {
        spec.m = 1;
        spec.lambdas = {1.0};
        spec.delta2 = SymMatrix::from_rows({{1.0}});
    } else if (name == "bipartite") {
        spec.m = 2;
        spec.lambdas = {0.5, 0.5};
        spec.delta2 = SymMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    } else if (name == "two-copies") {
        spec.m = 2;
        spec.lambdas = {0.5, 0.5};
        spec.delta2 = SymMatrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
    } else if (name == "convex") {
        spec.m = 2;
        spec.lambdas = {0.5, 0.5};
        spec.delta2 = SymMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}});
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return spec;
}

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown field '" + where + it.key() + "'");
    }
}

ModelSpec parse_model(const json& j) {
    reject_unknown(j, {"m", "lambdas", "delta2", "beta", "h", "n"}, "model.");
    for (const char* f : {"m", "lambdas", "delta2", "beta", "h", "n"})
        if (!j.contains(f)) throw ConfigError(std::string("model.") + f + " is required");
    ModelSpec spec;
    spec.m = j.at("m").get<int>();
    spec.lambdas = j.at("lambdas").get<std::vector<double>>();
    spec.delta2 = SymMatrix::from_rows(j.at("delta2").get<std::vector<std::vector<double>>>());
    spec.beta = j.at("beta").get<double>();
    spec.h = j.at("h").get<double>();
    spec.n = j.at("n").get<int>();
    spec.validate();
    return spec;
}

ChainConfig parse_chain(const json& j) {
    reject_unknown(j, {"n_sweeps", "burn_in_sweeps", "thin", "n_replicas"}, "chain.");
    ChainConfig c;
    if (j.contains("n_sweeps")) c.n_sweeps = j.at("n_sweeps").get<long>();
    if (j.contains("burn_in_sweeps")) c.burn_in_sweeps = j.at("burn_in_sweeps").get<long>();
    if (j.contains("thin")) c.thin = j.at("thin").get<int>();
    if (j.contains("n_replicas")) c.n_replicas = j.at("n_replicas").get<int>();
    if (c.burn_in_sweeps < -1 || c.thin < 1 || c.n_replicas < 1)
        throw ConfigError("chain: burn_in >= 0, thin >= 1, n_replicas >= 1 required");
    return c;
}

} // namespace

ExperimentConfig parse_config(const json& j) {
    reject_unknown(j,
                   {"model", "preset", "beta", "h", "n", "n_list", "n_disorder",
                    "chain", "gamma", "k", "n_eta", "species", "estimator",
                    "max_iter", "tol", "dry_run", "seed"},
                   "");
    ExperimentConfig cfg;
    cfg.echo = j;
    if (j.contains("preset")) {
        if (j.contains("model"))
            throw ConfigError("give either 'preset' or 'model', not both");
        for (const char* f : {"beta", "h", "n"})
            if (!j.contains(f)) throw ConfigError(std::string(f) + " is required with a preset");
        cfg.preset = j.at("preset").get<std::string>();
        cfg.model = preset_model(cfg.preset, j.at("beta").get<double>(),
                                 j.at("h").get<double>(), j.at("n").get<int>());
    } else if (j.contains("model")) {
        cfg.model = parse_model(j.at("model"));
    } else {
        throw ConfigError("config needs a 'model' or a 'preset'");
    }
    cfg.model.validate();

    if (j.contains("n_list")) cfg.n_list = j.at("n_list").get<std::vector<int>>();
    if (j.contains("n_disorder")) cfg.n_disorder = j.at("n_disorder").get<int>();
    if (j.contains("chain")) cfg.chain = parse_chain(j.at("chain"));
    if (j.contains("gamma")) cfg.gamma = j.at("gamma").get<double>();
    if (j.contains("k")) cfg.k = j.at("k").get<int>();
    if (j.contains("n_eta")) cfg.n_eta = j.at("n_eta").get<int>();
    if (j.contains("species")) cfg.species = j.at("species").get<int>();
    if (j.contains("estimator")) cfg.estimator = j.at("estimator").get<std::string>();
    if (j.contains("max_iter")) cfg.max_iter = j.at("max_iter").get<int>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("dry_run")) cfg.dry_run = j.at("dry_run").get<bool>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (cfg.estimator != "mcmc" && cfg.estimator != "exact")
        throw ConfigError("estimator must be 'exact' or 'mcmc'");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in '" + path + "': " + e.what());
    }
    return parse_config(j);
}

namespace {

struct CsvBuilder {
    std::ostringstream out;
    CsvBuilder(const std::string& command, uint64_t seed, const json& echo) {
        out << "# msk-tap v" << kVersion << "\n";
        out << "# command=" << command << "\n";
        out << "# seed=" << seed << "\n";
        out << "# config_hash=" << std::hex
            << std::hash<std::string>{}(echo.dump()) << std::dec << "\n";
    }
    void header(const std::string& h) { out << h << "\n"; }
    template <typename... Ts>
    void row(Ts... vals) {
        bool first = true;
        auto emit = [&](auto v) {
            if (!first) out << ",";
            first = false;
            out << v;
        };
        (emit(vals), ...);
        out << "\n";
    }
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

Estimator parse_estimator(const std::string& s) {
    return s == "exact" ? Estimator::Exact : Estimator::Mcmc;
}

} // namespace

RunReport run(const std::string& command, const ExperimentConfig& cfg,
              std::optional<uint64_t> seed_override, int threads) {
    const auto t_start = std::chrono::steady_clock::now();
    uint64_t seed;
    if (seed_override)
        seed = *seed_override;
    else if (cfg.seed)
        seed = *cfg.seed;
    else
        seed = (static_cast<uint64_t>(std::random_device{}()) << 32) ^
               std::random_device{}();

    const ModelSpec& spec = cfg.model;
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    CsvBuilder csv(command, seed, cfg.echo);
    json res;

    if (command == "beta-c") {
        const double bc = beta_c(spec);
        const auto [b0, alpha] = beta_0(spec);
        csv.header("beta_c,alpha,beta_0");
        csv.row(fmt(bc), alpha, fmt(b0));
        res = {{"beta_c", bc}, {"alpha", alpha}, {"beta_0", b0}};
    } else if (command == "solve-q") {
        const OrderParams op = solve_q(spec, rule);
        csv.header("species,q,beta_c,beta_0,alpha,iterations,residual,outside_proven_regime");
        for (int s = 0; s < spec.m; ++s)
            csv.row(s, fmt(op.q[s]), fmt(op.beta_c), fmt(op.beta_0), op.alpha,
                    op.iterations, fmt(op.residual), op.outside_proven_regime ? 1 : 0);
        res = {{"q", op.q}, {"beta_c", op.beta_c}, {"beta_0", op.beta_0},
               {"alpha", op.alpha}, {"iterations", op.iterations},
               {"residual", op.residual},
               {"outside_proven_regime", op.outside_proven_regime}};
    } else if (command == "sensitivity") {
        const OrderParams op = solve_q(spec, rule);
        const std::vector<double> dq = q_sensitivity(spec, op, rule);
        csv.header("species,q,dq_dbeta");
        for (int s = 0; s < spec.m; ++s) csv.row(s, fmt(op.q[s]), fmt(dq[s]));
        res = {{"q", op.q}, {"dq_dbeta", dq}};
    } else if (command == "oracle") {
        const SpeciesLayout layout = build_layout(spec);
        const DisorderSample dis = sample_disorder(spec, layout, seed);
        const GibbsTable table = enumerate_gibbs(spec, layout, dis);
        const std::vector<double> mags = magnetizations(table);
        csv.header("spin,species,magnetization");
        for (int i = 0; i < spec.n; ++i)
            csv.row(i, layout.species_of[i], fmt(mags[i]));
        res = {{"log_z", table.log_z}, {"magnetizations", mags}};
    } else if (command == "mcmc") {
        const SpeciesLayout layout = build_layout(spec);
        const DisorderSample dis = sample_disorder(spec, layout, seed);
        ChainConfig chain = cfg.chain;
        chain.seed = SplitRng(seed, 7).next_u64();
        const McmcEstimate est = estimate(spec, layout, dis, chain);
        csv.header("spin,species,magnetization,se");
        for (int i = 0; i < spec.n; ++i)
            csv.row(i, layout.species_of[i], fmt(est.magnetizations[i]),
                    fmt(est.magnetization_se[i]));
        res = {{"magnetizations", est.magnetizations},
               {"magnetization_se", est.magnetization_se},
               {"overlap_mean", est.overlap_mean},
               {"overlap_se", est.overlap_se},
               {"burn_in_used", est.burn_in_used},
               {"flip_fraction", est.flip_fraction}};
    } else if (command == "tap-check") {
        const SpeciesLayout layout = build_layout(spec);
        const DisorderSample dis = sample_disorder(spec, layout, seed);
        const OrderParams op = solve_q(spec, rule);
        ChainConfig chain = cfg.chain;
        chain.seed = SplitRng(seed, 7).next_u64();
        std::vector<double> mags;
        if (parse_estimator(cfg.estimator) == Estimator::Exact)
            mags = magnetizations(enumerate_gibbs(spec, layout, dis));
        else
            mags = estimate(spec, layout, dis, chain).magnetizations;
        const TapReport rep = tap_residuals(spec, layout, dis, mags, op.q);
        csv.header("n,beta_over_beta0,moment2,moment4");
        csv.row(rep.n, fmt(rep.beta_over_beta0), fmt(rep.moment2), fmt(rep.moment4));
        res = {{"onsager", rep.onsager}, {"moment2", rep.moment2},
               {"moment4", rep.moment4}, {"beta_over_beta0", rep.beta_over_beta0}};
    } else if (command == "tap-iterate") {
        const SpeciesLayout layout = build_layout(spec);
        const DisorderSample dis = sample_disorder(spec, layout, seed);
        const OrderParams op = solve_q(spec, rule);
        const TapIterateResult it =
            tap_iterate(spec, layout, dis, op.q, cfg.max_iter, cfg.tol);
        csv.header("spin,magnetization");
        for (int i = 0; i < spec.n; ++i) csv.row(i, fmt(it.magnetizations[i]));
        res = {{"converged", it.converged}, {"iterations", it.iterations},
               {"last_delta", it.last_delta},
               {"magnetizations", it.magnetizations}};
    } else if (command == "cavity-check") {
        const SpeciesLayout layout = build_layout(spec);
        const OrderParams op = solve_q(spec, rule);
        double mom_t = 0.0, mom_o = 0.0, se_t = 0.0, se_o = 0.0;
        for (int d = 0; d < cfg.n_disorder; ++d) {
            const uint64_t ds = SplitRng(seed, d + 1).next_u64();
            const DisorderSample dis = sample_disorder(spec, layout, ds);
            const CavityProbe p =
                cavity_check(spec, layout, dis, op.q, cfg.species, cfg.k,
                             cfg.n_eta, SplitRng(ds, 3).next_u64());
            mom_t += p.moment_tanh;
            mom_o += p.moment_onsager;
            se_t += p.se_tanh * p.se_tanh;
            se_o += p.se_onsager * p.se_onsager;
        }
        mom_t /= cfg.n_disorder;
        mom_o /= cfg.n_disorder;
        se_t = std::sqrt(se_t) / cfg.n_disorder;
        se_o = std::sqrt(se_o) / cfg.n_disorder;
        csv.header("n,species,k,moment_tanh,se_tanh,moment_onsager,se_onsager");
        csv.row(spec.n, cfg.species, cfg.k, fmt(mom_t), fmt(se_t), fmt(mom_o), fmt(se_o));
        res = {{"moment_tanh", mom_t}, {"se_tanh", se_t},
               {"moment_onsager", mom_o}, {"se_onsager", se_o}};
    } else if (command == "concentration") {
        const SpeciesLayout layout = build_layout(spec);
        const OrderParams op = solve_q(spec, rule);
        const double gamma =
            cfg.gamma ? *cfg.gamma
                      : 0.25 * (op.beta_c * op.beta_c -
                                4.0 * op.alpha * spec.beta * spec.beta);
        const ConcentrationReport rep = concentration_bound_check(
            spec, layout, op, gamma, cfg.n_disorder, seed, threads);
        csv.header("n,gamma,mean,se,bound,pass");
        csv.row(spec.n, fmt(rep.gamma), fmt(rep.mean), fmt(rep.se), fmt(rep.bound),
                rep.pass ? 1 : 0);
        res = {{"gamma", rep.gamma}, {"mean", rep.mean}, {"se", rep.se},
               {"bound", rep.bound}, {"pass", rep.pass}};
    } else if (command == "scaling-study") {
        if (cfg.dry_run) {
            csv.header("n,n_disorder,estimator,n_sweeps,burn_in_sweeps,n_replicas");
            for (int n : cfg.n_list)
                csv.row(n, cfg.n_disorder, cfg.estimator, cfg.chain.n_sweeps,
                        cfg.chain.burn_in_sweeps, cfg.chain.n_replicas);
            res = {{"dry_run", true}, {"n_list", cfg.n_list}};
        } else {
            const ScalingTable table =
                scaling_study(spec, cfg.n_list, cfg.n_disorder,
                              parse_estimator(cfg.estimator), seed, cfg.chain, threads);
            csv.header("n,mean_r2,se_r2,mean_r4,se_r4");
            for (const ScalingRow& r : table.rows)
                csv.row(r.n, fmt(r.mean_r2), fmt(r.se_r2), fmt(r.mean_r4), fmt(r.se_r4));
            res = {{"slope", table.slope}, {"slope_defined", table.slope_defined}};
            json rows = json::array();
            for (const ScalingRow& r : table.rows)
                rows.push_back({{"n", r.n}, {"mean_r2", r.mean_r2}, {"se_r2", r.se_r2},
                                {"mean_r4", r.mean_r4}, {"se_r4", r.se_r4}});
            res["rows"] = rows;
        }
    } else {
        throw ConfigError("unknown command '" + command + "'");
    }

    const auto t_end = std::chrono::steady_clock::now();
    RunReport report;
    report.csv = csv.out.str();
    report.json = {{"version", kVersion},
                   {"command", command},
                   {"seed", seed},
                   {"threads", threads},
                   {"wall_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                                   t_end - t_start)
                                   .count()},
                   {"config", cfg.echo},
                   {"results", res}};
    return report;
}

} // namespace msk
