#include "etpmb/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace etpmb {

using nlohmann::json;

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Matrix matrix_from_json(const json& j) {
    const auto rows = j.size();
    const auto cols = rows > 0 ? j[0].size() : 0;
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    return m;
}

ScenarioConfig scenario_from_json(const json& j, std::uint64_t seed) {
    ScenarioConfig cfg = j.contains("preset") ? make_scenario(j["preset"].get<std::string>(), seed)
                                              : ScenarioConfig{};
    cfg.rng_seed = seed;
    cfg.name = j.value("name", cfg.name.empty() ? std::string("custom") : cfg.name);
    cfg.duration = j.value("duration", cfg.duration);
    if (j.contains("region")) {
        const auto& r = j["region"];
        cfg.region = Region{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                            r[3].get<double>()};
    }
    cfg.sensor.pd = j.value("pd", cfg.sensor.pd);
    cfg.sensor.clutter_rate = j.value("clutter_rate", cfg.sensor.clutter_rate);
    cfg.sensor.clutter_density = 1.0 / cfg.region.area();
    if (j.contains("meas_noise")) {
        cfg.sensor.meas_noise = j["meas_noise"].get<double>() * Matrix::Identity(2, 2);
    }
    cfg.motion.ps = j.value("ps", cfg.motion.ps);
    cfg.motion.sigma_v = j.value("sigma_v", cfg.motion.sigma_v);
    cfg.motion.extent_tau = j.value("extent_tau", cfg.motion.extent_tau);
    cfg.truth_noise = j.value("truth_noise", cfg.truth_noise);
    if (j.contains("targets")) {
        cfg.targets.clear();
        std::uint64_t k = 0;
        for (const auto& t : j["targets"]) {
            TargetSeed s;
            s.birth_step = t.value("birth", 1);
            s.death_step = t.value("death", cfg.duration);
            const auto st = t.at("state").get<std::vector<double>>();
            s.initial_state = Eigen::Map<const Vector>(st.data(), static_cast<Eigen::Index>(st.size()));
            s.gamma = t.value("gamma", 10.0);
            s.extent = t.contains("extent") ? matrix_from_json(t["extent"]) : random_extent(seed * 131 + k);
            if (t.contains("maneuvers")) {
                for (const auto& m : t["maneuvers"]) {
                    s.maneuvers.push_back({m.value("step", 0), m.value("turn_rate", 0.0),
                                           m.value("heading_change", 0.0)});
                }
            }
            cfg.targets.push_back(std::move(s));
            ++k;
        }
    }
    if (j.contains("birth")) {
        cfg.birth.components.clear();
        for (const auto& b : j["birth"]) {
            cfg.birth.components.push_back(birth_component(
                b.value("weight", 0.1), b.value("x", 0.0), b.value("y", 0.0), b.value("gamma", 10.0),
                b.value("pos_var", 100.0), b.value("vel_var", 4.0)));
        }
    }
    if (cfg.duration < 1) throw DomainError("scenario duration must be >= 1");
    return cfg;
}

EllipseEstimate truth_ellipse(const Trajectory& t, int step) {
    const Vector& x = t.state_at(step);
    Vector c(2);
    c << x(0), x(2);
    return {c, t.extent};
}

EllipseEstimate estimate_ellipse(const ExtendedEstimate& e) {
    const Matrix H = measurement_matrix(static_cast<int>(e.xi_hat.size()),
                                        static_cast<int>(e.chi_hat.rows()));
    return {H * e.xi_hat, e.chi_hat};
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
}

} // namespace

ScenarioConfig load_scenario(const std::string& spec, std::uint64_t seed) {
    if (ends_with(spec, ".json")) {
        std::ifstream in(spec);
        if (!in) throw DomainError("cannot open scenario file: " + spec);
        return scenario_from_json(json::parse(in), seed);
    }
    return make_scenario(spec, seed);
}

FilterConfig filter_config_for(const ScenarioConfig& scenario, const RunConfig& cfg,
                               MergeStrategy variant) {
    FilterConfig f;
    f.motion = scenario.motion;
    f.sensor = scenario.sensor;
    f.birth = scenario.birth;
    f.eps_list = cfg.eps_list;
    f.merge_strategy = variant;
    f.tau_r = cfg.tau_r;
    f.bern_floor = cfg.bern_floor;
    f.vmb_tol = cfg.vmb_tol;
    f.tau_n = cfg.tau_n;
    f.tau_g = cfg.tau_g;
    return f;
}

std::pair<std::uint64_t, std::uint64_t> run_seeds(std::uint64_t master, int run) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(run)};
    std::mt19937_64 rng(seq);
    const std::uint64_t truth = rng();
    const std::uint64_t meas = rng();
    return {truth, meas};
}

RunRecord run_single(const RunConfig& cfg, MergeStrategy variant, int run) {
    const auto [truth_seed, meas_seed] = run_seeds(cfg.seed, run);
    const ScenarioConfig scenario = load_scenario(cfg.scenario, truth_seed);
    const std::vector<Trajectory> truth = generate_truth(scenario);
    const std::vector<Scan> scans = generate_measurements(truth, scenario, meas_seed);
    const FilterConfig fcfg = filter_config_for(scenario, cfg, variant);

    RunRecord rec;
    rec.variant = variant;
    rec.run = run;
    PMBState state;
    for (int k = 1; k <= scenario.duration; ++k) {
        const auto start = std::chrono::steady_clock::now();
        StepResult res = step(state, scans[k - 1].z, fcfg);
        const auto stop = std::chrono::steady_clock::now();
        state = std::move(res.state);

        const std::vector<ExtendedEstimate> est = extract(state, fcfg.extract_threshold);
        std::vector<EllipseEstimate> truth_set;
        for (const auto& t : truth) {
            if (t.alive(k)) truth_set.push_back(truth_ellipse(t, k));
        }
        std::vector<EllipseEstimate> est_set;
        for (const auto& e : est) est_set.push_back(estimate_ellipse(e));

        StepRecord s;
        s.step = k;
        s.gospa = gospa(truth_set, est_set, cfg.gospa_c, cfg.gospa_p, cfg.gospa_alpha);
        s.ospa = ospa(truth_set, est_set, cfg.gospa_c, cfg.gospa_p);
        s.num_estimates = est.size();
        s.num_hypotheses = res.diagnostics.num_hypotheses;
        s.merge = std::move(res.diagnostics.merge);
        s.seconds = cfg.timing ? std::chrono::duration<double>(stop - start).count() : 0.0;
        rec.steps.push_back(std::move(s));
        if (cfg.dump_steps) rec.estimates.push_back(est);
    }
    return rec;
}

std::vector<RunRecord> run_all(const RunConfig& cfg) {
    if (cfg.mc_runs < 1) throw DomainError("mc_runs must be >= 1");
    const std::size_t jobs = cfg.variants.size() * static_cast<std::size_t>(cfg.mc_runs);
    std::vector<RunRecord> out(jobs);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&]() {
        while (true) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs) return;
            const std::size_t v = job / static_cast<std::size_t>(cfg.mc_runs);
            const int r = static_cast<int>(job % static_cast<std::size_t>(cfg.mc_runs));
            try {
                out[job] = run_single(cfg, cfg.variants[v], r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs, const RunConfig& cfg) {
    std::vector<SummaryRow> rows;
    for (MergeStrategy v : cfg.variants) {
        SummaryRow row;
        row.variant = v;
        int count = 0;
        for (const auto& r : runs) {
            if (r.variant != v) continue;
            ++count;
            for (const auto& s : r.steps) {
                row.o += s.ospa;
                row.go += s.gospa.total;
                row.le += s.gospa.localization;
                row.nf += s.gospa.num_false;
                row.nm += s.gospa.num_missed;
                row.t += s.seconds;
            }
        }
        if (count > 0) {
            for (double* f : {&row.o, &row.go, &row.le, &row.nf, &row.nm, &row.t}) *f /= count;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<ConvergenceRow> convergence(const std::vector<RunRecord>& runs, const RunConfig& cfg) {
    std::vector<ConvergenceRow> rows;
    for (MergeStrategy v : cfg.variants) {
        if (v != MergeStrategy::MLA && v != MergeStrategy::EAFS) continue;
        ConvergenceRow row;
        row.variant = v;
        int run_count = 0;
        int applied = 0;
        for (const auto& r : runs) {
            if (r.variant != v) continue;
            ++run_count;
            for (const auto& s : r.steps) {
                // Steps where the refinement actually ran.
                if (s.num_hypotheses < 2 || s.merge.trace.size() < 2) continue;
                ++applied;
                row.ni += s.merge.iterations;
                row.cebv += s.merge.cebv;
                row.ceav += s.merge.ceav;
            }
        }
        if (applied > 0) {
            row.ni /= applied;
            row.cebv /= applied;
            row.ceav /= applied;
        }
        row.nt = run_count > 0 ? static_cast<double>(applied) / run_count : 0.0;
        row.d = row.cebv - row.ceav;
        rows.push_back(row);
    }
    return rows;
}

void write_steps_csv(std::ostream& os, const std::vector<RunRecord>& runs, const RunConfig&) {
    os << "variant,run,step,gospa,localization,missed,false,num_missed,num_false,ospa,"
          "num_estimates,num_hypotheses,cebv,ceav,iterations,t\n";
    for (const auto& r : runs) {
        for (const auto& s : r.steps) {
            os << to_string(r.variant) << ',' << r.run << ',' << s.step << ',' << fmt(s.gospa.total)
               << ',' << fmt(s.gospa.localization) << ',' << fmt(s.gospa.missed) << ','
               << fmt(s.gospa.false_alarms) << ',' << s.gospa.num_missed << ',' << s.gospa.num_false
               << ',' << fmt(s.ospa) << ',' << s.num_estimates << ',' << s.num_hypotheses << ','
               << fmt(s.merge.cebv) << ',' << fmt(s.merge.ceav) << ',' << s.merge.iterations << ','
               << fmt(s.seconds) << '\n';
        }
    }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "variant,o,go,le,nf,nm,t\n";
    for (const auto& r : rows) {
        os << to_string(r.variant) << ',' << fmt(r.o) << ',' << fmt(r.go) << ',' << fmt(r.le) << ','
           << fmt(r.nf) << ',' << fmt(r.nm) << ',' << fmt(r.t) << '\n';
    }
}

void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
    os << "variant,ni,nt,cebv,ceav,d\n";
    for (const auto& r : rows) {
        os << to_string(r.variant) << ',' << fmt(r.ni) << ',' << fmt(r.nt) << ',' << fmt(r.cebv)
           << ',' << fmt(r.ceav) << ',' << fmt(r.d) << '\n';
    }
}

void write_estimates(std::ostream& os, const std::vector<RunRecord>& runs) {
    os << "variant,run,step,px,py,X00,X01,X11,gamma\n";
    for (const auto& r : runs) {
        for (std::size_t k = 0; k < r.estimates.size(); ++k) {
            for (const auto& e : r.estimates[k]) {
                const EllipseEstimate ell = estimate_ellipse(e);
                os << to_string(r.variant) << ',' << r.run << ',' << (k + 1) << ','
                   << fmt(ell.center(0)) << ',' << fmt(ell.center(1)) << ',' << fmt(ell.extent(0, 0))
                   << ',' << fmt(ell.extent(0, 1)) << ',' << fmt(ell.extent(1, 1)) << ','
                   << fmt(e.gamma_hat) << '\n';
            }
        }
    }
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file: " + path);
    const json j = json::parse(in);
    base.scenario = j.value("scenario", base.scenario);
    if (j.contains("variants")) {
        base.variants.clear();
        for (const auto& v : j["variants"]) base.variants.push_back(parse_strategy(v.get<std::string>()));
    }
    base.mc_runs = j.value("mc_runs", base.mc_runs);
    base.seed = j.value("seed", base.seed);
    base.out_dir = j.value("out_dir", base.out_dir);
    base.gospa_c = j.value("gospa_c", base.gospa_c);
    base.gospa_p = j.value("gospa_p", base.gospa_p);
    base.gospa_alpha = j.value("gospa_alpha", base.gospa_alpha);
    if (j.contains("eps_list")) base.eps_list = j["eps_list"].get<std::vector<double>>();
    base.tau_r = j.value("tau_r", base.tau_r);
    base.bern_floor = j.value("bern_floor", base.bern_floor);
    base.vmb_tol = j.value("vmb_tol", base.vmb_tol);
    base.tau_n = j.value("tau_n", base.tau_n);
    base.tau_g = j.value("tau_g", base.tau_g);
    base.dump_steps = j.value("dump_steps", base.dump_steps);
    base.timing = j.value("timing", base.timing);
    base.threads = j.value("threads", base.threads);
    return base;
}

int run(const RunConfig& cfg, std::ostream& log) {
    try {
        if (cfg.variants.empty()) throw DomainError("no filter variants selected");
        // Fail early on a malformed scenario.
        (void)load_scenario(cfg.scenario, cfg.seed);
        const std::vector<RunRecord> runs = run_all(cfg);
        std::filesystem::create_directories(cfg.out_dir);
        const std::filesystem::path dir(cfg.out_dir);
        {
            std::ofstream os(dir / "steps.csv");
            write_steps_csv(os, runs, cfg);
        }
        const auto summary = summarize(runs, cfg);
        {
            std::ofstream os(dir / "summary.csv");
            write_summary_csv(os, summary);
        }
        {
            std::ofstream os(dir / "convergence.csv");
            write_convergence_csv(os, convergence(runs, cfg));
        }
        if (cfg.dump_steps) {
            std::ofstream os(dir / "estimates.csv");
            write_estimates(os, runs);
        }
        for (const auto& row : summary) {
            log << to_string(row.variant) << ": go=" << fmt(row.go) << " o=" << fmt(row.o)
                << " t=" << fmt(row.t) << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace etpmb
