#include "etpmb/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

namespace etpmb {

namespace {

Vector cv_state(double px, double vx, double py, double vy) {
    Vector x(4);
    x << px, vx, py, vy;
    return x;
}

Vector heading_state(double px, double py, double speed, double heading) {
    return cv_state(px, speed * std::cos(heading), py, speed * std::sin(heading));
}

void rotate_velocity(Vector& x, double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double vx = x(1);
    const double vy = x(3);
    x(1) = c * vx - s * vy;
    x(3) = s * vx + c * vy;
}

void advance(Vector& x, double T, double turn_rate) {
    if (turn_rate == 0.0) {
        x(0) += T * x(1);
        x(2) += T * x(3);
        return;
    }
    const double wt = turn_rate * T;
    const double vx = x(1);
    const double vy = x(3);
    x(0) += (vx * std::sin(wt) - vy * (1.0 - std::cos(wt))) / turn_rate;
    x(2) += (vx * (1.0 - std::cos(wt)) + vy * std::sin(wt)) / turn_rate;
    rotate_velocity(x, wt);
}

ScenarioConfig base_config(const std::string& name, int duration, double pd, double lambda,
                           std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.duration = duration;
    cfg.rng_seed = seed;
    cfg.sensor.pd = pd;
    cfg.sensor.clutter_rate = lambda;
    cfg.sensor.clutter_density = 1.0 / cfg.region.area();
    cfg.sensor.meas_noise = 0.25 * Matrix::Identity(2, 2);
    cfg.motion.T = 1.0;
    cfg.motion.sigma_v = 0.5;
    cfg.motion.ps = 0.99;
    return cfg;
}

TargetSeed make_target(int birth, int death, Vector x0, double gamma, std::uint64_t extent_seed) {
    TargetSeed t;
    t.birth_step = birth;
    t.death_step = death;
    t.initial_state = std::move(x0);
    t.gamma = gamma;
    t.extent = random_extent(extent_seed);
    return t;
}

ScenarioConfig scenario1(std::uint64_t seed) {
    ScenarioConfig cfg = base_config("scenario1", 100, 0.9, 60.0, seed);
    cfg.truth_noise = 0.1;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, 5.0);
    const double sites[4][2] = {{-120, -120}, {-120, 120}, {120, -120}, {120, 120}};
    for (int k = 0; k < 27; ++k) {
        const auto& site = sites[k % 4];
        const int birth = 1 + 3 * k;
        const int death = std::min(100, birth + 30 + static_cast<int>(unit(rng) * 31.0));
        const double px = site[0] + jitter(rng);
        const double py = site[1] + jitter(rng);
        const double heading = std::atan2(-py, -px) + (unit(rng) - 0.5) * 1.2;
        const double speed = 1.0 + 2.0 * unit(rng);
        const double gamma = 7.0 + std::floor(unit(rng) * 3.0);
        cfg.targets.push_back(
            make_target(birth, death, heading_state(px, py, speed, heading), gamma, seed * 131 + k));
    }
    for (const auto& site : sites) {
        cfg.birth.components.push_back(birth_component(0.08, site[0], site[1], 8.0));
    }
    return cfg;
}

ScenarioConfig scenario2(std::uint64_t seed) {
    ScenarioConfig cfg = base_config("scenario2", 10, 0.9, 20.0, seed);
    const double offsets[5][2] = {{0, 0}, {8, 6}, {-8, 6}, {8, -6}, {-8, -6}};
    for (int k = 0; k < 5; ++k) {
        const double heading = k == 0 ? 0.0 : std::atan2(offsets[k][1], offsets[k][0]);
        const double speed = k == 0 ? 1.0 : 1.5;
        Vector x0 = heading_state(offsets[k][0], offsets[k][1], speed, heading);
        cfg.targets.push_back(make_target(1, 10, std::move(x0), 10.0, seed * 131 + k));
    }
    cfg.birth.components.push_back(birth_component(0.1, 0.0, 0.0, 10.0));
    return cfg;
}

ScenarioConfig scenario3(std::uint64_t seed) {
    ScenarioConfig cfg = base_config("scenario3", 40, 0.7, 10.0, seed);
    for (int k = 0; k < 5; ++k) {
        const double angle = std::numbers::pi / 2.0 + 2.0 * std::numbers::pi * k / 5.0;
        const double px = 50.0 * std::cos(angle);
        const double py = 50.0 * std::sin(angle);
        // Aim 4 m to the side of the center so the targets pass close by.
        const double ax = -4.0 * std::sin(angle);
        const double ay = 4.0 * std::cos(angle);
        const double heading = std::atan2(ay - py, ax - px);
        cfg.targets.push_back(
            make_target(1, 40, heading_state(px, py, 2.5, heading), 5.0, seed * 131 + k));
        cfg.birth.components.push_back(birth_component(0.05, px, py, 5.0));
    }
    return cfg;
}

ScenarioConfig scenario4(std::uint64_t seed) {
    ScenarioConfig cfg = base_config("scenario4", 300, 0.98, 10.0, seed);
    const double side[2] = {1.0, -1.0};
    const double gammas[2] = {10.0, 20.0};
    for (int k = 0; k < 2; ++k) {
        const double px = -150.0;
        const double py = 30.0 * side[k];
        const double heading = std::atan2(5.0 * side[k] - py, -60.0 - px);
        const double speed = std::hypot(-60.0 - px, 5.0 * side[k] - py) / 100.0;
        TargetSeed t = make_target(1, 300, heading_state(px, py, speed, heading), gammas[k],
                                   seed * 131 + k);
        t.maneuvers = {
            {101, 0.0, -heading},
            {121, 0.02, 0.0},
            {201, 0.0, 0.5 * side[k]},
        };
        cfg.targets.push_back(std::move(t));
        cfg.birth.components.push_back(birth_component(0.05, px, py, gammas[k]));
    }
    return cfg;
}

ScenarioConfig single_target(std::uint64_t seed) {
    ScenarioConfig cfg = base_config("single", 50, 0.98, 10.0, seed);
    cfg.targets.push_back(make_target(1, 50, cv_state(-50.0, 1.0, 0.0, 0.3), 10.0, seed * 131));
    cfg.birth.components.push_back(birth_component(0.1, -50.0, 0.0, 10.0));
    return cfg;
}

} // namespace

ScenarioConfig make_scenario(const std::string& name, std::uint64_t seed) {
    if (name == "scenario1") return scenario1(seed);
    if (name == "scenario2") return scenario2(seed);
    if (name == "scenario3") return scenario3(seed);
    if (name == "scenario4") return scenario4(seed);
    if (name == "single") return single_target(seed);
    throw DomainError("unknown scenario preset: " + name);
}

Matrix random_extent(std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> axis(lo, hi);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    const double l1 = axis(rng);
    const double l2 = axis(rng);
    const double th = angle(rng);
    Matrix R(2, 2);
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = l1 * l1;
    D(1, 1) = l2 * l2;
    const Matrix X = R * D * R.transpose();
    return 0.5 * (X + X.transpose());
}

PoissonComponent birth_component(double weight, double x, double y, double gamma_mean,
                                 double pos_var, double vel_var) {
    PoissonComponent c;
    c.w = weight;
    c.density.gamma = GammaParams{2.0 * gamma_mean, 2.0};
    c.density.kin.m = cv_state(x, 0.0, y, 0.0);
    c.density.kin.P = Vector((Vector(4) << pos_var, vel_var, pos_var, vel_var).finished()).asDiagonal();
    const int d = 2;
    c.density.ext.v = 2.0 * d + 2.0 + 5.0;
    c.density.ext.V = 5.0 * 4.0 * Matrix::Identity(d, d);
    return c;
}

std::vector<Trajectory> generate_truth(const ScenarioConfig& cfg) {
    std::vector<Trajectory> out;
    for (std::size_t idx = 0; idx < cfg.targets.size(); ++idx) {
        const TargetSeed& seed = cfg.targets[idx];
        std::mt19937_64 rng(cfg.rng_seed * 7919 + idx);
        std::normal_distribution<double> noise(0.0, 1.0);
        Trajectory t;
        t.birth_step = seed.birth_step;
        t.death_step = std::min(seed.death_step, cfg.duration);
        t.extent = seed.extent;
        t.gamma = seed.gamma;
        Vector x = seed.initial_state;
        double turn_rate = 0.0;
        for (int k = t.birth_step; k <= t.death_step; ++k) {
            t.states.push_back(x);
            for (const Maneuver& m : seed.maneuvers) {
                if (m.step == k + 1) {
                    turn_rate = m.turn_rate;
                    rotate_velocity(x, m.heading_change);
                }
            }
            advance(x, cfg.motion.T, turn_rate);
            if (cfg.truth_noise > 0.0) {
                x(1) += cfg.truth_noise * noise(rng);
                x(3) += cfg.truth_noise * noise(rng);
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Scan> generate_measurements(const std::vector<Trajectory>& truth,
                                        const ScenarioConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::poisson_distribution<int> clutter_count(std::max(cfg.sensor.clutter_rate, 1.0));
    const Matrix H = measurement_matrix(4, 2);

    std::vector<Eigen::LLT<Matrix>> noise_chol;
    for (const auto& t : truth) noise_chol.emplace_back(t.extent + cfg.sensor.meas_noise);

    std::vector<Scan> scans;
    for (int k = 1; k <= cfg.duration; ++k) {
        std::vector<Vector> points;
        std::vector<int> source;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (!truth[i].alive(k)) continue;
            if (!(unit(rng) < cfg.sensor.pd)) continue;
            if (!(truth[i].gamma > 0.0)) continue;
            std::poisson_distribution<int> count(truth[i].gamma);
            const int n = count(rng);
            const Vector center = H * truth[i].state_at(k);
            const Matrix L = noise_chol[i].matrixL();
            for (int s = 0; s < n; ++s) {
                Vector w(2);
                w << normal(rng), normal(rng);
                points.push_back(center + L * w);
                source.push_back(static_cast<int>(i));
            }
        }
        const int nc = cfg.sensor.clutter_rate > 0.0 ? clutter_count(rng) : 0;
        for (int s = 0; s < nc; ++s) {
            Vector z(2);
            z(0) = cfg.region.x_min + (cfg.region.x_max - cfg.region.x_min) * unit(rng);
            z(1) = cfg.region.y_min + (cfg.region.y_max - cfg.region.y_min) * unit(rng);
            points.push_back(z);
            source.push_back(-1);
        }
        std::vector<std::size_t> perm(points.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Scan scan;
        scan.z.resize(2, static_cast<Eigen::Index>(points.size()));
        for (std::size_t c = 0; c < perm.size(); ++c) {
            scan.z.col(static_cast<Eigen::Index>(c)) = points[perm[c]];
            scan.source.push_back(source[perm[c]]);
        }
        scans.push_back(std::move(scan));
    }
    return scans;
}

void write_truth(std::ostream& os, const std::vector<Trajectory>& truth) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const auto& t = truth[i];
        for (int k = t.birth_step; k <= t.death_step; ++k) {
            const Vector& x = t.state_at(k);
            os << "T " << k << ' ' << i << ' ' << x(0) << ' ' << x(1) << ' ' << x(2) << ' ' << x(3)
               << ' ' << t.extent(0, 0) << ' ' << t.extent(0, 1) << ' ' << t.extent(1, 0) << ' '
               << t.extent(1, 1) << ' ' << t.gamma << '\n';
        }
    }
}

void write_measurements(std::ostream& os, const std::vector<Scan>& scans) {
    for (std::size_t k = 0; k < scans.size(); ++k) {
        for (Eigen::Index c = 0; c < scans[k].z.cols(); ++c) {
            os << "Z " << (k + 1) << ' ' << scans[k].source[c] << ' ' << scans[k].z(0, c) << ' '
               << scans[k].z(1, c) << '\n';
        }
    }
}

} // namespace etpmb
