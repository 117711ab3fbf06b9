#pragma once

#include "etpmb/ggiw.hpp"
#include "etpmb/rfs.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace etpmb {

/// A piecewise motion change applied from `step` on.
struct Maneuver {
    int step = 0;
    /// Coordinated-turn rate (rad/s) while active; 0 means straight motion.
    double turn_rate = 0.0;
    /// Instantaneous velocity rotation (rad) applied at `step`.
    double heading_change = 0.0;
};

struct TargetSeed {
    int birth_step = 1;
    int death_step = 1;
    /// [px, vx, py, vy] at birth.
    Vector initial_state;
    double gamma = 10.0;
    Matrix extent;
    std::vector<Maneuver> maneuvers;
};

struct Trajectory {
    int birth_step = 1;
    int death_step = 1;
    /// One state per alive step, birth_step first.
    std::vector<Vector> states;
    Matrix extent;
    double gamma = 0.0;

    bool alive(int step) const { return step >= birth_step && step <= death_step; }
    const Vector& state_at(int step) const { return states.at(step - birth_step); }
};

struct Region {
    double x_min = -200.0;
    double x_max = 200.0;
    double y_min = -200.0;
    double y_max = 200.0;

    double area() const { return (x_max - x_min) * (y_max - y_min); }
};

struct ScenarioConfig {
    std::string name;
    int duration = 1;
    Region region;
    SensorConfig sensor;
    MotionConfig motion;
    /// Standard deviation of the truth's velocity perturbation per step.
    double truth_noise = 0.0;
    std::vector<TargetSeed> targets;
    /// Birth intensity handed to the filter.
    PoissonIntensity birth;
    std::uint64_t rng_seed = 1;
};

struct Scan {
    /// d × N measurements in shuffled order.
    Matrix z;
    /// Per column: index into the truth list, or -1 for clutter.
    std::vector<int> source;
};

/// Named presets: "scenario1".."scenario4" and "single".
ScenarioConfig make_scenario(const std::string& name, std::uint64_t seed = 1);

/// Random SPD extent with principal standard deviations drawn from [lo, hi].
Matrix random_extent(std::uint64_t seed, double lo = 1.0, double hi = 3.0);

/// Birth component at a position with broad kinematic and extent priors.
PoissonComponent birth_component(double weight, double x, double y, double gamma_mean,
                                 double pos_var = 100.0, double vel_var = 4.0);

std::vector<Trajectory> generate_truth(const ScenarioConfig& cfg);

/// Scans for steps 1..duration.
std::vector<Scan> generate_measurements(const std::vector<Trajectory>& truth,
                                        const ScenarioConfig& cfg, std::uint64_t seed);

/// Records: "T step id px vx py vy X00 X01 X10 X11 gamma".
void write_truth(std::ostream& os, const std::vector<Trajectory>& truth);
/// Records: "Z step source zx zy".
void write_measurements(std::ostream& os, const std::vector<Scan>& scans);

} // namespace etpmb
