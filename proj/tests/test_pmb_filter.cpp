#include "etpmb/pmb_filter.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace etpmb;
using etpmb::testing::ggiw_at;

namespace {

FilterConfig quiet_config() {
    FilterConfig cfg;
    cfg.sensor.pd = 0.8;
    cfg.sensor.clutter_rate = 5.0;
    cfg.sensor.clutter_density = 1.0 / 1600.0;
    return cfg;
}

Matrix cluster(double x, double y, int n, double spread = 0.3) {
    Matrix z(2, n);
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n;
        z(0, k) = x + spread * std::cos(a);
        z(1, k) = y + spread * std::sin(a);
    }
    return z;
}

} // namespace

TEST(Predict, SurvivalScalesExistence) {
    PMBState s;
    s.bernoullis = {{0.5, ggiw_at(0, 0), 3}};
    FilterConfig cfg;
    cfg.motion.ps = 0.99;
    const PMBState p = predict(s, cfg);
    ASSERT_EQ(p.bernoullis.size(), 1u);
    EXPECT_DOUBLE_EQ(p.bernoullis[0].r, 0.495);
    EXPECT_EQ(p.bernoullis[0].track_id, 3);
}

TEST(Predict, EmptyStateGivesBirthOnly) {
    FilterConfig cfg;
    cfg.birth.components = {{0.1, ggiw_at(1, 2)}, {0.2, ggiw_at(-1, 0)}};
    const PMBState p = predict(PMBState{}, cfg);
    EXPECT_TRUE(p.bernoullis.empty());
    ASSERT_EQ(p.ppp.components.size(), 2u);
    EXPECT_NEAR(p.ppp.mass(), 0.3, 1e-15);
}

TEST(Predict, PppSurvivesWithBirthAppended) {
    PMBState s;
    s.ppp.components = {{0.4, ggiw_at(0, 0)}};
    FilterConfig cfg;
    cfg.motion.ps = 0.9;
    cfg.birth.components = {{0.1, ggiw_at(5, 5)}};
    const PMBState p = predict(s, cfg);
    ASSERT_EQ(p.ppp.components.size(), 2u);
    EXPECT_NEAR(p.ppp.components[0].w, 0.36, 1e-15);
    EXPECT_NEAR(p.ppp.components[1].w, 0.1, 1e-15);
}

TEST(Update, NoMeasurementsMissExample) {
    // r = 0.5 and q_D = 0.2 give r' = 0.1 / 0.6.
    PMBState s;
    s.bernoullis = {{0.5, ggiw_at(0, 0), 0}};
    s.bernoullis[0].density.gamma = {1e4, 1.0};
    FilterConfig cfg = quiet_config();
    const UpdateResult upd = update(s, Matrix(2, 0), cfg);
    ASSERT_EQ(upd.hyps.size(), 1u);
    EXPECT_NEAR(upd.selection(0, 0).r, 1.0 / 6.0, 1e-12);
    EXPECT_NEAR(upd.weight(0), 1.0, 1e-15);
}

TEST(Update, NewTrackCertainForMultiMeasurementCell) {
    FilterConfig cfg = quiet_config();
    PMBState s;
    s.ppp.components = {{0.05, ggiw_at(0, 0, 2.0, 20.0)}};
    const UpdateResult upd = update(s, cluster(0.5, 0.5, 4), cfg);
    bool seen = false;
    for (const auto& lh : upd.locals) {
        if (lh.parent_track >= 0) continue;
        if (lh.cell.size() > 1) {
            EXPECT_EQ(lh.bern.r, 1.0);
            seen = true;
        } else {
            EXPECT_LT(lh.bern.r, 1.0);
            EXPECT_GT(lh.bern.r, 0.0);
        }
    }
    EXPECT_TRUE(seen);
}

TEST(Update, SingletonNewTrackExistenceRatio) {
    FilterConfig cfg = quiet_config();
    PMBState s;
    s.ppp.components = {{0.05, ggiw_at(0, 0, 2.0, 20.0)}};
    const Matrix z = cluster(0.3, 0.0, 1);
    const UpdateResult upd = update(s, z, cfg);
    ASSERT_EQ(upd.hyps.size(), 1u);
    ASSERT_EQ(upd.hyps[0].new_tracks.size(), 1u);
    const double lu = std::log(0.05) + ggiw_cell_update(s.ppp.components[0].density, z, cfg.sensor).log_lik;
    const double kappa = cfg.sensor.clutter_intensity();
    EXPECT_NEAR(upd.locals[upd.hyps[0].new_tracks[0]].bern.r, std::exp(lu) / (kappa + std::exp(lu)), 1e-12);
}

TEST(Update, InvariantsOnRandomInstances) {
    oracle::Sampler s(81);
    for (int i = 0; i < 60; ++i) {
        auto inst = etpmb::testing::random_filter_instance(s, 4, 2);
        const UpdateResult upd = update(inst.predicted, inst.z, inst.cfg);
        double total = 0.0;
        for (std::size_t j = 0; j < upd.hyps.size(); ++j) total += upd.weight(j);
        EXPECT_NEAR(total, 1.0, 1e-12);
        for (const auto& lh : upd.locals) {
            if (lh.parent_track >= 0 && !lh.cell.empty()) EXPECT_EQ(lh.bern.r, 1.0);
            if (lh.parent_track >= 0 && lh.cell.empty()) {
                EXPECT_LE(lh.bern.r, inst.predicted.bernoullis[lh.parent_track].r + 1e-15);
            }
        }
        for (const auto& c : upd.ppp.components) EXPECT_GE(c.w, 0.0);
    }
}

TEST(Update, WeightsMatchExhaustiveEnumeration) {
    oracle::Sampler s(82);
    for (int i = 0; i < 40; ++i) {
        auto inst = etpmb::testing::random_filter_instance(s, 3, 2);
        const auto parts = exhaustive_partitions(static_cast<int>(inst.z.cols()));
        const UpdateResult upd = update_with_partitions(inst.predicted, inst.z, parts, inst.cfg);
        AssociationModel model(inst.z, inst.predicted.bernoullis, inst.predicted.ppp, inst.cfg.sensor, 0.0);
        std::map<etpmb::testing::AssocKey, double> ref;
        for (const auto& h : enumerate_associations(model)) ref[etpmb::testing::key_of(h)] = std::exp(h.log_weight);
        ASSERT_EQ(upd.hyps.size(), ref.size());
        for (std::size_t j = 0; j < upd.hyps.size(); ++j) {
            const auto it = ref.find(etpmb::testing::key_of(upd, upd.hyps[j]));
            ASSERT_NE(it, ref.end());
            EXPECT_NEAR(upd.weight(j), it->second, 1e-9);
        }
    }
}

TEST(Step, RepeatedEmptyScansDecayExistence) {
    FilterConfig cfg = quiet_config();
    cfg.bern_floor = 0.0;
    cfg.tau_r = 0.0;
    PMBState s;
    s.bernoullis = {{0.9, ggiw_at(0, 0), 0}};
    double last = 0.9;
    for (int k = 0; k < 6; ++k) {
        s = step(s, Matrix(2, 0), cfg).state;
        ASSERT_EQ(s.bernoullis.size(), 1u);
        EXPECT_LT(s.bernoullis[0].r, last);
        last = s.bernoullis[0].r;
    }
    EXPECT_LT(last, 0.01);
}

TEST(Step, DetectsNewClusterAndIsDeterministic) {
    FilterConfig cfg = quiet_config();
    cfg.sensor.pd = 0.95;
    cfg.birth.components = {{0.05, ggiw_at(0, 0, 2.0, 50.0)}};
    for (MergeStrategy strategy : {MergeStrategy::TO, MergeStrategy::TON, MergeStrategy::MLA, MergeStrategy::EAFS}) {
        cfg.merge_strategy = strategy;
        PMBState a, b;
        for (int k = 0; k < 4; ++k) {
            const Matrix z = cluster(1.0 + 0.1 * k, -1.0, 8, 1.0);
            a = step(a, z, cfg).state;
            b = step(b, z, cfg).state;
        }
        std::ostringstream sa, sb;
        write_state(sa, a);
        write_state(sb, b);
        EXPECT_EQ(sa.str(), sb.str());
        const auto est = extract(a, 0.5);
        ASSERT_EQ(est.size(), 1u) << to_string(strategy);
        EXPECT_NEAR(est[0].xi_hat(0), 1.3, 1.0);
        EXPECT_NEAR(est[0].xi_hat(2), -1.0, 1.0);
    }
}

TEST(Extract, Threshold) {
    PMBState s;
    s.bernoullis = {{0.4, ggiw_at(0, 0), 0}, {0.6, ggiw_at(3, 4), 1}, {0.5, ggiw_at(1, 1), 2}};
    const auto est = extract(s, 0.5);
    ASSERT_EQ(est.size(), 1u);
    EXPECT_DOUBLE_EQ(est[0].xi_hat(0), 3.0);
    EXPECT_NEAR(est[0].chi_hat(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(est[0].gamma_hat, 10.0, 1e-12);
    EXPECT_TRUE(extract(PMBState{}, 0.5).empty());
}
