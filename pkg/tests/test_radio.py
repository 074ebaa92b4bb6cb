import math

import numpy as np
import pytest

from uavrelay import radio
from uavrelay.antenna import CrossedDipole, Omni
from uavrelay.config import RunConfig
from uavrelay.pathloss import LinkModels, OhplmModel, BackhaulUmaAvModel
from uavrelay.planner import StateGrid
from uavrelay.radio import (AntennaSetup, associate, criterion_reward,
                            dbm_to_mw, direct_sir, link_budget,
                            received_power, relay_end_to_end_sir, stage_rates)
from uavrelay.scenario import Mission, PhysicalConfig, Scenario, generate_scenario

OMNI = AntennaSetup(mbs=Omni(), uav=Omni())
MODELS = LinkModels(mbs_ue=OhplmModel(), uav_ue=OhplmModel(),
                    backhaul=BackhaulUmaAvModel())


def make_scenario(mbs, ue, lambda_mbs=4.0):
    return Scenario(
        config=PhysicalConfig(lambda_mbs=lambda_mbs),
        mission=Mission(),
        mbs_xy=np.asarray(mbs, dtype=float).reshape(-1, 2),
        ue_xy=np.asarray(ue, dtype=float).reshape(-1, 2),
        seed=0,
    )


def test_dbm_to_mw():
    assert dbm_to_mw(0.0) == 1.0
    assert dbm_to_mw(46.0) == pytest.approx(10 ** 4.6, rel=1e-12)


def test_received_power_matches_hand_conversion():
    # one MBS at 3D distance exactly 1000 m from the UE
    z = math.sqrt(1000.0 ** 2 - 28.0 ** 2)
    scn = make_scenario([[0.0, 0.0]], [[z, 0.0]])
    got = received_power(0, [z, 0.0], scn, (2000.0, 2000.0), MODELS, OMNI)
    from uavrelay.pathloss import hata_path_loss
    loss = hata_path_loss(1000.0, 1500.0, 30.0, 2.0)
    assert got == pytest.approx(10 ** 4.6 * 10 ** (-loss / 10.0), rel=1e-12)
    # the 121 dB headline case: 46 dBm through 121 dB is ~3.16e-8 mW
    assert got == pytest.approx(3.16e-8, rel=0.01)


def test_received_power_is_deterministic():
    scn = make_scenario([[100.0, 200.0], [800.0, 900.0]], [[400.0, 500.0]])
    a = received_power(1, [400.0, 500.0], scn, (300.0, 300.0), MODELS, OMNI)
    b = received_power(1, [400.0, 500.0], scn, (300.0, 300.0), MODELS, OMNI)
    assert a == b


def test_received_power_zero_in_pattern_null():
    # crossed-dipole UE link gain is exactly 0 straight down
    scn = make_scenario([[0.0, 0.0]], [[500.0, 500.0]])
    ants = AntennaSetup(mbs=Omni(), uav=CrossedDipole(1))
    got = received_power(1, [500.0, 500.0], scn, (500.0, 500.0), MODELS, ants)
    assert got == 0.0


class TestDirectSir:
    def test_two_equal_transmitters(self):
        budget = radio.LinkBudget(powers_mw=np.array([[2.5, 2.5]]), n_mbs=1)
        assert direct_sir(0, 0, budget) == 1.0

    def test_hand_arithmetic(self):
        budget = radio.LinkBudget(powers_mw=np.array([[8.0, 1.0, 1.0]]), n_mbs=2)
        assert direct_sir(0, 0, budget) == pytest.approx(4.0, rel=1e-12)

    def test_added_transmitter_decreases_sir(self):
        b2 = radio.LinkBudget(powers_mw=np.array([[8.0, 1.0]]), n_mbs=1)
        b3 = radio.LinkBudget(powers_mw=np.array([[8.0, 1.0, 0.5]]), n_mbs=2)
        assert direct_sir(0, 0, b3) < direct_sir(0, 0, b2)

    def test_empty_interference_rejected(self):
        budget = radio.LinkBudget(powers_mw=np.array([[8.0]]), n_mbs=1)
        with pytest.raises(ValueError):
            direct_sir(0, 0, budget)


class TestRelaySir:
    def test_equal_inputs_fixed_point(self):
        for x in (0.25, 1.0, 7.5):
            assert relay_end_to_end_sir(x, x) == pytest.approx(x, rel=1e-12)

    def test_hand_arithmetic(self):
        assert relay_end_to_end_sir(4.0, 1.0) == pytest.approx(1.6, rel=1e-12)

    def test_strong_backhaul_limit(self):
        assert relay_end_to_end_sir(1e12, 3.0) == pytest.approx(6.0, rel=1e-6)

    def test_bounded_by_twice_minimum(self):
        rng = np.random.default_rng(0)
        g1 = rng.uniform(0.01, 100, 200)
        g2 = rng.uniform(0.01, 100, 200)
        e2e = relay_end_to_end_sir(g1, g2)
        assert np.all(e2e <= 2 * np.minimum(g1, g2) + 1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            relay_end_to_end_sir(0.0, 1.0)
        with pytest.raises(ValueError):
            relay_end_to_end_sir(1.0, -2.0)


class TestAssociate:
    def test_matches_exhaustive_oracle(self):
        scn = generate_scenario(PhysicalConfig(lambda_mbs=2.0, lambda_ue=5.0),
                                Mission(), 42)
        snap = associate(scn, (300.0, 700.0), "standalone", MODELS, OMNI)
        budget = link_budget(scn, (300.0, 700.0), MODELS, OMNI)
        k, t = budget.powers_mw.shape
        for ue in range(k):
            best, best_sir = None, -1.0
            for srv in range(t):
                sir = direct_sir(ue, srv, budget)
                if sir > best_sir:
                    best, best_sir = srv, sir
            assert snap.server[ue] == best
            assert snap.sir[ue] == pytest.approx(best_sir, rel=1e-12)

    def test_tie_breaks_to_lowest_id(self):
        # UE exactly equidistant from two MBSs: identical powers, server 0 wins
        scn = make_scenario([[0.0, 0.0], [1000.0, 0.0]], [[500.0, 0.0]])
        snap = associate(scn, (500.0, 2000.0), "standalone", MODELS, OMNI)
        budget = link_budget(scn, (500.0, 2000.0), MODELS, OMNI)
        assert budget.powers_mw[0, 0] == budget.powers_mw[0, 1]
        assert snap.server[0] == 0

    def test_rate_follows_shannon_over_load(self):
        scn = generate_scenario(PhysicalConfig(), Mission(), 3)
        snap = associate(scn, (500.0, 500.0), "standalone", MODELS, OMNI)
        expected = np.log2(1.0 + snap.sir) / snap.loads[snap.server]
        assert np.allclose(snap.rate, expected, rtol=1e-13)
        assert np.all(snap.rate <= np.log2(1.0 + snap.sir) + 1e-13)
        solo = snap.loads[snap.server] == 1
        assert np.allclose(snap.rate[solo], np.log2(1.0 + snap.sir[solo]))

    def test_standalone_loads_sum_to_k(self):
        scn = generate_scenario(PhysicalConfig(), Mission(), 8)
        snap = associate(scn, (200.0, 900.0), "standalone", MODELS, OMNI)
        assert snap.loads.sum() == scn.n_ue

    def test_relay_loads_include_uav_at_donor(self):
        scn = generate_scenario(PhysicalConfig(), Mission(), 8)
        snap = associate(scn, (200.0, 900.0), "relay", MODELS, OMNI)
        assert snap.donor is not None
        assert snap.loads.sum() == scn.n_ue + 1

    def test_relay_e2e_bounded_by_backhaul(self):
        scn = generate_scenario(PhysicalConfig(), Mission(), 12)
        snap = associate(scn, (600.0, 400.0), "relay", MODELS, OMNI)
        bh = radio.backhaul_budget(scn, (600.0, 400.0), MODELS, OMNI)
        bh_sir = bh / (bh.sum() - bh)
        gamma_bh = bh_sir[snap.donor]
        assert np.argmax(bh_sir) == snap.donor
        on_uav = snap.server == snap.uav_index
        assert np.all(snap.sir[on_uav] <= 2.0 * gamma_bh + 1e-12)

    def test_relay_rules_differ(self):
        scn = generate_scenario(PhysicalConfig(), Mission(), 5)
        a = associate(scn, (500.0, 500.0), "relay", MODELS, OMNI, "best_direct")
        b = associate(scn, (500.0, 500.0), "relay", MODELS, OMNI, "backhaul_literal")
        # the literal rule admits UEs whose e2e SIR only beats the backhaul SIR
        assert (a.server == a.uav_index).sum() <= (b.server == b.uav_index).sum()

    def test_sir_invariant_under_common_power_scaling(self):
        mission = Mission()
        base = generate_scenario(PhysicalConfig(), mission, 21)
        scaled = Scenario(config=PhysicalConfig(p_mbs_dbm=56.0, p_uav_dbm=40.0),
                          mission=mission, mbs_xy=base.mbs_xy, ue_xy=base.ue_xy,
                          seed=21)
        for mode in ("standalone", "relay"):
            s1 = associate(base, (400.0, 800.0), mode, MODELS, OMNI)
            s2 = associate(scaled, (400.0, 800.0), mode, MODELS, OMNI)
            assert np.array_equal(s1.server, s2.server)
            assert np.allclose(s1.sir, s2.sir, rtol=1e-12)

    def test_no_mbs_rejected(self):
        scn = make_scenario(np.zeros((0, 2)), [[100.0, 100.0]])
        with pytest.raises(ValueError, match="no MBS"):
            associate(scn, (0.0, 0.0), "standalone", MODELS, OMNI)

    def test_relay_needs_two_mbs(self):
        scn = make_scenario([[500.0, 500.0]], [[100.0, 100.0]])
        with pytest.raises(ValueError, match="2 MBSs"):
            associate(scn, (0.0, 0.0), "relay", MODELS, OMNI)


class TestCriterionReward:
    def test_pf_is_sum_of_logs(self):
        rates = np.array([0.5, 0.25, 2.0])
        assert criterion_reward(rates, "pf") == pytest.approx(
            sum(math.log10(r) for r in rates), rel=1e-12)

    def test_pf_floor_prevents_minus_inf(self):
        rates = np.array([0.0, 1.0])
        got = criterion_reward(rates, "pf")
        assert np.isfinite(got)
        assert got == pytest.approx(math.log10(1e-9), rel=1e-12)

    def test_sum_rate_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            rates = rng.uniform(0.0, 1.0, size=30)
            assert criterion_reward(rates, "sum_rate") >= 0.0
            assert criterion_reward(rates, "sum_rate") == pytest.approx(rates.sum())

    def test_p5_is_fifth_smallest_of_100(self):
        rng = np.random.default_rng(9)
        rates = rng.uniform(0.0, 2.0, size=100)
        assert criterion_reward(rates, "p5") == sorted(rates)[4]

    def test_p5_small_populations(self):
        assert criterion_reward(np.array([0.7]), "p5") == 0.7
        assert criterion_reward(np.array([0.7, 0.3]), "p5") == 0.3

    def test_empty_rates(self):
        assert criterion_reward(np.zeros(0), "pf") == 0.0
        assert criterion_reward(np.zeros(0), "p5") == 0.0

    def test_unknown_criterion(self):
        with pytest.raises(ValueError):
            criterion_reward(np.ones(3), "max_min")


class TestRewardMap:
    def grid(self):
        return StateGrid.from_mission(Mission())

    def test_symmetric_network_gives_symmetric_map(self):
        # mirror pairs only: a UE on the diagonal would tie between the two
        # MBSs and the lowest-id tie-break would (correctly) skew the loads
        scn = make_scenario(
            mbs=[[200.0, 700.0], [700.0, 200.0]],
            ue=[[100.0, 400.0], [400.0, 100.0], [800.0, 600.0], [600.0, 800.0]],
        )
        models = LinkModels(mbs_ue=OhplmModel(), uav_ue=OhplmModel())
        maps = radio.build_reward_maps(scn, ("pf", "sum_rate", "p5"), "standalone",
                                       models, OMNI, self.grid())
        for rm in maps.values():
            assert np.allclose(rm.rewards, rm.rewards.T, rtol=1e-10, atol=1e-12)
            assert np.allclose(rm.max_sir_db, rm.max_sir_db.T, rtol=1e-10, atol=1e-12)

    def test_single_criterion_matches_joint_build(self):
        scn = generate_scenario(PhysicalConfig(lambda_ue=20.0), Mission(), 15)
        models = LinkModels(mbs_ue=OhplmModel(), uav_ue=OhplmModel())
        solo = radio.build_reward_map(scn, "pf", "standalone", models, OMNI, self.grid())
        joint = radio.build_reward_maps(scn, ("pf", "sum_rate"), "standalone",
                                        models, OMNI, self.grid())["pf"]
        assert np.array_equal(solo.rewards, joint.rewards)

    def test_rewards_finite_and_deterministic(self):
        scn = generate_scenario(PhysicalConfig(), Mission(), 30)
        models = LinkModels(mbs_ue=OhplmModel(), uav_ue=OhplmModel())
        a = radio.build_reward_map(scn, "pf", "standalone", models, OMNI, self.grid())
        b = radio.build_reward_map(scn, "pf", "standalone", models, OMNI, self.grid())
        assert np.all(np.isfinite(a.rewards))
        assert np.array_equal(a.rewards, b.rewards)

    def test_csv_export(self, tmp_path):
        scn = generate_scenario(PhysicalConfig(lambda_ue=10.0), Mission(), 2)
        models = LinkModels(mbs_ue=OhplmModel(), uav_ue=OhplmModel())
        rm = radio.build_reward_map(scn, "sum_rate", "standalone", models, OMNI, self.grid())
        path = tmp_path / "map.csv"
        rm.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "cell_x_m,cell_y_m,reward,max_sir_db"
        assert len(lines) == 1 + 13 * 13


def test_stage_rates_shape():
    scn = generate_scenario(PhysicalConfig(lambda_ue=30.0), Mission(), 6)
    rates = stage_rates([(0.0, 0.0), (100.0, 0.0), (100.0, 100.0)],
                        scn, "standalone", MODELS, OMNI)
    assert rates.shape == (3, scn.n_ue)
    assert np.all(rates >= 0.0)


def test_antenna_changes_sir_map_with_fixed_nodes():
    cfg = RunConfig(antenna_modes=("omni", "dipole"))
    scn = generate_scenario(PhysicalConfig(), Mission(), 11)
    grid = StateGrid.from_mission(Mission())
    models = cfg.link_models("ohplm")
    omni_map = radio.build_reward_map(scn, "pf", "standalone", models,
                                      cfg.antenna_setup("omni"), grid)
    dip_map = radio.build_reward_map(scn, "pf", "standalone", models,
                                     cfg.antenna_setup("dipole"), grid)
    assert not np.allclose(omni_map.max_sir_db, dip_map.max_sir_db)
