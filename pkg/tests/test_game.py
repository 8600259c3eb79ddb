"""Game engine: plays, expectations, dominance, labels, determinism."""

from __future__ import annotations

from fractions import Fraction

import pytest

from htlc_arena.core import ALICE, BOB, ScenarioError, miner_party
from htlc_arena.agents import (AliceHonest, AliceOffline, BobHonest,
                               BobNaiveBriber, CensorRelated, HonestFeeMax,
                               M2MbaActive)
from htlc_arena.game import (MinerProfile, Schedule, StrategyProfile,
                             dominance_check, enumerate_schedules,
                             expected_utilities, play)

from conftest import (M1, M2, demba_scenario, flat_schedule, he_scenario,
                      mad_scenario, naive_scenario)


def honest_profile(scen, miner_policy=None):
    miners = {m.party: (miner_policy or HonestFeeMax())
              for m in scen.miners}
    return StrategyProfile(AliceHonest(), BobHonest(1), miners)


class TestPlay:
    def test_honest_naive_baseline(self):
        scen = naive_scenario(t_pub=2, f_dep_a=3)
        out = play(scen, honest_profile(scen), flat_schedule(scen),
                   check_invariants=True)
        assert out.delta(ALICE) == scen.v_dep - scen.f_dep_a
        assert out.terminal == "dep-A"
        # fee lands with the miner of the first round after the broadcast
        assert out.state.redemptions["dep"][1] == 3

    def test_naive_bribery_matches_closed_form(self):
        scen = naive_scenario(v_dep=100, T=5, t_pub=1, br=2, f_dep_b=1,
                              f_cbob_b=1)
        profile = StrategyProfile(AliceHonest(), BobNaiveBriber(),
                                  {M1: CensorRelated()})
        out = play(scen, profile, flat_schedule(scen), check_invariants=True)
        k = scen.T - scen.t_pub
        assert out.delta(BOB) == 100 - ((k + 1) * 2 + 1 + 1) == 88

    def test_m2mba_per_block_oracle(self):
        miners = tuple(MinerProfile(miner_party(f"m{i}"), Fraction(1, 4),
                                    "active", True) for i in range(1, 5))
        scen = he_scenario(v_dep=100, v_col=50, T=5, t_pub=1, l=2, br=2, f=0,
                           f_dep_a=3, f_dep_b=2, miners=miners)
        parties = scen.miner_parties()
        profile = StrategyProfile(AliceHonest(), BobHonest(),
                                  {p: M2MbaActive() for p in parties})
        # window blocks by m1, m2, m3, m4; m3 takes the collateral at T+1
        sched = Schedule((parties[0], parties[0], parties[1], parties[2],
                          parties[3], parties[2], parties[0], parties[0],
                          parties[0]))
        out = play(scen, profile, sched, check_invariants=True)
        assert out.delta(parties[2]) == 50 - 3 * 2
        for p in (parties[0], parties[1], parties[3]):
            assert out.delta(p) == 2
        assert out.burned == 100

    def test_m2mba_equal_split(self):
        miners = tuple(MinerProfile(miner_party(f"m{i}"), Fraction(1, 4),
                                    "active", True) for i in range(1, 5))
        scen = he_scenario(v_dep=100, v_col=60, T=5, t_pub=1, l=2, f=0,
                           f_dep_a=3, f_dep_b=2, miners=miners,
                           m2mba_split="equal")
        parties = scen.miner_parties()
        profile = StrategyProfile(AliceHonest(), BobHonest(),
                                  {p: M2MbaActive() for p in parties})
        sched = Schedule((parties[0], parties[0], parties[1], parties[2],
                          parties[3], parties[2], parties[0], parties[0],
                          parties[0]))
        out = play(scen, profile, sched, check_invariants=True)
        # v_col * k_i / k with k = 4 and one censored block each
        for p in parties:
            assert out.delta(p) == Fraction(60, 4)
        assert out.conserves()

    def test_short_schedule_rejected(self):
        scen = naive_scenario()
        with pytest.raises(ScenarioError):
            play(scen, honest_profile(scen), Schedule((M1,)))


class TestProtocolFlows:
    def test_he_reveal_pays_both_sides(self):
        scen = he_scenario(T=5, t_pub=2, l=2, f=1, f_dep_a=3)
        out = play(scen, honest_profile(scen), flat_schedule(scen),
                   check_invariants=True)
        assert out.delta(ALICE) == scen.v_dep - scen.f_dep_a
        assert out.delta(BOB) == scen.v_col
        assert out.terminal == "dep-A"

    def test_he_staged_refund_arrives_after_delay(self):
        scen = he_scenario(T=5, l=2, f=1, f_dep_b=2, f_col_b=2)
        profile = StrategyProfile(AliceOffline(), BobHonest(),
                                  {M1: HonestFeeMax()})
        out = play(scen, profile, flat_schedule(scen), check_invariants=True)
        assert out.delta(BOB) == (scen.v_dep + scen.v_col
                                  - scen.f_dep_b - scen.f_col_b)
        assert out.state.redemptions["col"][:2] == ("col-B", scen.T + scen.l + 1)

    def test_naive_refund_when_payee_silent(self):
        scen = naive_scenario(T=5, f_dep_b=2)
        profile = StrategyProfile(AliceOffline(), BobHonest(),
                                  {M1: HonestFeeMax()})
        out = play(scen, profile, flat_schedule(scen), check_invariants=True)
        assert out.delta(BOB) == scen.v_dep - scen.f_dep_b
        assert out.trace[-1] == "nred-nrev"  # the reveal never went public

    def test_mad_confiscation_when_payer_cheats(self):
        # The payer's refund attempt reveals his preimage; a waiting miner
        # takes both pots instead of including it.
        from htlc_arena.agents import M2MbaPassive
        scen = mad_scenario(T=5, f=0, f_dep_a=3)
        profile = StrategyProfile(AliceHonest(), BobHonest(),
                                  {M1: M2MbaPassive()})
        out = play(scen, profile, flat_schedule(scen), check_invariants=True)
        assert out.delta(M1) == scen.v_dep + scen.v_col
        assert out.delta(BOB) == 0 and out.delta(ALICE) == 0
        assert out.terminal == "dep-M"
        assert out.trace[-1] == "nred-rev"


class TestExpectations:
    def test_single_miner_degenerates_to_one_play(self):
        scen = naive_scenario(t_pub=2)
        profile = honest_profile(scen)
        eu = expected_utilities(scen, profile)
        out = play(scen, profile, flat_schedule(scen))
        for party, value in eu.utilities.items():
            assert value == out.delta(party)

    def test_conditional_bribe_income_is_exact(self):
        # lambda_i = 0.3, lambda_col = 0.6 seen as a coalition share of 1/2:
        # expected income must equal (T - t_pub) * br * lambda_i/lambda_col.
        mi, rest = miner_party("mi"), miner_party("rest")
        scen = he_scenario(v_dep=60, v_col=30, T=5, t_pub=1, l=2, br=2, f=0,
                           f_dep_a=1, f_dep_b=1, f_col_b=1,
                           miners=(MinerProfile(mi, Fraction(1, 2), "active", True),
                                   MinerProfile(rest, Fraction(1, 2), "active", True)))
        profile = StrategyProfile(AliceHonest(), BobHonest(),
                                  {mi: M2MbaActive(), rest: M2MbaActive()})
        eu = expected_utilities(scen, profile)
        assert eu.bribe_income[mi] == 4 * 2 * Fraction(1, 2) == 4

    def test_exact_expectation_is_order_independent(self):
        mi, rest = miner_party("mi"), miner_party("rest")
        scen = he_scenario(T=3, t_pub=1, l=1, br=2, f=0,
                           miners=(MinerProfile(mi, Fraction(1, 3), "active", True),
                                   MinerProfile(rest, Fraction(2, 3), "active", True)))
        profile = StrategyProfile(AliceHonest(), BobHonest(),
                                  {mi: M2MbaActive(), rest: M2MbaActive()})
        pairs = [(s.weight, play(scen, profile, s).deltas)
                 for s in enumerate_schedules(scen)]
        fwd: dict = {}
        back: dict = {}
        for w, deltas in pairs:
            for p, d in deltas.items():
                fwd[p] = fwd.get(p, Fraction(0)) + w * d
        for w, deltas in reversed(pairs):
            for p, d in deltas.items():
                back[p] = back.get(p, Fraction(0)) + w * d
        assert fwd == back
        assert sum(w for w, _ in pairs) == 1

    def test_mc_mean_within_its_own_ci_of_exact(self):
        mi, rest = miner_party("mi"), miner_party("rest")
        scen = he_scenario(T=3, t_pub=1, l=1, br=2, f=0, v_dep=60, v_col=30,
                           miners=(MinerProfile(mi, Fraction(1, 2), "active", True),
                                   MinerProfile(rest, Fraction(1, 2), "active", True)),
                           seed=20240811)
        profile = StrategyProfile(AliceHonest(), BobHonest(),
                                  {mi: M2MbaActive(), rest: M2MbaActive()})
        exact = expected_utilities(scen, profile).of(mi)
        mc = expected_utilities(scen, profile, mode=("monte-carlo", 3000))
        lo, hi = mc.ci[mi]
        assert lo <= float(exact) <= hi

    def test_mc_is_seed_deterministic(self):
        scen = naive_scenario(miners=(MinerProfile(M1, Fraction(1, 2)),
                                      MinerProfile(M2, Fraction(1, 2))),
                              seed=5)
        profile = honest_profile(scen)
        a = expected_utilities(scen, profile, mode=("monte-carlo", 200))
        b = expected_utilities(scen, profile, mode=("monte-carlo", 200))
        assert a.utilities == b.utilities and a.ci == b.ci

    def test_enumeration_cap(self):
        miners = tuple(MinerProfile(miner_party(f"m{i}"), Fraction(1, 4))
                       for i in range(1, 5))
        scen = naive_scenario(T=8, miners=miners, enum_cap=100)
        with pytest.raises(ScenarioError) as e:
            expected_utilities(scen, honest_profile(scen))
        assert "enumeration-cap-exceeded" in str(e.value)

    def test_linearity_under_token_scaling(self):
        # All integer amounts scaled by c scale every utility by exactly c.
        for c in (1, 3):
            scen = naive_scenario(v_dep=100 * c, br=2 * c, f=1 * c,
                                  f_dep_a=3 * c, f_dep_b=1 * c, f_cbob_b=1 * c)
            profile = StrategyProfile(AliceHonest(), BobNaiveBriber(),
                                      {M1: CensorRelated()})
            out = play(scen, profile, flat_schedule(scen))
            assert out.delta(BOB) == 88 * c


class TestDominance:
    def test_single_strategy_space_is_trivially_strict(self):
        scen = naive_scenario()
        profile = honest_profile(scen)
        candidate = profile.miners[M1]
        verdict = dominance_check(scen, M1, candidate, [candidate], [profile])
        assert verdict.verdict == "strict"

    def test_accept_bribe_dominates_when_hypothesis_holds(self):
        mi, rest = miner_party("mi"), miner_party("rest")
        scen = he_scenario(v_dep=60, v_col=30, T=5, t_pub=1, l=2, br=2, f=0,
                           f_dep_a=1, f_dep_b=1,
                           miners=(MinerProfile(mi, Fraction(1, 2), "active", True),
                                   MinerProfile(rest, Fraction(1, 2), "active", True)))
        base = StrategyProfile(AliceHonest(), BobHonest(),
                               {mi: M2MbaActive(), rest: M2MbaActive()})
        accept = M2MbaActive("accept")
        verdict = dominance_check(scen, mi, accept, [accept, HonestFeeMax()],
                                  [base], pin={scen.T + 1: rest})
        assert verdict.verdict == "strict"

    def test_tiny_bribe_flips_to_none_with_witness(self):
        # Bribe low enough that including the reveal beats censoring.
        mi, rest = miner_party("mi"), miner_party("rest")
        scen = he_scenario(v_dep=60, v_col=30, T=3, t_pub=1, l=2, br=0, f=0,
                           f_dep_a=8, f_dep_b=8,
                           miners=(MinerProfile(mi, Fraction(1, 2), "active", True),
                                   MinerProfile(rest, Fraction(1, 2), "active", True)))
        base = StrategyProfile(AliceHonest(), BobHonest(),
                               {mi: M2MbaActive(), rest: M2MbaActive()})
        accept = M2MbaActive("accept")
        verdict = dominance_check(scen, mi, accept, [accept, HonestFeeMax()],
                                  [base], pin={scen.T + 1: rest})
        assert verdict.verdict == "none"
        assert verdict.witness["alternative"] == "honest-fee-max"
        assert (verdict.witness["alternative_utility"]
                > verdict.witness["candidate_utility"])


class TestLabels:
    def test_fresh_game_is_red(self):
        scen = he_scenario()
        out = play(scen, StrategyProfile(AliceOffline(), BobHonest(),
                                         {M1: HonestFeeMax()}),
                   flat_schedule(scen))
        assert out.trace[0] == "red"

    def test_demba_honest_reaches_nred_ab(self):
        scen = demba_scenario()
        out = play(scen, honest_profile(scen), flat_schedule(scen))
        assert out.trace[-1] == "nred-AB"
        assert out.terminal == "to-Alice"

    def test_demba_late_payer_gets_t_suffix(self):
        from htlc_arena.agents import AliceGrief, BobDelay
        scen = demba_scenario(horizon=10)
        profile = StrategyProfile(AliceGrief(), BobDelay(1),
                                  {M1: HonestFeeMax()})
        out = play(scen, profile, flat_schedule(scen))
        assert out.trace[-1] == "nred-AA'BT"
        assert out.terminal == "burn"

    def test_labels_never_regress(self):
        scen = naive_scenario(t_pub=2)
        out = play(scen, honest_profile(scen), flat_schedule(scen))
        seen_nonred = False
        for label in out.trace:
            if label != "red":
                seen_nonred = True
            assert not (seen_nonred and label == "red")
