"""Round-driving game engine.

A play is fully determined by (scenario, strategy profile, miner schedule).
Expected utilities are either exact (enumerate every schedule, weight by the
product of miner power, sum in rational arithmetic) or Monte-Carlo with a
seeded generator.  Dominance checks brute-force finite policy spaces on top
of the expectation machinery.

Utilities carry no discounting: they are raw end-of-game token deltas from
the post-setup baseline.  The one exception to pre-funded contracts is the
two-phase protocol, where the payer publishes the deposit contract after
both collaterals exist, so its funding lands inside the measured window.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import ALICE, BOB, EXTERNAL, Party, ScenarioError, debit
from .contracts import (COL_M, DEP_A, FeeSchedule, PRE_A, PRE_A2, PRE_AA2,
                        PRE_B, build_demba, build_he_htlc, build_mad_htlc,
                        build_naive_htlc, derive_he_delay)
from .ledger import Block, ChainState, apply_block, broadcast

PROTOCOLS = ("naive", "mad", "he", "demba")

# Canonical contract ids used by the builders and the policies.
DEP_ID = "dep"
COL_ID = "col"
COL_A_ID = "col-A"
COL_B_ID = "col-B-contract"
CBOB_ID = "cbob"
CM2M_ID = "cm2m"

MAD_HE_LABELS = ("red", "nred-nrev", "nred-rev", "nred-A")
DEMBA_LABELS = ("all-red", "nred-AB", "nred-A'B", "nred-AA'B",
                "nred-ABT", "nred-A'BT", "nred-AA'BT")


@dataclass(frozen=True)
class MinerProfile:
    party: Party
    power: Fraction
    kind: str = "passive"  # passive | active
    colluding: bool = False


@dataclass
class Scenario:
    """All protocol, fee, timing, and miner parameters for one game."""

    protocol: str
    v_dep: int
    T: int
    miners: tuple
    v_col: int = 0
    v_col_a: int = 0
    v_col_b: int = 0
    v_ded: int = 0
    f: int = 1
    f_dep_a: int = 2
    f_dep_b: int = 2
    f_col_b: int = 2
    f_cbob_b: int = 1
    f_calice_a: int = 1
    fee_schedule: Optional[FeeSchedule] = None
    l: int = 0
    t_pub: int = 1
    horizon: Optional[int] = None
    br: int = 0
    epsilon: int = 0
    capacity: int = 8
    seed: int = 0
    mode: tuple = ("exact",)
    enum_cap: int = 10_000_000
    m2mba_split: str = "per-block"  # per-block | equal
    pact_bribes: Optional[dict] = None  # Party -> per-block bribe override
    secrets: dict = field(default_factory=lambda: {
        PRE_A: "secret:pre_A", PRE_A2: "secret:pre_A'", PRE_B: "secret:pre_B"})

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ScenarioError(f"unknown protocol {self.protocol!r}")
        total = sum((m.power for m in self.miners), Fraction(0))
        if total != 1:
            raise ScenarioError(f"miner power must sum to 1, got {total}")
        if self.protocol == "he" and self.l < 1:
            self.l = derive_he_delay(self.v_dep, self.v_col, self.f)
        if self.horizon is None:
            self.horizon = self.T + self.l + 2
        if self.horizon < self.T + self.l + 2:
            raise ScenarioError("horizon too short for every refund path to fire")
        if self.t_pub < 1 or self.t_pub > self.T:
            raise ScenarioError("t_pub must fall in [1, T]")
        if self.protocol == "demba" and self.fee_schedule is None:
            raise ScenarioError("two-phase protocol requires a fee schedule")

    @property
    def lambda_col(self) -> Fraction:
        return sum((m.power for m in self.miners
                    if m.colluding and m.kind == "active"), Fraction(0))

    def miner_parties(self) -> tuple:
        return tuple(m.party for m in self.miners)

    def profile_of(self, party: Party) -> MinerProfile:
        for m in self.miners:
            if m.party == party:
                return m
        raise ScenarioError(f"no such miner {party}")

    def digests(self) -> dict:
        return dict(self.secrets)


@dataclass
class StrategyProfile:
    alice: object
    bob: object
    miners: dict  # Party -> miner policy

    def describe(self) -> str:
        miners = ",".join(f"{p.id}={pol.name}" for p, pol in
                          sorted(self.miners.items(), key=lambda kv: kv[0].id))
        return f"alice={self.alice.name} bob={self.bob.name} {miners}"


@dataclass(frozen=True)
class Schedule:
    miners: tuple  # one Party per round, index 0 = round 1
    weight: Fraction = Fraction(1)


@dataclass
class Outcome:
    """Per-party net token deltas at game end, plus labelled trace.

    `escrow_delta` is the change in tokens still held by contracts (live
    deposits plus bribery pools) since the baseline; party deltas, escrow,
    burn, and mints always sum to zero.
    """

    deltas: dict
    burned: int
    minted: int
    trace: tuple
    terminal: str
    bribe_income: dict
    escrow_delta: Fraction
    state: ChainState

    def delta(self, party: Party) -> Fraction:
        return self.deltas.get(party, Fraction(0))

    def conserves(self) -> bool:
        return (sum(self.deltas.values(), Fraction(0)) + self.escrow_delta
                + self.burned - self.minted) == 0


# ---------------------------------------------------------------------------
# Genesis.
# ---------------------------------------------------------------------------


def _start_balance(scen: Scenario) -> int:
    fees = (scen.f + scen.f_dep_a + scen.f_dep_b + scen.f_col_b
            + scen.f_cbob_b + scen.f_calice_a + scen.br + scen.epsilon)
    if scen.fee_schedule is not None:
        fees += sum(scen.fee_schedule.paid.values())
    bulk = scen.v_dep + scen.v_col + scen.v_col_a + scen.v_col_b + scen.v_ded
    return 3 * bulk + (fees + 1) * (scen.horizon + 4) + 100


def build_genesis(scen: Scenario) -> tuple:
    """Construct the funded round-0 state; returns (state, baseline balances).

    The genesis depends only on scenario fields, so it is built once per
    scenario and cloned per play.
    """
    cached = getattr(scen, "_genesis", None)
    if cached is not None:
        return cached[0].clone(), cached[1], cached[2]
    state, baseline, escrow0 = _build_genesis(scen)
    scen._genesis = (state, baseline, escrow0)
    return state.clone(), baseline, escrow0


def _build_genesis(scen: Scenario) -> tuple:
    digests = scen.digests()
    meta = {"T": scen.T, "l": scen.l, "target_contract": DEP_ID,
            "target_path": DEP_A, "col_contract": COL_ID,
            "confiscation_path": COL_M}
    if scen.protocol == "naive":
        dep = build_naive_htlc(ALICE, BOB, scen.v_dep, digests[PRE_A], scen.T,
                               DEP_ID)
        contracts = {DEP_ID: dep}
        live = {DEP_ID: scen.v_dep}
    elif scen.protocol == "mad":
        dep, col = build_mad_htlc(ALICE, BOB, scen.v_dep, scen.v_col, digests,
                                  scen.T, DEP_ID, COL_ID)
        contracts = {DEP_ID: dep, COL_ID: col}
        live = {DEP_ID: scen.v_dep, COL_ID: scen.v_col}
    elif scen.protocol == "he":
        dep, col = build_he_htlc(ALICE, BOB, scen.v_dep, scen.v_col, digests,
                                 scen.T, scen.l, DEP_ID, COL_ID)
        contracts = {DEP_ID: dep, COL_ID: col}
        live = {DEP_ID: scen.v_dep + scen.v_col, COL_ID: 0}
    else:
        dep, col_a, col_b = build_demba(ALICE, BOB, scen.v_dep, scen.v_col_a,
                                        scen.v_col_b, scen.v_ded, digests,
                                        scen.T, scen.fee_schedule,
                                        DEP_ID, COL_A_ID, COL_B_ID)
        contracts = {DEP_ID: dep, COL_A_ID: col_a, COL_B_ID: col_b}
        live = {COL_A_ID: scen.v_col_a, COL_B_ID: scen.v_col_b}
        meta["target_contract"] = COL_A_ID
        meta["target_path"] = PRE_A
    start = _start_balance(scen)
    balances = {ALICE: start, BOB: start,
                EXTERNAL: start + scen.capacity * scen.f * (scen.horizon + 2)}
    for m in scen.miners:
        balances[m.party] = start
    state = ChainState(contracts=contracts, live=live, balances=balances,
                       fee_schedule=scen.fee_schedule, meta=meta)
    baseline = dict(balances)
    escrow0 = sum(live.values())
    if scen.protocol == "demba":
        # Deposit contract goes live only after both collaterals exist, so
        # the payer funds it inside the measured window.
        debit(state.balances, BOB, scen.v_dep)
        state.live[DEP_ID] = scen.v_dep
    return state, baseline, escrow0


# ---------------------------------------------------------------------------
# State labelling.
# ---------------------------------------------------------------------------


def state_label(state: ChainState, rnd: int, protocol: str) -> str:
    """Classify the game state; a pure function of chain state and round."""
    if protocol == "demba":
        red_a = state.redemptions.get(COL_A_ID)
        red_b = state.redemptions.get(COL_B_ID)
        if red_a is None or red_b is None:
            return "all-red"
        mode = {PRE_A: "A", PRE_A2: "A'", PRE_AA2: "AA'"}[red_a[0]]
        b_round = state.reveal_round(COL_B_ID, PRE_B)
        late = b_round is not None and b_round > state.meta.get("T", 0)
        return f"nred-{mode}B" + ("T" if late else "")
    entry = state.redemptions.get(DEP_ID)
    if entry is None:
        return "red"
    if entry[0] == DEP_A:
        return "nred-A"
    pre_a_known = any(slot == PRE_A for (_, slot) in state.known)
    return "nred-rev" if pre_a_known else "nred-nrev"


_LABEL_ORDER = {name: i for i, name in enumerate(
    ("red", "all-red", "nred-nrev", "nred-rev", "nred-A",
     "nred-AB", "nred-A'B", "nred-AA'B", "nred-ABT", "nred-A'BT",
     "nred-AA'BT"))}


# ---------------------------------------------------------------------------
# Play.
# ---------------------------------------------------------------------------


def _check_profile(scen: Scenario, profile: StrategyProfile) -> None:
    for pol in (profile.alice, profile.bob, *profile.miners.values()):
        allowed = getattr(pol, "protocols", None)
        if allowed is not None and scen.protocol not in allowed:
            raise ScenarioError(
                f"policy {pol.name!r} not valid for protocol {scen.protocol!r}")
    for party in scen.miner_parties():
        if party not in profile.miners:
            raise ScenarioError(f"no policy for miner {party}")


def play(scen: Scenario, profile: StrategyProfile, schedule: Schedule,
         check_invariants: bool = False) -> Outcome:
    """Run one deterministic game to the horizon."""
    if len(schedule.miners) < scen.horizon:
        raise ScenarioError("schedule shorter than horizon")
    _check_profile(scen, profile)
    state, baseline, escrow0 = build_genesis(scen)
    for pol in (profile.alice, profile.bob):
        state = pol.setup(state, scen, profile)
    for party in sorted(profile.miners, key=lambda p: p.id):
        state = profile.miners[party].setup(state, scen, profile, party)
    expected_total = state.conservation_total()
    trace = []
    prev_rank = -1
    for rnd in range(1, scen.horizon + 1):
        miner = schedule.miners[rnd - 1]
        plan = profile.miners[miner].build_block(state, rnd, miner, scen, profile)
        fill = max(0, scen.capacity - len(plan.txs))
        block = Block(round=rnd, miner=miner, txs=tuple(plan.txs),
                      unrelated_fill=fill, unrelated_fee=scen.f,
                      capacity=scen.capacity, coinbase=tuple(plan.coinbase))
        state = apply_block(state, block)
        emissions = list(profile.alice.broadcasts(state, rnd, scen))
        emissions += profile.bob.broadcasts(state, rnd, scen)
        if emissions:
            state = broadcast(state, emissions)
        label = state_label(state, rnd, scen.protocol)
        rank = _LABEL_ORDER[label]
        if trace and rank < prev_rank and label in ("red", "all-red"):
            raise ScenarioError(f"state label regressed to {label} at {rnd}")
        prev_rank = rank
        trace.append(label)
        if check_invariants and state.conservation_total() != expected_total:
            raise ScenarioError(f"conservation violated at round {rnd}")
    deltas = {}
    parties = set(baseline) | set(state.balances)
    for party in parties:
        deltas[party] = Fraction(state.balances.get(party, 0)
                                 - baseline.get(party, 0))
    bribe_income: dict = {}
    for party, amount, tag in state.bribe_log:
        if tag == "censor-bribe":
            bribe_income[party] = bribe_income.get(party, 0) + amount
    _settle_equal_split(scen, profile, schedule, state, deltas)
    terminal = _terminal_tag(state, scen)
    escrow = (sum(state.live.values())
              + sum(c.pool_total() for c in state.bribery.values()))
    return Outcome(deltas=deltas, burned=state.burned,
                   minted=sum(m[1] for m in state.mint_log),
                   trace=tuple(trace), terminal=terminal,
                   bribe_income=bribe_income,
                   escrow_delta=Fraction(escrow - escrow0), state=state)


def _terminal_tag(state: ChainState, scen: Scenario) -> str:
    if scen.protocol == "demba":
        entry = state.redemptions.get(DEP_ID)
        if entry is None:
            return "pending"
        return {DEP_A: "to-Alice", "dep-B": "to-Bob",
                "dep-Burn": "burn"}.get(entry[0], entry[0])
    entry = state.redemptions.get(DEP_ID)
    return entry[0] if entry else "pending"


def _settle_equal_split(scen: Scenario, profile: StrategyProfile,
                        schedule: Schedule, state: ChainState,
                        deltas: dict) -> None:
    """Reallocate a confiscation equally by censored blocks mined.

    Used by the miner-pact equal-split variant: the confiscator keeps
    v_col * k_i / k and pays every other censoring colluder v_col * k_j / k,
    where k counts the censored window blocks.  Pure reallocation, so the
    outcome total is unchanged.
    """
    if scen.protocol != "he" or scen.m2mba_split != "equal":
        return
    entry = state.redemptions.get(COL_ID)
    if entry is None or entry[0] != COL_M:
        return
    confiscator = entry[2]
    colluders = {m.party for m in scen.miners if m.colluding and m.kind == "active"}
    if confiscator not in colluders:
        return
    window = range(scen.t_pub + 1, scen.T + 1)
    counts: dict = {}
    for rnd in window:
        counts[schedule.miners[rnd - 1]] = counts.get(schedule.miners[rnd - 1], 0) + 1
    k = len(list(window))
    if k == 0:
        return
    v_col = scen.v_col
    for party, k_j in sorted(counts.items(), key=lambda kv: kv[0].id):
        if party == confiscator or party not in colluders:
            continue
        share = Fraction(v_col) * k_j / k
        deltas[party] = deltas.get(party, Fraction(0)) + share
        deltas[confiscator] -= share


# ---------------------------------------------------------------------------
# Expectations over schedules.
# ---------------------------------------------------------------------------


@dataclass
class ExpectedUtilities:
    utilities: dict  # Party -> Fraction
    bribe_income: dict  # Party -> Fraction
    burned: Fraction
    mode: str
    trials: Optional[int] = None
    ci: Optional[dict] = None  # Party -> (low, high) floats

    def of(self, party: Party) -> Fraction:
        return self.utilities.get(party, Fraction(0))


def enumerate_schedules(scen: Scenario, pin: Optional[dict] = None):
    """Yield every schedule (with exact weight), optionally pinning rounds.

    `pin` maps a 1-based round to the party forced to mine it; pinned rounds
    contribute weight 1, which is the conditional measure given those picks.
    """
    pin = pin or {}
    parties = scen.miner_parties()
    powers = {m.party: m.power for m in scen.miners}
    free = [r for r in range(1, scen.horizon + 1) if r not in pin]
    if len(parties) ** len(free) > scen.enum_cap:
        raise ScenarioError(
            f"enumeration-cap-exceeded: {len(parties)}^{len(free)} schedules;"
            " use monte-carlo mode")
    for combo in itertools.product(parties, repeat=len(free)):
        assignment = dict(pin)
        weight = Fraction(1)
        for rnd, party in zip(free, combo):
            assignment[rnd] = party
            weight *= powers[party]
        miners = tuple(assignment[r] for r in range(1, scen.horizon + 1))
        yield Schedule(miners, weight)


def sample_schedule(scen: Scenario, rng: np.random.Generator,
                    pin: Optional[dict] = None) -> Schedule:
    pin = pin or {}
    parties = scen.miner_parties()
    probs = np.array([float(m.power) for m in scen.miners])
    probs = probs / probs.sum()
    picks = rng.choice(len(parties), size=scen.horizon, p=probs)
    miners = tuple(pin.get(r, parties[picks[r - 1]])
                   for r in range(1, scen.horizon + 1))
    return Schedule(miners, Fraction(1))


def expected_utilities(scen: Scenario, profile: StrategyProfile,
                       pin: Optional[dict] = None,
                       mode: Optional[tuple] = None) -> ExpectedUtilities:
    """Exact rational expectation or seeded Monte-Carlo mean with 95% CI."""
    mode = mode or scen.mode
    if mode[0] == "exact":
        utilities: dict = {}
        bribes: dict = {}
        burned = Fraction(0)
        total_weight = Fraction(0)
        for schedule in enumerate_schedules(scen, pin):
            out = play(scen, profile, schedule)
            w = schedule.weight
            total_weight += w
            for party, d in out.deltas.items():
                utilities[party] = utilities.get(party, Fraction(0)) + w * d
            for party, b in out.bribe_income.items():
                bribes[party] = bribes.get(party, Fraction(0)) + w * b
            burned += w * out.burned
        assert total_weight == 1
        return ExpectedUtilities(utilities, bribes, burned, "exact")
    trials = mode[1]
    rng = np.random.default_rng(scen.seed)
    sums: dict = {}
    sq_sums: dict = {}
    bribes = {}
    burned = Fraction(0)
    for i in range(trials):
        schedule = sample_schedule(scen, rng, pin)
        out = play(scen, profile, schedule)
        for party, d in out.deltas.items():
            sums[party] = sums.get(party, Fraction(0)) + d
            sq_sums[party] = sq_sums.get(party, Fraction(0)) + d * d
        for party, b in out.bribe_income.items():
            bribes[party] = bribes.get(party, Fraction(0)) + b
        burned += out.burned
    utilities = {p: s / trials for p, s in sums.items()}
    ci = {}
    for party, s in sums.items():
        mean = float(s) / trials
        var = float(sq_sums[party]) / trials - mean * mean
        half = 1.96 * (max(var, 0.0) / trials) ** 0.5
        ci[party] = (mean - half, mean + half)
    return ExpectedUtilities(utilities, {p: b / trials for p, b in bribes.items()},
                             burned / trials, "monte-carlo", trials, ci)


# ---------------------------------------------------------------------------
# Dominance.
# ---------------------------------------------------------------------------


@dataclass
class DominanceVerdict:
    verdict: str  # strict | weak | none
    witness: Optional[dict] = None

    def __str__(self):
        return self.verdict


def _profile_with(base: StrategyProfile, player, policy) -> StrategyProfile:
    if player == "alice":
        return StrategyProfile(policy, base.bob, base.miners)
    if player == "bob":
        return StrategyProfile(base.alice, policy, base.miners)
    miners = dict(base.miners)
    miners[player] = policy
    return StrategyProfile(base.alice, base.bob, miners)


def _player_party(player) -> Party:
    if player == "alice":
        return ALICE
    if player == "bob":
        return BOB
    return player


def dominance_check(scen: Scenario, player, candidate, own_space,
                    opponent_space, pin: Optional[dict] = None) -> DominanceVerdict:
    """Brute-force pure-strategy dominance of `candidate` over `own_space`.

    `opponent_space` is a list of StrategyProfile templates giving every
    other player's policy (the `player` slot is overwritten).  Returns
    strict if the candidate beats every alternative against every opponent
    profile, weak if it never loses and wins somewhere, none otherwise; the
    witness pins down the comparison that was tight or violated.
    """
    if not own_space or not opponent_space:
        raise ScenarioError("empty strategy space")
    party = _player_party(player)
    alternatives = [p for p in own_space if p is not candidate]
    if not alternatives:
        return DominanceVerdict("strict")
    strict_somewhere = False
    tight_witness = None
    for opp in opponent_space:
        cand_u = expected_utilities(
            scen, _profile_with(opp, player, candidate), pin).of(party)
        for alt in alternatives:
            alt_u = expected_utilities(
                scen, _profile_with(opp, player, alt), pin).of(party)
            if cand_u > alt_u:
                strict_somewhere = True
            elif cand_u == alt_u:
                tight_witness = {"opponents": opp.describe(),
                                 "alternative": alt.name,
                                 "candidate_utility": cand_u,
                                 "alternative_utility": alt_u}
            else:
                return DominanceVerdict("none", {
                    "opponents": opp.describe(), "alternative": alt.name,
                    "candidate_utility": cand_u, "alternative_utility": alt_u})
    if tight_witness is None:
        return DominanceVerdict("strict")
    return DominanceVerdict("weak" if strict_somewhere else "none", tight_witness)
