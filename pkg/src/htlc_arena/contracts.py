"""Predicate-guarded deposit contracts for the four protocol variants.

A contract is a deposit plus a list of redeem paths.  Each path names the
hashlock slots and signers it requires, an inclusion window, and an ordered
effect list.  Exactly one effect per path carries the REST sentinel: it
receives whatever is left of the deposit after fixed effects and the
transaction fee, which is how a UTXO-style "fee = inputs - outputs" model
falls out of the data.

Also here: the paid-vs-earned fee schedule used by the two-phase commit
protocol (miners earn a geometrically decayed slice of late fees, the gap
is burned) and the two adversarial bribery contracts miners and payers use
to coordinate censorship.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .core import BLOCK_MINER, ContractError, Party, check_amount

# Redeem path names.
DEP_A = "dep-A"
DEP_B = "dep-B"
DEP_M = "dep-M"
COL_B = "col-B"
COL_M = "col-M"
DEP_BURN = "dep-Burn"
PRE_A = "pre_A"
PRE_A2 = "pre_A'"
PRE_AA2 = "pre_AA'"
PRE_B = "pre_B"

#: Sentinel amount: deposit minus fee minus all fixed effects.
REST = "rest"

Amount = Union[int, str]


@dataclass(frozen=True, slots=True)
class Transfer:
    to: Party
    amount: Amount


@dataclass(frozen=True, slots=True)
class Burn:
    amount: Amount


@dataclass(frozen=True, slots=True)
class Forward:
    to_contract: str
    amount: Amount


Effect = Union[Transfer, Burn, Forward]


@dataclass(frozen=True, slots=True)
class CrossRead:
    """Condition over another contract's on-chain revealed slots."""

    contract_id: str
    must_have: frozenset
    must_not: frozenset = frozenset()


@dataclass(frozen=True, slots=True)
class RedeemPath:
    name: str
    effects: tuple
    required_preimages: frozenset = frozenset()
    required_signers: frozenset = frozenset()
    earliest: int = 0
    latest: Optional[int] = None  # None = open-ended
    cross_reads: tuple = ()
    # Extra burn applied when the tx lands strictly after the given round.
    late_burn: Optional[tuple] = None  # (after_round, amount)
    # Auto paths fire from inside apply_block; manual redemption is invalid.
    auto_only: bool = False

    def in_window(self, rnd: int) -> bool:
        if rnd < self.earliest:
            return False
        return self.latest is None or rnd <= self.latest


REDEEMABLE = "redeemable"
BURNED = "burned"


@dataclass(slots=True)
class ContractInstance:
    """A single deposit output with one-shot redemption."""

    contract_id: str
    deposit: int
    digests: dict  # slot -> expected preimage value (exact-witness model)
    paths: tuple
    status: object = REDEEMABLE  # REDEEMABLE | ("redeemed", path) | BURNED
    exposed_slots: frozenset = frozenset()

    def path(self, name: str) -> RedeemPath:
        for p in self.paths:
            if p.name == name:
                return p
        raise ContractError(f"{self.contract_id} has no path {name!r}")

    @property
    def redeemable(self) -> bool:
        return self.status == REDEEMABLE

    def copy(self) -> "ContractInstance":
        return ContractInstance(
            self.contract_id, self.deposit, self.digests, self.paths,
            self.status, self.exposed_slots,
        )


# ---------------------------------------------------------------------------
# Fee schedule: paid vs earned with geometric post-deadline decay.
# ---------------------------------------------------------------------------


class FeeError(ContractError):
    pass


@dataclass(frozen=True)
class FeeSchedule:
    """Paid fees per commit path, with earned fees decaying after round T.

    For a tx landing at round t <= T the miner earns the full declared fee.
    After T the miner earns floor(alpha^(t-T) * paid) and the remainder is
    burned.  The alpha exponent restarts at T so the honest era has a zero
    paid/earned gap.
    """

    paid: dict  # path name -> int
    alpha: Fraction
    T: int

    def base(self, path: str) -> int:
        if path not in self.paid:
            raise FeeError(f"no scheduled fee for path {path!r}")
        return self.paid[path]

    def split(self, path: str, declared_fee: int, inclusion_round: int) -> tuple:
        """Return (miner_earned, burned) for a scheduled tx."""
        base = self.base(path)
        if declared_fee != base:
            raise FeeError(
                f"fee-mismatch: path {path!r} pays {base}, declared {declared_fee}"
            )
        if declared_fee == 0 or inclusion_round <= self.T:
            return declared_fee, 0
        decay = self.alpha ** (inclusion_round - self.T)
        earned = min(declared_fee, math.floor(decay * base))
        return earned, declared_fee - earned


def fee_split(path: str, declared_fee: int, inclusion_round: int,
              schedule: FeeSchedule) -> tuple:
    return schedule.split(path, declared_fee, inclusion_round)


# ---------------------------------------------------------------------------
# Protocol builders.
# ---------------------------------------------------------------------------


def build_naive_htlc(alice: Party, bob: Party, v_dep: int, digest_a: str,
                     T: int, contract_id: str = "dep") -> ContractInstance:
    """Single deposit: payee path on the preimage until T, payer refund after."""
    if v_dep <= 0:
        raise ContractError("deposit must be positive")
    if T <= 0:
        raise ContractError("timeout must be positive")
    paths = (
        RedeemPath(DEP_A, (Transfer(alice, REST),),
                   required_preimages=frozenset({PRE_A}),
                   required_signers=frozenset({alice}), earliest=0, latest=T),
        RedeemPath(DEP_B, (Transfer(bob, REST),),
                   required_signers=frozenset({bob}), earliest=T + 1),
    )
    return ContractInstance(contract_id, check_amount(v_dep, "v_dep"),
                            {PRE_A: digest_a}, paths,
                            exposed_slots=frozenset({PRE_A}))


def build_mad_htlc(alice: Party, bob: Party, v_dep: int, v_col: int,
                   digests: dict, T: int,
                   dep_id: str = "dep", col_id: str = "col") -> tuple:
    """Deposit plus payer collateral, both confiscatable on a double reveal."""
    if v_dep <= 0 or v_col <= 0:
        raise ContractError("deposit and collateral must be positive")
    both = frozenset({PRE_A, PRE_B})
    dep = ContractInstance(
        dep_id, v_dep, dict(digests),
        (
            RedeemPath(DEP_A, (Transfer(alice, REST),),
                       required_preimages=frozenset({PRE_A}),
                       required_signers=frozenset({alice})),
            RedeemPath(DEP_B, (Transfer(bob, REST),),
                       required_signers=frozenset({bob}), earliest=T + 1),
            RedeemPath(DEP_M, (Transfer(BLOCK_MINER, REST),),
                       required_preimages=both),
        ),
        exposed_slots=both,
    )
    col = ContractInstance(
        col_id, v_col, dict(digests),
        (
            RedeemPath(COL_B, (Transfer(bob, REST),),
                       required_signers=frozenset({bob}), earliest=T + 1),
            RedeemPath(COL_M, (Transfer(BLOCK_MINER, REST),),
                       required_preimages=both),
        ),
        exposed_slots=both,
    )
    return dep, col


def build_he_htlc(alice: Party, bob: Party, v_dep: int, v_col: int,
                  digests: dict, T: int, l: int,
                  dep_id: str = "dep", col_id: str = "col") -> tuple:
    """Deposit-and-collateral variant that burns the deposit on confiscation.

    The payer's refund is staged: dep-B forwards everything into the
    collateral contract, whose payer path only opens l rounds later, leaving
    a confiscation window in which miners can take v_col while v_dep burns.
    """
    if v_dep <= 0 or v_col <= 0:
        raise ContractError("deposit and collateral must be positive")
    if l < 1:
        raise ContractError("delay l must be at least 1")
    both = frozenset({PRE_A, PRE_B})
    dep = ContractInstance(
        dep_id, v_dep + v_col, dict(digests),
        (
            RedeemPath(DEP_A, (Transfer(bob, v_col), Transfer(alice, REST)),
                       required_preimages=frozenset({PRE_A}),
                       required_signers=frozenset({alice})),
            RedeemPath(DEP_B, (Forward(col_id, REST),),
                       required_preimages=frozenset({PRE_B}),
                       required_signers=frozenset({bob}), earliest=T + 1),
        ),
        exposed_slots=both,
    )
    # The collateral pot starts empty; dep-B funds it.
    col = ContractInstance(
        col_id, 0, dict(digests),
        (
            RedeemPath(COL_B, (Transfer(bob, REST),),
                       required_signers=frozenset({bob}), earliest=T + l + 1),
            RedeemPath(COL_M, (Burn(v_dep), Transfer(BLOCK_MINER, REST)),
                       required_preimages=both),
        ),
        exposed_slots=both,
    )
    return dep, col


def derive_he_delay(v_dep: int, v_col: int, f: int) -> int:
    """Smallest refund delay satisfying v_col >= v_dep/(kappa-1) + f, l = ceil(kappa)."""
    if v_col <= f:
        raise ContractError("collateral must exceed the unrelated fee")
    kappa = Fraction(v_dep, v_col - f) + 1
    return max(1, math.ceil(kappa))


def build_demba(alice: Party, bob: Party, v_dep: int, v_col_a: int,
                v_col_b: int, v_ded: int, digests: dict, T: int,
                schedule: FeeSchedule,
                dep_id: str = "dep", col_a_id: str = "col-A",
                col_b_id: str = "col-B-contract") -> tuple:
    """Two-phase exchange: both sides commit via collateral reveals.

    The deposit contract has no manual spend; it resolves automatically from
    the slots the two collateral contracts have published (see
    resolve_demba_dep).  Late or contradictory commits forfeit v_ded.
    """
    # A zero penalty builds fine (it just voids the deterrent); negative is
    # meaningless.
    check_amount(v_ded, "v_ded")
    verdict = check_fee_schedule(schedule)
    if not verdict.ok:
        raise ContractError(f"invalid fee schedule: {verdict.violation}")
    col_a = ContractInstance(
        col_a_id, check_amount(v_col_a, "v_col_a"),
        {PRE_A: digests[PRE_A], PRE_A2: digests[PRE_A2]},
        (
            RedeemPath(PRE_A, (Transfer(alice, REST),),
                       required_preimages=frozenset({PRE_A}),
                       required_signers=frozenset({alice}), latest=T),
            RedeemPath(PRE_A2, (Transfer(alice, REST),),
                       required_preimages=frozenset({PRE_A2}),
                       required_signers=frozenset({alice}), earliest=T + 1),
            RedeemPath(PRE_AA2, (Burn(v_ded), Transfer(alice, REST)),
                       required_preimages=frozenset({PRE_A, PRE_A2}),
                       required_signers=frozenset({alice}), earliest=T + 1),
        ),
        exposed_slots=frozenset({PRE_A, PRE_A2}),
    )
    col_b = ContractInstance(
        col_b_id, check_amount(v_col_b, "v_col_b"),
        {PRE_B: digests[PRE_B]},
        (
            RedeemPath(PRE_B, (Transfer(bob, REST),),
                       required_preimages=frozenset({PRE_B}),
                       required_signers=frozenset({bob}), late_burn=(T, v_ded)),
        ),
        exposed_slots=frozenset({PRE_B}),
    )
    dep = ContractInstance(
        dep_id, check_amount(v_dep, "v_dep"), {},
        (
            RedeemPath(DEP_A, (Transfer(alice, REST),), auto_only=True,
                       cross_reads=(
                           CrossRead(col_a_id, frozenset({PRE_A}), frozenset({PRE_A2})),
                           CrossRead(col_b_id, frozenset({PRE_B})),
                       )),
            RedeemPath(DEP_B, (Transfer(bob, REST),), auto_only=True, earliest=T + 1,
                       cross_reads=(
                           CrossRead(col_a_id, frozenset({PRE_A2}), frozenset({PRE_A})),
                           CrossRead(col_b_id, frozenset({PRE_B})),
                       )),
            RedeemPath(DEP_BURN, (Burn(REST),), auto_only=True, earliest=T + 1,
                       cross_reads=(
                           CrossRead(col_a_id, frozenset({PRE_A, PRE_A2})),
                       )),
        ),
    )
    return dep, col_a, col_b


def resolve_demba_dep(dep: ContractInstance, revealed_slots, rnd: int):
    """Classify the automatic deposit resolution at `rnd`.

    `revealed_slots` maps contract_id -> set of slot names already published
    on chain.  Returns the matching auto path, or None while pending.  The
    three conditions are mutually exclusive by construction: the to-payee
    path requires the payer-return slot absent and vice versa, and the burn
    path requires both of the payee's slots.
    """
    if not dep.redeemable:
        return None
    for path in dep.paths:
        if not path.auto_only or not path.in_window(rnd):
            continue
        ok = True
        for cr in path.cross_reads:
            have = revealed_slots.get(cr.contract_id, frozenset())
            if not cr.must_have <= have or have & cr.must_not:
                ok = False
                break
        if ok:
            return path
    return None


# ---------------------------------------------------------------------------
# Fee schedule validation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeeScheduleVerdict:
    ok: bool
    violation: Optional[str] = None
    warnings: tuple = ()


def check_fee_schedule(schedule: FeeSchedule, horizon: Optional[int] = None) -> FeeScheduleVerdict:
    """Validate the paid ordering, the derived earned ordering, and burn shape.

    Paid fees must rise strictly across the payee's three commit paths.  The
    derived miner-earned ordering must run the other way: each further
    deviation path is priced one extra decay step, so in exact arithmetic
    paid[pre_A] > alpha*paid[pre_A'] > alpha^2*paid[pre_AA'] must hold, which
    makes the earned tuple strictly decreasing at every round.  alpha >= 1
    never burns anything, which voids the deterrent; that is reported as a
    warning rather than a violation.
    """
    p = schedule.paid
    for name in (PRE_A, PRE_A2, PRE_AA2, PRE_B):
        if name not in p:
            return FeeScheduleVerdict(False, f"missing paid fee for {name}")
        if p[name] < 0:
            return FeeScheduleVerdict(False, f"negative paid fee for {name}")
    if not (p[PRE_A] < p[PRE_A2] < p[PRE_AA2]):
        return FeeScheduleVerdict(
            False,
            f"paid ordering violated: need {p[PRE_A]} < {p[PRE_A2]} < {p[PRE_AA2]}")
    if schedule.alpha <= 0:
        return FeeScheduleVerdict(False, "alpha must be positive")
    if schedule.alpha > 1:
        return FeeScheduleVerdict(False, "alpha above 1 would grow fees")
    if schedule.alpha == 1:
        return FeeScheduleVerdict(True, None, ("deterrence-void: alpha = 1 never burns",))
    a = schedule.alpha
    if not (p[PRE_A] > a * p[PRE_A2] > a * a * p[PRE_AA2]):
        return FeeScheduleVerdict(
            False, "earned ordering violated: decayed fees do not decrease across paths")
    end = horizon if horizon is not None else schedule.T + 4
    prev_burn = {name: 0 for name in p}
    for rnd in range(0, end + 1):
        for name in p:
            earned, burned = schedule.split(name, p[name], rnd)
            if rnd <= schedule.T and burned != 0:
                return FeeScheduleVerdict(False, f"burn before deadline at round {rnd}")
            if burned < prev_burn[name]:
                return FeeScheduleVerdict(
                    False, f"burn not monotone for {name} at round {rnd}")
            prev_burn[name] = burned
    return FeeScheduleVerdict(True)


# ---------------------------------------------------------------------------
# Bribery contracts.
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class BriberyCall:
    method: str
    caller: Party
    args: dict = field(default_factory=dict)


@dataclass
class CensorBriberyContract:
    """Payer-funded censorship pact: reserve a bribe per censored block.

    Miners that mine a block in the censorship era call request_bribe once
    per own block to reserve `br`.  After the payer's refund (or a
    confiscation) lands without the target tx ever having been included, any
    knower of the payee's preimage can call claim_bribe: every reservation
    pays out, the caller's includer earns one extra `br`, and the remainder
    returns to the payer.  Failed guards are silent no-ops.
    """

    owner: Party
    br: int
    T: int
    pre_a_value: str
    deposit: int = 0
    bal_left: int = 0
    reserved: dict = field(default_factory=dict)  # Party -> block count
    settled: bool = False
    last_request_round: int = -1

    def pool_total(self) -> int:
        return self.deposit if not self.settled else 0

    def copy_for_step(self) -> "CensorBriberyContract":
        c = CensorBriberyContract(self.owner, self.br, self.T, self.pre_a_value)
        c.deposit = self.deposit
        c.bal_left = self.bal_left
        c.reserved = dict(self.reserved)
        c.settled = self.settled
        c.last_request_round = self.last_request_round
        return c

    def init(self, val: int) -> int:
        """Fund the bribe budget; returns the amount to lock."""
        self.deposit = check_amount(val, "bribe budget")
        self.bal_left = val
        return val

    def request_bribe(self, caller: Party, block_miner: Party, rnd: int) -> bool:
        if self.settled or caller != block_miner or rnd == self.last_request_round:
            return False
        if rnd > self.T or self.bal_left < self.br:
            return False
        self.reserved[caller] = self.reserved.get(caller, 0) + 1
        self.bal_left -= self.br
        self.last_request_round = rnd
        return True

    def claim_bribe(self, caller: Party, preimage: str, target_included: bool,
                    settlement_landed: bool) -> list:
        """Returns [(party, amount, tag)] payouts, empty when a guard fails."""
        if self.settled or preimage != self.pre_a_value:
            return []
        if target_included or not settlement_landed:
            return []
        count = sum(self.reserved.values())
        if self.deposit - (count + 1) * self.br < 0:
            return []
        payouts = [(party, self.br * n, "censor-bribe") for party, n in sorted(
            self.reserved.items(), key=lambda kv: kv[0].id)]
        payouts.append((caller, self.br, "claim-bonus"))
        remainder = self.deposit - (count + 1) * self.br
        if remainder > 0:
            payouts.append((self.owner, remainder, "remainder"))
        self.settled = True
        self.reserved = {}
        return payouts

    def refund_owner(self, target_included: bool) -> list:
        # Once the target tx lands at any height, bribes are unclaimable and
        # the whole budget returns to the payer.
        if self.settled or not target_included:
            return []
        self.settled = True
        out = [(self.owner, self.deposit, "refund")]
        self.reserved = {}
        return out


@dataclass
class MinerPactContract:
    """Miner-to-miner pact: lock collateral, censor, split the confiscation.

    Colluding miners lock `lock_amount` each.  Censoring-era blocks mined by
    members reserve a per-recipient bribe.  Once the collateral contract has
    been confiscated, claim_bribe pays each reservation from the
    confiscator's locked collateral, pays the caller one bribe, and returns
    every remaining lock.  refund_all returns locks when the attack is dead.
    """

    T: int
    pre_a_value: str
    br: dict  # Party -> per-block bribe owed to that miner
    locked: dict = field(default_factory=dict)  # Party -> amount
    reserved: dict = field(default_factory=dict)  # Party -> block count
    settled: bool = False
    last_request_round: int = -1

    def pool_total(self) -> int:
        return sum(self.locked.values())

    def copy_for_step(self) -> "MinerPactContract":
        c = MinerPactContract(self.T, self.pre_a_value, self.br)
        c.locked = dict(self.locked)
        c.reserved = dict(self.reserved)
        c.settled = self.settled
        c.last_request_round = self.last_request_round
        return c

    def lock_collateral(self, caller: Party, val: int) -> int:
        self.locked[caller] = self.locked.get(caller, 0) + check_amount(val)
        return val

    def request_bribe(self, caller: Party, block_miner: Party, rnd: int) -> bool:
        if self.settled or caller != block_miner or rnd == self.last_request_round:
            return False
        if rnd > self.T or caller not in self.locked:
            return False
        self.reserved[caller] = self.reserved.get(caller, 0) + 1
        self.last_request_round = rnd
        return True

    def claim_bribe(self, caller: Party, preimage: str, target_included_by_T: bool,
                    confiscator) -> list:
        if self.settled or preimage != self.pre_a_value:
            return []
        if target_included_by_T or confiscator is None:
            return []
        owed = sum(self.br.get(p, 0) * n for p, n in self.reserved.items())
        stake = self.locked.get(confiscator, 0)
        caller_cut = self.br.get(caller, 0)
        if stake - owed - caller_cut < 0:
            return []
        payouts = []
        for party, n in sorted(self.reserved.items(), key=lambda kv: kv[0].id):
            payouts.append((party, self.br.get(party, 0) * n, "censor-bribe"))
        payouts.append((caller, caller_cut, "claim-bonus"))
        self.locked[confiscator] = stake - owed - caller_cut
        for party, amount in sorted(self.locked.items(), key=lambda kv: kv[0].id):
            if amount > 0:
                payouts.append((party, amount, "refund"))
        self.locked = {}
        self.reserved = {}
        self.settled = True
        return payouts

    def refund_all(self) -> list:
        if self.settled:
            return []
        out = [(p, a, "refund") for p, a in
               sorted(self.locked.items(), key=lambda kv: kv[0].id) if a > 0]
        self.locked = {}
        self.reserved = {}
        self.settled = True
        return out


def bribery_contract_step(contract, call: BriberyCall, rnd: int, chain) -> list:
    """Dispatch one call against a bribery contract; silent no-op on guard failure.

    `chain` must answer three questions: was the protected target tx ever
    included by its deadline, has the settlement (refund or confiscation)
    landed, and who confiscated the collateral contract, if anyone.
    Returns the resulting payout list [(party, amount, tag)].
    """
    m = call.method
    if isinstance(contract, CensorBriberyContract):
        if m == "init":
            contract.init(call.args["val"])
            return []
        if m == "requestBribe":
            contract.request_bribe(call.caller, chain.block_miner(), rnd)
            return []
        if m == "claimBribe":
            return contract.claim_bribe(
                call.caller, call.args.get("preimage", ""),
                chain.target_included_ever(), chain.settlement_landed())
        if m == "refundToBob":
            return contract.refund_owner(chain.target_included_ever())
        raise ContractError(f"unknown method {m!r}")
    if isinstance(contract, MinerPactContract):
        if m == "lockCollateral":
            contract.lock_collateral(call.caller, call.args["val"])
            return []
        if m == "requestBribe":
            contract.request_bribe(call.caller, chain.block_miner(), rnd)
            return []
        if m == "claimBribe":
            return contract.claim_bribe(
                call.caller, call.args.get("preimage", ""),
                chain.target_included_by_deadline(), chain.confiscator())
        if m == "refundToMiners":
            if chain.target_included_by_deadline() or chain.attack_window_over():
                return contract.refund_all()
            return []
        raise ContractError(f"unknown method {m!r}")
    raise ContractError(f"not a bribery contract: {contract!r}")
