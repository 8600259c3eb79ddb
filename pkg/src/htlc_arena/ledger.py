"""Fork-free discrete-round ledger.

One block per round, applied functionally: apply_block returns a fresh
ChainState and never touches its input, so states are safe to keep as
snapshots.  Conservation is the load-bearing invariant: balances plus live
deposits plus bribery pools plus burned tokens, net of explicit mints, is
constant across every block.

Unrelated traffic is modelled as an inexhaustible supply of filler
transactions, each paying exactly the scenario's base fee; blocks carry
them as a count rather than as objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (BLOCK_MINER, BURN_SINK, EXTERNAL, LedgerError, Party,
                   check_amount, credit, debit)
from .contracts import (BURNED, Burn, ContractInstance, Forward, REST,
                        RedeemPath, Transfer, bribery_contract_step)

RELATED = "related"
UNRELATED = "unrelated"
CONTRACT_CALL = "contract-call"
PAYMENT = "payment"


@dataclass(frozen=True, slots=True)
class Witness:
    """Exact-witness evidence: asserted signers and bit-exact preimages."""

    preimages: frozenset = frozenset()  # (contract_id, slot, value)
    signers: frozenset = frozenset()  # Party


EMPTY_WITNESS = Witness()


@dataclass(frozen=True, slots=True)
class TxRecord:
    tx_id: str
    creator: Party
    kind: str = RELATED
    consumes: tuple = ()  # ((contract_id, path_name), ...)
    witness: Witness = EMPTY_WITNESS
    declared_fee: int = 0
    call: Optional[tuple] = None  # (contract_id, BriberyCall)
    payment: Optional[tuple] = None  # (to_party, amount)


@dataclass(frozen=True, slots=True)
class Block:
    round: int
    miner: Party
    txs: tuple = ()
    unrelated_fill: int = 0
    unrelated_fee: int = 0
    capacity: int = 8
    coinbase: tuple = ()  # ((party, amount, reason), ...)


class ChainState:
    """Ledger snapshot: live contract outputs, balances, reveals, mempool."""

    __slots__ = ("height", "contracts", "live", "balances", "burned",
                 "revealed", "mempool", "mint_log", "bribery", "redemptions",
                 "fee_schedule", "meta", "known", "bribe_log")

    def __init__(self, contracts=None, live=None, balances=None,
                 fee_schedule=None, meta=None):
        self.height = 0
        self.contracts: dict = contracts or {}
        self.live: dict = live or {}
        self.balances: dict = balances or {}
        self.burned = 0
        self.revealed: dict = {}  # (cid, slot) -> (value, round)
        self.mempool: dict = {}  # tx_id -> TxRecord
        self.mint_log: list = []
        self.bribery: dict = {}  # cid -> contract object
        self.redemptions: dict = {}  # cid -> (path, round, miner)
        self.fee_schedule = fee_schedule
        self.meta: dict = meta or {}
        self.known: dict = {}  # (cid, slot) -> value, mempool-or-chain knowledge
        self.bribe_log: list = []  # (party, amount, tag)

    def clone(self) -> "ChainState":
        s = ChainState.__new__(ChainState)
        s.height = self.height
        s.contracts = dict(self.contracts)
        s.live = dict(self.live)
        s.balances = dict(self.balances)
        s.burned = self.burned
        s.revealed = dict(self.revealed)
        s.mempool = dict(self.mempool)
        s.mint_log = list(self.mint_log)
        s.bribery = dict(self.bribery)
        s.redemptions = dict(self.redemptions)
        s.fee_schedule = self.fee_schedule
        s.meta = self.meta
        s.known = dict(self.known)
        s.bribe_log = list(self.bribe_log)
        return s

    # -- queries ----------------------------------------------------------

    def revealed_slots(self) -> dict:
        out: dict = {}
        for (cid, slot) in self.revealed:
            out.setdefault(cid, set()).add(slot)
        return out

    def reveal_round(self, cid: str, slot: str):
        entry = self.revealed.get((cid, slot))
        return entry[1] if entry else None

    def conservation_total(self) -> int:
        return (sum(self.balances.values()) + sum(self.live.values())
                + sum(c.pool_total() for c in self.bribery.values())
                + self.burned - sum(m[1] for m in self.mint_log))

    def snapshot_key(self) -> tuple:
        """Canonical value for replay-determinism comparisons."""
        return (self.height,
                tuple(sorted((p.id, v) for p, v in self.balances.items())),
                self.burned,
                tuple(sorted(self.live.items())),
                tuple(sorted((cid, slot, v, r) for (cid, slot), (v, r)
                             in self.revealed.items())),
                tuple(sorted((cid, c.status if isinstance(c.status, str)
                              else c.status[1])
                             for cid, c in self.contracts.items())),
                tuple(sorted(m[0].id for m in self.mint_log)))


def broadcast(state: ChainState, txs) -> ChainState:
    """Admit transactions to the mempool; preimages become common knowledge."""
    if not txs:
        return state
    s = state.clone()
    for tx in txs:
        s.mempool[tx.tx_id] = tx
        for (cid, slot, value) in tx.witness.preimages:
            s.known[(cid, slot)] = value
    return s


def mint(state: ChainState, to: Party, amount: int, reason: str) -> ChainState:
    """Create tokens out of band (coinbase bribes); logged for conservation."""
    check_amount(amount)
    s = state.clone()
    credit(s.balances, to, amount)
    s.mint_log.append((to, amount, reason))
    return s


# ---------------------------------------------------------------------------
# Validation.
# ---------------------------------------------------------------------------


def _check_path_predicate(state: ChainState, contract: ContractInstance,
                          path: RedeemPath, witness: Witness, rnd: int) -> None:
    if path.auto_only:
        raise LedgerError("predicate-failed", "manual-redeem-disabled")
    if not path.in_window(rnd):
        raise LedgerError("predicate-failed", "timelock")
    if not path.required_signers <= witness.signers:
        raise LedgerError("predicate-failed", "signature")
    supplied = {slot: value for (cid, slot, value) in witness.preimages
                if cid == contract.contract_id}
    for slot in path.required_preimages:
        if supplied.get(slot) != contract.digests.get(slot):
            raise LedgerError("predicate-failed", f"hashlock:{slot}")
    if path.cross_reads:
        slots = state.revealed_slots()
        for cr in path.cross_reads:
            have = slots.get(cr.contract_id, set())
            if not cr.must_have <= have or have & cr.must_not:
                raise LedgerError("predicate-failed", "cross-read")


def _path_outflow(path: RedeemPath, rnd: int) -> int:
    total = 0
    for eff in path.effects:
        amt = eff.amount
        if amt != REST:
            total += amt
    if path.late_burn and rnd > path.late_burn[0]:
        total += path.late_burn[1]
    return total


def validate_tx(state: ChainState, tx: TxRecord, rnd: int) -> None:
    """Raise LedgerError unless `tx` is valid against `state` at `rnd`."""
    if tx.kind == UNRELATED:
        check_amount(tx.declared_fee, "fee")
        return
    if tx.kind == CONTRACT_CALL:
        if tx.call is None or tx.call[0] not in state.bribery:
            raise LedgerError("unknown-output", "no such bribery contract")
        return
    if tx.kind == PAYMENT:
        if tx.payment is None:
            raise LedgerError("invalid-tx", "payment without destination")
        need = tx.payment[1] + tx.declared_fee
        if state.balances.get(tx.creator, 0) < need:
            raise LedgerError("over-spend", f"{tx.creator.id} cannot fund payment")
        return
    if not tx.consumes:
        raise LedgerError("unknown-output", "related tx consumes nothing")
    seen = set()
    for (cid, path_name) in tx.consumes:
        if cid in seen:
            raise LedgerError("duplicate-spend-in-block", cid)
        seen.add(cid)
        contract = state.contracts.get(cid)
        if contract is None:
            raise LedgerError("unknown-output", cid)
        if not contract.redeemable:
            raise LedgerError("unknown-output", f"{cid} already {contract.status}")
        path = contract.path(path_name)
        _check_path_predicate(state, contract, path, tx.witness, rnd)
        value = state.live.get(cid, 0)
        if _path_outflow(path, rnd) + tx.declared_fee > value:
            raise LedgerError("over-spend",
                              f"{cid} holds {value}, tx needs more")


# ---------------------------------------------------------------------------
# Application.
# ---------------------------------------------------------------------------


def _apply_redeem(s: ChainState, cid: str, path: RedeemPath, tx: TxRecord,
                  rnd: int, block_miner: Party) -> None:
    value = s.live.pop(cid)
    fee = tx.declared_fee
    schedule = s.fee_schedule
    if schedule is not None and path.name in schedule.paid:
        earned, fee_burn = schedule.split(path.name, fee, rnd)
    else:
        earned, fee_burn = fee, 0
    rest = value - fee - _path_outflow(path, rnd)
    if path.late_burn and rnd > path.late_burn[0]:
        s.burned += path.late_burn[1]
    for eff in path.effects:
        amt = rest if eff.amount == REST else eff.amount
        if isinstance(eff, Transfer):
            to = block_miner if eff.to == BLOCK_MINER else eff.to
            if to == BURN_SINK:
                s.burned += amt
            else:
                credit(s.balances, to, amt)
        elif isinstance(eff, Burn):
            s.burned += amt
        elif isinstance(eff, Forward):
            if eff.to_contract not in s.live:
                raise LedgerError("unknown-output", f"forward to {eff.to_contract}")
            s.live[eff.to_contract] += amt
        else:  # pragma: no cover - effect union is closed
            raise LedgerError("invalid-tx", f"unknown effect {eff!r}")
    credit(s.balances, block_miner, earned)
    s.burned += fee_burn
    contract = s.contracts[cid].copy()
    if all(isinstance(e, Burn) for e in path.effects):
        contract.status = BURNED
    else:
        contract.status = ("redeemed", path.name)
    s.contracts[cid] = contract
    s.redemptions[cid] = (path.name, rnd, block_miner)
    for (c, slot, value_) in tx.witness.preimages:
        if (c, slot) not in s.revealed:
            s.revealed[(c, slot)] = (value_, rnd)
            s.known[(c, slot)] = value_


def _apply_call(s: ChainState, tx: TxRecord, rnd: int, block_miner: Party) -> None:
    cid, call = tx.call
    contract = s.bribery[cid].copy_for_step()
    s.bribery[cid] = contract
    lock = 0
    if call.method in ("init", "lockCollateral"):
        lock = call.args["val"]
        debit(s.balances, call.caller, lock)
    view = _BriberyChainView(s, rnd, block_miner)
    payouts = bribery_contract_step(contract, call, rnd, view)
    for party, amount, tag in payouts:
        credit(s.balances, party, amount)
        s.bribe_log.append((party, amount, tag))
    if tx.declared_fee:
        debit(s.balances, tx.creator, tx.declared_fee)
        credit(s.balances, block_miner, tx.declared_fee)


class _BriberyChainView:
    """Answers the guard-clause questions bribery contracts ask of the chain."""

    def __init__(self, state: ChainState, rnd: int, block_miner: Party):
        self._s = state
        self._rnd = rnd
        self._miner = block_miner

    def block_miner(self) -> Party:
        return self._miner

    def target_included_by_deadline(self) -> bool:
        meta = self._s.meta
        entry = self._s.redemptions.get(meta.get("target_contract", "dep"))
        if entry is None:
            return False
        path, rnd, _ = entry
        return path == meta.get("target_path", "dep-A") and rnd <= meta.get("T", 0)

    def target_included_ever(self) -> bool:
        meta = self._s.meta
        entry = self._s.redemptions.get(meta.get("target_contract", "dep"))
        return entry is not None and entry[0] == meta.get("target_path", "dep-A")

    def settlement_landed(self) -> bool:
        meta = self._s.meta
        entry = self._s.redemptions.get(meta.get("target_contract", "dep"))
        if entry is None:
            return False
        return entry[0] != meta.get("target_path", "dep-A")

    def confiscator(self):
        meta = self._s.meta
        entry = self._s.redemptions.get(meta.get("col_contract", "col"))
        if entry is None or entry[0] != meta.get("confiscation_path", "col-M"):
            return None
        return entry[2]

    def attack_window_over(self) -> bool:
        meta = self._s.meta
        return self._rnd > meta.get("T", 0) + meta.get("l", 0) + 1


def _resolve_auto_contracts(s: ChainState, rnd: int, block_miner: Party) -> None:
    slots = None
    for cid, contract in list(s.contracts.items()):
        if not contract.redeemable:
            continue
        if not any(p.auto_only for p in contract.paths):
            continue
        if slots is None:
            slots = s.revealed_slots()
        from .contracts import resolve_demba_dep
        path = resolve_demba_dep(contract, slots, rnd)
        if path is not None:
            auto_tx = TxRecord(f"auto.{cid}.{rnd}", block_miner)
            _apply_redeem(s, cid, path, auto_tx, rnd, block_miner)


def _auto_refund_bribery(s: ChainState, rnd: int) -> None:
    """Release bribery funds the moment their claim is provably dead.

    Anyone may trigger the refund methods, so the model fires them promptly
    rather than leaving funds hostage to who mines next: the censorship
    budget returns to its owner once the target tx has landed, and pact
    collateral returns once no eligible confiscation claim can ever succeed.
    """
    from .contracts import CensorBriberyContract, MinerPactContract
    meta = s.meta
    target = s.redemptions.get(meta.get("target_contract", "dep"))
    target_hit = (target is not None
                  and target[0] == meta.get("target_path", "dep-A"))
    for cid, contract in list(s.bribery.items()):
        if contract.settled:
            continue
        if isinstance(contract, CensorBriberyContract):
            if target_hit and contract.deposit > 0:
                fresh = contract.copy_for_step()
                for party, amount, tag in fresh.refund_owner(True):
                    credit(s.balances, party, amount)
                    s.bribe_log.append((party, amount, tag))
                s.bribery[cid] = fresh
        elif isinstance(contract, MinerPactContract):
            col = s.redemptions.get(meta.get("col_contract", "col"))
            claim_dead = target_hit
            if col is not None:
                path, _, confiscator = col
                if path != meta.get("confiscation_path", "col-M"):
                    claim_dead = True  # reclaimed by the payer
                elif contract.locked.get(confiscator, 0) == 0:
                    claim_dead = True  # confiscated by a non-member
            if claim_dead:
                fresh = contract.copy_for_step()
                for party, amount, tag in fresh.refund_all():
                    credit(s.balances, party, amount)
                    s.bribe_log.append((party, amount, tag))
                s.bribery[cid] = fresh


def apply_block(state: ChainState, block: Block) -> ChainState:
    """Validate and apply one block; returns the successor state."""
    if block.round != state.height + 1:
        raise LedgerError("stale-round",
                          f"block {block.round} onto height {state.height}")
    if len(block.txs) + block.unrelated_fill > block.capacity:
        raise LedgerError("invalid-tx", "block over capacity")
    s = state.clone()
    consumed_this_block: set = set()
    for i, tx in enumerate(block.txs):
        for (cid, _) in tx.consumes:
            if cid in consumed_this_block:
                raise LedgerError("duplicate-spend-in-block", f"tx {i}: {cid}")
        try:
            validate_tx(s, tx, block.round)
        except LedgerError as e:
            raise LedgerError("invalid-tx", f"tx {i} ({tx.tx_id}): {e}") from e
        if tx.kind == RELATED:
            for (cid, path_name) in tx.consumes:
                path = s.contracts[cid].path(path_name)
                _apply_redeem(s, cid, path, tx, block.round, block.miner)
                consumed_this_block.add(cid)
        elif tx.kind == UNRELATED:
            debit(s.balances, EXTERNAL, tx.declared_fee)
            credit(s.balances, block.miner, tx.declared_fee)
        elif tx.kind == PAYMENT:
            to, amount = tx.payment
            debit(s.balances, tx.creator, amount + tx.declared_fee)
            credit(s.balances, to, amount)
            credit(s.balances, block.miner, tx.declared_fee)
        else:
            _apply_call(s, tx, block.round, block.miner)
        s.mempool.pop(tx.tx_id, None)
    if block.unrelated_fill:
        total = block.unrelated_fill * block.unrelated_fee
        debit(s.balances, EXTERNAL, total)
        credit(s.balances, block.miner, total)
    for party, amount, reason in block.coinbase:
        check_amount(amount)
        credit(s.balances, party, amount)
        s.mint_log.append((party, amount, reason))
    _resolve_auto_contracts(s, block.round, block.miner)
    _auto_refund_bribery(s, block.round)
    s.height = block.round
    return s
