"""Scenario ingestion, CLI subcommands, and report emission.

Scenario files are JSON documents with sections protocol / amounts / fees /
timing / miners / policies / bribes / mode / seed.  Reports are UTF-8 text:
'#'-prefixed header lines, tab-separated records (metric, party, value,
ci_low, ci_high), then a '#'-prefixed human summary.  Records round-trip:
parsing a report reproduces the record strings exactly.

Exit codes: 0 success, 1 usage or validation errors, 2 a lemma or theorem
verdict failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .core import EXTERNAL, ScenarioError, miner_party
from .contracts import FeeSchedule, PRE_A, PRE_A2, PRE_AA2, PRE_B
from .game import (MinerProfile, Scenario, StrategyProfile,
                   dominance_check, expected_utilities, play,
                   sample_schedule)
from .agents import (AliceHonest, AliceOffline, BobHonest, HonestFeeMax,
                     make_miner_policy, make_party_policy)
from . import analysis
from .analysis import (PoolParams, pool_math, pool_mc, verify_demba,
                       verify_demba_lemma, verify_m2mba_lemma,
                       verify_theorem_m2mba)

import numpy as np


# ---------------------------------------------------------------------------
# Scenario loading.
# ---------------------------------------------------------------------------


def _frac(value, what: str) -> Fraction:
    try:
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return Fraction(value[0], value[1])
    except (ValueError, ZeroDivisionError) as e:
        raise ScenarioError(f"validation-error({what}): {e}") from e
    raise ScenarioError(f"validation-error({what}): expected int, 'p/q', or [p, q]")


def _fee_schedule_from(doc: dict, T: int) -> FeeSchedule:
    paid_doc = doc.get("paid", {})
    try:
        paid = {PRE_A: int(paid_doc["pre_A"]), PRE_A2: int(paid_doc["pre_A'"]),
                PRE_AA2: int(paid_doc["pre_AA'"]), PRE_B: int(paid_doc["pre_B"])}
    except KeyError as e:
        raise ScenarioError(f"validation-error(fees.schedule.paid): missing {e}")
    return FeeSchedule(paid, _frac(doc.get("alpha", "1/2"), "fees.schedule.alpha"), T)


def load_scenario(path) -> tuple:
    """Parse and validate a scenario file; returns (Scenario, StrategyProfile)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"parse-error(line {e.lineno}, col {e.colno}): {e.msg}")
    return scenario_from_doc(doc)


def scenario_from_doc(doc: dict) -> tuple:
    protocol = doc.get("protocol")
    if protocol not in ("naive", "mad", "he", "demba"):
        raise ScenarioError(f"validation-error(protocol): got {protocol!r}")
    amounts = doc.get("amounts", {})
    fees = doc.get("fees", {})
    timing = doc.get("timing", {})
    bribes = doc.get("bribes", {})
    if "T" not in timing:
        raise ScenarioError("validation-error(timing.T): required")
    T = int(timing["T"])
    miners_doc = doc.get("miners") or [{"id": "m1", "power": 1}]
    miners = []
    for i, m in enumerate(miners_doc):
        power = _frac(m.get("power", 0), f"miners[{i}].power")
        miners.append(MinerProfile(miner_party(m.get("id", f"m{i + 1}")), power,
                                   m.get("kind", "passive"),
                                   bool(m.get("colluding", False))))
    total = sum((m.power for m in miners), Fraction(0))
    if total != 1:
        raise ScenarioError(f"validation-error(power-sum): miner powers sum to "
                            f"{total}, need exactly 1")
    schedule = None
    if "schedule" in fees:
        schedule = _fee_schedule_from(fees["schedule"], T)
    elif protocol == "demba":
        raise ScenarioError("validation-error(fees.schedule): required for demba")
    if schedule is not None:
        verdict = analysis.fee_schedule_check(schedule)
        if not verdict.ok:
            raise ScenarioError(f"validation-error(Eq.1/Eq.2): {verdict.violation}")
    mode_doc = doc.get("mode", "exact")
    if mode_doc == "exact":
        mode = ("exact",)
    elif isinstance(mode_doc, dict) and "monte-carlo" in mode_doc:
        mode = ("monte-carlo", int(mode_doc["monte-carlo"]))
    else:
        raise ScenarioError(f"validation-error(mode): got {mode_doc!r}")
    try:
        scen = Scenario(
            protocol=protocol,
            v_dep=int(amounts.get("v_dep", 0)),
            v_col=int(amounts.get("v_col", 0)),
            v_col_a=int(amounts.get("v_col_a", 0)),
            v_col_b=int(amounts.get("v_col_b", 0)),
            v_ded=int(amounts.get("v_ded", 0)),
            f=int(fees.get("f", 1)),
            f_dep_a=int(fees.get("f_dep_a", 2)),
            f_dep_b=int(fees.get("f_dep_b", 2)),
            f_col_b=int(fees.get("f_col_b", 2)),
            f_cbob_b=int(fees.get("f_cbob_b", 1)),
            f_calice_a=int(fees.get("f_calice_a", 1)),
            fee_schedule=schedule,
            T=T,
            l=int(timing.get("l", 0)),
            t_pub=int(timing.get("t_pub", 1)),
            horizon=int(timing["horizon"]) if "horizon" in timing else None,
            miners=tuple(miners),
            br=int(bribes.get("br", 0)),
            epsilon=int(bribes.get("epsilon", 0)),
            capacity=int(doc.get("capacity", 8)),
            seed=int(doc.get("seed", 0)),
            mode=mode,
        )
    except ScenarioError as e:
        raise ScenarioError(f"validation-error: {e}") from e
    profile = _profile_from_doc(doc.get("policies", {}), scen)
    return scen, profile


def _profile_from_doc(doc: dict, scen: Scenario) -> StrategyProfile:
    a_doc = dict(doc.get("alice", {"name": "honest"}))
    b_doc = dict(doc.get("bob", {"name": "honest"}))
    alice = make_party_policy("alice", a_doc.pop("name"), **a_doc)
    bob = make_party_policy("bob", b_doc.pop("name"), **b_doc)
    miners_doc = doc.get("miners", {})
    default_doc = miners_doc.get("default", {"name": "honest-fee-max"})
    miners = {}
    for m in scen.miners:
        entry = dict(miners_doc.get(m.party.id, default_doc))
        miners[m.party] = make_miner_policy(entry.pop("name"), **entry)
    return StrategyProfile(alice, bob, miners)


# ---------------------------------------------------------------------------
# Reports.
# ---------------------------------------------------------------------------


def fmt_value(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 \
            else str(v.numerator)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def fmt_fraction(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


@dataclass
class Report:
    header: dict
    records: list = field(default_factory=list)  # (metric, party, value, lo, hi)
    summary: list = field(default_factory=list)

    def add(self, metric: str, party="-", value="-", lo="-", hi="-"):
        self.records.append((str(metric), str(party), fmt_value(value),
                             fmt_value(lo), fmt_value(hi)))

    def render(self) -> str:
        lines = [f"# arena-report {__version__}"]
        for key in sorted(self.header):
            lines.append(f"# {key}: {self.header[key]}")
        lines.append("# columns: metric\tparty\tvalue\tci_low\tci_high")
        for rec in self.records:
            lines.append("\t".join(rec))
        if self.summary:
            lines.append("# summary:")
            for line in self.summary:
                lines.append(f"#   {line}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse(text: str) -> "Report":
        header: dict = {}
        records: list = []
        summary: list = []
        in_summary = False
        for line in text.splitlines():
            if line.startswith("#"):
                body = line[1:].strip()
                if body == "summary:":
                    in_summary = True
                elif in_summary:
                    summary.append(body)
                elif ": " in body:
                    key, _, value = body.partition(": ")
                    header[key] = value
                continue
            if line.strip():
                parts = tuple(line.split("\t"))
                if len(parts) != 5:
                    raise ScenarioError(f"parse-error(report record): {line!r}")
                records.append(parts)
        return Report(header, records, summary)


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _base_header(args, subcommand: str) -> dict:
    header = {"subcommand": subcommand}
    seed = getattr(args, "seed", None)
    header["seed"] = seed if seed is not None else 0
    if getattr(args, "scenario", None):
        header["scenario-digest"] = _digest(args.scenario)
    return header


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> tuple:
    scen, profile = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else scen.seed
    rng = np.random.default_rng(seed)
    schedule = sample_schedule(scen, rng)
    out = play(scen, profile, schedule)
    report = Report(_base_header(args, "simulate"))
    report.header["seed"] = seed
    for party in sorted(out.deltas, key=lambda p: p.id):
        if party == EXTERNAL:
            continue
        report.add("utility", party.id, out.deltas[party])
    report.add("burned", "-", out.burned)
    report.add("minted", "-", out.minted)
    report.add("terminal", "-", out.terminal)
    report.add("final-label", "-", out.trace[-1])
    report.summary.append(f"terminal resolution: {out.terminal}")
    report.summary.append("schedule: " + ",".join(p.id for p in schedule.miners))
    return report, 0


def cmd_expect(args) -> tuple:
    scen, profile = load_scenario(args.scenario)
    if args.seed is not None:
        scen.seed = args.seed
    mode = scen.mode
    if args.mode == "exact":
        mode = ("exact",)
    elif args.mode == "mc":
        mode = ("monte-carlo", args.trials or 10_000)
    elif args.trials:
        mode = ("monte-carlo", args.trials)
    eu = expected_utilities(scen, profile, mode=mode)
    report = Report(_base_header(args, "expect"))
    report.header["seed"] = scen.seed
    report.header["mode"] = eu.mode
    for party in sorted(eu.utilities, key=lambda p: p.id):
        if party == EXTERNAL:
            continue
        value = eu.utilities[party]
        if eu.ci is not None and party in eu.ci:
            lo, hi = eu.ci[party]
            report.add("utility", party.id, float(value), lo, hi)
        else:
            report.add("utility", party.id, fmt_fraction(value))
    for party in sorted(eu.bribe_income, key=lambda p: p.id):
        report.add("bribe-income", party.id, fmt_fraction(eu.bribe_income[party]))
    report.add("burned", "-", fmt_fraction(eu.burned))
    report.summary.append(f"{eu.mode} expectation over miner schedules")
    return report, 0


def _default_spaces(scen: Scenario, player: str) -> list:
    if scen.protocol == "demba":
        spaces = analysis.demba_deviation_spaces(scen)
        if player in ("alice", "bob"):
            return spaces[player]
        return spaces["miners"]
    if player == "alice":
        return [AliceHonest(), AliceOffline()]
    if player == "bob":
        return [BobHonest(), make_party_policy("bob", "naive-briber")]
    kind = next((m.kind for m in scen.miners if m.party.id == player), "passive")
    if scen.protocol == "he":
        return analysis.m2mba_policy_space(kind)
    return [HonestFeeMax(), make_miner_policy("censor-related")]


def cmd_dominance(args) -> tuple:
    scen, profile = load_scenario(args.scenario)
    player = args.player
    key = player if player in ("alice", "bob") else miner_party(player)
    if player == "alice":
        candidate = profile.alice
    elif player == "bob":
        candidate = profile.bob
    else:
        if key not in profile.miners:
            raise ScenarioError(f"validation-error(player): no miner {player!r}")
        candidate = profile.miners[key]
    alternatives = [p for p in _default_spaces(scen, player)
                    if p.name != candidate.name]
    verdict = dominance_check(scen, key, candidate,
                              [candidate] + alternatives, [profile])
    report = Report(_base_header(args, "dominance"))
    report.add("dominance", player, verdict.verdict)
    report.add("candidate", player, candidate.name)
    if verdict.witness:
        report.add("witness-alternative", player, verdict.witness["alternative"])
        report.add("witness-candidate-utility", player,
                   verdict.witness["candidate_utility"])
        report.add("witness-alternative-utility", player,
                   verdict.witness["alternative_utility"])
    report.summary.append(f"{candidate.name} is {verdict.verdict} for {player}")
    return report, 0


def cmd_lemmas(args) -> tuple:
    scen, _ = load_scenario(args.scenario)
    report = Report(_base_header(args, "lemmas"))
    failed = False
    if scen.protocol == "he":
        for n in (1, 2, 3, 4, 5):
            v = verify_m2mba_lemma(n, scen)
            report.add(v.lemma_id, "-",
                       f"consistent={'true' if v.consistent else 'false'}",
                       f"hypothesis={v.hypothesis_holds}",
                       f"conclusion={v.conclusion_holds}")
            failed |= not v.consistent
        thm = verify_theorem_m2mba(scen)
        report.add("theorem-m2mba", "-",
                   "dominant" if thm.all_dominant else "not-dominant")
        if thm.hypothesis_holds and not thm.all_dominant:
            failed = True
    elif scen.protocol == "demba":
        for n in (6, 7, 8):
            v = verify_demba_lemma(n, scen)
            report.add(v.lemma_id, "-",
                       f"consistent={'true' if v.consistent else 'false'}",
                       f"hypothesis={v.hypothesis_holds}",
                       f"conclusion={v.conclusion_holds}")
            failed |= not v.consistent
        rep = verify_demba(scen)
        report.add("theorem-demba", "-",
                   "dominant" if rep.all_hold else "not-dominant")
        failed |= not rep.all_hold
    else:
        raise ScenarioError(
            "validation-error(protocol): lemma checks need 'he' or 'demba'")
    report.summary.append("all lemma verdicts consistent" if not failed
                          else "LEMMA/THEOREM FAILURE")
    return report, (2 if failed else 0)


def cmd_pool(args) -> tuple:
    params = PoolParams(h=_frac(args.hash, "h"), H=_frac(args.network_hash, "H"),
                        N=args.pool_size, R=_frac(args.reward, "R"),
                        f_pool=_frac(args.pool_fee, "f"),
                        lambda_net=_frac(args.lambda_net, "lambda"),
                        alpha_risk=args.alpha_risk)
    rep = pool_math(params)
    report = Report(_base_header(args, "pool"))
    report.add("E_solo", "-", fmt_fraction(rep.E_solo))
    report.add("E_pool", "-", fmt_fraction(rep.E_pool))
    report.add("ratio", "-", fmt_fraction(rep.ratio))
    report.add("Var_solo", "-", fmt_fraction(rep.Var_solo))
    report.add("Var_pool", "-", fmt_fraction(rep.Var_pool))
    report.add("EU_solo", "-", rep.EU_solo)
    report.add("EU_pool", "-", rep.EU_pool)
    report.add("delta_U", "-", rep.delta_U)
    if args.trials:
        mc = pool_mc(params, args.trials, args.seed or 0)
        for key in ("mean_solo", "var_solo", "mean_pool", "var_pool"):
            report.add(f"mc_{key}", "-", mc[key])
    report.summary.append(
        "pool preferred (delta_U > 0)" if rep.delta_U > 0
        else "solo preferred (delta_U <= 0)")
    return report, 0


# ---------------------------------------------------------------------------
# Time to complete.
# ---------------------------------------------------------------------------

TTC_PATHS = ("alice-redeems", "bob-collateral", "bob-both")


def _ttc_profile(scen: Scenario, path: str) -> StrategyProfile:
    miners = {p: HonestFeeMax() for p in scen.miner_parties()}
    if path == "bob-both":
        return StrategyProfile(AliceOffline(), BobHonest(1), miners)
    return StrategyProfile(AliceHonest(), BobHonest(1), miners)


def _completion_round(out, scen: Scenario, path: str) -> Optional[int]:
    red = out.state.redemptions
    if scen.protocol == "demba":
        from .game import DEP_ID, COL_B_ID
        if path == "bob-collateral":
            entry = red.get(COL_B_ID)
            return entry[1] if entry else None
        entry = red.get(DEP_ID)
        return entry[1] if entry else None
    from .game import DEP_ID, COL_ID
    if path == "alice-redeems":
        entry = red.get(DEP_ID)
        return entry[1] if entry and entry[0] == "dep-A" else None
    if path == "bob-collateral":
        if scen.protocol == "naive":
            raise ScenarioError("validation-error(path): naive has no collateral")
        if scen.protocol == "he":
            entry = red.get(DEP_ID)
            return entry[1] if entry else None
        entry = red.get(COL_ID)
        return entry[1] if entry else None
    if scen.protocol == "naive":
        entry = red.get(DEP_ID)
        return entry[1] if entry else None
    if scen.protocol == "he":
        # The staged refund completes when the combined pot leaves the
        # collateral contract.
        entry = red.get(COL_ID)
        return entry[1] if entry and entry[0] == "col-B" else None
    rounds = [red[c][1] for c in (DEP_ID, COL_ID) if c in red]
    return max(rounds) if len(rounds) == 2 else None


def ttc(scen: Scenario, path: str, trials: int, seed: int) -> dict:
    """Monte-Carlo rounds-to-final-transfer with a 95% half-width."""
    if path not in TTC_PATHS:
        raise ScenarioError(f"validation-error(path): {path!r}")
    if trials < 1:
        raise ScenarioError("validation-error(trials): need at least 1")
    profile = _ttc_profile(scen, path)
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    for _ in range(trials):
        schedule = sample_schedule(scen, rng)
        out = play(scen, profile, schedule)
        done = _completion_round(out, scen, path)
        if done is None:
            raise ScenarioError(
                f"validation-error: {path} never completed within the horizon")
        total += done
        total_sq += done * done
    mean = total / trials
    var = max(0.0, total_sq / trials - mean * mean)
    half = 1.96 * (var / trials) ** 0.5
    return {"mean": mean, "half_width": half, "trials": trials,
            "l": scen.l}


def cmd_ttc(args) -> tuple:
    scen, _ = load_scenario(args.scenario)
    variant = args.variant or scen.protocol
    if variant != scen.protocol:
        raise ScenarioError("validation-error(variant): scenario protocol is "
                            f"{scen.protocol!r}")
    seed = args.seed if args.seed is not None else scen.seed
    result = ttc(scen, args.path, args.trials or 10_000, seed)
    report = Report(_base_header(args, "ttc"))
    report.header["seed"] = seed
    report.add("ttc-mean-rounds", "-", result["mean"],
               result["mean"] - result["half_width"],
               result["mean"] + result["half_width"])
    report.add("ttc-delay-param", "-", result["l"])
    report.add("ttc-trials", "-", result["trials"])
    report.summary.append(
        "round granularity; multiply by the chain's block interval for "
        "wall-clock figures (trends only)")
    return report, 0


# ---------------------------------------------------------------------------
# CLI wiring.
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arena",
        description="Deterministic HTLC bribery-game simulator and verifier")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="write the report here")

    p = sub.add_parser("simulate", help="run one schedule to the horizon")
    common(p)
    p = sub.add_parser("expect", help="expected utilities over schedules")
    common(p)
    p.add_argument("--mode", choices=("exact", "mc"), default=None)
    p.add_argument("--trials", type=int, default=None)
    p = sub.add_parser("dominance", help="brute-force policy dominance")
    common(p)
    p.add_argument("--player", required=True,
                   help="'alice', 'bob', or a miner id")
    p = sub.add_parser("lemmas", help="verify the dominance lemmas and theorems")
    common(p)
    p = sub.add_parser("pool", help="solo vs pool mining mathematics")
    common(p, scenario=False)
    p.add_argument("--hash", default="1/10", help="miner hash rate h")
    p.add_argument("--network-hash", default="1", help="network hash rate H")
    p.add_argument("--pool-size", type=int, default=25)
    p.add_argument("--reward", default="1", help="block reward R")
    p.add_argument("--pool-fee", default="1/50")
    p.add_argument("--lambda-net", default="100", help="network block rate")
    p.add_argument("--alpha-risk", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=None)
    p = sub.add_parser("ttc", help="time-to-complete in rounds")
    common(p)
    p.add_argument("--variant", choices=("mad", "he", "demba"), default=None)
    p.add_argument("--path", choices=TTC_PATHS, required=True)
    p.add_argument("--trials", type=int, default=None)
    return parser


COMMANDS = {"simulate": cmd_simulate, "expect": cmd_expect,
            "dominance": cmd_dominance, "lemmas": cmd_lemmas,
            "pool": cmd_pool, "ttc": cmd_ttc}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = COMMANDS[args.subcommand](args)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    text = report.render()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
