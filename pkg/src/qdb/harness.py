"""Verification and validation helpers.

Covers statistical repetition sizing (two-sided Hoeffding instantiation of
the Chernoff-bound family), empirical distribution comparison, cross-engine
agreement checks, classical validation oracles for factoring and search
outputs, and a JSON suite runner.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

from scipy.stats import chi2 as _chi2

from .engine import DENSE, EngineConfig, ExecutionCursor, execute
from .errors import EmptyObservation, IndexOutOfRange, OutOfRange, SuiteParseError
from .qasm.ir import CircuitIR
from .state import QuantumState, equal_up_to_global_phase

CHI_SQUARE_ALPHA = 0.01
_POOL_MIN_EXPECTED = 5.0


@dataclass(frozen=True)
class RepetitionPlan:
    """Shots needed so every outcome frequency is within epsilon of its
    probability with confidence 1 - delta (two-sided Hoeffding bound)."""

    epsilon: float
    delta: float
    shots: int

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta, "shots": self.shots}


def chernoff_shots(epsilon: float, delta: float) -> RepetitionPlan:
    """shots = ceil(ln(2/delta) / (2 epsilon^2)); domain (0,1) x (0,1)."""
    if not (0.0 < epsilon < 1.0) or not (0.0 < delta < 1.0):
        raise OutOfRange("epsilon and delta must lie strictly between 0 and 1")
    shots = math.ceil(math.log(2.0 / delta) / (2.0 * epsilon * epsilon))
    return RepetitionPlan(epsilon, delta, shots)


@dataclass(frozen=True)
class DistributionVerdict:
    tvd: float
    chi_square: float
    p_value: float
    passed: bool
    shots: int

    def to_json(self) -> dict:
        return {
            "tvd": self.tvd,
            "chi_square": self.chi_square,
            "p_value": self.p_value,
            "verdict": "pass" if self.passed else "fail",
            "shots": self.shots,
        }


def compare_distributions(
    observed: Mapping[str, int],
    expected: Mapping[str, float],
    alpha: float = CHI_SQUARE_ALPHA,
) -> DistributionVerdict:
    """TVD plus chi-square goodness of fit (bins with expectation < 5 pooled)."""
    total = sum(observed.values())
    if total <= 0:
        raise EmptyObservation("no observations")
    if abs(sum(expected.values()) - 1.0) > 1e-9:
        raise OutOfRange("expected probabilities must sum to 1")

    keys = sorted(set(observed) | set(expected))
    tvd = 0.5 * sum(
        abs(observed.get(k, 0) / total - expected.get(k, 0.0)) for k in keys
    )

    # Observations on zero-probability outcomes are impossible under the
    # expected model: immediate failure, no finite statistic.
    impossible = sum(observed.get(k, 0) for k in keys if expected.get(k, 0.0) == 0.0)
    if impossible > 0:
        return DistributionVerdict(tvd, math.inf, 0.0, False, total)

    bins = [(expected[k] * total, observed.get(k, 0)) for k in keys if expected.get(k, 0.0) > 0.0]
    bins.sort()
    pooled: list[tuple[float, int]] = []
    acc_e, acc_o = 0.0, 0
    for e, o in bins:
        acc_e += e
        acc_o += o
        if acc_e >= _POOL_MIN_EXPECTED:
            pooled.append((acc_e, acc_o))
            acc_e, acc_o = 0.0, 0
    if acc_e > 0.0:
        if pooled:
            last_e, last_o = pooled[-1]
            pooled[-1] = (last_e + acc_e, last_o + acc_o)
        else:
            pooled.append((acc_e, acc_o))

    stat = sum((o - e) ** 2 / e for e, o in pooled)
    dof = len(pooled) - 1
    p_value = 1.0 if dof == 0 else float(_chi2.sf(stat, dof))
    return DistributionVerdict(tvd, stat, p_value, p_value >= alpha, total)


def two_sample_chi_square(
    counts_a: Mapping[str, int],
    counts_b: Mapping[str, int],
    alpha: float = CHI_SQUARE_ALPHA,
) -> DistributionVerdict:
    """Homogeneity test for two count tables (small bins pooled)."""
    n_a = sum(counts_a.values())
    n_b = sum(counts_b.values())
    if n_a <= 0 or n_b <= 0:
        raise EmptyObservation("both samples must be non-empty")
    keys = sorted(set(counts_a) | set(counts_b))
    tvd = 0.5 * sum(
        abs(counts_a.get(k, 0) / n_a - counts_b.get(k, 0) / n_b) for k in keys
    )
    rows = sorted(
        (counts_a.get(k, 0) + counts_b.get(k, 0), counts_a.get(k, 0), counts_b.get(k, 0))
        for k in keys
    )
    pooled: list[tuple[int, int, int]] = []
    acc = (0, 0, 0)
    for row in rows:
        acc = tuple(x + y for x, y in zip(acc, row))  # type: ignore[assignment]
        # pool until both expected cells reach the threshold
        if acc[0] * n_a / (n_a + n_b) >= _POOL_MIN_EXPECTED and acc[0] * n_b / (n_a + n_b) >= _POOL_MIN_EXPECTED:
            pooled.append(acc)  # type: ignore[arg-type]
            acc = (0, 0, 0)
    if acc[0] > 0:
        if pooled:
            pooled[-1] = tuple(x + y for x, y in zip(pooled[-1], acc))  # type: ignore[assignment]
        else:
            pooled.append(acc)  # type: ignore[arg-type]

    stat = 0.0
    for total, a, b in pooled:
        e_a = total * n_a / (n_a + n_b)
        e_b = total * n_b / (n_a + n_b)
        stat += (a - e_a) ** 2 / e_a + (b - e_b) ** 2 / e_b
    dof = len(pooled) - 1
    p_value = 1.0 if dof == 0 else float(_chi2.sf(stat, dof))
    return DistributionVerdict(tvd, stat, p_value, p_value >= alpha, n_a + n_b)


@dataclass
class CrossEngineReport:
    passed: bool
    pairwise: list[dict] = field(default_factory=list)
    state_check: dict | None = None

    def to_json(self) -> dict:
        return {
            "verdict": "pass" if self.passed else "fail",
            "pairwise": self.pairwise,
            "state_check": self.state_check,
        }


def cross_engine_verify(
    ir: CircuitIR,
    configs: Sequence[EngineConfig],
    shots: int = 1024,
    alpha: float = CHI_SQUARE_ALPHA,
) -> CrossEngineReport:
    """Run the program under every engine and compare the results pairwise.

    Counts are compared with a two-sample chi-square; measurement-free
    programs additionally compare final states up to global phase.
    """
    if len(configs) < 2:
        raise OutOfRange("need at least two engine configurations")
    report = CrossEngineReport(passed=True)

    if not ir.has_measurement():
        states = []
        for config in configs:
            cursor = ExecutionCursor(ir, config)
            cursor.run_to_end()
            states.append((config, cursor.state))
        worst: dict | None = None
        ok = True
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                equal = equal_up_to_global_phase(states[i][1], states[j][1], 1e-9)
                if not equal:
                    ok = False
                    worst = {
                        "pair": [states[i][0].method, states[j][0].method],
                        "equal_up_to_phase": False,
                    }
        report.state_check = worst or {"equal_up_to_phase": True}
        report.passed &= ok

    results = [execute(ir, config, shots=shots) for config in configs]
    for i in range(len(results)):
        for j in range(i + 1, len(results)):
            verdict = two_sample_chi_square(results[i].counts, results[j].counts, alpha)
            entry = {
                "pair": [configs[i].method, configs[j].method],
                "seeds": [configs[i].seed, configs[j].seed],
                **verdict.to_json(),
            }
            report.pairwise.append(entry)
            report.passed &= verdict.passed
    return report


@dataclass(frozen=True)
class ValidationOutcome:
    valid: bool
    witness: str = ""

    def to_json(self) -> dict:
        return {"valid": self.valid, "witness": self.witness}


def validate_shor_factors(n: int, factors: Sequence[int]) -> ValidationOutcome:
    """Valid iff every factor is strictly between 1 and n and their product
    is n. Arbitrary-precision, O(len(factors)) multiplications."""
    if n < 2:
        return ValidationOutcome(False, f"n must be at least 2, got {n}")
    if not factors:
        return ValidationOutcome(False, "empty factor list")
    product = 1
    for f in factors:
        if not (1 < f < n):
            return ValidationOutcome(False, f"factor {f} not strictly between 1 and {n}")
        product *= f
    if product != n:
        return ValidationOutcome(False, f"product {product} != {n}")
    return ValidationOutcome(True)


def validate_grover(items: Sequence, index: int, predicate: Callable) -> ValidationOutcome:
    """Valid iff predicate(items[index]); exactly one predicate evaluation."""
    if not (0 <= index < len(items)):
        raise IndexOutOfRange(f"index {index} out of range for {len(items)} items")
    if predicate(items[index]):
        return ValidationOutcome(True)
    return ValidationOutcome(False, f"item at index {index} does not satisfy the predicate")


# --- suite runner -------------------------------------------------------------------

_VERDICT_ORDER = {"pass": 0, "inconclusive": 1, "fail": 2}


@dataclass
class SuiteReport:
    cases: list[dict] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        worst = "pass"
        for case in self.cases:
            if _VERDICT_ORDER[case["verdict"]] > _VERDICT_ORDER[worst]:
                worst = case["verdict"]
        return worst

    @property
    def exit_status(self) -> int:
        return 0 if self.verdict == "pass" else 1

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "cases": self.cases}


def run_test_suite(path: str | Path, include_path: str | Path | None = None) -> SuiteReport:
    """Execute a JSON test suite (see docs in README for the schema)."""
    from . import debugger  # local import: debugger depends on this module
    from .qasm import load_file

    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SuiteParseError("suite file not found", str(path)) from None
    except json.JSONDecodeError as exc:
        raise SuiteParseError(f"invalid JSON: {exc}", str(path)) from None
    if not isinstance(raw, dict) or not isinstance(raw.get("cases"), list):
        raise SuiteParseError('expected an object with a "cases" list', str(path))

    prepared = []
    for i, case in enumerate(raw["cases"]):
        where = f"{path}:cases[{i}]"
        if not isinstance(case, dict) or "kind" not in case:
            raise SuiteParseError('case must be an object with a "kind"', where)
        kind = case["kind"]
        if kind in ("distribution", "cross-engine", "assertions"):
            program = case.get("program")
            if not isinstance(program, str):
                raise SuiteParseError('missing "program" path', where)
            program_path = (path.parent / program).resolve()
            if not program_path.is_file():
                raise SuiteParseError(f"program file {program!r} not found", where)
            case = {**case, "program": str(program_path)}
        elif kind == "factors":
            if "n" not in case or "factors" not in case:
                raise SuiteParseError('factors case needs "n" and "factors"', where)
        else:
            raise SuiteParseError(f"unknown case kind {kind!r}", where)
        prepared.append((where, case))

    report = SuiteReport()
    for where, case in prepared:
        kind = case["kind"]
        name = case.get("name", f"{kind}@{where}")
        entry: dict = {"name": name, "kind": kind}
        try:
            if kind == "distribution":
                _, ir = load_file(case["program"], include_path)
                seed = int(case.get("seed", 0))
                shots = int(case.get("shots", 1024))
                config = EngineConfig(method=case.get("engine", DENSE), seed=seed)
                result = execute(ir, config, shots=shots)
                verdict = compare_distributions(
                    result.counts, case["expected"], float(case.get("alpha", CHI_SQUARE_ALPHA))
                )
                entry.update(verdict.to_json())
                entry["seed"] = seed
            elif kind == "cross-engine":
                _, ir = load_file(case["program"], include_path)
                seed = int(case.get("seed", 0))
                configs = [
                    EngineConfig(method=m, seed=seed)
                    for m in case.get("engines", ["dense-inplace", "naive-matrix"])
                ]
                rep = cross_engine_verify(ir, configs, shots=int(case.get("shots", 1024)))
                entry.update(rep.to_json())
                entry["seed"] = seed
            elif kind == "assertions":
                source, ir = load_file(case["program"], include_path)
                session = debugger.DebugSession(
                    ir,
                    seed=int(case.get("seed", 0)),
                    mode=case.get("mode", debugger.OMNISCIENT),
                    source=source,
                )
                results = session.run_all_assertions()
                entry["assertions"] = [r.to_json() for r in results]
                entry["seed"] = session.seed
                worst = "pass"
                for r in results:
                    if _VERDICT_ORDER[r.verdict] > _VERDICT_ORDER[worst]:
                        worst = r.verdict
                entry["verdict"] = worst
            elif kind == "factors":
                outcome = validate_shor_factors(int(case["n"]), [int(x) for x in case["factors"]])
                entry["verdict"] = "pass" if outcome.valid else "fail"
                entry["witness"] = outcome.witness
        except SuiteParseError:
            raise
        except Exception as exc:  # a crashed case is a failed case, not a crashed suite
            entry["verdict"] = "fail"
            entry["error"] = f"{type(exc).__name__}: {exc}"
        report.cases.append(entry)
    return report
