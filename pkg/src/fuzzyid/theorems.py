"""Replication harness: one executable scenario per claim.

Each scenario runs a handful of checks (exact fixture equalities and
exhaustive or random searches) and compares every outcome with the verdict
the claim predicts.  Uniqueness and impossibility statements cannot be
settled by finite search; for those the scenario checks the testable side
and labels its evidence ``OneSided``.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import dsl
from .aggregators import (
    DEMOCRATIC,
    INCLUSIVE,
    LIBERAL,
    UNANIMITY,
    Fcif,
    dictatorial,
    witness,
)
from .axioms import (
    AxiomId,
    CheckVerdict,
    ColumnPair,
    Exhaustive,
    Random,
    SymmetricPair,
    axiom_holds,
    certify,
    classify,
    falsify,
    is_fuzzy_symmetric_pair,
)
from .core import (
    HALF,
    DomainClass,
    FcifError,
    Profile,
    RangeClass,
    format_value,
    in_domain_class,
    in_range_class,
    load_fixture,
)

REPRODUCED = "Reproduced"
COUNTEREXAMPLE = "CounterexampleFound"
DISCREPANCY = "KnownDiscrepancy"

EXACT, EXHAUSTIVE, ONE_SIDED = "Exact", "Exhaustive", "OneSided"

# reference values for the example5 fixture; agent 2 disagrees with the formula
EXAMPLE5_REFERENCE = (Fraction(3, 4), Fraction(7, 20), Fraction(3, 4))


class UnknownScenario(FcifError, KeyError):
    pass


def _example4_first_rule(profile: Profile, i: int) -> Fraction:
    # f(1) = 0 when any opinion is exactly 0, else 1; f(k) = 1 for k > 1
    if i > 0:
        return Fraction(1)
    return Fraction(0) if any(v == 0 for row in profile.rows for v in row) else Fraction(1)


EXAMPLE4_FIRST = Fcif("example4-first", _example4_first_rule)


def builtins() -> list[Fcif]:
    return [LIBERAL, UNANIMITY, INCLUSIVE, DEMOCRATIC, dictatorial(1), witness()]


@dataclass
class CheckRecord:
    name: str
    expected: str
    observed: str
    ok: bool
    witnesses: int | None = None
    known_discrepancy: bool = False
    detail: dict | None = None

    def to_json(self) -> dict:
        doc = {"name": self.name, "expected": self.expected, "observed": self.observed, "ok": self.ok}
        if self.witnesses is not None:
            doc["witnesses"] = self.witnesses
        if self.known_discrepancy:
            doc["known_discrepancy"] = True
        if self.detail is not None:
            doc["detail"] = self.detail
        return doc


@dataclass
class ScenarioReport:
    id: str
    status: str
    checks: list[CheckRecord]
    evidence_kind: str
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> int:
        return sum(c.ok for c in self.checks)

    @property
    def witnesses(self) -> int:
        return sum(c.witnesses or 0 for c in self.checks)

    def to_json(self, timing: bool = True) -> dict:
        doc = {
            "id": self.id,
            "status": self.status,
            "evidence_kind": self.evidence_kind,
            "checks_passed": self.passed,
            "checks_total": len(self.checks),
            "witnesses": self.witnesses,
            "checks": [c.to_json() for c in self.checks],
        }
        if timing:
            doc["elapsed_ms"] = round(self.elapsed_ms, 3)
        return doc


@dataclass(frozen=True)
class Scale:
    """Search sizes; ``None`` keeps the per-check default."""

    n: int | None = None
    step: Fraction | None = None
    seed: int = 42
    jobs: int = 1

    def small(self):
        return self.n or 2, Exhaustive(Fraction(self.step) if self.step else Fraction(1, 4))

    def large(self):
        return self.n or 3, Exhaustive(Fraction(self.step) if self.step else Fraction(1, 2))


class _Recorder:
    def __init__(self, scale: Scale):
        self.scale = scale
        self.records: list[CheckRecord] = []

    def verdict(self, name: str, v: CheckVerdict, expect_falsified: bool) -> CheckVerdict:
        want = "falsified" if expect_falsified else "no_violation_found"
        ok = v.falsified == expect_falsified
        if v.falsified:
            ok = ok and certify(v)
        detail = {"counterexample": v.counterexample.to_json(v.fcif)} if v.falsified else None
        self.records.append(CheckRecord(name, want, v.status, ok, v.checked, detail=detail))
        return v

    def axiom(self, fcif: Fcif, axiom: str, expect_falsified: bool, scale=None) -> CheckVerdict:
        n, strategy = scale or self.scale.small()
        v = falsify(fcif, AxiomId(axiom), n, strategy, HALF, self.scale.jobs)
        return self.verdict(f"{fcif.name} {axiom} [n={n}, {_strategy_label(strategy)}]", v, expect_falsified)

    def classification(self, fcif: Fcif, domain: DomainClass, range_: RangeClass,
                       expect_falsified: bool, scale=None) -> CheckVerdict:
        n, strategy = scale or self.scale.large()
        v = classify(fcif, domain, range_, n, strategy, HALF, self.scale.jobs)
        return self.verdict(
            f"{fcif.name} {domain.value} -> {range_.value} [n={n}, {_strategy_label(strategy)}]",
            v, expect_falsified)

    def some_failure(self, fcif: Fcif, axioms: list[str], scale=None) -> None:
        """Record whether ``fcif`` violates at least one of ``axioms``."""
        n, strategy = scale or self.scale.small()
        witnesses, hit = 0, None
        for a in axioms:
            v = falsify(fcif, AxiomId(a), n, strategy, HALF, self.scale.jobs)
            witnesses += v.checked
            if v.falsified and certify(v):
                hit = v
                break
        observed = f"falsified {hit.axiom.value}" if hit else "satisfies all"
        detail = {"counterexample": hit.counterexample.to_json(fcif)} if hit else None
        self.records.append(CheckRecord(
            f"{fcif.name} violates one of {{{', '.join(axioms)}}} [n={n}, {_strategy_label(strategy)}]",
            "some axiom falsified", observed, hit is not None, witnesses, detail=detail))

    def value(self, name: str, expected, observed) -> None:
        self.records.append(CheckRecord(name, _fmt(expected), _fmt(observed), expected == observed))

    def flag(self, name: str, expected: bool, observed: bool) -> None:
        self.records.append(CheckRecord(name, str(expected).lower(), str(observed).lower(), expected == observed))

    def discrepancy(self, name: str, reference, computed) -> None:
        """A pre-registered mismatch: reported, never silently resolved."""
        self.records.append(CheckRecord(
            name, _fmt(reference), _fmt(computed), reference == computed,
            known_discrepancy=reference != computed,
            detail={"reference": _fmt(reference), "formula": _fmt(computed)}))


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return format_value(x)
    if isinstance(x, (set, frozenset)):
        return "{" + ", ".join(str(v) for v in sorted(x)) + "}"
    if isinstance(x, (tuple, list)):
        return "(" + ", ".join(_fmt(v) for v in x) + ")"
    return str(x)


def _strategy_label(s) -> str:
    if isinstance(s, Exhaustive):
        return f"step {format_value(Fraction(s.step))}"
    return f"random {s.samples} seed {s.seed}"


def _dsl(name: str) -> Fcif:
    return dsl.resolve(f"dsl-name:{name}")


def _two_agents(scale: Scale):
    _, strategy = scale.small()
    return 2, strategy


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

def _e1(r: _Recorder) -> None:
    p = load_fixture("example1")
    r.value("democratic on example1", (Fraction(7, 20), Fraction(13, 20)), tuple(DEMOCRATIC(p)))
    r.flag("agents 1 and 2 fuzzy-symmetric in example1", True, is_fuzzy_symmetric_pair(p, 1, 2))
    r.flag("democratic FSYM holds on example1", False, axiom_holds(DEMOCRATIC, AxiomId.FSYM, SymmetricPair(p, 1, 2)))
    two = _two_agents(r.scale)
    r.axiom(DEMOCRATIC, "SYM", False, two)
    r.axiom(DEMOCRATIC, "FSYM", True, two)
    rule = _dsl("ex1b")
    r.axiom(rule, "FSYM", False, two)
    r.axiom(rule, "SYM", True, two)


def _e2(r: _Recorder) -> None:
    p, q = load_fixture("example2"), load_fixture("example2_prime")
    r.value("democratic f(1) on example2", Fraction(7, 20), DEMOCRATIC.at(p, 1))
    r.value("democratic f(1) on example2_prime", Fraction(7, 10), DEMOCRATIC.at(q, 1))
    r.flag("democratic FI holds on (example2, example2_prime, j=1)", False,
           axiom_holds(DEMOCRATIC, AxiomId.FI, ColumnPair(p, q, 1)))
    two = _two_agents(r.scale)
    r.axiom(DEMOCRATIC, "I", False, two)
    r.axiom(DEMOCRATIC, "FI", True, two)
    r.axiom(DEMOCRATIC, "FI", True, (2, Random(10000, r.scale.seed)))
    rule = _dsl("ex2b")
    definition = dsl.definitions()["ex2b"]
    r.value("cells ex2b reads for f(1)", {(1, 1), (1, 2)}, dsl.dependencies(definition, 2, 1))
    r.flag("ex2b structurally independent", False, dsl.is_structurally_independent(definition, 2))
    r.axiom(rule, "I", True, two)
    r.axiom(rule, "FI", False, two)


def _e3(r: _Recorder) -> None:
    a, b = _dsl("ex3a"), _dsl("ex3b")
    r.axiom(a, "L", False)
    r.axiom(a, "FL", True)
    r.axiom(b, "FL", False)
    r.axiom(b, "L", True)


def _e4(r: _Recorder) -> None:
    r.axiom(EXAMPLE4_FIRST, "EL1", False)
    r.axiom(EXAMPLE4_FIRST, "EL2", False)
    r.some_failure(EXAMPLE4_FIRST, ["FEL1", "FEL2"])
    two = _two_agents(r.scale)
    rule = _dsl("ex4b")
    r.axiom(rule, "FEL1", False, two)
    r.axiom(rule, "FEL2", False, two)
    r.some_failure(rule, ["EL1", "EL2"], two)


def _t1(r: _Recorder) -> None:
    for a in ("FMON", "FC", "FI", "FL"):
        r.axiom(LIBERAL, a, False)
    for other in builtins()[1:]:
        r.some_failure(other, ["FMON", "FC", "FI", "FL"])


def _c1(r: _Recorder) -> None:
    for a in ("FMON", "FC", "I", "L"):
        r.axiom(LIBERAL, a, False)
    for other in builtins()[1:]:
        r.some_failure(other, ["FMON", "FC", "I", "L"])


def _c2(r: _Recorder) -> None:
    r.axiom(LIBERAL, "SYM", False)
    r.axiom(LIBERAL, "FSYM", False)


def _c3(r: _Recorder) -> None:
    r.axiom(LIBERAL, "FSMON", True)
    n, strategy = r.scale.small()
    for f in builtins():
        fmon = falsify(f, AxiomId.FMON, n, strategy, HALF, r.scale.jobs)
        fsmon = falsify(f, AxiomId.FSMON, n, strategy, HALF, r.scale.jobs)
        r.records.append(CheckRecord(
            f"{f.name}: FMON falsified implies FSMON falsified", "true",
            str((not fmon.falsified) or fsmon.falsified).lower(),
            (not fmon.falsified) or fsmon.falsified, fmon.checked + fsmon.checked))
    for f in builtins():
        r.some_failure(f, ["FSMON", "FC", "FI", "FL"])


def _t2(r: _Recorder) -> None:
    for a in ("FMON", "FC", "FI", "EL1", "FEL1"):
        r.axiom(INCLUSIVE, a, False)
    for a in ("EL2", "FEL2"):
        r.axiom(INCLUSIVE, a, True)
    for a in ("FMON", "FC", "FI", "EL2", "FEL2"):
        r.axiom(UNANIMITY, a, False)
    for a in ("EL1", "FEL1"):
        r.axiom(UNANIMITY, a, True)


def _c4(r: _Recorder) -> None:
    for f in builtins():
        r.some_failure(f, ["FMON", "FC", "FI", "FEL1", "FEL2"])
        r.some_failure(f, ["FMON", "FC", "FI", "EL1", "EL2"])


def _t3a(r: _Recorder) -> None:
    w = witness()
    large = r.scale.large()
    r.axiom(w, "FC", False, large)
    r.axiom(w, "FI", False, large)
    r.classification(w, DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTARSTAR, False, large)
    p = load_fixture("example5")
    out = w(p)
    for d in range(1, p.n + 1):
        r.flag(f"witness on example5 differs from dictatorial:{d}", True, out != dictatorial(d)(p))


def _t3bc(r: _Recorder) -> None:
    n, _ = large = r.scale.large()
    for d in range(1, n + 1):
        f = dictatorial(d)
        r.classification(f, DomainClass.PSTAR, RangeClass.FSTAR, False, large)
        r.classification(f, DomainClass.PSTAR, RangeClass.FSTARSTAR, False, large)
        r.classification(f, DomainClass.PSTARSTAR, RangeClass.FSTARSTAR, False, large)
    r.axiom(dictatorial(1), "FC", False, large)
    r.axiom(dictatorial(1), "FI", False, large)
    r.classification(DEMOCRATIC, DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTAR, True, large)
    r.classification(UNANIMITY, DomainClass.PSTARSTAR, RangeClass.FSTAR, True, large)
    # on the step-1/2 grid every P*** row already lies in F**, so a dictator
    # can only be caught on the finer grid
    small = r.scale.small()
    r.classification(dictatorial(1), DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTAR, True, small)
    r.classification(dictatorial(1), DomainClass.PSTARSTAR, RangeClass.FSTAR, True, small)


def _e5(r: _Recorder) -> None:
    p = load_fixture("example5")
    out = witness()(p)
    r.value("witness f(1) on example5", EXAMPLE5_REFERENCE[0], out[0])
    r.discrepancy("witness f(2) on example5 (reference vs formula)", EXAMPLE5_REFERENCE[1], out[1])
    r.value("witness f(3) on example5", EXAMPLE5_REFERENCE[2], out[2])
    r.flag("witness output on example5 equals some agent's row", False, any(tuple(row) == tuple(out) for row in p.rows))


def _t4(r: _Recorder) -> None:
    r.axiom(DEMOCRATIC, "FC", False)
    r.axiom(DEMOCRATIC, "I", False)
    r.classification(DEMOCRATIC, DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTARSTAR, False)
    p = load_fixture("example5")
    r.flag("democratic on example5 differs from every dictator", True,
           all(DEMOCRATIC(p) != dictatorial(d)(p) for d in range(1, p.n + 1)))


def _mean(r: _Recorder) -> None:
    for scale in (r.scale.small(), r.scale.large()):
        for f in builtins():
            r.axiom(f, "FC", False, scale)
    r.classification(UNANIMITY, DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTARSTAR, True)
    r.classification(INCLUSIVE, DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTARSTAR, True)


def _e6(r: _Recorder) -> None:
    p = load_fixture("example6")
    out = UNANIMITY(p)
    r.value("unanimity on example6", (Fraction(0),) * 3, tuple(out))
    r.flag("example6 in P***", True, in_domain_class(p, DomainClass.PSTARSTARSTAR))
    r.flag("unanimity(example6) in F***", False, in_range_class(out, RangeClass.FSTARSTARSTAR))
    r.flag("example6 in P**", False, in_domain_class(p, DomainClass.PSTARSTAR))


@dataclass(frozen=True)
class Scenario:
    id: str
    description: str
    claim: str  # kind of statement: characterization, impossibility, worked example, ...
    evidence_kind: str
    run: Callable[[_Recorder], None] = field(repr=False)
    discrepancy_registered: bool = False


SCENARIOS = [
    Scenario("E1", "mean rule: SYM holds, FSYM fails; ex1b: FSYM holds, SYM fails",
             "worked example", EXHAUSTIVE, _e1),
    Scenario("E2", "mean rule: I holds, FI fails; ex2b: FI holds, I fails",
             "worked example", EXHAUSTIVE, _e2),
    Scenario("E3", "ex3a satisfies L not FL; ex3b satisfies FL not L",
             "worked example", EXHAUSTIVE, _e3),
    Scenario("E4", "first rule satisfies EL not FEL; constant rule satisfies FEL not EL",
             "worked example", EXHAUSTIVE, _e4),
    Scenario("T1", "liberal satisfies FMON, FC, FI, FL; every other built-in breaks one",
             "characterization", ONE_SIDED, _t1),
    Scenario("C1", "liberal satisfies FMON, FC, I, L; every other built-in breaks one",
             "characterization", ONE_SIDED, _c1),
    Scenario("C2", "liberal satisfies SYM and FSYM", "consequence", ONE_SIDED, _c2),
    Scenario("C3", "liberal breaks FSMON; FSMON failures follow FMON failures; no built-in has FSMON, FC, FI, FL",
             "impossibility", ONE_SIDED, _c3),
    Scenario("T2", "inclusive has FMON, FC, FI, EL1, FEL1 but not EL2, FEL2; unanimity the mirror image",
             "characterization", ONE_SIDED, _t2),
    Scenario("C4", "no built-in satisfies FMON, FC, FI with both parts of FEL (or of EL)",
             "impossibility", ONE_SIDED, _c4),
    Scenario("T3a", "the six-branch rule satisfies FC, FI and maps P*** into F*** without being dictatorial",
             "existence", EXHAUSTIVE, _t3a),
    Scenario("T3bc", "dictators map P* and P** into F* / F**; the P***->F** and P**->F* targets fail",
             "characterization", ONE_SIDED, _t3bc),
    Scenario("E5", "six-branch rule on the worked profile; agent 2 value pre-registered as a discrepancy",
             "worked example", EXACT, _e5, discrepancy_registered=True),
    Scenario("T4", "mean rule satisfies FC and I and maps P*** into F***",
             "possibility", ONE_SIDED, _t4),
    Scenario("MEAN", "every built-in is a column mean; being a mean does not give F***",
             "definition", EXHAUSTIVE, _mean),
    Scenario("E6", "unanimity sends the worked P*** profile to the zero function",
             "worked example", EXACT, _e6),
]

_BY_ID = {s.id: s for s in SCENARIOS}
_ALIASES = {"T3b": "T3bc", "T3c": "T3bc"}


def list_scenarios() -> list[tuple[str, str, str, str]]:
    return [(s.id, s.description, s.claim, s.evidence_kind) for s in SCENARIOS]


def get_scenario(scenario_id: str) -> Scenario:
    key = _ALIASES.get(scenario_id, scenario_id)
    if key not in _BY_ID:
        raise UnknownScenario(f"unknown scenario {scenario_id!r}")
    return _BY_ID[key]


def run_scenario(scenario_id: str, n: int | None = None, step: Fraction | None = None,
                 seed: int = 42, jobs: int = 1) -> ScenarioReport:
    scenario = get_scenario(scenario_id)
    rec = _Recorder(Scale(n, step, seed, jobs))
    t0 = time.perf_counter()
    scenario.run(rec)
    elapsed = (time.perf_counter() - t0) * 1000
    failed = [c for c in rec.records if not c.ok]
    if not failed:
        status = REPRODUCED
    elif scenario.discrepancy_registered and all(c.known_discrepancy for c in failed):
        status = DISCREPANCY
    else:
        status = COUNTEREXAMPLE
    return ScenarioReport(scenario.id, status, rec.records, scenario.evidence_kind, elapsed)


def run_all(n: int | None = None, step: Fraction | None = None, seed: int = 42,
            jobs: int = 1, ids=None) -> list[ScenarioReport]:
    chosen = [s.id for s in SCENARIOS] if ids is None else [get_scenario(i).id for i in ids]
    return [run_scenario(i, n, step, seed, jobs) for i in chosen]


def summary(reports: list[ScenarioReport]) -> dict:
    counts = {REPRODUCED: 0, DISCREPANCY: 0, COUNTEREXAMPLE: 0}
    for rep in reports:
        counts[rep.status] += 1
    return counts


def report_json(reports: list[ScenarioReport], seed: int, timing: bool = True) -> str:
    doc = {
        "seed": seed,
        "summary": summary(reports),
        "scenarios": [r.to_json(timing) for r in reports],
    }
    return json.dumps(doc, indent=2)


def report_table(reports: list[ScenarioReport]) -> str:
    lines = [f"{'id':<6} {'status':<20} {'checks':>8} {'witnesses':>10}"]
    for rep in reports:
        checks = f"{rep.passed}/{len(rep.checks)}"
        lines.append(f"{rep.id:<6} {rep.status:<20} {checks:>8} {rep.witnesses:>10}")
        for c in rep.checks:
            if not c.ok:
                tag = "discrepancy" if c.known_discrepancy else "FAILED"
                lines.append(f"       {tag}: {c.name}: expected {c.expected}, observed {c.observed}")
    s = summary(reports)
    lines.append(
        f"{len(reports)} scenarios: {s[REPRODUCED]} reproduced, "
        f"{s[DISCREPANCY]} known discrepancy, {s[COUNTEREXAMPLE]} counterexample found")
    return "\n".join(lines)
