"""Axioms as executable predicates, witness generators and the falsification search.

A search walks a witness stream (exhaustive grid or seeded random) and
stops at the first witness that violates the axiom.  Exhaustive streams are
indexed by base profile, so they split into contiguous chunks that can be
scanned in separate processes; merging chunk results in stream order
reproduces the sequential verdict exactly.
"""

from __future__ import annotations

import enum
import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Union

from .aggregators import Fcif
from .core import (
    HALF,
    ONE,
    ZERO,
    DomainClass,
    FcifError,
    MembershipFunction,
    Profile,
    RangeClass,
    _check_index,
    format_value,
    grid_values,
    in_domain_class,
    in_range_class,
    within_column_bounds,
)

RANDOM_GRID = Fraction(1, 100)


class AxiomId(str, enum.Enum):
    FMON = "FMON"
    FSMON = "FSMON"
    FC = "FC"
    SYM = "SYM"
    FSYM = "FSYM"
    I = "I"  # noqa: E741
    FI = "FI"
    L = "L"
    FL = "FL"
    EL1 = "EL1"
    EL2 = "EL2"
    FEL1 = "FEL1"
    FEL2 = "FEL2"


AXIOM_DESCRIPTIONS = {
    AxiomId.FMON: "raising (lowering) one opinion about i never lowers (raises) f(i)",
    AxiomId.FSMON: "raising (lowering) one opinion about i strictly raises (lowers) f(i)",
    AxiomId.FC: "f(j) lies between the smallest and largest opinion about j",
    AxiomId.SYM: "symmetric agents get equal degrees",
    AxiomId.FSYM: "fuzzy-symmetric agents land on the same side of theta",
    AxiomId.I: "f(j) depends only on the opinions about j",
    AxiomId.FI: "the side of theta of f(j) depends only on the sides of the opinions about j",
    AxiomId.L: "a self-opinion of 1 (0) forces some degree 1 (0)",
    AxiomId.FL: "a self-opinion >= theta (< theta) forces some degree >= theta (< theta)",
    AxiomId.EL1: "any opinion of 1 forces some degree 1",
    AxiomId.EL2: "any opinion of 0 forces some degree 0",
    AxiomId.FEL1: "any opinion >= theta forces some degree >= theta",
    AxiomId.FEL2: "any opinion < theta forces some degree < theta",
}


def parse_axioms(text: str) -> list[AxiomId]:
    if text.strip().lower() == "all":
        return list(AxiomId)
    out = []
    for part in text.split(","):
        part = part.strip()
        try:
            out.append(AxiomId(part.upper()))
        except ValueError:
            raise FcifError(f"unknown axiom {part!r}") from None
    return out


# ---------------------------------------------------------------------------
# Witnesses
# ---------------------------------------------------------------------------

class WitnessShapeMismatch(FcifError, TypeError):
    pass


@dataclass(frozen=True)
class Perturbation:
    """``perturbed`` equals ``profile`` except at ``cell = (agent, target)``."""

    profile: Profile
    perturbed: Profile
    cell: tuple
    direction: str  # "increase" | "decrease"

    def to_json(self, fcif: Fcif | None = None) -> dict:
        doc = {
            "kind": "perturbation",
            "profile": _rows(self.profile),
            "perturbed": _rows(self.perturbed),
            "cell": list(self.cell),
            "direction": self.direction,
        }
        if fcif is not None:
            doc["outputs"] = {"profile": _vals(fcif(self.profile)), "perturbed": _vals(fcif(self.perturbed))}
        return doc


@dataclass(frozen=True)
class SingleProfile:
    profile: Profile

    def to_json(self, fcif: Fcif | None = None) -> dict:
        doc = {"kind": "single_profile", "profile": _rows(self.profile)}
        if fcif is not None:
            doc["outputs"] = {"profile": _vals(fcif(self.profile))}
        return doc


@dataclass(frozen=True)
class SymmetricPair:
    """``profile`` treats agents ``j`` and ``k`` alike (exactly or by bucket)."""

    profile: Profile
    j: int
    k: int

    def to_json(self, fcif: Fcif | None = None) -> dict:
        doc = {"kind": "symmetric_pair", "profile": _rows(self.profile), "j": self.j, "k": self.k}
        if fcif is not None:
            doc["outputs"] = {"profile": _vals(fcif(self.profile))}
        return doc


@dataclass(frozen=True)
class ColumnPair:
    """Two profiles whose column ``j`` agree (exactly, or bucket-wise for FI)."""

    profile: Profile
    other: Profile
    j: int

    def to_json(self, fcif: Fcif | None = None) -> dict:
        doc = {"kind": "column_pair", "profile": _rows(self.profile), "other": _rows(self.other), "j": self.j}
        if fcif is not None:
            doc["outputs"] = {"profile": _vals(fcif(self.profile)), "other": _vals(fcif(self.other))}
        return doc


Witness = Union[Perturbation, SingleProfile, SymmetricPair, ColumnPair]

REQUIRED_VARIANT = {
    AxiomId.FMON: Perturbation, AxiomId.FSMON: Perturbation,
    AxiomId.SYM: SymmetricPair, AxiomId.FSYM: SymmetricPair,
    AxiomId.I: ColumnPair, AxiomId.FI: ColumnPair,
    AxiomId.FC: SingleProfile, AxiomId.L: SingleProfile, AxiomId.FL: SingleProfile,
    AxiomId.EL1: SingleProfile, AxiomId.EL2: SingleProfile,
    AxiomId.FEL1: SingleProfile, AxiomId.FEL2: SingleProfile,
}


def _rows(p: Profile) -> list:
    return [[format_value(v) for v in r] for r in p.rows]


def _vals(m) -> list:
    return [format_value(v) for v in m]


# ---------------------------------------------------------------------------
# Axiom predicates
# ---------------------------------------------------------------------------

def axiom_holds(fcif: Fcif, axiom: AxiomId, w: Witness, theta: Fraction = HALF) -> bool:
    """Does ``fcif`` satisfy ``axiom`` on the witness ``w``?

    Generators guarantee each witness meets its axiom's hypothesis, so this
    evaluates the conclusion only.
    """
    axiom = AxiomId(axiom)
    if not isinstance(w, REQUIRED_VARIANT[axiom]):
        raise WitnessShapeMismatch(f"{axiom.value} needs a {REQUIRED_VARIANT[axiom].__name__}, got {type(w).__name__}")
    rule = fcif.rule

    if axiom in (AxiomId.FMON, AxiomId.FSMON):
        k, i = w.cell[0] - 1, w.cell[1] - 1
        before = rule(w.profile, i)
        after = rule(w.perturbed, i)
        up = w.perturbed.rows[k][i] > w.profile.rows[k][i]
        if axiom is AxiomId.FMON:
            return after >= before if up else after <= before
        return after > before if up else after < before

    if axiom in (AxiomId.SYM, AxiomId.FSYM):
        a = rule(w.profile, w.j - 1)
        b = rule(w.profile, w.k - 1)
        if axiom is AxiomId.SYM:
            return a == b
        return (a >= theta) == (b >= theta)

    if axiom in (AxiomId.I, AxiomId.FI):
        a = rule(w.profile, w.j - 1)
        b = rule(w.other, w.j - 1)
        if axiom is AxiomId.I:
            return a == b
        return (a >= theta) == (b >= theta)

    p = w.profile
    f = fcif(p)
    if axiom is AxiomId.FC:
        return within_column_bounds(p, f)
    if axiom in (AxiomId.L, AxiomId.FL):
        diag = [p.rows[i][i] for i in range(p.n)]
        if axiom is AxiomId.L:
            return (ONE not in diag or ONE in f) and (ZERO not in diag or ZERO in f)
        return _fuzzy_clause(diag, f, theta, high=True) and _fuzzy_clause(diag, f, theta, high=False)
    entries = p.flat()
    if axiom is AxiomId.EL1:
        return ONE not in entries or ONE in f
    if axiom is AxiomId.EL2:
        return ZERO not in entries or ZERO in f
    if axiom is AxiomId.FEL1:
        return _fuzzy_clause(entries, f, theta, high=True)
    return _fuzzy_clause(entries, f, theta, high=False)


def _fuzzy_clause(trigger, f, theta, high: bool) -> bool:
    if high:
        return not any(v >= theta for v in trigger) or any(v >= theta for v in f)
    return not any(v < theta for v in trigger) or any(v < theta for v in f)


# ---------------------------------------------------------------------------
# Symmetrisation
# ---------------------------------------------------------------------------

def _sym_cells(n: int, j: int, k: int):
    """(source, dest) 0-based cell pairs for the four symmetry conditions."""
    pairs = []
    for i in range(n):
        if i in (j, k):
            continue
        pairs.append(((i, j), (i, k)))
        pairs.append(((j, i), (k, i)))
    pairs.append(((j, k), (k, j)))
    pairs.append(((j, j), (k, k)))
    return pairs


def _check_pair(profile: Profile, j: int, k: int) -> None:
    _check_index(j, profile.n)
    _check_index(k, profile.n)
    if j == k:
        raise FcifError("symmetry needs two distinct agents")


def is_symmetric_pair(profile: Profile, j: int, k: int) -> bool:
    _check_pair(profile, j, k)
    r = profile.rows
    return all(r[a][b] == r[c][d] for (a, b), (c, d) in _sym_cells(profile.n, j - 1, k - 1))


def is_fuzzy_symmetric_pair(profile: Profile, j: int, k: int, theta: Fraction = HALF) -> bool:
    _check_pair(profile, j, k)
    r = profile.rows
    return all((r[a][b] >= theta) == (r[c][d] >= theta) for (a, b), (c, d) in _sym_cells(profile.n, j - 1, k - 1))


def make_symmetric_pair(base: Profile, j: int, k: int) -> Profile:
    """Copy agent j's side onto agent k's so that j and k become symmetric."""
    _check_pair(base, j, k)
    rows = [list(r) for r in base.rows]
    for (a, b), (c, d) in _sym_cells(base.n, j - 1, k - 1):
        rows[c][d] = rows[a][b]
    return Profile._trusted(tuple(tuple(r) for r in rows))


def _nearest_in_bucket(target: Fraction, high: bool, theta: Fraction, step: Fraction) -> Fraction:
    target = min(max(target, ZERO), ONE)
    candidates = [g for g in grid_values(step) if (g >= theta) == high]
    return min(candidates, key=lambda g: (abs(g - target), g))


def make_fuzzy_symmetric_pair(base: Profile, j: int, k: int, theta: Fraction = HALF,
                              step: Fraction = RANDOM_GRID) -> Profile:
    """Repair bucket disagreements between j's side and k's side.

    An offending entry on k's side is reflected across ``theta`` and snapped
    to the nearest value of the ``step`` grid inside the required bucket.
    """
    _check_pair(base, j, k)
    rows = [list(r) for r in base.rows]
    for (a, b), (c, d) in _sym_cells(base.n, j - 1, k - 1):
        src, dst = rows[a][b], rows[c][d]
        want_high = src >= theta
        if (dst >= theta) != want_high:
            rows[c][d] = _nearest_in_bucket(2 * theta - dst, want_high, theta, step)
    return Profile._trusted(tuple(tuple(r) for r in rows))


# ---------------------------------------------------------------------------
# Search strategies and witness streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Exhaustive:
    step: Fraction = Fraction(1, 2)

    def __post_init__(self):
        grid_values(self.step)  # validates

    def to_json(self) -> dict:
        return {"mode": "exhaustive", "step": format_value(Fraction(self.step))}


@dataclass(frozen=True)
class Random:
    samples: int
    seed: int = 42

    def to_json(self) -> dict:
        return {"mode": "random", "samples": self.samples, "seed": self.seed}


SearchStrategy = Union[Exhaustive, Random]


def stream_length(n: int, strategy: SearchStrategy) -> int:
    """Number of base units (grid profiles or random samples) in a stream."""
    if isinstance(strategy, Exhaustive):
        return len(grid_values(strategy.step)) ** (n * n)
    return strategy.samples


def _grid_profiles(n: int, values: tuple, start: int, stop: int):
    for flat in itertools.islice(itertools.product(values, repeat=n * n), start, stop):
        yield flat, Profile.from_flat(n, flat)


def _pairs(n: int):
    return [(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1)]


def _exhaustive_witnesses(axiom, n, values, theta, start, stop):
    variant = REQUIRED_VARIANT[axiom]
    pairs = _pairs(n)
    high_floor = next((g for g in values if g >= theta), None)
    for flat, p in _grid_profiles(n, values, start, stop):
        if variant is SingleProfile:
            yield SingleProfile(p)
        elif variant is Perturbation:
            for c, cur in enumerate(flat):
                cell = (c // n + 1, c % n + 1)
                lower = [v for v in values if v < cur]
                higher = [v for v in values if v > cur]
                for direction, options in (("decrease", lower), ("increase", higher)):
                    for v in options:
                        q = Profile.from_flat(n, flat[:c] + (v,) + flat[c + 1:])
                        yield Perturbation(p, q, cell, direction)
        elif variant is SymmetricPair:
            # every symmetric grid profile is its own base: yield fixed points only
            test = is_symmetric_pair if axiom is AxiomId.SYM else (
                lambda prof, a, b: is_fuzzy_symmetric_pair(prof, a, b, theta))
            for j, k in pairs:
                if test(p, j, k):
                    yield SymmetricPair(p, j, k)
        else:
            # compare against the canonical-first profile of the same class
            low0 = values[0]
            for j in range(n):
                if axiom is AxiomId.I:
                    canon = lambda v: v  # noqa: E731
                else:
                    canon = lambda v: high_floor if v >= theta else low0  # noqa: E731
                rep = tuple(
                    tuple(canon(row[t]) if t == j else low0 for t in range(n)) for row in p.rows
                )
                if rep != p.rows:
                    yield ColumnPair(p, Profile._trusted(rep), j + 1)


def _rng(seed: int, index: int) -> random.Random:
    # one stream per sample keeps chunks independent of scan order
    return random.Random(f"{seed}:{index}")


def _draw(rng: random.Random, lo: int = 0, hi: int = 100) -> Fraction:
    return Fraction(rng.randint(lo, hi), 100)


def _random_profile(rng: random.Random, n: int) -> Profile:
    return Profile._trusted(tuple(tuple(_draw(rng) for _ in range(n)) for _ in range(n)))


def _random_witness(axiom, n, theta, rng):
    variant = REQUIRED_VARIANT[axiom]
    p = _random_profile(rng, n)
    if variant is SingleProfile:
        return SingleProfile(p)
    if variant is Perturbation:
        a, t = rng.randrange(n), rng.randrange(n)
        cur = p.rows[a][t]
        v = cur
        while v == cur:
            v = _draw(rng)
        q = p.replace(a + 1, t + 1, v)
        return Perturbation(p, q, (a + 1, t + 1), "increase" if v > cur else "decrease")
    if variant is SymmetricPair:
        if n < 2:
            return None
        j, k = rng.choice(_pairs(n))
        if axiom is AxiomId.SYM:
            return SymmetricPair(make_symmetric_pair(p, j, k), j, k)
        return SymmetricPair(make_fuzzy_symmetric_pair(p, j, k, theta), j, k)
    j = rng.randrange(n)
    # split point of the 1/100 grid: k/100 >= theta iff k >= cut
    cut = min(max(-(-theta.numerator * 100 // theta.denominator), 0), 101)
    rows = []
    for row in p.rows:
        new = []
        for t, v in enumerate(row):
            if t != j:
                new.append(_draw(rng))
            elif axiom is AxiomId.I:
                new.append(v)
            elif v >= theta:
                new.append(_draw(rng, cut, 100))
            else:
                new.append(_draw(rng, 0, cut - 1))
        rows.append(tuple(new))
    return ColumnPair(p, Profile._trusted(tuple(rows)), j + 1)


def witnesses(axiom: AxiomId, n: int, strategy: SearchStrategy, theta: Fraction = HALF,
              start: int = 0, stop: int | None = None) -> Iterator[Witness]:
    """Witness stream for ``axiom``; ``start``/``stop`` slice the base units."""
    axiom = AxiomId(axiom)
    if n < 1:
        raise FcifError("society size must be at least 1")
    total = stream_length(n, strategy)
    stop = total if stop is None else min(stop, total)
    if isinstance(strategy, Exhaustive):
        yield from _exhaustive_witnesses(axiom, n, grid_values(strategy.step), theta, start, stop)
        return
    for s in range(start, stop):
        w = _random_witness(axiom, n, theta, _rng(strategy.seed, s))
        if w is not None:
            yield w


def domain_profiles(domain: DomainClass, n: int, strategy: SearchStrategy, theta: Fraction = HALF,
                    start: int = 0, stop: int | None = None) -> Iterator[SingleProfile]:
    """Profiles of the stream that belong to ``domain``."""
    total = stream_length(n, strategy)
    stop = total if stop is None else min(stop, total)
    if isinstance(strategy, Exhaustive):
        profiles = (p for _, p in _grid_profiles(n, grid_values(strategy.step), start, stop))
    else:
        profiles = (_random_profile(_rng(strategy.seed, s), n) for s in range(start, stop))
    for p in profiles:
        if in_domain_class(p, domain, theta):
            yield SingleProfile(p)


# ---------------------------------------------------------------------------
# Verdicts and the search driver
# ---------------------------------------------------------------------------

FALSIFIED = "falsified"
NO_VIOLATION = "no_violation_found"


@dataclass
class CheckVerdict:
    fcif: Fcif
    check: str
    status: str
    checked: int
    n: int
    theta: Fraction
    strategy: SearchStrategy
    counterexample: Witness | None = None
    elapsed_ms: float = 0.0
    domain: DomainClass | None = None
    range: RangeClass | None = None
    axiom: AxiomId | None = field(default=None)

    @property
    def falsified(self) -> bool:
        return self.status == FALSIFIED

    def to_json(self, timing: bool = True) -> dict:
        doc = {"fcif": self.fcif.name}
        if self.axiom is not None:
            doc["axiom"] = self.axiom.value
        else:
            doc["domain"] = self.domain.value
            doc["range"] = self.range.value
        doc["status"] = self.status
        doc["checked"] = self.checked
        doc["n"] = self.n
        doc["theta"] = format_value(self.theta)
        doc.update(self.strategy.to_json())
        doc["counterexample"] = (
            self.counterexample.to_json(self.fcif) if self.counterexample is not None else None
        )
        if timing:
            doc["elapsed_ms"] = round(self.elapsed_ms, 3)
        return doc


@dataclass(frozen=True)
class _AxiomCheck:
    axiom: AxiomId

    def stream(self, n, strategy, theta, start, stop):
        return witnesses(self.axiom, n, strategy, theta, start, stop)

    def holds(self, fcif, w, theta):
        return axiom_holds(fcif, self.axiom, w, theta)


@dataclass(frozen=True)
class _ClassCheck:
    domain: DomainClass
    range: RangeClass

    def stream(self, n, strategy, theta, start, stop):
        return domain_profiles(self.domain, n, strategy, theta, start, stop)

    def holds(self, fcif, w, theta):
        return in_range_class(fcif(w.profile), self.range, theta)


def _scan(fcif, check, n, strategy, theta, start, stop):
    checked = 0
    for w in check.stream(n, strategy, theta, start, stop):
        checked += 1
        if not check.holds(fcif, w, theta):
            return checked, w
    return checked, None


def _chunks(total: int, jobs: int) -> list:
    parts = max(1, min(total, jobs * 4))
    size, extra = divmod(total, parts)
    bounds, lo = [], 0
    for k in range(parts):
        hi = lo + size + (1 if k < extra else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def _run(fcif, check, n, strategy, theta, jobs):
    total = stream_length(n, strategy)
    if jobs <= 1 or total < 2:
        return _scan(fcif, check, n, strategy, theta, 0, total)
    checked = 0
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_scan, fcif, check, n, strategy, theta, lo, hi)
                   for lo, hi in _chunks(total, jobs)]
        # merge in stream order; the first violating chunk decides
        for fut in futures:
            count, w = fut.result()
            checked += count
            if w is not None:
                for other in futures:
                    other.cancel()
                return checked, w
    return checked, None


def falsify(fcif: Fcif, axiom: AxiomId, n: int, strategy: SearchStrategy,
            theta: Fraction = HALF, jobs: int = 1) -> CheckVerdict:
    """Search for the first witness (in stream order) that violates ``axiom``."""
    axiom = AxiomId(axiom)
    t0 = time.perf_counter()
    checked, w = _run(fcif, _AxiomCheck(axiom), n, strategy, Fraction(theta), jobs)
    return CheckVerdict(
        fcif=fcif, check=axiom.value, status=FALSIFIED if w is not None else NO_VIOLATION,
        checked=checked, n=n, theta=Fraction(theta), strategy=strategy, counterexample=w,
        elapsed_ms=(time.perf_counter() - t0) * 1000, axiom=axiom,
    )


def check_axiom_suite(fcif: Fcif, axioms, n: int, strategy: SearchStrategy,
                      theta: Fraction = HALF, jobs: int = 1) -> list[CheckVerdict]:
    return [falsify(fcif, a, n, strategy, theta, jobs) for a in axioms]


def classify(fcif: Fcif, domain: DomainClass, range_: RangeClass, n: int, strategy: SearchStrategy,
             theta: Fraction = HALF, jobs: int = 1) -> CheckVerdict:
    """Does ``fcif`` send every profile of ``domain`` into ``range_``?"""
    t0 = time.perf_counter()
    checked, w = _run(fcif, _ClassCheck(domain, range_), n, strategy, Fraction(theta), jobs)
    return CheckVerdict(
        fcif=fcif, check=f"{domain.value} -> {range_.value}",
        status=FALSIFIED if w is not None else NO_VIOLATION, checked=checked, n=n,
        theta=Fraction(theta), strategy=strategy, counterexample=w,
        elapsed_ms=(time.perf_counter() - t0) * 1000, domain=domain, range=range_,
    )


def certify(verdict: CheckVerdict) -> bool:
    """Re-evaluate a falsified verdict's witness; True when it is a genuine violation."""
    w = verdict.counterexample
    if w is None:
        return False
    if verdict.axiom is not None:
        return not axiom_holds(verdict.fcif, verdict.axiom, w, verdict.theta)
    return in_domain_class(w.profile, verdict.domain, verdict.theta) and not in_range_class(
        verdict.fcif(w.profile), verdict.range, verdict.theta)


def membership_json(m: MembershipFunction) -> dict:
    return {"values": _vals(m)}
