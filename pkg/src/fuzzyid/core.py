"""Exact values, opinion profiles, membership functions and class predicates.

Every opinion and membership degree is a :class:`fractions.Fraction` in
``[0, 1]``.  Agents are numbered ``1..n`` in every public function; internal
helpers prefixed with an underscore use 0-based indices.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

Value = Fraction

HALF = Fraction(1, 2)
ZERO = Fraction(0)
ONE = Fraction(1)

_DECIMAL_RE = re.compile(r"^\d(?:\.(\d{1,9}))?$")
_FRACTION_RE = re.compile(r"^(\d+)/(\d+)$")


class FcifError(Exception):
    """Base class for every error raised by this package."""


class MalformedNumber(FcifError, ValueError):
    pass


class OutOfUnitInterval(FcifError, ValueError):
    pass


class IndexOutOfRange(FcifError, IndexError):
    pass


class EmptyVector(FcifError, ValueError):
    pass


class MalformedProfile(FcifError, ValueError):
    pass


def parse_value(text: str) -> Fraction:
    """Parse ``d.ddd`` (at most nine fraction digits) or ``a/b`` exactly.

    >>> parse_value("0.35")
    Fraction(7, 20)
    """
    text = text.strip()
    m = _DECIMAL_RE.match(text)
    if m:
        v = Fraction(text)
    else:
        m = _FRACTION_RE.match(text)
        if not m:
            raise MalformedNumber(f"not a decimal or fraction: {text!r}")
        den = int(m.group(2))
        if den == 0:
            raise MalformedNumber(f"zero denominator: {text!r}")
        v = Fraction(int(m.group(1)), den)
    if not 0 <= v <= 1:
        raise OutOfUnitInterval(f"{text!r} is outside [0, 1]")
    return v


def format_value(v: Fraction) -> str:
    """Shortest exact text for ``v``: a decimal when one with <= 9 digits exists."""
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    scaled = v * 10**9
    if scaled.denominator == 1:
        sign = "-" if v < 0 else ""
        whole, frac = divmod(abs(scaled.numerator), 10**9)
        return f"{sign}{whole}.{frac:09d}".rstrip("0")
    return f"{v.numerator}/{v.denominator}"


def as_value(x) -> Fraction:
    """Coerce str/int/Fraction to a checked Value.  Floats are rejected."""
    if isinstance(x, str):
        return parse_value(x)
    if isinstance(x, bool) or isinstance(x, float):
        raise MalformedNumber(f"refusing inexact value {x!r}; pass a string or Fraction")
    if isinstance(x, (int, Fraction)):
        v = Fraction(x)
        if not 0 <= v <= 1:
            raise OutOfUnitInterval(f"{x!r} is outside [0, 1]")
        return v
    raise MalformedNumber(f"cannot interpret {x!r} as a value")


class Bucket(enum.Enum):
    HIGH = "High"
    LOW = "Low"


def bucket_of(v: Fraction, theta: Fraction = HALF) -> Bucket:
    return Bucket.HIGH if v >= theta else Bucket.LOW


class Profile:
    """An ``n x n`` opinion matrix; ``rows[i][j]`` is agent i's opinion of agent j."""

    __slots__ = ("rows", "n", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(as_value(x) for x in row) for row in rows)
        n = len(rows)
        if n == 0:
            raise MalformedProfile("a profile needs at least one agent")
        for k, row in enumerate(rows, 1):
            if len(row) != n:
                raise MalformedProfile(f"row {k} has {len(row)} entries, expected {n}")
        self.rows = rows
        self.n = n
        self._hash = None

    @classmethod
    def _trusted(cls, rows: tuple) -> "Profile":
        # rows must already be a square tuple of tuples of in-range Fractions
        p = object.__new__(cls)
        p.rows = rows
        p.n = len(rows)
        p._hash = None
        return p

    @classmethod
    def from_flat(cls, n: int, cells: Sequence[Fraction]) -> "Profile":
        return cls._trusted(tuple(tuple(cells[r * n:(r + 1) * n]) for r in range(n)))

    def p(self, agent: int, target: int) -> Fraction:
        """Opinion of ``agent`` about ``target`` (both 1-based)."""
        _check_index(agent, self.n)
        _check_index(target, self.n)
        return self.rows[agent - 1][target - 1]

    def flat(self) -> tuple:
        return tuple(v for row in self.rows for v in row)

    def replace(self, agent: int, target: int, value: Fraction) -> "Profile":
        rows = [list(r) for r in self.rows]
        rows[agent - 1][target - 1] = as_value(value)
        return Profile._trusted(tuple(tuple(r) for r in rows))

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.rows)
        return self._hash

    def __repr__(self):
        body = ", ".join("(" + ", ".join(format_value(v) for v in r) + ")" for r in self.rows)
        return f"Profile(({body}))"

    def to_json(self, theta: Fraction | None = None) -> dict:
        doc = {"n": self.n, "rows": [[format_value(v) for v in r] for r in self.rows]}
        if theta is not None:
            doc["theta"] = format_value(theta)
        return doc


class MembershipFunction(tuple):
    """Aggregate membership degrees; entry ``i-1`` is the degree of agent i."""

    def __new__(cls, values: Iterable = ()):
        return super().__new__(cls, (as_value(v) for v in values))

    @classmethod
    def _trusted(cls, values) -> "MembershipFunction":
        return tuple.__new__(cls, values)

    def __repr__(self):
        return "MembershipFunction((" + ", ".join(format_value(v) for v in self) + "))"

    def to_json(self) -> dict:
        return {"values": [format_value(v) for v in self]}


def _check_index(i: int, n: int) -> None:
    if not isinstance(i, int) or not 1 <= i <= n:
        raise IndexOutOfRange(f"agent index {i!r} outside 1..{n}")


def column(profile: Profile, i: int) -> tuple:
    """Every agent's opinion about agent ``i``: ``(p_1(i), ..., p_n(i))``."""
    _check_index(i, profile.n)
    return tuple(row[i - 1] for row in profile.rows)


def column_stats(values: Sequence[Fraction], theta: Fraction = HALF):
    """Return ``(min, max, count_high, count_low)``; High means ``v >= theta``."""
    if not values:
        raise EmptyVector("column_stats needs at least one value")
    high = sum(1 for v in values if v >= theta)
    return min(values), max(values), high, len(values) - high


def within_column_bounds(profile: Profile, output: Sequence[Fraction]) -> bool:
    """The k-dimensional mean condition, checked for every column."""
    for i in range(profile.n):
        col = [row[i] for row in profile.rows]
        if not min(col) <= output[i] <= max(col):
            return False
    return True


class DomainClass(enum.Enum):
    ALL = "all"
    PSTAR = "P*"
    PSTARSTAR = "P**"
    PSTARSTARSTAR = "P***"


class RangeClass(enum.Enum):
    ALL = "all"
    FSTAR = "F*"
    FSTARSTAR = "F**"
    FSTARSTARSTAR = "F***"


# F** and P** are read with two separate witnesses: one entry >= theta and
# another (possibly different) entry <= theta.
FSTARSTAR_READING = (
    "F** read as: some entry >= theta and some (possibly different) entry <= theta"
)


def _vector_in_class(vec: Sequence[Fraction], level: int, theta: Fraction) -> bool:
    if level == 0:
        return True
    if level == 1:
        return ONE in vec and ZERO in vec
    if level == 2:
        return any(v >= theta for v in vec) and any(v <= theta for v in vec)
    return any(v != ONE for v in vec) and any(v != ZERO for v in vec)


_LEVEL = {
    DomainClass.ALL: 0, DomainClass.PSTAR: 1, DomainClass.PSTARSTAR: 2, DomainClass.PSTARSTARSTAR: 3,
    RangeClass.ALL: 0, RangeClass.FSTAR: 1, RangeClass.FSTARSTAR: 2, RangeClass.FSTARSTARSTAR: 3,
}


def in_domain_class(profile: Profile, c: DomainClass, theta: Fraction = HALF) -> bool:
    level = _LEVEL[c]
    return all(_vector_in_class(row, level, theta) for row in profile.rows)


def in_range_class(m: Sequence[Fraction], c: RangeClass, theta: Fraction = HALF) -> bool:
    return _vector_in_class(m, _LEVEL[c], theta)


def parse_domain_class(text: str) -> DomainClass:
    aliases = {"pstar": "P*", "pstarstar": "P**", "pstarstarstar": "P***"}
    text = aliases.get(text.lower(), text)
    try:
        return DomainClass(text if text != "ALL" else "all")
    except ValueError:
        raise FcifError(f"unknown domain class {text!r}; use P*, P**, P*** or all") from None


def parse_range_class(text: str) -> RangeClass:
    aliases = {"fstar": "F*", "fstarstar": "F**", "fstarstarstar": "F***"}
    text = aliases.get(text.lower(), text)
    try:
        return RangeClass(text if text != "ALL" else "all")
    except ValueError:
        raise FcifError(f"unknown range class {text!r}; use F*, F**, F*** or all") from None


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def profile_from_json(doc: dict) -> tuple[Profile, Fraction | None]:
    """Decode ``{"n": .., "theta": .., "rows": [[...]]}``; returns (profile, theta)."""
    try:
        rows = doc["rows"]
    except (KeyError, TypeError):
        raise MalformedProfile("profile JSON needs a 'rows' array") from None
    for row in rows:
        for x in row:
            if not isinstance(x, str):
                raise MalformedProfile(f"profile values must be strings, got {x!r}")
    profile = Profile(rows)
    if "n" in doc and doc["n"] != profile.n:
        raise MalformedProfile(f"declared n={doc['n']} but rows give n={profile.n}")
    theta = parse_value(doc["theta"]) if doc.get("theta") is not None else None
    return profile, theta


def profile_from_csv(text: str) -> Profile:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    return Profile([[c.strip() for c in r] for r in rows])


def load_profile(path: str | Path) -> tuple[Profile, Fraction | None]:
    """Read a profile file; ``.csv`` files are CSV, anything else JSON."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return profile_from_csv(text), None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedProfile(f"{path}: invalid JSON ({exc})") from None
    return profile_from_json(doc)


def membership_from_json(doc: dict) -> MembershipFunction:
    return MembershipFunction(doc["values"])


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def grid_values(step: Fraction) -> tuple:
    """``(0, step, 2*step, ..., 1)``; ``step`` must be a unit fraction ``1/m``."""
    step = Fraction(step)
    if step <= 0 or step > 1 or step.numerator != 1:
        raise FcifError(f"grid step must be a unit fraction 1/m, got {step}")
    m = step.denominator
    return tuple(Fraction(k, m) for k in range(m + 1))


def fixture_path(name: str) -> Path:
    """Path of a bundled profile fixture (``example1`` .. ``example6``, ``p1`` .. ``p11``)."""
    from importlib import resources

    path = Path(str(resources.files("fuzzyid").joinpath("fixtures", f"{name}.json")))
    if not path.exists():
        raise FcifError(f"no bundled fixture named {name!r}")
    return path


def load_fixture(name: str) -> Profile:
    return load_profile(fixture_path(name))[0]
