"""Built-in fuzzy collective identity functions and the name registry."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .core import (
    HALF,
    FcifError,
    MembershipFunction,
    Profile,
    _check_index,
    column_stats,
    parse_value,
)


class UnknownFcif(FcifError, KeyError):
    pass


class MissingParameter(FcifError, TypeError):
    pass


class UnexpectedParameter(FcifError, TypeError):
    pass


@dataclass(frozen=True)
class Fcif:
    """A named aggregation rule.

    ``rule(profile, i)`` returns the membership degree of agent ``i``
    (0-based); evaluating one target at a time keeps axiom searches cheap.
    """

    name: str
    rule: Callable[[Profile, int], Fraction] = field(repr=False, compare=False)
    params: tuple = ()

    def __call__(self, profile: Profile) -> MembershipFunction:
        return MembershipFunction._trusted(self.rule(profile, i) for i in range(profile.n))

    def at(self, profile: Profile, i: int) -> Fraction:
        """Membership degree of agent ``i`` (1-based)."""
        _check_index(i, profile.n)
        return self.rule(profile, i - 1)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        return self.name + "(" + ", ".join(f"{k}={v}" for k, v in self.params) + ")"


def _liberal(profile: Profile, i: int) -> Fraction:
    return profile.rows[i][i]


def _unanimity(profile: Profile, i: int) -> Fraction:
    return min(row[i] for row in profile.rows)


def _inclusive(profile: Profile, i: int) -> Fraction:
    return max(row[i] for row in profile.rows)


def _democratic(profile: Profile, i: int) -> Fraction:
    return sum((row[i] for row in profile.rows), Fraction(0)) / profile.n


def _dictatorial(profile: Profile, i: int, d: int) -> Fraction:
    if d > profile.n:
        raise FcifError(f"dictator {d} does not exist in a society of {profile.n}")
    return profile.rows[d - 1][i]


def _witness(profile: Profile, i: int, theta: Fraction) -> Fraction:
    col = [row[i] for row in profile.rows]
    n = len(col)
    mn, mx, high, low = column_stats(col, theta)
    # first matching branch wins, in this order
    if high == n:
        return (mn + mx) / 2
    if high > low:
        return (theta + mx) / 2
    if mn == mx:
        return mn
    if high == low:
        return theta
    if low > high:
        return (theta + mn) / 2
    return (mn + mx) / 2  # low == n; unreachable after the branch above


def eval_liberal(profile: Profile) -> MembershipFunction:
    return LIBERAL(profile)


def eval_unanimity(profile: Profile) -> MembershipFunction:
    return UNANIMITY(profile)


def eval_inclusive(profile: Profile) -> MembershipFunction:
    return INCLUSIVE(profile)


def eval_democratic(profile: Profile) -> MembershipFunction:
    return DEMOCRATIC(profile)


def eval_dictatorial(profile: Profile, d: int) -> MembershipFunction:
    """Copy agent ``d``'s opinion row (``d`` is 1-based)."""
    _check_index(d, profile.n)
    return dictatorial(d)(profile)


def eval_witness(profile: Profile, theta: Fraction = HALF) -> MembershipFunction:
    return witness(theta)(profile)


LIBERAL = Fcif("liberal", _liberal)
UNANIMITY = Fcif("unanimity", _unanimity)
INCLUSIVE = Fcif("inclusive", _inclusive)
DEMOCRATIC = Fcif("democratic", _democratic)


def dictatorial(d: int) -> Fcif:
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise FcifError(f"dictator index must be a positive integer, got {d!r}")
    return Fcif(f"dictatorial:{d}", functools.partial(_dictatorial, d=d), (("d", d),))


def witness(theta: Fraction = HALF) -> Fcif:
    theta = Fraction(theta)
    params = () if theta == HALF else (("theta", theta),)
    return Fcif("witness", functools.partial(_witness, theta=theta), params)


BUILTIN_NAMES = ("liberal", "unanimity", "inclusive", "dictatorial", "democratic", "witness")

# name -> Fcif for rules parsed from the DSL (see fuzzyid.dsl.register)
_DSL_REGISTRY: dict[str, Fcif] = {}


def register(fcif: Fcif, name: str | None = None) -> None:
    _DSL_REGISTRY[name or fcif.name] = fcif


def registered_names() -> list[str]:
    return sorted(_DSL_REGISTRY)


def make_fcif(name: str, theta: Fraction | None = None, **params) -> Fcif:
    """Build a rule from its registry name.

    Accepts the plain names (``liberal``, ``witness``, ...), the compact
    ``dictatorial:<d>`` form, ``dsl:<path>`` and ``dsl-name:<identifier>``.
    ``theta`` is consumed by rules that read the threshold (witness and DSL
    rules) and ignored by the others.
    """
    if name.startswith("dictatorial:"):
        if params:
            raise UnexpectedParameter(f"{name} takes no extra parameters")
        try:
            d = int(name.split(":", 1)[1])
        except ValueError:
            raise UnknownFcif(name) from None
        return dictatorial(d)
    if name.startswith("dsl:") or name.startswith("dsl-name:"):
        from . import dsl

        if params:
            raise UnexpectedParameter(f"{name} takes no extra parameters")
        return dsl.resolve(name, HALF if theta is None else theta)
    if name == "dictatorial":
        if "d" not in params:
            raise MissingParameter("dictatorial requires the dictator index d")
        extra = set(params) - {"d"}
        if extra:
            raise UnexpectedParameter(f"dictatorial got unexpected {sorted(extra)}")
        return dictatorial(int(params["d"]))
    if name == "witness":
        extra = set(params) - {"theta"}
        if extra:
            raise UnexpectedParameter(f"witness got unexpected {sorted(extra)}")
        th = params.get("theta", theta)
        if isinstance(th, str):
            th = parse_value(th)
        return witness(HALF if th is None else th)
    fixed = {"liberal": LIBERAL, "unanimity": UNANIMITY, "inclusive": INCLUSIVE, "democratic": DEMOCRATIC}
    if name in fixed:
        if params:
            raise UnexpectedParameter(f"{name} takes no parameters, got {sorted(params)}")
        return fixed[name]
    if name in _DSL_REGISTRY:
        return _DSL_REGISTRY[name]
    raise UnknownFcif(f"unknown FCIF {name!r}")
