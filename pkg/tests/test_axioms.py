from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from fuzzyid.aggregators import DEMOCRATIC, INCLUSIVE, LIBERAL, UNANIMITY, dictatorial, witness
from fuzzyid.axioms import (
    AxiomId,
    ColumnPair,
    Exhaustive,
    Perturbation,
    Random,
    SingleProfile,
    SymmetricPair,
    WitnessShapeMismatch,
    axiom_holds,
    certify,
    classify,
    falsify,
    is_fuzzy_symmetric_pair,
    is_symmetric_pair,
    make_fuzzy_symmetric_pair,
    make_symmetric_pair,
    parse_axioms,
    stream_length,
    witnesses,
)
from fuzzyid.core import DomainClass, FcifError, Profile, RangeClass, load_fixture

from conftest import profiles

HALF_STEP = Exhaustive(F(1, 2))
QUARTER = Exhaustive(F(1, 4))


def P(*rows):
    return Profile([[str(x) for x in r] for r in rows])


def test_parse_axioms():
    assert parse_axioms("fmon, FC") == [AxiomId.FMON, AxiomId.FC]
    assert len(parse_axioms("all")) == 13
    with pytest.raises(FcifError):
        parse_axioms("FMON,XYZ")


def test_witness_shape_mismatch():
    with pytest.raises(WitnessShapeMismatch):
        axiom_holds(LIBERAL, AxiomId.FI, SingleProfile(load_fixture("example1")))


def test_example1_fsym_violation():
    p = load_fixture("example1")
    assert is_fuzzy_symmetric_pair(p, 1, 2)
    assert not is_symmetric_pair(p, 1, 2)
    # democratic gives 0.35 (Low) and 0.65 (High)
    assert not axiom_holds(DEMOCRATIC, AxiomId.FSYM, SymmetricPair(p, 1, 2))


def test_example2_fi_violation():
    w = ColumnPair(load_fixture("example2"), load_fixture("example2_prime"), 1)
    assert not axiom_holds(DEMOCRATIC, AxiomId.FI, w)
    assert axiom_holds(LIBERAL, AxiomId.FI, w)


def test_fmon_direction():
    p = P(["0.2", "0"], ["0.2", "0"])
    up = Perturbation(p, p.replace(2, 1, "0.6"), (2, 1), "increase")
    assert axiom_holds(DEMOCRATIC, AxiomId.FMON, up)
    assert axiom_holds(DEMOCRATIC, AxiomId.FSMON, up)
    assert axiom_holds(LIBERAL, AxiomId.FMON, up)
    assert not axiom_holds(LIBERAL, AxiomId.FSMON, up)  # f(1) = p_1(1) does not move


def test_symmetrisation():
    base = load_fixture("example5")
    q = make_symmetric_pair(base, 1, 3)
    assert is_symmetric_pair(q, 1, 3)
    r = make_fuzzy_symmetric_pair(base, 2, 3)
    assert is_fuzzy_symmetric_pair(r, 2, 3)
    assert all(v.denominator in (1, 2, 4, 5, 10, 20, 25, 50, 100) for v in r.flat())
    with pytest.raises(FcifError):
        make_symmetric_pair(base, 2, 2)


def test_stream_lengths():
    assert stream_length(2, QUARTER) == 625
    assert stream_length(3, HALF_STEP) == 19683
    assert stream_length(3, Random(17)) == 17


def test_exhaustive_order_is_row_major():
    first = [w.profile.flat() for w in witnesses(AxiomId.FC, 2, HALF_STEP, stop=3)]
    half = F(1, 2)
    assert first == [(0, 0, 0, 0), (0, 0, 0, half), (0, 0, 0, 1)]


def test_random_stream_reproducible():
    a = [w.profile for w in witnesses(AxiomId.FMON, 3, Random(50, seed=7))]
    b = [w.profile for w in witnesses(AxiomId.FMON, 3, Random(50, seed=7))]
    c = [w.profile for w in witnesses(AxiomId.FMON, 3, Random(50, seed=8))]
    assert a == b and a != c


@pytest.mark.parametrize("axiom", ["FMON", "FC", "FI", "FL", "I", "L", "SYM", "FSYM"])
def test_liberal_possibility(axiom):
    v = falsify(LIBERAL, AxiomId(axiom), 2, QUARTER)
    assert not v.falsified and v.checked > 0


def test_liberal_fsmon_first_witness():
    v = falsify(LIBERAL, AxiomId.FSMON, 2, HALF_STEP)
    assert v.falsified and certify(v)
    w = v.counterexample
    # raising p_1(2) from 0 to 1/2 leaves f(2) = p_2(2) unchanged
    assert w.profile == P([0, 0], [0, 0])
    assert w.cell == (1, 2) and w.direction == "increase"
    assert w.perturbed == P([0, "0.5"], [0, 0])


def test_democratic_fi_first_witness():
    v = falsify(DEMOCRATIC, AxiomId.FI, 2, QUARTER)
    w = v.counterexample
    assert w.profile == P([0, 0], [0, 1]) and w.other == P([0, 0], [0, "0.5"]) and w.j == 2
    assert (DEMOCRATIC.at(w.profile, 2), DEMOCRATIC.at(w.other, 2)) == (F(1, 2), F(1, 4))


@pytest.mark.parametrize("fcif, passes, fails", [
    (INCLUSIVE, ["FMON", "FC", "FI", "EL1", "FEL1"], ["EL2", "FEL2"]),
    (UNANIMITY, ["FMON", "FC", "FI", "EL2", "FEL2"], ["EL1", "FEL1"]),
])
def test_extreme_rules(fcif, passes, fails):
    for a in passes:
        assert not falsify(fcif, AxiomId(a), 2, HALF_STEP).falsified, a
    for a in fails:
        v = falsify(fcif, AxiomId(a), 2, HALF_STEP)
        assert v.falsified and certify(v), a


def test_witness_fc_on_coarse_and_fine_grids():
    w = witness()
    assert not falsify(w, AxiomId.FC, 2, HALF_STEP).falsified
    assert not falsify(w, AxiomId.FC, 2, QUARTER).falsified
    # an all-Low column with distinct entries takes the (theta + min)/2 branch,
    # which can exceed the column maximum
    v = falsify(w, AxiomId.FC, 2, Exhaustive(F(1, 10)))
    assert v.falsified and certify(v)
    assert v.counterexample.profile == P([0, 0], [0, "0.1"])
    assert w(v.counterexample.profile) == (0, F(1, 4))


def test_classification():
    assert not classify(witness(), DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTARSTAR, 3, HALF_STEP).falsified
    assert not classify(dictatorial(1), DomainClass.PSTAR, RangeClass.FSTAR, 2, HALF_STEP).falsified
    v = classify(UNANIMITY, DomainClass.PSTARSTARSTAR, RangeClass.FSTARSTARSTAR, 3, HALF_STEP)
    assert v.falsified and certify(v)
    assert v.checked == 3


def test_jobs_do_not_change_verdicts():
    for fcif, axiom in [(DEMOCRATIC, AxiomId.FI), (LIBERAL, AxiomId.FMON), (witness(), AxiomId.FC)]:
        a = falsify(fcif, axiom, 2, QUARTER, jobs=1)
        b = falsify(fcif, axiom, 2, QUARTER, jobs=3)
        assert a.to_json(timing=False) == b.to_json(timing=False)
    r1 = falsify(DEMOCRATIC, AxiomId.FI, 3, Random(2000, 42), jobs=1)
    r2 = falsify(DEMOCRATIC, AxiomId.FI, 3, Random(2000, 42), jobs=4)
    assert r1.to_json(timing=False) == r2.to_json(timing=False)


def test_verdict_json_shape():
    doc = falsify(LIBERAL, AxiomId.FSMON, 2, HALF_STEP).to_json()
    assert doc["status"] == "falsified" and doc["mode"] == "exhaustive" and doc["step"] == "0.5"
    assert doc["counterexample"]["kind"] == "perturbation"
    assert doc["counterexample"]["outputs"]["perturbed"] == ["0", "0"]


@settings(max_examples=200)
@given(profiles(sizes=(2, 3)), st.data())
def test_fmon_violation_implies_fsmon_violation(p, data):
    n = p.n
    a, t = data.draw(st.integers(1, n)), data.draw(st.integers(1, n))
    v = data.draw(st.integers(0, 100).map(lambda k: F(k, 100)).filter(lambda x: x != p.p(a, t)))
    w = Perturbation(p, p.replace(a, t, v), (a, t), "increase" if v > p.p(a, t) else "decrease")
    for f in (LIBERAL, UNANIMITY, INCLUSIVE, DEMOCRATIC, witness()):
        if not axiom_holds(f, AxiomId.FMON, w):
            assert not axiom_holds(f, AxiomId.FSMON, w)
