import itertools
import json
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maltkit.analysis import canonical_transversal
from maltkit.closure import compute_closure
from maltkit.errors import BudgetError, DomainError
from maltkit.factory import (FiniteAlgebra, algebra_from_json,
                             algebra_to_json, build_dispatch, draw_values,
                             enumerate_models, extract_mfamily, mix,
                             orbit_index, patterns_of_arity, realize,
                             sample_mfamily, validate_model)
from maltkit.library import builtin_system


@pytest.fixture(scope="module")
def maltsev_setup(maltsev_spec):
    clo = compute_closure(maltsev_spec)
    trans = canonical_transversal(clo)
    dispatch = build_dispatch(clo, trans, maltsev_spec.signature)
    return maltsev_spec, clo, trans, dispatch


@pytest.fixture(scope="module")
def cmaltsev_setup(cmaltsev_spec):
    clo = compute_closure(cmaltsev_spec)
    trans = canonical_transversal(clo)
    dispatch = build_dispatch(clo, trans, cmaltsev_spec.signature)
    return cmaltsev_spec, clo, trans, dispatch


# ---------------------------------------------------------------------------
# patterns and dispatch


def test_patterns_of_arity():
    assert patterns_of_arity(1) == [(0,)]
    assert patterns_of_arity(2) == [(0, 0), (0, 1)]
    assert len(patterns_of_arity(3)) == 5   # Bell number B_3
    assert len(patterns_of_arity(4)) == 15  # B_4


def test_maltsev_dispatch_golden(maltsev_setup):
    _, _, _, dispatch = maltsev_setup
    rules = dispatch.rules[0]
    assert rules[(0, 0, 1)] == (0, (3,))      # f(x,x,y) = y -> variable entry
    assert rules[(0, 1, 1)] == (0, (1,))      # f(x,y,y) = x
    assert rules[(0, 1, 0)] == (1, (1, 2))    # f(x,y,x) -> binary entry
    assert rules[(0, 1, 2)] == (2, (1, 2, 3)) # generic -> ternary entry
    assert rules[(0, 0, 0)] == (0, (1,))      # idempotence


def test_dispatch_covers_all_patterns(cmaltsev_setup):
    spec, _, _, dispatch = cmaltsev_setup
    for sym in range(len(spec.signature)):
        pats = {tuple(p) for p in patterns_of_arity(spec.signature.arity(sym))}
        assert set(dispatch.rules[sym]) == pats


def test_dispatch_order_invariance(maltsev_setup, cmaltsev_setup):
    """The realized algebra does not depend on the order in which the
    dispatch search tries injective assignments."""
    for spec, clo, trans, dispatch in (maltsev_setup, cmaltsev_setup):
        fam = sample_mfamily(trans, 5, mix(123, 0))
        baseline = realize(dispatch, fam)
        for trial in range(100):
            rng = random.Random(trial)
            shuffled = build_dispatch(clo, trans, spec.signature, order_rng=rng)
            assert realize(shuffled, fam) == baseline


# ---------------------------------------------------------------------------
# RNG contract


def test_mix_is_splitmix64_step():
    # fixed vectors pin the mixing function forever
    assert mix(0, 1) == 16294208416658607535
    assert mix(42, 7) == 4028864712777624925
    assert mix(42, 7) == mix(42, 7)
    assert mix(42, 7) != mix(42, 8)
    assert 0 <= mix(2 ** 64 - 1, 2 ** 32) < 2 ** 64


def test_draw_values_deterministic():
    a = draw_values(987, 8, 100)
    b = draw_values(987, 8, 100)
    assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < 8


# ---------------------------------------------------------------------------
# sampling, realization, bijection


def test_realized_models_validate(maltsev_setup):
    spec, _, trans, dispatch = maltsev_setup
    for i in range(20):
        fam = sample_mfamily(trans, 6, mix(5, i))
        alg = realize(dispatch, fam)
        ok, witness = validate_model(spec, alg)
        assert ok, witness


def test_realized_models_idempotent(cmaltsev_setup):
    spec, _, trans, dispatch = cmaltsev_setup
    for i in range(10):
        alg = realize(dispatch, sample_mfamily(trans, 5, mix(11, i)))
        for a in range(alg.n):
            assert alg.value(0, (a, a, a)) == a


@given(st.integers(0, 10 ** 6), st.integers(2, 8))
@settings(max_examples=50, deadline=None)
def test_bijection_round_trip(seed, n):
    spec = builtin_system("maltsev")
    clo = compute_closure(spec)
    trans = canonical_transversal(clo)
    dispatch = build_dispatch(clo, trans, spec.signature)
    fam = sample_mfamily(trans, n, seed)
    alg = realize(dispatch, fam)
    assert extract_mfamily(trans, alg, spec=spec) == fam
    assert realize(dispatch, extract_mfamily(trans, alg)) == alg


def test_enumerate_backends_agree():
    for name in ("maltsev", "commutative-maltsev"):
        spec = builtin_system(name)
        fam = {algebra_to_json(a) for a in enumerate_models(spec, 2)}
        brute = {algebra_to_json(a) for a in enumerate_models(spec, 2, backend="brute")}
        assert fam == brute
        assert len(fam) == 4


def test_enumerate_n3_counts(maltsev_spec):
    from maltkit.params import model_count, parameters
    clo = compute_closure(maltsev_spec)
    pars = parameters(canonical_transversal(clo))
    models = list(enumerate_models(maltsev_spec, 3))
    assert len(models) == model_count(pars, 3)
    for alg in models[:50]:
        assert validate_model(maltsev_spec, alg)[0]


def test_enumerate_budget():
    spec = builtin_system("maltsev")
    with pytest.raises(BudgetError):
        list(enumerate_models(spec, 50))


def test_extract_rejects_non_model(maltsev_spec):
    clo = compute_closure(maltsev_spec)
    trans = canonical_transversal(clo)
    # the first projection is not a Maltsev operation
    table = tuple(a for a in range(2) for _ in range(4))
    alg = FiniteAlgebra(2, maltsev_spec.signature, (table,))
    assert not validate_model(maltsev_spec, alg)[0]
    with pytest.raises(DomainError):
        extract_mfamily(trans, alg, spec=maltsev_spec)


# ---------------------------------------------------------------------------
# orbit index


def test_orbit_index_counts(maltsev_setup, cmaltsev_setup):
    # total independent values = p(n) from the parameters
    from maltkit.params import p_of_k, parameters
    for setup in (maltsev_setup, cmaltsev_setup):
        _, _, trans, _ = setup
        pars = parameters(trans)
        for n in (2, 3, 5, 8):
            oi = orbit_index(trans, n)
            assert oi.total == p_of_k(pars, n)


def test_orbit_index_canonical_constant_on_orbits(cmaltsev_setup):
    _, _, trans, _ = cmaltsev_setup
    oi = orbit_index(trans, 4)
    # ternary entry of the commutative Maltsev example has the (1 3) swap
    entry = next(i for i, e in enumerate(trans.entries) if e.d == 3)
    g = trans.entries[entry].group
    for u in itertools.permutations(range(4), 3):
        keys = {oi.canonical(entry, tuple(u[p - 1] for p in perm))
                for perm in g.elements}
        assert len(keys) == 1


# ---------------------------------------------------------------------------
# JSON format


def test_algebra_json_round_trip(maltsev_setup):
    _, _, trans, dispatch = maltsev_setup
    alg = realize(dispatch, sample_mfamily(trans, 4, mix(3, 3)))
    text = algebra_to_json(alg)
    doc = json.loads(text)
    assert doc["n"] == 4
    assert list(doc["operations"]) == ["f"]
    assert doc["operations"]["f"]["arity"] == 3
    assert len(doc["operations"]["f"]["table"]) == 64
    assert algebra_from_json(text) == alg


def test_algebra_json_row_major(maltsev_setup):
    _, _, trans, dispatch = maltsev_setup
    alg = realize(dispatch, sample_mfamily(trans, 3, mix(4, 0)))
    doc = json.loads(algebra_to_json(alg))
    table = doc["operations"]["f"]["table"]
    for args in itertools.product(range(3), repeat=3):
        idx = args[0] * 9 + args[1] * 3 + args[2]
        assert table[idx] == alg.value(0, args)


def test_algebra_json_rejects_bad_table():
    with pytest.raises(DomainError):
        algebra_from_json('{"n": 2, "operations": {"f": {"arity": 3, "table": [0, 1]}}}')
    with pytest.raises(DomainError):
        algebra_from_json(
            '{"n": 2, "operations": {"f": {"arity": 1, "table": [0, 5]}}}')
