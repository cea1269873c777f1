import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maltkit.analysis import canonical_transversal
from maltkit.checkers import (_any_cross_np, _minority_values, _tabs,
                              automorphisms, cross_compatible, cross_relation,
                              generated_subuniverse,
                              has_minority_two_subalgebra,
                              has_nontrivial_automorphism,
                              has_proper_subalgebra_size_gt1, is_compatible_relation,
                              is_idemprimal, is_subuniverse, subalgebras_of_size)
from maltkit.closure import compute_closure
from maltkit.errors import DomainError
from maltkit.factory import (FiniteAlgebra, build_dispatch, mix, realize,
                             sample_mfamily)
from maltkit.library import builtin_system
from maltkit.terms import Signature


def random_algebra(n, arities, rng):
    sig = Signature(tuple((f"f{i}", d) for i, d in enumerate(arities)))
    tables = []
    for d in arities:
        cells = rng.integers(0, n, size=n ** d)
        # force idempotence so the census invariants apply
        for a in range(n):
            idx = sum(a * n ** (d - 1 - j) for j in range(d))
            cells[idx] = a
        tables.append(tuple(int(x) for x in cells))
    return FiniteAlgebra(n, sig, tuple(tables))


def sampled(name, n, seed, *args):
    spec = builtin_system(name, *args)
    clo = compute_closure(spec)
    trans = canonical_transversal(clo)
    dispatch = build_dispatch(clo, trans, spec.signature)
    return realize(dispatch, sample_mfamily(trans, n, seed))


# ---------------------------------------------------------------------------
# subuniverses


def test_is_subuniverse_basic():
    rng = np.random.default_rng(0)
    alg = random_algebra(4, (2,), rng)
    assert is_subuniverse(alg, range(4)).holds
    for a in range(4):
        assert is_subuniverse(alg, (a,)).holds  # idempotence


def test_generated_subuniverse_is_smallest():
    rng = np.random.default_rng(1)
    for trial in range(20):
        alg = random_algebra(5, (2, 3), rng)
        S = generated_subuniverse(alg, [0, 1])
        assert is_subuniverse(alg, S).holds
        assert {0, 1} <= set(S)
        # minimality: no proper subuniverse of S contains {0,1}
        for k in range(2, len(S)):
            for B in itertools.combinations(S, k):
                if {0, 1} <= set(B):
                    assert not is_subuniverse(alg, B).holds


def test_pair_shortcut_matches_exhaustive():
    """has_proper_subalgebra_size_gt1 agrees with brute-force subset search."""
    rng = np.random.default_rng(2)
    for trial in range(30):
        alg = random_algebra(5, (3,), rng)
        got = has_proper_subalgebra_size_gt1(alg).holds
        brute = any(subalgebras_of_size(alg, k) for k in (2, 3, 4))
        assert got == brute


def test_subalgebras_of_size_witnesses():
    alg = sampled("majority", 6, mix(9, 0))
    pairs = subalgebras_of_size(alg, 2)
    # majority: every 2-subset is closed (d_M = 3)
    assert len(pairs) == 15


# ---------------------------------------------------------------------------
# automorphisms


def test_automorphism_group_is_a_group():
    rng = np.random.default_rng(3)
    for trial in range(10):
        alg = random_algebra(4, (2,), rng)
        auts = automorphisms(alg)
        assert tuple(range(4)) in auts
        auts_set = set(auts)
        for f in auts:
            inv = tuple(np.argsort(np.array(f)))
            assert tuple(int(x) for x in inv) in auts_set
            for g in auts:
                comp = tuple(f[g[i]] for i in range(4))
                assert comp in auts_set


def test_automorphisms_match_bruteforce():
    rng = np.random.default_rng(4)
    for trial in range(10):
        alg = random_algebra(4, (3,), rng)
        got = set(automorphisms(alg))
        grid = np.asarray(alg.tables[0]).reshape(4, 4, 4)
        brute = set()
        for perm in itertools.permutations(range(4)):
            p = np.array(perm)
            if np.array_equal(p[grid], grid[np.ix_(p, p, p)]):
                brute.add(perm)
        assert got == brute


def test_has_nontrivial_automorphism_flags_swap():
    # the minority operation on {0,1} commutes with the transposition
    table = tuple(_minority_values(0, 1)[args]
                  for args in itertools.product((0, 1), repeat=3))
    alg = FiniteAlgebra(2, Signature((("f", 3),)), (table,))
    assert has_nontrivial_automorphism(alg).holds


# ---------------------------------------------------------------------------
# crosses


def test_cross_decoupling_matches_relation_check():
    rng = np.random.default_rng(5)
    for trial in range(30):
        n = int(rng.integers(3, 6))
        alg = random_algebra(n, (rng.integers(2, 4),), rng)
        for a in range(n):
            fast = cross_compatible(alg, a).holds
            slow = is_compatible_relation(alg, cross_relation(n, a)).holds
            assert fast == slow, (n, a)


def test_majority_cross_always_compatible():
    for i in range(5):
        alg = sampled("majority", 5, mix(31, i))
        for a in range(alg.n):
            assert cross_compatible(alg, a).holds


def test_any_cross(maltsev_spec):
    alg = sampled("maltsev", 5, mix(17, 0))
    a = _any_cross_np(_tabs(alg), alg.n)
    if a is not None:
        assert is_compatible_relation(alg, cross_relation(alg.n, a)).holds


# ---------------------------------------------------------------------------
# idemprimality


def test_idemprimal_needs_n_gt_2():
    alg = sampled("maltsev", 2, mix(1, 0))
    with pytest.raises(DomainError):
        is_idemprimal(alg)


def test_idemprimal_witness_tags():
    alg = sampled("majority", 5, mix(2, 0))
    res = is_idemprimal(alg)
    assert not res.holds
    assert res.witness[0] in ("proper-subalgebra", "automorphism", "cross")


def test_idemprimal_consistency():
    for i in range(10):
        alg = sampled("hagemann-mitschke", 6, mix(8, i), 3)
        res = is_idemprimal(alg)
        expect = (not has_proper_subalgebra_size_gt1(alg).holds
                  and not has_nontrivial_automorphism(alg).holds
                  and _any_cross_np(_tabs(alg), alg.n) is None)
        assert res.holds == expect


# ---------------------------------------------------------------------------
# minority pairs


def test_minority_values_table():
    vals = _minority_values(0, 1)
    assert vals[(0, 0, 0)] == 0 and vals[(1, 1, 1)] == 1
    assert vals[(0, 1, 1)] == 0 and vals[(1, 0, 1)] == 0 and vals[(1, 1, 0)] == 0
    assert vals[(1, 0, 0)] == 1 and vals[(0, 1, 0)] == 1 and vals[(0, 0, 1)] == 1


def test_minority_two_subalgebra_on_minority_model():
    # every 2-subset of a minority1 model is a minority subalgebra
    alg = sampled("minority1", 4, mix(5, 0))
    res = has_minority_two_subalgebra(alg, "f")
    assert res.holds


def test_minority_two_subalgebra_requires_ternary():
    rng = np.random.default_rng(6)
    alg = random_algebra(3, (2,), rng)
    with pytest.raises(DomainError):
        has_minority_two_subalgebra(alg, 0)


def test_compatible_relation_diagonal():
    rng = np.random.default_rng(7)
    alg = random_algebra(4, (2,), rng)
    diag = [(a, a) for a in range(4)]
    assert is_compatible_relation(alg, diag).holds
