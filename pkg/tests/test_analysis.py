import math

import pytest

from maltkit.analysis import (canonical_transversal, class_infos,
                              classify_minimal, essential_variables,
                              essentially_different, is_minimal,
                              minimal_terms, orbit_partition,
                              orbit_partition_bruteforce, symmetry_group)
from maltkit.closure import compute_closure
from maltkit.errors import DomainError
from maltkit.library import builtin_system
from maltkit.terms import LinearTerm, parse_system


def render(closure, t):
    return closure.universe.render(closure.universe.index_of(t))


# ---------------------------------------------------------------------------
# orbits


def test_cmaltsev_orbits(cmaltsev_closure):
    infos = orbit_partition(cmaltsev_closure)
    assert len(infos) == 12
    orbits = {}
    for info in infos:
        orbits.setdefault(info.orbit_id, []).append(info)
    sizes = sorted(len(v) for v in orbits.values())
    assert sizes == [3, 3, 6]


def test_orbit_key_method_matches_bruteforce():
    for name in ("maltsev", "commutative-maltsev", "majority", "minority1",
                 "minority3", "two-thirds-minority", "pixley-pair"):
        spec = builtin_system(name)
        clo = compute_closure(spec)
        brute = orbit_partition_bruteforce(clo)
        infos = class_infos(clo)
        for root, info in infos.items():
            assert info.orbit_id == brute[root], name


def test_orbit_key_method_matches_bruteforce_4ary():
    spec = builtin_system("day", 2)
    clo = compute_closure(spec)
    brute = orbit_partition_bruteforce(clo)
    for root, info in class_infos(clo).items():
        assert info.orbit_id == brute[root]


# ---------------------------------------------------------------------------
# symmetry groups and transversal


def test_cmaltsev_symmetry_groups(cmaltsev_closure):
    clo = cmaltsev_closure
    f = 0
    # D_1 = {f(x,y,z), f(z,y,x)} has the order-2 group swapping x and z
    g = symmetry_group(clo, LinearTerm.app(f, (1, 2, 3)))
    assert len(g) == 2
    assert (3, 2, 1) in g.elements
    # C_1 = {f(x,y,x)} is rigid
    g2 = symmetry_group(clo, LinearTerm.app(f, (1, 2, 1)))
    assert len(g2) == 1


def test_group_order_divides_factorial():
    for name in ("maltsev", "commutative-maltsev", "majority", "minority2",
                 "siggers4"):
        spec = builtin_system(name)
        clo = compute_closure(spec)
        for e in canonical_transversal(clo).entries:
            assert math.factorial(e.d) == e.q * len(e.group)


def test_cmaltsev_transversal(cmaltsev_spec, cmaltsev_closure):
    trans = canonical_transversal(cmaltsev_closure)
    reps = [render(cmaltsev_closure, e.rep) for e in trans.entries]
    assert reps == ["x", "f(x,y,x)", "f(x,y,z)"]
    assert [(e.d, e.q) for e in trans.entries] == [(1, 1), (2, 2), (3, 3)]


def test_maltsev_transversal(maltsev_closure):
    trans = canonical_transversal(maltsev_closure)
    reps = [render(maltsev_closure, e.rep) for e in trans.entries]
    assert reps == ["x", "f(x,y,x)", "f(x,y,z)"]
    assert [(e.d, e.q) for e in trans.entries] == [(1, 1), (2, 2), (3, 6)]


def test_transversal_reps_use_initial_segments():
    for name in ("majority", "pixley-pair", "siggers4"):
        clo = compute_closure(builtin_system(name))
        for e in canonical_transversal(clo).entries:
            assert e.rep.variables() == frozenset(range(1, e.d + 1))


def test_transversal_deterministic(cmaltsev_closure):
    a = canonical_transversal(cmaltsev_closure)
    b = canonical_transversal(cmaltsev_closure)
    assert a == b


def test_unsatisfiable_has_no_transversal():
    spec = parse_system("signature f/3\nidentity f(x,y,z) = x\n"
                        "identity f(x,y,z) = z\n")
    with pytest.raises(DomainError):
        canonical_transversal(compute_closure(spec))


def test_essential_variables_lookup(cmaltsev_closure):
    clo = cmaltsev_closure
    root = clo.class_of(LinearTerm.app(0, (1, 2, 1)))
    assert essential_variables(clo, root) == frozenset({1, 2})


# ---------------------------------------------------------------------------
# minimal terms


def test_maltsev_minimal_terms(maltsev_closure):
    terms = minimal_terms(maltsev_closure)
    assert [render(maltsev_closure, t) for t in terms] == ["f(x,y,x)"]
    assert classify_minimal(maltsev_closure, terms[0]).kind == "binary-nontrivial"


def test_minority_minimal_terms():
    clo = compute_closure(builtin_system("minority1"))
    terms = minimal_terms(clo)
    assert len(terms) == 1
    assert classify_minimal(clo, terms[0]).kind == "minority"


def test_hagemann_mitschke_minimal_term_count():
    for k in range(2, 6):
        clo = compute_closure(builtin_system("hagemann-mitschke", k))
        assert len(minimal_terms(clo)) == 2 * k - 3, k


def test_classification_kinds():
    expected = {
        "majority": "majority",
        "two-thirds-minority": "two-thirds-minority",
        "minority3": "minority",
    }
    for name, kind in expected.items():
        clo = compute_closure(builtin_system(name))
        terms = minimal_terms(clo)
        assert len(terms) == 1
        assert classify_minimal(clo, terms[0]).kind == kind, name


def test_semiprojection_classification():
    # a ternary symbol collapsing to the first coordinate on all
    # identifications, without being a projection
    spec = parse_system(
        "signature s/3\n"
        "identity s(x,x,y) = x\nidentity s(x,y,x) = x\nidentity s(x,y,y) = x\n")
    clo = compute_closure(spec)
    terms = minimal_terms(clo)
    assert len(terms) == 1
    rep = classify_minimal(clo, terms[0])
    assert rep.kind == "semiprojection"


def test_is_minimal_details(maltsev_closure):
    clo = maltsev_closure
    assert is_minimal(clo, LinearTerm.app(0, (1, 2, 1)))
    assert not is_minimal(clo, LinearTerm.app(0, (1, 2, 2)))  # trivial
    assert not is_minimal(clo, LinearTerm.app(0, (1, 2, 3)))  # minor f(x,y,x) nontrivial
    assert not is_minimal(clo, LinearTerm.var(1))


def test_classify_rejects_non_minimal(maltsev_closure):
    with pytest.raises(DomainError):
        classify_minimal(maltsev_closure, LinearTerm.app(0, (1, 2, 3)))


def test_essentially_different(cmaltsev_closure):
    clo = cmaltsev_closure
    a = LinearTerm.app(0, (1, 2, 1))
    b = LinearTerm.app(0, (2, 1, 2))
    c = LinearTerm.app(0, (1, 2, 3))
    assert not essentially_different(clo, a, b)
    assert essentially_different(clo, a, c)


# ---------------------------------------------------------------------------
# inessential-symbol robustness


def test_jonsson_inessential_end_symbols():
    """Dropping the projection end terms (and their defining identities)
    leaves d_M and the (d_i, q_i) data unchanged."""
    from maltkit.params import parameters
    for k in (2, 3, 4):
        full = builtin_system("jonsson", k)
        lines = ["signature " + ", ".join(
            f"t{i}/3" for i in range(1, k))]
        lines += [f"identity t{i}(x,y,x) = x" for i in range(1, k)]
        # chain ends substitute the projections directly
        for i in range(k):
            lo = f"t{i}" if i >= 1 else None
            hi = f"t{i + 1}" if i + 1 <= k - 1 else None
            if i % 2 == 0:
                # t0(x,x,y) = x; tk(x,x,y) = y
                l = f"{lo}(x,x,y)" if lo else "x"
                r = f"{hi}(x,x,y)" if hi else "y"
            else:
                # tk(x,y,y) = y
                l = f"{lo}(x,y,y)"
                r = f"{hi}(x,y,y)" if hi else "y"
            lines.append(f"identity {l} = {r}")
        trimmed = parse_system("\n".join(lines) + "\n")
        p_full = parameters(canonical_transversal(compute_closure(full)))
        p_trim = parameters(canonical_transversal(compute_closure(trimmed)))
        assert p_full == p_trim, k
