"""Decision procedures on concrete finite algebras: subuniverses,
generated closures, automorphisms, compatible crosses, idemprimality,
minority pairs, and generic compatible-relation checks.

Public functions take a FiniteAlgebra.  The internals work on numpy
operation tables so the census can call them per sample without boxing;
the _tabs(...) helpers convert between the two views.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations, product

import numpy as np

from .errors import BudgetError, DomainError
from .factory import FiniteAlgebra

AUTOMORPHISM_MAX_N = 64
SUBSET_BUDGET = 2_000_000


@dataclass(frozen=True)
class PropertyResult:
    name: str
    holds: bool
    witness: object = None


def _tabs(algebra: FiniteAlgebra):
    """[(flat numpy table, arity)] view of an algebra."""
    out = []
    for sym in range(len(algebra.signature)):
        d = algebra.signature.arity(sym)
        out.append((np.asarray(algebra.tables[sym], dtype=np.int64), d))
    return out


# ---------------------------------------------------------------------------
# Subuniverses


def is_subuniverse(algebra: FiniteAlgebra, B) -> PropertyResult:
    B = sorted(set(B))
    if not B:
        raise DomainError("B must be non-empty")
    bset = set(B)
    for sym in range(len(algebra.signature)):
        d = algebra.signature.arity(sym)
        for args in product(B, repeat=d):
            if algebra.value(sym, args) not in bset:
                return PropertyResult("subuniverse", False, (sym, args))
    return PropertyResult("subuniverse", True, tuple(B))


def _closure_np(tabs, n: int, seed) -> np.ndarray:
    S = np.unique(np.asarray(sorted(seed), dtype=np.int64))
    while True:
        pieces = [S]
        for tab, d in tabs:
            grid = tab.reshape((n,) * d)
            pieces.append(grid[np.ix_(*([S] * d))].ravel())
        new = np.unique(np.concatenate(pieces))
        if len(new) == len(S):
            return new
        S = new


def generated_subuniverse(algebra: FiniteAlgebra, G) -> list[int]:
    if not G:
        raise DomainError("generating set must be non-empty")
    return [int(x) for x in _closure_np(_tabs(algebra), algebra.n, G)]


def has_proper_subalgebra_size_gt1(algebra: FiniteAlgebra) -> PropertyResult:
    n = algebra.n
    if n < 2:
        raise DomainError("carrier must have at least 2 elements")
    tabs = _tabs(algebra)
    found = _pair_generated_proper(tabs, n)
    if found is None:
        return PropertyResult("proper-subalgebra-gt1", False)
    return PropertyResult("proper-subalgebra-gt1", True, found)


def _pair_generated_proper(tabs, n: int):
    """Smallest-pair witness of a proper subalgebra of size > 1, or None.
    Any proper subalgebra of size >= 2 contains a 2-generated proper one,
    so O(n^2) pair closures suffice."""
    for a in range(n):
        for b in range(a + 1, n):
            S = _closure_np(tabs, n, (a, b))
            if len(S) < n:
                return [int(x) for x in S]
    return None


def subalgebras_of_size(algebra: FiniteAlgebra, k: int) -> list[tuple[int, ...]]:
    n = algebra.n
    if not 2 <= k < n:
        raise DomainError("need 2 <= k < n")
    total = 1
    for j in range(k):
        total = total * (n - j) // (j + 1)
    if total > SUBSET_BUDGET:
        raise BudgetError(f"C({n},{k}) = {total} subsets exceed the budget")
    out = []
    for B in combinations(range(n), k):
        if is_subuniverse(algebra, B).holds:
            out.append(B)
    return out


# ---------------------------------------------------------------------------
# Automorphisms


def _propagate(tabs, n: int, gens, imgs):
    """Extend a generator assignment to a full map by evaluating the term
    closure on both sides; returns the map array or None on conflict.
    Only a pruning device: survivors still get a full homomorphism check."""
    phi = np.full(n, -1, dtype=np.int64)
    for g, im in zip(gens, imgs):
        if phi[g] != -1 and phi[g] != im:
            return None
        phi[g] = im
    D = np.unique(np.asarray(gens, dtype=np.int64))
    while True:
        srcs, ims = [D], [phi[D]]
        for tab, d in tabs:
            grid = tab.reshape((n,) * d)
            srcs.append(grid[np.ix_(*([D] * d))].ravel())
            ims.append(grid[np.ix_(*([phi[D]] * d))].ravel())
        src = np.concatenate(srcs)
        img = np.concatenate(ims)
        order = np.argsort(src, kind="stable")
        s2, i2 = src[order], img[order]
        dup = s2[1:] == s2[:-1]
        if np.any(dup & (i2[1:] != i2[:-1])):
            return None
        first = np.concatenate(([True], ~dup))
        su, iu = s2[first], i2[first]
        known = phi[su] != -1
        if np.any(phi[su][known] != iu[known]):
            return None
        phi[su] = iu
        newD = np.unique(su)
        if len(newD) == len(D):
            return phi
        D = newD


def _is_automorphism(tabs, n: int, phi: np.ndarray) -> bool:
    if np.any(phi < 0) or len(np.unique(phi)) != n:
        return False
    for tab, d in tabs:
        grid = tab.reshape((n,) * d)
        if not np.array_equal(phi[grid], grid[np.ix_(*([phi] * d))]):
            return False
    return True


def _generator_chain(tabs, n: int) -> list[int]:
    gens = []
    S = np.empty(0, dtype=np.int64)
    while len(S) < n:
        for g in range(n):
            if g not in S:
                break
        gens.append(g)
        S = _closure_np(tabs, n, list(S) + [g])
    return gens


def _automorphism_search(tabs, n: int, find_all: bool):
    gens = _generator_chain(tabs, n)
    total = 1
    for j in range(len(gens)):
        total *= n - j
    if total > 500_000:
        raise BudgetError(
            f"{total} candidate generator images exceed the search budget")
    found = []
    identity = tuple(gens)
    for imgs in permutations(range(n), len(gens)):
        phi = _propagate(tabs, n, gens, imgs)
        if phi is None or not _is_automorphism(tabs, n, phi):
            continue
        perm = tuple(int(x) for x in phi)
        found.append(perm)
        if not find_all and imgs != identity:
            # a nontrivial automorphism exists
            return found
    return found


def automorphisms(algebra: FiniteAlgebra) -> list[tuple[int, ...]]:
    """All permutations commuting with every operation, as image tuples.
    Always contains the identity."""
    n = algebra.n
    if n > AUTOMORPHISM_MAX_N:
        raise BudgetError(f"n={n} exceeds the automorphism budget {AUTOMORPHISM_MAX_N}")
    if n == 1:
        return [(0,)]
    return sorted(_automorphism_search(_tabs(algebra), n, find_all=True))


def has_nontrivial_automorphism(algebra: FiniteAlgebra) -> PropertyResult:
    n = algebra.n
    if n > AUTOMORPHISM_MAX_N:
        raise BudgetError(f"n={n} exceeds the automorphism budget {AUTOMORPHISM_MAX_N}")
    if n == 1:
        return PropertyResult("nontrivial-automorphism", False)
    tabs = _tabs(algebra)
    ident = tuple(range(n))
    for perm in _automorphism_search(tabs, n, find_all=False):
        if perm != ident:
            return PropertyResult("nontrivial-automorphism", True, perm)
    return PropertyResult("nontrivial-automorphism", False)


# ---------------------------------------------------------------------------
# Crosses


def _cross_compatible_np(tabs, n: int, a: int):
    """Decoupled test: the cross at a is a subuniverse of the square iff
    for every operation f of arity d and every T subset of coordinates,
    all u with u|_T = a have f(u) = a, or all v with v|_complement = a
    have f(v) = a.  Sound and complete because a tuple of cross pairs
    splits into a left tuple pinned to a on some T and a right tuple
    pinned on the complement."""
    for tab, d in tabs:
        grid = tab.reshape((n,) * d)
        for bits in range(1 << d):
            T = [j for j in range(d) if bits >> j & 1]
            comp = [j for j in range(d) if not bits >> j & 1]
            idx_u = tuple(a if j in T else slice(None) for j in range(d))
            idx_v = tuple(a if j in comp else slice(None) for j in range(d))
            if not (np.all(grid[idx_u] == a) or np.all(grid[idx_v] == a)):
                return False, tuple(T)
    return True, None


def cross_compatible(algebra: FiniteAlgebra, a: int) -> PropertyResult:
    ok, bad_T = _cross_compatible_np(_tabs(algebra), algebra.n, a)
    if ok:
        return PropertyResult("cross-compatible", True, a)
    return PropertyResult("cross-compatible", False, bad_T)


def _any_cross_np(tabs, n: int):
    for a in range(n):
        if _cross_compatible_np(tabs, n, a)[0]:
            return a
    return None


# ---------------------------------------------------------------------------
# Idemprimality


def is_idemprimal(algebra: FiniteAlgebra) -> PropertyResult:
    """Szendrei's criterion for finite idempotent algebras of size > 2:
    no proper subalgebra of size > 1, trivial automorphism group, and no
    compatible cross."""
    n = algebra.n
    if n <= 2:
        raise DomainError("idemprimality criterion unsupported for n <= 2")
    tabs = _tabs(algebra)
    sub = _pair_generated_proper(tabs, n)
    if sub is not None:
        return PropertyResult("idemprimal", False, ("proper-subalgebra", sub))
    aut = has_nontrivial_automorphism(algebra)
    if aut.holds:
        return PropertyResult("idemprimal", False, ("automorphism", aut.witness))
    a = _any_cross_np(tabs, n)
    if a is not None:
        return PropertyResult("idemprimal", False, ("cross", a))
    return PropertyResult("idemprimal", True)


# ---------------------------------------------------------------------------
# Minority pairs and generic relations


def _minority_values(a: int, b: int):
    """The 8 cells of the minority operation on {a,b}."""
    out = {}
    for args in product((a, b), repeat=3):
        distinct = args.count(a)
        # minority: returns the value occurring once; on the diagonal, itself
        if distinct == 3 or distinct == 0:
            out[args] = args[0]
        elif distinct == 1:
            out[args] = a
        else:
            out[args] = b
    return out


def has_minority_two_subalgebra(algebra: FiniteAlgebra, symbol) -> PropertyResult:
    if isinstance(symbol, str):
        symbol = algebra.signature.index(symbol)
    if algebra.signature.arity(symbol) != 3:
        raise DomainError("minority check needs a ternary symbol")
    for a in range(algebra.n):
        for b in range(a + 1, algebra.n):
            want = _minority_values(a, b)
            if all(algebra.value(symbol, args) == v for args, v in want.items()) \
                    and is_subuniverse(algebra, (a, b)).holds:
                return PropertyResult("minority-2-subalgebra", True, (a, b))
    return PropertyResult("minority-2-subalgebra", False)


def is_compatible_relation(algebra: FiniteAlgebra, relation) -> PropertyResult:
    """Generic coordinatewise-closure check of a k-ary relation."""
    rel = sorted(set(tuple(r) for r in relation))
    if not rel:
        raise DomainError("relation must be non-empty")
    k = len(rel[0])
    if any(len(r) != k for r in rel):
        raise DomainError("relation tuples must share one arity")
    relset = set(rel)
    max_d = max(ar for _, ar in algebra.signature.symbols)
    if len(rel) ** max_d > 5_000_000:
        raise BudgetError("relation closure check exceeds the budget")
    for sym in range(len(algebra.signature)):
        d = algebra.signature.arity(sym)
        for rows in product(rel, repeat=d):
            image = tuple(algebra.value(sym, tuple(r[c] for r in rows))
                          for c in range(k))
            if image not in relset:
                return PropertyResult("compatible-relation", False, (sym, rows))
    return PropertyResult("compatible-relation", True)


def cross_relation(n: int, a: int) -> list[tuple[int, int]]:
    """The cross at a: ({a} x A) union (A x {a})."""
    return sorted({(a, x) for x in range(n)} | {(x, a) for x in range(n)})
