"""The model bijection: pattern dispatch, uniform sampling of independent
family data, realization as operation tables, and the inverse extraction.

A model on [n] is equivalent to a family (h_i), one function per
transversal entry i >= 1, where h_i assigns a value in [n] to every
G_i-orbit of injective d_i-tuples, independently and freely.  Operation
tables are reconstructed cell by cell: the argument tuple's pattern picks
a transversal entry and a coordinate selector sigma, and the cell value is
h_i at the selected injective tuple (or the selected argument itself for
the variable entry)."""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .analysis import Transversal, canonical_transversal
from .closure import ClosurePartition, compute_closure
from .errors import BudgetError, DomainError
from .terms import LinearTerm, Signature, SystemSpec, pattern_of

DEFAULT_MAX_CELLS = 100_000_000

# splitmix64 constants; mix() is the fixed public per-sample seed derivation
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def mix(master_seed: int, index: int) -> int:
    """Derive a child seed: one splitmix64 step of master_seed + index."""
    z = (master_seed + index * _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def patterns_of_arity(d: int) -> list[tuple[int, ...]]:
    """All first-occurrence label tuples of length d (restricted growth
    strings), in lexicographic order."""
    out = []

    def rec(prefix, top):
        if len(prefix) == d:
            out.append(tuple(prefix))
            return
        for lb in range(top + 2):
            prefix.append(lb)
            rec(prefix, max(top, lb))
            prefix.pop()

    rec([0], 0)
    return out


@dataclass(frozen=True)
class FiniteAlgebra:
    n: int
    signature: Signature
    tables: tuple[tuple[int, ...], ...]  # row-major, index sum(a_j * n^(d-1-j))

    def value(self, sym: int, args) -> int:
        d = self.signature.arity(sym)
        idx = 0
        for a in args:
            idx = idx * self.n + a
        return self.tables[sym][idx]


@dataclass(frozen=True)
class MFamily:
    """Independent family data: per transversal entry i >= 1 a map from
    canonical orbit keys (lex-least injective tuples under G_i) to values
    in [n].  Entry 0 (the variable entry) is the identity, kept implicit
    as None."""

    n: int
    values: tuple[dict | None, ...]

    def draw_count(self) -> int:
        return sum(len(v) for v in self.values if v is not None)


class DispatchTable:
    """Per symbol and argument pattern: the transversal entry hit and the
    coordinate selector sigma (x_j = z_{sigma[j]})."""

    def __init__(self, spec: SystemSpec, transversal: Transversal,
                 rules: dict[int, dict[tuple[int, ...], tuple[int, tuple[int, ...]]]]):
        self.spec = spec
        self.transversal = transversal
        self.rules = rules  # symbol -> pattern labels -> (entry index, sigma)


def build_dispatch(closure: ClosurePartition, transversal: Transversal,
                   sig: Signature | None = None, order_rng=None) -> DispatchTable:
    """For each (symbol, pattern): search injective assignments of the
    pattern's blocks to variables until the resulting term lands in a
    transversal class; record that entry and sigma.  The realized algebra
    does not depend on the search order (tested), so order_rng exists only
    to exercise that invariance."""
    spec = closure.spec
    if sig is None:
        sig = spec.signature
    uni = closure.universe
    class_to_entry = {e.class_id: i for i, e in enumerate(transversal.entries)}
    rules: dict[int, dict] = {}
    for sym in range(len(sig)):
        d = sig.arity(sym)
        per_sym = {}
        for mu in patterns_of_arity(d):
            v = max(mu) + 1
            assignments = list(permutations(range(1, uni.m + 1), v))
            if order_rng is not None:
                order_rng.shuffle(assignments)
            hit = None
            for asg in assignments:
                z = tuple(asg[lb] for lb in mu)
                root = closure.find(uni.index_of(LinearTerm.app(sym, z)))
                if root in class_to_entry:
                    ei = class_to_entry[root]
                    de = transversal.entries[ei].d
                    sigma = tuple(z.index(i) + 1 for i in range(1, de + 1))
                    hit = (ei, sigma)
                    break
            if hit is None:
                raise AssertionError(
                    f"no transversal class reachable for symbol "
                    f"{sig.name(sym)} pattern {mu}")
            per_sym[mu] = hit
        rules[sym] = per_sym
    return DispatchTable(spec, transversal, rules)


# ---------------------------------------------------------------------------
# Orbit key indexing per (transversal, n)


class OrbitIndex:
    """Canonical orbit keys for every entry at a fixed carrier size, in the
    deterministic draw order: entries in transversal order, keys in
    lexicographic order."""

    def __init__(self, transversal: Transversal, n: int):
        self.transversal = transversal
        self.n = n
        self.keys: list[list[tuple[int, ...]] | None] = [None]
        for e in transversal.entries[1:]:
            group = e.group.elements
            seen = set()
            for u in permutations(range(n), e.d):
                seen.add(min(tuple(u[p - 1] for p in g) for g in group))
            self.keys.append(sorted(seen))
        self.total = sum(len(k) for k in self.keys if k is not None)

    def canonical(self, entry: int, u: tuple[int, ...]) -> tuple[int, ...]:
        group = self.transversal.entries[entry].group.elements
        return min(tuple(u[p - 1] for p in g) for g in group)


_orbit_cache: dict[tuple, OrbitIndex] = {}
_orbit_lock = threading.Lock()


def orbit_index(transversal: Transversal, n: int) -> OrbitIndex:
    key = (transversal, n)
    with _orbit_lock:
        cached = _orbit_cache.get(key)
    if cached is not None:
        return cached
    oi = OrbitIndex(transversal, n)
    with _orbit_lock:
        _orbit_cache.setdefault(key, oi)
    return oi


def draw_values(seed: int, n: int, count: int) -> np.ndarray:
    """The raw uniform draws for one sample, as a fixed-order array."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.integers(0, n, size=count, dtype=np.int64)


def sample_mfamily(transversal: Transversal, n: int, seed: int) -> MFamily:
    """Uniform family: every orbit key gets an independent uniform value.
    Total draws = p(n); the induced model distribution is uniform."""
    if n < 1:
        raise DomainError("n must be positive")
    oi = orbit_index(transversal, n)
    flat = draw_values(seed, n, oi.total)
    values: list[dict | None] = [None]
    pos = 0
    for keys in oi.keys[1:]:
        values.append({k: int(flat[pos + j]) for j, k in enumerate(keys)})
        pos += len(keys)
    return MFamily(n, tuple(values))


def realize(dispatch: DispatchTable, mfamily: MFamily, *,
            max_cells: int = DEFAULT_MAX_CELLS) -> FiniteAlgebra:
    """Fill every table cell from the family via the dispatch rule."""
    n = mfamily.n
    sig = dispatch.spec.signature
    oi = orbit_index(dispatch.transversal, n) if n > 1 else None
    tables = []
    for sym in range(len(sig)):
        d = sig.arity(sym)
        if n ** d > max_cells:
            raise BudgetError(
                f"table for {sig.name(sym)} needs {n ** d} cells "
                f"(budget {max_cells})")
        rules = dispatch.rules[sym]
        table = []
        for a in product(range(n), repeat=d):
            entry, sigma = rules[pattern_of(a).labels]
            if entry == 0:
                table.append(a[sigma[0] - 1])
            else:
                u = tuple(a[s - 1] for s in sigma)
                table.append(mfamily.values[entry][oi.canonical(entry, u)])
        tables.append(tuple(table))
    return FiniteAlgebra(n, sig, tuple(tables))


def extract_mfamily(transversal: Transversal, algebra: FiniteAlgebra,
                    spec: SystemSpec | None = None) -> MFamily:
    """h_i := evaluation of the representative term t_i on injective
    tuples; the inverse of realize.  If spec is given the algebra is
    validated first."""
    if spec is not None:
        ok, witness = validate_model(spec, algebra)
        if not ok:
            raise DomainError(f"algebra is not a model: {witness}")
    n = algebra.n
    oi = orbit_index(transversal, n)
    values: list[dict | None] = [None]
    for ei, e in enumerate(transversal.entries[1:], start=1):
        rep = e.rep
        vals = {}
        for key in oi.keys[ei]:
            # rep's variables are x_1..x_d; key supplies their values
            args = tuple(key[v - 1] for v in rep.args)
            vals[key] = algebra.value(rep.symbol, args)
        values.append(vals)
    return MFamily(n, tuple(values))


def validate_model(spec: SystemSpec, algebra: FiniteAlgebra):
    """Check every identity on every assignment.  Returns (True, None) or
    (False, (identity index, assignment tuple))."""
    n = algebra.n

    def ev(term: LinearTerm, asg) -> int:
        if term.is_variable:
            return asg[term.args[0] - 1]
        return algebra.value(term.symbol, tuple(asg[a - 1] for a in term.args))

    for idx, ident in enumerate(spec.identities):
        nv = len(ident.variables())
        for asg in product(range(n), repeat=nv):
            if ev(ident.lhs, asg) != ev(ident.rhs, asg):
                return False, (idx, asg)
    return True, None


def enumerate_models(spec: SystemSpec, n: int, backend: str = "family", *,
                     closure: ClosurePartition | None = None):
    """Yield every model on [n].  The family backend iterates value
    assignments to orbit keys; the brute backend filters all tables by
    validation.  Both produce the same set."""
    sig = spec.signature
    if backend == "family":
        if closure is None:
            closure = compute_closure(spec)
        transversal = canonical_transversal(closure)
        dispatch = build_dispatch(closure, transversal)
        oi = orbit_index(transversal, n)
        if oi.total * math.log2(max(n, 2)) > 24:
            raise BudgetError(
                f"family enumeration of n^{oi.total} models at n={n} "
                "exceeds the ~16M budget")
        flat_keys = [(ei, k) for ei, keys in enumerate(oi.keys[1:], start=1)
                     for k in keys]
        for combo in product(range(n), repeat=len(flat_keys)):
            values: list[dict | None] = [None] + [dict() for _ in transversal.entries[1:]]
            for (ei, k), v in zip(flat_keys, combo):
                values[ei][k] = v
            yield realize(dispatch, MFamily(n, tuple(values)))
    elif backend == "brute":
        cells = sum(n ** ar for _, ar in sig.symbols)
        if cells * math.log2(max(n, 2)) > 24:
            raise BudgetError(
                f"brute enumeration over {cells} cells at n={n} "
                "exceeds the ~16M budget")
        shapes = [n ** ar for _, ar in sig.symbols]
        for combo in product(range(n), repeat=cells):
            tables = []
            pos = 0
            for sz in shapes:
                tables.append(tuple(combo[pos:pos + sz]))
                pos += sz
            alg = FiniteAlgebra(n, sig, tuple(tables))
            if validate_model(spec, alg)[0]:
                yield alg
    else:
        raise ValueError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------------
# Algebra JSON format


def algebra_to_json(algebra: FiniteAlgebra) -> str:
    ops = {}
    for sym in range(len(algebra.signature)):
        ops[algebra.signature.name(sym)] = {
            "arity": algebra.signature.arity(sym),
            "table": list(algebra.tables[sym]),
        }
    return json.dumps({"n": algebra.n, "operations": ops},
                      separators=(",", ":"))


def algebra_from_json(text: str) -> FiniteAlgebra:
    doc = json.loads(text)
    try:
        n = int(doc["n"])
        ops = doc["operations"]
    except (KeyError, TypeError):
        raise DomainError("algebra document needs 'n' and 'operations'") from None
    symbols = []
    tables = []
    for name, body in ops.items():
        arity = int(body["arity"])
        table = tuple(int(v) for v in body["table"])
        if len(table) != n ** arity:
            raise DomainError(f"table for {name!r} has wrong length")
        if any(not 0 <= v < n for v in table):
            raise DomainError(f"table for {name!r} has out-of-range values")
        symbols.append((name, arity))
        tables.append(table)
    return FiniteAlgebra(n, Signature(tuple(symbols)), tuple(tables))
