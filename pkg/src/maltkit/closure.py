"""Universe of linear terms over m variables and the entailment closure.

The closure is the least equivalence relation on the term universe that
contains Sigma and is closed under every variable substitution; two linear
terms are semantically equal in all models iff they land in one class
(provided Sigma is satisfiable and m is large enough for the query).

Construction note: it suffices to union s[gamma] ~ t[gamma] for every
identity (s ~ t) in Sigma and every map gamma defined on its variables.
The equivalence closure of these seed pairs is already substitution
closed: any chain s = u_0 ~ u_1 ~ ... ~ u_k = t of seed links maps, under
a further substitution delta, to the chain of seed links (u_j[delta]),
since each seed link (p[gamma], q[gamma]) maps to the seed link
(p[delta o gamma], q[delta o gamma]).  So no worklist over merged pairs
is needed, and gamma ranges over m^v maps (v = variables of the identity)
rather than m^m.  The fixpoint property is still asserted in tests.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from itertools import product

from .errors import BudgetError, DomainError
from .terms import (
    Identity,
    LinearTerm,
    Signature,
    SystemSpec,
    render_system,
    render_term,
    required_variable_count,
    variable_names,
)

DEFAULT_MAX_VARS = 7
DEFAULT_MAX_UNIVERSE = 2_000_000


class TermUniverse:
    """All linear terms over {x_1..x_m}: variables first, then application
    terms in lexicographic (symbol, arguments) order, addressed by index."""

    def __init__(self, sig: Signature, m: int):
        if m < max(ar for _, ar in sig.symbols):
            raise ValueError("m smaller than the largest arity")
        self.sig = sig
        self.m = m
        self.offsets = []
        size = m
        for _, arity in sig.symbols:
            self.offsets.append(size)
            size += m ** arity
        self.size = size
        # strides for row-major argument encoding, per symbol
        self._pows = [
            [m ** (arity - 1 - j) for j in range(arity)]
            for _, arity in sig.symbols
        ]

    def index_of(self, t: LinearTerm) -> int:
        if t.is_variable:
            v = t.args[0]
            if v > self.m:
                raise ValueError(f"variable x{v} outside universe (m={self.m})")
            return v - 1
        if any(a > self.m for a in t.args):
            raise ValueError(f"term uses variables outside universe (m={self.m})")
        pows = self._pows[t.symbol]
        return self.offsets[t.symbol] + sum((a - 1) * p for a, p in zip(t.args, pows))

    def term_at(self, i: int) -> LinearTerm:
        if i < self.m:
            return LinearTerm.var(i + 1)
        for sym in range(len(self.sig) - 1, -1, -1):
            if i >= self.offsets[sym]:
                rest = i - self.offsets[sym]
                args = []
                for p in self._pows[sym]:
                    args.append(rest // p + 1)
                    rest %= p
                return LinearTerm.app(sym, args)
        raise IndexError(i)

    def varmask_at(self, i: int) -> int:
        """Bitmask of the variables of term i (bit v-1 for x_v)."""
        if i < self.m:
            return 1 << i
        mask = 0
        for sym in range(len(self.sig) - 1, -1, -1):
            if i >= self.offsets[sym]:
                rest = i - self.offsets[sym]
                for p in self._pows[sym]:
                    mask |= 1 << (rest // p)
                    rest %= p
                return mask
        raise IndexError(i)

    def render(self, i: int) -> str:
        names = variable_names(self.sig, self.m)
        return render_term(self.term_at(i), self.sig, names)


@dataclass
class AssumptionReport:
    idempotent: bool
    satisfiable: bool
    has_nontrivial_term: bool
    m: int
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.idempotent and self.satisfiable and self.has_nontrivial_term


class ClosurePartition:
    """Union-find partition of a TermUniverse realizing the least
    substitution-closed equivalence relation containing Sigma."""

    def __init__(self, spec: SystemSpec, universe: TermUniverse):
        self.spec = spec
        self.universe = universe
        self.parent = list(range(universe.size))
        self._members = None

    # -- union-find ---------------------------------------------------

    def find(self, i: int) -> int:
        parent = self.parent
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            if ri > rj:
                ri, rj = rj, ri
            self.parent[rj] = ri
        self._members = None

    def same(self, i: int, j: int) -> bool:
        return self.find(i) == self.find(j)

    # -- derived views ------------------------------------------------

    @property
    def m(self) -> int:
        return self.universe.m

    def class_members(self) -> dict[int, list[int]]:
        """Map from class root to the sorted member indices."""
        if self._members is None:
            members: dict[int, list[int]] = {}
            for i in range(self.universe.size):
                members.setdefault(self.find(i), []).append(i)
            self._members = members
        return self._members

    def class_of(self, t: LinearTerm) -> int:
        return self.find(self.universe.index_of(t))

    def dump(self) -> str:
        """One class per line, members space-separated, deterministic."""
        lines = []
        for root in sorted(self.class_members()):
            lines.append(" ".join(self.universe.render(i) for i in self.class_members()[root]))
        return "\n".join(lines) + "\n"


_cache: dict[tuple[str, int, int], ClosurePartition] = {}
_cache_lock = threading.Lock()


def build_universe(sig: Signature, m: int, *, max_vars: int = DEFAULT_MAX_VARS,
                   max_universe: int = DEFAULT_MAX_UNIVERSE) -> TermUniverse:
    if m > max_vars:
        raise BudgetError(
            f"m={m} exceeds the variable budget {max_vars} (raise with --max-vars)")
    uni = TermUniverse(sig, m)
    if uni.size > max_universe:
        raise BudgetError(
            f"universe of {uni.size} terms exceeds the budget {max_universe}")
    return uni


def compute_closure(spec: SystemSpec, m: int | None = None, *,
                    max_vars: int = DEFAULT_MAX_VARS,
                    max_universe: int = DEFAULT_MAX_UNIVERSE) -> ClosurePartition:
    """Closure over {x_1..x_m}; m defaults to the least count that is large
    enough for Sigma.  Results are cached per (system text, m)."""
    req = required_variable_count(spec)
    if m is None:
        m = req
    if m < req:
        raise DomainError(f"m={m} is too small for this system (needs {req})")
    key = (render_system(spec), m, max_universe)
    with _cache_lock:
        cached = _cache.get(key)
    if cached is not None:
        return cached

    universe = build_universe(spec.signature, m, max_vars=max_vars,
                              max_universe=max_universe)
    clo = ClosurePartition(spec, universe)
    rng_vars = range(1, m + 1)
    for ident in spec.identities:
        nvars = len(ident.variables())
        sides = []
        for side in (ident.lhs, ident.rhs):
            if side.is_variable:
                sides.append((None, side.args[0]))
            else:
                sides.append((side.symbol, side.args))
        for gamma in product(rng_vars, repeat=nvars):
            # gamma[v-1] is the image of variable v
            pair = []
            for sym, args in sides:
                if sym is None:
                    pair.append(gamma[args - 1] - 1)
                else:
                    pows = universe._pows[sym]
                    pair.append(universe.offsets[sym]
                                + sum((gamma[a - 1] - 1) * p for a, p in zip(args, pows)))
            clo.union(pair[0], pair[1])

    with _cache_lock:
        _cache.setdefault(key, clo)
    return clo


def is_satisfiable(closure: ClosurePartition) -> bool:
    """True iff no two distinct variables share a class."""
    roots = {closure.find(v) for v in range(closure.m)}
    return len(roots) == closure.m


def entails(closure: ClosurePartition, s: LinearTerm, t: LinearTerm) -> bool:
    """Syntactic entailment: s and t share a class.  Equals semantic
    entailment when the system is satisfiable and m is large enough for
    the query (see required_variable_count with the query as extra)."""
    req = required_variable_count(closure.spec, extra=Identity(s, t))
    if closure.m < req:
        raise DomainError(
            f"closure over m={closure.m} variables is too small for this query (needs {req})")
    return closure.same(closure.universe.index_of(s), closure.universe.index_of(t))


def entails_auto(spec: SystemSpec, s: LinearTerm, t: LinearTerm, *,
                 max_vars: int = DEFAULT_MAX_VARS,
                 max_universe: int = DEFAULT_MAX_UNIVERSE) -> bool:
    """entails with m enlarged automatically to fit the query."""
    m = required_variable_count(spec, extra=Identity(s, t))
    clo = compute_closure(spec, m, max_vars=max_vars, max_universe=max_universe)
    return entails(clo, s, t)


def triviality_witness(closure: ClosurePartition, t: LinearTerm) -> int | None:
    """The variable sharing t's class, if any (at most one when the system
    is satisfiable)."""
    root = closure.class_of(t)
    for v in range(closure.m):
        if closure.find(v) == root:
            return v + 1
    return None


def validate_assumptions(spec: SystemSpec, *, max_vars: int = DEFAULT_MAX_VARS,
                         max_universe: int = DEFAULT_MAX_UNIVERSE) -> AssumptionReport:
    """Check idempotence, satisfiability, and existence of a nontrivial
    linear term over the default m."""
    clo = compute_closure(spec, max_vars=max_vars, max_universe=max_universe)
    sat = is_satisfiable(clo)
    idem = True
    detail = []
    for sym in range(len(spec.signature)):
        arity = spec.signature.arity(sym)
        diag = LinearTerm.app(sym, (1,) * arity)
        if not clo.same(clo.universe.index_of(diag), 0):
            idem = False
            detail.append(f"symbol {spec.signature.name(sym)!r} is not idempotent")
    if not sat:
        detail.append("two distinct variables are forced equal")
    # variable roots; any class avoiding them is a nontrivial term
    var_roots = {clo.find(v) for v in range(clo.m)}
    nontrivial = any(r not in var_roots for r in clo.class_members())
    if not nontrivial:
        detail.append("every linear term is equivalent to a variable")
    return AssumptionReport(idem, sat, nontrivial, clo.m, "; ".join(detail))
