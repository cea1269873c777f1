"""Structure of closure classes: essential variables, symmetry groups,
orbits of the variable-permutation action, canonical transversal, and
minimal-term classification.

Orbits are computed from (symbol, argument-pattern) keys rather than by
sweeping all m! permutations: a permutation maps a member f(u) of a class
to a member with the same symbol and the same pattern, and conversely two
classes containing members with a common (symbol, pattern) key are related
by a permutation (any bijection matching the two argument tuples extends
to one).  Chaining these facts, two classes lie in one orbit iff they are
connected through shared keys.  A brute-force permutation sweep is kept
for cross-checking at small m.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from .closure import ClosurePartition, is_satisfiable, triviality_witness
from .errors import DomainError
from .terms import LinearTerm, pattern_of, substitute


@dataclass
class ClassInfo:
    class_id: int
    members: list[int]
    essential_vars: frozenset[int]
    orbit_id: int


@dataclass(frozen=True)
class SymmetryGroup:
    """Permutations of {1..d} fixing a class, as tuples p with p[i-1] the
    image of i."""

    degree: int
    elements: tuple[tuple[int, ...], ...]

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class TransversalEntry:
    class_id: int
    rep: LinearTerm
    d: int
    group: SymmetryGroup
    q: int


@dataclass(frozen=True)
class Transversal:
    entries: tuple[TransversalEntry, ...]

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class MinimalTermReport:
    term: LinearTerm
    kind: str  # binary-nontrivial | minority | two-thirds-minority | majority | semiprojection
    witness: tuple[int, ...]  # variable permutation realizing the normal form


def _mask_vars(mask: int) -> frozenset[int]:
    out = set()
    v = 1
    while mask:
        if mask & 1:
            out.add(v)
        mask >>= 1
        v += 1
    return frozenset(out)


def _member_key(universe, i: int):
    if i < universe.m:
        return ("var",)
    t = universe.term_at(i)
    return (t.symbol, pattern_of(t.args).labels)


class _KeyUF:
    def __init__(self):
        self.parent = {}

    def find(self, k):
        p = self.parent
        if k not in p:
            p[k] = k
            return k
        root = k
        while p[root] != root:
            root = p[root]
        while p[k] != root:
            p[k], k = root, p[k]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def class_infos(closure: ClosurePartition) -> dict[int, ClassInfo]:
    """ClassInfo per class root, with orbit ids.  Cached on the closure."""
    cached = getattr(closure, "_class_infos", None)
    if cached is not None:
        return cached
    uni = closure.universe
    members = closure.class_members()
    ess_mask: dict[int, int] = {}
    min_pop: dict[int, int] = {}
    first_key: dict[int, tuple] = {}
    keys = _KeyUF()
    for root, mem in members.items():
        emask = -1
        mp = uni.m + 1
        for i in mem:
            vm = uni.varmask_at(i)
            emask &= vm
            mp = min(mp, vm.bit_count())
            k = _member_key(uni, i)
            if root in first_key:
                keys.union(first_key[root], k)
            else:
                first_key[root] = keys.find(k)
        ess_mask[root] = emask
        min_pop[root] = mp
    # orbit id: least class root sharing a key component
    orbit_id: dict[int, int] = {}
    group_min: dict[tuple, int] = {}
    for root in members:
        kr = keys.find(first_key[root])
        if kr not in group_min or root < group_min[kr]:
            group_min[kr] = root
    infos = {}
    for root, mem in members.items():
        emask = ess_mask[root]
        if emask == 0:
            raise DomainError("class with empty essential variable set; "
                              "system is not idempotent or not satisfiable")
        if min_pop[root] != emask.bit_count():
            raise AssertionError(
                "no member realizes the essential variable set exactly; "
                "this indicates a closure bug or a non-idempotent system")
        infos[root] = ClassInfo(
            class_id=root,
            members=mem,
            essential_vars=_mask_vars(emask),
            orbit_id=group_min[keys.find(first_key[root])],
        )
    closure._class_infos = infos
    return infos


def orbit_partition(closure: ClosurePartition) -> list[ClassInfo]:
    """All ClassInfos, sorted by class id."""
    infos = class_infos(closure)
    return [infos[r] for r in sorted(infos)]


def orbit_partition_bruteforce(closure: ClosurePartition) -> dict[int, int]:
    """Orbit ids via the m! permutation sweep; cross-check oracle for the
    key-based computation (use at small m only)."""
    uni = closure.universe
    members = closure.class_members()
    uf = _KeyUF()
    for perm in permutations(range(1, uni.m + 1)):
        gamma = {v: perm[v - 1] for v in range(1, uni.m + 1)}
        for root in members:
            t = uni.term_at(root)
            image_root = closure.find(uni.index_of(substitute(t, gamma)))
            uf.union(root, image_root)
    groups: dict[int, list[int]] = {}
    for root in members:
        groups.setdefault(uf.find(root), []).append(root)
    out = {}
    for g in groups.values():
        oid = min(g)
        for root in g:
            out[root] = oid
    return out


def essential_variables(closure: ClosurePartition, class_id: int) -> frozenset[int]:
    infos = class_infos(closure)
    if class_id not in infos:
        raise DomainError(f"{class_id} is not a class root")
    return infos[class_id].essential_vars


def symmetry_group(closure: ClosurePartition, rep: LinearTerm) -> SymmetryGroup:
    """All permutations pi of the representative's variables {x_1..x_d}
    with rep[pi] in the same class."""
    vs = rep.variables()
    d = len(vs)
    if vs != frozenset(range(1, d + 1)):
        raise DomainError("representative must use exactly x_1..x_d")
    root = closure.class_of(rep)
    elems = []
    for perm in permutations(range(1, d + 1)):
        gamma = {v: perm[v - 1] for v in range(1, d + 1)}
        if closure.class_of(substitute(rep, gamma)) == root:
            elems.append(perm)
    return SymmetryGroup(d, tuple(elems))


def canonical_transversal(closure: ClosurePartition) -> Transversal:
    """One entry per orbit.  Within an orbit, restrict to classes whose
    essential set is the initial segment {x_1..x_d} (the images of the
    order-preserving relabelings), pick the least class id, then the least
    member whose variable set equals the essential set.  Entry 0 is the
    variable class with representative x_1."""
    if not is_satisfiable(closure):
        raise DomainError("system is unsatisfiable; no transversal")
    infos = class_infos(closure)
    uni = closure.universe
    orbits: dict[int, list[ClassInfo]] = {}
    for info in infos.values():
        orbits.setdefault(info.orbit_id, []).append(info)

    var_orbit = infos[closure.find(0)].orbit_id
    entries = [TransversalEntry(
        class_id=closure.find(0),
        rep=LinearTerm.var(1),
        d=1,
        group=SymmetryGroup(1, ((1,),)),
        q=1,
    )]
    rest = []
    for oid, classes in orbits.items():
        if oid == var_orbit:
            continue
        candidates = []
        for info in classes:
            d = len(info.essential_vars)
            if info.essential_vars == frozenset(range(1, d + 1)):
                candidates.append(info)
        if not candidates:
            raise AssertionError("orbit without an initial-segment class")
        chosen = min(candidates, key=lambda c: c.class_id)
        d = len(chosen.essential_vars)
        target = frozenset(range(1, d + 1))
        rep_idx = None
        for i in chosen.members:
            if uni.term_at(i).variables() == target:
                rep_idx = i
                break
        rep = uni.term_at(rep_idx)
        grp = symmetry_group(closure, rep)
        fact = 1
        for j in range(2, d + 1):
            fact *= j
        assert fact % len(grp) == 0
        rest.append(TransversalEntry(chosen.class_id, rep, d, grp, fact // len(grp)))
    rest.sort(key=lambda e: (e.d, e.class_id))
    return Transversal(tuple(entries + rest))


def _is_trivial(closure: ClosurePartition, t: LinearTerm) -> bool:
    return triviality_witness(closure, t) is not None


def is_minimal(closure: ClosurePartition, t: LinearTerm) -> bool:
    """Nontrivial, and every proper identification minor trivial.  It is
    enough to check the pairwise identifications x_a -> x_b: every
    non-injective self-map factors through one, and minors of trivial
    terms are trivial."""
    if t.is_variable or _is_trivial(closure, t):
        return False
    vs = sorted(t.variables())
    for a in vs:
        for b in vs:
            if a == b:
                continue
            gamma = {v: (b if v == a else v) for v in vs}
            if not _is_trivial(closure, substitute(t, gamma)):
                return False
    return True


def minimal_terms(closure: ClosurePartition) -> list[LinearTerm]:
    """Minimal terms among the transversal representatives, one per orbit."""
    trans = canonical_transversal(closure)
    return [e.rep for e in trans.entries[1:] if is_minimal(closure, e.rep)]


def _entails_args(closure, t: LinearTerm, args: tuple[int, ...], var: int) -> bool:
    """Does t with variables substituted per args equal variable var?"""
    gamma = {i + 1: a for i, a in enumerate(args)}
    return closure.class_of(substitute(t, gamma)) == closure.class_of(LinearTerm.var(var))


def classify_minimal(closure: ClosurePartition, t: LinearTerm) -> MinimalTermReport:
    """Classify a minimal term.  Cases are checked in a fixed order over
    all variable permutations; the first match wins, with the witness
    permutation recorded.  Arity >= 4 minimal terms are semiprojections."""
    if not is_minimal(closure, t):
        raise DomainError("term is not minimal")
    vs = sorted(t.variables())
    d = len(vs)
    ident = tuple(range(1, d + 1))
    if d == 2:
        return MinimalTermReport(t, "binary-nontrivial", ident)
    if d == 3:
        cases = (
            # (kind, [(args pattern in x/y over x1,x2, target var)])
            ("minority", (((1, 2, 2), 1), ((2, 1, 2), 1), ((2, 2, 1), 1))),
            ("two-thirds-minority", (((1, 2, 2), 1), ((1, 2, 1), 1), ((2, 2, 1), 1))),
            ("majority", (((1, 2, 2), 2), ((2, 1, 2), 2), ((2, 2, 1), 2))),
        )
        for kind, conds in cases:
            for perm in permutations(ident):
                u = substitute(t, {v: perm[v - 1] for v in ident})
                if all(_entails_args(closure, u, args, var) for args, var in conds):
                    return MinimalTermReport(t, kind, perm)
    # semiprojection: some coordinate i such that every pairwise
    # identification minor collapses to the image of x_i
    for i in ident:
        good = True
        for a in ident:
            for b in ident:
                if a == b:
                    continue
                gamma = {v: (b if v == a else v) for v in ident}
                expect = gamma[i]
                if triviality_witness(closure, substitute(t, gamma)) != expect:
                    good = False
                    break
            if not good:
                break
        if good:
            # witness permutation moving the projection coordinate first
            perm = (i,) + tuple(v for v in ident if v != i)
            inv = [0] * d
            for pos, v in enumerate(perm):
                inv[v - 1] = pos + 1
            return MinimalTermReport(t, "semiprojection", tuple(inv))
    raise AssertionError("minimal term fits no classification case")


def essentially_different(closure: ClosurePartition, s: LinearTerm, t: LinearTerm) -> bool:
    infos = class_infos(closure)
    return infos[closure.class_of(s)].orbit_id != infos[closure.class_of(t)].orbit_id
