"""Closure-components, levels, the vertex preorder and admissible orderings.

Ordered structures carry the order symbol; every closure computation
ignores it.  Vertex closures are compared by a key (size, unordered type,
ordered type) which is the fixed total order on ordered closure-extension
types; smaller closures always come first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Sequence

from .budget import DEFAULT, Budget, BudgetExceeded, Counter
from .embeddings import canonical_code, canonical_form, embeddings, ordered_code
from .structures import Structure, StructureError, bits, closed_masks, closure_mask, disjoint_union


# analysis -------------------------------------------------------------------

@dataclass
class ClosureAnalysis:
    closure: list[int]          # vertex -> closure bitmask
    component: list[int]        # vertex -> component id
    components: list[list[int]]
    level: list[int]

    def cc_mask(self, v: int) -> int:
        m = 0
        for u in self.components[self.component[v]]:
            m |= 1 << u
        return m

    def below(self, v: int) -> int:
        """Cl(v) minus the component of v."""
        return self.closure[v] & ~self.cc_mask(v)


def analyze(S: Structure) -> ClosureAnalysis:
    n = S.n
    cl = [closure_mask(S, 1 << v) for v in range(n)]
    comp_of: dict[int, int] = {}
    component = []
    components: list[list[int]] = []
    for v in range(n):
        if cl[v] not in comp_of:
            comp_of[cl[v]] = len(components)
            components.append([])
        component.append(comp_of[cl[v]])
        components[comp_of[cl[v]]].append(v)
    level = [-1] * n
    # closures strictly shrink when leaving the component, so sort by closure size
    for v in sorted(range(n), key=lambda v: bin(cl[v]).count("1")):
        cc = 0
        for u in components[component[v]]:
            cc |= 1 << u
        rest = bits(cl[v] & ~cc)
        level[v] = 0 if not rest else 1 + max(level[u] for u in rest)
    return ClosureAnalysis(cl, component, components, level)


def extension_component(S: Structure) -> list[int] | None:
    """The top component if S is a closure-extension (some vertex generates S)."""
    full = (1 << S.n) - 1
    if S.n == 0:
        return None
    top = [v for v in range(S.n) if closure_mask(S, 1 << v) == full]
    return top or None


def is_closure_extension(S: Structure) -> bool:
    return extension_component(S) is not None


def core(S: Structure) -> list[int]:
    """A° = vertices outside the top component."""
    top = extension_component(S)
    if top is None:
        raise StructureError("not a closure-extension")
    return [v for v in range(S.n) if v not in top]


def extensions(S: Structure) -> list[int]:
    """Distinct vertex closures of S as bitmasks (each is a closure-extension)."""
    return sorted(set(analyze(S).closure))


# ordered closure types --------------------------------------------------------

def _ordered_restrict(S: Structure, mask: int) -> Structure:
    return S.restrict(bits(mask))


class _Keys:
    """Caches type keys of ordered vertex closures."""

    def __init__(self):
        self.unordered: dict = {}

    def key(self, X: Structure) -> tuple:
        U = X.without_order()
        k = U.key()[2:]
        if k not in self.unordered:
            self.unordered[k] = canonical_code(U)
        return (X.n, self.unordered[k], ordered_code(X, X.order()))


_KEYS = _Keys()


def closure_key(S: Structure, v: int, an: ClosureAnalysis | None = None) -> tuple:
    an = an or analyze(S)
    return _KEYS.key(_ordered_restrict(S, an.closure[v]))


def similar(X: Structure, Y: Structure) -> bool:
    """Isomorphic closure-extensions, by a map increasing on the cores."""
    Xu, Yu = X.without_order(), Y.without_order()
    if Xu.n != Yu.n:
        return False
    cx, cy = core(Xu), core(Yu)
    rx = {v: i for i, v in enumerate(X.order())}
    ry = {v: i for i, v in enumerate(Y.order())}
    sx = sorted(cx, key=rx.__getitem__)
    sy = sorted(cy, key=ry.__getitem__)
    if len(sx) != len(sy):
        return False
    restrict = [range(Yu.n)] * Xu.n
    restrict = [list(r) for r in restrict]
    for a, b in zip(sx, sy):
        restrict[a] = [b]
    return bool(embeddings(Xu, Yu, restrict=restrict, limit=1))


def homologous(S: Structure, u: int, v: int, an: ClosureAnalysis | None = None) -> bool:
    """Closures of u and v agree off their components and are isomorphic over that part."""
    an = an or analyze(S)
    if an.component[u] == an.component[v]:
        return True
    ru, rv = an.below(u), an.below(v)
    if ru != rv:
        return False
    cu, cv = bits(an.closure[u]), bits(an.closure[v])
    if len(cu) != len(cv):
        return False
    U = S.without_order()
    X, Y = U.restrict(cu), U.restrict(cv)
    pos_v = {w: i for i, w in enumerate(cv)}
    restrict = []
    for w in cu:
        if ru >> w & 1:
            restrict.append([pos_v[w]])
        else:
            restrict.append([pos_v[x] for x in cv if not (rv >> x & 1)])
    return bool(embeddings(X, Y, restrict=restrict, limit=1))


class Preorder:
    """The vertex preorder of an ordered structure, restricted to ``verts``.

    ``order`` lists the vertices of ``verts`` least first; closures of those
    vertices must lie inside ``verts``.
    """

    def __init__(self, S: Structure, order: Sequence[int], an: ClosureAnalysis | None = None):
        self.S = S.without_order()
        self.an = an or analyze(self.S)
        self.pos = {v: i for i, v in enumerate(order)}
        self.keys: dict[int, tuple] = {}
        self.lists: dict[int, list[int]] = {}
        for v in order:
            cl = bits(self.an.closure[v])
            if any(x not in self.pos for x in cl):
                raise StructureError("vertex set is not a union of closures")
            X = self.S.restrict(cl)
            loc = sorted(range(len(cl)), key=lambda i: self.pos[cl[i]])
            X = X.with_order(loc)
            self.keys[v] = _KEYS.key(X)
            self.lists[v] = sorted(self.pos[x] for x in bits(self.an.below(v)))
        self._hom: dict = {}

    def homologous(self, u: int, v: int) -> bool:
        k = (min(u, v), max(u, v))
        if k not in self._hom:
            self._hom[k] = homologous(self.S, u, v, self.an)
        return self._hom[k]

    def leq(self, u: int, v: int) -> bool:
        """u precedes-or-equals v: homologous first, then type key, then lexicographic."""
        if u == v or self.homologous(u, v):
            return True
        ku, kv = self.keys[u], self.keys[v]
        if ku != kv:
            return ku < kv
        return self.lists[u] <= self.lists[v]

    def strictly(self, u: int, v: int) -> bool:
        return self.leq(u, v) and not self.leq(v, u)


def precedes(S: Structure, u: int, v: int) -> bool:
    return Preorder(S, S.order()).leq(u, v)


def refines_preorder(S: Structure, order: Sequence[int], an: ClosureAnalysis | None = None) -> bool:
    """Strictly preceding vertices come first in ``order``."""
    P = Preorder(S, order, an)
    for i, u in enumerate(order):
        for v in order[:i]:
            if P.strictly(u, v):
                return False
    return True


def components_are_intervals(S: Structure, order: Sequence[int], an: ClosureAnalysis | None = None) -> bool:
    an = an or analyze(S.without_order())
    seen_done: set[int] = set()
    current = None
    for v in order:
        c = an.component[v]
        if c != current:
            if c in seen_done:
                return False
            if current is not None:
                seen_done.add(current)
            current = c
    return True


def satisfies_a3_a4(S: Structure, order: Sequence[int] | None = None, an: ClosureAnalysis | None = None) -> bool:
    order = list(S.order()) if order is None else list(order)
    an = an or analyze(S.without_order())
    return components_are_intervals(S, order, an) and refines_preorder(S, order, an)


# the admissible class -----------------------------------------------------

def _ocode(S: Structure) -> tuple:
    return ordered_code(S, S.order())


def orderings_of(S: Structure) -> Iterable[Structure]:
    """All orderings of an unordered structure, permutations in lexicographic order."""
    U = S.without_order()
    for perm in permutations(range(U.n)):
        yield U.with_order(perm)


class AdmissibleClass:
    """Greedy class of admissible orderings, decided lazily and memoized.

    An ordering is admitted when it satisfies A3 and A4, all its proper
    substructures are admitted, and, for closure-extensions, no similar but
    non-isomorphic ordering was admitted before.  The orderings of one
    closure-extension type are all decided together, in lexicographic
    permutation order of the canonical form, the first time the type is met.
    """

    def __init__(self, budget: Budget = DEFAULT):
        self.memo: dict[tuple, bool] = {}
        self.ext_types: dict[tuple, set] = {}
        self.budget = budget

    def __contains__(self, S: Structure) -> bool:
        return self.admits(S)

    def admits(self, S: Structure) -> bool:
        if not S.language.has_order:
            raise StructureError("admissibility is a property of ordered structures")
        code = (S.language, _ocode(S))
        if code in self.memo:
            return self.memo[code]
        ok = self._o1_o2(S)
        if ok and is_closure_extension(S.without_order()):
            ok = code[1] in self._decide_type(S.without_order())
        self.memo[code] = ok
        return ok

    def _o1_o2(self, S: Structure) -> bool:
        U = S.without_order()
        if not satisfies_a3_a4(S):
            return False
        full = (1 << S.n) - 1
        for m in closed_masks(U):
            if m == full:
                continue
            if not self.admits(S.restrict(bits(m))):
                return False
        return True

    def _decide_type(self, U: Structure) -> set:
        tcode = (U.language, canonical_code(U))
        if tcode in self.ext_types:
            return self.ext_types[tcode]
        base = canonical_form(U)
        admitted: list[Structure] = []
        codes: set = set()
        for X in orderings_of(base):
            c = _ocode(X)
            if c in codes:
                continue
            if not self._o1_o2(X):
                continue
            if any(similar(X, Y) for Y in admitted):
                continue
            admitted.append(X)
            codes.add(c)
        self.ext_types[tcode] = codes
        return codes

    def admitted_orderings(self, S: Structure) -> list[Structure]:
        """Admitted orderings of S, one per ordered isomorphism type, sorted by code."""
        out = {}
        for X in orderings_of(S):
            c = _ocode(X)
            if c not in out and self.admits(X):
                out[c] = X
        return [out[c] for c in sorted(out)]


class FreeOrderings:
    """Every ordering is admitted."""

    def admits(self, S: Structure) -> bool:
        return True

    __contains__ = admits

    def admitted_orderings(self, S: Structure) -> list[Structure]:
        out = {}
        for X in orderings_of(S):
            out.setdefault(_ocode(X), X)
        return [out[c] for c in sorted(out)]


class ListedOrderings:
    """A class given by a list of ordered structures (closed under isomorphism)."""

    def __init__(self, members: Iterable[Structure]):
        self.codes = {(S.language, _ocode(S)) for S in members}

    def admits(self, S: Structure) -> bool:
        return (S.language, _ocode(S)) in self.codes

    __contains__ = admits

    def admitted_orderings(self, S: Structure) -> list[Structure]:
        out = {}
        for X in orderings_of(S):
            c = _ocode(X)
            if c not in out and self.admits(X):
                out[c] = X
        return [out[c] for c in sorted(out)]


def check_universe(universe: Sequence[Structure]) -> list[str]:
    """Problems with substructure closure of the universe (empty when closed)."""
    codes = {canonical_code(S.without_order()) for S in universe}
    problems = []
    for i, S in enumerate(universe):
        U = S.without_order()
        for m in closed_masks(U):
            if canonical_code(U.restrict(bits(m))) not in codes:
                problems.append(f"member {i}: closed subset {[U.names[v] for v in bits(m)]} missing")
                break
    return problems


def build_admissible_class(universe: Sequence[Structure], budget: Budget = DEFAULT) -> tuple[AdmissibleClass, list[Structure]]:
    """Decide every ordering of every universe member, smallest first.

    Returns the deciding class and the admitted orderings (one per ordered
    isomorphism type).
    """
    problems = check_universe(universe)
    if problems:
        raise StructureError("universe is not closed under substructures: " + problems[0])
    O = AdmissibleClass(budget)
    admitted = []
    for S in sorted(universe, key=lambda S: (S.n, canonical_code(S.without_order()))):
        admitted.extend(O.admitted_orderings(S))
    return O, admitted


# axiom checks ---------------------------------------------------------------

@dataclass
class AxiomReport:
    violations: dict[str, list[str]] = field(default_factory=lambda: {f"A{i}": [] for i in range(1, 7)})
    checked: dict[str, int] = field(default_factory=lambda: {f"A{i}": 0 for i in range(1, 7)})

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def lines(self) -> list[str]:
        out = []
        for k in sorted(self.violations):
            v = self.violations[k]
            out.append(f"{k} {'pass' if not v else 'fail'} checked={self.checked[k]}" + (f" first={v[0]}" if v else ""))
        return out


def _name_order(S: Structure, order: Sequence[int]) -> str:
    return " ".join(S.names[v] for v in order)


def check_admissibility_axioms(O, universe: Sequence[Structure], a5: bool = True,
                               budget: Budget = DEFAULT) -> AxiomReport:
    rep = AxiomReport()
    counter = Counter(budget.max_subsets, "axiom check orderings")
    admitted_ext: dict[tuple, list[Structure]] = {}
    for S in universe:
        U = S.without_order()
        adm = O.admitted_orderings(U)
        rep.checked["A1"] += 1
        if not adm:
            rep.violations["A1"].append(f"no admitted ordering of {list(U.names)}")
        an = analyze(U)
        for X in adm:
            counter.tick()
            rep.checked["A2"] += 1
            for m in closed_masks(U):
                if not O.admits(X.restrict(bits(m))):
                    rep.violations["A2"].append(f"{_name_order(X, X.order())}: substructure {[U.names[v] for v in bits(m)]} not admitted")
                    break
            rep.checked["A3"] += 1
            if not refines_preorder(X, X.order(), an):
                rep.violations["A3"].append(_name_order(X, X.order()))
            rep.checked["A4"] += 1
            if not components_are_intervals(X, X.order(), an):
                rep.violations["A4"].append(_name_order(X, X.order()))
            if is_closure_extension(U):
                admitted_ext.setdefault(canonical_code(U), []).append(X)
        if a5:
            _check_a5(O, U, an, rep, counter)
    for group in admitted_ext.values():
        for i, X in enumerate(group):
            for Y in group[i + 1:]:
                rep.checked["A6"] += 1
                if similar(X, Y) and _ocode(X) != _ocode(Y):
                    rep.violations["A6"].append(f"{_name_order(X, X.order())} ~ {_name_order(Y, Y.order())}")
    return rep


def _check_a5(O, U: Structure, an: ClosureAnalysis, rep: AxiomReport, counter: Counter) -> None:
    """For every union A of vertex closures of U and every order on A meeting
    (a) and (b), some admitted ordering of U extends it."""
    closures = sorted(set(an.closure))
    unions = set()
    for pick in range(1 << len(closures)):
        m = 0
        for i, c in enumerate(closures):
            if pick >> i & 1:
                m |= c
        unions.add(m)
    adm_orders = [perm for perm in permutations(range(U.n)) if O.admits(U.with_order(perm))]
    closed = closed_masks(U)
    for A in sorted(unions):
        verts = bits(A)
        inside = [m for m in closed if m & ~A == 0]
        for perm in permutations(verts):
            counter.tick()
            # (a): the preorder and interval conditions on A
            if not components_are_intervals(U, perm, an) or not refines_preorder(U, list(perm), an):
                continue
            pos = {v: i for i, v in enumerate(perm)}
            # (b): every substructure inside A is admitted under this order
            ok = True
            for m in inside:
                sub = bits(m)
                X = U.restrict(sub).with_order(sorted(range(len(sub)), key=lambda i: pos[sub[i]]))
                if not O.admits(X):
                    ok = False
                    break
            if not ok:
                continue
            rep.checked["A5"] += 1
            if not any(_restricts_to(order, perm) for order in adm_orders):
                rep.violations["A5"].append(f"order {' '.join(U.names[v] for v in perm)} on {list(U.names)}")


def _restricts_to(order: Sequence[int], partial: Sequence[int]) -> bool:
    keep = set(partial)
    return [v for v in order if v in keep] == list(partial)


# ordering property ----------------------------------------------------------

@dataclass
class OrderingPropertyResult:
    holds: bool
    checked: int
    witness: Structure | None = None      # an admitted ordering of B missing a copy
    missing: Structure | None = None      # the ordering of A it misses

    def __bool__(self):
        return self.holds


def contains_ordered_copy(B: Structure, A: Structure) -> bool:
    return bool(embeddings(A, B, limit=1))


def verify_ordering_property(A: Structure, B: Structure, O, all_orderings_of_a: bool = False,
                             budget: Budget = DEFAULT) -> OrderingPropertyResult:
    """Does every admitted ordering of B contain a copy of A?

    With ``all_orderings_of_a`` every admitted ordering of A is required.
    """
    Bu = B.without_order()
    targets = O.admitted_orderings(A.without_order()) if all_orderings_of_a else [A]
    counter = Counter(budget.max_subsets, "orderings of B")
    checked = 0
    for perm in permutations(range(Bu.n)):
        counter.tick()
        X = Bu.with_order(perm)
        if not O.admits(X):
            continue
        checked += 1
        for T in targets:
            if not contains_ordered_copy(X, T):
                return OrderingPropertyResult(False, checked, X, T)
    return OrderingPropertyResult(True, checked)


def level_ordering(S: Structure) -> Structure:
    """Order by level, ties by vertex index (root-distance order for forests)."""
    U = S.without_order()
    an = analyze(U)
    return U.with_order(sorted(range(U.n), key=lambda v: (an.level[v], v)))


# witness for the ordering property -----------------------------------------

def _homologous_pairs(U: Structure, an: ClosureAnalysis) -> list[tuple[int, int]]:
    pairs = []
    for i, Ci in enumerate(an.components):
        for Cj in an.components[i + 1:]:
            if homologous(U, Ci[0], Cj[0], an):
                pairs.extend((u, v) for u in Ci for v in Cj)
    return pairs


def _closure_isos(A: Structure, an: ClosureAnalysis) -> list[tuple[list[int], list[int]]]:
    """Order isomorphisms between ordered-isomorphic vertex closures of A (as vertex lists)."""
    rank = {v: i for i, v in enumerate(A.order())}
    cls = sorted(set(an.closure))
    out = []
    for i, X in enumerate(cls):
        for Y in cls[i + 1:]:
            xs = sorted(bits(X), key=rank.__getitem__)
            ys = sorted(bits(Y), key=rank.__getitem__)
            if len(xs) != len(ys):
                continue
            SX = A.restrict(xs)
            SY = A.restrict(ys)
            if _ocode(SX) == _ocode(SY):
                out.append((xs, ys))
    return out


def qualifying_reorderings(A: Structure, O, budget: Budget = DEFAULT) -> list[Structure]:
    """Admitted reorderings of A keeping (a) the order between distinct homologous
    components and (b) every order isomorphism between vertex closures."""
    return list(_qualifying(A, O, Counter(budget.max_subsets, "reorderings")))


def _interleavings(chains: list[list[int]], counter: Counter):
    """All merges of the chains (each kept in order), lexicographically by chain index."""
    total = sum(len(c) for c in chains)
    idx = [0] * len(chains)
    cur: list[int] = []

    def rec():
        if len(cur) == total:
            counter.tick()
            yield list(cur)
            return
        for k, c in enumerate(chains):
            if idx[k] < len(c):
                cur.append(c[idx[k]])
                idx[k] += 1
                yield from rec()
                idx[k] -= 1
                cur.pop()

    yield from rec()


def ordering_witness_b0(A: Structure, O, budget: Budget = DEFAULT) -> Structure:
    """Disjoint union of all qualifying reorderings of A, ordered admissibly."""
    if not O.admits(A):
        raise StructureError("A is not admitted")
    parts = qualifying_reorderings(A, O)
    U, maps = disjoint_union([X.without_order() for X in parts])
    chains = [[mp[v] for v in X.order()] for X, mp in zip(parts, maps)]
    counter = Counter(budget.max_subsets, "orders of the witness")
    for order in _interleavings(chains, counter):
        X = U.with_order(order)
        if O.admits(X):
            return X
    raise BudgetExceeded("no admitted merge of the reorderings", 0)


def witness_claim(A: Structure, B0: Structure, O, budget: Budget = DEFAULT) -> tuple[bool, int]:
    """Every admitted reordering of B0 keeping (a) and (b) contains a copy of A.

    Returns (holds, number of reorderings checked).
    """
    checked = 0
    for X in _qualifying(B0, O, Counter(budget.max_subsets, "reorderings of the witness")):
        checked += 1
        if not contains_ordered_copy(X, A):
            return False, checked
    return True, checked


def _qualifying(A: Structure, O, counter: Counter):
    U = A.without_order()
    an = analyze(U)
    rank = {v: i for i, v in enumerate(A.order())}
    hpairs = _homologous_pairs(U, an)
    isos = _closure_isos(A, an)
    for perm in permutations(range(U.n)):
        counter.tick()
        pos = {v: i for i, v in enumerate(perm)}
        if any((rank[u] < rank[v]) != (pos[u] < pos[v]) for u, v in hpairs):
            continue
        # the map xs[i] -> ys[i] must stay increasing in the new order
        if any(sorted(range(len(xs)), key=lambda i: pos[xs[i]]) != sorted(range(len(ys)), key=lambda i: pos[ys[i]])
               for xs, ys in isos):
            continue
        X = U.with_order(perm)
        if O.admits(X):
            yield X
