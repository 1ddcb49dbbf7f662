"""Partite systems, the product construction with combinatorial lines,
Ramsey arrows and the picture-by-picture partite construction."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Mapping, Sequence

from .budget import DEFAULT, Budget, BudgetExceeded, Counter
from .embeddings import copies, embeddings
from .irreducible import _components, irreducible_substructures
from .structures import (EMBEDDING, NONE, ORDER, Language, Structure, StructureError, check_map,
                         closure_mask, disjoint_union)


# partite systems ------------------------------------------------------------

@dataclass(frozen=True)
class PartiteSystem:
    """``carrier`` split into parts indexed by the vertices of ``base``.

    ``proj[v]`` is the base vertex whose part contains carrier vertex v.
    """
    base: Structure
    carrier: Structure
    proj: tuple[int, ...]
    # coordinate words of product systems, keyed by carrier index
    coords: tuple | None = field(default=None, compare=False)

    def part(self, i: int) -> list[int]:
        return [v for v in range(self.carrier.n) if self.proj[v] == i]

    def parts(self) -> list[list[int]]:
        out = [[] for _ in range(self.base.n)]
        for v, i in enumerate(self.proj):
            out[i].append(v)
        return out

    def part_names(self) -> dict[str, list[str]]:
        return {self.base.names[i]: [self.carrier.names[v] for v in p] for i, p in enumerate(self.parts())}

    @classmethod
    def from_parts(cls, base: Structure, carrier: Structure, parts: Mapping[str, Sequence[str]]) -> "PartiteSystem":
        proj = [-1] * carrier.n
        for b, members in parts.items():
            i = base.index(b)
            for v in members:
                j = carrier.index(v)
                if proj[j] >= 0:
                    raise StructureError(f"vertex {v} lies in two parts")
                proj[j] = i
        if -1 in proj:
            raise StructureError("parts do not cover the carrier")
        return cls(base, carrier, tuple(proj))

    @classmethod
    def trivial(cls, A: Structure) -> "PartiteSystem":
        """A as a partite system over itself with singleton parts."""
        return cls(A, A, tuple(range(A.n)))


def _transversal(proj: Sequence[int], verts) -> bool:
    vs = set(verts)
    return len({proj[x] for x in vs}) == len(vs)


def partite_violation(sys: PartiteSystem) -> str | None:
    """First violated partite condition, or None."""
    A, B, proj = sys.base, sys.carrier, sys.proj
    if len(proj) != B.n or any(not (0 <= i < A.n) for i in proj):
        return "projection is not a map onto base vertices"
    if not B.language.has_order:
        A = A.without_order()
    if check_map(B, A, proj) == NONE:
        return "projection is not a homomorphism"
    for name, _ in B.language.relation_symbols:
        for t in sorted(B.relation(name)):
            if not _transversal(proj, t):
                return f"relation {name} tuple {tuple(B.names[x] for x in t)} is not transversal"
    for name, dom, img in B.entries():
        if not _transversal(proj, list(dom) + sorted(img)):
            return f"function {name} entry at {tuple(B.names[x] for x in dom)} is not transversal"
    return None


def validate_partite(sys: PartiteSystem) -> bool:
    return partite_violation(sys) is None


def sections(A: Structure, sys: PartiteSystem) -> list[tuple[int, ...]]:
    """Embeddings e of A into the carrier with proj(e(a)) = a, sorted.

    These are the copies of A the product construction tracks; each is given
    as the tuple of carrier vertices indexed by A's vertices.
    """
    A = A if sys.carrier.language.has_order else A.without_order()
    return embeddings(A, sys.carrier, restrict=sys.parts())


# product construction -------------------------------------------------------

def partite_power(B: PartiteSystem, N: int, budget: Budget = DEFAULT) -> PartiteSystem:
    """The N-th power: part i becomes all maps {1..N} -> part i of B.

    A tuple of maps is related when it is related in every coordinate; a
    function is defined on a tuple of maps when it is defined in every
    coordinate, and its image is read off coordinatewise, matching image
    vertices by part.
    """
    if N < 1:
        raise ValueError("N must be positive")
    bad = partite_violation(B)
    if bad:
        raise StructureError(f"invalid partite system: {bad}")
    S = B.carrier
    parts = B.parts()
    total = sum(len(p) ** N for p in parts)
    budget.vertices(total, "vertices of the partite power")
    words: list[tuple[int, ...]] = []
    proj: list[int] = []
    for i, p in enumerate(parts):
        for w in product(p, repeat=N):
            words.append(w)
            proj.append(i)
    index = {w: k for k, w in enumerate(words)}
    names = [",".join(S.names[x] for x in w) for w in words]

    def sig(t):
        return tuple(B.proj[x] for x in t)

    rels: dict[str, list[tuple[int, ...]]] = {}
    for name, _ in S.language.relation_symbols:
        groups: dict[tuple, list[tuple[int, ...]]] = {}
        for t in sorted(S.relation(name)):
            groups.setdefault(sig(t), []).append(t)
        out = []
        for g in groups.values():
            for seq in product(g, repeat=N):
                out.append(tuple(index[tuple(t[k] for t in seq)] for k in range(len(seq[0]))))
        rels[name] = out
    funcs: dict[str, dict] = {}
    for name, _, _ in S.language.functions:
        table = S.function(name)
        groups = {}
        for dom in sorted(table):
            groups.setdefault(sig(dom), []).append(dom)
        out = {}
        for g in groups.values():
            img_parts = sorted(B.proj[x] for x in table[g[0]])
            by_part = [{B.proj[x]: x for x in table[d]} for d in g]
            for seq in product(range(len(g)), repeat=N):
                dom = tuple(index[tuple(g[j][k] for j in seq)] for k in range(len(g[0])))
                img = [index[tuple(by_part[j][p] for j in seq)] for p in img_parts]
                out[dom] = img
        funcs[name] = out
    C = Structure(S.language, names, rels, funcs, check=False)
    return PartiteSystem(B.base, C, tuple(proj), tuple(words))


@dataclass(frozen=True)
class CombinatorialLine:
    """A line in [t]^N: coordinates in ``moving`` carry the running letter,
    the others carry ``fixed[j]``.  Coordinates are 0-based here."""
    N: int
    moving: frozenset
    fixed: tuple

    def __post_init__(self):
        if not self.moving:
            raise ValueError("a line needs a nonempty moving set")
        if len(self.fixed) != self.N or any((self.fixed[j] is None) != (j in self.moving) for j in range(self.N)):
            raise ValueError("fixed assignment must be given exactly off the moving set")

    def word(self, s: int) -> tuple[int, ...]:
        return tuple(s if j in self.moving else self.fixed[j] for j in range(self.N))

    def words(self, t: int) -> list[tuple[int, ...]]:
        return [self.word(s) for s in range(t)]


def enumerate_lines(N: int, t: int):
    """All (t+1)^N - t^N lines of [t]^N in a fixed order."""
    for pattern in product([None, *range(t)], repeat=N):
        if None in pattern:
            moving = frozenset(j for j, x in enumerate(pattern) if x is None)
            yield CombinatorialLine(N, moving, pattern)


def count_lines(N: int, t: int) -> int:
    return (t + 1) ** N - t ** N


def find_monochromatic_line(N: int, t: int, coloring) -> CombinatorialLine | None:
    """First line whose t words all get the same color, or None.

    ``coloring`` is a mapping or a callable on words (tuples over range(t)).
    """
    color = coloring if callable(coloring) else coloring.__getitem__
    for line in enumerate_lines(N, t):
        ws = line.words(t)
        c = color(ws[0])
        if all(color(w) == c for w in ws[1:]):
            return line
    return None


def line_embedding(C: PartiteSystem, B: PartiteSystem, line: CombinatorialLine,
                   cps: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """The embedding B -> C attached to a line.

    A vertex v of part p goes to the word equal to v on the moving
    coordinates and to the part-p vertex of copy ``cps[fixed[j]]`` elsewhere.
    ``cps`` are sections of the base in B.
    """
    if C.coords is None:
        raise ValueError("C must come from partite_power")
    index = {w: k for k, w in enumerate(C.coords)}
    out = []
    for v in range(B.carrier.n):
        p = B.proj[v]
        w = []
        for j in range(line.N):
            if j in line.moving:
                w.append(v)
            else:
                cp = cps[line.fixed[j]]
                if not (0 <= p < len(cp)) or B.proj[cp[p]] != p:
                    raise StructureError("copy misses a part")
                w.append(cp[p])
        out.append(index[tuple(w)])
    return tuple(out)


def is_partite_embedding(B: PartiteSystem, C: PartiteSystem, f: Sequence[int]) -> bool:
    return (check_map(B.carrier, C.carrier, f) == EMBEDDING
            and all(C.proj[f[v]] == B.proj[v] for v in range(B.carrier.n)))


# Ramsey arrows --------------------------------------------------------------

@dataclass
class ArrowResult:
    holds: bool
    witness: dict | None = None     # A-copy (sorted vertex tuple) -> color
    a_copies: int = 0
    b_copies: int = 0
    nodes: int = 0

    def __bool__(self):
        return self.holds


def _copy_system(C: Structure, B: Structure, A: Structure):
    acop = copies(A, C)
    bcop = copies(B, C)
    pos = {c: i for i, c in enumerate(acop)}
    cons = []
    for b in bcop:
        bs = set(b)
        inside = [pos[c] for c in acop if bs.issuperset(c)]
        cons.append(inside)
    return acop, bcop, cons


def verify_arrow(C: Structure, B: Structure, A: Structure, k: int,
                 budget: Budget = DEFAULT) -> ArrowResult:
    """Decide C -> (B)^A_k by a complete backtracking search for a bad coloring.

    A bad coloring colors the copies of A so that no copy of B has all its
    A-copies of one color.  Colors are introduced in order (a fresh color is
    always the least unused one), and a constraint is checked the moment its
    last copy is colored.
    """
    if k < 1:
        raise ValueError("k must be positive")
    acop, bcop, cons = _copy_system(C, B, A)
    m = len(acop)
    res = ArrowResult(True, None, m, len(bcop))
    if any(len(c) <= 1 for c in cons):
        return res
    if not cons:
        res.holds = False
        res.witness = {c: 0 for c in acop}
        return res
    counter = Counter(budget.max_colorings, "arrow search nodes")
    # variable order: most constrained first, ties by index
    deg = [0] * m
    for c in cons:
        for x in c:
            deg[x] += 1
    order = sorted(range(m), key=lambda x: (-deg[x], x))
    watch = [[] for _ in range(m)]
    for ci, c in enumerate(cons):
        for x in c:
            watch[x].append(ci)
    size = [len(c) for c in cons]
    filled = [0] * len(cons)
    counts = [[0] * k for _ in cons]
    color = [-1] * m

    def rec(i: int, used: int) -> bool:
        if i == m:
            return True
        counter.tick()
        x = order[i]
        for c in range(min(used + 1, k)):
            ok = True
            for ci in watch[x]:
                cnt = counts[ci]
                if filled[ci] + 1 == size[ci] and cnt[c] + 1 == size[ci]:
                    ok = False
                    break
            if not ok:
                continue
            color[x] = c
            for ci in watch[x]:
                filled[ci] += 1
                counts[ci][c] += 1
            if rec(i + 1, max(used, c + 1)):
                return True
            for ci in watch[x]:
                filled[ci] -= 1
                counts[ci][c] -= 1
            color[x] = -1
        return False

    try:
        found = rec(0, 0)
    finally:
        res.nodes = counter.count
    if found:
        res.holds = False
        res.witness = {acop[i]: color[i] for i in range(m)}
    return res


def is_bad_coloring(C: Structure, B: Structure, A: Structure, coloring: Mapping) -> bool:
    """True iff no copy of B in C has all its A-copies colored alike."""
    acop, bcop, cons = _copy_system(C, B, A)
    for c in cons:
        if len({coloring[acop[i]] for i in c}) <= 1:
            return False
    return True


def _structures_on(lang: Language, n: int, counter: Counter):
    """Structures with vertices 0..n-1 ordered naturally, by number of items then lexicographically."""
    items = []
    for name, arity in lang.relations:
        for t in product(range(n), repeat=arity):
            items.append(("r", name, t, None))
    fun_opts = []
    for name, d, r in lang.functions:
        for dom in product(range(n), repeat=d):
            for img in combinations(range(n), r):
                fun_opts.append(("f", name, dom, img))
    items += fun_opts
    names = [str(i) for i in range(n)]
    order_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for size in range(len(items) + 1):
        for pick in combinations(range(len(items)), size):
            counter.tick()
            rels = {name: [] for name, _ in lang.relations}
            funcs = {name: {} for name, _, _ in lang.functions}
            ok = True
            for p in pick:
                kind, name, t, img = items[p]
                if kind == "r":
                    rels[name].append(t)
                elif t in funcs[name]:
                    ok = False
                    break
                else:
                    funcs[name][t] = img
            if not ok:
                continue
            rels[ORDER] = order_pairs
            yield Structure(lang.ordered(), names, rels, funcs, check=False)


def base_ramsey_bruteforce(A: Structure, B: Structure, k: int = 2, budget: Budget = DEFAULT,
                           max_n: int | None = None) -> Structure:
    """First ordered C (by size, then item count, then lexicographically) with C -> (B)^A_k."""
    if not (A.language.has_order and B.language.has_order):
        raise StructureError("base search needs ordered structures")
    lang = B.language.unordered()
    counter = Counter(budget.max_subsets, "candidate structures", budget.clock())
    n = B.n
    while max_n is None or n <= max_n:
        budget.vertices(n, "vertices of the base candidate")
        for C in _structures_on(lang, n, counter):
            if not copies(B, C):
                continue
            if verify_arrow(C, B, A, k, budget):
                return C
        n += 1
    raise BudgetExceeded("candidate size", max_n)


# completion -----------------------------------------------------------------

def _dom_name(F: str) -> str:
    return "dom." + F


def completion(S: Structure) -> Structure:
    """Make every function total; F(t) := {least vertex of t} where undefined.

    A relation ``dom.F`` records the original domain so the step can be
    undone.  The completed language marks the functions loose, since the
    filler image is a single vertex.
    """
    if not S.language.has_order:
        raise StructureError("completion needs an ordered structure")
    lang = S.language
    new_lang = Language(lang.relations + tuple((_dom_name(F), d) for F, d, _ in lang.functions),
                        lang.functions, True, tuple(F for F, _, _ in lang.functions))
    pos = {v: i for i, v in enumerate(S.order())}
    rels = dict(S.relations())
    funcs = {}
    for F, d, _ in lang.functions:
        table = S.function(F)
        rels[_dom_name(F)] = list(table)
        full = {}
        for t in product(range(S.n), repeat=d):
            full[t] = table[t] if t in table else [min(t, key=pos.__getitem__)]
        funcs[F] = full
    return Structure(new_lang, S.names, rels, funcs, check=False)


def decompletion(S: Structure) -> Structure:
    lang = S.language
    fnames = [F for F, _, _ in lang.functions]
    doms = {_dom_name(F) for F in fnames}
    old = Language(tuple(x for x in lang.relations if x[0] not in doms), lang.functions, lang.has_order)
    rels = {k: v for k, v in S.relations().items() if k not in doms}
    funcs = {}
    for F in fnames:
        keep = S.relation(_dom_name(F))
        funcs[F] = {t: img for t, img in S.function(F).items() if t in keep}
    return Structure(old, S.names, rels, funcs)


# partite construction -------------------------------------------------------

@dataclass
class StageReport:
    stage: int
    copy: tuple[int, ...]
    sections: int
    N: int
    certified: bool
    vertices: int
    note: str = ""


@dataclass
class ConstructionReport:
    stages: list[StageReport] = field(default_factory=list)
    property_i: list[tuple[int, str]] = field(default_factory=list)   # (stage, "pass"|"partial"|"fail: ...")
    class_check: str = "not requested"

    @property
    def arrow_certified(self) -> bool:
        return all(s.certified for s in self.stages)


# Known Hales-Jewett numbers for two colors: HJ(1,2)=1, HJ(2,2)=2.
_HJ2 = {1: 1, 2: 2}


def _default_dimension(t: int, k: int) -> int | None:
    if t == 1:
        return 1
    if k == 2:
        return _HJ2.get(t)
    return None


def check_property_i(P: PartiteSystem, B: Structure, cap: int | None = None) -> str:
    """Every irreducible subsystem is transversal and embeds into B."""
    subs, complete = irreducible_substructures(P.carrier, cap)
    Bu = B.without_order()
    seen = {}
    for verts in subs:
        if not _transversal(P.proj, verts):
            return f"fail: irreducible set {[P.carrier.names[v] for v in verts]} is not transversal"
        D = P.carrier.restrict(verts)
        key = D.key()[2:]
        if key not in seen:
            seen[key] = bool(embeddings(D, Bu, limit=1))
        if not seen[key]:
            return f"fail: irreducible set {[P.carrier.names[v] for v in verts]} does not embed into B"
    return "pass" if complete else "partial"


def irreducible_transversality(P: PartiteSystem) -> tuple[str, str]:
    """Whether every irreducible substructure of the carrier is transversal.

    Returns (status, method).  With unary functions only, an irreducible set
    holding x and y keeps them connected among the vertices whose closure
    meets {x, y} (the rest of the set is closed), so when every same-part
    pair is disconnected there no subset needs listing.  Otherwise the
    irreducible sets are listed.
    """
    S = P.carrier
    if all(d == 1 for _, d, _ in S.language.functions):
        cl = [closure_mask(S, 1 << v) for v in range(S.n)]
        edges = S.hyperedges()
        separated = True
        for part in P.parts():
            for x, y in combinations(part, 2):
                pair = 1 << x | 1 << y
                near = sum(1 << v for v in range(S.n) if cl[v] & pair)
                if any(c & pair == pair for c in _components(near, edges)):
                    separated = False
                    break
            if not separated:
                break
        if separated:
            return "pass", "pair separation"
    subs, complete = irreducible_substructures(S)
    for verts in subs:
        if not _transversal(P.proj, verts):
            return f"fail: irreducible set {[S.names[v] for v in verts]} is not transversal", "listing"
    return ("pass" if complete else "partial"), "listing"


def partite_construction(A: Structure, B: Structure, C0: Structure, k: int = 2,
                         dimension: Callable[[int, int], int | None] | None = None,
                         budget: Budget = DEFAULT, certify: bool = True,
                         forbidden: Sequence[Structure] = (),
                         member: Callable[[Structure], bool] | None = None,
                         cap: int | None = None) -> tuple[Structure, ConstructionReport]:
    """Build C with C -> (B)^A_k from a base C0 with C0 -> (B)^A_k.

    The pictures P_0, P_1, ... are C0-partite systems.  P_0 is a disjoint union
    of copies of B, one over each copy of B in C0.  Stage j takes the j-th copy
    of A in C0, restricts the picture to the parts over it, forms the partite
    power D of that restriction, and glues a fresh copy of the picture onto D
    along the embedding of every combinatorial line, each glued freely.  The
    result is ordered part by part following C0 and inside a part by creation.

    ``dimension(t, k)`` picks the power for t sections; when it returns None
    or the power would exceed the budget, dimension 1 is used and the stage
    is reported as not certified by the line argument.
    """
    for X in (A, B, C0):
        if not X.language.has_order:
            raise StructureError("partite construction works on ordered structures")
    dim = dimension or _default_dimension
    report = ConstructionReport()
    Au, Bu, C0u = A.without_order(), B.without_order(), C0.without_order()
    acopies = embeddings(A, C0)
    bcopies = embeddings(B, C0)
    # P_0
    if bcopies:
        U, maps = disjoint_union([Bu] * len(bcopies))
        proj = [0] * U.n
        for e, mp in zip(bcopies, maps):
            for v in range(Bu.n):
                proj[mp[v]] = e[v]
        P = PartiteSystem(C0u, U, tuple(proj))
    else:
        P = PartiteSystem(C0u, Structure(C0u.language, [], {}, {}), ())
    if certify:
        report.property_i.append((0, check_property_i(P, B, cap)))
    for stage, cp in enumerate(acopies, 1):
        P, st = _stage(P, Au, cp, k, dim, budget, stage)
        report.stages.append(st)
        if certify:
            report.property_i.append((stage, check_property_i(P, B, cap)))
    C = _finish(P, C0)
    if forbidden or member is not None:
        bad = [i for i, F in enumerate(forbidden) if embeddings(F, C.without_order(), limit=1)]
        if bad:
            report.class_check = f"fail: forbidden structures {bad} embed"
        elif member is not None and not member(C.without_order()):
            report.class_check = "fail: membership oracle rejects the result"
        else:
            report.class_check = "pass"
    return C, report


def _stage(P: PartiteSystem, Au: Structure, cp: Sequence[int], k: int, dim, budget: Budget, stage: int):
    S = P.carrier
    where = {c: a for a, c in enumerate(cp)}
    keep = [v for v in range(S.n) if P.proj[v] in where]
    Bk_struct = S.restrict(keep)
    Bk = PartiteSystem(Au, Bk_struct, tuple(where[P.proj[v]] for v in keep))
    secs = sections(Au, Bk)
    t = len(secs)
    if t == 0:
        return P, StageReport(stage, tuple(cp), 0, 0, True, S.n, "no sections; picture unchanged")
    N = dim(t, k)
    certified = N is not None
    note = ""
    if N is None:
        N, note = 1, "no known line dimension; used 1"
    # size of the next picture: D plus one fresh copy of P minus B_k per line
    def size(n):
        return sum(len(p) ** n for p in Bk.parts()) + count_lines(n, t) * (S.n - len(keep))
    if size(N) > budget.max_vertices and N > 1:
        N, certified, note = 1, False, f"dimension over budget; used 1"
    budget.vertices(size(N), "vertices of the next picture")
    D = partite_power(Bk, N, budget)
    # assemble: D first, then one copy of the rest of P per line
    names_parts: list[int] = [cp[D.proj[v]] for v in range(D.carrier.n)]
    rels = {name: set(D.carrier.relation(name)) for name, _ in S.language.relation_symbols}
    funcs = {name: dict(D.carrier.function(name)) for name, _, _ in S.language.functions}
    total = D.carrier.n
    rest = [v for v in range(S.n) if P.proj[v] not in where]
    keep_pos = {v: i for i, v in enumerate(keep)}
    for line in enumerate_lines(N, t):
        e = line_embedding(D, Bk, line, secs)
        f = [0] * S.n
        for v in keep:
            f[v] = e[keep_pos[v]]
        for v in rest:
            f[v] = total
            names_parts.append(P.proj[v])
            total += 1
        for name, _ in S.language.relation_symbols:
            rels[name].update(tuple(f[x] for x in tup) for tup in S.relation(name))
        for name, _, _ in S.language.functions:
            for dom, img in S.function(name).items():
                funcs[name][tuple(f[x] for x in dom)] = frozenset(f[x] for x in img)
    counts: dict[int, int] = {}
    names = []
    for p in names_parts:
        j = counts.get(p, 0)
        counts[p] = j + 1
        names.append(f"{P.base.names[p]}.{j}")
    Q = Structure(S.language, names, rels, funcs, check=False)
    return PartiteSystem(P.base, Q, tuple(names_parts)), StageReport(stage, tuple(cp), t, N, certified, Q.n, note)


def _finish(P: PartiteSystem, C0: Structure) -> Structure:
    rank = {v: i for i, v in enumerate(C0.order())}
    order = sorted(range(P.carrier.n), key=lambda v: (rank[P.proj[v]], v))
    return P.carrier.with_order(order)
