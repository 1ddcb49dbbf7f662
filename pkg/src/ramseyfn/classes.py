"""Bounded out-degree orientations, partial Steiner systems and bowtie-free
graphs as free amalgamation classes of structures with partial functions."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, partial
from itertools import combinations, permutations, product
from typing import Callable, Iterable, Sequence

from .budget import DEFAULT, Budget, Counter
from .embeddings import canonical_code, embeddings, find_embedding
from .structures import (MONOMORPHISM, Language, Structure, StructureError, bits, closed_masks,
                         free_amalgam, is_closed)


class ClassError(ValueError):
    pass


# combinatorial inputs ---------------------------------------------------------

@dataclass(frozen=True)
class Digraph:
    names: tuple[str, ...]
    arcs: frozenset            # of (u, v) index pairs

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "arcs", frozenset(tuple(a) for a in self.arcs))
        for u, v in self.arcs:
            if u == v:
                raise ClassError("loops are not allowed")
            if (v, u) in self.arcs:
                raise ClassError("an orientation has no 2-cycles")

    @property
    def n(self) -> int:
        return len(self.names)

    def out(self, v: int) -> list[int]:
        return sorted(w for u, w in self.arcs if u == v)

    def induced(self, verts: Iterable[int]) -> "Digraph":
        keep = sorted(set(verts))
        pos = {v: i for i, v in enumerate(keep)}
        return Digraph(tuple(self.names[v] for v in keep),
                       frozenset((pos[u], pos[v]) for u, v in self.arcs if u in pos and v in pos))

    def successor_closed(self, verts: Iterable[int]) -> bool:
        inside = set(verts)
        return all(v in inside for u, v in self.arcs if u in inside)


@dataclass(frozen=True)
class Hypergraph:
    names: tuple[str, ...]
    edges: frozenset           # of frozensets of indices

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "edges", frozenset(frozenset(e) for e in self.edges))

    @property
    def n(self) -> int:
        return len(self.names)

    def induced(self, verts: Iterable[int]) -> "Hypergraph":
        keep = sorted(set(verts))
        pos = {v: i for i, v in enumerate(keep)}
        return Hypergraph(tuple(self.names[v] for v in keep),
                          frozenset(frozenset(pos[x] for x in e) for e in self.edges if e <= set(pos)))


@dataclass(frozen=True)
class Graph:
    names: tuple[str, ...]
    edges: frozenset           # of (u, v) with u < v

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise ClassError("graphs have no loops")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @property
    def n(self) -> int:
        return len(self.names)

    def adjacent(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def neighbours(self, v: int) -> set[int]:
        return {b if a == v else a for a, b in self.edges if v in (a, b)}

    def triangles(self) -> list[tuple[int, int, int]]:
        return [t for t in combinations(range(self.n), 3)
                if self.adjacent(t[0], t[1]) and self.adjacent(t[0], t[2]) and self.adjacent(t[1], t[2])]

    def induced(self, verts: Iterable[int]) -> "Graph":
        keep = sorted(set(verts))
        pos = {v: i for i, v in enumerate(keep)}
        return Graph(tuple(self.names[v] for v in keep),
                     frozenset((pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos))

    def structure(self) -> Structure:
        rel = [(u, v) for u, v in self.edges] + [(v, u) for u, v in self.edges]
        return Structure(GRAPH_LANG, self.names, {"E": rel}, {})


GRAPH_LANG = Language((("E", 2),), ())


def default_names(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


# k-orientations --------------------------------------------------------------

def korientation_language(k: int) -> Language:
    if k < 1:
        raise ClassError("k must be at least 1")
    return Language((), tuple((f"F{i}", 1, i) for i in range(1, k + 1)))


def encode_k_orientation(G: Digraph, k: int) -> Structure:
    """F_i is defined on the vertices of out-degree i and maps them to their out-neighbourhood."""
    lang = korientation_language(k)
    funcs: dict = {f"F{i}": {} for i in range(1, k + 1)}
    for v in range(G.n):
        out = G.out(v)
        if len(out) > k:
            raise ClassError(f"vertex {G.names[v]} has out-degree {len(out)} > {k}")
        if out:
            funcs[f"F{len(out)}"][(v,)] = out
    return Structure(lang, G.names, {}, funcs)


def decode_k_orientation(S: Structure) -> Digraph:
    arcs = set()
    for name, d, r in S.language.functions:
        if d != 1 or name != f"F{r}":
            raise ClassError(f"unexpected function {name}")
        for (v,), img in S.function(name).items():
            arcs.update((v, u) for u in img)
    return Digraph(S.names, frozenset(arcs))


def is_korientation_structure(S: Structure, k: int) -> bool:
    """Membership in the encoded class: re-encoding the decoded digraph gives S back."""
    try:
        return S.language == korientation_language(k) and encode_k_orientation(decode_k_orientation(S), k) == S
    except (ClassError, StructureError):
        return False


def korientations(k: int, n: int, up_to_iso: bool = True) -> list[Digraph]:
    """Orientations on n vertices with out-degrees at most k."""
    pairs = list(combinations(range(n), 2))
    out, seen = [], set()
    for pick in product((0, 1, 2), repeat=len(pairs)):
        arcs = set()
        for c, (u, v) in zip(pick, pairs):
            if c == 1:
                arcs.add((u, v))
            elif c == 2:
                arcs.add((v, u))
        if any(sum(1 for a in arcs if a[0] == v) > k for v in range(n)):
            continue
        G = Digraph(default_names(n), frozenset(arcs))
        if up_to_iso:
            code = canonical_code(encode_k_orientation(G, k))
            if code in seen:
                continue
            seen.add(code)
        out.append(G)
    return out


# Steiner systems ----------------------------------------------------------------

def steiner_language(r: int, t: int) -> Language:
    if not r >= t >= 2:
        raise ClassError("need r >= t >= 2")
    return Language((), (("F", t, r),))


def is_partial_steiner(H: Hypergraph, r: int, t: int) -> bool:
    if any(len(e) != r for e in H.edges):
        return False
    seen = set()
    for e in H.edges:
        for T in combinations(sorted(e), t):
            if T in seen:
                return False
            seen.add(T)
    return True


def encode_steiner(H: Hypergraph, r: int, t: int) -> Structure:
    """F is defined on each repetition-free t-tuple inside a hyperedge, with that hyperedge as image."""
    for e in H.edges:
        if len(e) != r:
            raise ClassError(f"hyperedge of size {len(e)} in an {r}-uniform system")
    table: dict = {}
    for e in sorted(H.edges, key=sorted):
        for x in permutations(sorted(e), t):
            if x in table:
                raise ClassError(f"the {t}-set {sorted(x)} lies in two hyperedges")
            table[x] = sorted(e)
    return Structure(steiner_language(r, t), H.names, {}, {"F": table})


def steiner_violations(S: Structure, r: int, t: int) -> list[str]:
    """Axioms of the encoded class: distinct vertices in every domain tuple;
    the image contains the tuple, and every t-tuple of the image maps to it."""
    out = []
    table = S.function("F")
    for x, img in sorted(table.items()):
        if len(set(x)) != len(x):
            out.append(f"tuple {x} repeats a vertex")
            continue
        if not set(x) <= img:
            out.append(f"tuple {x} is not inside its image")
        for y in permutations(sorted(img), t):
            if table.get(y) != img:
                out.append(f"tuple {y} of the image of {x} does not map to it")
    return out


def decode_steiner(S: Structure, r: int, t: int) -> Hypergraph:
    bad = steiner_violations(S, r, t)
    if bad:
        raise ClassError(bad[0])
    return Hypergraph(S.names, frozenset(S.function("F").values()))


def strongly_induced(G: Hypergraph, H: Hypergraph, verts: Sequence[int], t: int) -> bool:
    """G sits on ``verts`` of H (G's vertex i is verts[i]): induced, and every other edge meets it in < t vertices."""
    pos = {v: i for i, v in enumerate(verts)}
    inside = frozenset(frozenset(pos[x] for x in e) for e in H.edges if e <= set(pos))
    if inside != G.edges:
        return False
    return all(len(e & set(pos)) <= t - 1 for e in H.edges if not e <= set(pos))


def steiner_systems(r: int, t: int, n: int, up_to_iso: bool = True) -> list[Hypergraph]:
    """Partial Steiner (r, t)-systems on n vertices."""
    cand = [frozenset(e) for e in combinations(range(n), r)]
    out, seen = [], set()

    def rec(i, chosen, used):
        if i == len(cand):
            H = Hypergraph(default_names(n), frozenset(chosen))
            if up_to_iso:
                code = canonical_code(encode_steiner(H, r, t))
                if code in seen:
                    return
                seen.add(code)
            out.append(H)
            return
        rec(i + 1, chosen, used)
        ts = set(combinations(sorted(cand[i]), t))
        if not ts & used:
            chosen.append(cand[i])
            rec(i + 1, chosen, used | ts)
            chosen.pop()

    rec(0, [], frozenset())
    return out


# bowtie-free graphs ---------------------------------------------------------------

BOWTIE = Graph(("c", "a1", "a2", "b1", "b2"), frozenset({(0, 1), (0, 2), (1, 2), (0, 3), (0, 4), (3, 4)}))


def detect_bowtie(G: Graph) -> tuple[int, ...] | None:
    """A monomorphism of the bowtie into G, or None."""
    return find_embedding(BOWTIE.structure(), G.structure(), MONOMORPHISM)


def chimney(n: int) -> Graph:
    """n triangles glued along the base edge b0 b1."""
    if n < 2:
        raise ClassError("a chimney has at least two triangles")
    names = ("b0", "b1") + tuple(f"t{i}" for i in range(n))
    edges = {(0, 1)} | {(0, 2 + i) for i in range(n)} | {(1, 2 + i) for i in range(n)}
    return Graph(names, frozenset(edges))


def chimney_by_amalgamation(n: int) -> Structure:
    """The same graph built as an iterated free amalgam of triangles over an edge."""
    tri = Graph(("b0", "b1", "t"), frozenset({(0, 1), (0, 2), (1, 2)})).structure()
    edge = tri.restrict([0, 1])
    C = tri
    for _ in range(n - 1):
        C, _, _ = free_amalgam(edge, C, tri, [0, 1], [0, 1])
    return C


def complete_graph(n: int) -> Graph:
    return Graph(default_names(n), frozenset(combinations(range(n), 2)))


def _k4s(G: Graph) -> list[tuple[int, ...]]:
    return [q for q in combinations(range(G.n), 4) if all(G.adjacent(a, b) for a, b in combinations(q, 2))]


def _in_ch2_or_k4(G: Graph, tri: tuple[int, int, int]) -> bool:
    """The triangle shares an edge with another triangle (a 2-chimney or a K4 in a bowtie-free graph)."""
    for a, b in combinations(tri, 2):
        common = G.neighbours(a) & G.neighbours(b)
        if len(common) >= 2:
            return True
    return False


def _chimney_vertices(G: Graph) -> set[int]:
    """Vertices of induced 2-chimneys: an edge with two non-adjacent common neighbours."""
    out = set()
    for a, b in G.edges:
        common = sorted(G.neighbours(a) & G.neighbours(b))
        for x, y in combinations(common, 2):
            if not G.adjacent(x, y):
                out |= {a, b, x, y}
    return out


def is_good(G: Graph) -> bool:
    """Bowtie-free with every vertex in a chimney or a K4 (a lone triangle is not enough)."""
    if detect_bowtie(G) is not None:
        return False
    covered = _chimney_vertices(G)
    for q in _k4s(G):
        covered |= set(q)
    return len(covered) == G.n


def _fresh_names(G: Graph, k: int, start: int = 0) -> list[str]:
    taken = set(G.names)
    out, i = [], start
    while len(out) < k:
        nm = f"g{i}"
        if nm not in taken:
            out.append(nm)
        i += 1
    return out


def goodify(G: Graph) -> Graph:
    """A good bowtie-free graph containing G as an induced subgraph.

    Step 1 hangs a fresh 2-chimney (by one of its top vertices) on each vertex
    outside every triangle; step 2 then doubles each triangle that shares no
    edge with another triangle, repeated until nothing changes.
    """
    if detect_bowtie(G) is not None:
        raise ClassError("input contains a bowtie")
    names = list(G.names)
    edges = set(G.edges)
    fresh = iter(_fresh_names(G, 4 * G.n + 3 * G.n + 8))

    def add_vertex() -> int:
        names.append(next(fresh))
        return len(names) - 1

    def add_edge(u, v):
        edges.add((min(u, v), max(u, v)))

    in_triangle = set(x for tri in G.triangles() for x in tri)
    for v in range(G.n):
        if v not in in_triangle:
            b0, b1, t1 = add_vertex(), add_vertex(), add_vertex()
            for u, w in ((b0, b1), (b0, v), (b1, v), (b0, t1), (b1, t1)):
                add_edge(u, w)
    changed = True
    while changed:
        changed = False
        H = Graph(tuple(names), frozenset(edges))
        for tri in H.triangles():
            if not _in_ch2_or_k4(H, tri):
                v4 = add_vertex()
                add_edge(tri[0], v4)
                add_edge(tri[1], v4)
                changed = True
                break
    out = Graph(tuple(names), frozenset(edges))
    if detect_bowtie(out) is not None or not is_good(out):
        raise ClassError("goodify produced an invalid graph")
    return out


BOWTIE_LANG = Language((("R", 2),), (("F1", 1, 1), ("F2", 1, 2), ("F3", 1, 3)))
BOWTIE_LANG_NO_F1 = Language((("R", 2),), (("F2", 1, 2), ("F3", 1, 3)))


def encode_bowtie_plus(G: Graph, drop_f1: bool = False) -> Structure:
    """R is the edge relation; F1 pairs the two base vertices of a chimney,
    F2 sends a top vertex to its base, F3 sends a vertex of a K4 to the rest.

    ``drop_f1`` builds a deliberately broken variant without F1.
    """
    if not is_good(G):
        raise ClassError("input is not a good bowtie-free graph")
    f1: dict = {}
    f2: dict = {}
    f3: dict = {}
    bases = set()
    for a, b in sorted(G.edges):
        common = sorted(G.neighbours(a) & G.neighbours(b))
        if len(common) >= 2 and not any(G.adjacent(x, y) for x, y in combinations(common, 2)):
            bases.add((a, b))
            for v, u in ((a, b), (b, a)):
                if (v,) in f1 and f1[(v,)] != [u]:
                    raise ClassError("vertex in two chimney bases")
                f1[(v,)] = [u]
    tri_count = {v: 0 for v in range(G.n)}
    for tri in G.triangles():
        for v in tri:
            tri_count[v] += 1
    for a, b in sorted(bases):
        for v in sorted(G.neighbours(a) & G.neighbours(b)):
            if tri_count[v] == 1:
                f2[(v,)] = [a, b]
    for q in _k4s(G):
        for v in q:
            f3[(v,)] = [u for u in q if u != v]
    rel = [(u, v) for u, v in G.edges] + [(v, u) for u, v in G.edges]
    funcs = {"F2": f2, "F3": f3}
    lang = BOWTIE_LANG_NO_F1
    if not drop_f1:
        funcs["F1"] = f1
        lang = BOWTIE_LANG
    return Structure(lang, G.names, {"R": rel}, funcs)


def decode_bowtie_plus(S: Structure) -> Graph:
    R = S.relation("R")
    if any((v, u) not in R for u, v in R):
        raise ClassError("R is not symmetric")
    return Graph(S.names, frozenset((u, v) for u, v in R if u < v))


def is_encoded_good_bowtie_free(S: Structure, drop_f1: bool = False) -> bool:
    try:
        G = decode_bowtie_plus(S)
        return is_good(G) and encode_bowtie_plus(G, drop_f1) == S
    except (ClassError, StructureError):
        return False


def bowtie_free_graphs(n: int) -> list[Graph]:
    """Bowtie-free graphs on n vertices up to isomorphism.

    Bowtie-freeness is hereditary, so each graph arises from one on n - 1
    vertices by adding a vertex with some neighbourhood.
    """
    if n == 0:
        return [Graph((), frozenset())]
    seen, found = set(), {}
    for G in bowtie_free_graphs(n - 1):
        for k in range(n):
            for nb in combinations(range(n - 1), k):
                H = Graph(default_names(n), G.edges | {(v, n - 1) for v in nb})
                code = canonical_code(H.structure())
                if code in seen:
                    continue
                seen.add(code)
                if detect_bowtie(H) is None:
                    found[code] = H
    return [found[c] for c in sorted(found)]


def good_bowtie_free_graphs(max_n: int) -> list[Graph]:
    return [G for n in range(max_n + 1) for G in bowtie_free_graphs(n) if is_good(G)]


# amalgamation sweeps ------------------------------------------------------------

@dataclass
class AmalgamationReport:
    checked: int = 0
    count: int = 0
    violations: list[str] = field(default_factory=list)    # the first few, described

    @property
    def ok(self) -> bool:
        return self.count == 0

    def lines(self) -> list[str]:
        return [f"amalgams checked: {self.checked}", f"violations: {self.count}"] + \
               [f"violation: {v}" for v in self.violations]


def _label(S: Structure) -> str:
    return "{" + ",".join(S.names) + "}"


def amalgamation_closure_check(members: Sequence[Structure], in_class: Callable[[Structure], bool],
                               budget: Budget = DEFAULT, max_violations: int = 20,
                               rows: Iterable[int] | None = None) -> AmalgamationReport:
    """Free amalgams of every pair of members over every common substructure, tested for membership.

    A runs over the closed subsets of B1 (the inclusion), and over all
    embeddings into B2 with closed image.  ``rows`` limits the B1 indices;
    each row has its own work counter so a split sweep behaves like a whole one.
    """
    rep = AmalgamationReport()
    for i in (range(len(members)) if rows is None else rows):
        B1 = members[i]
        counter = Counter(budget.max_subsets, "amalgams per member")
        for m in closed_masks(B1):
            verts = bits(m)
            A = B1.restrict(verts)
            for j, B2 in enumerate(members):
                for a2 in embeddings(A, B2):
                    if not is_closed(B2, a2):
                        continue
                    counter.tick()
                    C, _, _ = free_amalgam(A, B1, B2, verts, a2)
                    rep.checked += 1
                    if not in_class(C):
                        rep.count += 1
                        rep.violations.append(
                            f"member {i} and member {j} over {_label(A)} -> {{{','.join(B2.names[x] for x in a2)}}}")
    del rep.violations[max_violations:]
    return rep


def korientation_members(k: int, max_n: int) -> list[Structure]:
    return [encode_k_orientation(G, k) for n in range(max_n + 1) for G in korientations(k, n)]


def steiner_members(r: int, t: int, max_n: int) -> list[Structure]:
    return [encode_steiner(H, r, t) for n in range(max_n + 1) for H in steiner_systems(r, t, n)]


def bowtie_members(max_n: int, drop_f1: bool = False) -> list[Structure]:
    return [encode_bowtie_plus(G, drop_f1) for G in good_bowtie_free_graphs(max_n)]


SWEEP_KINDS = ("korientation", "steiner", "bowtie", "bowtie-no-f1")


@lru_cache(maxsize=None)
def _sweep_setup(kind: str, max_n: int, k: int, r: int, t: int):
    if kind == "korientation":
        return tuple(korientation_members(k, max_n)), partial(is_korientation_structure, k=k)
    if kind == "steiner":
        return tuple(steiner_members(r, t, max_n)), partial(_steiner_ok, r=r, t=t)
    if kind == "bowtie":
        return tuple(bowtie_members(max_n)), is_encoded_good_bowtie_free
    if kind == "bowtie-no-f1":
        return tuple(bowtie_members(max_n, True)), partial(is_encoded_good_bowtie_free, drop_f1=True)
    raise ClassError(f"unknown class kind {kind!r}")


def _steiner_ok(S: Structure, r: int, t: int) -> bool:
    return not steiner_violations(S, r, t)


def _sweep_row(args) -> AmalgamationReport:
    kind, max_n, k, r, t, budget, i = args
    members, in_class = _sweep_setup(kind, max_n, k, r, t)
    return amalgamation_closure_check(members, in_class, budget, max_violations=10 ** 9, rows=[i])


def sweep(kind: str, max_n: int, k: int = 2, r: int = 3, t: int = 2, budget: Budget = DEFAULT,
          jobs: int = 1, max_violations: int = 20) -> AmalgamationReport:
    """Amalgamation sweep over the encoded members of a class kind up to ``max_n`` vertices.

    ``bowtie-no-f1`` is the broken encoding without F1, kept as a planted fault.
    With ``jobs`` > 1 rows run in worker processes; reports merge in row order.
    """
    members, _ = _sweep_setup(kind, max_n, k, r, t)
    tasks = [(kind, max_n, k, r, t, budget, i) for i in range(len(members))]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_sweep_row, tasks))
    else:
        parts = [_sweep_row(x) for x in tasks]
    rep = AmalgamationReport()
    for p in parts:
        rep.checked += p.checked
        rep.count += p.count
        rep.violations.extend(p.violations)
    del rep.violations[max_violations:]
    return rep
