"""Backtracking search for embeddings, monomorphisms and homomorphisms.

Source vertices are assigned in a connectivity-first order; every relation
tuple and function entry of the source is checked as soon as its last vertex
is placed, and (for embeddings) target tuples among the placed images are
checked for reflection at the same moment.
"""
from __future__ import annotations

from itertools import permutations
from typing import Iterable, Iterator, Sequence

from .structures import EMBEDDING, HOMOMORPHISM, MONOMORPHISM, ORDER, Structure, VertexMap


class _Plan:
    def __init__(self, A: Structure, B: Structure, kind: str):
        self.A, self.B, self.kind = A, B, kind
        lang = A.language
        if lang.relation_symbols != B.language.relation_symbols or lang.functions != B.language.functions:
            raise ValueError("languages differ")
        n = A.n
        # adjacency in A for the placement order
        touch = [set() for _ in range(n)]
        for m in A.hyperedges():
            vs = [i for i in range(n) if m >> i & 1]
            for v in vs:
                touch[v].update(vs)
        order: list[int] = []
        placed = set()
        weight = [len(t) for t in touch]
        while len(order) < n:
            best = max((v for v in range(n) if v not in placed),
                       key=lambda v: (sum(1 for u in touch[v] if u in placed), weight[v], -v))
            order.append(best)
            placed.add(best)
        self.order = order
        pos = {v: k for k, v in enumerate(order)}
        self.pos = pos
        # checks triggered at each step
        self.rel_checks = [[] for _ in range(n)]
        for name, _ in lang.relation_symbols:
            for t in A.relation(name):
                self.rel_checks[max(pos[x] for x in t)].append((B.relation(name), t))
        self.dom_checks = [[] for _ in range(n)]
        self.img_checks = [[] for _ in range(n)]
        for name, _, _ in lang.functions:
            fb = B.function(name)
            for dom, img in A.function(name).items():
                self.dom_checks[max(pos[x] for x in dom)].append((fb, dom))
                self.img_checks[max(pos[x] for x in dom + tuple(img))].append((fb, dom, img))
        # reflection data in B: tuples indexed by vertex
        self.reflect = kind == EMBEDDING
        if self.reflect:
            self.b_rel_at = [[] for _ in range(B.n)]
            for name, _ in lang.relation_symbols:
                ra = A.relation(name)
                for t in B.relation(name):
                    for x in set(t):
                        self.b_rel_at[x].append((ra, t))
            self.b_dom_at = [[] for _ in range(B.n)]
            for name, _, _ in lang.functions:
                fa = A.function(name)
                for dom in B.function(name):
                    for x in set(dom):
                        self.b_dom_at[x].append((fa, dom))
        self.candidates = self._candidates()

    @staticmethod
    def _profiles(S: Structure):
        prof = [dict() for _ in range(S.n)]
        local = [set() for _ in range(S.n)]

        def bump(v, key):
            prof[v][key] = prof[v].get(key, 0) + 1

        for name, _ in S.language.relation_symbols:
            for t in S.relation(name):
                for i, x in enumerate(t):
                    bump(x, (name, i))
                if len(set(t)) == 1:
                    local[t[0]].add(name)
        for name, _, _ in S.language.functions:
            for dom, img in S.function(name).items():
                for i, x in enumerate(dom):
                    bump(x, (name, "d", i))
                if len(set(dom)) == 1:
                    local[dom[0]].add(("dom", name))
                for x in img:
                    bump(x, (name, "i"))
        return list(zip(prof, local))

    def _candidates(self):
        A, B = self.A, self.B
        bprof = self._profiles(B)
        aprof = self._profiles(A)
        out = []
        for a in range(A.n):
            pa, la = aprof[a]
            cands = []
            for b in range(B.n):
                pb, lb = bprof[b]
                if self.kind == HOMOMORPHISM:
                    ok = True
                elif self.kind == EMBEDDING:
                    ok = la == lb and all(pb.get(k, 0) >= c for k, c in pa.items())
                else:
                    ok = la <= lb and all(pb.get(k, 0) >= c for k, c in pa.items())
                if ok:
                    cands.append(b)
            out.append(cands)
        return out


def _search(plan: _Plan, restrict: Sequence[Iterable[int]] | None, limit: int | None) -> list[tuple[int, ...]]:
    A, B = plan.A, plan.B
    n = A.n
    f = [-1] * n
    inv: dict[int, int] = {}
    injective = plan.kind != HOMOMORPHISM
    cands = plan.candidates
    if restrict is not None:
        allowed = [set(r) for r in restrict]
        cands = [[b for b in cands[a] if b in allowed[a]] for a in range(n)]
    results: list[tuple[int, ...]] = []

    def ok(step: int, a: int, b: int) -> bool:
        for rb, t in plan.rel_checks[step]:
            if tuple(f[x] for x in t) not in rb:
                return False
        for fb, dom in plan.dom_checks[step]:
            if tuple(f[x] for x in dom) not in fb:
                return False
        for fb, dom, img in plan.img_checks[step]:
            if fb[tuple(f[x] for x in dom)] != frozenset(f[x] for x in img):
                return False
        if plan.reflect:
            for ra, t in plan.b_rel_at[b]:
                if all(x in inv for x in t) and tuple(inv[x] for x in t) not in ra:
                    return False
            for fa, dom in plan.b_dom_at[b]:
                if all(x in inv for x in dom) and tuple(inv[x] for x in dom) not in fa:
                    return False
        return True

    def rec(step: int) -> bool:
        if step == n:
            results.append(tuple(f))
            return limit is not None and len(results) >= limit
        a = plan.order[step]
        for b in cands[a]:
            if injective and b in inv:
                continue
            f[a] = b
            if injective:
                inv[b] = a
            if ok(step, a, b) and rec(step + 1):
                return True
            if injective:
                del inv[b]
            f[a] = -1
        return False

    if n > B.n and injective:
        return []
    rec(0)
    return sorted(results)


def embeddings(A: Structure, B: Structure, kind: str = EMBEDDING,
               restrict: Sequence[Iterable[int]] | None = None,
               limit: int | None = None) -> list[tuple[int, ...]]:
    """All maps A -> B of the given kind as index tuples, sorted.

    ``restrict[a]`` optionally limits the targets allowed for source vertex a.
    """
    return _search(_Plan(A, B, kind), restrict, limit)


def enumerate_embeddings(A: Structure, B: Structure) -> list[VertexMap]:
    return [VertexMap(A, B, f) for f in embeddings(A, B)]


def find_embedding(A: Structure, B: Structure, kind: str = EMBEDDING) -> tuple[int, ...] | None:
    found = embeddings(A, B, kind, limit=1)
    return found[0] if found else None


def automorphisms(A: Structure) -> list[tuple[int, ...]]:
    """All automorphisms as index tuples; the identity comes first."""
    return embeddings(A, A)


def enumerate_automorphisms(A: Structure) -> list[VertexMap]:
    return [VertexMap(A, A, f) for f in automorphisms(A)]


def copies(A: Structure, B: Structure) -> list[tuple[int, ...]]:
    """Distinct images of embeddings A -> B, each as a sorted index tuple, sorted."""
    return sorted({tuple(sorted(f)) for f in embeddings(A, B)})


def is_isomorphic(A: Structure, B: Structure) -> bool:
    if A.n != B.n or A.language != B.language:
        return False
    return find_embedding(A, B) is not None


def isomorphisms(A: Structure, B: Structure) -> list[tuple[int, ...]]:
    if A.n != B.n:
        return []
    return embeddings(A, B)


# canonical forms ------------------------------------------------------------

def ordered_code(S: Structure, order: Sequence[int]) -> tuple:
    """Code of S with vertices relabelled by their rank in ``order``.

    The order relation itself (if any) is left out; it is implied by the
    labelling.
    """
    rank = [0] * S.n
    for i, v in enumerate(order):
        rank[v] = i
    rels = []
    for name, _ in S.language.relation_symbols:
        if name == ORDER and S.language.has_order:
            continue
        rels.append(tuple(sorted(tuple(rank[x] for x in t) for t in S.relation(name))))
    funcs = []
    for name, _, _ in S.language.functions:
        funcs.append(tuple(sorted((tuple(rank[x] for x in dom), tuple(sorted(rank[x] for x in img)))
                                  for dom, img in S.function(name).items())))
    return (S.n, tuple(rels), tuple(funcs))


def _invariant(S: Structure) -> list[tuple]:
    """An isomorphism-invariant label per vertex used to prune canonical search."""
    lab = [[] for _ in range(S.n)]
    for name, _ in S.language.relation_symbols:
        if name == ORDER and S.language.has_order:
            continue
        for t in S.relation(name):
            for i, x in enumerate(t):
                lab[x].append((0, name, i, len(set(t))))
    for name, _, _ in S.language.functions:
        for dom, img in S.function(name).items():
            for i, x in enumerate(dom):
                lab[x].append((1, name, i))
            for x in img:
                lab[x].append((2, name))
    return [tuple(sorted(l)) for l in lab]


def canonical_order(S: Structure) -> list[int]:
    """A vertex order giving the minimum ordered code (ignores any order relation)."""
    inv = _invariant(S)
    cells: dict[tuple, list[int]] = {}
    for v in range(S.n):
        cells.setdefault(inv[v], []).append(v)
    keys = sorted(cells)
    best = None
    best_order = None

    def rec(i: int, prefix: list[int]):
        nonlocal best, best_order
        if i == len(keys):
            code = ordered_code(S, prefix)
            if best is None or code < best:
                best, best_order = code, list(prefix)
            return
        for p in permutations(cells[keys[i]]):
            rec(i + 1, prefix + list(p))

    rec(0, [])
    return best_order if best_order is not None else []


def canonical_code(S: Structure) -> tuple:
    """Isomorphism-invariant code of the unordered structure."""
    inv = _invariant(S)
    return (tuple(sorted(inv)), ordered_code(S, canonical_order(S)))


def canonical_form(S: Structure) -> Structure:
    """S relabelled by a canonical order with ids ``0..n-1`` (order relation dropped)."""
    order = canonical_order(S)
    T = S.without_order().permuted(order)
    return T.renamed([str(i) for i in range(S.n)])


def compose(f: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    """The map x -> g[f[x]]."""
    return tuple(g[x] for x in f)


def inverse(f: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(f)
    for i, x in enumerate(f):
        inv[x] = i
    return tuple(inv)


def iter_injections(n: int, m: int) -> Iterator[tuple[int, ...]]:
    return permutations(range(m), n)
