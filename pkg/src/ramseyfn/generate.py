"""Exhaustive generators of small structures, one per isomorphism type."""
from __future__ import annotations

from itertools import combinations, product
from typing import Callable, Iterator

from .embeddings import canonical_code, canonical_form
from .structures import Language, Structure, closed_masks, bits


def raw_structures(lang: Language, n: int) -> Iterator[Structure]:
    """Every structure on vertices ``0..n-1`` (no order), in a fixed order."""
    names = [str(i) for i in range(n)]
    rel_slots = [(name, t) for name, a in lang.relations for t in product(range(n), repeat=a)]
    fun_slots = [(name, dom, [None] + list(combinations(range(n), r)))
                 for name, d, r in lang.functions for dom in product(range(n), repeat=d)]
    for rel_pick in product((False, True), repeat=len(rel_slots)):
        rels: dict = {name: [] for name, _ in lang.relations}
        for on, (name, t) in zip(rel_pick, rel_slots):
            if on:
                rels[name].append(t)
        for fun_pick in product(*[opts for _, _, opts in fun_slots]):
            funcs: dict = {name: {} for name, _, _ in lang.functions}
            for img, (name, dom, _) in zip(fun_pick, fun_slots):
                if img is not None:
                    funcs[name][dom] = img
            yield Structure(lang, names, rels, funcs, check=False)


def structures_up_to_iso(lang: Language, n: int, pred: Callable[[Structure], bool] | None = None) -> list[Structure]:
    """Canonical representatives on exactly n vertices, sorted by canonical code."""
    seen: dict = {}
    for S in raw_structures(lang, n):
        if pred is not None and not pred(S):
            continue
        code = canonical_code(S)
        if code not in seen:
            seen[code] = canonical_form(S)
    return [seen[c] for c in sorted(seen)]


def universe(lang: Language, max_n: int, pred: Callable[[Structure], bool] | None = None) -> list[Structure]:
    """Representatives on 0..max_n vertices, by size then canonical code."""
    out = []
    for n in range(max_n + 1):
        out.extend(structures_up_to_iso(lang, n, pred))
    return out


def closed_substructures(S: Structure) -> list[Structure]:
    return [S.restrict(bits(m)) for m in closed_masks(S)]


# common classes -------------------------------------------------------------

FOREST = Language((), (("F", 1, 1),))
GRAPH = Language((("E", 2),), ())


def is_forest(S: Structure) -> bool:
    """F is a father map without cycles (and without loops)."""
    fa = {dom[0]: next(iter(img)) for dom, img in S.function("F").items()}
    for v in range(S.n):
        seen = set()
        while v in fa:
            if v in seen:
                return False
            seen.add(v)
            v = fa[v]
    return True


def forests(max_n: int) -> list[Structure]:
    return universe(FOREST, max_n, is_forest)


def graph_from_edges(n: int, edges, names=None) -> Structure:
    names = names or [str(i) for i in range(n)]
    rel = set()
    for u, v in edges:
        if u == v:
            raise ValueError("graphs have no loops")
        rel.add((u, v))
        rel.add((v, u))
    return Structure(GRAPH, names, {"E": rel}, {})


def graphs(n: int) -> list[Structure]:
    """Simple graphs on n vertices up to isomorphism."""
    pairs = list(combinations(range(n), 2))
    seen: dict = {}
    for pick in product((False, True), repeat=len(pairs)):
        G = graph_from_edges(n, [p for p, on in zip(pairs, pick) if on])
        code = canonical_code(G)
        if code not in seen:
            seen[code] = canonical_form(G)
    return [seen[c] for c in sorted(seen)]


def graph_universe(max_n: int) -> list[Structure]:
    return [G for n in range(max_n + 1) for G in graphs(n)]
