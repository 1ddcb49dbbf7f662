"""Coherent, irreducible-structure faithful EPPA extensions for unary functions.

Given A, a relational extension B- of the reduct A- supplies automorphisms.
Subsets of B- that no automorphism moves into A are big; a vertex carries a
valuation chi (a value per big set containing it), and the vertices of the
extension C are valuation structures: a base vertex b, together with one
valuated copy of each vertex of a pulled-back closure of b.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Sequence

from .budget import DEFAULT, Budget, BudgetExceeded, Counter
from .embeddings import automorphisms, compose, embeddings, inverse
from .irreducible import irreducible_substructures
from .structures import (EMBEDDING, Language, Structure, StructureError, bits, check_map, closed_masks,
                         closure_mask, mask_of)


# relational reduct ------------------------------------------------------------

def reduct_name(F: str) -> str:
    return "R_" + F


def reduct_language(lang: Language) -> Language:
    if not lang.unary_functions_only:
        raise StructureError("the reduct needs unary functions")
    names = {n for n, _ in lang.relations}
    extra = []
    for F, d, _ in lang.functions:
        if reduct_name(F) in names:
            raise StructureError(f"relation name {reduct_name(F)} already used")
        extra.append((reduct_name(F), d + 1))
    return Language(lang.relations + tuple(extra), (), lang.has_order)


def relational_reduct(A: Structure) -> Structure:
    """Replace each function F by the relation R_F = {(t, u) : u in F(t)}."""
    lang = reduct_language(A.language)
    rels = {name: A.relation(name) for name, _ in A.language.relation_symbols}
    for F, _, _ in A.language.functions:
        rels[reduct_name(F)] = [dom + (u,) for dom, img in A.function(F).items() for u in img]
    return Structure(lang, A.names, rels, {}, check=False)


def functions_from_reduct(R: Structure, lang: Language) -> Structure:
    """Read the R_F relations of R back as functions of ``lang`` (images of the wrong size raise)."""
    rels = {name: R.relation(name) for name, _ in lang.relation_symbols}
    funcs = {}
    for F, d, r in lang.functions:
        table: dict = {}
        for t in R.relation(reduct_name(F)):
            table.setdefault(t[:d], []).append(t[d])
        funcs[F] = table
    return Structure(lang, R.names, rels, funcs, check=True)


def partial_isomorphisms(S: Structure, closed_only: bool = True) -> list[dict[int, int]]:
    """All isomorphisms between substructures of S as dicts, in a fixed order.

    With ``closed_only`` the domains are closed sets (substructures in the
    functional sense); otherwise every subset is used.
    """
    masks = closed_masks(S) if closed_only else list(range(1 << S.n))
    by_size: dict[int, list[int]] = {}
    for m in masks:
        by_size.setdefault(bin(m).count("1"), []).append(m)
    out = []
    for size in sorted(by_size):
        for X in by_size[size]:
            xs = bits(X)
            SX = S.restrict(xs)
            for Y in by_size[size]:
                ys = bits(Y)
                for f in embeddings(SX, S.restrict(ys)):
                    out.append({xs[i]: ys[f[i]] for i in range(len(xs))})
    return out


# base extension ---------------------------------------------------------------

def is_eppa_witness(Am: Structure, Bm: Structure, auts: Sequence[tuple[int, ...]] | None = None) -> bool:
    """Every partial isomorphism of Am (on the first vertices of Bm) extends to Aut(Bm)."""
    if Bm.restrict(range(Am.n)).key()[2:] != Am.key()[2:]:
        return False
    auts = automorphisms(Bm) if auts is None else auts
    for p in partial_isomorphisms(Am, closed_only=False):
        if not any(all(g[x] == y for x, y in p.items()) for g in auts):
            return False
    return True


def orbit_prune(Am: Structure, Bm: Structure) -> Structure:
    """Keep the vertices some automorphism maps into the copy of Am."""
    auts = automorphisms(Bm)
    keep = sorted({g_inv for g in auts for g_inv in (inverse(g)[a] for a in range(Am.n))})
    return Bm.restrict(keep)


def base_eppa_bruteforce(Am: Structure, budget: Budget = DEFAULT, max_n: int | None = None) -> Structure:
    """Smallest relational extension of Am (Am on its first vertices) with EPPA for Am.

    Candidates are searched by size, then by number of added tuples, then
    lexicographically; the first witness is pruned to the orbit of Am.
    """
    lang = Am.language
    counter = Counter(budget.max_subsets, "candidate base extensions", budget.clock())
    n = Am.n
    while max_n is None or n <= max_n:
        budget.vertices(n, "base extension size")
        new = list(range(Am.n, n))
        slots = []
        for name, a in lang.relation_symbols:
            for t in product(range(n), repeat=a):
                if any(x in new for x in t):
                    slots.append((name, t))
        names = list(Am.names) + [f"x{i}" for i in range(Am.n, n)]
        for size in range(len(slots) + 1):
            for pick in combinations(range(len(slots)), size):
                counter.tick()
                rels = {name: list(Am.relation(name)) for name, _ in lang.relation_symbols}
                for i in pick:
                    rels[slots[i][0]].append(slots[i][1])
                Bm = Structure(lang, names, rels, {}, check=False)
                if is_eppa_witness(Am, Bm):
                    return orbit_prune(Am, Bm)
        n += 1
    raise BudgetExceeded("base extension size", max_n)


# the extension ------------------------------------------------------------------

Pair = tuple  # (vertex of B-, chi) with chi a tuple indexed by the big sets


@dataclass(frozen=True)
class Valuation:
    base: int
    pairs: frozenset          # of Pair

    def verts(self) -> list[int]:
        return sorted(v for v, _ in self.pairs)

    def chi(self, v: int) -> tuple:
        for u, c in self.pairs:
            if u == v:
                return c
        raise KeyError(v)


@dataclass
class Extension:
    A: Structure
    Bm: Structure             # relational base, A- on its first vertices
    auts: list[tuple[int, ...]]
    big: list[int]            # big sets as bitmasks, sorted
    valuations: list[Valuation]
    C: Structure
    phi: tuple[int, ...]
    notes: list[str] = field(default_factory=list)

    def index(self, V: Valuation) -> int:
        if not hasattr(self, "_index"):
            self._index = {W: i for i, W in enumerate(self.valuations)}
        return self._index[V]


def big_sets(Bm: Structure, a: int, auts: Sequence[tuple[int, ...]] | None = None) -> list[int]:
    """Subsets of Bm (bitmasks) that no automorphism maps into the first ``a`` vertices."""
    auts = automorphisms(Bm) if auts is None else auts
    A = (1 << a) - 1
    small = set()
    for g in auts:
        # S is small via g iff S lies in g^-1(A)
        pre = mask_of(inverse(g)[x] for x in range(a))
        sub = pre
        while True:
            small.add(sub)
            if sub == 0:
                break
            sub = (sub - 1) & pre
    return [m for m in range(1 << Bm.n) if m not in small]


def _chi_options(v: int, big: Sequence[int]) -> list[tuple]:
    ranges = []
    for S in big:
        if S >> v & 1:
            ranges.append(range(1, bin(S).count("1")))
        else:
            ranges.append((0,))
    return list(product(*ranges))


def generic_pair(p: Pair, q: Pair, big: Sequence[int]) -> bool:
    if p == q:
        return True
    (a, ca), (b, cb) = p, q
    if a == b:
        return False
    for j, S in enumerate(big):
        if S >> a & 1 and S >> b & 1 and ca[j] == cb[j]:
            return False
    return True


def _closure_in_base(A: Structure, v: int) -> int:
    return closure_mask(A, 1 << v)


def _local_structure(ext_lang: Language, Bm: Structure, K: Sequence[int]) -> Structure:
    """Bm on K with the R_F relations read back as functions."""
    R = Bm.restrict(K)
    return functions_from_reduct(R, ext_lang)


def valuation_sets(A: Structure, Bm: Structure, auts) -> dict[int, list[tuple[int, ...]]]:
    """For each b, the distinct sets alpha^-1(Cl_A(alpha(b))) over eligible alpha."""
    out: dict[int, list[tuple[int, ...]]] = {}
    for b in range(Bm.n):
        sets = set()
        for g in auts:
            if g[b] < A.n:
                inv = inverse(g)
                sets.add(tuple(sorted(inv[x] for x in bits(_closure_in_base(A, g[b])))))
        out[b] = sorted(sets)
    return out


def pulled_back_structure(A: Structure, Bm: Structure, b: int, alpha: Sequence[int]) -> tuple[tuple[int, ...], Structure]:
    """The closure of alpha(b) in A pulled back along alpha (vertex ids from Bm)."""
    cl = bits(_closure_in_base(A, alpha[b]))
    inv = inverse(alpha)
    K = sorted(inv[x] for x in cl)
    pos = {v: i for i, v in enumerate(K)}
    sub = A.restrict(cl)
    f = [pos[inv[x]] for x in cl]
    return tuple(K), sub.mapped(f, [Bm.names[v] for v in K])


def _valuations(A, Bm, auts, big, budget: Budget) -> list[Valuation]:
    counter = Counter(budget.max_subsets, "valuations")
    opts = {v: _chi_options(v, big) for v in range(Bm.n)}
    out = []
    for b, sets in valuation_sets(A, Bm, auts).items():
        for K in sets:
            others = [v for v in K if v != b]
            order = [b] + others

            def rec(i, chosen):
                if i == len(order):
                    counter.tick()
                    out.append(Valuation(b, frozenset(zip(order, chosen))))
                    return
                v = order[i]
                for c in opts[v]:
                    if all(generic_pair((v, c), (order[j], chosen[j]), big) for j in range(i)):
                        chosen.append(c)
                        rec(i + 1, chosen)
                        chosen.pop()

            rec(0, [])
    out.sort(key=lambda V: (V.base, len(V.pairs), sorted(V.pairs)))
    return out


class _Local:
    """Cached local structures of valuations (Bm on K, functions read back)."""

    def __init__(self, lang: Language, Bm: Structure):
        self.lang, self.Bm, self.cache = lang, Bm, {}

    def __call__(self, K: tuple[int, ...]) -> Structure:
        if K not in self.cache:
            self.cache[K] = _local_structure(self.lang, self.Bm, K)
        return self.cache[K]

    def closure(self, V: Valuation, v: int) -> frozenset:
        K = tuple(V.verts())
        S = self(K)
        m = closure_mask(S, 1 << K.index(v))
        return frozenset((K[i], V.chi(K[i])) for i in bits(m))


def generic_valuations(V: Valuation, W: Valuation, big, rf: dict[str, set], local: _Local) -> bool:
    if V == W:
        return True
    for p in V.pairs:
        for q in W.pairs:
            if not generic_pair(p, q, big):
                return False
    vs, ws = dict(V.pairs), dict(W.pairs)
    for R in rf.values():
        for u in vs:
            for v in ws:
                if (u, v) in R and (v not in vs or vs[v] != ws[v]):
                    return False
                if (v, u) in R and (u not in ws or ws[u] != vs[u]):
                    return False
    for u in vs:
        if u in ws and vs[u] == ws[u]:
            if local.closure(V, u) != local.closure(W, u):
                return False
    return True


def build_eppa_extension(A: Structure, Bm: Structure | None = None, budget: Budget = DEFAULT) -> Extension:
    """Build C and the embedding phi: A -> C."""
    if A.language.has_order:
        raise StructureError("EPPA extension is built for unordered structures")
    if not A.language.unary_functions_only:
        raise StructureError("EPPA extension needs unary functions")
    Am = relational_reduct(A)
    notes = []
    if Bm is None:
        Bm = base_eppa_bruteforce(Am, budget)
        notes.append("base found by exhaustive search")
    auts = automorphisms(Bm)
    if not is_eppa_witness(Am, Bm, auts):
        raise StructureError("base extension does not extend all partial isomorphisms")
    if any(not any(g[v] < A.n for g in auts) for v in range(Bm.n)):
        raise StructureError("base has vertices outside the orbit of A")
    big = big_sets(Bm, A.n, auts)
    vals = _valuations(A, Bm, auts, big, budget)
    budget.vertices(len(vals), "vertices of the extension")
    local = _Local(A.language, Bm)
    rf = {F: set(Bm.relation(reduct_name(F))) for F, _, _ in A.language.functions}
    n = len(vals)
    gen = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            gen[i][j] = gen[j][i] = generic_valuations(vals[i], vals[j], big, rf, local)
    by_base: dict[int, list[int]] = {}
    for i, V in enumerate(vals):
        by_base.setdefault(V.base, []).append(i)

    def generic_set(ix) -> bool:
        return all(gen[x][y] for x, y in combinations(ix, 2))

    rels = {}
    for name, _ in A.language.relation_symbols:
        out = []
        for t in Bm.relation(name):
            for choice in product(*[by_base[v] for v in t]):
                if generic_set(set(choice)):
                    out.append(choice)
        rels[name] = out
    funcs = {}
    for F, _, r in A.language.functions:
        R = rf[F]
        table = {}
        for i, V in enumerate(vals):
            succ = sorted(u for (x, u) in R if x == V.base)
            found = []
            for us in combinations(succ, r):
                for choice in product(*[by_base[u] for u in us]):
                    if generic_set({i, *choice}):
                        found.append(choice)
            if len(found) > 1:
                raise StructureError(f"function {F} is not well defined at valuation {i}")
            if found:
                table[(i,)] = list(found[0])
        funcs[F] = table
    names = [f"v{i}" for i in range(n)]
    C = Structure(A.language, names, rels, funcs, check=True)
    ext = Extension(A, Bm, auts, big, vals, C, (), notes)
    ext.phi = phi_map(ext)
    return ext


def f_values(big: Sequence[int], a: int) -> list[dict[int, int]]:
    """For each big set S, number the vertices of A inside S as 1, 2, ... in index order."""
    out = []
    for S in big:
        inside = [v for v in bits(S) if v < a]
        out.append({v: i + 1 for i, v in enumerate(inside)})
    return out


def phi_map(ext: Extension) -> tuple[int, ...]:
    A, big = ext.A, ext.big
    fS = f_values(big, A.n)
    out = []
    for a in range(A.n):
        K = bits(_closure_in_base(A, a))
        pairs = frozenset((v, tuple(fS[j].get(v, 0) for j in range(len(big)))) for v in K)
        out.append(ext.index(Valuation(a, pairs)))
    return tuple(out)


# extending partial automorphisms ------------------------------------------------

def _big_image(ext: Extension, g: Sequence[int]) -> list[int]:
    pos = {S: j for j, S in enumerate(ext.big)}
    return [pos[mask_of(g[x] for x in bits(S))] for S in ext.big]


def _complete(partial: dict[int, int], size: int) -> list[int]:
    """Extend a partial permutation of range(size) fixing 0, order-preservingly on the rest."""
    if partial.get(0, 0) != 0:
        raise StructureError("partial permutation moves 0")
    full = dict(partial)
    full[0] = 0
    free_dom = [x for x in range(1, size) if x not in full]
    used = set(full.values())
    free_rng = [y for y in range(1, size) if y not in used]
    for x, y in zip(free_dom, free_rng):
        full[x] = y
    return [full[x] for x in range(size)]


def extend_partial(ext: Extension, p: dict[int, int], g: Sequence[int]) -> tuple[int, ...]:
    """Extend a g-compatible partial automorphism p of C (generic domain and range).

    Each valuation in the domain is matched vertexwise with its image through
    the base map g; per big set this gives a partial permutation of values,
    completed order-preservingly, and the completed maps act on every
    valuation of C.
    """
    vals, big = ext.valuations, ext.big
    sigma = _big_image(ext, g)
    q: dict[Pair, Pair] = {}
    for x, y in p.items():
        V, W = vals[x], vals[y]
        if g[V.base] != W.base:
            raise StructureError("p is not compatible with g on base vertices")
        wmap = dict(W.pairs)
        if sorted(g[v] for v in V.verts()) != W.verts():
            raise StructureError("p is not compatible with g")
        for v, c in V.pairs:
            img = (g[v], wmap[g[v]])
            if q.get((v, c), img) != img:
                raise StructureError("p does not induce a map on pairs")
            q[(v, c)] = img
    if len(set(q.values())) != len(q):
        raise StructureError("induced map on pairs is not injective")
    thetas = []
    for j, S in enumerate(big):
        part: dict[int, int] = {}
        for (v, c), (_, c2) in q.items():
            x, y = c[j], c2[sigma[j]]
            if part.get(x, y) != y:
                raise StructureError("values do not form a partial permutation")
            part[x] = y
        if len(set(part.values())) != len(part):
            raise StructureError("values do not form a partial permutation")
        thetas.append(_complete(part, bin(S).count("1")))

    def qhat(pair: Pair) -> Pair:
        v, c = pair
        c2 = [0] * len(big)
        for j in range(len(big)):
            c2[sigma[j]] = thetas[j][c[j]]
        return (g[v], tuple(c2))

    out = []
    for V in vals:
        W = Valuation(g[V.base], frozenset(qhat(x) for x in V.pairs))
        out.append(ext.index(W))
    return tuple(out)


# coherent extension of the base -------------------------------------------------

def coherent_triples(maps: Sequence[dict[int, int]]) -> list[tuple[int, int, int]]:
    """Index triples (f, g, h) with dom f = dom h, ran f = dom g, ran g = ran h, h = g f."""
    key = {tuple(sorted(m.items())): i for i, m in enumerate(maps)}
    out = []
    for i, f in enumerate(maps):
        ran = set(f.values())
        for j, g in enumerate(maps):
            if set(g) != ran:
                continue
            h = {x: g[f[x]] for x in f}
            k = key.get(tuple(sorted(h.items())))
            if k is not None:
                out.append((i, j, k))
    return out


def coherent_base_extensions(ext: Extension, maps: Sequence[dict[int, int]],
                             budget: Budget = DEFAULT) -> list[tuple[int, ...]]:
    """Choose an automorphism of the base extending each map so that every
    coherent triple composes (h = g f), by backtracking."""
    auts = ext.auts
    cands = [[g for g in auts if all(g[x] == y for x, y in m.items())] for m in maps]
    if any(not c for c in cands):
        raise StructureError("some partial map does not extend to the base")
    triples = coherent_triples(maps)
    involved = [[] for _ in maps]
    for t in triples:
        for x in set(t):
            involved[x].append(t)
    choice: list[tuple[int, ...] | None] = [None] * len(maps)
    counter = Counter(budget.max_subsets, "coherent extension search")
    order = sorted(range(len(maps)), key=lambda i: (len(cands[i]), i))

    def ok(i):
        for f, g, h in involved[i]:
            if choice[f] is not None and choice[g] is not None and choice[h] is not None:
                if compose(choice[f], choice[g]) != choice[h]:
                    return False
        return True

    def rec(k):
        if k == len(order):
            return True
        i = order[k]
        for c in cands[i]:
            counter.tick()
            choice[i] = c
            if ok(i) and rec(k + 1):
                return True
        choice[i] = None
        return False

    if not rec(0):
        raise StructureError("no coherent choice of base automorphisms")
    return list(choice)


# certification ------------------------------------------------------------------

@dataclass
class Certificate:
    entries: list[tuple[str, str, str]] = field(default_factory=list)   # (property, scope, status)

    def add(self, prop: str, scope: str, status: str):
        self.entries.append((prop, scope, status))

    @property
    def ok(self) -> bool:
        return all(s in ("pass", "partial") for _, _, s in self.entries)

    def lines(self) -> list[str]:
        return [f"{p} [{sc}] {st}" for p, sc, st in self.entries]


def is_automorphism(C: Structure, f: Sequence[int]) -> bool:
    return len(set(f)) == C.n and check_map(C, C, f) == EMBEDDING


def lift(ext: Extension, m: dict[int, int]) -> dict[int, int]:
    """A partial automorphism of A as one of phi(A)."""
    return {ext.phi[x]: ext.phi[y] for x, y in m.items()}


def certify(ext: Extension, cap: int | None = None, triples_limit: int | None = None,
            budget: Budget = DEFAULT) -> Certificate:
    cert = Certificate()
    A, C, phi = ext.A, ext.C, ext.phi
    cert.add("phi is an embedding", "all of A", "pass" if check_map(A, C, phi) == EMBEDDING else "fail")
    big = ext.big
    gen_ok = all(generic_pair(p, q, big)
                 for x in phi for y in phi
                 for p in ext.valuations[x].pairs for q in ext.valuations[y].pairs)
    cert.add("phi(A) generic", "all vertex pairs", "pass" if gen_ok else "fail")
    local = _Local(A.language, ext.Bm)
    cl_ok = all(local.closure(V, V.base) == V.pairs for V in ext.valuations)
    cert.add("valuation generated by its base", f"{len(ext.valuations)} valuations", "pass" if cl_ok else "fail")
    maps = partial_isomorphisms(A)
    bases = coherent_base_extensions(ext, maps, budget)
    hats = []
    fails = 0
    for m, g in zip(maps, bases):
        p = lift(ext, m)
        try:
            ph = extend_partial(ext, p, g)
        except (StructureError, KeyError):
            ph = None
        hats.append(ph)
        if ph is None or not is_automorphism(C, ph) or any(ph[x] != y for x, y in p.items()):
            fails += 1
    cert.add("every partial automorphism of phi(A) extends", f"{len(maps)} partial automorphisms",
             "pass" if fails == 0 else f"fail ({fails})")
    triples = coherent_triples(maps)
    scope = f"{len(triples)} coherent triples"
    if triples_limit is not None and len(triples) > triples_limit:
        triples = triples[:triples_limit]
        scope = f"{len(triples)} of {scope}"
    bad = 0
    for f, g, h in triples:
        if hats[f] is None or hats[g] is None or hats[h] is None or compose(hats[f], hats[g]) != hats[h]:
            bad += 1
    status = "pass" if bad == 0 else f"fail ({bad})"
    if status == "pass" and scope.count(" of "):
        status = "partial"
    cert.add("extensions compose on coherent triples", scope, status)
    faith = certify_faithful(ext, cap, budget)
    cert.entries.extend(faith.entries)
    return cert


def certify_faithful(ext: Extension, cap: int | None = None, budget: Budget = DEFAULT) -> Certificate:
    """Every irreducible substructure of C is moved into phi(A) by an automorphism."""
    cert = Certificate()
    C, phi = ext.C, ext.phi
    image = set(phi)
    subs, complete = irreducible_substructures(C, cap)
    failures = 0
    for D in subs:
        if set(D) <= image:
            continue
        if _faithful_via_base(ext, D) is not None:
            continue
        found = False
        for g in embeddings(C, C):
            if all(g[x] in image for x in D):
                found = True
                break
        if not found:
            failures += 1
    scope = f"{len(subs)} irreducible substructures" + ("" if complete else f" (cap {cap}, sweep partial)")
    status = "pass" if failures == 0 else f"fail ({failures})"
    if status == "pass" and not complete:
        status = "partial"
    cert.add("irreducible substructures map into phi(A)", scope, status)
    return cert


def _faithful_via_base(ext: Extension, D: Sequence[int]) -> tuple[int, ...] | None:
    """Extend a base automorphism that moves the bases of D into A, if one works."""
    vals = ext.valuations
    base = [vals[x].base for x in D]
    if len(set(base)) != len(base):
        return None
    for g in ext.auts:
        if all(g[b] < ext.A.n for b in base):
            p = {x: ext.phi[g[vals[x].base]] for x in D}
            try:
                ph = extend_partial(ext, p, g)
            except (StructureError, KeyError):
                continue
            if is_automorphism(ext.C, ph) and all(ph[x] == y for x, y in p.items()):
                return ph
    return None
