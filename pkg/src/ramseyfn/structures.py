"""Finite structures with relations and symmetric partial functions.

A structure has a vertex list of string ids.  Internally vertices are the
dense integers ``0..n-1`` (positions in that list), relation tuples are
integer tuples, and a function maps an ordered integer tuple (its domain
entry) to a frozenset image of exactly ``r`` distinct vertices.

Structures are treated as immutable values: every operation returns a new
one.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

ORDER = "<"
_NAME = re.compile(r"^[^\s#:]+$")


class StructureError(ValueError):
    pass


def _check_name(name: str, what: str) -> None:
    if not isinstance(name, str) or not _NAME.match(name):
        raise StructureError(f"bad {what} name {name!r}")


@dataclass(frozen=True)
class Language:
    relations: tuple[tuple[str, int], ...] = ()
    functions: tuple[tuple[str, int, int], ...] = ()
    has_order: bool = False
    # functions whose images may also be a single vertex (used by completion)
    loose: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "loose", tuple(sorted(set(self.loose))))
        object.__setattr__(self, "relations", tuple((str(n), int(a)) for n, a in self.relations))
        object.__setattr__(self, "functions", tuple((str(n), int(d), int(r)) for n, d, r in self.functions))
        seen = set()
        for name, arity in self.relations:
            _check_name(name, "relation")
            if arity < 1:
                raise StructureError(f"relation {name} has arity {arity} < 1")
            if name == ORDER and self.has_order:
                raise StructureError("the order symbol is reserved when has_order is set")
            if name in seen:
                raise StructureError(f"duplicate symbol {name}")
            seen.add(name)
        for name, d, r in self.functions:
            _check_name(name, "function")
            if d < 1 or r < 1:
                raise StructureError(f"function {name} has arity ({d}, {r}); both must be >= 1")
            if name in seen or name == ORDER:
                raise StructureError(f"duplicate symbol {name}")
            seen.add(name)
        if set(self.loose) - {f[0] for f in self.functions}:
            raise StructureError("loose names must be function symbols")

    @property
    def relation_symbols(self) -> tuple[tuple[str, int], ...]:
        """Relations including the order symbol when present."""
        if self.has_order:
            return self.relations + ((ORDER, 2),)
        return self.relations

    def arity(self, name: str) -> int:
        for n, a in self.relation_symbols:
            if n == name:
                return a
        raise StructureError(f"unknown relation {name}")

    def function_arity(self, name: str) -> tuple[int, int]:
        for n, d, r in self.functions:
            if n == name:
                return d, r
        raise StructureError(f"unknown function {name}")

    def ordered(self) -> "Language":
        return Language(self.relations, self.functions, True, self.loose)

    def unordered(self) -> "Language":
        return Language(self.relations, self.functions, False, self.loose)

    def order_as_relation(self) -> "Language":
        """Turn the order symbol into a plain binary relation."""
        if not self.has_order:
            return self
        return Language(self.relations + ((ORDER, 2),), self.functions, False, self.loose)

    def order_from_relation(self) -> "Language":
        rels = tuple(x for x in self.relations if x[0] != ORDER)
        return Language(rels, self.functions, True, self.loose)

    def extended(self, relations=(), functions=()) -> "Language":
        return Language(self.relations + tuple(relations), self.functions + tuple(functions), self.has_order, self.loose)

    @property
    def unary_functions_only(self) -> bool:
        return all(d == 1 for _, d, _ in self.functions)


class Structure:
    """An L-structure over integer vertices with string ids."""

    __slots__ = ("language", "names", "_rels", "_funcs", "_index", "_key", "_entries")

    def __init__(self, language: Language, names: Sequence[str],
                 rels: Mapping[str, Iterable[tuple[int, ...]]] | None = None,
                 funcs: Mapping[str, Mapping[tuple[int, ...], Iterable[int]]] | None = None,
                 check: bool = True):
        self.language = language
        self.names = tuple(names)
        rels = rels or {}
        funcs = funcs or {}
        self._rels = {name: frozenset(tuple(t) for t in rels.get(name, ())) for name, _ in language.relation_symbols}
        self._funcs = {name: {tuple(k): frozenset(v) for k, v in funcs.get(name, {}).items()}
                       for name, _, _ in language.functions}
        self._index = None
        self._key = None
        self._entries = None
        if check:
            unknown = set(rels) - set(self._rels)
            unknown |= set(funcs) - set(self._funcs)
            if unknown:
                raise StructureError(f"symbols not in language: {sorted(unknown)}")
            self._validate()

    # construction -----------------------------------------------------

    @classmethod
    def build(cls, language: Language, vertices: Iterable[str],
              relations: Mapping[str, Iterable[Sequence[str]]] | None = None,
              functions: Mapping[str, Mapping[Sequence[str], Iterable[str]] | Iterable[tuple[Sequence[str], Iterable[str]]]] | None = None,
              order: Sequence[str] | None = None) -> "Structure":
        """Build from vertex ids.  ``order`` lists vertices from least to greatest."""
        names = list(vertices)
        idx = {v: i for i, v in enumerate(names)}
        if len(idx) != len(names):
            raise StructureError("duplicate vertex id")

        def look(v):
            try:
                return idx[v]
            except KeyError:
                raise StructureError(f"unknown vertex {v!r}") from None

        rels = {}
        for name, tuples in (relations or {}).items():
            rels[name] = [tuple(look(v) for v in t) for t in tuples]
        funcs = {}
        for name, entries in (functions or {}).items():
            items = entries.items() if isinstance(entries, Mapping) else entries
            table = {}
            for dom, img in items:
                key = tuple(look(v) for v in dom)
                if key in table:
                    raise StructureError(f"function {name} defined twice on {tuple(dom)}")
                table[key] = [look(v) for v in img]
            funcs[name] = table
        if order is not None:
            if not language.has_order:
                language = language.ordered()
            pos = [look(v) for v in order]
            rels[ORDER] = [(pos[i], pos[j]) for i in range(len(pos)) for j in range(i + 1, len(pos))]
        return cls(language, names, rels, funcs)

    def _validate(self):
        n = len(self.names)
        if len(set(self.names)) != n:
            raise StructureError("duplicate vertex id")
        for v in self.names:
            _check_name(v, "vertex")
        for name, arity in self.language.relation_symbols:
            for t in self._rels[name]:
                if len(t) != arity:
                    raise StructureError(f"relation {name} tuple {t} has wrong arity")
                if any(not (0 <= x < n) for x in t):
                    raise StructureError(f"relation {name} tuple uses an unknown vertex")
        for name, d, r in self.language.functions:
            for dom, img in self._funcs[name].items():
                if len(dom) != d:
                    raise StructureError(f"function {name} domain tuple has wrong arity")
                if len(img) != r and not (len(img) == 1 and name in self.language.loose):
                    raise StructureError(
                        f"function {name} image at {tuple(self.names[x] for x in dom)} has {len(img)} elements, expected {r}")
                if any(not (0 <= x < n) for x in dom) or any(not (0 <= x < n) for x in img):
                    raise StructureError(f"function {name} entry uses an unknown vertex")
        if self.language.has_order:
            self._validate_order()

    def _validate_order(self):
        n = len(self.names)
        pairs = self._rels[ORDER]
        if len(pairs) != n * (n - 1) // 2:
            raise StructureError("order is not a strict total order")
        below = [0] * n
        for u, v in pairs:
            if u == v or (v, u) in pairs:
                raise StructureError("order is not a strict total order")
            below[v] += 1
        if sorted(below) != list(range(n)):
            raise StructureError("order is not a strict total order")

    # access -------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def vertices(self) -> tuple[str, ...]:
        return self.names

    def index(self, v: str) -> int:
        if self._index is None:
            self._index = {name: i for i, name in enumerate(self.names)}
        try:
            return self._index[v]
        except KeyError:
            raise StructureError(f"unknown vertex {v!r}") from None

    def indices(self, vs: Iterable[str]) -> list[int]:
        return [self.index(v) for v in vs]

    def relation(self, name: str) -> frozenset:
        return self._rels[name]

    def function(self, name: str) -> Mapping[tuple[int, ...], frozenset]:
        return self._funcs[name]

    def relations(self) -> dict:
        return dict(self._rels)

    def functions(self) -> dict:
        return {k: dict(v) for k, v in self._funcs.items()}

    def order(self) -> list[int]:
        """Vertices from least to greatest (requires an order)."""
        if not self.language.has_order:
            raise StructureError("structure has no order")
        below = [0] * self.n
        for _, v in self._rels[ORDER]:
            below[v] += 1
        return sorted(range(self.n), key=below.__getitem__)

    def entries(self) -> list[tuple[str, tuple[int, ...], frozenset]]:
        """All function entries as (name, domain tuple, image)."""
        if self._entries is None:
            out = []
            for name, _, _ in self.language.functions:
                for dom in sorted(self._funcs[name]):
                    out.append((name, dom, self._funcs[name][dom]))
            self._entries = out
        return self._entries

    def hyperedges(self, include_order: bool = True) -> list[int]:
        """Vertex sets (as bitmasks) of relation tuples and function entries."""
        masks = set()
        for name, _ in self.language.relation_symbols:
            if name == ORDER and self.language.has_order and not include_order:
                continue
            for t in self._rels[name]:
                masks.add(_mask(t))
        for _, dom, img in self.entries():
            masks.add(_mask(dom) | _mask(img))
        return sorted(masks)

    # equality -----------------------------------------------------------

    def key(self):
        if self._key is None:
            rels = tuple((name, tuple(sorted(self._rels[name]))) for name, _ in self.language.relation_symbols)
            funcs = tuple((name, tuple((dom, tuple(sorted(self._funcs[name][dom]))) for dom in sorted(self._funcs[name])))
                          for name, _, _ in self.language.functions)
            self._key = (self.language, self.names, rels, funcs)
        return self._key

    def __eq__(self, other):
        return isinstance(other, Structure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Structure(n={self.n}, vertices={list(self.names)!r})"

    # derived structures -------------------------------------------------

    def restrict(self, verts: Iterable[int]) -> "Structure":
        """Induced structure on ``verts`` (kept in their original order), closed or not.

        Function entries survive only when domain and image both lie inside.
        """
        keep = sorted(set(verts))
        new = {v: i for i, v in enumerate(keep)}
        rels = {name: [tuple(new[x] for x in t) for t in tuples if all(x in new for x in t)]
                for name, tuples in self._rels.items()}
        funcs = {}
        for name, table in self._funcs.items():
            funcs[name] = {tuple(new[x] for x in dom): [new[x] for x in img]
                           for dom, img in table.items()
                           if all(x in new for x in dom) and all(x in new for x in img)}
        return Structure(self.language, [self.names[v] for v in keep], rels, funcs, check=False)

    def permuted(self, perm: Sequence[int]) -> "Structure":
        """Reorder the vertex list: new vertex i is old vertex ``perm[i]``."""
        inv = [0] * self.n
        for i, v in enumerate(perm):
            inv[v] = i
        return self.mapped(inv, [self.names[v] for v in perm])

    def mapped(self, f: Sequence[int], names: Sequence[str]) -> "Structure":
        """Image under an injective vertex map ``f`` onto a fresh vertex list."""
        rels = {name: [tuple(f[x] for x in t) for t in tuples] for name, tuples in self._rels.items()}
        funcs = {name: {tuple(f[x] for x in dom): [f[x] for x in img] for dom, img in table.items()}
                 for name, table in self._funcs.items()}
        return Structure(self.language, names, rels, funcs, check=False)

    def renamed(self, names: Sequence[str]) -> "Structure":
        if len(names) != self.n:
            raise StructureError("wrong number of names")
        return Structure(self.language, names, self._rels, self._funcs, check=True)

    def without_order(self) -> "Structure":
        if not self.language.has_order:
            return self
        rels = {k: v for k, v in self._rels.items() if k != ORDER}
        return Structure(self.language.unordered(), self.names, rels, self._funcs, check=False)

    def with_order(self, order: Sequence[int]) -> "Structure":
        """Attach (or replace) a total order, given least-first as vertex indices."""
        if sorted(order) != list(range(self.n)):
            raise StructureError("order must list every vertex once")
        rels = {k: v for k, v in self._rels.items() if k != ORDER}
        rels[ORDER] = [(order[i], order[j]) for i in range(self.n) for j in range(i + 1, self.n)]
        return Structure(self.language.ordered(), self.names, rels, self._funcs, check=False)

    def order_as_relation(self) -> "Structure":
        if not self.language.has_order:
            return self
        return Structure(self.language.order_as_relation(), self.names, self._rels, self._funcs, check=False)

    def with_language(self, language: Language) -> "Structure":
        return Structure(language, self.names, self._rels, self._funcs, check=True)


def _mask(vs: Iterable[int]) -> int:
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def mask_of(vs: Iterable[int]) -> int:
    return _mask(vs)


def bits(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def empty_structure(language: Language) -> Structure:
    return Structure(language, [], {}, {})


# closures -------------------------------------------------------------------

def closure_mask(S: Structure, mask: int) -> int:
    """Least function-closed superset of ``mask`` as a bitmask (fixpoint)."""
    entries = [(_mask(dom), _mask(img)) for _, dom, img in S.entries()]
    changed = True
    while changed:
        changed = False
        for dm, im in entries:
            if dm & ~mask == 0 and im & ~mask:
                mask |= im
                changed = True
    return mask


def closure_indices(S: Structure, verts: Iterable[int]) -> list[int]:
    return bits(closure_mask(S, _mask(verts)))


def closure(S: Structure, vertices: Iterable[str]) -> Structure:
    """The substructure generated by the given vertex ids."""
    m = closure_mask(S, _mask(S.indices(vertices)))
    return S.restrict(bits(m))


def is_closed(S: Structure, verts: Iterable[int]) -> bool:
    m = _mask(verts)
    return closure_mask(S, m) == m


def closed_masks(S: Structure) -> list[int]:
    """Every closed vertex set of S as a bitmask, in increasing numeric order."""
    entries = [(_mask(dom), _mask(img)) for _, dom, img in S.entries()]
    out = []
    for m in range(1 << S.n):
        if all(dm & ~m or not (im & ~m) for dm, im in entries):
            out.append(m)
    return out


def induced_substructure(S: Structure, vertices: Iterable[str]) -> Structure:
    """Substructure on a closed vertex set; raises if the set is not closed."""
    idx = S.indices(vertices)
    m = _mask(idx)
    c = closure_mask(S, m)
    if c != m:
        missing = [S.names[v] for v in bits(c & ~m)]
        raise StructureError(f"vertex set is not closed; closure adds {missing}")
    return S.restrict(idx)


# maps -----------------------------------------------------------------------

HOMOMORPHISM = "homomorphism"
MONOMORPHISM = "monomorphism"
EMBEDDING = "embedding"
NONE = "none"


@dataclass(frozen=True)
class VertexMap:
    source: Structure
    target: Structure
    images: tuple[int, ...]

    @classmethod
    def from_ids(cls, source: Structure, target: Structure, mapping: Mapping[str, str]) -> "VertexMap":
        missing = [v for v in source.names if v not in mapping]
        if missing:
            raise StructureError(f"map undefined on {missing}")
        return cls(source, target, tuple(target.index(mapping[v]) for v in source.names))

    @property
    def kind(self) -> str:
        return check_map(self.source, self.target, self.images)

    def as_ids(self) -> dict[str, str]:
        return {self.source.names[i]: self.target.names[j] for i, j in enumerate(self.images)}

    def image(self) -> frozenset:
        return frozenset(self.images)


def check_map(A: Structure, B: Structure, f: Sequence[int]) -> str:
    """Classify ``f: A -> B`` as embedding, monomorphism, homomorphism or none."""
    if len(f) != A.n or any(not (0 <= x < B.n) for x in f):
        return NONE
    if A.language.relation_symbols != B.language.relation_symbols or A.language.functions != B.language.functions:
        return NONE
    for name, _ in A.language.relation_symbols:
        rb = B.relation(name)
        for t in A.relation(name):
            if tuple(f[x] for x in t) not in rb:
                return NONE
    for name, _, _ in A.language.functions:
        fb = B.function(name)
        for dom, img in A.function(name).items():
            fd = tuple(f[x] for x in dom)
            if fd not in fb or fb[fd] != frozenset(f[x] for x in img):
                return NONE
    if len(set(f)) != len(f):
        return HOMOMORPHISM
    image = set(f)
    for name, _ in A.language.relation_symbols:
        pulled = {tuple(f[x] for x in t) for t in A.relation(name)}
        inside = {t for t in B.relation(name) if all(x in image for x in t)}
        if inside != pulled:
            return MONOMORPHISM
    for name, _, _ in A.language.functions:
        pulled = {tuple(f[x] for x in dom) for dom in A.function(name)}
        inside = {dom for dom in B.function(name) if all(x in image for x in dom)}
        if inside != pulled:
            return MONOMORPHISM
    return EMBEDDING


# amalgamation ---------------------------------------------------------------

def _fresh(name: str, taken: set) -> str:
    while name in taken:
        name += "'"
    return name


def disjoint_union(parts: Sequence[Structure], names: Sequence[Sequence[str]] | None = None) -> tuple[Structure, list[list[int]]]:
    """Disjoint union; returns the union and, per part, the index map into it."""
    if not parts:
        raise StructureError("disjoint union of nothing")
    lang = parts[0].language
    out_names: list[str] = []
    taken: set = set()
    maps = []
    rels: dict = {name: [] for name, _ in lang.relation_symbols}
    funcs: dict = {name: {} for name, _, _ in lang.functions}
    for k, P in enumerate(parts):
        if P.language != lang:
            raise StructureError("languages differ")
        base = len(out_names)
        ids = names[k] if names is not None else P.names
        for v in ids:
            v = _fresh(v, taken)
            taken.add(v)
            out_names.append(v)
        maps.append([base + i for i in range(P.n)])
        for name, tuples in P.relations().items():
            rels[name].extend(tuple(base + x for x in t) for t in tuples)
        for name, table in P.functions().items():
            for dom, img in table.items():
                funcs[name][tuple(base + x for x in dom)] = [base + x for x in img]
    if lang.has_order:
        rels.pop(ORDER)
        U = Structure(lang.unordered(), out_names, rels, funcs, check=False)
        order = [maps[k][v] for k, P in enumerate(parts) for v in P.order()]
        return U.with_order(order), maps
    return Structure(lang, out_names, rels, funcs, check=False), maps


def free_amalgam(A: Structure, B1: Structure, B2: Structure,
                 a1: Sequence[int], a2: Sequence[int]) -> tuple[Structure, list[int], list[int]]:
    """Free amalgam of B1 and B2 over A along embeddings a1, a2 (index sequences).

    Returns (C, beta1, beta2).  B1 keeps its vertex ids; private vertices of
    B2 keep theirs unless taken, in which case primes are appended.
    """
    if A.language.has_order:
        raise StructureError("free amalgamation is defined on unordered structures")
    if check_map(A, B1, a1) != EMBEDDING or check_map(A, B2, a2) != EMBEDDING:
        raise StructureError("amalgamation maps must be embeddings")
    lang = B1.language
    names = list(B1.names)
    taken = set(names)
    beta1 = list(range(B1.n))
    beta2 = [-1] * B2.n
    for a in range(A.n):
        beta2[a2[a]] = a1[a]
    for v in range(B2.n):
        if beta2[v] < 0:
            nm = _fresh(B2.names[v], taken)
            taken.add(nm)
            beta2[v] = len(names)
            names.append(nm)
    rels = {name: set(B1.relation(name)) for name, _ in lang.relation_symbols}
    for name, _ in lang.relation_symbols:
        rels[name].update(tuple(beta2[x] for x in t) for t in B2.relation(name))
    funcs = {name: dict(B1.function(name)) for name, _, _ in lang.functions}
    for name, _, _ in lang.functions:
        for dom, img in B2.function(name).items():
            key = tuple(beta2[x] for x in dom)
            val = frozenset(beta2[x] for x in img)
            if key in funcs[name] and funcs[name][key] != val:
                raise StructureError("amalgamated functions disagree")
            funcs[name][key] = val
    C = Structure(lang, names, rels, funcs, check=False)
    return C, beta1, beta2

