"""Line-oriented text format for structures, partite systems and graphs.

Structure files::

    lang rel R 2          # relation symbol and arity
    lang fun F 1 2        # function symbol, domain arity, range arity
    lang fun G 1 2 loose  # as above, but single-vertex images are allowed too
    vertex a
    rel R a b
    fun F a : c d         # domain tuple, colon, image set
    order a b c           # total order, least first
    part x a b            # partite systems only: base vertex and its part

Graph files use ``vertex``, ``arc u v``, ``edge u v`` and ``hedge u v w``.
Printing always produces the canonical layout, so printing a parsed
canonical file gives the same bytes back.
"""
from __future__ import annotations

from dataclasses import dataclass

from .structures import ORDER, Language, Structure, StructureError


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass
class Document:
    structure: Structure
    parts: dict[str, list[str]] | None = None


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def parse_document(text: str) -> Document:
    rels: list[tuple[str, int]] = []
    funs: list[tuple[str, int, int]] = []
    loose: list[str] = []
    vertices: list[str] = []
    rel_tuples: dict[str, list[tuple[int, tuple[str, ...]]]] = {}
    fun_entries: dict[str, list[tuple[int, tuple[str, ...], tuple[str, ...]]]] = {}
    order: list[str] | None = None
    parts: dict[str, list[str]] | None = None
    empty = True
    for no, tok in _lines(text):
        head = tok[0]
        empty = False
        try:
            if head == "lang":
                if len(tok) == 4 and tok[1] == "rel":
                    rels.append((tok[2], int(tok[3])))
                elif len(tok) in (5, 6) and tok[1] == "fun":
                    funs.append((tok[2], int(tok[3]), int(tok[4])))
                    if len(tok) == 6:
                        if tok[5] != "loose":
                            raise ParseError(no, f"unknown function flag {tok[5]!r}")
                        loose.append(tok[2])
                else:
                    raise ParseError(no, "expected 'lang rel NAME ARITY' or 'lang fun NAME D R'")
            elif head == "vertex":
                if len(tok) < 2:
                    raise ParseError(no, "vertex line needs an id")
                vertices.extend(tok[1:])
            elif head == "rel":
                if len(tok) < 3:
                    raise ParseError(no, "rel line needs a symbol and a tuple")
                rel_tuples.setdefault(tok[1], []).append((no, tuple(tok[2:])))
            elif head == "fun":
                if ":" not in tok or len(tok) < 4:
                    raise ParseError(no, "fun line must look like 'fun F x1 .. xd : y1 .. yr'")
                c = tok.index(":")
                fun_entries.setdefault(tok[1], []).append((no, tuple(tok[2:c]), tuple(tok[c + 1:])))
            elif head == "order":
                if order is not None:
                    raise ParseError(no, "order given twice")
                order = tok[1:]
            elif head == "part":
                if len(tok) < 2:
                    raise ParseError(no, "part line needs an index")
                parts = parts if parts is not None else {}
                i = tok[1]
                if i in parts:
                    raise ParseError(no, f"part {i} given twice")
                parts[i] = tok[2:]
            else:
                raise ParseError(no, f"unknown keyword {head!r}")
        except ValueError as e:
            if isinstance(e, ParseError):
                raise
            raise ParseError(no, str(e)) from None
    if empty:
        raise ParseError(0, "empty input")
    try:
        lang = Language(tuple(rels), tuple(funs), order is not None, tuple(loose))
    except StructureError as e:
        raise ParseError(1, str(e)) from None
    idx = {v: i for i, v in enumerate(vertices)}
    if len(idx) != len(vertices):
        raise ParseError(1, "duplicate vertex id")
    arities = dict(lang.relation_symbols)
    fun_ar = {n: (d, r) for n, d, r in lang.functions}

    def look(no, v):
        if v not in idx:
            raise ParseError(no, f"unknown vertex {v!r}")
        return idx[v]

    R: dict[str, list[tuple[int, ...]]] = {}
    for name, items in rel_tuples.items():
        for no, t in items:
            if name not in arities or (name == ORDER and lang.has_order):
                raise ParseError(no, f"unknown relation {name!r}")
            if len(t) != arities[name]:
                raise ParseError(no, f"relation {name} expects {arities[name]} vertices")
            R.setdefault(name, []).append(tuple(look(no, v) for v in t))
    Fn: dict[str, dict[tuple[int, ...], list[int]]] = {}
    for name, items in fun_entries.items():
        for no, dom, img in items:
            if name not in fun_ar:
                raise ParseError(no, f"unknown function {name!r}")
            d, r = fun_ar[name]
            if len(dom) != d:
                raise ParseError(no, f"function {name} expects {d} domain vertices")
            if len(set(img)) != len(img) or (len(img) != r and not (len(img) == 1 and name in lang.loose)):
                raise ParseError(no, f"function {name} expects {r} distinct image vertices")
            key = tuple(look(no, v) for v in dom)
            table = Fn.setdefault(name, {})
            if key in table:
                raise ParseError(no, f"function {name} defined twice on {' '.join(dom)}")
            table[key] = [look(no, v) for v in img]
    if order is not None:
        if sorted(order) != sorted(vertices) or len(set(order)) != len(order):
            raise ParseError(1, "order line must list every vertex exactly once")
        pos = [idx[v] for v in order]
        R[ORDER] = [(pos[i], pos[j]) for i in range(len(pos)) for j in range(i + 1, len(pos))]
    try:
        S = Structure(lang, vertices, R, Fn)
    except StructureError as e:
        raise ParseError(1, str(e)) from None
    if parts is not None:
        seen = [v for members in parts.values() for v in members]
        if sorted(seen) != sorted(vertices) or len(set(seen)) != len(seen):
            raise ParseError(1, "part lines must partition the vertex set")
    return Document(S, parts)


def parse_structure(text: str) -> Structure:
    return parse_document(text).structure


def format_structure(S: Structure, parts: dict[str, list[str]] | None = None) -> str:
    out = []
    for name, arity in S.language.relations:
        out.append(f"lang rel {name} {arity}")
    for name, d, r in S.language.functions:
        out.append(f"lang fun {name} {d} {r}" + (" loose" if name in S.language.loose else ""))
    for v in S.names:
        out.append(f"vertex {v}")
    nm = S.names
    for name, _ in S.language.relations:
        for t in sorted(S.relation(name)):
            out.append("rel " + name + " " + " ".join(nm[x] for x in t))
    for name, _, _ in S.language.functions:
        table = S.function(name)
        for dom in sorted(table):
            img = sorted(table[dom])
            out.append("fun " + name + " " + " ".join(nm[x] for x in dom) + " : " + " ".join(nm[x] for x in img))
    if S.language.has_order:
        out.append(" ".join(["order"] + [nm[x] for x in S.order()]))
    if parts is not None:
        for i in parts:
            out.append(" ".join(["part", str(i)] + list(parts[i])))
    return "".join(line + "\n" for line in out)


# graphs ---------------------------------------------------------------------

@dataclass
class GraphDocument:
    vertices: list[str]
    arcs: list[tuple[str, str]]
    edges: list[tuple[str, str]]
    hedges: list[tuple[str, ...]]


def parse_graph(text: str) -> GraphDocument:
    vertices: list[str] = []
    arcs, edges, hedges = [], [], []
    seen = set()
    for no, tok in _lines(text):
        head = tok[0]
        if head == "vertex":
            for v in tok[1:]:
                if v in seen:
                    raise ParseError(no, f"duplicate vertex {v!r}")
                seen.add(v)
                vertices.append(v)
        elif head in ("arc", "edge"):
            if len(tok) != 3:
                raise ParseError(no, f"{head} needs two vertices")
            (arcs if head == "arc" else edges).append((tok[1], tok[2]))
        elif head == "hedge":
            if len(tok) < 2:
                raise ParseError(no, "hedge needs vertices")
            hedges.append(tuple(tok[1:]))
        else:
            raise ParseError(no, f"unknown keyword {head!r}")
    for item in arcs + edges + hedges:
        for v in item:
            if v not in seen:
                raise ParseError(0, f"unknown vertex {v!r}")
    return GraphDocument(vertices, arcs, edges, hedges)


def format_graph(doc: GraphDocument) -> str:
    out = [f"vertex {v}" for v in doc.vertices]
    out += [f"arc {u} {v}" for u, v in doc.arcs]
    out += [f"edge {u} {v}" for u, v in doc.edges]
    out += ["hedge " + " ".join(h) for h in doc.hedges]
    return "".join(line + "\n" for line in out)
