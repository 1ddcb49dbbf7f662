"""Command-line entry point.

Exit status: 0 success, 1 a property violation was found, 2 usage, parse or
budget errors.  Results go to stdout (or ``-o``); ``--cert`` writes a
line-oriented certificate with sha256 hashes of every input file.
"""
from __future__ import annotations

import argparse
import hashlib
import os
import sys
from typing import Callable, Sequence

from . import classes as cl
from . import eppa as ep
from . import orderings as od
from . import partite as pt
from .budget import BudgetExceeded, ENV_VAR, load_budget
from .embeddings import automorphisms, embeddings
from .generate import forests, graph_universe
from .irreducible import is_irreducible, split
from .structures import (EMBEDDING, HOMOMORPHISM, MONOMORPHISM, Structure, StructureError, bits,
                         closure_indices, free_amalgam, is_closed)
from .textio import GraphDocument, ParseError, format_graph, format_structure, parse_document, parse_graph


class UsageError(Exception):
    pass


class Run:
    """Collects output lines and certificate entries for one command."""

    def __init__(self, command: list[str], budget):
        self.command = command
        self.budget = budget
        self.out: list[str] = []
        self.inputs: list[tuple[str, str]] = []
        self.props: list[tuple[str, str, str]] = []
        self.counterexamples: list[str] = []
        self.status = 0

    def read(self, path: str) -> str:
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as e:
            raise UsageError(f"cannot read {path}: {e.strerror}") from None
        self.inputs.append((path, hashlib.sha256(data).hexdigest()))
        return data.decode("utf-8")

    def structure(self, path: str) -> Structure:
        return self.document(path).structure

    def document(self, path: str):
        text = self.read(path)
        try:
            return parse_document(text)
        except ParseError as e:
            raise ParseError(e.line, f"{path}: {str(e).split(': ', 1)[1]}") from None

    def graph(self, path: str) -> GraphDocument:
        text = self.read(path)
        try:
            doc = parse_graph(text)
        except ParseError as e:
            raise ParseError(e.line, f"{path}: {str(e).split(': ', 1)[1]}") from None
        if not doc.vertices:
            raise ParseError(0, f"{path}: empty input")
        return doc

    def emit(self, text: str) -> None:
        self.out.extend(text.splitlines())

    def prop(self, name: str, scope: str, status: str) -> None:
        self.props.append((name, scope, status))
        if status.startswith("fail"):
            self.status = 1

    def certificate(self, output: str) -> str:
        lines = ["ramseyfn certificate", "command: " + " ".join(self.command)]
        lines += [f"input: {p} sha256={h}" for p, h in self.inputs]
        lines.append("budget: " + " ".join(f"{k}={v}" for k, v in self.budget.as_dict().items()))
        lines.append("output sha256=" + hashlib.sha256(output.encode()).hexdigest())
        lines += [f"property: {n} [{s}] {st}" for n, s, st in self.props]
        lines += [f"counterexample: {c}" for c in self.counterexamples]
        lines.append("status: " + ("ok" if self.status == 0 else "violation"))
        return "".join(x + "\n" for x in lines)


# helpers ----------------------------------------------------------------------

def _ids(S: Structure, names: Sequence[str]) -> list[int]:
    try:
        return S.indices(names)
    except StructureError as e:
        raise UsageError(str(e)) from None


def _pairs(tokens: Sequence[str] | None, A: Structure, B: Structure) -> list[int]:
    """Parse ``a=x`` tokens into an index map A -> B; identity on ids by default."""
    if not tokens:
        return _ids(B, A.names)
    m = {}
    for tok in tokens:
        if "=" not in tok:
            raise UsageError(f"bad map item {tok!r}, expected a=x")
        a, b = tok.split("=", 1)
        m[a] = b
    if sorted(m) != sorted(A.names):
        raise UsageError("the map must be given on every vertex")
    return [_ids(B, [m[a]])[0] for a in A.names]


def _fmt_map(A: Structure, B: Structure, f: Sequence[int]) -> str:
    return " ".join(f"{A.names[i]}={B.names[f[i]]}" for i in range(A.n))


def _partite(run: Run, path: str, base_path: str | None) -> pt.PartiteSystem:
    doc = run.document(path)
    if doc.parts is None:
        return pt.PartiteSystem.trivial(doc.structure)
    if base_path is None:
        raise UsageError("a file with part lines needs --base")
    base = run.structure(base_path)
    try:
        sys_ = pt.PartiteSystem.from_parts(base, doc.structure, doc.parts)
    except StructureError as e:
        raise UsageError(str(e)) from None
    bad = pt.partite_violation(sys_)
    if bad:
        raise UsageError(f"not a partite system: {bad}")
    return sys_


def _universe(name: str, max_n: int) -> list[Structure]:
    if name == "forests":
        return forests(max_n)
    if name == "graphs":
        return graph_universe(max_n)
    raise UsageError(f"unknown class {name!r}")


def _orderings(kind: str, budget):
    if kind == "admissible":
        return od.AdmissibleClass(budget)
    if kind == "free":
        return od.FreeOrderings()
    raise UsageError(f"unknown ordering class {kind!r}")


def _graph_of(doc: GraphDocument) -> cl.Graph:
    pos = {v: i for i, v in enumerate(doc.vertices)}
    if doc.arcs or doc.hedges:
        raise UsageError("expected an undirected graph (edge lines only)")
    return cl.Graph(tuple(doc.vertices), frozenset((pos[u], pos[v]) for u, v in doc.edges))


def _digraph_of(doc: GraphDocument) -> cl.Digraph:
    pos = {v: i for i, v in enumerate(doc.vertices)}
    if doc.edges or doc.hedges:
        raise UsageError("expected a digraph (arc lines only)")
    return cl.Digraph(tuple(doc.vertices), frozenset((pos[u], pos[v]) for u, v in doc.arcs))


def _hypergraph_of(doc: GraphDocument) -> cl.Hypergraph:
    pos = {v: i for i, v in enumerate(doc.vertices)}
    if doc.edges or doc.arcs:
        raise UsageError("expected a hypergraph (hedge lines only)")
    return cl.Hypergraph(tuple(doc.vertices), frozenset(frozenset(pos[v] for v in h) for h in doc.hedges))


def _graph_doc(G: cl.Graph) -> GraphDocument:
    return GraphDocument(list(G.names), [], [(G.names[u], G.names[v]) for u, v in sorted(G.edges)], [])


def _digraph_doc(G: cl.Digraph) -> GraphDocument:
    return GraphDocument(list(G.names), [(G.names[u], G.names[v]) for u, v in sorted(G.arcs)], [], [])


def _hypergraph_doc(H: cl.Hypergraph) -> GraphDocument:
    return GraphDocument(list(H.names), [], [], [tuple(H.names[v] for v in sorted(e)) for e in sorted(H.edges, key=sorted)])


def _describe(S: Structure) -> str:
    """Relations and function entries on one line, the order left out."""
    nm = S.names
    items = []
    for name, _ in S.language.relations:
        items += [f"{name}({','.join(nm[x] for x in t)})" for t in sorted(S.relation(name))]
    for name, _, _ in S.language.functions:
        items += [f"{name}({','.join(nm[x] for x in d)})={{{','.join(nm[x] for x in sorted(img))}}}"
                  for d, img in sorted(S.function(name).items())]
    return " ".join(items) or "-"


# core -------------------------------------------------------------------------

def core_closure(run: Run, a) -> None:
    S = run.structure(a.file)
    cl_ = closure_indices(S, _ids(S, a.of))
    run.emit("closure: " + " ".join(S.names[v] for v in cl_))


def core_induce(run: Run, a) -> None:
    S = run.structure(a.file)
    verts = _ids(S, a.of)
    if not is_closed(S, verts):
        raise UsageError("the vertex set is not closed: " + " ".join(S.names[v] for v in closure_indices(S, verts)))
    run.emit(format_structure(S.restrict(verts)))


def core_embed(run: Run, a) -> None:
    A, B = run.structure(a.source), run.structure(a.target)
    kind = {"embedding": EMBEDDING, "monomorphism": MONOMORPHISM, "homomorphism": HOMOMORPHISM}[a.kind]
    maps = embeddings(A, B, kind, limit=None if a.all else 1)
    if not maps:
        run.emit(f"{a.kind}: none")
        run.prop(f"{a.kind} exists", "exhaustive search", "fail")
        return
    for f in maps:
        run.emit(f"{a.kind}: {_fmt_map(A, B, f)}")
    run.prop(f"{a.kind} exists", "exhaustive search", "pass")


def core_amalgam(run: Run, a) -> None:
    A, B1, B2 = run.structure(a.base), run.structure(a.left), run.structure(a.right)
    f1, f2 = _pairs(a.map1, A, B1), _pairs(a.map2, A, B2)
    C, _, _ = free_amalgam(A, B1, B2, f1, f2)
    run.emit(format_structure(C))


def core_irreducible(run: Run, a) -> None:
    S = run.structure(a.file)
    if is_irreducible(S):
        run.emit("irreducible: true")
        return
    run.emit("irreducible: false")
    m, comps = split(S)
    run.emit("separator: " + " ".join(S.names[v] for v in bits(m)))
    for c in comps:
        run.emit("piece: " + " ".join(S.names[v] for v in bits(c)))


def core_aut(run: Run, a) -> None:
    S = run.structure(a.file)
    auts = automorphisms(S)
    run.emit(f"automorphisms: {len(auts)}")
    if a.list:
        for g in auts:
            run.emit("aut: " + _fmt_map(S, S, g))


# partite ------------------------------------------------------------------------

def partite_power(run: Run, a) -> None:
    B = _partite(run, a.file, a.base)
    P = pt.partite_power(B, a.n, run.budget)
    bad = pt.partite_violation(P)
    run.prop("power is a partite system", f"{P.carrier.n} vertices", "pass" if bad is None else f"fail: {bad}")
    run.emit(format_structure(P.carrier, P.part_names()))


def _parse_line(spec: str, t: int) -> pt.CombinatorialLine:
    fixed = []
    for ch in spec.split(","):
        if ch == "*":
            fixed.append(None)
        else:
            try:
                x = int(ch)
            except ValueError:
                raise UsageError(f"bad line letter {ch!r}") from None
            if not 0 <= x < t:
                raise UsageError(f"line letter {x} out of range 0..{t - 1}")
            fixed.append(x)
    try:
        return pt.CombinatorialLine(len(fixed), frozenset(j for j, x in enumerate(fixed) if x is None), tuple(fixed))
    except ValueError as e:
        raise UsageError(str(e)) from None


def partite_line(run: Run, a) -> None:
    B = _partite(run, a.file, a.base)
    secs = pt.sections(B.base, B)
    line = _parse_line(a.line, len(secs))
    C = pt.partite_power(B, line.N, run.budget)
    f = pt.line_embedding(C, B, line, secs)
    ok = pt.is_partite_embedding(B, C, f)
    run.prop("line map is a partite embedding", "definition check", "pass" if ok else "fail")
    for v in range(B.carrier.n):
        run.emit(f"{B.carrier.names[v]} -> {C.carrier.names[f[v]]}")


def partite_verify_arrow(run: Run, a) -> None:
    C, B, A = run.structure(a.big), run.structure(a.b), run.structure(a.a)
    res = pt.verify_arrow(C, B, A, a.k, run.budget)
    run.emit(f"arrow: {'true' if res.holds else 'false'}")
    run.emit(f"copies of A: {res.a_copies}")
    run.emit(f"copies of B: {res.b_copies}")
    scope = f"all {a.k}-colorings of {res.a_copies} copies"
    run.prop("arrow", scope, "pass" if res.holds else "fail")
    if res.witness is not None:
        for cp in sorted(res.witness):
            run.counterexamples.append(f"color {res.witness[cp]} on " + " ".join(C.names[v] for v in cp))


def partite_construct(run: Run, a) -> None:
    A, B = run.structure(a.a), run.structure(a.b)
    C0 = run.structure(a.c0) if a.c0 else pt.base_ramsey_bruteforce(A, B, a.k, run.budget)
    C, rep = pt.partite_construction(A, B, C0, a.k, budget=run.budget, cap=a.cap)
    run.emit(format_structure(C))
    for st in rep.stages:
        run.prop(f"stage {st.stage} line argument", f"{st.sections} sections, N={st.N}",
                 "pass" if st.certified else "partial (dimension not certified)")
    for stage, status in rep.property_i:
        run.prop(f"picture {stage} irreducible parts transversal", "irreducible subsystem sweep", status)
    if not a.no_verify:
        res = pt.verify_arrow(C, B, A, a.k, run.budget)
        run.prop("arrow", f"all {a.k}-colorings of {res.a_copies} copies", "pass" if res.holds else "fail")


def partite_complete(run: Run, a) -> None:
    S = run.structure(a.file)
    run.emit(format_structure(pt.decompletion(S) if a.undo else pt.completion(S)))


# order ----------------------------------------------------------------------------

def order_analyze(run: Run, a) -> None:
    S = run.structure(a.file).without_order()
    an = od.analyze(S)
    nm = S.names
    for v in range(S.n):
        run.emit(f"vertex {nm[v]} level {an.level[v]} component {an.component[v]} "
                 f"closure {' '.join(nm[u] for u in bits(an.closure[v]))}")
    if od.is_closure_extension(S):
        run.emit("closure-extension: true")
        run.emit("core: " + " ".join(nm[v] for v in od.core(S)))
    else:
        run.emit("closure-extension: false")


def order_build_class(run: Run, a) -> None:
    U = _universe(a.cls, a.max_n)
    O, admitted = od.build_admissible_class(U, run.budget)
    run.emit(f"structures: {len(U)}")
    run.emit(f"admitted orderings: {len(admitted)}")
    for X in admitted:
        run.emit(f"admitted n={X.n}: " + " ".join(X.names[v] for v in X.order()) + " | " + _describe(X))


def order_check_axioms(run: Run, a) -> None:
    U = _universe(a.cls, a.max_n)
    O, _ = od.build_admissible_class(U, run.budget)
    rep = od.check_admissibility_axioms(O, U, a5=not a.no_a5, budget=run.budget)
    for line in rep.lines():
        run.emit(line)
    for k in sorted(rep.violations):
        run.prop(k, f"{rep.checked[k]} cases", "pass" if not rep.violations[k] else "fail")
        run.counterexamples.extend(f"{k}: {v}" for v in rep.violations[k][:5])


def order_verify_op(run: Run, a) -> None:
    A, B = run.structure(a.a), run.structure(a.b)
    O = _orderings(a.orderings, run.budget)
    if not A.language.has_order:
        raise UsageError("A must be ordered")
    res = od.verify_ordering_property(A, B, O, a.all_a, run.budget)
    run.emit(f"ordering property: {'true' if res.holds else 'false'}")
    run.emit(f"admitted orderings of B checked: {res.checked}")
    run.prop("every admitted ordering of B contains A", f"{res.checked} orderings", "pass" if res.holds else "fail")
    if res.witness is not None:
        W = res.witness
        run.counterexamples.append("ordering of B: " + " ".join(W.names[v] for v in W.order()))


def order_witness_b0(run: Run, a) -> None:
    A = run.structure(a.file)
    if not A.language.has_order:
        raise UsageError("A must be ordered")
    O = _orderings(a.orderings, run.budget)
    B0 = od.ordering_witness_b0(A, O, run.budget)
    run.emit(format_structure(B0))
    if not a.no_verify:
        holds, checked = od.witness_claim(A, B0, O, run.budget)
        run.prop("qualifying reorderings contain A", f"{checked} reorderings", "pass" if holds else "fail")


# eppa ------------------------------------------------------------------------------

def eppa_reduct(run: Run, a) -> None:
    run.emit(format_structure(ep.relational_reduct(run.structure(a.file))))


def eppa_base(run: Run, a) -> None:
    A = run.structure(a.file)
    Bm = ep.base_eppa_bruteforce(ep.relational_reduct(A), run.budget, a.max_n)
    run.emit(format_structure(Bm))


def _extension(run: Run, a) -> ep.Extension:
    A = run.structure(a.file)
    Bm = run.structure(a.base) if a.base else None
    return ep.build_eppa_extension(A, Bm, run.budget)


def eppa_extend(run: Run, a) -> None:
    ext = _extension(run, a)
    run.emit(format_structure(ext.C))
    for x, y in enumerate(ext.phi):
        run.emit(f"# phi {ext.A.names[x]} -> {ext.C.names[y]}")


def eppa_certify(run: Run, a) -> None:
    ext = _extension(run, a)
    cert = ep.certify(ext, a.cap, budget=run.budget)
    run.emit(f"extension vertices: {ext.C.n}")
    run.emit(f"base vertices: {ext.Bm.n}")
    run.emit(f"big sets: {len(ext.big)}")
    for p, sc, st in cert.entries:
        run.emit(f"{p} [{sc}] {st}")
        run.prop(p, sc, st)


# classes ------------------------------------------------------------------------------

def classes_encode(run: Run, a) -> None:
    doc = run.graph(a.file)
    if a.kind == "korientation":
        S = cl.encode_k_orientation(_digraph_of(doc), a.k)
    elif a.kind == "steiner":
        S = cl.encode_steiner(_hypergraph_of(doc), a.r, a.t)
    else:
        S = cl.encode_bowtie_plus(_graph_of(doc))
    run.emit(format_structure(S))


def classes_decode(run: Run, a) -> None:
    S = run.structure(a.file)
    if a.kind == "korientation":
        doc = _digraph_doc(cl.decode_k_orientation(S))
    elif a.kind == "steiner":
        doc = _hypergraph_doc(cl.decode_steiner(S, a.r, a.t))
    else:
        doc = _graph_doc(cl.decode_bowtie_plus(S))
    run.emit(format_graph(doc))


def classes_goodify(run: Run, a) -> None:
    G = _graph_of(run.graph(a.file))
    H = cl.goodify(G)
    run.prop("output good and bowtie-free", "exhaustive check", "pass" if cl.is_good(H) else "fail")
    run.prop("input induced in output", "definition check", "pass" if H.induced(range(G.n)) == G else "fail")
    run.emit(format_graph(_graph_doc(H)))


def classes_sweep(run: Run, a) -> None:
    rep = cl.sweep(a.kind, a.max_n, a.k, a.r, a.t, run.budget, run.jobs)
    for line in rep.lines():
        run.emit(line)
    run.prop("free amalgams stay in the class", f"{rep.checked} amalgams up to {a.max_n} vertices",
             "pass" if rep.ok else f"fail ({rep.count})")
    run.counterexamples.extend(rep.violations)


def classes_chimney(run: Run, a) -> None:
    run.emit(format_graph(_graph_doc(cl.chimney(a.n))))


# parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--budget", help=f"budget JSON file (overrides ${ENV_VAR})")
    common.add_argument("--jobs", type=int, default=1, help="worker processes; 0 means one per CPU")
    common.add_argument("--cert", help="write a certificate to this file")
    common.add_argument("-o", "--output", help="write the result here instead of stdout")

    p = argparse.ArgumentParser(prog="ramseyfn", description="Structural Ramsey tools for structures with partial functions.")
    top = p.add_subparsers(dest="group", required=True)

    def group(name, help_):
        g = top.add_parser(name, help=help_)
        return g.add_subparsers(dest="cmd", required=True)

    def cmd(sub, name, fn: Callable, help_):
        c = sub.add_parser(name, parents=[common], help=help_)
        c.set_defaults(fn=fn)
        return c

    s = group("core", "structures, closures, embeddings, amalgams")
    c = cmd(s, "closure", core_closure, "closure of a vertex set")
    c.add_argument("file")
    c.add_argument("--of", nargs="+", required=True)
    c = cmd(s, "induce", core_induce, "substructure on a closed vertex set")
    c.add_argument("file")
    c.add_argument("--of", nargs="*", default=[])
    c = cmd(s, "embed", core_embed, "embeddings between structures")
    c.add_argument("source")
    c.add_argument("target")
    c.add_argument("--kind", choices=["embedding", "monomorphism", "homomorphism"], default="embedding")
    c.add_argument("--all", action="store_true")
    c = cmd(s, "amalgam", core_amalgam, "free amalgam of two structures over a third")
    c.add_argument("base")
    c.add_argument("left")
    c.add_argument("right")
    c.add_argument("--map1", nargs="*")
    c.add_argument("--map2", nargs="*")
    c = cmd(s, "irreducible", core_irreducible, "irreducibility test")
    c.add_argument("file")
    c = cmd(s, "aut", core_aut, "automorphism group")
    c.add_argument("file")
    c.add_argument("--list", action="store_true")

    s = group("partite", "partite systems, powers, lines, arrows")
    c = cmd(s, "power", partite_power, "partite power of a system")
    c.add_argument("file")
    c.add_argument("--base")
    c.add_argument("--n", type=int, required=True)
    c = cmd(s, "line", partite_line, "embedding attached to a combinatorial line")
    c.add_argument("file")
    c.add_argument("--base")
    c.add_argument("--line", required=True, help="comma separated letters, * on moving coordinates")
    c = cmd(s, "verify-arrow", partite_verify_arrow, "decide C -> (B)^A_k exhaustively")
    c.add_argument("big", metavar="C")
    c.add_argument("b", metavar="B")
    c.add_argument("a", metavar="A")
    c.add_argument("--k", type=int, default=2)
    c = cmd(s, "construct", partite_construct, "iterated partite construction")
    c.add_argument("a", metavar="A")
    c.add_argument("b", metavar="B")
    c.add_argument("--c0")
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--cap", type=int)
    c.add_argument("--no-verify", action="store_true")
    c = cmd(s, "complete", partite_complete, "completion of a structure (or its inverse)")
    c.add_argument("file")
    c.add_argument("--undo", action="store_true")

    s = group("order", "closure analysis and admissible orderings")
    c = cmd(s, "analyze", order_analyze, "closures, components and levels")
    c.add_argument("file")
    for name, fn, help_ in (("build-class", order_build_class, "admitted orderings of a universe"),
                            ("check-axioms", order_check_axioms, "check axioms A1-A6 on a universe")):
        c = cmd(s, name, fn, help_)
        c.add_argument("--class", dest="cls", choices=["forests", "graphs"], required=True)
        c.add_argument("--max-n", type=int, default=4)
        if name == "check-axioms":
            c.add_argument("--no-a5", action="store_true")
    c = cmd(s, "verify-op", order_verify_op, "ordering property for a pair A, B")
    c.add_argument("a", metavar="A")
    c.add_argument("b", metavar="B")
    c.add_argument("--orderings", choices=["admissible", "free"], default="admissible")
    c.add_argument("--all-a", action="store_true", help="require every admitted ordering of A")
    c = cmd(s, "witness-b0", order_witness_b0, "witness structure for the ordering property")
    c.add_argument("file")
    c.add_argument("--orderings", choices=["admissible", "free"], default="admissible")
    c.add_argument("--no-verify", action="store_true")

    s = group("eppa", "extension property for partial automorphisms")
    c = cmd(s, "reduct", eppa_reduct, "relational reduct")
    c.add_argument("file")
    c = cmd(s, "base", eppa_base, "smallest relational EPPA witness by search")
    c.add_argument("file")
    c.add_argument("--max-n", type=int)
    for name, fn, help_ in (("extend", eppa_extend, "build the extension"),
                            ("certify", eppa_certify, "build and certify the extension")):
        c = cmd(s, name, fn, help_)
        c.add_argument("file")
        c.add_argument("--base", help="relational base extension (default: searched)")
        if name == "certify":
            c.add_argument("--cap", type=int, help="largest irreducible substructure swept")

    s = group("classes", "orientations, Steiner systems, bowtie-free graphs")
    for name, fn, help_ in (("encode", classes_encode, "encode a digraph, hypergraph or graph"),
                            ("decode", classes_decode, "decode a structure")):
        c = cmd(s, name, fn, help_)
        c.add_argument("file")
        c.add_argument("--kind", choices=["korientation", "steiner", "bowtie"], required=True)
        c.add_argument("--k", type=int, default=2)
        c.add_argument("--r", type=int, default=3)
        c.add_argument("--t", type=int, default=2)
    c = cmd(s, "goodify", classes_goodify, "good bowtie-free supergraph")
    c.add_argument("file")
    c = cmd(s, "sweep", classes_sweep, "free amalgamation closure sweep")
    c.add_argument("--kind", choices=list(cl.SWEEP_KINDS), required=True)
    c.add_argument("--max-n", type=int, default=4)
    c.add_argument("--k", type=int, default=2)
    c.add_argument("--r", type=int, default=3)
    c.add_argument("--t", type=int, default=2)
    c = cmd(s, "chimney", classes_chimney, "the chimney graph Ch_n")
    c.add_argument("n", type=int)
    return p


def _command_words(argv: Sequence[str]) -> list[str]:
    """argv without the options that must not change the certificate."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        name = tok.split("=", 1)[0]
        if name in ("--jobs", "--cert", "--output", "-o", "--budget"):
            skip = "=" not in tok
            continue
        out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    try:
        budget = load_budget(args.budget)
    except (OSError, ValueError, TypeError) as e:
        print(f"error: bad budget file: {e}", file=sys.stderr)
        return 2
    run = Run(_command_words(argv), budget)
    run.jobs = args.jobs if args.jobs > 0 else (os.cpu_count() or 1)
    try:
        args.fn(run, args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except BudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (UsageError, StructureError, cl.ClassError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    output = "".join(line + "\n" for line in run.out)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(output)
    else:
        sys.stdout.write(output)
    if args.cert:
        with open(args.cert, "w") as fh:
            fh.write(run.certificate(output))
    return run.status


if __name__ == "__main__":
    sys.exit(main())
