"""Irreducibility and the irreducible substructures of a structure.

A structure splits as a free amalgam of two proper substructures exactly
when some closed proper set M leaves the rest disconnected in the
hypergraph whose edges are relation tuples and (domain + image) function
entries, each edge restricted to the complement of M.  Sides built from a
union of components together with M are automatically closed, because every
function entry whose domain meets a component keeps its image in that
component or in M.
"""
from __future__ import annotations

from itertools import combinations

from .structures import Structure, bits, closure_mask, mask_of


def _components(mask: int, edges: list[int]) -> list[int]:
    """Connected components of ``mask`` under the traces of ``edges``."""
    comps: list[int] = []
    rest = mask
    live = [e & mask for e in edges]
    live = [e for e in live if e & (e - 1)]
    while rest:
        low = rest & -rest
        comp = low
        grew = True
        while grew:
            grew = False
            for e in live:
                if e & comp and e & ~comp:
                    comp |= e
                    grew = True
        comps.append(comp)
        rest &= ~comp
    return comps


def _is_connected(mask: int, edges: list[int]) -> bool:
    if mask & (mask - 1) == 0:
        return True
    return len(_components(mask, edges)) == 1


def is_irreducible(A: Structure) -> bool:
    """True iff A is not a free amalgam of two proper substructures."""
    n = A.n
    if n <= 1:
        return True
    full = (1 << n) - 1
    edges = A.hyperedges()
    if not _is_connected(full, edges):
        return False
    entries = [(mask_of(dom), mask_of(img)) for _, dom, img in A.entries()]
    for m in range(1, full):
        if any(not (dm & ~m) and im & ~m for dm, im in entries):
            continue
        if not _is_connected(full & ~m, edges):
            return False
    return True


def is_irreducible_set(A: Structure, verts) -> bool:
    return is_irreducible(A.restrict(verts))


def split(A: Structure, max_separator: int | None = None) -> tuple[int, list[int]] | None:
    """Find a closed proper set M whose complement falls apart.

    Returns (M, components of the complement) or None.  With
    ``max_separator`` only separators generated by at most that many
    vertices are tried, and None then only means no small separator exists.
    """
    n = A.n
    full = (1 << n) - 1
    edges = A.hyperedges()
    comps = _components(full, edges)
    if len(comps) > 1:
        return 0, comps
    if max_separator is None:
        entries = [(mask_of(dom), mask_of(img)) for _, dom, img in A.entries()]
        for m in range(1, full):
            if any(not (dm & ~m) and im & ~m for dm, im in entries):
                continue
            comps = _components(full & ~m, edges)
            if len(comps) > 1:
                return m, comps
        return None
    seen = set()
    for k in range(1, max_separator + 1):
        for gens in combinations(range(n), k):
            m = closure_mask(A, mask_of(gens))
            if m == full or m in seen:
                continue
            seen.add(m)
            comps = _components(full & ~m, edges)
            if len(comps) > 1:
                return m, comps
    return None


def irreducible_atoms(A: Structure, exhaustive_limit: int = 14, max_separator: int = 3) -> tuple[list[list[int]], bool]:
    """Decompose A along free amalgamations into irreducible pieces.

    Every irreducible substructure of A lies inside one of the returned
    vertex sets.  The flag is False when some piece larger than
    ``exhaustive_limit`` could neither be split by a small separator nor
    certified irreducible; that piece is returned whole.
    """
    atoms: list[int] = []
    complete = True
    stack = [(1 << A.n) - 1]
    while stack:
        m = stack.pop()
        verts = bits(m)
        sub = A.restrict(verts)
        found = split(sub, None if sub.n <= exhaustive_limit else max_separator)
        if found is None:
            if sub.n > exhaustive_limit:
                complete = False
            atoms.append(m)
            continue
        sep, comps = found
        for c in comps:
            piece = sep | c
            stack.append(mask_of(verts[i] for i in bits(piece)))
    atoms = sorted(set(atoms))
    # drop pieces contained in others
    atoms = [a for a in atoms if not any(a != b and a & b == a for b in atoms)]
    return [bits(a) for a in sorted(atoms)], complete


def irreducible_substructures(A: Structure, cap: int | None = None) -> tuple[list[tuple[int, ...]], bool]:
    """Vertex sets of all irreducible substructures (closed, nonempty).

    Uses the atom decomposition, then enumerates closed subsets inside each
    atom.  Sets larger than ``cap`` are skipped.  The flag reports whether the
    enumeration is complete (atoms certified and not truncated by the cap).
    """
    atoms, complete = irreducible_atoms(A)
    found: set[tuple[int, ...]] = set()
    for atom in atoms:
        if len(atom) > 20:
            complete = False
            continue
        sub = A.restrict(atom)
        entries = [(mask_of(dom), mask_of(img)) for _, dom, img in sub.entries()]
        for m in range(1, 1 << len(atom)):
            if cap is not None and bin(m).count("1") > cap:
                continue
            if any(not (dm & ~m) and im & ~m for dm, im in entries):
                continue
            verts = [atom[i] for i in bits(m)]
            if is_irreducible(A.restrict(verts)):
                found.add(tuple(verts))
        if cap is not None and len(atom) > cap:
            complete = False
    return sorted(found, key=lambda t: (len(t), t)), complete
