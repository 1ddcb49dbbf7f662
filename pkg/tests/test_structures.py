import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramseyfn import (EMBEDDING, HOMOMORPHISM, MONOMORPHISM, NONE, Language, Structure, StructureError,
                      VertexMap, automorphisms, check_map, closure, copies, disjoint_union, embeddings,
                      free_amalgam, induced_substructure, is_irreducible, irreducible_substructures)
from ramseyfn.embeddings import canonical_code, compose, inverse, is_isomorphic
from ramseyfn.generate import FOREST, GRAPH, graph_from_edges, raw_structures
from ramseyfn.irreducible import split
from ramseyfn.structures import closure_indices, closed_masks, bits

from helpers import FIG2, FIG4, edge, path3, struct, triangle
from oracles import (automorphisms_oracle, closed_sets, closure_oracle, embeddings_oracle, irreducible_oracle,
                     map_kind_oracle)
from strategies import MICRO, WIDE, structures


# language and structure validation -------------------------------------------------------

def test_language_rejects_duplicate_symbols():
    with pytest.raises(StructureError):
        Language((("R", 2),), (("R", 1, 1),))


def test_language_rejects_zero_arity():
    with pytest.raises(StructureError):
        Language((("R", 0),))
    with pytest.raises(StructureError):
        Language((), (("F", 1, 0),))


def test_image_size_must_match_range_arity():
    lang = Language((), (("F", 1, 2),))
    with pytest.raises(StructureError):
        Structure(lang, ["a", "b"], {}, {"F": {(0,): [1]}})


def test_unknown_symbol_rejected():
    with pytest.raises(StructureError):
        Structure(GRAPH, ["a"], {"S": [(0,)]}, {})


def test_order_must_be_total():
    lang = GRAPH.ordered()
    with pytest.raises(StructureError):
        Structure(lang, ["a", "b"], {"<": []}, {})


# closure ---------------------------------------------------------------------------------

def test_closure_of_pair_in_mixed_arity_example():
    S = struct(FIG4)
    assert closure(S, ["a", "b"]).names == ("a", "b", "c")


def test_closure_of_empty_set_is_empty():
    S = struct(FIG4)
    assert closure(S, []).n == 0


def test_closure_follows_father_path():
    S = Structure(FOREST, ["v1", "v2", "v3"], {}, {"F": {(0,): [1], (1,): [2]}})
    assert closure(S, ["v1"]).names == ("v1", "v2", "v3")
    assert closure_oracle(S, {0}) == {0, 1, 2}


def test_closure_unknown_vertex():
    with pytest.raises(StructureError):
        closure(struct(FIG4), ["z"])


@settings(max_examples=150, deadline=None)
@given(structures(WIDE, max_n=5), st.data())
def test_closure_matches_minimal_closed_superset(S, data):
    B = data.draw(st.sets(st.integers(0, max(S.n - 1, 0)), max_size=S.n)) if S.n else set()
    got = set(closure_indices(S, B))
    assert got == closure_oracle(S, B)
    # contains, idempotent, monotone
    assert B <= got
    assert set(closure_indices(S, got)) == got
    for extra in range(S.n):
        assert got <= set(closure_indices(S, B | {extra}))


@settings(max_examples=100, deadline=None)
@given(structures(MICRO, max_n=5), st.data())
def test_unary_closure_is_union_of_vertex_closures(S, data):
    B = data.draw(st.sets(st.integers(0, max(S.n - 1, 0)), max_size=S.n)) if S.n else set()
    union = set()
    for v in B:
        union |= set(closure_indices(S, [v]))
    assert set(closure_indices(S, B)) == union


@settings(max_examples=80, deadline=None)
@given(structures(WIDE, max_n=4))
def test_closed_masks_match_definition(S):
    assert {frozenset(bits(m)) for m in closed_masks(S)} == set(closed_sets(S))


# induced substructures -------------------------------------------------------------------

def test_induce_rejects_non_closed_set():
    with pytest.raises(StructureError, match="not closed"):
        induced_substructure(struct(FIG4), ["a", "b"])


def test_induce_on_everything_is_identity():
    S = struct(FIG4)
    assert induced_substructure(S, S.names) == S


@pytest.mark.parametrize("pair", [("0", "1"), ("0", "2"), ("1", "2")])
def test_induced_edge_of_triangle(pair):
    T = triangle()
    sub = induced_substructure(T, pair)
    assert sub.relation("E") == {(0, 1), (1, 0)}
    inclusion = tuple(T.index(v) for v in pair)
    assert map_kind_oracle(sub, T, inclusion) == "embedding"
    assert check_map(sub, T, inclusion) == EMBEDDING


# maps ------------------------------------------------------------------------------------

def test_collapse_onto_loop_is_homomorphism_only():
    loop = Structure(GRAPH, ["x"], {"E": [(0, 0)]}, {})
    assert check_map(edge(), loop, (0, 0)) == HOMOMORPHISM


def test_identity_is_embedding():
    S = struct(FIG2)
    assert check_map(S, S, tuple(range(S.n))) == EMBEDDING
    assert VertexMap.from_ids(S, S, {v: v for v in S.names}).kind == EMBEDDING


def test_root_to_non_root_is_not_embedding():
    A = Structure(FOREST, ["r"], {}, {})
    B = Structure(FOREST, ["x", "y"], {}, {"F": {(0,): [1]}})
    assert check_map(A, B, (0,)) == MONOMORPHISM
    assert map_kind_oracle(A, B, (0,)) == "monomorphism"
    assert check_map(A, B, (1,)) == EMBEDDING


def test_non_edge_onto_edge_is_monomorphism():
    empty2 = graph_from_edges(2, [])
    assert check_map(empty2, edge(), (0, 1)) == MONOMORPHISM


def test_wrong_length_map_is_none():
    assert check_map(edge(), triangle(), (0,)) == NONE


@settings(max_examples=200, deadline=None)
@given(structures(WIDE, max_n=3), structures(WIDE, max_n=3), st.data())
def test_check_map_matches_definition(A, B, data):
    if B.n == 0 and A.n:
        return
    f = tuple(data.draw(st.integers(0, B.n - 1)) for _ in range(A.n))
    assert check_map(A, B, f) == map_kind_oracle(A, B, f)


# embeddings and automorphisms ------------------------------------------------------------

def test_edge_into_triangle():
    assert len(embeddings(edge(), triangle())) == 6
    assert len(copies(edge(), triangle())) == 3


def test_bowtie_does_not_embed_into_small_chimney():
    from ramseyfn.classes import BOWTIE, chimney
    assert embeddings(BOWTIE.structure(), chimney(3).structure(), kind=MONOMORPHISM) == []


@pytest.mark.parametrize("S,order", [(triangle(), 6), (path3(), 2), (edge(), 2)])
def test_automorphism_counts(S, order):
    assert len(automorphisms(S)) == order


def test_chimney_two_has_four_automorphisms():
    from ramseyfn.classes import chimney
    assert len(automorphisms(chimney(2).structure())) == 4


def test_rigid_structure_has_identity_only():
    lang = Language((("P", 1), ("Q", 1)))
    S = Structure(lang, ["a", "b"], {"P": [(0,)], "Q": [(1,)]}, {})
    assert automorphisms(S) == [(0, 1)]


@settings(max_examples=120, deadline=None)
@given(structures(WIDE, max_n=3), structures(WIDE, max_n=4))
def test_embeddings_match_exhaustive_injections(A, B):
    assert embeddings(A, B) == embeddings_oracle(A, B)


@settings(max_examples=80, deadline=None)
@given(structures(MICRO, max_n=5))
def test_automorphisms_form_a_group(S):
    auts = set(automorphisms(S))
    assert auts == set(automorphisms_oracle(S))
    assert tuple(range(S.n)) in auts
    for f in auts:
        assert inverse(f) in auts
        for g in auts:
            assert compose(f, g) in auts


@settings(max_examples=60, deadline=None)
@given(structures(MICRO, max_n=2), structures(MICRO, max_n=3), structures(MICRO, max_n=4))
def test_embeddings_compose(A, B, C):
    ac = set(embeddings(A, C))
    for f in embeddings(A, B):
        for g in embeddings(B, C):
            assert compose(f, g) in ac


@settings(max_examples=80, deadline=None)
@given(structures(WIDE, max_n=4), st.permutations(range(4)))
def test_canonical_code_is_invariant(S, perm):
    p = [x for x in perm if x < S.n]
    T = S.permuted(p)
    assert canonical_code(T) == canonical_code(S)
    assert is_isomorphic(S, T)


# amalgamation ----------------------------------------------------------------------------

def test_two_edges_over_a_vertex_make_a_path():
    v = graph_from_edges(1, [])
    C, b1, b2 = free_amalgam(v, edge(), edge(), (1,), (0,))
    assert C.n == 3
    assert is_isomorphic(C, path3())
    assert check_map(edge(), C, b1) == EMBEDDING
    assert check_map(edge(), C, b2) == EMBEDDING
    only1 = set(b1) - set(b2)
    only2 = set(b2) - set(b1)
    for t in C.relation("E"):
        assert not (set(t) & only1 and set(t) & only2)


def test_full_overlap_amalgam_is_the_structure():
    S = struct(FIG2)
    ident = tuple(range(S.n))
    C, _, _ = free_amalgam(S, S, S, ident, ident)
    assert C == S


def test_amalgam_needs_embeddings():
    v = graph_from_edges(1, [])
    with pytest.raises(StructureError):
        free_amalgam(edge(), edge(), edge(), (0, 0), (0, 1))
    with pytest.raises(StructureError):
        free_amalgam(v, edge(), edge(), (5,), (0,))


@settings(max_examples=80, deadline=None)
@given(structures(MICRO, max_n=3), structures(MICRO, max_n=3), st.data())
def test_free_amalgam_over_closed_subset(B1, B2, data):
    closed = [bits(m) for m in closed_masks(B1)]
    xs = data.draw(st.sampled_from(closed))
    A = B1.restrict(xs)
    targets = embeddings(A, B2)
    if not targets:
        return
    a2 = data.draw(st.sampled_from(targets))
    C, b1, b2 = free_amalgam(A, B1, B2, tuple(xs), a2)
    assert map_kind_oracle(B1, C, b1) == "embedding"
    assert map_kind_oracle(B2, C, b2) == "embedding"
    s1, s2 = set(b1), set(b2)
    for name, _ in C.language.relation_symbols:
        for t in C.relation(name):
            assert set(t) <= s1 or set(t) <= s2
    for name, dom, img in C.entries():
        assert set(dom) | img <= s1 or set(dom) | img <= s2


def test_disjoint_union_renames_clashes():
    U, maps = disjoint_union([edge(), edge()])
    assert U.n == 4 and len(set(U.names)) == 4
    assert maps == [[0, 1], [2, 3]]


# irreducibility --------------------------------------------------------------------------

def test_fig2_structure_is_irreducible():
    assert is_irreducible(struct(FIG2))
    assert irreducible_oracle(struct(FIG2))


def test_single_vertex_is_irreducible():
    assert is_irreducible(graph_from_edges(1, []))


def test_two_disjoint_edges_are_reducible():
    S = graph_from_edges(4, [(0, 1), (2, 3)])
    assert not is_irreducible(S)
    assert not irreducible_oracle(S)
    assert split(S) is not None


def test_path_is_reducible_over_its_middle():
    S = path3()
    assert not is_irreducible(S)
    sep, comps = split(S)
    assert bits(sep) == [1]
    assert sorted(bits(c) for c in comps) == [[0], [2]]


@settings(max_examples=250, deadline=None)
@given(structures(WIDE, max_n=4))
def test_irreducible_matches_decomposition_oracle(S):
    assert is_irreducible(S) == irreducible_oracle(S)


def test_irreducible_substructures_of_path():
    subs, complete = irreducible_substructures(path3())
    assert complete
    assert sorted(subs) == [(0,), (0, 1), (1,), (1, 2), (2,)]


@settings(max_examples=60, deadline=None)
@given(structures(MICRO, max_n=4))
def test_irreducible_substructures_are_exactly_the_irreducible_closed_sets(S):
    subs, complete = irreducible_substructures(S)
    assert complete
    want = sorted(tuple(sorted(X)) for X in closed_sets(S) if X and irreducible_oracle(S.restrict(X)))
    assert sorted(subs) == want


def test_exhaustive_three_vertex_micro_agreement():
    # every labelled structure on 3 vertices over one binary relation and one unary function
    count = 0
    for S in raw_structures(MICRO, 3):
        assert is_irreducible(S) == irreducible_oracle(S)
        count += 1
    assert count == 2 ** 9 * 4 ** 3
