from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramseyfn import EMBEDDING, Language, Structure, StructureError, check_map, embeddings
from ramseyfn.budget import Budget, BudgetExceeded
from ramseyfn.embeddings import is_isomorphic
from ramseyfn.generate import graph_from_edges
from ramseyfn.partite import (CombinatorialLine, PartiteSystem, base_ramsey_bruteforce, check_property_i,
                              completion, count_lines, decompletion, enumerate_lines, find_monochromatic_line,
                              irreducible_transversality, is_bad_coloring, is_partite_embedding, line_embedding, partite_construction,
                              partite_power, partite_violation, sections, validate_partite, verify_arrow)

from helpers import FIG2, edge, path3, struct, triangle
from micro import micro_bases, micro_systems
from oracles import arrow_oracle, partite_power_oracle, transversal_irreducibles_oracle


def ordered(S):
    return S.with_order(range(S.n))


def micro_system():
    """Base: an edge x-y.  Part x = {x1, x2}, part y = {y1}; edges x1-y1 and x2-y1."""
    A = graph_from_edges(2, [(0, 1)], ["x", "y"])
    B = graph_from_edges(3, [(0, 2), (1, 2)], ["x1", "x2", "y1"])
    return PartiteSystem(A, B, (0, 0, 1))


# partite systems -----------------------------------------------------------------------------

def test_structure_is_partite_over_itself():
    assert validate_partite(PartiteSystem.trivial(struct(FIG2)))


def test_tuple_inside_one_part_is_rejected():
    A = graph_from_edges(1, [])
    B = Structure(A.language, ["p", "q"], {"E": [(0, 1), (1, 0)]}, {})
    sys = PartiteSystem(A, B, (0, 0))
    assert not validate_partite(sys)
    assert partite_violation(sys) is not None


def test_function_entry_must_be_transversal():
    lang = Language((), (("F", 1, 1),))
    A = Structure(lang, ["a", "b"], {}, {"F": {(0,): [1]}})
    B = Structure(lang, ["a1", "a2", "b1"], {}, {"F": {(0,): [1]}})
    sys = PartiteSystem(A, B, (0, 0, 1))
    assert "homomorphism" in partite_violation(sys) or "transversal" in partite_violation(sys)


def test_projection_must_be_homomorphism():
    A = graph_from_edges(2, [], ["x", "y"])
    B = graph_from_edges(2, [(0, 1)])
    assert partite_violation(PartiteSystem(A, B, (0, 1))) == "projection is not a homomorphism"


def test_from_parts_checks_cover():
    A = graph_from_edges(2, [], ["x", "y"])
    B = graph_from_edges(3, [])
    with pytest.raises(StructureError):
        PartiteSystem.from_parts(A, B, {"x": ["0"], "y": ["1"]})


# partite power ------------------------------------------------------------------------------

def test_first_power_is_the_system_itself():
    B = micro_system()
    C = partite_power(B, 1)
    assert is_isomorphic(C.carrier, B.carrier)
    assert validate_partite(C)


def test_singleton_parts_power_is_the_base():
    A = struct(FIG2)
    C = partite_power(PartiteSystem.trivial(A), 2)
    assert C.carrier.n == A.n
    assert is_isomorphic(C.carrier, A)


def test_square_of_micro_system():
    B = micro_system()
    C = partite_power(B, 2)
    assert [len(p) for p in C.parts()] == [4, 1]
    words, rels = partite_power_oracle(B, 2)
    assert sorted(C.coords) == sorted(words)
    got = {tuple(C.coords[x] for x in t) for t in C.carrier.relation("E")}
    assert got == rels["E"]
    # every x-word is adjacent to the single y-word, in both directions
    assert len(got) == 8


def test_power_copies_function_entries_coordinatewise():
    lang = Language((), (("F", 1, 1),))
    A = Structure(lang, ["a", "b"], {}, {"F": {(0,): [1]}})
    B = Structure(lang, ["a1", "a2", "b1", "b2"], {}, {"F": {(0,): [2], (1,): [3]}})
    sys = PartiteSystem(A, B, (0, 0, 1, 1))
    C = partite_power(sys, 2)
    table = {C.coords[d[0]]: {C.coords[x] for x in img} for d, img in C.carrier.function("F").items()}
    expect = {}
    for w in product([0, 1], repeat=2):
        expect[w] = {tuple(x + 2 for x in w)}
    assert table == expect
    assert validate_partite(C)


def test_power_rejects_invalid_system():
    A = graph_from_edges(1, [])
    B = Structure(A.language, ["p", "q"], {"E": [(0, 1), (1, 0)]}, {})
    with pytest.raises(StructureError):
        partite_power(PartiteSystem(A, B, (0, 0)), 2)


def test_power_respects_vertex_budget():
    with pytest.raises(BudgetExceeded):
        partite_power(micro_system(), 3, Budget(max_vertices=5))


# lines --------------------------------------------------------------------------------------

def test_line_counts():
    for N in range(1, 4):
        for t in range(1, 4):
            assert len(list(enumerate_lines(N, t))) == count_lines(N, t) == (t + 1) ** N - t ** N


def test_line_needs_moving_coordinates():
    with pytest.raises(ValueError):
        CombinatorialLine(2, frozenset(), (0, 1))


def test_constant_coloring_has_a_line():
    line = find_monochromatic_line(2, 3, lambda w: 0)
    assert line is not None


def test_parity_coloring_on_square():
    color = lambda w: sum(w) % 2
    line = find_monochromatic_line(2, 2, color)
    assert line is not None
    ws = line.words(2)
    assert len({color(w) for w in ws}) == 1
    # exhaustive: the only monochromatic line of [2]^2 under parity is the diagonal
    mono = [L for L in enumerate_lines(2, 2) if len({color(w) for w in L.words(2)}) == 1]
    assert [L.moving for L in mono] == [frozenset({0, 1})]


def test_no_line_when_two_letters_differ():
    assert find_monochromatic_line(1, 2, {(0,): 0, (1,): 1}) is None


def test_diagonal_line_gives_constant_words():
    B = micro_system()
    C = partite_power(B, 2)
    A = B.base
    secs = sections(A, B)
    e = line_embedding(C, B, CombinatorialLine(2, frozenset({0, 1}), (None, None)), secs)
    assert [C.coords[x] for x in e] == [(v, v) for v in range(B.carrier.n)]


def test_every_line_gives_a_partite_embedding():
    B = micro_system()
    A = B.base
    secs = sections(A, B)
    assert len(secs) == 2
    C = partite_power(B, 2)
    images = {}
    for line in enumerate_lines(2, len(secs)):
        e = line_embedding(C, B, line, secs)
        assert is_partite_embedding(B, C, e)
        assert check_map(B.carrier, C.carrier, e) == EMBEDDING
        images[line] = frozenset(e)
    lines = list(images)
    for i, L1 in enumerate(lines):
        for L2 in lines[i + 1:]:
            if L1.fixed != L2.fixed:
                assert images[L1] != images[L2]


def test_monochromatic_line_gives_monochromatic_copy():
    # color each section of the square by its word's parity; the line found carries
    # an embedding of B whose sections all share a color
    B = micro_system()
    A = B.base
    secs = sections(A, B)
    C = partite_power(B, 2)
    csecs = sections(A, C)
    color = {}
    for s in csecs:
        word = tuple(secs.index(tuple(C.coords[x][j] for x in s)) for j in range(2))
        color[s] = sum(word) % 2
    line = find_monochromatic_line(2, len(secs), lambda w: sum(w) % 2)
    e = line_embedding(C, B, line, secs)
    inside = [s for s in csecs if set(s) <= set(e)]
    assert len(inside) == len(secs)
    assert len({color[s] for s in inside}) == 1


def test_irreducible_subsystems_stay_transversal():
    B = micro_system()
    for N in (1, 2, 3):
        C = partite_power(B, N)
        assert check_property_i(C, B.carrier) == "pass"


SMALL_SYSTEMS = [B for A in micro_bases() if A.n <= 2 for B in micro_systems(A)]


def test_transversality_matches_oracle_on_small_systems():
    assert len(SMALL_SYSTEMS) == 533
    for B in SMALL_SYSTEMS:
        status, _ = irreducible_transversality(B)
        assert (status == "pass") == transversal_irreducibles_oracle(B.carrier, B.proj)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMALL_SYSTEMS))
def test_transversality_of_squares_matches_oracle(B):
    C = partite_power(B, 2)
    status, _ = irreducible_transversality(C)
    assert (status == "pass") == transversal_irreducibles_oracle(C.carrier, C.proj)


def test_father_and_edge_make_a_non_transversal_irreducible_set():
    # F(x1) = y1 and an edge x1-y2: {x1, y1, y2} is closed and cannot be split
    A = Structure(Language((("R", 2),), (("F", 1, 1),)), ["x", "y"], {"R": [(0, 1), (1, 0)]}, {"F": {(0,): [1]}})
    B = Structure(A.language, ["x1", "y1", "y2"], {"R": [(0, 2), (2, 0)]}, {"F": {(0,): [1]}})
    status, method = irreducible_transversality(PartiteSystem(A, B, (0, 1, 1)))
    assert status == "fail: irreducible set ['x1', 'y1', 'y2'] is not transversal"
    assert method == "listing"


def test_relational_systems_are_settled_by_pair_separation():
    assert irreducible_transversality(micro_system()) == ("pass", "pair separation")


# arrows -------------------------------------------------------------------------------------

def test_single_copy_arrow():
    B = edge()
    assert verify_arrow(B, B, B, 2)


def test_pigeonhole_arrow():
    v = graph_from_edges(1, [])
    assert verify_arrow(graph_from_edges(3, []), graph_from_edges(2, []), v, 2)
    assert not verify_arrow(graph_from_edges(2, []), graph_from_edges(2, []), v, 2)
    assert arrow_oracle(graph_from_edges(3, []), graph_from_edges(2, []), v, 2)


def test_path_does_not_arrow_its_edges():
    res = verify_arrow(path3(), path3(), edge(), 2)
    assert not res
    assert len(set(res.witness.values())) == 2
    assert is_bad_coloring(path3(), path3(), edge(), res.witness)
    assert not arrow_oracle(path3(), path3(), edge(), 2)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.data())
def test_arrow_matches_coloring_enumeration(n, data):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    C = graph_from_edges(n, data.draw(st.lists(st.sampled_from(pairs), unique=True)))
    B = graph_from_edges(3, data.draw(st.sampled_from([[], [(0, 1)], [(0, 1), (1, 2)], [(0, 1), (1, 2), (0, 2)]])))
    A = data.draw(st.sampled_from([graph_from_edges(1, []), edge(), graph_from_edges(2, [])]))
    k = data.draw(st.integers(1, 2))
    if len(embeddings(A, C)) > 14:
        return
    assert bool(verify_arrow(C, B, A, k)) == arrow_oracle(C, B, A, k)


def test_arrow_budget():
    with pytest.raises(BudgetExceeded):
        verify_arrow(graph_from_edges(8, []), graph_from_edges(3, []), graph_from_edges(1, []), 3,
                     Budget(max_colorings=10))


def test_base_search_pigeonhole():
    A = ordered(graph_from_edges(1, []))
    B = ordered(graph_from_edges(2, []))
    C = base_ramsey_bruteforce(A, B, 2)
    assert C.n == 3 and not C.relation("E")


def test_base_search_returns_b_when_a_is_b():
    B = ordered(edge())
    C = base_ramsey_bruteforce(B, B, 2)
    assert C.n == 2 and verify_arrow(C, B, B, 2)


def test_base_search_for_ordered_path_is_verified_or_gives_up():
    A = ordered(edge())
    B = ordered(path3())
    try:
        C = base_ramsey_bruteforce(A, B, 2, Budget(max_seconds=3), max_n=5)
    except BudgetExceeded as e:
        assert e.what in ("wall clock seconds", "candidate size")
    else:
        assert verify_arrow(C, B, A, 2)


def test_base_search_counts_candidates():
    A = ordered(edge())
    B = ordered(path3())
    with pytest.raises(BudgetExceeded, match="candidate structures"):
        base_ramsey_bruteforce(A, B, 2, Budget(max_subsets=50))


def test_base_search_needs_order():
    with pytest.raises(StructureError):
        base_ramsey_bruteforce(edge(), edge())


# completion ---------------------------------------------------------------------------------

def test_completion_of_fig2_structure():
    S = struct(FIG2).with_order([0, 1, 2, 3])
    T = completion(S)
    F = T.function("F")
    assert F[(2,)] == {2} and F[(3,)] == {3}
    assert F[(0,)] == {2} and F[(1,)] == {3}
    assert T.relation("dom.F") == {(0,), (1,)}
    assert decompletion(T) == S


def test_completion_of_total_functions_only_marks_domains():
    lang = Language((), (("F", 1, 1),))
    S = Structure(lang, ["a", "b"], {}, {"F": {(0,): [1], (1,): [0]}}).with_order([0, 1])
    T = completion(S)
    assert T.function("F") == S.function("F")
    assert decompletion(T) == S


def test_completion_needs_order():
    with pytest.raises(StructureError):
        completion(struct(FIG2))


def test_completion_preserves_embedding_counts():
    lang = Language((("R", 2),), (("F", 1, 1),))
    A = Structure(lang, ["p", "q"], {}, {"F": {(0,): [1]}}).with_order([0, 1])
    B = struct(FIG2)
    B = B.with_order([0, 1, 2, 3])
    assert len(embeddings(A, B)) == len(embeddings(completion(A), completion(B)))
    for D in (A, B):
        assert decompletion(completion(D)) == D


# construction -------------------------------------------------------------------------------

def test_construction_without_copies_returns_first_picture():
    A = ordered(triangle())
    B = ordered(triangle())
    C0 = ordered(edge())
    C, rep = partite_construction(A, B, C0)
    assert C.n == 0 and rep.stages == []
    assert rep.property_i == [(0, "pass")]


def test_pigeonhole_construction_arrows():
    A = ordered(graph_from_edges(1, []))
    B = ordered(graph_from_edges(2, []))
    C0 = base_ramsey_bruteforce(A, B, 2)
    C, rep = partite_construction(A, B, C0, 2)
    assert all(status == "pass" for _, status in rep.property_i)
    assert verify_arrow(C, B, A, 2)


def test_edge_construction_reports_uncertified_stages():
    # beyond two sections no line dimension is known, so later stages fall back
    # to dimension 1 and the report says so; the exhaustive check decides
    A = ordered(graph_from_edges(1, []))
    B = ordered(edge())
    C0 = base_ramsey_bruteforce(A, B, 2)
    assert C0.n == 3 and len(C0.relation("E")) == 6
    C, rep = partite_construction(A, B, C0, 2)
    assert rep.stages[0].certified and rep.stages[0].N == 2
    assert not rep.arrow_certified
    assert all(status == "pass" for _, status in rep.property_i)
    assert bool(verify_arrow(C, B, A, 2)) is False


def test_construction_output_stays_in_triangle_free_class():
    A = ordered(graph_from_edges(1, []))
    B = ordered(edge())
    C0 = ordered(graph_from_edges(4, [(0, 1), (1, 2), (2, 3)]))
    C, rep = partite_construction(A, B, C0, 2, forbidden=[triangle()])
    assert rep.class_check == "pass"
    assert embeddings(triangle(), C.without_order(), limit=1) == []


def test_construction_reports_forbidden_structures():
    A = ordered(graph_from_edges(1, []))
    B = ordered(edge())
    C0 = ordered(triangle())
    C, rep = partite_construction(A, B, C0, 2, forbidden=[triangle(), path3()])
    # triangles never appear (they are irreducible and do not embed into B); paths do
    assert embeddings(triangle(), C.without_order(), limit=1) == []
    assert rep.class_check == "fail: forbidden structures [1] embed"
