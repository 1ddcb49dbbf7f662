"""Small builders shared by the test modules."""
from __future__ import annotations

import textwrap

from ramseyfn import parse_structure
from ramseyfn.generate import graph_from_edges


def struct(text: str):
    return parse_structure(textwrap.dedent(text))


FIG2 = """\
lang rel R 2
lang fun F 1 1
vertex a b c d
rel R a b
fun F a : c
fun F b : d
"""

# F(c) = {a, b} and F2(a, b) = {c}
FIG4 = """\
lang fun F 1 2
lang fun F2 2 1
vertex a b c
fun F c : a b
fun F2 a b : c
"""


def triangle():
    return graph_from_edges(3, [(0, 1), (1, 2), (0, 2)])


def edge():
    return graph_from_edges(2, [(0, 1)])


def path3():
    return graph_from_edges(3, [(0, 1), (1, 2)])
