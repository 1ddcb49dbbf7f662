"""Input files and one invocation per CLI subcommand, shared by the CLI and acceptance tests."""
from __future__ import annotations

import contextlib
import io
from pathlib import Path

from ramseyfn.cli import main

from helpers import FIG2

FILES = {
    "fig2.struct": FIG2,
    "vertex.struct": "lang rel E 2\nvertex v\n",
    "edge.struct": "lang rel E 2\nvertex a b\nrel E a b\nrel E b a\n",
    "path.struct": "lang rel E 2\nvertex a b c\nrel E a b\nrel E b a\nrel E b c\nrel E c b\n",
    "overtex.struct": "lang rel E 2\nvertex v\norder v\n",
    "opair.struct": "lang rel E 2\nvertex a b\norder a b\n",
    "father.struct": "lang fun F 1 1\nvertex a b\nfun F a : b\n",
    "ofather.struct": "lang fun F 1 1\nvertex a b\nfun F a : b\norder a b\n",
    "rfather.struct": "lang fun F 1 1\nvertex a b\nfun F a : b\norder b a\n",
    "ofig2.struct": FIG2 + "order a b c d\n",
    "cherry.struct": "lang fun F 1 1\nvertex a b c\nfun F a : b\nfun F c : b\n",
    "micro.struct": "lang rel E 2\nvertex x1 x2 y1\nrel E x1 y1\nrel E y1 x1\nrel E x2 y1\nrel E y1 x2\n"
                    "part x x1 x2\npart y y1\n",
    "base.struct": "lang rel E 2\nvertex x y\nrel E x y\nrel E y x\n",
    "digraph.graph": "vertex a b c\narc a b\narc a c\narc b c\n",
    "triple.graph": "vertex a b c d\nhedge a b c\n",
    "ch2.graph": "vertex b0 b1 t0 t1\nedge b0 b1\nedge b0 t0\nedge b1 t0\nedge b0 t1\nedge b1 t1\n",
    "pendant.graph": "vertex a b c\nedge a b\n",
    "korient.struct": "lang fun F1 1 1\nlang fun F2 1 2\nvertex a b c\nfun F2 a : b c\nfun F1 b : c\n",
    "empty.struct": "",
}

# (argv, expected exit status); file names are relative to the input directory
CASES = [
    (["core", "closure", "fig2.struct", "--of", "a"], 0),
    (["core", "induce", "fig2.struct", "--of", "a", "c"], 0),
    (["core", "embed", "edge.struct", "path.struct", "--all"], 0),
    (["core", "amalgam", "vertex.struct", "edge.struct", "edge.struct", "--map1", "v=b", "--map2", "v=a"], 0),
    (["core", "irreducible", "fig2.struct"], 0),
    (["core", "aut", "path.struct", "--list"], 0),
    (["partite", "power", "micro.struct", "--base", "base.struct", "--n", "2"], 0),
    (["partite", "line", "micro.struct", "--base", "base.struct", "--line", "0,*"], 0),
    (["partite", "verify-arrow", "path.struct", "path.struct", "edge.struct"], 1),
    (["partite", "construct", "overtex.struct", "opair.struct"], 0),
    (["partite", "complete", "ofig2.struct"], 0),
    (["order", "analyze", "cherry.struct"], 0),
    (["order", "build-class", "--class", "forests", "--max-n", "3"], 0),
    (["order", "check-axioms", "--class", "forests", "--max-n", "3"], 0),
    (["order", "verify-op", "ofather.struct", "cherry.struct", "--orderings", "free"], 1),
    (["order", "witness-b0", "rfather.struct"], 0),
    (["eppa", "reduct", "father.struct"], 0),
    (["eppa", "base", "father.struct"], 0),
    (["eppa", "extend", "father.struct"], 0),
    (["eppa", "certify", "father.struct"], 0),
    (["classes", "encode", "digraph.graph", "--kind", "korientation"], 0),
    (["classes", "encode", "triple.graph", "--kind", "steiner"], 0),
    (["classes", "encode", "ch2.graph", "--kind", "bowtie"], 0),
    (["classes", "decode", "korient.struct", "--kind", "korientation"], 0),
    (["classes", "goodify", "pendant.graph"], 0),
    (["classes", "sweep", "--kind", "bowtie-no-f1", "--max-n", "5"], 1),
    (["classes", "sweep", "--kind", "korientation", "--max-n", "3"], 0),
    (["classes", "chimney", "3"], 0),
]


def write_inputs(root: Path) -> Path:
    d = root / "inputs"
    d.mkdir(exist_ok=True)
    for name, text in FILES.items():
        (d / name).write_text(text)
    return d


def absolute(argv, inputs: Path) -> list[str]:
    return [str(inputs / a) if (inputs / a).is_file() else a for a in argv]


def run_cli(argv) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def run_to_files(argv, inputs: Path, outdir: Path, tag: str, extra=()) -> tuple[int, bytes, bytes]:
    """Run with -o and --cert into ``outdir`` and return the exit status and both artifacts."""
    outdir.mkdir(parents=True, exist_ok=True)
    o, c = outdir / f"{tag}.out", outdir / f"{tag}.cert"
    code, _, _ = run_cli(absolute(argv, inputs) + ["-o", str(o), "--cert", str(c), *extra])
    return code, o.read_bytes(), c.read_bytes()
