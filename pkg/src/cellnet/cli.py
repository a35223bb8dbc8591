"""Command-line interface.

All commands print a key-sorted JSON report on stdout; diagnostics go to
stderr.  Exit codes: 0 success, 1 verdict-style failure (a check below
threshold), 2 usage or parse errors.  Fixture names ("rook44", ...) can
be used anywhere a graph file is expected.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import __version__
from .cells import Graph, graph_to_complex
from .errors import CellnetError, ParseError
from .fixtures import GRAPH_FIXTURES, get_graph
from .lifting import LiftingSpec, check_skeleton_preserving, cycle_census, lift
from .network import (
    CinModel,
    ModelConfig,
    complex_indices,
    gradient_check,
    init_features,
)
from .refinement import AdjacencySet, SPARSE_ADJ, Verdict, distinguish
from .spectral import boundary_matrix, hodge_laplacian
from . import experiments


def _emit(report, seed=None):
    report = dict(report)
    report.setdefault("version", __version__)
    if seed is not None:
        report.setdefault("seed", seed)
    click.echo(json.dumps(report, sort_keys=True))


def parse_graph_input(path, fmt="auto"):
    """Load graphs from a file: graph6, edge_list or json.

    Fixture names resolve without touching the filesystem."""
    if path in GRAPH_FIXTURES:
        return [get_graph(path)]
    if fmt == "auto":
        if path.endswith(".g6"):
            fmt = "graph6"
        elif path.endswith(".json"):
            fmt = "json"
        else:
            fmt = "edge_list"
    if fmt == "graph6":
        return experiments.load_graph6(path)
    with open(path) as fh:
        text = fh.read()
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(str(exc), line=exc.lineno) from None
        items = data if isinstance(data, list) else [data]
        out = []
        for item in items:
            out.append(
                Graph(
                    int(item["n"]),
                    tuple((int(u), int(v)) for u, v in item["edges"]),
                    tuple(item["node_labels"]) if item.get("node_labels") else None,
                )
            )
        return out
    # edge list: "u v" per line; "# label l0 l1 ..." sets node labels
    edges = []
    labels = None
    top = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "label":
                labels = tuple(int(t) for t in parts[1:])
            continue
        parts = line.split()
        if len(parts) != 2 or not all(t.lstrip("-").isdigit() for t in parts):
            raise ParseError(f"expected 'u v', got {line!r}", line=lineno)
        u, v = int(parts[0]), int(parts[1])
        edges.append((u, v))
        top = max(top, u, v)
    n = len(labels) if labels is not None else top + 1
    return [Graph(max(n, 0), tuple(edges), labels)]


def _single_graph(path):
    graphs = parse_graph_input(path)
    if len(graphs) != 1:
        raise ParseError(f"{path} holds {len(graphs)} graphs; expected exactly one")
    return graphs[0]


def _seed_option(required=True):
    return click.option(
        "--seed", type=int, default=None,
        help="RNG seed (falls back to CELLNET_SEED).",
    )


def _resolve_seed(seed):
    if seed is not None:
        return seed
    env = os.environ.get("CELLNET_SEED")
    if env is None:
        raise click.UsageError("--seed is required (or set CELLNET_SEED)")
    return int(env)


class _Cli(click.Group):
    def __call__(self, *args, **kwargs):
        try:
            return self.main(*args, standalone_mode=False, **kwargs) or 0
        except click.UsageError as exc:
            click.echo(f"error: {exc.format_message()}", err=True)
            return 2
        except click.ClickException as exc:
            click.echo(f"error: {exc.format_message()}", err=True)
            return 2
        except click.exceptions.Abort:
            return 2
        except (ParseError, FileNotFoundError) as exc:
            click.echo(f"error: {exc}", err=True)
            return 2
        except CellnetError as exc:
            click.echo(f"error: {exc}", err=True)
            return 2


@click.group(cls=_Cli)
def cli():
    """Cell complex lifting, refinement tests and CW networks."""


def main(argv=None):
    return cli(argv if argv is not None else sys.argv[1:])


@cli.command("lift")
@click.option("--input", "path", required=True, help="Graph file or fixture name.")
@click.option("--spec", "spec_text", default="IC:6", show_default=True,
              help="Lifting spec, e.g. 'IC:6' or 'CL:3,C:8'.")
@click.option("--max-dim", type=int, default=2, show_default=True)
def lift_cmd(path, spec_text, max_dim):
    """Lift a graph to a cell complex; prints the complex as JSON."""
    g = _single_graph(path)
    x = lift(g, LiftingSpec.parse(spec_text, max_dim))
    _emit({
        "command": "lift",
        "params": {"input": path, "spec": spec_text, "max_dim": max_dim},
        "complex": json.loads(x.to_json()),
        "skeleton_preserving": check_skeleton_preserving(g, x),
    })


@cli.command("cycles")
@click.option("--input", "path", required=True)
@click.option("--max-k", type=int, default=8, show_default=True)
@click.option("--induced", is_flag=True, default=False)
def cycles_cmd(path, max_k, induced):
    """Count simple or induced (chordless) cycles by length."""
    g = _single_graph(path)
    counts = cycle_census(g, max_k, induced)
    _emit({
        "command": "cycles",
        "params": {"input": path, "max_k": max_k, "induced": induced},
        "counts": {str(k): v for k, v in counts.items()},
    })


def _pair_verdict(command, a, b, method, **kw):
    g1, g2 = _single_graph(a), _single_graph(b)
    verdict = distinguish(g1, g2, method, **kw)
    _emit({
        "command": command,
        "params": {"a": a, "b": b, **{k: str(v) for k, v in kw.items() if v}},
        "verdict": verdict.value,
    })


@cli.command("wl")
@click.option("--a", required=True)
@click.option("--b", required=True)
def wl_cmd(a, b):
    """WL colour refinement verdict for a graph pair."""
    _pair_verdict("wl", a, b, "wl")


@cli.command("3wl")
@click.option("--a", required=True)
@click.option("--b", required=True)
def three_wl_cmd(a, b):
    """3-WL (triple refinement) verdict for a graph pair."""
    _pair_verdict("3wl", a, b, "3wl")


@cli.command("cwl")
@click.option("--a", required=True)
@click.option("--b", required=True)
@click.option("--spec", "spec_text", default="IC:6", show_default=True)
@click.option("--adj", "adj_text", default="b,up", show_default=True,
              help="Adjacencies: 'all' or a comma list of b,c,down,up.")
@click.option("--max-dim", type=int, default=2, show_default=True)
def cwl_cmd(a, b, spec_text, adj_text, max_dim):
    """Cellular WL verdict for a graph pair under a lifting."""
    _pair_verdict(
        "cwl", a, b, "cwl",
        spec=LiftingSpec.parse(spec_text, max_dim),
        adj=AdjacencySet.parse(adj_text),
    )


@cli.command("swl")
@click.option("--a", required=True)
@click.option("--b", required=True)
@click.option("--k", type=int, default=3, show_default=True)
def swl_cmd(a, b, k):
    """Simplicial WL verdict (clique lifting, all adjacencies)."""
    _pair_verdict("swl", a, b, "swl", k=k)


@cli.command("laplacian")
@click.option("--input", "path", required=True)
@click.option("--spec", "spec_text", default="IC:6", show_default=True)
@click.option("--p", "p_dim", type=int, default=0, show_default=True)
@click.option("--boundary-only", is_flag=True, default=False,
              help="Emit the signed boundary matrix B_p instead of L_p.")
def laplacian_cmd(path, spec_text, p_dim, boundary_only):
    """Hodge Laplacian (or boundary matrix) of a lifted graph."""
    g = _single_graph(path)
    x = lift(g, LiftingSpec.parse(spec_text, max_dim=3))
    if boundary_only:
        bm = boundary_matrix(x, p_dim, signed=True)
        _emit({
            "command": "laplacian",
            "params": {"input": path, "spec": spec_text, "p": p_dim,
                       "boundary_only": True},
            "matrix": {"rows": bm.rows, "cols": bm.cols,
                       "triplets": bm.triplets()},
        })
        return
    lap = hodge_laplacian(x, p_dim)
    triplets = [
        [int(i), int(j), float(lap.matrix[i, j])]
        for i, j in zip(*np.nonzero(lap.matrix))
    ]
    _emit({
        "command": "laplacian",
        "params": {"input": path, "spec": spec_text, "p": p_dim},
        "matrix": {"rows": int(lap.matrix.shape[0]),
                   "cols": int(lap.matrix.shape[1]),
                   "triplets": triplets},
        "provenance": list(lap.provenance),
    })


@cli.command("sr")
@click.option("--family", required=True,
              help="graph6 file, or 'sr16622' for the bundled family.")
@click.option("--k", type=int, default=6, show_default=True)
@click.option("--jobs", type=int, default=None,
              help="Parallel-map width (default: available cores).")
@_seed_option()
def sr_cmd(family, k, jobs, seed):
    """Untrained-model isomorphism screening of an SR family."""
    seed = _resolve_seed(seed)
    jobs = jobs or os.cpu_count() or 1
    if family == "sr16622":
        graphs = experiments.sr16622()
    else:
        graphs = experiments.load_graph6(family)
    report = experiments.run_sr_experiment(graphs, k_ring=k, seed=seed,
                                           jobs=jobs)
    report["command"] = "sr"
    _emit(report, seed)
    if report["metrics"]["failure_rate_cin"] > 0:
        sys.exit(1)


@cli.command("csl")
@click.option("--k", type=int, default=8, show_default=True)
@click.option("--n", type=int, default=41, show_default=True)
@click.option("--jobs", type=int, default=None,
              help="Parallel-map width (default: available cores).")
@_seed_option()
def csl_cmd(k, n, jobs, seed):
    """Partition the circulant corpus by cellular WL histograms."""
    seed = _resolve_seed(seed)
    jobs = jobs or os.cpu_count() or 1
    report = experiments.run_csl_experiment(k_ring=k, n=n, seed=seed,
                                            jobs=jobs)
    report["command"] = "csl"
    _emit(report, seed)


@cli.command("ring-transfer")
@click.option("--k", type=int, default=8, show_default=True)
@click.option("--layers", type=int, default=3, show_default=True)
@click.option("--hidden", type=int, default=64, show_default=True)
@click.option("--n-train", type=int, default=5000, show_default=True)
@click.option("--max-epochs", type=int, default=200, show_default=True)
@_seed_option()
def ring_transfer_cmd(k, layers, hidden, n_train, max_epochs, seed):
    """Train on the ring-transfer task; reports model and baseline accuracy."""
    seed = _resolve_seed(seed)
    report = experiments.run_ring_transfer(
        k, seed=seed, layers=layers, hidden=hidden,
        n_train=n_train, max_epochs=max_epochs,
    )
    report["command"] = "ring-transfer"
    _emit(report, seed)


@cli.command("gradcheck")
@_seed_option()
@click.option("--step", type=float, default=1e-6, show_default=True)
def gradcheck_cmd(seed, step):
    """Finite-difference check of the model gradients; exit 1 on failure."""
    seed = _resolve_seed(seed)
    from .fixtures import hexagon
    from .network import RingTransferModel
    from .lifting import ic

    g = hexagon()
    x = lift(g, ic(6))
    cfg = ModelConfig(layers=2, hidden=4, embedding=4,
                      nonlinearity="elu", seed=seed)
    model = RingTransferModel(cfg, x, target=3, num_classes=3)
    rng = np.random.default_rng(seed)
    inputs = [rng.normal(size=(6, 3)) for _ in range(2)]
    labels = [0, 2]
    worst = gradient_check(model, inputs, labels, step=step,
                           max_entries_per_param=4, seed=seed)
    ok = worst <= 1e-5
    _emit({
        "command": "gradcheck",
        "params": {"step": step},
        "metrics": {"max_relative_error": worst, "threshold": 1e-5,
                    "passed": ok},
    }, seed)
    if not ok:
        sys.exit(1)


@cli.command("fixtures")
def fixtures_cmd():
    """List built-in graphs with basic invariants."""
    items = {}
    for name in sorted(GRAPH_FIXTURES):
        g = get_graph(name)
        items[name] = {"n": g.n, "m": len(g.edges),
                       "degrees": sorted(set(g.degree_sequence()))}
    _emit({"command": "fixtures", "fixtures": items})


if __name__ == "__main__":
    sys.exit(main())
