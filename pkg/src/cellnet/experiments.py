"""Dataset generators and the CSL / SR / RingTransfer harnesses."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .cells import Graph
from .errors import BadSkip, MalformedGraph6
from .fixtures import cycle_graph, rook44, shrikhande
from .lifting import ic, lift
from .network import (
    CinModel,
    GinBaseline,
    ModelConfig,
    RingTransferModel,
    TrainConfig,
    accuracy,
    complex_indices,
    init_features,
    train,
)
from .refinement import SPARSE_ADJ, refine_union

# -- graph6 ------------------------------------------------------------------


def _g6_size(data, lineno):
    if not data:
        raise MalformedGraph6("empty record", lineno)
    if data[0] != 126:  # '~'
        return data[0] - 63, 1
    if len(data) >= 4 and data[1] != 126:
        n = 0
        for b in data[1:4]:
            n = (n << 6) | (b - 63)
        return n, 4
    raise MalformedGraph6("graphs beyond 258047 vertices are not supported", lineno)


def _decode_graph6_line(line, lineno):
    data = line.encode("ascii")
    for b in data:
        if not (63 <= b <= 126):
            raise MalformedGraph6(f"byte {b} outside graph6 range", lineno)
    n, start = _g6_size(data, lineno)
    need = (n * (n - 1) // 2 + 5) // 6
    body = data[start:]
    if len(body) != need:
        raise MalformedGraph6(
            f"expected {need} payload bytes for n={n}, got {len(body)}", lineno
        )
    bits = []
    for b in body:
        v = b - 63
        bits.extend((v >> s) & 1 for s in range(5, -1, -1))
    edges = []
    pos = 0
    for j in range(1, n):
        for i in range(j):
            if bits[pos]:
                edges.append((i, j))
            pos += 1
    return Graph(n, tuple(edges))


def load_graph6(path) -> list:
    """Decode a graph6 file (one graph per line)."""
    graphs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith(">>graph6<<"):
                line = line[len(">>graph6<<"):]
                if not line:
                    continue
            graphs.append(_decode_graph6_line(line, lineno))
    return graphs


def loads_graph6(text: str) -> list:
    graphs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line:
            graphs.append(_decode_graph6_line(line, lineno))
    return graphs


def encode_graph6(g: Graph) -> str:
    if g.n > 258047:
        raise MalformedGraph6("graphs beyond 258047 vertices are not supported")
    if g.n <= 62:
        head = [g.n + 63]
    else:
        head = [126, 63 + (g.n >> 12), 63 + ((g.n >> 6) & 63), 63 + (g.n & 63)]
    present = set(g.edges)
    bits = []
    for j in range(1, g.n):
        for i in range(j):
            bits.append(1 if (i, j) in present else 0)
    while len(bits) % 6:
        bits.append(0)
    body = []
    for lo in range(0, len(bits), 6):
        v = 0
        for b in bits[lo : lo + 6]:
            v = (v << 1) | b
        body.append(v + 63)
    return bytes(head + body).decode("ascii")


def sr16622() -> list:
    """The complete SR(16,6,2,2) family: the 4x4 rook's graph and the
    Shrikhande graph."""
    return [rook44(), shrikhande()]


# -- CSL ---------------------------------------------------------------------

CSL_SKIPS = (2, 3, 4, 5, 6, 9, 11, 12, 13, 16)


def circulant(n: int, skip: int) -> Graph:
    if not (1 < skip < n / 2):
        raise BadSkip(f"skip {skip} outside (1, {n}/2)")
    edges = set()
    for i in range(n):
        edges.add(tuple(sorted((i, (i + 1) % n))))
        edges.add(tuple(sorted((i, (i + skip) % n))))
    return Graph(n, tuple(sorted(edges)))


def gen_csl(n=48, skips=CSL_SKIPS, copies_per_class=15, seed=0):
    """The circulant-skip-link corpus: per skip, one base graph plus
    copies_per_class - 1 uniformly random relabellings.  Returns
    (graphs, labels)."""
    rng = np.random.default_rng(seed)
    graphs, labels = [], []
    for cls, skip in enumerate(skips):
        base = circulant(n, skip)
        graphs.append(base)
        labels.append(cls)
        for _ in range(copies_per_class - 1):
            perm = rng.permutation(n).tolist()
            graphs.append(base.permuted(perm))
            labels.append(cls)
    return graphs, labels


def _ordered_map(fn, items, jobs):
    """Map preserving order; jobs > 1 uses a thread pool (fn must be pure)."""
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_csl_experiment(k_ring=8, n=41, skips=CSL_SKIPS, copies_per_class=15,
                       seed=0, max_dim=2, jobs=1):
    """Partition the CSL corpus by stable CWL({B,up}) histograms of the
    induced-cycle lifting and score the partition against the skip classes.

    Accuracy is partition purity: since isomorphic copies always share a
    histogram, purity 1.0 holds exactly when the histogram classes equal
    the ground-truth classes.  The default ring length is 41: over 48
    nodes the skips 11 and 13 produce isomorphic circulants (multiplier
    35 maps one connection set to the other), so no isomorphism
    invariant can split all ten skip classes there."""
    graphs, labels = gen_csl(n, skips, copies_per_class, seed)
    complexes = _ordered_map(lambda g: lift(g, ic(k_ring, max_dim)), graphs, jobs)
    histos, _ = refine_union(complexes, SPARSE_ADJ)
    groups = {}
    for h, label in zip(histos, labels):
        groups.setdefault(frozenset(h.items()), []).append(label)
    correct = sum(
        max(members.count(l) for l in set(members)) for members in groups.values()
    )
    return {
        "experiment": "csl",
        "params": {"k_ring": k_ring, "n": n, "skips": list(skips),
                   "copies_per_class": copies_per_class, "seed": seed},
        "metrics": {
            "n_graphs": len(graphs),
            "n_classes_true": len(set(labels)),
            "n_classes_found": len(groups),
            "accuracy": correct / len(graphs),
        },
    }


# -- SR ----------------------------------------------------------------------


def _sr_embedder(config: ModelConfig, in_width=1):
    return CinModel(config, (in_width,))


def sr_embeddings(graphs, k_ring=6, config: ModelConfig | None = None, jobs=1):
    """Untrained CIN embeddings of the induced-cycle liftings."""
    config = config or ModelConfig(
        layers=3, hidden=16, embedding=16, nonlinearity="elu", readout="sum"
    )
    model = _sr_embedder(config)

    def embed_one(g):
        x = lift(g, ic(k_ring))
        idx = complex_indices(x)
        feats = init_features(x, "constant_one", "sum_of_vertices")
        emb, _ = model.embed(idx, feats)
        return emb.value[0]

    out = _ordered_map(embed_one, graphs, jobs)
    return np.asarray(out), model


class MlpBaseline:
    """Dense layers at each cell dimension, then the same pooled readout.
    No message passing: only per-cell feature transforms."""

    def __init__(self, hidden=256, embedding=16, seed=0, in_width=1):
        rng = np.random.default_rng(seed)
        self.hidden = hidden
        self.params = {}
        for p in range(3):
            s1 = np.sqrt(6.0 / (in_width + hidden))
            s2 = np.sqrt(6.0 / (hidden + embedding))
            self.params[f"d{p}.W1"] = rng.uniform(-s1, s1, (in_width, hidden))
            self.params[f"d{p}.W2"] = rng.uniform(-s2, s2, (hidden, embedding))

    def embed_complex(self, x):
        feats = init_features(x, "constant_one", "sum_of_vertices")
        emb = np.zeros(self.params["d0.W2"].shape[1])
        for p, h in enumerate(feats):
            if p > 2 or h.shape[0] == 0:
                continue
            z = np.where(
                h @ self.params[f"d{p}.W1"] > 0,
                h @ self.params[f"d{p}.W1"],
                np.expm1(np.minimum(h @ self.params[f"d{p}.W1"], 0.0)),
            )
            emb = emb + (z @ self.params[f"d{p}.W2"]).sum(axis=0)
        return emb


def run_sr_experiment(graphs, k_ring=6, seed=0, epsilon=0.01,
                      control_permutations=True, jobs=1):
    """Pairwise isomorphism screening of one SR family with an untrained
    CIN and the per-dimension MLP baseline."""
    config = ModelConfig(
        layers=3, hidden=16, embedding=16, nonlinearity="elu",
        readout="sum", seed=seed,
    )
    emb, _ = sr_embeddings(graphs, k_ring, config, jobs)
    baseline = MlpBaseline(hidden=256, seed=seed)
    emb_base = np.asarray(
        _ordered_map(
            lambda g: baseline.embed_complex(lift(g, ic(k_ring))), graphs, jobs
        )
    )

    def failure_rate(vectors):
        pairs = list(itertools.combinations(range(len(graphs)), 2))
        if not pairs:
            return 0.0, 0
        fails = sum(
            1
            for i, j in pairs
            if np.linalg.norm(vectors[i] - vectors[j]) <= epsilon
        )
        return fails / len(pairs), len(pairs)

    rate_cin, n_pairs = failure_rate(emb)
    rate_mlp, _ = failure_rate(emb_base)

    control_max = None
    if control_permutations:
        rng = np.random.default_rng(seed)
        control_max = 0.0
        model = _sr_embedder(config)
        for g, e in zip(graphs, emb):
            perm = rng.permutation(g.n).tolist()
            xp = lift(g.permuted(perm), ic(k_ring))
            feats = init_features(xp, "constant_one", "sum_of_vertices")
            ep, _ = model.embed(complex_indices(xp), feats)
            control_max = max(control_max, float(np.linalg.norm(e - ep.value[0])))

    return {
        "experiment": "sr",
        "params": {"k_ring": k_ring, "seed": seed, "epsilon": epsilon,
                   "n_graphs": len(graphs)},
        "metrics": {
            "n_pairs": n_pairs,
            "failure_rate_cin": rate_cin,
            "failure_rate_mlp": rate_mlp,
            "control_max_distance": control_max,
        },
    }


# -- RingTransfer ------------------------------------------------------------


def gen_ring_transfer(k, n_samples=5000, n_classes=5, seed=0):
    """Feature matrices and labels for the ring-transfer task.

    The ring has k nodes; node 0 (the source) carries a one-hot class
    vector, every other node carries the all-ones vector, and the model
    must report the class at the target node k//2 away."""
    if k < 4:
        raise ValueError("ring size must be at least 4")
    if n_classes < 2:
        raise ValueError("need at least 2 classes")
    if n_samples % n_classes:
        raise ValueError("n_samples must be divisible by n_classes for exact balance")
    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.repeat(np.arange(n_classes), n_samples // n_classes))
    inputs = []
    for label in labels:
        h = np.ones((k, n_classes))
        h[0] = 0.0
        h[0, label] = 1.0
        inputs.append(h)
    return inputs, labels.tolist()


def run_ring_transfer(k, seed=0, layers=3, hidden=64, n_train=5000,
                      n_test=500, n_classes=5, max_epochs=200,
                      baseline_layers=None):
    """Train a CIN on the ring-transfer task and a node-level baseline
    with too few layers to reach the source."""
    ring = cycle_graph(k)
    complex_ring = lift(ring, ic(k))
    target = k // 2

    cfg = ModelConfig(layers=layers, hidden=hidden, embedding=hidden,
                      nonlinearity="relu", seed=seed)
    model = RingTransferModel(cfg, complex_ring, target, n_classes)
    train_x, train_y = gen_ring_transfer(k, n_train, n_classes, seed)
    test_x, test_y = gen_ring_transfer(k, n_test, n_classes, seed + 10_000)
    tc = TrainConfig(seed=seed, max_epochs=max_epochs)
    history = train(model, train_x, train_y, tc)
    acc = accuracy(model, test_x, test_y)

    if baseline_layers is None:
        baseline_layers = max(1, (k // 2) - 1)
    base = GinBaseline(baseline_layers, hidden, n_classes, n_classes,
                       ring, target, seed=seed)
    base_hist = train(base, train_x, train_y, tc)
    base_acc = accuracy(base, test_x, test_y)

    return {
        "experiment": "ring_transfer",
        "params": {"k": k, "seed": seed, "layers": layers, "hidden": hidden,
                   "n_train": n_train, "n_test": n_test,
                   "n_classes": n_classes,
                   "baseline_layers": baseline_layers},
        "metrics": {
            "accuracy": acc,
            "epochs": len(history),
            "final_loss": history[-1]["loss"],
            "baseline_accuracy": base_acc,
            "baseline_epochs": len(base_hist),
        },
    }
