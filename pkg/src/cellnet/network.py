"""CW network message passing (CIN), readout, training and checks.

The model updates cells of dimension 0..2 with two message branches:
a boundary branch over B(sigma) and an upper branch over (tau, delta)
pairs from the upper adjacency, with the witness cell's features
concatenated into each upper message.  Everything runs in double
precision with summation orders fixed by sorted index arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .cells import CellComplex
from .errors import Diverged, MissingLabels, ShapeMismatch
from .spectral import boundary_matrix

NETWORK_MAX_DIM = 2


# -- feature initialisation --------------------------------------------------


def init_features(
    x: CellComplex,
    node_scheme: str = "constant_one",
    higher_scheme: str = "sum_of_vertices",
    labels=None,
    num_classes: int | None = None,
):
    """One dense matrix per dimension 0..min(dim, 2).

    node_scheme fills the 0-cells; higher_scheme derives 1-/2-cell rows
    from the 0-cells in each cell's closure.
    """
    n = x.dims[0]
    if node_scheme == "constant_one":
        h0 = np.ones((n, 1))
    elif node_scheme == "node_labels":
        if labels is None:
            raise MissingLabels("node_labels scheme needs labels")
        h0 = np.asarray(labels, dtype=np.float64).reshape(n, 1)
    elif node_scheme == "onehot_labels":
        if labels is None:
            raise MissingLabels("onehot_labels scheme needs labels")
        width = num_classes or (max(labels) + 1)
        h0 = np.zeros((n, width))
        h0[np.arange(n), np.asarray(labels)] = 1.0
    else:
        raise ValueError(f"unknown node scheme {node_scheme!r}")

    feats = [h0]
    for p in range(1, min(x.dim, NETWORK_MAX_DIM) + 1):
        rows = np.zeros((x.dims[p], h0.shape[1]))
        if higher_scheme in ("sum_of_vertices", "mean_of_vertices"):
            for i, verts in enumerate(x.vertex_sets[p]):
                acc = h0[sorted(verts)].sum(axis=0)
                if higher_scheme == "mean_of_vertices" and verts:
                    acc = acc / len(verts)
                rows[i] = acc
        elif higher_scheme == "constant_one":
            rows[:] = 1.0
        elif higher_scheme == "zero":
            pass
        else:
            raise ValueError(f"unknown higher scheme {higher_scheme!r}")
        feats.append(rows)
    return feats


# -- index plumbing ----------------------------------------------------------


@dataclass
class ComplexIndices:
    """Flat adjacency index arrays for one complex or a batch."""

    sizes: list                 # cells per dimension, length 3
    boundary: dict              # p -> (sigma_idx, tau_idx) with tau one dim below
    upper: dict                 # p -> (sigma_idx, tau_idx, delta_idx)
    seg: list                   # per dim: complex id per cell
    n_complexes: int = 1


def complex_indices(x: CellComplex) -> ComplexIndices:
    d = min(x.dim, NETWORK_MAX_DIM)
    sizes = [x.dims[p] if p <= d else 0 for p in range(NETWORK_MAX_DIM + 1)]
    boundary = {}
    for p in range(1, d + 1):
        sig, tau = [], []
        for i, bd in enumerate(x.boundaries[p]):
            for r in sorted(bd):
                sig.append(i)
                tau.append(r)
        boundary[p] = (np.asarray(sig, dtype=np.intp), np.asarray(tau, dtype=np.intp))
    upper = {}
    for p in range(d):
        sig, tau, delta = [], [], []
        for i in range(x.dims[p]):
            for t, w in x.upper[p][i]:
                sig.append(i)
                tau.append(t)
                delta.append(w)
        upper[p] = (
            np.asarray(sig, dtype=np.intp),
            np.asarray(tau, dtype=np.intp),
            np.asarray(delta, dtype=np.intp),
        )
    seg = [np.zeros(sizes[p], dtype=np.intp) for p in range(NETWORK_MAX_DIM + 1)]
    return ComplexIndices(sizes, boundary, upper, seg, 1)


def batch_indices(parts) -> ComplexIndices:
    """Disjoint-union batch of per-complex index sets."""
    sizes = [0] * (NETWORK_MAX_DIM + 1)
    boundary = {p: [[], []] for p in range(1, NETWORK_MAX_DIM + 1)}
    upper = {p: [[], [], []] for p in range(NETWORK_MAX_DIM)}
    seg = [[] for _ in range(NETWORK_MAX_DIM + 1)]
    for cid, part in enumerate(parts):
        for p in range(NETWORK_MAX_DIM + 1):
            seg[p].append(np.full(part.sizes[p], cid, dtype=np.intp))
        for p, (sig, tau) in part.boundary.items():
            boundary[p][0].append(sig + sizes[p])
            boundary[p][1].append(tau + sizes[p - 1])
        for p, (sig, tau, delta) in part.upper.items():
            upper[p][0].append(sig + sizes[p])
            upper[p][1].append(tau + sizes[p])
            upper[p][2].append(delta + sizes[p + 1])
        for p in range(NETWORK_MAX_DIM + 1):
            sizes[p] += part.sizes[p]

    def cat(chunks):
        return (
            np.concatenate(chunks)
            if chunks
            else np.asarray([], dtype=np.intp)
        )

    return ComplexIndices(
        sizes,
        {p: (cat(a), cat(b)) for p, (a, b) in boundary.items()},
        {p: (cat(a), cat(b), cat(c)) for p, (a, b, c) in upper.items()},
        [cat(chunks) for chunks in seg],
        len(parts),
    )


def tile_indices(part: ComplexIndices, count: int) -> ComplexIndices:
    """Batch `count` copies of the same complex (vectorised batch_indices)."""
    sizes = [s * count for s in part.sizes]
    reps = np.arange(count, dtype=np.intp)

    def tile(arr, stride):
        return (arr[None, :] + (reps * stride)[:, None]).reshape(-1)

    boundary = {
        p: (tile(sig, part.sizes[p]), tile(tau, part.sizes[p - 1]))
        for p, (sig, tau) in part.boundary.items()
    }
    upper = {
        p: (
            tile(sig, part.sizes[p]),
            tile(tau, part.sizes[p]),
            tile(delta, part.sizes[p + 1]),
        )
        for p, (sig, tau, delta) in part.upper.items()
    }
    seg = [
        np.repeat(reps, part.sizes[p]) for p in range(NETWORK_MAX_DIM + 1)
    ]
    return ComplexIndices(sizes, boundary, upper, seg, count)


# -- model -------------------------------------------------------------------


@dataclass
class ModelConfig:
    layers: int = 3
    hidden: int = 64
    embedding: int = 16
    nonlinearity: str = "relu"
    readout: str = "sum"
    num_classes: int | None = None
    eps_boundary: float = 0.0
    eps_upper: float = 0.0
    seed: int = 0
    dropout: float = 0.0


def _glorot(rng, fan_in, fan_out):
    s = np.sqrt(6.0 / max(fan_in + fan_out, 1))
    return rng.uniform(-s, s, size=(fan_in, fan_out))


class CinModel:
    """Cell isomorphism network over dimensions 0..2."""

    def __init__(self, config: ModelConfig, in_widths):
        self.config = config
        self.in_widths = tuple(in_widths) + (in_widths[-1],) * (
            NETWORK_MAX_DIM + 1 - len(in_widths)
        )
        self.params = {}
        rng = np.random.default_rng(config.seed)
        h = config.hidden
        widths = list(self.in_widths)
        for t in range(config.layers):
            for p in range(NETWORK_MAX_DIM + 1):
                w = widths[p]
                pre = f"l{t}.d{p}"
                if p < NETWORK_MAX_DIM:
                    self.params[f"{pre}.M.W"] = _glorot(rng, w + widths[p + 1], w)
                    self.params[f"{pre}.M.b"] = np.zeros((1, w))
                for branch in ("B", "up"):
                    self.params[f"{pre}.{branch}.W1"] = _glorot(rng, w, h)
                    self.params[f"{pre}.{branch}.b1"] = np.zeros((1, h))
                    self.params[f"{pre}.{branch}.W2"] = _glorot(rng, h, h)
                    self.params[f"{pre}.{branch}.b2"] = np.zeros((1, h))
                self.params[f"{pre}.U.W"] = _glorot(rng, 2 * h, h)
                self.params[f"{pre}.U.b"] = np.zeros((1, h))
            widths = [h] * (NETWORK_MAX_DIM + 1)
        for p in range(NETWORK_MAX_DIM + 1):
            self.params[f"R.d{p}.W"] = _glorot(rng, h, config.embedding)
            self.params[f"R.d{p}.b"] = np.zeros((1, config.embedding))
        if config.num_classes:
            self.params["cls.W"] = _glorot(rng, config.embedding, config.num_classes)
            self.params["cls.b"] = np.zeros((1, config.num_classes))

    # forward ---------------------------------------------------------------

    def _wrap(self):
        return {k: Tensor(v) for k, v in self.params.items()}

    def _act(self, t):
        return ad.NONLINEARITIES[self.config.nonlinearity](t)

    def _dense(self, t, pt, name):
        return ad.add(ad.matmul(t, pt[f"{name}.W"]), pt[f"{name}.b"])

    def _mlp2(self, t, pt, name):
        hid = self._act(
            ad.add(ad.matmul(t, pt[f"{name}.W1"]), pt[f"{name}.b1"])
        )
        return self._act(ad.add(ad.matmul(hid, pt[f"{name}.W2"]), pt[f"{name}.b2"]))

    def _layer(self, t, idx: ComplexIndices, feats, pt):
        cfg = self.config
        out = []
        for p in range(NETWORK_MAX_DIM + 1):
            h_p = feats[p]
            pre = f"l{t}.d{p}"
            base_b = ad.scale(h_p, 1.0 + cfg.eps_boundary)
            if p >= 1 and p in idx.boundary and len(idx.boundary[p][0]):
                sig, tau = idx.boundary[p]
                msg = ad.gather_rows(feats[p - 1], tau)
                base_b = ad.add(base_b, ad.segment_sum(msg, sig, idx.sizes[p]))
            branch_b = self._mlp2(base_b, pt, f"{pre}.B")

            base_u = ad.scale(h_p, 1.0 + cfg.eps_upper)
            if p in idx.upper and len(idx.upper[p][0]) and idx.sizes[p + 1]:
                sig, tau, delta = idx.upper[p]
                pair = ad.concat_cols(
                    ad.gather_rows(h_p, tau), ad.gather_rows(feats[p + 1], delta)
                )
                msg = self._act(self._dense(pair, pt, f"{pre}.M"))
                base_u = ad.add(base_u, ad.segment_sum(msg, sig, idx.sizes[p]))
            branch_u = self._mlp2(base_u, pt, f"{pre}.up")

            out.append(
                self._act(
                    self._dense(ad.concat_cols(branch_b, branch_u), pt, f"{pre}.U")
                )
            )
        return out

    def layer_outputs(self, idx: ComplexIndices, feats, pt=None):
        """Feature tensors after every layer; feats is one matrix per dim."""
        pt = pt or self._wrap()
        feats = [
            f if isinstance(f, Tensor) else Tensor(np.asarray(f, dtype=np.float64))
            for f in self._pad_feats(idx, feats)
        ]
        per_layer = []
        for t in range(self.config.layers):
            feats = self._layer(t, idx, feats, pt)
            per_layer.append(feats)
        return per_layer, pt

    def _pad_feats(self, idx, feats):
        feats = list(feats)
        width = feats[0].shape[1] if feats else 1
        while len(feats) < NETWORK_MAX_DIM + 1:
            feats.append(np.zeros((idx.sizes[len(feats)], width)))
        for p, f in enumerate(feats):
            if f.shape[0] != idx.sizes[p]:
                raise ShapeMismatch(
                    f"dim {p}: {f.shape[0]} feature rows for {idx.sizes[p]} cells"
                )
        return feats

    def embed(self, idx: ComplexIndices, feats, pt=None):
        """Per-complex embedding: pooled per dimension, mapped, summed.

        Dimensions with no cells in a given complex contribute zero."""
        per_layer, pt = self.layer_outputs(idx, feats, pt)
        final = per_layer[-1]
        emb = None
        for p in range(NETWORK_MAX_DIM + 1):
            counts = np.bincount(idx.seg[p], minlength=idx.n_complexes)
            if self.config.readout == "mean":
                pooled = ad.mean_rows_by_segment(final[p], idx.seg[p], idx.n_complexes)
            else:
                pooled = ad.segment_sum(final[p], idx.seg[p], idx.n_complexes)
            mapped = self._act(self._dense(pooled, pt, f"R.d{p}"))
            mask = (counts > 0).astype(np.float64)[:, None]
            mapped = ad.hadamard_const(mapped, mask)
            emb = mapped if emb is None else ad.add(emb, mapped)
        return emb, pt

    def grads(self, pt):
        return {k: t.grad for k, t in pt.items() if t.grad is not None}


class RingTransferModel:
    """CIN applied to a fixed ring complex; predicts the class of the
    source node's one-hot feature from the target node's final state."""

    def __init__(self, config: ModelConfig, ring: CellComplex, target: int,
                 num_classes: int):
        self.cin = CinModel(config, (num_classes,))
        self.config = config
        self.base = complex_indices(ring)
        self.target = target
        self.n_nodes = ring.dims[0]
        rng = np.random.default_rng(config.seed + 1)
        h = config.hidden
        self.cin.params["node_cls.W"] = _glorot(rng, h, num_classes)
        self.cin.params["node_cls.b"] = np.zeros((1, num_classes))
        self.params = self.cin.params
        self._tiles = {}

    def _batch(self, count):
        if count not in self._tiles:
            self._tiles[count] = tile_indices(self.base, count)
        return self._tiles[count]

    def logits_on_batch(self, node_feature_mats, pt=None):
        count = len(node_feature_mats)
        idx = self._batch(count)
        h0 = np.concatenate(node_feature_mats, axis=0)
        width = h0.shape[1]
        feats = [
            h0,
            np.zeros((idx.sizes[1], width)),
            np.zeros((idx.sizes[2], width)),
        ]
        per_layer, pt = self.cin.layer_outputs(idx, feats, pt)
        targets = np.arange(count) * self.n_nodes + self.target
        picked = ad.gather_rows(per_layer[-1][0], targets)
        logits = ad.add(
            ad.matmul(picked, pt["node_cls.W"]), pt["node_cls.b"]
        )
        return logits, pt

    def loss_on_batch(self, inputs, labels):
        logits, pt = self.logits_on_batch(inputs)
        return ad.cross_entropy(logits, np.asarray(labels)), pt, logits

    def predict(self, inputs):
        logits, _ = self.logits_on_batch(inputs)
        return np.argmax(logits.value, axis=1)


class GinBaseline:
    """Plain node-level message passing (sum aggregation, GIN-style)."""

    def __init__(self, layers, hidden, in_width, num_classes, graph, target, seed=0):
        self.layers = layers
        self.hidden = hidden
        self.target = target
        self.n = graph.n
        src, dst = [], []
        for u, v in graph.edges:
            src += [u, v]
            dst += [v, u]
        order = np.lexsort((np.asarray(src), np.asarray(dst)))
        self.src = np.asarray(src, dtype=np.intp)[order]
        self.dst = np.asarray(dst, dtype=np.intp)[order]
        rng = np.random.default_rng(seed)
        self.params = {}
        w = in_width
        for t in range(layers):
            self.params[f"l{t}.W1"] = _glorot(rng, w, hidden)
            self.params[f"l{t}.b1"] = np.zeros((1, hidden))
            self.params[f"l{t}.W2"] = _glorot(rng, hidden, hidden)
            self.params[f"l{t}.b2"] = np.zeros((1, hidden))
            w = hidden
        self.params["cls.W"] = _glorot(rng, w, num_classes)
        self.params["cls.b"] = np.zeros((1, num_classes))

    def logits_on_batch(self, node_feature_mats, pt=None):
        count = len(node_feature_mats)
        pt = pt or {k: Tensor(v) for k, v in self.params.items()}
        reps = np.arange(count, dtype=np.intp)
        dst = (self.dst[None, :] + (reps * self.n)[:, None]).reshape(-1)
        src = (self.src[None, :] + (reps * self.n)[:, None]).reshape(-1)
        h = Tensor(np.concatenate(node_feature_mats, axis=0))
        rows = count * self.n
        for t in range(self.layers):
            agg = ad.add(h, ad.segment_sum(ad.gather_rows(h, src), dst, rows))
            hid = ad.relu(ad.add(ad.matmul(agg, pt[f"l{t}.W1"]), pt[f"l{t}.b1"]))
            h = ad.relu(ad.add(ad.matmul(hid, pt[f"l{t}.W2"]), pt[f"l{t}.b2"]))
        picked = ad.gather_rows(h, reps * self.n + self.target)
        logits = ad.add(ad.matmul(picked, pt["cls.W"]), pt["cls.b"])
        return logits, pt

    def loss_on_batch(self, inputs, labels):
        logits, pt = self.logits_on_batch(inputs)
        return ad.cross_entropy(logits, np.asarray(labels)), pt, logits

    def predict(self, inputs):
        logits, _ = self.logits_on_batch(inputs)
        return np.argmax(logits.value, axis=1)


# -- training ----------------------------------------------------------------


@dataclass
class TrainConfig:
    lr: float = 1e-3
    decay_factor: float = 0.5
    patience: int = 5
    min_lr: float = 1e-5
    max_epochs: int = 200
    batch_size: int = 128
    seed: int = 0
    loss_stop: float = 1e-4


def train(model, inputs, labels, config: TrainConfig):
    """Adam with plateau decay; stops below min_lr, at max_epochs, or once
    the epoch loss falls under loss_stop.  Deterministic given the seed."""
    rng = np.random.default_rng(config.seed)
    opt = ad.Adam(model.params, lr=config.lr)
    n = len(inputs)
    labels = np.asarray(labels)
    best = np.inf
    stale = 0
    history = []
    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for lo in range(0, n, config.batch_size):
            sel = order[lo : lo + config.batch_size]
            loss, pt, _ = model.loss_on_batch(
                [inputs[i] for i in sel], labels[sel]
            )
            if not np.isfinite(loss.value):
                raise Diverged(f"non-finite loss at epoch {epoch}")
            ad.backward(loss)
            opt.step(model.grads(pt) if hasattr(model, "grads") else
                     {k: t.grad for k, t in pt.items() if t.grad is not None})
            total += float(loss.value) * len(sel)
        epoch_loss = total / n
        history.append({"epoch": epoch, "loss": epoch_loss, "lr": opt.lr})
        if epoch_loss < best - 1e-12:
            best = epoch_loss
            stale = 0
        else:
            stale += 1
            if stale > config.patience:
                opt.lr *= config.decay_factor
                stale = 0
        if epoch_loss < config.loss_stop or opt.lr < config.min_lr:
            break
    return history


def accuracy(model, inputs, labels, batch_size=256):
    labels = np.asarray(labels)
    hits = 0
    for lo in range(0, len(inputs), batch_size):
        pred = model.predict(inputs[lo : lo + batch_size])
        hits += int((pred == labels[lo : lo + batch_size]).sum())
    return hits / len(inputs)


# -- checks ------------------------------------------------------------------


def check_equivariance(model: CinModel, x: CellComplex, perms, feats) -> float:
    """Max deviation between permuting one layer's output and running the
    layer on the permuted complex and features."""
    idx = complex_indices(x)
    pt = model._wrap()
    out1, _ = model.layer_outputs(idx, feats, pt)
    xp = x.permuted(perms)
    idx_p = complex_indices(xp)
    perms = list(perms) + [
        list(range(idx.sizes[p])) for p in range(len(perms), NETWORK_MAX_DIM + 1)
    ]
    feats_p = []
    for p, f in enumerate(model._pad_feats(idx, feats)):
        fp = np.empty_like(np.asarray(f, dtype=np.float64))
        fp[np.asarray(perms[p], dtype=np.intp)] = f
        feats_p.append(fp)
    out2, _ = model.layer_outputs(idx_p, feats_p, pt)
    dev = 0.0
    for layer1, layer2 in zip(out1, out2):
        for p in range(NETWORK_MAX_DIM + 1):
            expected = np.empty_like(layer1[p].value)
            expected[np.asarray(perms[p], dtype=np.intp)] = layer1[p].value
            if expected.size:
                dev = max(dev, float(np.max(np.abs(expected - layer2[p].value))))
    return dev


def gradient_check(model, inputs, labels, step=1e-6, max_entries_per_param=8,
                   seed=0):
    """Max relative error of reverse-mode gradients vs central differences."""
    loss, pt, _ = model.loss_on_batch(inputs, labels)
    ad.backward(loss)
    analytic = {k: (t.grad if t.grad is not None else np.zeros_like(t.value))
                for k, t in pt.items()}
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in sorted(model.params):
        arr = model.params[name]
        flat = arr.reshape(-1)
        count = min(max_entries_per_param, flat.size)
        picks = rng.choice(flat.size, size=count, replace=False)
        for j in picks:
            orig = flat[j]
            flat[j] = orig + step
            up, _, _ = model.loss_on_batch(inputs, labels)
            flat[j] = orig - step
            down, _, _ = model.loss_on_batch(inputs, labels)
            flat[j] = orig
            fd = (float(up.value) - float(down.value)) / (2 * step)
            an = float(analytic[name].reshape(-1)[j])
            err = abs(fd - an) / max(1.0, abs(fd), abs(an))
            worst = max(worst, err)
    return worst


def linear_diffusion_layer(x: CellComplex, p: int, h, w0, w1):
    """The degree-one Laplacian filter H W0 + L_p H W1 evaluated purely by
    upper/lower message passing with signed witnesses (the message passing
    view of the polynomial convolution)."""
    h = np.asarray(h, dtype=np.float64)
    n = x.dims[p]
    diffused = np.zeros_like(h)
    if p >= 1:
        signs = boundary_matrix(x, p, signed=True).matrix
        for i in range(n):
            diffused[i] += len(x.boundaries[p][i]) * h[i]
            for tau, delta in x.lower[p][i]:
                diffused[i] += signs[delta, i] * signs[delta, tau] * h[tau]
    if p + 1 <= x.dim and x.dims[p + 1]:
        signs = boundary_matrix(x, p + 1, signed=True).matrix
        for i in range(n):
            diffused[i] += len(x.coboundary[p][i]) * h[i]
            for tau, delta in x.upper[p][i]:
                diffused[i] += signs[i, delta] * signs[tau, delta] * h[tau]
    return h @ np.asarray(w0) + diffused @ np.asarray(w1)
