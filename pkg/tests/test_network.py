import numpy as np
import pytest

import cellnet.autodiff as ad
from cellnet.cells import Graph
from cellnet.errors import MissingLabels, ShapeMismatch
from cellnet.fixtures import (
    cycle_graph,
    hexagon,
    hexagon_with_disk,
    sphere_complex,
)
from cellnet.lifting import LiftingSpec, ic, lift
from cellnet.network import (
    CinModel,
    GinBaseline,
    ModelConfig,
    RingTransferModel,
    TrainConfig,
    batch_indices,
    check_equivariance,
    complex_indices,
    gradient_check,
    init_features,
    linear_diffusion_layer,
    train,
)
from cellnet.refinement import SPARSE_ADJ, cwl_refine
from cellnet.spectral import hodge_laplacian


def random_lifted(seed, n=8, p=0.45, spec="IC:6,CL:4"):
    rng = np.random.default_rng(seed)
    edges = [
        (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p
    ]
    return lift(Graph(n, tuple(edges)), LiftingSpec.parse(spec, max_dim=3))


# -- features ----------------------------------------------------------------


def test_init_features_disk():
    x = hexagon_with_disk()
    feats = init_features(x, "constant_one", "sum_of_vertices")
    assert np.array_equal(feats[0], np.ones((6, 1)))
    assert np.array_equal(feats[1], 2 * np.ones((6, 1)))
    assert np.array_equal(feats[2], [[6.0]])
    mean = init_features(x, "constant_one", "mean_of_vertices")
    assert np.array_equal(mean[2], [[1.0]])


def test_init_features_labels():
    g = Graph(3, ((0, 1), (1, 2)), node_labels=(2, 0, 1))
    from cellnet.cells import graph_to_complex

    x = graph_to_complex(g)
    onehot = init_features(x, "onehot_labels", "zero", labels=g.node_labels)
    assert np.array_equal(onehot[0], [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert np.array_equal(onehot[1], np.zeros((2, 3)))
    with pytest.raises(MissingLabels):
        init_features(x, "node_labels", "zero")


# -- autodiff ----------------------------------------------------------------


def test_backward_simple_ops():
    a = ad.Tensor([[1.0, -2.0]])
    w = ad.Tensor([[3.0], [4.0]])
    out = ad.matmul(ad.relu(a), w)
    loss = ad.mae(out, np.array([[0.0]]))
    ad.backward(loss)
    # relu kills the -2 entry; d|3|/dw = sign(3) * a_relu
    assert np.allclose(w.grad, [[1.0], [0.0]])
    assert np.allclose(a.grad, [[3.0], [0.0]].__class__([[3.0, 0.0]]))


def test_cross_entropy_gradient_matches_probs():
    logits = ad.Tensor([[0.0, 0.0, 0.0]])
    loss = ad.cross_entropy(logits, np.array([1]))
    ad.backward(loss)
    assert np.allclose(loss.value, np.log(3.0))
    assert np.allclose(logits.grad, [[1 / 3, -2 / 3, 1 / 3]])


def test_segment_ops_deterministic():
    a = ad.Tensor(np.arange(6.0).reshape(6, 1))
    seg = np.array([0, 0, 1, 1, 1, 0])
    s = ad.segment_sum(a, seg, 2)
    assert np.array_equal(s.value, [[6.0], [9.0]])
    m = ad.mean_rows_by_segment(a, seg, 3)
    assert np.array_equal(m.value, [[2.0], [3.0], [0.0]])


# -- model forward -----------------------------------------------------------


def test_isolated_vertex_layer():
    # no neighbours at all: both branches see only the cell's own feature
    from cellnet.cells import CellComplex

    x = CellComplex([[()]])
    model = CinModel(ModelConfig(layers=1, hidden=3, embedding=2, seed=0), (1,))
    idx = complex_indices(x)
    per_layer, _ = model.layer_outputs(idx, [np.ones((1, 1))])
    assert per_layer[0][0].value.shape == (1, 3)
    assert np.all(np.isfinite(per_layer[0][0].value))


def test_shape_mismatch_detected():
    x = hexagon_with_disk()
    model = CinModel(ModelConfig(layers=1, hidden=3, embedding=2, seed=0), (1,))
    with pytest.raises(ShapeMismatch):
        model.layer_outputs(complex_indices(x), [np.ones((4, 1))])


def test_sphere_upper_multiplicity_in_forward():
    # the e0-e1 upper adjacency has two witnesses; dropping one changes the sum
    x = sphere_complex()
    model = CinModel(
        ModelConfig(layers=1, hidden=4, embedding=2, nonlinearity="elu", seed=3),
        (1,),
    )
    idx = complex_indices(x)
    assert len(idx.upper[1][0]) == 4  # 2 per edge, one per hemisphere
    feats = init_features(x, "constant_one", "sum_of_vertices")
    out_full, _ = model.layer_outputs(idx, feats)
    # forge an index set with a single witness per edge pair
    idx1 = complex_indices(x)
    sig, tau, delta = idx1.upper[1]
    idx1.upper[1] = (sig[::2], tau[::2], delta[::2])
    out_half, _ = model.layer_outputs(idx1, feats)
    assert not np.allclose(out_full[-1][1].value, out_half[-1][1].value)


def test_batch_matches_single():
    xs = [random_lifted(s) for s in (0, 1)]
    model = CinModel(ModelConfig(layers=2, hidden=5, embedding=4, seed=1), (1,))
    parts = [complex_indices(x) for x in xs]
    feats = [init_features(x, "constant_one", "sum_of_vertices") for x in xs]
    singles = [model.embed(p, f)[0].value[0] for p, f in zip(parts, feats)]
    joint = batch_indices(parts)
    joint_feats = [
        np.concatenate([f[p] if p < len(f) else np.zeros((0, 1)) for f in feats])
        for p in range(3)
    ]
    both, _ = model.embed(joint, joint_feats)
    assert np.max(np.abs(both.value - np.stack(singles))) < 1e-12


def test_empty_dimension_readout_zero():
    # a graph with no cycles lifts with no 2-cells; embeddings stay finite
    g = Graph(4, ((0, 1), (1, 2), (2, 3)))
    x = lift(g, ic(6))
    model = CinModel(ModelConfig(layers=1, hidden=3, embedding=2, seed=0), (1,))
    emb, _ = model.embed(complex_indices(x), init_features(x))
    assert np.all(np.isfinite(emb.value))


# -- invariants --------------------------------------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_layer_equivariance(seed):
    x = random_lifted(seed)
    model = CinModel(
        ModelConfig(layers=2, hidden=6, embedding=4, nonlinearity="relu",
                    seed=seed), (1,)
    )
    rng = np.random.default_rng(seed + 50)
    perms = [list(rng.permutation(x.dims[p])) for p in range(min(x.dim, 2) + 1)]
    feats = init_features(x, "constant_one", "sum_of_vertices")
    dev = check_equivariance(model, x, perms, feats)
    assert dev <= 1e-8


def test_identity_permutation_zero_deviation():
    x = random_lifted(9)
    model = CinModel(ModelConfig(layers=1, hidden=4, embedding=3, seed=2), (1,))
    perms = [list(range(x.dims[p])) for p in range(min(x.dim, 2) + 1)]
    feats = init_features(x, "constant_one", "sum_of_vertices")
    assert check_equivariance(model, x, perms, feats) == 0.0


def test_embedding_permutation_invariance():
    x = random_lifted(4)
    model = CinModel(ModelConfig(layers=2, hidden=6, embedding=4, seed=7), (1,))
    emb1, _ = model.embed(
        complex_indices(x), init_features(x, "constant_one", "sum_of_vertices")
    )
    rng = np.random.default_rng(99)
    perms = [list(rng.permutation(x.dims[p])) for p in range(x.dim + 1)]
    xp = x.permuted(perms)
    emb2, _ = model.embed(
        complex_indices(xp), init_features(xp, "constant_one", "sum_of_vertices")
    )
    assert np.max(np.abs(emb1.value - emb2.value)) <= 1e-8


@pytest.mark.parametrize("fixture", ["disk", "sphere", "circulant"])
def test_cwl_colour_classes_share_features(fixture):
    # cells with equal refinement colours at round t have equal layer-t rows
    if fixture == "disk":
        x = hexagon_with_disk()
    elif fixture == "sphere":
        x = sphere_complex()
    else:
        from cellnet.experiments import circulant

        x = lift(circulant(12, 3), ic(6))
    layers = 3
    model = CinModel(
        ModelConfig(layers=layers, hidden=5, embedding=4, seed=11), (1,)
    )
    feats = init_features(x, "constant_one", "constant_one")
    per_layer, _ = model.layer_outputs(complex_indices(x), feats)
    part = cwl_refine(x, SPARSE_ADJ)
    for t in range(1, layers + 1):
        colours = part.rounds[min(t, part.converged_at)]
        out = per_layer[t - 1]
        for p in range(min(x.dim, 2) + 1):
            rows = out[p].value
            for i in range(x.dims[p]):
                for j in range(i + 1, x.dims[p]):
                    from cellnet.cells import CellId

                    if colours[CellId(p, i)] == colours[CellId(p, j)]:
                        assert np.max(np.abs(rows[i] - rows[j])) <= 1e-9


# -- gradients and training --------------------------------------------------


def test_gradient_check_small_model():
    x = lift(cycle_graph(6), ic(6))
    cfg = ModelConfig(layers=2, hidden=4, embedding=4, nonlinearity="elu", seed=0)
    model = RingTransferModel(cfg, x, target=3, num_classes=3)
    rng = np.random.default_rng(0)
    inputs = [rng.normal(size=(6, 3)) for _ in range(2)]
    worst = gradient_check(model, inputs, [0, 2], max_entries_per_param=3)
    assert worst <= 1e-5


def test_gin_baseline_gradients():
    g = cycle_graph(5)
    model = GinBaseline(2, 4, 3, 3, g, target=2, seed=1)
    rng = np.random.default_rng(1)
    inputs = [rng.normal(size=(5, 3)) for _ in range(2)]
    worst = gradient_check(model, inputs, [1, 0], max_entries_per_param=3)
    assert worst <= 1e-5


def test_train_memorises_single_sample():
    x = lift(cycle_graph(4), ic(4))
    cfg = ModelConfig(layers=2, hidden=8, embedding=8, seed=0)
    model = RingTransferModel(cfg, x, target=2, num_classes=2)
    h = np.ones((4, 2))
    h[0] = [0.0, 1.0]
    hist = train(model, [h], [1], TrainConfig(seed=0, max_epochs=400,
                                              batch_size=1))
    assert hist[-1]["loss"] < 1e-3
    assert model.predict([h]) == [1]


def test_train_deterministic_under_seed():
    x = lift(cycle_graph(4), ic(4))

    def run():
        cfg = ModelConfig(layers=1, hidden=4, embedding=4, seed=3)
        model = RingTransferModel(cfg, x, target=2, num_classes=2)
        data = []
        for label in (0, 1, 0, 1):
            h = np.ones((4, 2))
            h[0] = 0.0
            h[0, label] = 1.0
            data.append(h)
        train(model, data, [0, 1, 0, 1],
              TrainConfig(seed=3, max_epochs=5, batch_size=2))
        return {k: v.copy() for k, v in model.params.items()}

    p1, p2 = run(), run()
    assert all(np.array_equal(p1[k], p2[k]) for k in p1)


# -- spectral subsumption ----------------------------------------------------


@pytest.mark.parametrize("seed", range(4))
def test_linear_diffusion_matches_laplacian_filter(seed):
    x = random_lifted(seed)
    rng = np.random.default_rng(seed)
    for p in range(x.dim + 1):
        h = rng.normal(size=(x.dims[p], 3))
        w0 = rng.normal(size=(3, 2))
        w1 = rng.normal(size=(3, 2))
        expected = h @ w0 + hodge_laplacian(x, p).matrix @ h @ w1
        got = linear_diffusion_layer(x, p, h, w0, w1)
        assert np.max(np.abs(got - expected)) <= 1e-10
