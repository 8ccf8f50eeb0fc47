import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from prunefair.data import LabeledDataset
from prunefair.net import DenseLayer, Conv2dLayer, Network, TrainConfig, mlp
from prunefair.pruning import (PruneEvent, PruneSchedule, PruneTechnique,
                               WeightTreatment, iterate, prune_step, round_count,
                               sparsity_of)
from prunefair.rng import RngState

UNSTRUCTURED = [PruneTechnique.L1_UNSTRUCTURED, PruneTechnique.RANDOM_UNSTRUCTURED,
                PruneTechnique.GLOBAL_UNSTRUCTURED]
STRUCTURED = [PruneTechnique.L1_STRUCTURED, PruneTechnique.L2_STRUCTURED,
              PruneTechnique.LINFTY_STRUCTURED, PruneTechnique.RANDOM_STRUCTURED]


def simulate_unstructured_survivors(layer_sizes, fraction, iterations, global_pool):
    """Count-level oracle for unstructured pruning.

    Tracks only how many weights survive (in total for the global pool,
    per layer otherwise) under the half-up, minimum-one rounding rule,
    entirely independent of mask bookkeeping. Returns the total survivor
    count after each iteration.
    """
    if global_pool:
        unmasked = sum(layer_sizes)
        out = []
        for _ in range(iterations):
            k = min(max(int(math.floor(fraction * unmasked + 0.5)), 1), unmasked)
            unmasked -= k
            out.append(unmasked)
        return out
    survivors = list(layer_sizes)
    out = []
    for _ in range(iterations):
        for i, u in enumerate(survivors):
            if u == 0:
                continue
            k = min(max(int(math.floor(fraction * u + 0.5)), 1), u)
            survivors[i] = u - k
        out.append(sum(survivors))
    return out


def _dense_net(sizes, seed=0):
    gen = RngState(seed).generator
    layers = []
    prev = sizes[0]
    for width in sizes[1:]:
        layers.append(DenseLayer(prev, width, gen))
        prev = width
    return Network(layers=layers, rng_seed=seed)


class TestRoundingRule:
    def test_half_up_examples(self):
        assert round_count(1.02) == 1   # 3 unmasked at fraction 0.34
        assert round_count(1.0) == 1    # 4 unmasked at fraction 0.25
        assert round_count(2.5) == 3
        assert round_count(2.49) == 2

    def test_minimum_one_when_any_unmasked(self):
        net = _dense_net((2, 1))  # 2 weights
        event = prune_step(net, PruneTechnique.L1_UNSTRUCTURED, 0.2, RngState(0))
        # round(0.4) = 0 but the floor is one weight
        assert sum(event.newly_masked.values()) == 1


class TestSparsityOracle:
    @pytest.mark.parametrize("technique", UNSTRUCTURED)
    def test_matches_count_simulator_exactly(self, technique):
        net = _dense_net((30, 17, 5), seed=3)
        sizes = [l.weights.size for l in net.weighted_layers]
        expected = simulate_unstructured_survivors(
            sizes, 0.2, 12, technique is PruneTechnique.GLOBAL_UNSTRUCTURED)
        rng = RngState(1)
        got = []
        for it in range(12):
            prune_step(net, technique, 0.2, rng.split(f"p{it}"))
            got.append(int(sum(l.mask.sum() for l in net.weighted_layers)))
        assert got == expected
        total = sum(sizes)
        assert sparsity_of(net) == pytest.approx(1 - expected[-1] / total, abs=1e-15)

    def test_twenty_iterations_near_closed_form(self):
        # 1 - 0.8^20 = 0.988471...; integer rounding keeps us within 0.002
        sizes = [54, 864, 48000, 10080, 840]
        survivors = simulate_unstructured_survivors(sizes, 0.2, 20, True)[-1]
        s20 = 1 - survivors / sum(sizes)
        assert abs(s20 - (1 - 0.8**20)) < 0.002


class TestL1Unstructured:
    def test_removes_smallest_magnitudes(self):
        net = _dense_net((4, 1))
        layer = net.layers[0]
        layer.weights = np.array([[0.5, -0.1, 0.9, -0.3]])
        event = prune_step(net, PruneTechnique.L1_UNSTRUCTURED, 0.25, RngState(0))
        np.testing.assert_array_equal(layer.mask, [[1.0, 0.0, 1.0, 1.0]])
        assert event.newly_masked == {0: 1}

    def test_tie_breaks_to_lowest_flat_index(self):
        net = _dense_net((4, 1))
        layer = net.layers[0]
        layer.weights = np.array([[0.5, 0.2, -0.2, 0.2]])
        prune_step(net, PruneTechnique.L1_UNSTRUCTURED, 0.25, RngState(0))
        np.testing.assert_array_equal(layer.mask, [[1.0, 0.0, 1.0, 1.0]])

    def test_scores_use_effective_weights(self):
        # an already-masked large weight scores 0 but is not a candidate;
        # remaining candidates ranked by |w * mask|
        net = _dense_net((3, 1))
        layer = net.layers[0]
        layer.weights = np.array([[9.0, 0.4, 0.6]])
        layer.mask = np.array([[0.0, 1.0, 1.0]])
        prune_step(net, PruneTechnique.L1_UNSTRUCTURED, 0.5, RngState(0))
        np.testing.assert_array_equal(layer.mask, [[0.0, 0.0, 1.0]])


class TestGlobalUnstructured:
    def test_pools_across_layers(self):
        net = _dense_net((2, 2, 1), seed=0)
        l0, l1 = net.weighted_layers
        l0.weights = np.array([[10.0, 20.0], [30.0, 40.0]])
        l1.weights = np.array([[0.1, 0.2]])
        # k = round(0.34 * 6) = 2; both smallest live in the second layer
        prune_step(net, PruneTechnique.GLOBAL_UNSTRUCTURED, 0.34, RngState(0))
        np.testing.assert_array_equal(l0.mask, np.ones((2, 2)))
        np.testing.assert_array_equal(l1.mask, [[0.0, 0.0]])

    def test_layerwise_differs_from_global_on_skewed_layers(self):
        def build():
            net = _dense_net((2, 2, 1), seed=0)
            net.weighted_layers[0].weights = np.array([[10.0, 20.0], [30.0, 40.0]])
            net.weighted_layers[1].weights = np.array([[0.1, 0.2]])
            return net

        net_layer = build()
        prune_step(net_layer, PruneTechnique.L1_UNSTRUCTURED, 0.34, RngState(0))
        net_global = build()
        prune_step(net_global, PruneTechnique.GLOBAL_UNSTRUCTURED, 0.34, RngState(0))
        layer_masks = [l.mask.copy() for l in net_layer.weighted_layers]
        global_masks = [l.mask.copy() for l in net_global.weighted_layers]
        assert not all(np.array_equal(a, b) for a, b in zip(layer_masks, global_masks))


class TestStructured:
    def test_dense_input_axis_is_column(self):
        net = _dense_net((3, 2))
        layer = net.layers[0]
        layer.weights = np.array([[0.9, 0.1, 0.5], [0.8, 0.1, 0.6]])
        prune_step(net, PruneTechnique.L1_STRUCTURED, 0.34, RngState(0))
        # column 1 has the smallest L1 norm; the whole column is zeroed
        np.testing.assert_array_equal(layer.mask, [[1.0, 0.0, 1.0], [1.0, 0.0, 1.0]])

    def test_norms_disagree_where_expected(self):
        # L1 prefers (0.6, 0) over (0.35, 0.35); L2 and Linf prefer the opposite
        def build():
            net = _dense_net((2, 2))
            net.layers[0].weights = np.array([[0.6, 0.35], [0.0, 0.35]])
            return net

        net = build()
        prune_step(net, PruneTechnique.L1_STRUCTURED, 0.5, RngState(0))
        np.testing.assert_array_equal(net.layers[0].mask[:, 0], [0.0, 0.0])

        net = build()
        prune_step(net, PruneTechnique.L2_STRUCTURED, 0.5, RngState(0))
        np.testing.assert_array_equal(net.layers[0].mask[:, 1], [0.0, 0.0])

        net = build()
        prune_step(net, PruneTechnique.LINFTY_STRUCTURED, 0.5, RngState(0))
        np.testing.assert_array_equal(net.layers[0].mask[:, 1], [0.0, 0.0])

    def test_l2_linf_disagree(self):
        # (0.4, 0.4): L2 0.566, Linf 0.4 | (0.5, 0.1): L2 0.51, Linf 0.5
        def build():
            net = _dense_net((2, 2))
            net.layers[0].weights = np.array([[0.4, 0.5], [0.4, 0.1]])
            return net

        net = build()
        prune_step(net, PruneTechnique.L2_STRUCTURED, 0.5, RngState(0))
        np.testing.assert_array_equal(net.layers[0].mask[:, 1], [0.0, 0.0])

        net = build()
        prune_step(net, PruneTechnique.LINFTY_STRUCTURED, 0.5, RngState(0))
        np.testing.assert_array_equal(net.layers[0].mask[:, 0], [0.0, 0.0])

    def test_conv_input_channel_slice(self):
        gen = RngState(0).generator
        net = Network(layers=[Conv2dLayer(3, 2, 3, gen)], rng_seed=0)
        layer = net.layers[0]
        layer.weights = np.ones_like(layer.weights)
        layer.weights[:, 1, :, :] = 0.01
        prune_step(net, PruneTechnique.L1_STRUCTURED, 0.34, RngState(0))
        assert layer.mask[:, 1].sum() == 0
        assert layer.mask[:, 0].sum() == layer.mask[:, 0].size
        assert layer.mask[:, 2].sum() == layer.mask[:, 2].size

    def test_all_channels_pruned_is_noop_with_warning(self):
        net = _dense_net((2, 3))
        layer = net.layers[0]
        layer.mask[:] = 0.0
        before = sparsity_of(net)
        event = prune_step(net, PruneTechnique.L1_STRUCTURED, 0.5, RngState(0))
        assert sparsity_of(net) == before
        assert event.newly_masked == {0: 0}
        assert any("all channels" in w for w in event.warnings)

    def test_channel_alive_while_any_weight_survives(self):
        net = _dense_net((2, 2))
        layer = net.layers[0]
        layer.weights = np.array([[0.9, 0.5], [0.9, 0.5]])
        layer.mask = np.array([[1.0, 0.0], [0.0, 1.0]])  # both columns half-masked
        prune_step(net, PruneTechnique.L1_STRUCTURED, 0.5, RngState(0))
        # column 1 has the smaller surviving L1 mass (0.5 vs 0.9)
        np.testing.assert_array_equal(layer.mask[:, 1], [0.0, 0.0])


class TestRandomTechniques:
    def test_random_unstructured_deterministic_in_rng(self):
        masks = []
        for _ in range(2):
            net = _dense_net((10, 6), seed=2)
            prune_step(net, PruneTechnique.RANDOM_UNSTRUCTURED, 0.3, RngState(5))
            masks.append(net.layers[0].mask.copy())
        np.testing.assert_array_equal(masks[0], masks[1])

    def test_random_structured_counts(self):
        net = _dense_net((10, 4), seed=2)
        event = prune_step(net, PruneTechnique.RANDOM_STRUCTURED, 0.3, RngState(5))
        layer = net.layers[0]
        zero_cols = int((layer.mask.sum(axis=0) == 0).sum())
        assert zero_cols == 3  # round(0.3 * 10)
        assert event.newly_masked == {0: 12}

    def test_random_ignores_already_masked(self):
        net = _dense_net((6, 1), seed=2)
        layer = net.layers[0]
        layer.mask = np.array([[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]])
        for _ in range(20):
            fresh = _dense_net((6, 1), seed=2)
            fresh.layers[0].mask = layer.mask.copy()
            prune_step(fresh, PruneTechnique.RANDOM_UNSTRUCTURED, 0.34, RngState(_))
            # never "re-prunes" a masked weight: count drops by exactly one
            assert fresh.layers[0].mask.sum() == 2


class TestPruneStepValidation:
    def test_bad_fraction(self):
        net = _dense_net((4, 2))
        for frac in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                prune_step(net, PruneTechnique.L1_UNSTRUCTURED, frac, RngState(0))

    def test_no_prunable_layers(self):
        net = Network(layers=[], rng_seed=0)
        with pytest.raises(ValueError):
            prune_step(net, PruneTechnique.L1_UNSTRUCTURED, 0.2, RngState(0))

    def test_sparsity_of_requires_weights(self):
        with pytest.raises(ValueError):
            sparsity_of(Network(layers=[], rng_seed=0))


# ---------------------------------------------------------------------------
# the iterate protocol

def _glyph_data(seed=0, classes=3, count=40, size=8):
    gen = RngState(seed).generator
    images = np.zeros((classes * count, size, size))
    labels = np.repeat(np.arange(classes), count)
    for i, lbl in enumerate(labels):
        img = np.zeros((size, size))
        img[1 + lbl, 1:-1] = 1.0  # horizontal bar whose row encodes the class
        img += gen.uniform(0, 0.2, img.shape)
        images[i] = np.clip(img, 0, 1)
    images = np.rint(images * 255) / 255.0
    return LabeledDataset(images, labels, classes)


class TestIterate:
    def setup_method(self):
        self.data = _glyph_data()
        self.cfg = TrainConfig(epochs=3, learning_rate=0.3, batch_size=16)
        root = RngState(0)
        self.net = mlp(64, (12,), 3, root.split("init"))
        from prunefair.net import train
        train(self.net, self.data, self.cfg, root.split("base"))

    def test_point_count_and_numbering(self):
        points, events = iterate(self.net, self.data, self.data,
                                 PruneTechnique.L1_UNSTRUCTURED, WeightTreatment.FINETUNE,
                                 PruneSchedule(iterations=4), self.cfg, RngState(1))
        assert [p.iteration for p in points] == [0, 1, 2, 3, 4]
        assert len(events) == 4
        assert points[0].sparsity == 0.0
        assert isinstance(events[0], PruneEvent)

    def test_sparsity_nondecreasing(self):
        points, _ = iterate(self.net, self.data, self.data,
                            PruneTechnique.L1_STRUCTURED, WeightTreatment.FINETUNE,
                            PruneSchedule(iterations=6), self.cfg, RngState(1))
        s = [p.sparsity for p in points]
        assert all(b >= a for a, b in zip(s, s[1:]))

    def test_input_network_untouched(self):
        before = [l.weights.copy() for l in self.net.weighted_layers]
        iterate(self.net, self.data, self.data, PruneTechnique.L1_UNSTRUCTURED,
                WeightTreatment.REWIND, PruneSchedule(iterations=2), self.cfg, RngState(1))
        for layer, w in zip(self.net.weighted_layers, before):
            np.testing.assert_array_equal(layer.weights, w)
        assert sparsity_of(self.net) == 0.0

    def test_rewind_and_finetune_diverge(self):
        kw = dict(technique=PruneTechnique.L1_UNSTRUCTURED,
                  schedule=PruneSchedule(iterations=3), cfg=self.cfg)
        p_re, _ = iterate(self.net, self.data, self.data,
                          treatment=WeightTreatment.REWIND, rng=RngState(1), **kw)
        p_ft, _ = iterate(self.net, self.data, self.data,
                          treatment=WeightTreatment.FINETUNE, rng=RngState(1), **kw)
        # same masks (deterministic l1 choice), same sparsities
        np.testing.assert_allclose([p.sparsity for p in p_re], [p.sparsity for p in p_ft])
        assert p_re[0].treatment == "rewind" and p_ft[0].treatment == "finetune"

    def test_deterministic(self):
        runs = []
        for _ in range(2):
            points, _ = iterate(self.net, self.data, self.data,
                                PruneTechnique.RANDOM_UNSTRUCTURED, WeightTreatment.FINETUNE,
                                PruneSchedule(iterations=3), self.cfg, RngState(7))
            runs.append([(p.sparsity, p.total_accuracy) for p in points])
        assert runs[0] == runs[1]


class TestScheduleValidation:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            PruneSchedule(iterations=0)
        with pytest.raises(ValueError):
            PruneSchedule(fraction_per_iteration=0.0)
        with pytest.raises(ValueError):
            PruneSchedule(fraction_per_iteration=1.0)


# ---------------------------------------------------------------------------
# invariant properties

@st.composite
def _net_and_technique(draw):
    sizes = draw(st.lists(st.integers(2, 9), min_size=2, max_size=4))
    seed = draw(st.integers(0, 2**32 - 1))
    technique = draw(st.sampled_from(list(PruneTechnique)))
    fraction = draw(st.floats(0.05, 0.9))
    return sizes, seed, technique, fraction


@pytest.mark.invariants
@given(_net_and_technique(), st.integers(1, 4))
def test_masks_only_flip_one_to_zero(params, steps):
    sizes, seed, technique, fraction = params
    net = _dense_net(tuple(sizes), seed=seed)
    rng = RngState(seed)
    prev = [l.mask.copy() for l in net.weighted_layers]
    for i in range(steps):
        prune_step(net, technique, fraction, rng.split(f"s{i}"))
        for layer, old in zip(net.weighted_layers, prev):
            flipped_up = (layer.mask == 1) & (old == 0)
            assert not flipped_up.any()
        prev = [l.mask.copy() for l in net.weighted_layers]


@pytest.mark.invariants
@given(_net_and_technique())
def test_sparsity_nondecreasing_property(params):
    sizes, seed, technique, fraction = params
    net = _dense_net(tuple(sizes), seed=seed)
    rng = RngState(seed)
    last = sparsity_of(net)
    for i in range(3):
        prune_step(net, technique, fraction, rng.split(f"s{i}"))
        s = sparsity_of(net)
        assert s >= last
        assert 0.0 <= s <= 1.0
        last = s


@pytest.mark.invariants
@given(st.integers(1, 400), st.floats(0.05, 0.95))
def test_unstructured_count_rule(size, fraction):
    net = _dense_net((size, 1), seed=0)
    event = prune_step(net, PruneTechnique.L1_UNSTRUCTURED, fraction, RngState(0))
    expected = min(max(int(math.floor(fraction * size + 0.5)), 1), size)
    assert sum(event.newly_masked.values()) == expected
