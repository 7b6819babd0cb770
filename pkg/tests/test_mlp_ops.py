import math

import numpy as np
import pytest

from ccgen.operations.mlp_ops import (
    IDENTITY,
    build_random_mlp,
    draw_layer_noise,
    propagate,
    weight_std,
)


@pytest.mark.parametrize(
    "width, density, expected",
    [(4, 0.5, 1.0), (1, 0.5, math.sqrt(2.0)), (50, 1.0, math.sqrt(2.0 / 50))],
)
def test_weight_std(width, density, expected):
    assert weight_std(width, density) == pytest.approx(expected, rel=1e-15)


def test_full_density_keeps_every_edge(rng):
    mlp = build_random_mlp(4, 12, 1.0, frozenset(), rng)
    assert all(mask.all() for mask in mlp.masks)


def test_protected_edges_survive_sparsity(rng):
    protected = frozenset((1, j, 3) for j in range(20))
    mlp = build_random_mlp(3, 20, 0.1, protected, rng, in_dim=4, out_dim=1)
    assert mlp.masks[0][:, 3].all()
    assert mlp.widths == (4, 20, 20, 1)


def test_masked_weights_are_zero(rng):
    mlp = build_random_mlp(3, 16, 0.3, frozenset(), rng)
    for weights, mask in zip(mlp.weights, mlp.masks):
        assert (weights[~mask] == 0.0).all()


def test_output_layer_is_identity(rng):
    mlp = build_random_mlp(3, 10, 0.7, frozenset(), rng, in_dim=5, out_dim=2)
    assert (mlp.activations[-1] == IDENTITY).all()


def test_invalid_shape_rejected(rng):
    with pytest.raises(ValueError):
        build_random_mlp(0, 10, 0.5, frozenset(), rng)
    with pytest.raises(ValueError):
        build_random_mlp(3, 10, 0.0, frozenset(), rng)


def test_propagate_applies_noise_and_hook(rng):
    mlp = build_random_mlp(3, 6, 0.8, frozenset(), rng)
    z0 = rng.standard_normal((5, 6))
    noise = [np.ones((5, 6)), None, None]
    seen = []

    def hook(layer, z):
        seen.append(layer)
        z[:, 0] = 0.0

    states = propagate(mlp, z0, noise, on_layer=hook)
    clean = propagate(mlp, z0, [])
    assert seen == [1, 2, 3]
    assert len(states) == 3
    assert (states[0][:, 0] == 0.0).all()
    assert not np.allclose(states[0][:, 1:], clean[0][:, 1:])


def test_layer_noise_shape_and_scale(rng):
    noise = draw_layer_noise(rng, 100, 7, 0.0)
    assert noise.shape == (100, 7)
    assert (noise == 0.0).all()
