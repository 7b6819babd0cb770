"""Random sparse MLPs: construction, exogenous noise and forward propagation."""

from collections.abc import Callable, Sequence

import numpy as np
from scipy.special import expit

from ccgen.models.prior import Node, RandomMlp

IDENTITY = 0


def _leaky_relu(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0.0, z, 0.01 * z)


ACTIVATION_POOL: tuple[tuple[str, Callable[[np.ndarray], np.ndarray]], ...] = (
    ("identity", lambda z: z),
    ("tanh", np.tanh),
    ("leaky_relu", _leaky_relu),
    ("sine", np.sin),
    ("abs", np.abs),
    ("softplus", lambda z: np.logaddexp(0.0, z)),
)


def weight_std(width: int, density: float) -> float:
    """sigma_w = sqrt(2 / max(H * p_d, 1))."""
    return float(np.sqrt(2.0 / max(width * density, 1.0)))


def build_random_mlp(
    layer_count: int,
    width: int,
    density: float,
    protected: frozenset[tuple[int, int, int]] | set[tuple[int, int, int]],
    rng: np.random.Generator,
    *,
    in_dim: int | None = None,
    out_dim: int | None = None,
) -> RandomMlp:
    """Sample a sparse random MLP.

    Args:
        layer_count: number of weight layers.
        width: hidden width H.
        density: probability p_d that an edge is kept.
        protected: edges (layer, out, in) that are always kept.
        rng: random stream.
        in_dim: input width, defaults to ``width``.
        out_dim: width of the last layer, defaults to ``width``. When given, the
            last layer is an output layer with identity activations.

    Returns:
        RandomMlp: weights ~ N(0, sigma_w^2) times the sparsity mask.
    """
    if layer_count < 1 or width < 1 or not 0.0 < density <= 1.0:
        raise ValueError(f"invalid MLP shape: layers={layer_count}, width={width}, density={density}")
    in_dim = width if in_dim is None else in_dim
    widths = [in_dim] + [width] * (layer_count - 1) + [width if out_dim is None else out_dim]
    sigma_w = weight_std(width, density)
    protected = frozenset(protected)

    weights, masks, activations = [], [], []
    for layer in range(1, layer_count + 1):
        shape = (widths[layer], widths[layer - 1])
        w = rng.normal(0.0, sigma_w, size=shape)
        mask = rng.random(shape) < density
        for p_layer, out, inp in protected:
            if p_layer == layer:
                mask[out, inp] = True
        codes = rng.integers(0, len(ACTIVATION_POOL), size=widths[layer])
        if out_dim is not None and layer == layer_count:
            codes[:] = IDENTITY
        weights.append(np.where(mask, w, 0.0))
        masks.append(mask)
        activations.append(codes)

    return RandomMlp(
        weights=tuple(weights),
        masks=tuple(masks),
        activations=tuple(activations),
        sigma_w=sigma_w,
        protected_edges=protected,
    )


def activate(pre: np.ndarray, codes: np.ndarray) -> np.ndarray:
    out = np.empty_like(pre)
    for code in np.unique(codes):
        cols = codes == code
        out[:, cols] = ACTIVATION_POOL[code][1](pre[:, cols])
    return out


def draw_layer_noise(rng: np.random.Generator, n: int, width: int, scale: float) -> np.ndarray:
    """Noise from a random family in {Normal, Laplace, Student-t(3)} with random shift and scale."""
    family = int(rng.integers(0, 3))
    shift = rng.uniform(-1.0, 1.0, size=width)
    spread = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
    if family == 0:
        base = rng.standard_normal((n, width))
    elif family == 1:
        base = rng.laplace(0.0, 1.0, size=(n, width))
    else:
        base = rng.standard_t(3, size=(n, width))
    return scale * (shift + spread * base)


def propagate(
    mlp: RandomMlp,
    z: np.ndarray,
    noise: Sequence[np.ndarray | None],
    *,
    start_layer: int = 1,
    stop_layer: int | None = None,
    on_layer: Callable[[int, np.ndarray], None] | None = None,
) -> list[np.ndarray]:
    """Run z^(l) = act(W^(l) z^(l-1)) + eps^(l) for l in [start_layer, stop_layer].

    ``noise[i]`` is added to layer ``start_layer + i`` (None for no noise).
    ``on_layer(l, z)`` may edit z in place before it feeds the next layer.
    Returns the states of the propagated layers, in order.
    """
    stop = mlp.layer_count if stop_layer is None else stop_layer
    states = []
    with np.errstate(over="ignore", invalid="ignore"):
        for offset, layer in enumerate(range(start_layer, stop + 1)):
            z = activate(z @ mlp.weights[layer - 1].T, mlp.activations[layer - 1])
            eps = noise[offset] if offset < len(noise) else None
            if eps is not None:
                z = z + eps
            if on_layer is not None:
                on_layer(layer, z)
            states.append(z)
    return states


def mechanism_forward(
    mlp: RandomMlp, inputs: np.ndarray, hidden_noise: Sequence[np.ndarray], read: Node
) -> tuple[np.ndarray, np.ndarray]:
    """Forward a scalar-output mechanism; return (output, value of node ``read``)."""
    states = propagate(mlp, inputs, list(hidden_noise) + [None])
    layer, index = read
    return states[-1][:, 0], states[layer - 1][:, index]


def deterministic_forward(mlp: RandomMlp, inputs: np.ndarray) -> np.ndarray:
    """Noise-free forward pass, used by the conditional maps of the alternative priors."""
    return propagate(mlp, inputs, [])[-1]


def softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def logistic(z: np.ndarray) -> np.ndarray:
    return expit(z)
