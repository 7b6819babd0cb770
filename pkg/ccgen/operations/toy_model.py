"""Tri-encoder in-context transformer producing histogram PPDs over binned outcomes."""

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ccgen.models.config import ToyModelConfig
from ccgen.models.ppd import Standardizer
from ccgen.operations.ppd_ops import apply_standardizer, fit_standardizer


# --- feature preprocessing -------------------------------------------------


def svd_components(fit_rows: np.ndarray, target: int) -> np.ndarray:
    """Top ``target`` right singular directions of ``fit_rows`` as a (K, target) matrix.

    Directions beyond the numerical rank are left as zero columns.
    """
    _, singular, vt = np.linalg.svd(fit_rows, full_matrices=False)
    components = np.zeros((fit_rows.shape[1], target))
    cutoff = singular.max(initial=0.0) * max(fit_rows.shape) * np.finfo(float).eps
    rank = int((singular > cutoff).sum())
    keep = min(target, rank)
    components[:, :keep] = vt[:keep].T
    return components


def reduce_dims_svd(x: np.ndarray, target: int, fit_rows: np.ndarray | None = None) -> np.ndarray:
    """Project onto the top singular directions of ``fit_rows`` (defaults to ``x``); no-op when K <= target."""
    if x.shape[1] <= target:
        return x
    return x @ svd_components(x if fit_rows is None else fit_rows, target)


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Context-fitted covariate transform: SVD reduction, zero padding and z-scoring."""
    width: int
    components: np.ndarray | None
    mean: np.ndarray
    std: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.components is not None:
            x = x @ self.components
        padded = np.zeros((x.shape[0], self.width))
        padded[:, : x.shape[1]] = x
        return (padded - self.mean) / self.std


def fit_feature_map(context_x: np.ndarray, width: int) -> FeatureMap:
    components = svd_components(context_x, width) if context_x.shape[1] > width else None
    reduced = context_x @ components if components is not None else context_x
    padded = np.zeros((context_x.shape[0], width))
    padded[:, : reduced.shape[1]] = reduced
    mean = padded.mean(axis=0)
    std = padded.std(axis=0)
    # constant columns map to zero
    return FeatureMap(width=width, components=components, mean=mean, std=np.where(std > 1e-12, std, 1.0))


@dataclass(frozen=True, eq=False)
class TokenBatch:
    """Context triples (x, t, z(y)) and query pairs (x, t) in model space.

    ``targets`` holds per-query bin probabilities, ``target_z`` the standardized
    target values; both are absent at inference time.
    """
    context_x: np.ndarray
    context_t: np.ndarray
    context_y: np.ndarray
    query_x: np.ndarray
    query_t: np.ndarray
    standardizer: Standardizer
    features: FeatureMap
    targets: np.ndarray | None = None
    target_z: np.ndarray | None = None

    @property
    def split(self) -> int:
        return self.context_x.shape[0]

    @property
    def query_count(self) -> int:
        return self.query_x.shape[0]


def make_token_batch(
    context_x: np.ndarray,
    context_t: np.ndarray,
    context_y: np.ndarray,
    query_x: np.ndarray,
    query_t: np.ndarray,
    width: int,
) -> TokenBatch:
    """Fit the covariate map and outcome standardizer on the context and apply them to both sides."""
    features = fit_feature_map(context_x, width)
    standardizer = fit_standardizer(context_y)
    return TokenBatch(
        context_x=features(context_x),
        context_t=np.asarray(context_t, dtype=float),
        context_y=apply_standardizer(standardizer, context_y),
        query_x=features(query_x),
        query_t=np.asarray(query_t, dtype=float),
        standardizer=standardizer,
        features=features,
    )


# --- model -----------------------------------------------------------------


def query_isolation_mask(context_count: int, query_count: int) -> torch.Tensor:
    """Boolean (S, S) mask, True where attention is blocked: no token attends to any query."""
    total = context_count + query_count
    mask = torch.zeros(total, total, dtype=torch.bool)
    mask[:, context_count:] = True
    return mask


class ToyModel(nn.Module):
    """Tri-encoder tokens, a masked transformer encoder and an L-bin head.

    Context token: T-encoder(t) + linear(x, t) + Y-encoder(y). Query token: the
    same without the Y term. No positional encodings.
    """

    def __init__(self, config: ToyModelConfig):
        super().__init__()
        self.config = config
        d = config.embed_dim
        self.t_encoder = nn.Sequential(
            nn.Linear(1, config.t_encoder_hidden), nn.GELU(), nn.Linear(config.t_encoder_hidden, d)
        )
        self.x_encoder = nn.Linear(config.max_features + 1, d)
        self.y_encoder = nn.Linear(1, d)
        self.encoder = nn.TransformerEncoder(
            nn.TransformerEncoderLayer(
                d_model=d,
                nhead=config.head_count,
                dim_feedforward=config.ff_dim,
                dropout=0.0,
                activation="gelu",
                batch_first=True,
            ),
            num_layers=config.layer_count,
            enable_nested_tensor=False,
        )
        self.head = nn.Linear(d, config.bin_count)
        self.reset_parameters()

    def reset_parameters(self) -> None:
        """Normal weights with std 1/sqrt(fan_in), zero biases; layer norms at identity."""
        for module in self.modules():
            if isinstance(module, nn.Linear):
                nn.init.normal_(module.weight, std=module.in_features**-0.5)
                if module.bias is not None:
                    nn.init.zeros_(module.bias)
            elif isinstance(module, nn.MultiheadAttention):
                nn.init.normal_(module.in_proj_weight, std=module.embed_dim**-0.5)
                nn.init.zeros_(module.in_proj_bias)

    def encode_tokens(
        self, x: torch.Tensor, t: torch.Tensor, y: torch.Tensor | None = None
    ) -> torch.Tensor:
        """Embeddings of shape (..., n, embed_dim); ``y`` is None for queries."""
        t = t.unsqueeze(-1)
        emb = self.t_encoder(t) + self.x_encoder(torch.cat([x, t], dim=-1))
        if y is not None:
            emb = emb + self.y_encoder(y.unsqueeze(-1))
        return emb

    def forward(self, context: torch.Tensor, queries: torch.Tensor) -> torch.Tensor:
        """Log-probabilities over the L bins for each query, shape (batch, Q, L)."""
        m, q = context.shape[-2], queries.shape[-2]
        tokens = torch.cat([context, queries], dim=-2)
        mask = query_isolation_mask(m, q).to(tokens.device)
        hidden = self.encoder(tokens, mask=mask)
        return torch.log_softmax(self.head(hidden[..., m:, :]), dim=-1)


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


def _tensor(values: np.ndarray, dtype: torch.dtype) -> torch.Tensor:
    return torch.as_tensor(np.asarray(values), dtype=dtype).unsqueeze(0)


def batch_log_probs(model: ToyModel, batch: TokenBatch, query_slice: slice = slice(None)) -> torch.Tensor:
    """Forward one TokenBatch; returns (Q, L) log-probabilities."""
    dtype = next(model.parameters()).dtype
    context = model.encode_tokens(
        _tensor(batch.context_x, dtype), _tensor(batch.context_t, dtype), _tensor(batch.context_y, dtype)
    )
    queries = model.encode_tokens(
        _tensor(batch.query_x[query_slice], dtype), _tensor(batch.query_t[query_slice], dtype)
    )
    return model(context, queries)[0]
