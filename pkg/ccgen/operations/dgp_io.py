"""DGP spec files: versioned JSON that replays a sampled DGP bit-exactly."""

import json
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from ccgen.exceptions.data import ChecksumMismatch, ParseError, UnsupportedVersion
from ccgen.log import get_logger
from ccgen.models.alt_prior import BernsteinDgp, ValueBasedDgp
from ccgen.models.config import RunConfig, build_config
from ccgen.models.dgp_spec import DGP_SPEC_VERSION, DgpSpec
from ccgen.models.prior import Dataset, Dgp, OneMlpDgp
from ccgen.operations.dgp_ops import SAMPLERS, dataset_digest

logger = get_logger(__name__)


def _summary(dgp: Any) -> dict[str, Any]:
    if isinstance(dgp, (Dgp, OneMlpDgp)):
        return {
            "t_min": dgp.t_minmax[0],
            "t_max": dgp.t_minmax[1],
            "sigma_t_tilde": dgp.sigma_t_tilde,
            "sigma_mu": dgp.sigma_mu,
        }
    if isinstance(dgp, BernsteinDgp):
        return {"degree": dgp.degree, "heterogeneity": dgp.heterogeneity, "overlap": dgp.overlap}
    if isinstance(dgp, ValueBasedDgp):
        return {
            "support_points": dgp.support_points.tolist(),
            "noise_fraction": dgp.noise_fraction,
            "overlap": dgp.overlap,
        }
    return {}


def dgp_spec(dgp: Any, dataset: Dataset, config: RunConfig) -> DgpSpec:
    split = getattr(dgp, "split", None)
    return DgpSpec(
        prior=config.prior,
        seed=dgp.seed,
        index=dgp.index,
        attempt=dgp.retries,
        config=config.model_dump(mode="json"),
        hyperparams=dgp.hyperparams.model_dump(mode="json"),
        split=None
        if split is None
        else {
            "conf": list(split.conf_indices),
            "t_only": list(split.t_only_indices),
            "y_only": list(split.y_only_indices),
        },
        summary=_summary(dgp),
        dataset_sha256=dataset_digest(dataset),
    )


def save_dgp_spec(spec: DgpSpec, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(spec.model_dump(mode="json"), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def load_dgp_spec(path: str | Path) -> DgpSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"Invalid DGP spec JSON in {path}: {exc.msg}", row=exc.lineno) from exc
    version = data.get("format_version")
    if version != DGP_SPEC_VERSION:
        raise UnsupportedVersion("DGP spec", version)
    try:
        return DgpSpec.model_validate(data)
    except ValidationError as exc:
        raise ParseError(f"Invalid DGP spec {path}: {exc}") from exc


def replay_dgp(spec: DgpSpec) -> tuple[Any, Dataset, RunConfig]:
    """Re-derive the accepted draw and check its dataset digest."""
    config = build_config(spec.config)
    dgp, dataset = SAMPLERS[spec.prior](config, spec.seed, spec.index, spec.attempt)
    if dataset_digest(dataset) != spec.dataset_sha256:
        raise ChecksumMismatch("replayed dataset")
    logger.debug("Replayed %s DGP seed=%d index=%d", spec.prior.value, spec.seed, spec.index)
    return dgp, dataset, config
