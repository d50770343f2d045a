"""Contextual extrema estimation and 1-D sweep series.

The quantity of interest: how far an output can move when a chosen set of
features varies over its declared ranges while every other feature stays
clamped at the context. Two strategies are provided.

grid
    Full Cartesian product of per-feature level sets. Continuous features
    contribute ``grid_levels`` equally spaced points including both
    endpoints; categorical features contribute every level. Probe order is
    the odometer over the varied indices sorted ascending (last index spins
    fastest). Exact for categorical sets and for any model whose extrema
    sit on grid points (e.g. monotone models, endpoints included).

montecarlo
    ``mc_samples`` independent uniform draws over the varied features,
    keyed by the seed, in draw order. The recommendation once a grid
    product would blow past the probe cap.

Either way the unmodified context is appended as the final probe, so the
estimated interval always contains the context's own output and utilities
stay inside [0, 1] by construction rather than by luck.

Estimates are estimates, not proofs: every result carries ``probes_used``
so downstream consumers can judge fidelity.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace

import numpy as np

from .core import Context, FeatureSpace
from .errors import InternalError, ProbeBudgetError, ValidationError
from .models import Predictor, predict_batch

GRID = "grid"
MONTECARLO = "montecarlo"
DEFAULT_PROBE_CAP = 1_000_000


@dataclass(frozen=True)
class EstimatorConfig:
    strategy: str = GRID
    grid_levels: int = 21
    mc_samples: int = 1000
    seed: int = 0
    refinement: int = 0
    probe_cap: int = DEFAULT_PROBE_CAP

    def __post_init__(self) -> None:
        if self.strategy not in (GRID, MONTECARLO):
            raise ValidationError(
                f"unknown strategy {self.strategy!r} (expected {GRID!r} or {MONTECARLO!r})"
            )
        if self.grid_levels < 2:
            raise ValidationError(f"grid_levels must be >= 2, got {self.grid_levels}")
        if self.mc_samples < 1:
            raise ValidationError(f"mc_samples must be >= 1, got {self.mc_samples}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in an unsigned 64-bit integer")
        if self.refinement < 0:
            raise ValidationError(f"refinement must be >= 0, got {self.refinement}")
        if self.probe_cap < 1:
            raise ValidationError(f"probe_cap must be >= 1, got {self.probe_cap}")


@dataclass(frozen=True)
class ExtremaEstimate:
    """Estimated [cmin, cmax] of one output over a varied feature set."""

    cmin: float
    cmax: float
    argmin: tuple[float, ...]
    argmax: tuple[float, ...]
    probes_used: int

    def __post_init__(self) -> None:
        if not self.cmin <= self.cmax:
            raise InternalError(f"cmin {self.cmin} above cmax {self.cmax}")


def _checked_feature_set(space: FeatureSpace, feature_set: Iterable[int]) -> list[int]:
    indices = sorted(set(feature_set))
    if not indices:
        raise ValidationError("feature set must be non-empty")
    for i in indices:
        if not isinstance(i, (int, np.integer)) or isinstance(i, bool) or not 0 <= i < len(space):
            raise ValidationError(
                f"feature index {i!r} out of range 0..{len(space) - 1}"
            )
    return [int(i) for i in indices]


def _grid_axis(space: FeatureSpace, index: int, levels: int) -> np.ndarray:
    feat = space[index]
    if feat.is_categorical:
        return np.arange(feat.n_levels, dtype=np.float64)
    return np.linspace(feat.lower, feat.upper, levels)


def generate_probes(
    space: FeatureSpace,
    context: Context,
    feature_set: Iterable[int],
    config: EstimatorConfig,
) -> np.ndarray:
    """Probe matrix for one varied feature set, context appended last.

    Every probe equals the context outside ``feature_set``. Order is
    deterministic: grid probes in odometer order over the sorted indices,
    Monte Carlo probes in draw order. Grid products beyond
    ``config.probe_cap`` are rejected with a pointer to montecarlo.
    """
    indices = _checked_feature_set(space, feature_set)
    base = context.as_array()
    if base.shape[0] != len(space):
        raise ValidationError("context length does not match the feature space")

    if config.strategy == GRID:
        axes = [_grid_axis(space, i, config.grid_levels) for i in indices]
        count = math.prod(len(a) for a in axes)
        if count > config.probe_cap:
            raise ProbeBudgetError(
                f"grid over features {indices} needs {count} probes, above the cap "
                f"of {config.probe_cap}; use the montecarlo strategy or fewer levels"
            )
        mesh = np.meshgrid(*axes, indexing="ij")
        block = np.stack([m.reshape(-1) for m in mesh], axis=1)
    else:
        rng = np.random.default_rng([config.seed, *indices])
        cols = []
        for i in indices:
            feat = space[i]
            if feat.is_categorical:
                cols.append(rng.integers(0, feat.n_levels, config.mc_samples).astype(np.float64))
            else:
                cols.append(rng.uniform(feat.lower, feat.upper, config.mc_samples))
        block = np.stack(cols, axis=1)

    probes = np.tile(base, (block.shape[0] + 1, 1))
    probes[:-1, indices] = block
    # final row is the untouched context by construction
    return probes


def _extrema_of_column(outputs: np.ndarray, probes: np.ndarray, j: int,
                       probes_used: int | None = None) -> ExtremaEstimate:
    col = outputs[:, j]
    imin = int(np.argmin(col))  # argmin/argmax both take the earliest tie
    imax = int(np.argmax(col))
    return ExtremaEstimate(
        cmin=float(col[imin]),
        cmax=float(col[imax]),
        argmin=tuple(map(float, probes[imin])),
        argmax=tuple(map(float, probes[imax])),
        probes_used=probes_used if probes_used is not None else probes.shape[0],
    )


def estimate_extrema(model: Predictor, probes: np.ndarray, output_index: int) -> ExtremaEstimate:
    """Min/max of one output over a probe matrix.

    Ties break toward the earliest probe, so parallel and serial callers
    that merge per-chunk results must preserve probe order.
    """
    probes = np.asarray(probes, dtype=np.float64)
    if probes.ndim != 2 or probes.shape[0] == 0:
        raise ValidationError("probes must be a non-empty matrix of vectors")
    if not 0 <= output_index < model.n_outputs:
        raise ValidationError(
            f"output index {output_index} out of range 0..{model.n_outputs - 1}"
        )
    outputs = predict_batch(model, probes)
    return _extrema_of_column(outputs, probes, output_index)


def _check_output_indices(model: Predictor, output_indices: Sequence[int]) -> None:
    for j in output_indices:
        if not 0 <= j < model.n_outputs:
            raise ValidationError(
                f"output index {j} out of range 0..{model.n_outputs - 1}"
            )


def _refinement_passes(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    indices: list[int],
    config: EstimatorConfig,
    output_indices: Sequence[int],
) -> list[dict[int, ExtremaEstimate]]:
    """One prediction per round, estimates for every requested output."""
    passes = []
    for r in range(config.refinement + 1):
        levels = (2**r) * (config.grid_levels - 1) + 1
        cfg = replace(config, grid_levels=levels, refinement=0)
        probes = generate_probes(space, context, indices, cfg)
        outputs = predict_batch(model, probes)
        passes.append({j: _extrema_of_column(outputs, probes, j) for j in output_indices})
    return passes


def estimate_extrema_multi(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    feature_set: Iterable[int],
    config: EstimatorConfig,
    output_indices: Sequence[int],
) -> dict[int, ExtremaEstimate]:
    """One probe generation, one model call, extrema for several outputs.

    This is what lets contrastive reports judge two outputs on the same
    evidence. Grid refinement applies when requested and the varied set is
    all-continuous; otherwise a single pass runs.
    """
    indices = _checked_feature_set(space, feature_set)
    _check_output_indices(model, output_indices)
    all_continuous = all(not space[i].is_categorical for i in indices)
    if config.strategy == GRID and config.refinement >= 1 and all_continuous:
        return _refinement_passes(model, space, context, indices, config,
                                  output_indices)[-1]
    probes = generate_probes(space, context, indices, config)
    outputs = predict_batch(model, probes)
    return {j: _extrema_of_column(outputs, probes, j) for j in output_indices}


def refinement_rounds(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    feature_set: Iterable[int],
    config: EstimatorConfig,
    output_index: int,
) -> list[ExtremaEstimate]:
    """Per-round estimates over nested grids of doubling density.

    Round r uses 2^r * (grid_levels - 1) + 1 levels per continuous feature,
    which keeps every earlier grid point, so cmax never decreases and cmin
    never increases across rounds. Each round's probes_used counts that
    round only; see :func:`refine_extrema` for the cumulative figure.
    """
    if config.refinement < 1:
        raise ValidationError("refinement must be >= 1 for refined estimation")
    indices = _checked_feature_set(space, feature_set)
    cat = [i for i in indices if space[i].is_categorical]
    if cat:
        raise ValidationError(
            f"grid refinement varies continuous features only; "
            f"{space[cat[0]].name!r} is categorical"
        )
    _check_output_indices(model, [output_index])
    passes = _refinement_passes(model, space, context, indices, config, [output_index])
    return [p[output_index] for p in passes]


def refine_extrema(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    feature_set: Iterable[int],
    config: EstimatorConfig,
    output_index: int = 0,
) -> ExtremaEstimate:
    """Final refined estimate; probes_used totals every round evaluated."""
    rounds = refinement_rounds(model, space, context, feature_set, config, output_index)
    total = sum(r.probes_used for r in rounds)
    return replace(rounds[-1], probes_used=total)


def sweep_feature(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    feature_index: int,
    resolution: int,
) -> list[tuple[float, np.ndarray]]:
    """Endpoint-inclusive series of (feature value, full output vector).

    Continuous features only; for categorical features use
    :func:`sweep_levels`, which enumerates levels as a labeled series.
    """
    if not 0 <= feature_index < len(space):
        raise ValidationError(f"feature index {feature_index} out of range")
    feat = space[feature_index]
    if feat.is_categorical:
        raise ValidationError(
            f"feature {feat.name!r} is categorical; use sweep_levels for a "
            f"labeled per-level series"
        )
    if resolution < 2:
        raise ValidationError(f"resolution must be >= 2, got {resolution}")
    values = np.linspace(feat.lower, feat.upper, resolution)
    probes = np.tile(context.as_array(), (resolution, 1))
    probes[:, feature_index] = values
    outputs = predict_batch(model, probes)
    return [(float(v), outputs[k]) for k, v in enumerate(values)]


def sweep_levels(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    feature_index: int,
) -> list[tuple[str, np.ndarray]]:
    """Labeled output series over every level of a categorical feature."""
    if not 0 <= feature_index < len(space):
        raise ValidationError(f"feature index {feature_index} out of range")
    feat = space[feature_index]
    if not feat.is_categorical:
        raise ValidationError(
            f"feature {feat.name!r} is continuous; use sweep_feature"
        )
    probes = np.tile(context.as_array(), (feat.n_levels, 1))
    probes[:, feature_index] = np.arange(feat.n_levels, dtype=np.float64)
    outputs = predict_batch(model, probes)
    return [(feat.levels[k], outputs[k]) for k in range(feat.n_levels)]


def sweep_to_csv(series: Sequence[tuple[float | str, np.ndarray]]) -> str:
    """Render a sweep as CSV: header ``value,out_0,...``, numbers %.9g."""
    if not series:
        raise ValidationError("cannot render an empty sweep")
    n_out = len(series[0][1])
    lines = ["value," + ",".join(f"out_{j}" for j in range(n_out))]
    for value, outputs in series:
        head = value if isinstance(value, str) else format(value, ".9g")
        lines.append(head + "," + ",".join(format(float(o), ".9g") for o in outputs))
    return "\n".join(lines) + "\n"
