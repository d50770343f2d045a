"""Contextual importance/utility computation and report orchestration.

For an output j, a context C and a varied feature set, with [Cmin, Cmax]
the contextual extrema from the estimator and [absmin, absmax] the
output's declared absolute range:

    importance  CI = (Cmax - Cmin) / (absmax - absmin)
    utility     CU = (out_j(C) - Cmin) / (Cmax - Cmin)

CI measures how much of the output's total range this feature set controls
right here; CU measures how favorable the context's actual values are
within what the set could achieve. Both live in [0, 1].

Coalitions (concepts) are estimated directly over the joint product space,
not composed from per-feature results, because the importance of a set is
not derivable from singleton importances for non-additive models.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    CiuResult,
    ConceptTree,
    Context,
    FeatureSpace,
    OutputSpec,
)
from .errors import InternalError, ValidationError
from .estimator import EstimatorConfig, ExtremaEstimate, estimate_extrema_multi
from .models import Predictor, predict_batch

# Slack for comparing one value against extrema taken from a differently
# shaped prediction batch; BLAS may round the two evaluations apart by ulps.
_MERGE_RTOL = 1e-9


def contextual_importance(est: ExtremaEstimate, spec: OutputSpec) -> tuple[float, bool]:
    """CI plus a flag set when the estimate strayed outside the declared
    absolute bounds (the value is clamped into [0, 1] in that case)."""
    raw = (est.cmax - est.cmin) / (spec.absmax - spec.absmin)
    strayed = est.cmin < spec.absmin or est.cmax > spec.absmax
    return min(1.0, max(0.0, raw)), strayed


def contextual_utility(out_value: float, est: ExtremaEstimate) -> tuple[float, bool]:
    """CU plus the degeneracy flag.

    A degenerate interval (cmax == cmin, the feature set does not move the
    output here) has no utility direction; 0.5 with the flag set renders as
    neutral downstream. The caller must hand in an out_value inside the
    estimated interval; anything else is an estimator bug, not user error.
    """
    if not est.cmin <= out_value <= est.cmax:
        raise InternalError(
            f"context output {out_value!r} outside estimated interval "
            f"[{est.cmin!r}, {est.cmax!r}]"
        )
    if est.cmax == est.cmin:
        return 0.5, True
    return (out_value - est.cmin) / (est.cmax - est.cmin), False


@dataclass(frozen=True)
class CiuReport:
    """Per-target CI/CU for one output, sorted by importance."""

    context: Context
    output: OutputSpec
    entries: tuple[tuple[str, CiuResult], ...]
    config: EstimatorConfig
    fingerprint: str
    warnings: tuple[str, ...] = ()

    def get(self, target: str) -> CiuResult:
        for name, result in self.entries:
            if name == target:
                return result
        raise KeyError(target)


@dataclass(frozen=True)
class ContrastEntry:
    target: str
    feature_set: frozenset[int]
    ci_a: float
    cu_a: float
    ci_b: float
    cu_b: float

    @property
    def cu_delta(self) -> float:
        return self.cu_a - self.cu_b


@dataclass(frozen=True)
class ContrastReport:
    """Why output A rather than output B: per-target utility deltas."""

    context: Context
    output_a: OutputSpec
    output_b: OutputSpec
    entries: tuple[ContrastEntry, ...]
    config: EstimatorConfig
    fingerprint: str
    warnings: tuple[str, ...] = ()


def resolve_target(
    space: FeatureSpace, tree: ConceptTree | None, name: str
) -> frozenset[int]:
    """Feature name -> singleton index set; concept name -> resolved union."""
    for i, feat in enumerate(space.features):
        if feat.name == name:
            return frozenset((i,))
    if tree is not None and name in tree:
        return tree.resolve(name)
    raise ValidationError(f"unresolvable target {name!r}: neither a feature nor a concept")


def _merge_context_value(est: ExtremaEstimate, out_value: float,
                         context: Context) -> ExtremaEstimate:
    """Fold the report-level context output into an estimate.

    The context sits in every probe batch, but out_value comes from a
    single-row prediction, and a model backed by BLAS may round the two
    evaluations differently. Treating the report's own context evaluation
    as one more probe keeps the interval guarantee literally true. Larger
    excursions are real bugs and stay fatal in contextual_utility.
    """
    scale = max(1.0, abs(est.cmin), abs(est.cmax), abs(out_value))
    tol = _MERGE_RTOL * scale
    if out_value < est.cmin - tol or out_value > est.cmax + tol:
        return est
    cmin, argmin = est.cmin, est.argmin
    cmax, argmax = est.cmax, est.argmax
    if out_value < cmin:
        cmin, argmin = out_value, context.values
    if out_value > cmax:
        cmax, argmax = out_value, context.values
    if cmin == est.cmin and cmax == est.cmax:
        return est
    return ExtremaEstimate(
        cmin=cmin, cmax=cmax, argmin=argmin, argmax=argmax, probes_used=est.probes_used
    )


def _context_outputs(model: Predictor, space: FeatureSpace, context: Context) -> np.ndarray:
    if model.n_inputs != len(space):
        raise ValidationError(
            f"model expects {model.n_inputs} inputs but the feature space has "
            f"{len(space)} features"
        )
    if len(context) != len(space):
        raise ValidationError("context length does not match the feature space")
    return predict_batch(model, context.as_array()[None, :])[0]


def _stray_warning(target: str, est: ExtremaEstimate, spec: OutputSpec) -> str:
    return (
        f"target {target!r}: contextual extrema [{est.cmin:.9g}, {est.cmax:.9g}] "
        f"stray outside declared bounds [{spec.absmin:g}, {spec.absmax:g}] of "
        f"output {spec.label!r}; CI clamped"
    )


def _check_output(spec: OutputSpec, model: Predictor) -> None:
    if not 0 <= spec.index < model.n_outputs:
        raise ValidationError(
            f"output {spec.label!r} has index {spec.index}, but the model exposes "
            f"{model.n_outputs} outputs"
        )


def explain(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    spec: OutputSpec,
    targets: Sequence[str],
    tree: ConceptTree | None = None,
    config: EstimatorConfig | None = None,
    *,
    jobs: int = 1,
) -> CiuReport:
    """Full CI/CU report over features and/or concepts for one output.

    The context's output value is predicted once per report. Entries come
    back sorted by descending CI, ties by target name. ``jobs`` fans
    per-target estimation out to threads for models that allow it; results
    are identical to the serial run.
    """
    config = config or EstimatorConfig()
    _check_output(spec, model)
    names = list(dict.fromkeys(targets))  # one entry per target, order kept
    sets = {name: resolve_target(space, tree, name) for name in names}
    out_value = float(_context_outputs(model, space, context)[spec.index])

    def one(name: str) -> tuple[str, CiuResult, str | None]:
        est = estimate_extrema_multi(
            model, space, context, sets[name], config, [spec.index]
        )[spec.index]
        est = _merge_context_value(est, out_value, context)
        ci, strayed = contextual_importance(est, spec)
        cu, degenerate = contextual_utility(out_value, est)
        result = CiuResult(
            output_index=spec.index,
            feature_set=sets[name],
            ci=ci,
            cu=cu,
            cmin=est.cmin,
            cmax=est.cmax,
            out_value=out_value,
            degenerate=degenerate,
            ci_clamped=strayed,
        )
        note = _stray_warning(name, est, spec) if strayed else None
        return name, result, note

    if jobs > 1 and model.parallel_safe and len(names) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, names))
    else:
        rows = [one(name) for name in names]

    entries = sorted(((n, r) for n, r, _ in rows), key=lambda e: (-e[1].ci, e[0]))
    warnings = tuple(note for _, _, note in rows if note)
    return CiuReport(
        context=context,
        output=spec,
        entries=tuple(entries),
        config=config,
        fingerprint=model.fingerprint,
        warnings=warnings,
    )


def contrast(
    model: Predictor,
    space: FeatureSpace,
    context: Context,
    spec_a: OutputSpec,
    spec_b: OutputSpec,
    targets: Sequence[str],
    tree: ConceptTree | None = None,
    config: EstimatorConfig | None = None,
    *,
    jobs: int = 1,
) -> ContrastReport:
    """Compare two outputs on identical evidence.

    Probes are generated once per target and reused for both outputs, so
    the per-target utility delta is a like-for-like comparison. Entries are
    ranked by absolute delta, descending, ties by target name.
    """
    config = config or EstimatorConfig()
    if spec_a.index == spec_b.index:
        raise ValidationError("contrast needs two different outputs")
    _check_output(spec_a, model)
    _check_output(spec_b, model)
    names = list(dict.fromkeys(targets))
    sets = {name: resolve_target(space, tree, name) for name in names}
    ctx_out = _context_outputs(model, space, context)
    out_a = float(ctx_out[spec_a.index])
    out_b = float(ctx_out[spec_b.index])

    warnings: list[str] = []

    def one(name: str) -> tuple[ContrastEntry, list[str]]:
        ests = estimate_extrema_multi(
            model, space, context, sets[name], config, [spec_a.index, spec_b.index]
        )
        est_a = _merge_context_value(ests[spec_a.index], out_a, context)
        est_b = _merge_context_value(ests[spec_b.index], out_b, context)
        ci_a, stray_a = contextual_importance(est_a, spec_a)
        ci_b, stray_b = contextual_importance(est_b, spec_b)
        cu_a, _ = contextual_utility(out_a, est_a)
        cu_b, _ = contextual_utility(out_b, est_b)
        notes = []
        if stray_a:
            notes.append(_stray_warning(name, est_a, spec_a))
        if stray_b:
            notes.append(_stray_warning(name, est_b, spec_b))
        entry = ContrastEntry(
            target=name, feature_set=sets[name],
            ci_a=ci_a, cu_a=cu_a, ci_b=ci_b, cu_b=cu_b,
        )
        return entry, notes

    if jobs > 1 and model.parallel_safe and len(names) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, names))
    else:
        rows = [one(name) for name in names]
    for _, notes in rows:
        warnings.extend(notes)
    entries = sorted(
        (e for e, _ in rows), key=lambda e: (-abs(e.cu_delta), e.target)
    )
    return ContrastReport(
        context=context,
        output_a=spec_a,
        output_b=spec_b,
        entries=tuple(entries),
        config=config,
        fingerprint=model.fingerprint,
        warnings=tuple(warnings),
    )


def permutation_importance(
    model: Predictor,
    space: FeatureSpace,
    contexts: Sequence[Context],
    spec: OutputSpec,
    config: EstimatorConfig | None = None,
) -> list[float]:
    """Permutation-importance baseline over a set of reference contexts.

    Each feature's score is the mean absolute change of the output when
    that feature's column is shuffled across the contexts (one seeded
    permutation per feature). Scores are normalized to sum to 1 unless all
    of them are zero. Importance-only by construction: it carries none of
    the utility information a contextual report has.
    """
    config = config or EstimatorConfig()
    if len(contexts) < 2:
        raise ValidationError(
            f"permutation importance needs at least 2 reference contexts, got {len(contexts)}"
        )
    _check_output(spec, model)
    X = np.stack([c.as_array() for c in contexts])
    if X.shape[1] != len(space):
        raise ValidationError("context length does not match the feature space")
    base = predict_batch(model, X)[:, spec.index]
    rng = np.random.default_rng(config.seed)
    scores = []
    for i in range(len(space)):
        perm = rng.permutation(X.shape[0])
        Xp = X.copy()
        Xp[:, i] = X[perm, i]
        shuffled = predict_batch(model, Xp)[:, spec.index]
        scores.append(float(np.mean(np.abs(shuffled - base))))
    total = sum(scores)
    if total > 0.0:
        scores = [s / total for s in scores]
    return scores


# ---------------------------------------------------------------------------
# Canonical serialization
# ---------------------------------------------------------------------------
# Fixed key order, floats rendered %.9g, integers exact. The same bytes come
# out for the same report no matter the process, which is what makes seeded
# CLI runs byte-for-byte reproducible, and %.9g survives a parse/reserialize
# round trip unchanged.


def _canon(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not np.isfinite(v):
            raise InternalError("cannot serialize a non-finite number")
        return format(v, ".9g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(
            json.dumps(str(k)) + ":" + _canon(v) for k, v in value.items()
        ) + "}"
    raise InternalError(f"cannot canonically serialize {type(value).__name__}")


def canonical_json(value: object) -> str:
    """Deterministic JSON with %.9g floats; insertion order is kept."""
    return _canon(value)


def _context_block(context: Context, space: FeatureSpace) -> dict:
    return {"features": list(space.names), "values": list(context.values)}


def _output_block(spec: OutputSpec) -> dict:
    return {
        "name": spec.label,
        "index": spec.index,
        "absmin": spec.absmin,
        "absmax": spec.absmax,
    }


def _config_block(config: EstimatorConfig) -> dict:
    return {
        "strategy": config.strategy,
        "grid_levels": config.grid_levels,
        "mc_samples": config.mc_samples,
        "seed": config.seed,
        "refinement": config.refinement,
        "probe_cap": config.probe_cap,
    }


def report_to_json(report: CiuReport, space: FeatureSpace) -> str:
    entries = [
        {
            "target": name,
            "ci": r.ci,
            "cu": r.cu,
            "cmin": r.cmin,
            "cmax": r.cmax,
            "out_value": r.out_value,
            "degenerate": r.degenerate,
        }
        for name, r in report.entries
    ]
    doc = {
        "context": _context_block(report.context, space),
        "output": _output_block(report.output),
        "entries": entries,
        "config": _config_block(report.config),
        "fingerprint": report.fingerprint,
    }
    return canonical_json(doc)


def contrast_to_json(report: ContrastReport, space: FeatureSpace) -> str:
    entries = [
        {
            "target": e.target,
            "ci_a": e.ci_a,
            "cu_a": e.cu_a,
            "ci_b": e.ci_b,
            "cu_b": e.cu_b,
            "cu_delta": e.cu_delta,
        }
        for e in report.entries
    ]
    doc = {
        "context": _context_block(report.context, space),
        "output_a": _output_block(report.output_a),
        "output_b": _output_block(report.output_b),
        "entries": entries,
        "config": _config_block(report.config),
        "fingerprint": report.fingerprint,
    }
    return canonical_json(doc)
