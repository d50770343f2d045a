"""Scenario files: one TOML document describing everything but the question.

A scenario bundles the feature space, optional concepts, the model
reference, the explainable outputs, and defaults for estimation and
wording. The full grammar, all sections and keys, is documented in the
package README; the short version:

    [scenario]      name, description
    [[feature]]     name, kind = "continuous" (range = [lo, hi])
                          | kind = "categorical" (levels = [...])
    [concepts]      concept_name = [feature names] or [child concept names]
    [model]         kind = "linear" | "table" | "builtin" | "external"
    [[output]]      name, absmin, absmax (defaults 0 and 1)
    [estimator]     strategy, grid_levels, mc_samples, seed, refinement
    [labels]        importance / utility band arrays [[threshold, label], ...]
    [templates]     explanation / contrast sentence overrides

Bundled demo scenarios ship inside the package and can be referenced by
bare name wherever a scenario path is accepted.
"""

from __future__ import annotations

import sys
from collections.abc import Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import ConceptTree, FeatureDescriptor, FeatureSpace, OutputSpec
from .errors import ValidationError
from .estimator import EstimatorConfig
from .models import Predictor, load_model
from .narrative import LabelScale
from .errors import CiuError

_STRATEGY_ALIASES = {"mc": "montecarlo", "montecarlo": "montecarlo", "grid": "grid"}


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    space: FeatureSpace
    tree: ConceptTree | None
    model_desc: Mapping
    outputs: tuple[OutputSpec, ...]
    config: EstimatorConfig
    scale: LabelScale
    templates: Mapping[str, str] = field(default_factory=dict)

    def output_by_name(self, name: str) -> OutputSpec:
        for spec in self.outputs:
            if spec.name == name:
                return spec
        raise ValidationError(
            f"unknown output {name!r} (declared: {[o.name for o in self.outputs]})"
        )

    @property
    def default_targets(self) -> tuple[str, ...]:
        concepts = self.tree.names if self.tree is not None else ()
        return self.space.names + tuple(concepts)


def _require(table: Mapping, key: str, where: str):
    if key not in table:
        raise ValidationError(f"scenario {where}: missing required key {key!r}")
    return table[key]


def _parse_features(doc: Mapping) -> FeatureSpace:
    raw = doc.get("feature")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("scenario needs at least one [[feature]] section")
    feats = []
    for i, item in enumerate(raw):
        where = f"[[feature]] #{i + 1}"
        name = _require(item, "name", where)
        kind = _require(item, "kind", where)
        if kind == "continuous":
            rng = _require(item, "range", where)
            if not isinstance(rng, list) or len(rng) != 2:
                raise ValidationError(f"scenario {where}: range must be [lower, upper]")
            feats.append(FeatureDescriptor.continuous(name, rng[0], rng[1]))
        elif kind == "categorical":
            levels = _require(item, "levels", where)
            feats.append(FeatureDescriptor.categorical(name, levels))
        else:
            raise ValidationError(f"scenario {where}: unknown kind {kind!r}")
    return FeatureSpace(tuple(feats))


def _parse_concepts(doc: Mapping, space: FeatureSpace) -> ConceptTree | None:
    raw = doc.get("concepts")
    if raw is None:
        return None
    if not isinstance(raw, Mapping) or not raw:
        raise ValidationError("[concepts] must be a non-empty table of name = [members]")
    feature_names = set(space.names)
    collisions = feature_names & set(raw)
    if collisions:
        raise ValidationError(
            f"concept name {sorted(collisions)[0]!r} collides with a feature name"
        )
    concepts: dict[str, list] = {}
    for name, members in raw.items():
        if not isinstance(members, list) or not members:
            raise ValidationError(f"concept {name!r} must list at least one member")
        if all(isinstance(m, str) and m in feature_names for m in members):
            concepts[name] = [space.index_of(m) for m in members]
        elif all(isinstance(m, str) and m in raw for m in members):
            concepts[name] = list(members)
        else:
            bad = next(
                m for m in members
                if not isinstance(m, str) or (m not in feature_names and m not in raw)
            )
            raise ValidationError(
                f"concept {name!r}: member {bad!r} is neither a feature nor a "
                f"concept (members must be all features or all concepts)"
            )
    return ConceptTree(concepts, n_features=len(space))


def _parse_outputs(doc: Mapping) -> tuple[OutputSpec, ...]:
    raw = doc.get("output")
    if not isinstance(raw, list) or not raw:
        raise ValidationError("scenario needs at least one [[output]] section")
    specs = []
    names = set()
    for i, item in enumerate(raw):
        name = _require(item, "name", f"[[output]] #{i + 1}")
        if name in names:
            raise ValidationError(f"duplicate output name {name!r}")
        names.add(name)
        specs.append(
            OutputSpec(
                index=i,
                absmin=item.get("absmin", 0.0),
                absmax=item.get("absmax", 1.0),
                name=name,
            )
        )
    return tuple(specs)


def _parse_estimator(doc: Mapping) -> EstimatorConfig:
    raw = doc.get("estimator", {})
    if not isinstance(raw, Mapping):
        raise ValidationError("[estimator] must be a table")
    defaults = EstimatorConfig()
    strategy = raw.get("strategy", defaults.strategy)
    if strategy not in _STRATEGY_ALIASES:
        raise ValidationError(
            f"[estimator] strategy {strategy!r} unknown (grid, montecarlo or mc)"
        )
    return EstimatorConfig(
        strategy=_STRATEGY_ALIASES[strategy],
        grid_levels=raw.get("grid_levels", defaults.grid_levels),
        mc_samples=raw.get("mc_samples", defaults.mc_samples),
        seed=raw.get("seed", defaults.seed),
        refinement=raw.get("refinement", defaults.refinement),
        probe_cap=raw.get("probe_cap", defaults.probe_cap),
    )


def _parse_bands(raw: list, which: str) -> tuple[tuple[float, str], ...]:
    bands = []
    for item in raw:
        if not isinstance(item, list) or len(item) != 2:
            raise ValidationError(
                f"[labels] {which}: each band must be [threshold, label]"
            )
        bands.append((item[0], item[1]))
    return tuple(bands)


def _parse_scale(doc: Mapping) -> LabelScale:
    raw = doc.get("labels")
    if raw is None:
        return LabelScale()
    defaults = LabelScale()
    return LabelScale(
        importance=_parse_bands(raw["importance"], "importance")
        if "importance" in raw else defaults.importance,
        utility=_parse_bands(raw["utility"], "utility")
        if "utility" in raw else defaults.utility,
    )


def _parse_templates(doc: Mapping) -> dict[str, str]:
    raw = doc.get("templates", {})
    if not isinstance(raw, Mapping):
        raise ValidationError("[templates] must be a table")
    out = {}
    for key in ("explanation", "contrast"):
        if key in raw:
            if not isinstance(raw[key], str):
                raise ValidationError(f"[templates] {key} must be a string")
            out[key] = raw[key]
    return out


def parse_scenario(text: str, name_hint: str = "") -> Scenario:
    """Parse and statically validate a scenario document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"scenario does not parse: {exc}") from exc
    meta = doc.get("scenario", {})
    space = _parse_features(doc)
    tree = _parse_concepts(doc, space)
    model_desc = doc.get("model")
    if not isinstance(model_desc, Mapping):
        raise ValidationError("scenario needs a [model] section")
    kind = model_desc.get("kind")
    if kind == "external":
        command = model_desc.get("command")
        if not isinstance(command, list) or not command or not all(
            isinstance(c, str) and c for c in command
        ):
            raise ValidationError(
                "external model needs a non-empty 'command' list of strings"
            )
    outputs = _parse_outputs(doc)
    return Scenario(
        name=meta.get("name", name_hint or "unnamed"),
        description=meta.get("description", ""),
        space=space,
        tree=tree,
        model_desc=model_desc,
        outputs=outputs,
        config=_parse_estimator(doc),
        scale=_parse_scale(doc),
        templates=_parse_templates(doc),
    )


def bundled_scenario_names() -> list[str]:
    root = resources.files("ciu_explain") / "scenarios"
    return sorted(p.name[: -len(".toml")] for p in root.iterdir() if p.name.endswith(".toml"))


def load_scenario(ref: str | Path) -> Scenario:
    """Load a scenario from a file path or a bundled demo name."""
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"), name_hint=path.stem)
    if isinstance(ref, str) and "/" not in ref and "\\" not in ref:
        candidate = resources.files("ciu_explain") / "scenarios" / f"{ref}.toml"
        if candidate.is_file():
            return parse_scenario(candidate.read_text(encoding="utf-8"), name_hint=ref)
    raise ValidationError(
        f"scenario {str(ref)!r} is neither a readable file nor a bundled name "
        f"(bundled: {bundled_scenario_names()})"
    )


def build_model(scenario: Scenario, *, timeout: float | None = None) -> Predictor:
    """Construct the scenario's predictor and check declared arities."""
    model = load_model(scenario.model_desc, scenario.space, timeout=timeout)
    try:
        if len(scenario.outputs) > model.n_outputs:
            raise ValidationError(
                f"scenario declares {len(scenario.outputs)} outputs but the model "
                f"exposes only {model.n_outputs}"
            )
    except CiuError:
        closer = getattr(model, "close", None)
        if callable(closer):
            closer()
        raise
    return model
