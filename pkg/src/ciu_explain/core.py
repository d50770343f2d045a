"""Domain types: feature spaces, contexts, output ranges, concept trees.

Everything here is immutable after construction and safe to share across
threads. Validation happens at construction time, so any instance that
exists is internally consistent.

Categorical features are encoded by declaration position (0, 1, ..., n-1).
The code, not the level text, is what goes into input vectors, so external
model adapters see stable values regardless of how levels are spelled.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import InternalError, ValidationError

CONTINUOUS = "continuous"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureDescriptor:
    """One input feature: a bounded continuous value or a fixed level set."""

    name: str
    kind: str
    lower: float = 0.0
    upper: float = 1.0
    levels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.name, str) or not self.name:
            raise ValidationError("feature name must be a non-empty string")
        if self.kind == CONTINUOUS:
            lo, hi = float(self.lower), float(self.upper)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValidationError(
                    f"feature {self.name!r}: bounds must be finite, got [{lo}, {hi}]"
                )
            if not lo < hi:
                raise ValidationError(
                    f"feature {self.name!r}: lower bound must be strictly below "
                    f"upper bound, got [{lo}, {hi}]"
                )
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        elif self.kind == CATEGORICAL:
            levels = tuple(self.levels)
            if len(levels) < 2:
                raise ValidationError(
                    f"feature {self.name!r}: categorical features need at least "
                    f"2 levels, got {len(levels)}"
                )
            if len(set(levels)) != len(levels):
                raise ValidationError(
                    f"feature {self.name!r}: duplicate categorical levels"
                )
            if not all(isinstance(lv, str) and lv for lv in levels):
                raise ValidationError(
                    f"feature {self.name!r}: levels must be non-empty strings"
                )
            object.__setattr__(self, "levels", levels)
        else:
            raise ValidationError(
                f"feature {self.name!r}: unknown kind {self.kind!r} "
                f"(expected {CONTINUOUS!r} or {CATEGORICAL!r})"
            )

    @classmethod
    def continuous(cls, name: str, lower: float, upper: float) -> FeatureDescriptor:
        return cls(name=name, kind=CONTINUOUS, lower=lower, upper=upper)

    @classmethod
    def categorical(cls, name: str, levels: Iterable[str]) -> FeatureDescriptor:
        return cls(name=name, kind=CATEGORICAL, levels=tuple(levels))

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    @property
    def n_levels(self) -> int:
        if not self.is_categorical:
            raise InternalError(f"feature {self.name!r} has no levels")
        return len(self.levels)

    def code_of(self, level: str) -> int:
        """Integer code of a level, by declaration order."""
        try:
            return self.levels.index(level)
        except ValueError:
            raise ValidationError(
                f"feature {self.name!r}: unknown level {level!r} "
                f"(expected one of {list(self.levels)})"
            ) from None

    def level_of(self, code: int) -> str:
        if not 0 <= code < len(self.levels):
            raise ValidationError(
                f"feature {self.name!r}: level code {code} out of range "
                f"0..{len(self.levels) - 1}"
            )
        return self.levels[code]


@dataclass(frozen=True)
class FeatureSpace:
    """Ordered feature declarations; order defines input-vector position."""

    features: tuple[FeatureDescriptor, ...]

    def __post_init__(self) -> None:
        feats = tuple(self.features)
        if not feats:
            raise ValidationError("a feature space needs at least one feature")
        names = [f.name for f in feats]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise ValidationError(f"duplicate feature name {dup!r}")
        object.__setattr__(self, "features", feats)

    def __len__(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise ValidationError(f"unknown feature {name!r}")

    def __getitem__(self, index: int) -> FeatureDescriptor:
        return self.features[index]


@dataclass(frozen=True)
class Context:
    """One concrete input instance; categorical components hold level codes."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.values)


def _coerce_continuous(feat: FeatureDescriptor, raw: object) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float, str, np.floating, np.integer)):
        raise ValidationError(
            f"feature {feat.name!r}: expected a number, got {raw!r}"
        )
    try:
        value = float(raw)
    except ValueError:
        raise ValidationError(
            f"feature {feat.name!r}: cannot parse {raw!r} as a number"
        ) from None
    if not math.isfinite(value):
        raise ValidationError(f"feature {feat.name!r}: value must be finite")
    if not feat.lower <= value <= feat.upper:
        raise ValidationError(
            f"feature {feat.name!r}: value {value:g} outside range "
            f"[{feat.lower:g}, {feat.upper:g}]"
        )
    return value


def _coerce_categorical(feat: FeatureDescriptor, raw: object) -> float:
    if isinstance(raw, str):
        return float(feat.code_of(raw))
    if isinstance(raw, bool) or not isinstance(raw, (int, float, np.floating, np.integer)):
        raise ValidationError(
            f"feature {feat.name!r}: expected a level name or code, got {raw!r}"
        )
    code = float(raw)
    if not math.isfinite(code) or code != int(code):
        raise ValidationError(
            f"feature {feat.name!r}: {raw!r} is not a valid level code"
        )
    if not 0 <= int(code) < feat.n_levels:
        raise ValidationError(
            f"feature {feat.name!r}: level code {int(code)} out of range "
            f"0..{feat.n_levels - 1}"
        )
    return code


def validate_context(space: FeatureSpace, raw: Sequence[object]) -> Context:
    """Check one raw value per feature and return a canonical Context.

    Continuous components accept numbers (or numeric strings) inside the
    declared range, bounds included. Categorical components accept a level
    name or an integral level code. The first violating component is the
    one reported.
    """
    raw = list(raw)
    if len(raw) != len(space):
        raise ValidationError(
            f"context has {len(raw)} values but the feature space declares "
            f"{len(space)} features"
        )
    values = []
    for feat, item in zip(space.features, raw):
        if feat.is_categorical:
            values.append(_coerce_categorical(feat, item))
        else:
            values.append(_coerce_continuous(feat, item))
    return Context(tuple(values))


def format_value(feat: FeatureDescriptor, value: float) -> str:
    """Render one context component for humans (level name or %g number)."""
    if feat.is_categorical:
        return feat.level_of(int(value))
    return format(value, "g")


@dataclass(frozen=True)
class OutputSpec:
    """One model output plus its declared absolute extrema.

    ``absmin``/``absmax`` normalize contextual importance. They may be read
    as theoretical output bounds or as empirical extrema over the whole
    input space; either reading works, they are user-supplied either way.
    """

    index: int
    absmin: float = 0.0
    absmax: float = 1.0
    name: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.index, int) or self.index < 0:
            raise ValidationError(f"output index must be a non-negative int, got {self.index!r}")
        lo, hi = float(self.absmin), float(self.absmax)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValidationError(f"output {self.label!r}: absolute bounds must be finite")
        if not lo < hi:
            raise ValidationError(
                f"output {self.label!r}: absmin must be strictly below absmax, "
                f"got [{lo}, {hi}]"
            )
        object.__setattr__(self, "absmin", lo)
        object.__setattr__(self, "absmax", hi)

    @property
    def label(self) -> str:
        return self.name or f"out{self.index}"

    @classmethod
    def classifier(cls, index: int, name: str = "") -> OutputSpec:
        """Convenience for classification-style outputs bounded by [0, 1]."""
        return cls(index=index, absmin=0.0, absmax=1.0, name=name)


class ConceptTree:
    """Named groupings of features, possibly nested, forming intermediate
    concepts that can be explained as single units.

    Each concept maps either to a set of feature indices or to a set of
    child concept names. Overlap is allowed: one feature may appear under
    several concepts. Cycles and dangling references are rejected here, so
    resolution can never fail on an accepted tree.
    """

    def __init__(self, concepts: Mapping[str, Iterable[int] | Iterable[str]], n_features: int):
        if not isinstance(n_features, int) or n_features < 1:
            raise ValidationError("n_features must be a positive int")
        members: dict[str, frozenset[int] | tuple[str, ...]] = {}
        for name, body in concepts.items():
            if not isinstance(name, str) or not name:
                raise ValidationError("concept names must be non-empty strings")
            items = list(body)
            if not items:
                raise ValidationError(f"concept {name!r} is empty")
            if all(isinstance(x, str) for x in items):
                members[name] = tuple(dict.fromkeys(items))  # dedupe, keep order
            elif all(isinstance(x, int) and not isinstance(x, bool) for x in items):
                leaves = frozenset(items)
                bad = [i for i in leaves if not 0 <= i < n_features]
                if bad:
                    raise ValidationError(
                        f"concept {name!r}: feature index {min(bad)} out of range "
                        f"0..{n_features - 1}"
                    )
                members[name] = leaves
            else:
                raise ValidationError(
                    f"concept {name!r}: members must be all feature indices or "
                    f"all child concept names, not a mix"
                )
        for name, body in members.items():
            if isinstance(body, tuple):
                for child in body:
                    if child not in members:
                        raise ValidationError(
                            f"concept {name!r} references unknown concept {child!r}"
                        )
        self._members = members
        self._n_features = n_features
        self._resolved: dict[str, frozenset[int]] = {}
        for name in members:
            self._resolve_checked(name, stack=[])
        referenced = {c for body in members.values() if isinstance(body, tuple) for c in body}
        self._roots = tuple(n for n in members if n not in referenced)

    def _resolve_checked(self, name: str, stack: list[str]) -> frozenset[int]:
        if name in self._resolved:
            return self._resolved[name]
        if name in stack:
            cycle = stack[stack.index(name):] + [name]
            raise ValidationError("concept cycle detected: " + " -> ".join(cycle))
        body = self._members[name]
        if isinstance(body, frozenset):
            resolved = body
        else:
            stack.append(name)
            acc: set[int] = set()
            for child in body:
                acc |= self._resolve_checked(child, stack)
            stack.pop()
            resolved = frozenset(acc)
        if not resolved:
            raise InternalError(f"concept {name!r} resolved to an empty set")
        self._resolved[name] = resolved
        return resolved

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._members)

    @property
    def roots(self) -> tuple[str, ...]:
        return self._roots

    def __contains__(self, name: str) -> bool:
        return name in self._members

    def resolve(self, name: str) -> frozenset[int]:
        """Union of all leaf feature indices reachable from ``name``."""
        try:
            return self._resolved[name]
        except KeyError:
            raise ValidationError(f"unknown concept {name!r}") from None


def resolve_concept(tree: ConceptTree, name: str) -> frozenset[int]:
    """Functional alias for :meth:`ConceptTree.resolve`."""
    return tree.resolve(name)


@dataclass(frozen=True)
class CiuResult:
    """Importance and utility of one feature set for one output, in context.

    ``ci`` is the share of the output's absolute range that the feature set
    can sweep while everything else stays clamped at the context. ``cu`` is
    where the context's actual output sits inside that swept interval
    (0 = worst achievable here, 1 = best). ``degenerate`` marks sets whose
    variation does not move the output at all, in which case ``cu`` is the
    neutral 0.5 by convention.
    """

    output_index: int
    feature_set: frozenset[int]
    ci: float
    cu: float
    cmin: float
    cmax: float
    out_value: float
    degenerate: bool
    ci_clamped: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "feature_set", frozenset(self.feature_set))
        if not 0.0 <= self.ci <= 1.0:
            raise InternalError(f"CI {self.ci} outside [0, 1]")
        if not 0.0 <= self.cu <= 1.0:
            raise InternalError(f"CU {self.cu} outside [0, 1]")
        if not self.cmin <= self.out_value <= self.cmax:
            raise InternalError(
                f"context output {self.out_value} outside contextual extrema "
                f"[{self.cmin}, {self.cmax}]"
            )
