"""Acceptance suite: one test per release criterion, each at its stated
tolerance, each printing a PASS/FAIL line (run with -s to see them inline).

Every expected value is either computed by an independent oracle inside the
test (dense-grid brute force, exhaustive enumeration, direct simulation) or
follows from closed forms checked against such an oracle here.
"""

import json
import subprocess
import sys
from contextlib import contextmanager

import numpy as np

from ciu_explain import (
    CallableModel,
    ConceptTree,
    Context,
    EstimatorConfig,
    FeatureDescriptor,
    FeatureSpace,
    LinearModel,
    OutputSpec,
    TableModel,
    explain,
    permutation_importance,
    predict_batch,
    refinement_rounds,
    validate_context,
)

from test_estimator import dense_grid_extrema

TOL = 1e-9


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL  {name}")
        raise
    print(f"PASS  {name}")


def unit_square():
    return FeatureSpace((
        FeatureDescriptor.continuous("x1", 0.0, 1.0),
        FeatureDescriptor.continuous("x2", 0.0, 1.0),
    ))


def test_closed_form_linear_check():
    """CI/CU closed forms on the equal-weight linear model, 1e-9."""
    with criterion("closed-form linear CI/CU vs dense-grid oracle"):
        space = unit_square()
        model = LinearModel([[0.5, 0.5]])
        spec = OutputSpec(index=0, absmin=0.0, absmax=1.0, name="y")
        context = Context((0.3, 0.6))
        tree = ConceptTree({"both": [0, 1]}, n_features=2)
        report = explain(model, space, context, spec, ["x1", "x2", "both"],
                         tree=tree, config=EstimatorConfig(grid_levels=21))

        want = {"x1": (0.5, 0.3), "x2": (0.5, 0.6), "both": (1.0, 0.45)}
        for name, (want_ci, want_cu) in want.items():
            r = report.get(name)
            assert abs(r.ci - want_ci) <= TOL, (name, r.ci)
            assert abs(r.cu - want_cu) <= TOL, (name, r.cu)

        # independent oracle: 10^4-point dense grid per varied set
        sets = {"x1": [0], "x2": [1], "both": [0, 1]}
        out_ctx = predict_batch(model, context.as_array()[None, :])[0, 0]
        for name, indices in sets.items():
            points = 10_000 if len(indices) == 1 else 100  # 100^2 = 10^4 points
            lo, hi = dense_grid_extrema(model, space, context, indices, points)
            r = report.get(name)
            assert abs(r.cmin - lo) <= TOL and abs(r.cmax - hi) <= TOL
            assert abs(r.ci - (hi - lo) / 1.0) <= TOL
            assert abs(r.cu - (out_ctx - lo) / (hi - lo)) <= TOL


def test_ci_additivity():
    """CI(S∪T) = CI(S) + CI(T) for disjoint sets, 100 seeded linear models."""
    with criterion("CI additivity over disjoint feature sets (100 models, 1e-9)"):
        rng = np.random.default_rng(20_240_001)
        for _ in range(100):
            n = int(rng.integers(2, 5))
            space = FeatureSpace(tuple(
                FeatureDescriptor.continuous(
                    f"f{i}",
                    float(lo := rng.uniform(-2, 1)),
                    float(lo + rng.uniform(0.25, 2.0)),
                )
                for i in range(n)
            ))
            model = LinearModel(rng.normal(size=(1, n)), rng.normal(size=1))
            span = sum(
                abs(model.weights[0, i]) * (space[i].upper - space[i].lower)
                for i in range(n)
            ) + abs(float(model.bias[0]))
            spec = OutputSpec(index=0, absmin=-span - 1.0, absmax=span + 1.0)
            context = Context(tuple(
                float(rng.uniform(space[i].lower, space[i].upper)) for i in range(n)
            ))
            split = int(rng.integers(1, n))
            members = list(rng.permutation(n))
            tree = ConceptTree(
                {"S": [int(i) for i in members[:split]],
                 "T": [int(i) for i in members[split:]],
                 "U": list(range(n))},
                n_features=n,
            )
            report = explain(model, space, context, spec, ["S", "T", "U"],
                             tree=tree, config=EstimatorConfig(grid_levels=2))
            gap = abs(report.get("U").ci - report.get("S").ci - report.get("T").ci)
            assert gap <= TOL, gap


def test_cu_position_law():
    """CU equals the normalized feature position for monotone-increasing
    single-feature cases with the context on a grid point, 100 seeds."""
    with criterion("CU position law (100 monotone cases, 1e-9)"):
        rng = np.random.default_rng(20_240_002)
        for _ in range(100):
            n = int(rng.integers(1, 4))
            vary = int(rng.integers(0, n))
            bounds = []
            for i in range(n):
                lo = float(rng.uniform(-5, 5))
                bounds.append((lo, lo + float(rng.uniform(0.5, 4.0))))
            space = FeatureSpace(tuple(
                FeatureDescriptor.continuous(f"f{i}", lo, hi)
                for i, (lo, hi) in enumerate(bounds)
            ))
            weights = rng.normal(size=(1, n))
            weights[0, vary] = rng.uniform(0.1, 2.0)  # monotone increasing in vary
            model = LinearModel(weights, rng.normal(size=1))
            levels = int(rng.integers(2, 12))
            k = int(rng.integers(0, levels))
            grid = np.linspace(bounds[vary][0], bounds[vary][1], levels)
            values = [float(rng.uniform(lo, hi)) for lo, hi in bounds]
            values[vary] = float(grid[k])
            span = sum(abs(weights[0, i]) * (hi - lo) for i, (lo, hi) in enumerate(bounds))
            limit = span + abs(float(model.bias[0])) + sum(
                abs(w) * max(abs(lo), abs(hi))
                for w, (lo, hi) in zip(weights[0], bounds)
            )
            spec = OutputSpec(index=0, absmin=-limit - 1.0, absmax=limit + 1.0)
            report = explain(model, space, Context(tuple(values)), spec,
                             [f"f{vary}"], config=EstimatorConfig(grid_levels=levels))
            lo, hi = bounds[vary]
            position = (values[vary] - lo) / (hi - lo)
            assert abs(report.get(f"f{vary}").cu - position) <= TOL


def test_bounds_and_degeneracy_fuzz():
    """1000 seeded random cases: CI, CU always in [0,1]; constants always
    come out degenerate with CI=0, CU=0.5."""
    with criterion("bounds and degeneracy fuzz (1000 cases, grid + montecarlo)"):
        rng = np.random.default_rng(20_240_003)
        for case in range(1000):
            n = int(rng.integers(1, 4))
            feats = []
            for i in range(n):
                if rng.uniform() < 0.3:
                    n_levels = int(rng.integers(2, 5))
                    feats.append(FeatureDescriptor.categorical(
                        f"f{i}", [f"v{j}" for j in range(n_levels)]))
                else:
                    lo = float(rng.uniform(-3, 3))
                    feats.append(FeatureDescriptor.continuous(
                        f"f{i}", lo, lo + float(rng.uniform(0.5, 3.0))))
            space = FeatureSpace(tuple(feats))
            constant = case % 5 == 0
            weights = np.zeros((1, n)) if constant else rng.normal(size=(1, n))
            model = LinearModel(weights, rng.normal(size=1))
            raw = []
            for f in feats:
                if f.is_categorical:
                    raw.append(int(rng.integers(0, f.n_levels)))
                else:
                    raw.append(float(rng.uniform(f.lower, f.upper)))
            context = validate_context(space, raw)
            size = int(rng.integers(1, n + 1))
            target_indices = [int(i) for i in rng.choice(n, size=size, replace=False)]
            tree = ConceptTree({"t": target_indices}, n_features=n)
            target = "t" if len(target_indices) > 1 else feats[target_indices[0]].name
            cfg = EstimatorConfig(
                strategy="grid" if case % 2 == 0 else "montecarlo",
                grid_levels=3, mc_samples=25, seed=int(rng.integers(0, 2**32)),
            )
            spec = OutputSpec(index=0, absmin=-1.0, absmax=1.0)
            report = explain(model, space, context, spec, [target],
                             tree=tree, config=cfg)
            r = report.get(target)
            assert 0.0 <= r.ci <= 1.0 and 0.0 <= r.cu <= 1.0
            if constant:
                assert r.ci == 0.0 and r.cu == 0.5 and r.degenerate


def test_nonlinear_utility_reproduction():
    """Interior-ideal utility: both extremes rate equally low, the ideal
    rates exactly 1."""
    with criterion("non-linear utility (tent model, interior peak)"):
        space = FeatureSpace((FeatureDescriptor.continuous("x1", 0.0, 1.0),))
        model = CallableModel(lambda X: 1.0 - 2.0 * np.abs(X[:, :1] - 0.5), 1, 1,
                              name="tent-acceptance")
        spec = OutputSpec(index=0, absmin=0.0, absmax=1.0, name="y")
        levels = 21
        grid_tol = 1.0 / (levels - 1)
        cu = {}
        for x in (0.1, 0.5, 0.9):
            report = explain(model, space, Context((x,)), spec, ["x1"],
                             config=EstimatorConfig(grid_levels=levels))
            cu[x] = report.get("x1").cu
        assert abs(cu[0.1] - cu[0.9]) <= grid_tol
        assert cu[0.5] == 1.0
        assert cu[0.1] < cu[0.5] and cu[0.9] < cu[0.5]


def test_refinement_monotonicity():
    """cmax strictly improves once the first refinement reaches the interior
    peak, and never backslides afterward."""
    with criterion("grid refinement monotonicity (tent model)"):
        space = FeatureSpace((FeatureDescriptor.continuous("x1", 0.0, 1.0),))
        model = CallableModel(lambda X: 1.0 - np.abs(X[:, :1] - 0.5), 1, 1,
                              name="tent-refine")
        cfg = EstimatorConfig(grid_levels=2, refinement=3)
        rounds = refinement_rounds(model, space, Context((0.0,)), {0}, cfg, 0)
        assert rounds[1].cmax > rounds[0].cmax
        for earlier, later in zip(rounds[1:], rounds[2:]):
            assert later.cmax >= earlier.cmax
            assert later.cmin <= earlier.cmin


def test_baseline_agreement():
    """Equal-range linear models: CI ranking equals |w| ranking exactly and
    the permutation baseline agrees given 200+ contexts."""
    with criterion("CI ranking vs |w| and permutation baseline (200 contexts)"):
        rng = np.random.default_rng(20_240_004)
        for _ in range(10):
            n = 4
            space = FeatureSpace(tuple(
                FeatureDescriptor.continuous(f"f{i}", 0.0, 1.0) for i in range(n)
            ))
            magnitudes = rng.permutation([0.2, 0.5, 0.8, 1.1])
            signs = rng.choice([-1.0, 1.0], size=n)
            model = LinearModel([(magnitudes * signs).tolist()])
            spec = OutputSpec(index=0, absmin=-4.0, absmax=4.0)
            context = Context(tuple(rng.uniform(size=n)))
            report = explain(model, space, context, spec,
                             [f"f{i}" for i in range(n)],
                             config=EstimatorConfig(grid_levels=2))
            want_order = [f"f{i}" for i in np.argsort(-magnitudes, kind="stable")]
            assert [name for name, _ in report.entries] == want_order

            contexts = [Context(tuple(rng.uniform(size=n))) for _ in range(200)]
            scores = permutation_importance(model, space, contexts, spec,
                                            EstimatorConfig(seed=11))
            perm_order = [f"f{i}" for i in np.argsort(-np.asarray(scores), kind="stable")]
            assert perm_order == want_order


def test_cli_determinism():
    """Two identical seeded CLI runs on the bundled demo produce identical
    JSON bytes."""
    with criterion("CLI determinism (demo_deflategate, fixed seed, byte-equal)"):
        args = [
            sys.executable, "-m", "ciu_explain.cli", "explain", "demo_deflategate",
            "--context", "psi=10.5,size=0.5,grip=0.7", "--output", "throwability",
            "--strategy", "mc", "--mc-samples", "500", "--seed", "1234", "--json",
        ]
        first = subprocess.run(args, capture_output=True, text=True)
        second = subprocess.run(args, capture_output=True, text=True)
        assert first.returncode == second.returncode == 0
        assert first.stdout == second.stdout
        json.loads(first.stdout)  # and it parses


def test_exhaustive_categorical_oracle():
    """Engine results over a 3x4 categorical table equal exhaustive
    enumeration exactly (no tolerance)."""
    with criterion("exhaustive categorical oracle (3x4 table, exact)"):
        space = FeatureSpace((
            FeatureDescriptor.categorical("beverage", ["espresso", "latte", "tea"]),
            FeatureDescriptor.categorical("size", ["small", "medium", "large", "huge"]),
        ))
        rng = np.random.default_rng(20_240_005)
        rows = {
            (i, j): (float(rng.uniform()),)
            for i in range(3) for j in range(4)
        }
        model = TableModel(space, rows)
        spec = OutputSpec(index=0, absmin=0.0, absmax=1.0, name="score")
        tree = ConceptTree({"both": [0, 1]}, n_features=2)
        for ctx_key in [(0, 0), (1, 2), (2, 3)]:
            context = Context((float(ctx_key[0]), float(ctx_key[1])))
            report = explain(model, space, context, spec,
                             ["beverage", "size", "both"], tree=tree)
            out_ctx = rows[ctx_key][0]
            enumerations = {
                "beverage": [rows[(i, ctx_key[1])][0] for i in range(3)],
                "size": [rows[(ctx_key[0], j)][0] for j in range(4)],
                "both": [rows[(i, j)][0] for i in range(3) for j in range(4)],
            }
            for name, values in enumerations.items():
                cmin, cmax = min(values), max(values)
                r = report.get(name)
                assert r.cmin == cmin and r.cmax == cmax
                assert r.ci == (cmax - cmin) / 1.0
                assert r.cu == (out_ctx - cmin) / (cmax - cmin)
