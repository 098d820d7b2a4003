"""Coverage objective: mean nearest-site dissimilarity loss over targets and
the phantom-normalized utility maximized by the greedy solvers, plus the
builders wiring scenarios and distance matrices into deployment problems.

The utility of a selection is the drop in loss relative to the phantom-only
baseline. It is zero on the empty set, nondecreasing, and submodular for any
nonnegative matrix (symmetry and the triangle inequality are not required);
the verification suite checks rather than assumes this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySet, InvalidParams, PhantomInSelection
from .metrics import AugmentedMatrix, DistanceMatrix, apply_hotspot, augment_with_phantom
from .scenario import Scenario
from .submodular import (
    GreedyResult,
    PartitionConstraint,
    SetFunction,
    greedy_cardinality,
    greedy_partition,
)


def exemplar_loss(selection, m: AugmentedMatrix) -> float:
    """Mean over targets of the dissimilarity to the nearest selected site;
    the phantom index is a valid member of the selection."""
    sel = sorted(set(selection))
    if not sel:
        raise EmptySet("exemplar loss needs a nonempty selection")
    rows = np.stack([m.row(i) for i in sel])
    return float(rows.min(axis=0).mean())


def utility(selection, m: AugmentedMatrix) -> float:
    """Loss reduction of the selection relative to the phantom-only baseline."""
    sel = set(selection)
    if m.phantom_index in sel:
        raise PhantomInSelection("the phantom site cannot be part of a deployment")
    baseline = exemplar_loss([m.phantom_index], m)
    return baseline - exemplar_loss(sel | {m.phantom_index}, m)


class CoverageUtility(SetFunction):
    """Set function over candidate-site indices backed by an augmented matrix."""

    def __init__(self, matrix: AugmentedMatrix):
        super().__init__()
        self.matrix = matrix

    @property
    def ground_set(self) -> range:
        return range(self.matrix.base.n_sites)

    def _evaluate(self, subset):
        return utility(subset, self.matrix)


@dataclass(frozen=True)
class DeploymentProblem:
    """A coverage utility paired with its selection constraint.

    ``matrix`` keeps the untransformed distances for reporting; for hotspot
    tasks the utility itself is built on the truncated-log transform.
    """

    utility: CoverageUtility
    constraint: int | PartitionConstraint
    task: str
    matrix: DistanceMatrix

    def solve(self, lazy: bool = False) -> GreedyResult:
        if isinstance(self.constraint, PartitionConstraint):
            return greedy_partition(self.utility, self.constraint)
        return greedy_cardinality(self.utility, self.utility.ground_set, self.constraint, lazy=lazy)


def _check_dimensions(scenario: Scenario, m: DistanceMatrix) -> None:
    if m.values.shape != (len(scenario.candidates), len(scenario.targets)):
        raise DimensionMismatch(
            f"matrix shape {m.values.shape} does not match scenario "
            f"({len(scenario.candidates)} candidates x {len(scenario.targets)} targets)"
        )


def build_fair_access(scenario: Scenario, m: DistanceMatrix) -> DeploymentProblem:
    """Equitable-access deployment: utility straight on the metric distances."""
    _check_dimensions(scenario, m)
    return DeploymentProblem(
        utility=CoverageUtility(augment_with_phantom(m)),
        constraint=scenario.constraint(),
        task="fair-access",
        matrix=m,
    )


def build_hotspot(scenario: Scenario, m: DistanceMatrix) -> DeploymentProblem:
    """Density-seeking deployment: utility on truncated-log distances, which
    rewards sites close to many targets over sites merely close to one."""
    _check_dimensions(scenario, m)
    params = scenario.hotspot_params()
    transformed = apply_hotspot(m, params.ell, params.cap)
    return DeploymentProblem(
        utility=CoverageUtility(augment_with_phantom(transformed)),
        constraint=scenario.constraint(),
        task="hotspot",
        matrix=m,
    )


def build_problem(scenario: Scenario, m: DistanceMatrix, task: str | None = None) -> DeploymentProblem:
    task = task or scenario.task
    if task == "hotspot":
        return build_hotspot(scenario, m)
    if task == "fair-access":
        return build_fair_access(scenario, m)
    raise InvalidParams(f"unknown task {task!r}; expected 'fair-access' or 'hotspot'")


def max_target_distance(selection, m: DistanceMatrix) -> float:
    """Worst-off target's distance to its nearest selected site (reporting
    metric; the optimized objective is the mean-reduction utility)."""
    sel = sorted(set(selection))
    if not sel:
        raise EmptySet("max_target_distance needs a nonempty selection")
    return float(m.values[sel].min(axis=0).max())


def target_assignments(selection, m: DistanceMatrix) -> list[int]:
    """Nearest selected site id per target; ties go to the lowest site id."""
    sel = sorted(set(selection))
    if not sel:
        raise EmptySet("assignments need a nonempty selection")
    rows = m.values[sel]
    return [int(sel[k]) for k in rows.argmin(axis=0)]
