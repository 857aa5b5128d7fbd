"""Linear-elastic direct-stiffness analysis of pin-jointed space trusses.

Covers the stiffness solve, per-node axial demand extraction, and the
iterative strength-based member sizing loop. Dense symmetric solve with a
pivot-magnitude singularity check (threshold 1e-12 times the largest
stiffness diagonal), sized for desk-scale models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import Point3, TrussModel

TENSION = "tension"
COMPRESSION = "compression"

# Sizing defaults: mild structural steel with a strength safety factor and a
# floor at the smallest standard hollow section. All overridable.
STEEL_DENSITY = 7850.0
STEEL_YIELD_STRESS = 345e6
DEFAULT_SAFETY_FACTOR = 1.67
DEFAULT_MIN_AREA = 400e-6

_AXES = ("x", "y", "z")
_PIVOT_RTOL = 1e-12
_EQUILIBRIUM_RTOL = 1e-8


class SingularStructureError(Exception):
    """The stiffness matrix is singular: a mechanism or missing restraint."""

    def __init__(self, node: int, axis: str, pivot: float):
        self.node = node
        self.axis = axis
        self.pivot = pivot
        super().__init__(
            f"stiffness matrix is singular near node {node} direction {axis} "
            f"(pivot {pivot:.3e}); the model is under-restrained or contains a mechanism"
        )


@dataclass(frozen=True)
class AnalysisResult:
    """Solution of one load case: kinematics, member forces and reactions.

    Axial forces are positive in tension. Reactions are keyed by support
    node id.
    """

    displacements: dict[int, Point3]
    axial_forces: dict[int, float]
    reactions: dict[int, Point3]
    load_case: str


@dataclass(frozen=True)
class DemandEntry:
    """One force meeting a node: unit direction, magnitude (N) and sense."""

    direction: tuple[float, float, float]
    magnitude: float
    sense: str

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.direction))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit vector, norm was {norm!r}")
        if self.magnitude < 0:
            raise ValueError(f"magnitude must be non-negative, got {self.magnitude}")
        if self.sense not in (TENSION, COMPRESSION):
            raise ValueError(f"sense must be {TENSION!r} or {COMPRESSION!r}, got {self.sense!r}")

    def signed_magnitude(self) -> float:
        return self.magnitude if self.sense == TENSION else -self.magnitude


@dataclass(frozen=True)
class NodalDemand:
    node: int
    entries: tuple[DemandEntry, ...]


@dataclass(frozen=True)
class SizingResult:
    model: TrussModel
    total_mass: float
    iterations: int
    converged: bool
    mass_per_area: float | None


def resolve_load_case(model: TrussModel, load_case: str | None) -> str:
    """Return the requested case, or the model's single case when unambiguous."""
    cases = model.load_cases()
    if load_case is not None:
        return load_case
    if len(cases) == 1:
        return cases[0]
    if not cases:
        raise ValueError("model defines no loads")
    raise ValueError(f"model defines several load cases {cases}; pick one explicitly")


def solve(model: TrussModel, load_case: str | None = None) -> AnalysisResult:
    """Solve K u = f at the free DOFs for one load case.

    Axial force per element is (EA/L) * (u_end - u_start) . unit(start->end),
    positive in tension. Raises SingularStructureError for mechanisms and
    ValueError when the case has no loads.
    """
    case = resolve_load_case(model, load_case)
    loads = [l for l in model.loads if l.load_case == case]
    if not loads:
        raise ValueError(f"no loads defined for case {case!r}")

    node_ids = [n.id for n in model.nodes]
    index = {nid: i for i, nid in enumerate(node_ids)}
    pos = np.array([n.position.as_tuple() for n in model.nodes])
    n_dof = 3 * len(node_ids)

    K = np.zeros((n_dof, n_dof))
    units = {}
    for el in model.elements:
        i, j = index[el.start], index[el.end]
        d = pos[j] - pos[i]
        length = float(np.linalg.norm(d))
        unit = d / length
        units[el.id] = (i, j, unit, length)
        k_block = (el.youngs_modulus * el.area / length) * np.outer(unit, unit)
        si, sj = slice(3 * i, 3 * i + 3), slice(3 * j, 3 * j + 3)
        K[si, si] += k_block
        K[sj, sj] += k_block
        K[si, sj] -= k_block
        K[sj, si] -= k_block

    f = np.zeros(n_dof)
    for load in loads:
        f[3 * index[load.node] : 3 * index[load.node] + 3] += load.force.as_tuple()

    fixed = np.zeros(n_dof, dtype=bool)
    for sup in model.supports:
        for axis, restrained in enumerate(sup.fixed):
            if restrained:
                fixed[3 * index[sup.node] + axis] = True
    free = np.flatnonzero(~fixed)

    u = np.zeros(n_dof)
    if free.size:
        kff = K[np.ix_(free, free)]
        _check_pivots(kff, free, node_ids)
        u[free] = np.linalg.solve(kff, f[free])

    residual = K @ u - f
    f_norm = float(np.linalg.norm(f))
    res_norm = float(np.linalg.norm(residual[free])) if free.size else 0.0
    if res_norm > _EQUILIBRIUM_RTOL * f_norm:
        raise ArithmeticError(
            f"equilibrium residual {res_norm:.3e} exceeds {_EQUILIBRIUM_RTOL:.0e} x |f| "
            f"= {_EQUILIBRIUM_RTOL * f_norm:.3e}; the system is badly conditioned"
        )

    axial = {}
    for el in model.elements:
        i, j, unit, length = units[el.id]
        stretch = float((u[3 * j : 3 * j + 3] - u[3 * i : 3 * i + 3]) @ unit)
        axial[el.id] = el.youngs_modulus * el.area / length * stretch

    displacements = {
        nid: Point3(*(u[3 * i : 3 * i + 3])) for nid, i in index.items()
    }
    reactions = {}
    for sup in model.supports:
        base = 3 * index[sup.node]
        # only restrained components carry reactions; free components hold
        # solver round-off, not forces
        reactions[sup.node] = Point3(
            *(residual[base + axis] if sup.fixed[axis] else 0.0 for axis in range(3))
        )
    return AnalysisResult(
        displacements=displacements, axial_forces=axial, reactions=reactions, load_case=case
    )


def _check_pivots(kff: np.ndarray, free: np.ndarray, node_ids: list[int]) -> None:
    threshold = _PIVOT_RTOL * float(np.max(np.diag(kff), initial=0.0))
    try:
        chol = np.linalg.cholesky(kff)
    except np.linalg.LinAlgError:
        _raise_singular(kff, threshold, free, node_ids)
        raise  # unreachable; _raise_singular always raises
    pivots = np.diag(chol) ** 2
    worst = int(np.argmin(pivots))
    if pivots[worst] <= threshold:
        node, axis = _dof_name(free[worst], node_ids)
        raise SingularStructureError(node, axis, float(pivots[worst]))


def _raise_singular(kff: np.ndarray, threshold: float, free, node_ids) -> None:
    # Unpivoted symmetric elimination locates the first vanishing pivot.
    a = kff.copy()
    n = a.shape[0]
    bad = n - 1
    pivot = a[bad, bad] if n else 0.0
    for j in range(n):
        d = a[j, j]
        if not d > threshold:
            bad, pivot = j, d
            break
        col = a[j + 1 :, j].copy()
        a[j + 1 :, j + 1 :] -= np.outer(col, col) / d
    node, axis = _dof_name(free[bad], node_ids)
    raise SingularStructureError(node, axis, float(pivot))


def _dof_name(global_dof: int, node_ids: list[int]) -> tuple[int, str]:
    return node_ids[global_dof // 3], _AXES[global_dof % 3]


def extract_demands(
    model: TrussModel,
    result: AnalysisResult,
    include_applied_loads: bool = False,
    include_reactions: bool = False,
) -> list[NodalDemand]:
    """Convert an analysis into per-node force demands.

    For each node and connected element the entry direction points toward the
    element's other end, with magnitude |N| and the sense taken from the sign
    of N. Both senses share that location on the node's unit sphere: a tension
    force exits there and a compression force enters there. Near-zero forces
    are kept with magnitude ~0. Applied loads and reactions are excluded by
    default; when included, nonzero vectors are added as positive entries
    along their own direction (zero vectors have no direction and are
    skipped).

    Returns one NodalDemand per node, ordered by node id, with member entries
    ordered by element id.
    """
    positions = {n.id: n.position for n in model.nodes}
    by_node: dict[int, list[DemandEntry]] = {n.id: [] for n in model.nodes}

    for el in sorted(model.elements, key=lambda e: e.id):
        force = result.axial_forces[el.id]
        sense = TENSION if force >= 0 else COMPRESSION
        for nid, other in ((el.start, el.end), (el.end, el.start)):
            direction = _unit_between(positions[nid], positions[other])
            by_node[nid].append(DemandEntry(direction, abs(force), sense))

    if include_applied_loads:
        for load in model.loads:
            if load.load_case != result.load_case:
                continue
            entry = _vector_entry(load.force)
            if entry is not None:
                by_node[load.node].append(entry)

    if include_reactions:
        for nid in sorted(result.reactions):
            entry = _vector_entry(result.reactions[nid])
            if entry is not None:
                by_node[nid].append(entry)

    return [
        NodalDemand(node=nid, entries=tuple(by_node[nid])) for nid in sorted(by_node)
    ]


def _unit_between(a: Point3, b: Point3) -> tuple[float, float, float]:
    d = (b.x - a.x, b.y - a.y, b.z - a.z)
    norm = math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
    return (d[0] / norm, d[1] / norm, d[2] / norm)


def _vector_entry(vector: Point3) -> DemandEntry | None:
    norm = math.sqrt(vector.x**2 + vector.y**2 + vector.z**2)
    if norm == 0.0:
        return None
    return DemandEntry((vector.x / norm, vector.y / norm, vector.z / norm), norm, TENSION)


def model_mass(model: TrussModel, density: float = STEEL_DENSITY) -> float:
    """Total member mass: sum of density * area * length over elements."""
    positions = {n.id: n.position for n in model.nodes}
    total = 0.0
    for el in model.elements:
        length = math.dist(
            positions[el.start].as_tuple(), positions[el.end].as_tuple()
        )
        total += density * el.area * length
    return total


def size_members(
    model: TrussModel,
    yield_stress: float = STEEL_YIELD_STRESS,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
    min_area: float = DEFAULT_MIN_AREA,
    density: float = STEEL_DENSITY,
    max_iter: int = 20,
    tol: float = 1e-3,
    load_case: str | None = None,
) -> SizingResult:
    """Strength-size every member, re-solving until areas stop changing.

    Each pass solves the current model and sets each area to
    max(min_area, |N| * safety_factor / yield_stress); stiffness
    redistribution changes the forces, so passes repeat until the largest
    relative area change is at or below tol or max_iter is reached. For a
    statically determinate truss the forces never change, so the loop
    converges in at most two passes.

    Non-convergence is reported through the converged flag, not an error.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")
    current = model
    converged = False
    iterations = 0
    for _ in range(max_iter):
        result = solve(current, load_case)
        iterations += 1
        worst_change = 0.0
        new_elements = []
        for el in current.elements:
            required = abs(result.axial_forces[el.id]) * safety_factor / yield_stress
            area = max(min_area, required)
            worst_change = max(worst_change, abs(area - el.area) / el.area)
            new_elements.append(replace(el, area=area))
        current = replace(current, elements=tuple(new_elements))
        if worst_change <= tol:
            converged = True
            break
    total_mass = model_mass(current, density)
    mass_per_area = (
        total_mass / current.enclosure_area if current.enclosure_area is not None else None
    )
    return SizingResult(
        model=current,
        total_mass=total_mass,
        iterations=iterations,
        converged=converged,
        mass_per_area=mass_per_area,
    )
