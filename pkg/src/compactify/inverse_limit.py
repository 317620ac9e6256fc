"""Chains of compactifications and their inverse limit.

An ascending chain of models is bonded by comparison witnesses mapping
each level down to the previous one.  Points of the limit are threads:
one point per level, consecutive levels agreeing through the bonds.  The
limit itself is modeled by the union family, which dominates every level.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .compactification import (
    CompactificationModel,
    build_compactification,
)
from .functions import FunctionFamily
from .ordering import ComparisonWitness, Incomparable, apply_witness, compare
from .product_space import ProductPoint, distances_to_cloud, product_distance

__all__ = [
    "THREAD_TOL",
    "InverseSystem",
    "Thread",
    "LiftError",
    "apply_bond",
    "thread_residuals",
    "make_thread_from_parameter",
    "lift_point",
    "chain_limit",
    "ClosednessReport",
    "verify_closedness_sample",
]

THREAD_TOL = 1e-9


class LiftError(RuntimeError):
    """No candidate at some level matched through the bond."""


@dataclass(frozen=True, eq=False)
class InverseSystem:
    """An ascending chain of models with verified downward bonds.

    ``bonds[n]`` maps level n+1 onto level n.
    """

    levels: tuple[CompactificationModel, ...]
    bonds: tuple[ComparisonWitness, ...]

    def __post_init__(self) -> None:
        if not self.levels:
            raise ValueError("an inverse system needs at least one level")
        if len(self.bonds) != len(self.levels) - 1:
            raise ValueError("need exactly one bond per consecutive level pair")

    @property
    def depth(self) -> int:
        return len(self.levels)

    @classmethod
    def from_levels(cls, levels: Sequence[CompactificationModel]) -> "InverseSystem":
        levels = tuple(levels)
        bonds = []
        for n in range(len(levels) - 1):
            w = compare(levels[n + 1], levels[n])
            if isinstance(w, Incomparable):
                raise ValueError(
                    f"level {n + 1} does not dominate level {n}: {w.reason}"
                )
            bonds.append(w)
        return cls(levels=levels, bonds=tuple(bonds))


@dataclass(frozen=True)
class Thread:
    """One candidate point of the limit: an entry per level."""

    entries: tuple[ProductPoint, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.entries, tuple):
            object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise ValueError("thread needs at least one entry")

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, n: int) -> ProductPoint:
        return self.entries[n]


def apply_bond(system: InverseSystem, n: int, p: ProductPoint) -> ProductPoint:
    """Push a level-(n+1) point down to level n through the bond."""
    if not (0 <= n < system.depth - 1):
        raise IndexError(f"no bond at index {n}")
    if p.space != system.levels[n + 1].space:
        raise ValueError("point does not live at the bond's source level")
    row = apply_witness(system.bonds[n], p.as_array())
    return ProductPoint(tuple(float(v) for v in row), system.levels[n].space)


def thread_residuals(system: InverseSystem, thread: Thread) -> list[float]:
    """Distances between each entry and the pushed-down next entry."""
    if len(thread) != system.depth:
        raise ValueError("thread length does not match the system depth")
    out = []
    for n in range(system.depth - 1):
        out.append(product_distance(apply_bond(system, n, thread[n + 1]), thread[n]))
    return out


def make_thread_from_parameter(system: InverseSystem, x: float) -> Thread:
    """The thread of embeddings of one real parameter at every level."""
    return Thread(tuple(level.embed(x) for level in system.levels))


def _level_candidates(model: CompactificationModel) -> np.ndarray:
    centers = model.remainder_centers()
    if centers.shape[0] == 0:
        return model.image_points
    return np.vstack([model.image_points, centers])


def lift_point(
    system: InverseSystem, n: int, p: ProductPoint, tol: float | None = None
) -> Thread:
    """Complete a single level-n point to a whole thread.

    Entries below n are exact bond images.  Entries above n are found by
    searching the next level's image cloud and remainder centers for the
    candidate whose bond image is nearest to the current entry, ties going
    to the lowest candidate index.  A level where no candidate lands
    within ``tol`` (default: twice that level's cluster radius) raises
    :class:`LiftError` naming the level, which signals that the sampling
    there is too sparse.
    """
    if not (0 <= n < system.depth):
        raise IndexError(f"no level {n}")
    if p.space != system.levels[n].space:
        raise ValueError("point does not live at level n")
    base_tol = tol
    if base_tol is None:
        base_tol = 2.0 * system.levels[n].params.cluster_radius
    near = float(distances_to_cloud(p.as_array(), _level_candidates(system.levels[n])).min())
    if near > base_tol:
        raise ValueError(
            f"point is {near:.3e} away from the level-{n} model, beyond {base_tol:.3e}"
        )

    entries: dict[int, ProductPoint] = {n: p}
    for i in range(n, 0, -1):
        entries[i - 1] = apply_bond(system, i - 1, entries[i])
    for i in range(n, system.depth - 1):
        model_up = system.levels[i + 1]
        level_tol = tol if tol is not None else 2.0 * model_up.params.cluster_radius
        candidates = _level_candidates(model_up)
        pushed = apply_witness(system.bonds[i], candidates)
        dists = distances_to_cloud(entries[i].as_array(), pushed)
        best = int(np.argmin(dists))
        if float(dists[best]) > level_tol:
            raise LiftError(
                f"no candidate at level {i + 1} lands within {level_tol:.3e} "
                f"of the level-{i} entry (closest: {float(dists[best]):.3e}); "
                "the sampling at that level is too sparse"
            )
        entries[i + 1] = ProductPoint(
            tuple(float(v) for v in candidates[best]), model_up.space
        )
    return Thread(tuple(entries[i] for i in range(system.depth)))


def chain_limit(system: InverseSystem, workers: int = 1) -> CompactificationModel:
    """Model of the limit: built from the union of all level families.

    For chains that grow by adjoining coordinates the deepest family
    already contains the others; in general, descriptors missing from it
    are appended in level order, duplicates removed.
    """
    deepest = system.levels[-1]
    descriptors = list(deepest.family.descriptors)
    seen = set(descriptors)
    for level in system.levels[:-1]:
        for f in level.family:
            if f not in seen:
                descriptors.append(f)
                seen.add(f)
    return build_compactification(
        FunctionFamily(tuple(descriptors)), deepest.params, workers=workers
    )


@dataclass(frozen=True)
class ClosednessReport:
    """Which candidate threads satisfied every bond equation."""

    members: tuple[bool, ...]
    residuals: tuple[tuple[float, ...], ...]
    tol: float

    @property
    def all_members(self) -> bool:
        return all(self.members)


def verify_closedness_sample(
    system: InverseSystem,
    candidates: Sequence[Sequence[ProductPoint]],
    tol: float = THREAD_TOL,
) -> ClosednessReport:
    """Test candidate per-level tuples for membership in the limit.

    The limit is cut out of the product of the levels by the bond
    equations; a candidate belongs exactly when every consecutive pair
    agrees through its bond within ``tol``.
    """
    members = []
    residuals = []
    for cand in candidates:
        thread = Thread(tuple(cand))
        res = tuple(thread_residuals(system, thread))
        residuals.append(res)
        members.append(all(r <= tol for r in res))
    return ClosednessReport(
        members=tuple(members), residuals=tuple(residuals), tol=tol
    )
