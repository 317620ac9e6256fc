"""Continuous extension of bounded functions to a closure model.

A family member extends for free: its value at any closure point is the
corresponding coordinate, read off by projection.  For other bounded
functions the question is numerical: the oscillation of the function over
tail witnesses near each remainder cluster either collapses as the probe
radius shrinks (the function extends, with the midpoint as its value) or
stays macroscopic (no continuous extension can exist).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .compactification import CompactificationModel
from .functions import Cos, FunctionDescriptor, chebyshev_recurrence
from .product_space import ProductPoint, distances_to_cloud

__all__ = [
    "DEFAULT_DELTAS",
    "PASS_THRESHOLD",
    "FAIL_THRESHOLD",
    "MIN_FAIL_WITNESSES",
    "Verdict",
    "OscillationRow",
    "ExtensionReport",
    "InsufficientWitnessesError",
    "ProjectionExtension",
    "ChebyshevExtension",
    "extend_by_projection",
    "derived_extension",
    "check_extendability",
]

DEFAULT_DELTAS: tuple[float, ...] = (0.2, 0.1, 0.05, 0.02, 0.01)
PASS_THRESHOLD = 0.05
FAIL_THRESHOLD = 0.5
# A cluster may only carry a failure verdict when enough witnesses back it.
MIN_FAIL_WITNESSES = 100


class Verdict(str, Enum):
    EXTENDS_BY_PROJECTION = "extends_by_projection"
    EXTENDS_NUMERICALLY = "extends_numerically"
    FAILS_TO_EXTEND = "fails_to_extend"
    INCONCLUSIVE = "inconclusive"


class InsufficientWitnessesError(RuntimeError):
    """A cluster had no witnesses inside the smallest probe radius."""


@dataclass(frozen=True)
class ProjectionExtension:
    """Extension of a family member: read coordinate ``coordinate``.

    Composing with the embedding reproduces the member exactly, bit for
    bit, because image points store the evaluated coordinates themselves.
    """

    coordinate: int

    def __call__(self, p):
        if isinstance(p, ProductPoint):
            return p.coords[self.coordinate]
        arr = np.asarray(p, dtype=np.float64)
        return arr[..., self.coordinate]


@dataclass(frozen=True)
class ChebyshevExtension:
    """Extension of the degree-n harmonic: T_n of the base cos coordinate."""

    coordinate: int
    degree: int

    def __call__(self, p):
        if isinstance(p, ProductPoint):
            return float(
                np.clip(chebyshev_recurrence(self.degree, p.coords[self.coordinate]), -1.0, 1.0)
            )
        arr = np.asarray(p, dtype=np.float64)
        return np.clip(chebyshev_recurrence(self.degree, arr[..., self.coordinate]), -1.0, 1.0)


def extend_by_projection(model: CompactificationModel, n: int) -> ProjectionExtension:
    """Extension handle for family member n: coordinate projection."""
    if not (0 <= n < model.dim):
        raise IndexError(f"coordinate {n} out of range for a {model.dim}-coordinate model")
    return ProjectionExtension(n)


def derived_extension(model: CompactificationModel, n: int) -> ChebyshevExtension:
    """Extension of cos(n x) through the base cosine coordinate.

    Uses the identity cos(n x) = T_n(cos x): the closure already carries
    cos as a coordinate, so the degree-n harmonic extends as T_n of that
    coordinate.  With n = 1 this is the plain projection in disguise.
    """
    if n < 1:
        raise ValueError("harmonic degree must be >= 1")
    for j, f in enumerate(model.family):
        if isinstance(f, Cos) and f.a == 1.0 and f.b == 0.0:
            return ChebyshevExtension(coordinate=j, degree=n)
    raise ValueError("family has no cos(x) coordinate to derive harmonics from")


@dataclass(frozen=True)
class OscillationRow:
    """Witness statistics of one cluster at one probe radius."""

    delta: float
    count: int
    oscillation: float | None
    midpoint: float | None


@dataclass(frozen=True)
class ExtensionReport:
    verdict: Verdict
    deltas: tuple[float, ...]
    pass_threshold: float
    fail_threshold: float
    tables: dict[int, tuple[OscillationRow, ...]]
    coordinate: int | None = None
    values: dict[int, float] | None = None
    failing_cluster: int | None = None
    oscillation: float | None = None
    witness_count: int | None = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "deltas": list(self.deltas),
            "pass_threshold": self.pass_threshold,
            "fail_threshold": self.fail_threshold,
            "coordinate": self.coordinate,
            "values": (
                {str(k): v for k, v in self.values.items()} if self.values is not None else None
            ),
            "failing_cluster": self.failing_cluster,
            "oscillation": self.oscillation,
            "witness_count": self.witness_count,
            "tables": {
                str(cid): [
                    {
                        "delta": row.delta,
                        "count": row.count,
                        "oscillation": row.oscillation,
                        "midpoint": row.midpoint,
                    }
                    for row in rows
                ]
                for cid, rows in self.tables.items()
            },
        }


def _validate_deltas(deltas) -> tuple[float, ...]:
    deltas = tuple(float(d) for d in deltas)
    if not deltas:
        raise ValueError("need at least one probe radius")
    if any(d <= 0 for d in deltas):
        raise ValueError("probe radii must be positive")
    if any(a <= b for a, b in zip(deltas, deltas[1:])):
        raise ValueError("probe radii must be strictly decreasing")
    return deltas


def check_extendability(
    model: CompactificationModel,
    f: FunctionDescriptor,
    deltas=DEFAULT_DELTAS,
    pass_threshold: float = PASS_THRESHOLD,
    fail_threshold: float = FAIL_THRESHOLD,
) -> ExtensionReport:
    """Decide whether f extends continuously to the model's remainder.

    A member of the family short-circuits to a projection verdict without
    any sampling.  Otherwise, for every remainder cluster and every probe
    radius delta, the oscillation max - min of f over tail witnesses whose
    embeddings lie within delta of the cluster center is tabulated.  At the
    smallest radius: oscillation below ``pass_threshold`` on every cluster
    means f extends numerically, with the min/max midpoint as its value;
    oscillation above ``fail_threshold`` on some cluster with at least
    ``MIN_FAIL_WITNESSES`` witnesses means it cannot extend; anything else
    is inconclusive, which is a result, not an error.
    """
    deltas = _validate_deltas(deltas)
    if not model.remainder:
        raise ValueError("model has no remainder clusters to test against")
    for j, g in enumerate(model.family):
        if g == f:
            return ExtensionReport(
                verdict=Verdict.EXTENDS_BY_PROJECTION,
                deltas=deltas,
                pass_threshold=pass_threshold,
                fail_threshold=fail_threshold,
                tables={},
                coordinate=j,
            )

    smallest = deltas[-1]
    tables: dict[int, tuple[OscillationRow, ...]] = {}
    final_osc: dict[int, float] = {}
    final_mid: dict[int, float] = {}
    final_count: dict[int, int] = {}
    for cluster in model.remainder:
        xs = cluster.witnesses
        points = model.embedding.embed_array(xs)
        dist = distances_to_cloud(cluster.center, points)
        values = np.asarray(f.evaluate(xs), dtype=np.float64)
        rows = []
        for delta in deltas:
            sel = dist < delta
            count = int(np.count_nonzero(sel))
            if count == 0:
                rows.append(OscillationRow(delta, 0, None, None))
                continue
            vmin = float(values[sel].min())
            vmax = float(values[sel].max())
            rows.append(OscillationRow(delta, count, vmax - vmin, 0.5 * (vmin + vmax)))
        tables[cluster.cluster_id] = tuple(rows)
        last = rows[-1]
        if last.count == 0:
            raise InsufficientWitnessesError(
                f"cluster {cluster.cluster_id} has no witnesses within "
                f"delta={smallest}; rebuild with a denser tail grid "
                "(smaller grid_step) or a larger smallest delta"
            )
        final_osc[cluster.cluster_id] = last.oscillation
        final_mid[cluster.cluster_id] = last.midpoint
        final_count[cluster.cluster_id] = last.count

    if all(o < pass_threshold for o in final_osc.values()):
        return ExtensionReport(
            verdict=Verdict.EXTENDS_NUMERICALLY,
            deltas=deltas,
            pass_threshold=pass_threshold,
            fail_threshold=fail_threshold,
            tables=tables,
            values=final_mid,
        )
    failing = [
        cid
        for cid, o in final_osc.items()
        if o > fail_threshold and final_count[cid] >= MIN_FAIL_WITNESSES
    ]
    if failing:
        worst = max(failing, key=lambda cid: (final_osc[cid], -cid))
        return ExtensionReport(
            verdict=Verdict.FAILS_TO_EXTEND,
            deltas=deltas,
            pass_threshold=pass_threshold,
            fail_threshold=fail_threshold,
            tables=tables,
            failing_cluster=worst,
            oscillation=final_osc[worst],
            witness_count=final_count[worst],
        )
    return ExtensionReport(
        verdict=Verdict.INCONCLUSIVE,
        deltas=deltas,
        pass_threshold=pass_threshold,
        fail_threshold=fail_threshold,
        tables=tables,
        oscillation=max(final_osc.values()),
    )
