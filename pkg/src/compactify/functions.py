"""Bounded coordinate functions on the real line.

Every compactification in this package is driven by a finite ordered family
of bounded continuous functions.  Each function is held as a small symbolic
descriptor rather than a bare callable so that ranges can be computed
exactly, families can be compared syntactically, and everything survives a
round trip through JSON.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "Interval",
    "FunctionDescriptor",
    "Tanh",
    "Cos",
    "StereoX",
    "StereoY",
    "Cheb",
    "Const",
    "AffineImage",
    "FunctionFamily",
    "evaluate",
    "range_interval",
    "chebyshev_expand",
    "chebyshev_recurrence",
    "descriptor_to_json",
    "descriptor_from_json",
]


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi


def chebyshev_recurrence(n: int, t: np.ndarray | float) -> np.ndarray | float:
    """Chebyshev polynomial T_n(t) via the three-term recurrence.

    T_0 = 1, T_1 = t, T_{k+1} = 2 t T_k - T_{k-1}.
    """
    if n < 0:
        raise ValueError("degree must be nonnegative")
    arr = np.asarray(t, dtype=np.float64)
    if n == 0:
        out = np.ones_like(arr)
    elif n == 1:
        out = arr
    else:
        prev = np.ones_like(arr)
        cur = arr
        for _ in range(n - 1):
            prev, cur = cur, 2.0 * arr * cur - prev
        out = cur
    if np.ndim(t) == 0 and not isinstance(t, np.ndarray):
        return float(out)
    return out


class FunctionDescriptor:
    """Base class for symbolic descriptors of bounded functions on R."""

    def evaluate(self, x):
        """Evaluate at a float or an ndarray of floats.

        The result is clipped into ``range_interval()`` so that containment
        holds exactly even where the underlying recurrences drift by an ulp.
        """
        arr = np.asarray(x, dtype=np.float64)
        iv = self.range_interval()
        out = np.clip(self._raw(arr), iv.lo, iv.hi)
        if arr.ndim == 0 and not isinstance(x, np.ndarray):
            return float(out)
        return out

    def _raw(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def range_interval(self) -> Interval:
        """Closed hull of the image of R under this function."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Tanh(FunctionDescriptor):
    """x -> tanh(a x + b)."""

    a: float = 1.0
    b: float = 0.0

    def _raw(self, arr):
        return np.tanh(self.a * arr + self.b)

    def range_interval(self) -> Interval:
        if self.a == 0.0:
            v = float(np.tanh(self.b))
            return Interval(v, v)
        return Interval(-1.0, 1.0)

    def to_json(self) -> dict:
        return {"kind": "tanh", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Cos(FunctionDescriptor):
    """x -> cos(a x + b)."""

    a: float = 1.0
    b: float = 0.0

    def _raw(self, arr):
        phase = self.a * arr + self.b
        # cos(|p|) = cos(p); taking |p| first makes the evenness of cos hold
        # bitwise, so Cos(-n, 0) and Cos(n, 0) agree exactly.
        phase = np.abs(phase)
        # A finite x with |a x + b| overflowing float64 has no representable
        # phase; collapse to cos(0) to keep the value finite.
        safe = np.where(np.isfinite(phase), phase, 0.0)
        return np.cos(safe)

    def range_interval(self) -> Interval:
        if self.a == 0.0:
            v = float(np.cos(self.b))
            return Interval(v, v)
        return Interval(-1.0, 1.0)

    def to_json(self) -> dict:
        return {"kind": "cos", "a": self.a, "b": self.b}


@dataclass(frozen=True)
class StereoX(FunctionDescriptor):
    """x -> 2x / (1 + x^2), the first circle-embedding coordinate."""

    def _raw(self, arr):
        ax = np.abs(arr)
        small = ax <= 1.0
        # Rewritten as (2/x) / (1 + 1/x^2) for |x| > 1 so that x^2 never
        # overflows; both branches give exactly +-1 at x = +-1.
        xs = np.where(small, arr, 1.0)
        xl = np.where(small, 1.0, arr)
        inv = 1.0 / xl
        return np.where(small, 2.0 * xs / (1.0 + xs * xs), 2.0 * inv / (1.0 + inv * inv))

    def range_interval(self) -> Interval:
        return Interval(-1.0, 1.0)

    def to_json(self) -> dict:
        return {"kind": "stereo_x"}


@dataclass(frozen=True)
class StereoY(FunctionDescriptor):
    """x -> (x^2 - 1) / (1 + x^2), the second circle-embedding coordinate."""

    def _raw(self, arr):
        # 1 - 2/(1 + x^2) is the same rational function without the
        # overflowing numerator; it tends to 1 cleanly as |x| grows.
        return 1.0 - 2.0 / (1.0 + arr * arr)

    def range_interval(self) -> Interval:
        return Interval(-1.0, 1.0)

    def to_json(self) -> dict:
        return {"kind": "stereo_y"}


@dataclass(frozen=True)
class Const(FunctionDescriptor):
    """Constant function x -> c."""

    c: float = 0.0

    def _raw(self, arr):
        return np.full(arr.shape, float(self.c))

    def range_interval(self) -> Interval:
        return Interval(self.c, self.c)

    def to_json(self) -> dict:
        return {"kind": "const", "c": self.c}


@dataclass(frozen=True)
class Cheb(FunctionDescriptor):
    """x -> T_n(inner(x)) with T_n the degree-n Chebyshev polynomial."""

    n: int
    inner: FunctionDescriptor

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("Chebyshev wrapper needs degree n >= 1")

    def _raw(self, arr):
        return chebyshev_recurrence(self.n, np.asarray(self.inner.evaluate(arr)))

    def range_interval(self) -> Interval:
        inner_iv = self.inner.range_interval()
        lo, hi = inner_iv.lo, inner_iv.hi
        candidates = [
            float(chebyshev_recurrence(self.n, lo)),
            float(chebyshev_recurrence(self.n, hi)),
        ]
        # T_n'(t) = n U_{n-1}(t) vanishes exactly at cos(k pi / n), where
        # T_n alternates between +-1; those are the only interior extrema.
        for k in range(1, self.n):
            crit = float(np.cos(k * np.pi / self.n))
            if lo <= crit <= hi:
                candidates.append(1.0 if k % 2 == 0 else -1.0)
        return Interval(min(candidates), max(candidates))

    def to_json(self) -> dict:
        return {"kind": "cheb", "n": self.n, "inner": self.inner.to_json()}


@dataclass(frozen=True)
class AffineImage(FunctionDescriptor):
    """x -> scale * inner(x) + shift."""

    inner: FunctionDescriptor
    scale: float = 1.0
    shift: float = 0.0

    def _raw(self, arr):
        return self.scale * np.asarray(self.inner.evaluate(arr)) + self.shift

    def range_interval(self) -> Interval:
        iv = self.inner.range_interval()
        a = self.scale * iv.lo + self.shift
        b = self.scale * iv.hi + self.shift
        return Interval(min(a, b), max(a, b))

    def to_json(self) -> dict:
        return {
            "kind": "affine",
            "inner": self.inner.to_json(),
            "scale": self.scale,
            "shift": self.shift,
        }


def evaluate(f: FunctionDescriptor, x):
    """Evaluate descriptor ``f`` at ``x`` (float or ndarray)."""
    return f.evaluate(x)


def range_interval(f: FunctionDescriptor) -> Interval:
    """Exact closed hull of the image of R under ``f``."""
    return f.range_interval()


def chebyshev_expand(n: int) -> Cheb:
    """Descriptor for cos(n x) written as T_n composed with cos(x).

    Rejects n = 0: the degenerate case collapses to the constant 1 and
    carries no frequency information.
    """
    if n < 1:
        raise ValueError("chebyshev_expand requires n >= 1")
    return Cheb(n, Cos(1.0, 0.0))


def _injective_lead(descriptors: tuple[FunctionDescriptor, ...]) -> bool:
    """Whether coordinate 0 (with coordinate 1, for the circle pair) is
    injective on R.  Only structurally recognizable cases are admitted."""
    f = descriptors[0]
    while isinstance(f, AffineImage) and f.scale != 0.0:
        f = f.inner
    if isinstance(f, Tanh) and f.a != 0.0:
        return True
    if isinstance(f, StereoX):
        return len(descriptors) > 1 and isinstance(descriptors[1], StereoY)
    return False


@dataclass(frozen=True)
class FunctionFamily:
    """Finite ordered family of descriptors defining a coordinate embedding.

    The leading coordinate must separate points of R, otherwise the induced
    map into the product is not an embedding.  That is enforced
    structurally: a nondegenerate Tanh (possibly inside strictly monotone
    affine wrappers), or the StereoX/StereoY pair at coordinates 0 and 1.
    """

    descriptors: tuple[FunctionDescriptor, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.descriptors, tuple):
            object.__setattr__(self, "descriptors", tuple(self.descriptors))
        if len(self.descriptors) == 0:
            raise ValueError("family must contain at least one function")
        for f in self.descriptors:
            if not isinstance(f, FunctionDescriptor):
                raise TypeError(f"not a function descriptor: {f!r}")
        if not _injective_lead(self.descriptors):
            raise ValueError(
                "coordinate 0 must be injective on R: use Tanh with a != 0, "
                "a strictly monotone affine image of it, or the "
                "StereoX/StereoY pair at coordinates 0 and 1"
            )

    def __len__(self) -> int:
        return len(self.descriptors)

    def __iter__(self) -> Iterator[FunctionDescriptor]:
        return iter(self.descriptors)

    def __getitem__(self, i: int) -> FunctionDescriptor:
        return self.descriptors[i]

    def space(self) -> tuple[Interval, ...]:
        """Ranges of the member functions, in coordinate order."""
        return tuple(f.range_interval() for f in self.descriptors)

    def to_json(self) -> list[dict]:
        return [f.to_json() for f in self.descriptors]

    @classmethod
    def from_json(cls, data: Iterable[dict]) -> "FunctionFamily":
        return cls(tuple(descriptor_from_json(obj) for obj in data))

    @classmethod
    def from_file(cls, path) -> "FunctionFamily":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict) and "family" in data:
            data = data["family"]
        if not isinstance(data, list):
            raise ValueError("family file must hold a JSON array of descriptors")
        return cls.from_json(data)


def descriptor_to_json(f: FunctionDescriptor) -> dict:
    return f.to_json()


def descriptor_from_json(obj: dict) -> FunctionDescriptor:
    """Parse one descriptor from its JSON object form."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValueError(f"not a descriptor object: {obj!r}")
    kind = obj["kind"]
    if kind == "tanh":
        return Tanh(float(obj.get("a", 1.0)), float(obj.get("b", 0.0)))
    if kind == "cos":
        return Cos(float(obj.get("a", 1.0)), float(obj.get("b", 0.0)))
    if kind == "stereo_x":
        return StereoX()
    if kind == "stereo_y":
        return StereoY()
    if kind == "cheb":
        return Cheb(int(obj["n"]), descriptor_from_json(obj["inner"]))
    if kind == "const":
        return Const(float(obj["c"]))
    if kind == "affine":
        return AffineImage(
            descriptor_from_json(obj["inner"]),
            float(obj.get("scale", 1.0)),
            float(obj.get("shift", 0.0)),
        )
    raise ValueError(f"unknown descriptor kind: {kind!r}")
