"""Lattice up-right paths and uniform bridge measures.

An up-right path is an integer function on an integer interval whose
increments are 0 or 1; evaluated at real arguments it is the linear
interpolation of its lattice points.  The uniform measure on all paths
between two pinned endpoints ("bridges") is the free reference law that
every resampling weight in :mod:`kpzlab.gibbs` tilts.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class UpRightPath:
    """Integer path on [t0, t1] with increments in {0, 1}."""

    t0: int
    values: tuple

    def __post_init__(self):
        if len(self.values) == 0:
            raise PathError("path needs at least one value")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        for a, b in zip(self.values, self.values[1:]):
            if b - a not in (0, 1):
                raise PathError(f"increment {b - a} outside {{0,1}}")

    @property
    def t1(self) -> int:
        return self.t0 + len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, s):
        """Evaluate at real s in [t0, t1] by linear interpolation."""
        s = np.asarray(s, dtype=float)
        if np.any(s < self.t0 - 1e-9) or np.any(s > self.t1 + 1e-9):
            raise PathError("evaluation outside the path's interval")
        out = np.interp(s, np.arange(self.t0, self.t1 + 1), np.asarray(self.values, dtype=float))
        return float(out) if out.ndim == 0 else out

    def at(self, i: int) -> int:
        """Value at an integer abscissa (no interpolation)."""
        return self.values[i - self.t0]

    def shift(self, dt: int = 0, dz: int = 0) -> "UpRightPath":
        return UpRightPath(self.t0 + dt, tuple(v + dz for v in self.values))

    def signs(self) -> tuple:
        """+/- encoding of the increments, indexed t0+1 .. t1."""
        return tuple("+" if b - a == 1 else "-" for a, b in zip(self.values, self.values[1:]))

    def to_json(self) -> str:
        return json.dumps({"t0": self.t0, "values": list(self.values)})

    @classmethod
    def from_json(cls, text: str) -> "UpRightPath":
        d = json.loads(text)
        return cls(int(d["t0"]), tuple(d["values"]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,value\n")
        for i, v in enumerate(self.values):
            buf.write(f"{self.t0 + i},{v}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "UpRightPath":
        rows = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("t,")]
        pairs = sorted((int(a), int(b)) for a, b in (ln.split(",") for ln in rows))
        ts = [t for t, _ in pairs]
        if ts != list(range(ts[0], ts[0] + len(ts))):
            raise PathError("CSV abscissas are not consecutive integers")
        return cls(ts[0], tuple(v for _, v in pairs))


def make_path(t0: int, values) -> UpRightPath:
    """Validated construction; rejects any increment outside {0, 1}."""
    return UpRightPath(int(t0), tuple(values))


@dataclass(frozen=True)
class BridgeSpec:
    """Endpoint data (t0, z0) -> (t1, z1) with a nonempty path space."""

    t0: int
    t1: int
    z0: int
    z1: int

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise PathError("need t0 < t1")
        if not 0 <= self.z1 - self.z0 <= self.t1 - self.t0:
            raise PathError("empty bridge space: need 0 <= z1-z0 <= t1-t0")

    @property
    def n_steps(self) -> int:
        return self.t1 - self.t0

    @property
    def n_up(self) -> int:
        return self.z1 - self.z0

    def count(self) -> int:
        """|Omega| = C(t1-t0, z1-z0)."""
        return comb(self.n_steps, self.n_up)

    def min_at(self, T: int) -> int:
        """Smallest attainable value at integer time T."""
        self._check_time(T)
        return max(self.z0, self.z1 - (self.t1 - T))

    def max_at(self, T: int) -> int:
        """Largest attainable value at integer time T."""
        self._check_time(T)
        return min(self.z0 + (T - self.t0), self.z1)

    def _check_time(self, T: int):
        if not self.t0 <= T <= self.t1:
            raise PathError("time outside the bridge interval")


def _path_from_upsteps(spec: BridgeSpec, up_positions) -> UpRightPath:
    vals = np.full(spec.n_steps + 1, spec.z0, dtype=np.int64)
    inc = np.zeros(spec.n_steps, dtype=np.int64)
    inc[list(up_positions)] = 1
    vals[1:] += np.cumsum(inc)
    return UpRightPath(spec.t0, tuple(int(v) for v in vals))


def enumerate_bridges(spec: BridgeSpec) -> list:
    """All C(n, k) paths of the bridge space, as a brute-force oracle."""
    return [_path_from_upsteps(spec, pos) for pos in combinations(range(spec.n_steps), spec.n_up)]


def sample_uniform_bridge(rng: np.random.Generator, spec: BridgeSpec) -> UpRightPath:
    """Exact uniform draw: shuffle the multiset of +/- increments."""
    inc = np.zeros(spec.n_steps, dtype=np.int64)
    inc[: spec.n_up] = 1
    rng.shuffle(inc)
    vals = np.empty(spec.n_steps + 1, dtype=np.int64)
    vals[0] = spec.z0
    vals[1:] = spec.z0 + np.cumsum(inc)
    return UpRightPath(spec.t0, tuple(int(v) for v in vals))


def sample_uniform_bridge_values(rng: np.random.Generator, spec: BridgeSpec, n: int) -> np.ndarray:
    """n independent uniform bridges as an (n, steps+1) integer value matrix.

    Bulk twin of :func:`sample_uniform_bridge`; each row is an exact uniform
    draw (independent shuffles via per-row random keys).
    """
    steps = spec.n_steps
    inc = np.zeros((n, steps), dtype=np.int64)
    inc[:, : spec.n_up] = 1
    keys = rng.random((n, steps))
    order = np.argsort(keys, axis=1, kind="stable")
    inc = np.take_along_axis(inc, order, axis=1)
    vals = np.empty((n, steps + 1), dtype=np.int64)
    vals[:, 0] = spec.z0
    vals[:, 1:] = spec.z0 + np.cumsum(inc, axis=1)
    return vals


def sample_bridge_through(rng: np.random.Generator, spec: BridgeSpec, T: int, k: int) -> UpRightPath:
    """Uniform bridge conditioned on passing through (T, k).

    Concatenates two independent uniform bridges; the uniform law factorizes
    over the two halves, so this is the exact conditional law.
    """
    if not spec.t0 < T < spec.t1:
        raise PathError("T must lie strictly inside the interval")
    if not spec.min_at(T) <= k <= spec.max_at(T):
        raise PathError(f"value {k} unreachable at time {T}")
    left = sample_uniform_bridge(rng, BridgeSpec(spec.t0, T, spec.z0, k))
    right = sample_uniform_bridge(rng, BridgeSpec(T, spec.t1, k, spec.z1))
    return UpRightPath(spec.t0, left.values + right.values[1:])


def pmf_at(spec: BridgeSpec, T: int) -> dict:
    """Exact law of ell(T) under the uniform bridge measure.

    Counting: C(T-t0, k-z0) * C(t1-T, z1-k) / C(t1-t0, z1-z0).
    """
    total = spec.count()
    out = {}
    for k in range(spec.min_at(T), spec.max_at(T) + 1):
        out[k] = comb(T - spec.t0, k - spec.z0) * comb(spec.t1 - T, spec.z1 - k) / total
    return out


def modulus_of_continuity(xs, fs, delta: float) -> float:
    """sup of |f(x)-f(y)| over |x-y| <= delta for piecewise-linear f.

    ``fs`` are samples on the grid ``xs`` (ascending); f interpolates them
    linearly.  The sup is attained either at a pair of grid points or at a
    pair with one grid point and the other at distance exactly delta, so
    scanning both candidate families is exact whenever the breakpoints of f
    lie on the grid.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    if xs.ndim != 1 or xs.shape != fs.shape or len(xs) < 2:
        raise ValueError("need matching 1-d grids with at least two points")
    best = 0.0
    # grid-grid pairs with |x-y| <= delta (tiny slack absorbs float grids)
    lo = np.searchsorted(xs, xs - delta - 1e-12, side="left")
    for j in range(len(xs)):
        if lo[j] < j:
            seg = fs[lo[j]: j + 1]
            best = max(best, float(np.max(seg) - fs[j]), float(fs[j] - np.min(seg)))
    # grid point paired with the off-grid point at distance exactly delta;
    # together with the pairs above this exhausts the candidates for the sup
    right = np.interp(np.minimum(xs + delta, xs[-1]), xs, fs)
    left = np.interp(np.maximum(xs - delta, xs[0]), xs, fs)
    best = max(best, float(np.max(np.abs(right - fs))), float(np.max(np.abs(left - fs))))
    return best


def path_modulus_of_continuity(path: UpRightPath, delta: float) -> float:
    xs = np.arange(path.t0, path.t1 + 1, dtype=float)
    return modulus_of_continuity(xs, np.asarray(path.values, dtype=float), delta)
