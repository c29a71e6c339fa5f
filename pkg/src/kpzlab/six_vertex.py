"""Exact sequential sampler of the stochastic six-vertex model in a quadrant.

Paths enter horizontally at every left-boundary site (1, m) and are grown
vertex by vertex.  A vertex with both or neither arrow incoming is completed
deterministically; a lone vertical arrow keeps going up with probability b1
(else turns right), a lone horizontal arrow keeps going right with
probability b2 (else turns up).  The height h(x, y) counts the paths that
cross level y at column >= x; with the step boundary this equals y minus
the number of crossings strictly left of x.

Randomness is counter based: the uniform consumed at vertex (x, y) depends
only on (replica seed, x, y), so restricting the sampling window never
changes the sampled configuration on the intersection.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .rng import counter_uniforms

_MAGIC = b"S6V1"


class S6VError(ValueError):
    pass


@dataclass(frozen=True)
class S6VParams:
    """q plus column weights xi_x and row weights u_y (scalars = homogeneous)."""

    q: float
    xi: object = 1.0
    u: object = 1.0

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise S6VError("q must lie strictly in (0,1)")
        xi = np.atleast_1d(np.asarray(self.xi, dtype=float))
        u = np.atleast_1d(np.asarray(self.u, dtype=float))
        if np.any(xi <= 0) or np.any(u <= 0):
            raise S6VError("xi and u must be positive")
        if float(np.min(xi)) * float(np.min(u)) <= self.q ** -0.5:
            raise S6VError("need xi_x * u_y > q**-1/2 for all x, y")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "u", u)

    def xi_at(self, x: int) -> float:
        return float(self.xi[0] if len(self.xi) == 1 else self.xi[x - 1])

    def u_at(self, y: int) -> float:
        return float(self.u[0] if len(self.u) == 1 else self.u[y - 1])

    @property
    def zeta(self) -> float:
        """xi^-1 u^-1 q^-1/2 in the homogeneous case."""
        if len(self.xi) != 1 or len(self.u) != 1:
            raise S6VError("zeta is defined for homogeneous parameters")
        return 1.0 / (float(self.xi[0]) * float(self.u[0]) * self.q ** 0.5)


def vertex_probs(params: S6VParams, x: int = 1, y: int = 1):
    """(b1, b2) at vertex (x, y); both strictly inside (0,1)."""
    q = params.q
    s = params.xi_at(x) * params.u_at(y)
    if s <= q ** -0.5:
        raise S6VError("parameter constraint violated at this vertex")
    denom = 1.0 - q ** -0.5 * s
    b1 = (1.0 - q ** 0.5 * s) / denom
    b2 = (1.0 / q - q ** -0.5 * s) / denom
    return b1, b2


def params_from_zeta(q: float, zeta: float) -> S6VParams:
    """Homogeneous parameters with a prescribed zeta in (0,1); then
    b1 = q(1-zeta)/(1-q*zeta) and b2 = (1-zeta)/(1-q*zeta)."""
    if not 0.0 < zeta < 1.0:
        raise S6VError("zeta must lie in (0,1)")
    return S6VParams(q, q ** -0.5 / zeta, 1.0)


def asep_limit_params(N: float, q: float) -> S6VParams:
    """Homogeneous parameters solving b2 = 1/N exactly (then b1 = q/N).

    b1 and b2 always sit in the ratio b1 = q * b2, so fixing b2 = 1/N pins
    both completion probabilities of the exclusion-process limit.
    """
    if N <= 1:
        raise S6VError("need N > 1 for a valid parameter solution")
    b2 = 1.0 / N
    v = (1.0 / q - b2) / (1.0 - b2)          # v = q**-1/2 * xi * u
    return S6VParams(q, v * q ** 0.5, 1.0)


def _b_rows(params: S6VParams, X: int, y: int):
    """b1, b2 for all columns of one row, as float arrays."""
    q = params.q
    xi = params.xi if len(params.xi) > 1 else np.full(X, float(params.xi[0]))
    if len(xi) < X:
        raise S6VError("xi array shorter than the window width")
    s = xi[:X] * params.u_at(y)
    denom = 1.0 - q ** -0.5 * s
    return (1.0 - q ** 0.5 * s) / denom, (1.0 / q - q ** -0.5 * s) / denom


def _sweep(seeds: np.ndarray, params: S6VParams, X: int, Y: int,
           keep_planes: bool = False, height_rows=()):
    """Row-major sweep of the window for a vector of replica seeds.

    Returns (planes, heights) where planes is (v_out, h_out) of shape
    (R, Y, X) when requested and heights maps row y to an (R, X+1) table of
    h(x, y) for x = 1..X+1.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    R = len(seeds)
    height_rows = set(int(y) for y in height_rows)
    v = np.zeros((R, X), dtype=bool)
    planes = (np.zeros((R, Y, X), dtype=np.uint8), np.zeros((R, Y, X), dtype=np.uint8)) \
        if keep_planes else None
    heights = {}
    cols = np.arange(1, X + 1, dtype=np.uint64)
    for y in range(1, Y + 1):
        b1_row, b2_row = _b_rows(params, X, y)
        counters = (np.uint64(y) << np.uint64(32)) | cols
        U = counter_uniforms(seeds[:, None], counters[None, :])
        h = np.ones(R, dtype=bool)
        for x in range(X):
            vin = v[:, x]
            u = U[:, x]
            both = vin & h
            lone_v = vin & ~h
            lone_h = h & ~vin
            keep_up = u < b1_row[x]
            keep_right = u < b2_row[x]
            vout = both | (lone_v & keep_up) | (lone_h & ~keep_right)
            h = both | (lone_v & ~keep_up) | (lone_h & keep_right)
            v[:, x] = vout
            if keep_planes:
                planes[0][:, y - 1, x] = vout
                planes[1][:, y - 1, x] = h
        if y in height_rows:
            table = np.empty((R, X + 1), dtype=np.int64)
            table[:, 0] = y
            table[:, 1:] = y - np.cumsum(v, axis=1)
            heights[y] = table
    return planes, heights


@dataclass
class HeightField:
    """One sampled window, stored as its outgoing arrow bitplanes."""

    X: int
    Y: int
    v_out: np.ndarray       # (Y, X) uint8, vertical outgoing arrows
    h_out: np.ndarray       # (Y, X) uint8, horizontal outgoing arrows
    seed: int = 0

    def v_in(self, x: int, y: int) -> int:
        return int(self.v_out[y - 2, x - 1]) if y >= 2 else 0

    def h_in(self, x: int, y: int) -> int:
        return int(self.h_out[y - 1, x - 2]) if x >= 2 else 1

    def conservation_ok(self) -> bool:
        """At every vertex, incoming arrows == outgoing arrows."""
        for y in range(1, self.Y + 1):
            for x in range(1, self.X + 1):
                inn = self.v_in(x, y) + self.h_in(x, y)
                out = int(self.v_out[y - 1, x - 1]) + int(self.h_out[y - 1, x - 1])
                if inn != out:
                    return False
        return True

    def height(self, x, y: int):
        """h(x, y) for real x in [1, X+1]; exact integers at integer x."""
        if not 1 <= y <= self.Y:
            raise S6VError("row outside the window")
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs < 1 - 1e-9) or np.any(xs > self.X + 1 + 1e-9):
            raise S6VError("column outside the window")
        table = np.empty(self.X + 1, dtype=np.int64)
        table[0] = y
        table[1:] = y - np.cumsum(self.v_out[y - 1])
        out = np.interp(xs, np.arange(1, self.X + 2), table.astype(float))
        return float(out[0]) if np.asarray(x).ndim == 0 else out

    def height_slice_csv(self, y: int) -> str:
        rows = ["x,h"]
        for x in range(1, self.X + 2):
            rows.append(f"{x},{int(self.height(x, y))}")
        return "\n".join(rows) + "\n"

    def to_bytes(self) -> bytes:
        """16-byte header (magic, X, Y, flags as little-endian u32) followed
        by packed incoming bitplanes, extended one row / column so the
        outgoing arrows of the last row and column are retained."""
        header = _MAGIC + struct.pack("<III", self.X, self.Y, 1)
        v_in = np.zeros((self.Y + 1, self.X), dtype=np.uint8)
        v_in[1:] = self.v_out
        h_in = np.zeros((self.Y, self.X + 1), dtype=np.uint8)
        h_in[:, 0] = 1
        h_in[:, 1:] = self.h_out
        return header + np.packbits(v_in).tobytes() + np.packbits(h_in).tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "HeightField":
        if blob[:4] != _MAGIC:
            raise S6VError("bad magic")
        X, Y, flags = struct.unpack("<III", blob[4:16])
        if flags != 1:
            raise S6VError(f"unsupported flags {flags}")
        n_v = (Y + 1) * X
        n_vb = (n_v + 7) // 8
        body = np.frombuffer(blob[16:], dtype=np.uint8)
        v_in = np.unpackbits(body[:n_vb])[:n_v].reshape(Y + 1, X)
        n_h = Y * (X + 1)
        h_in = np.unpackbits(body[n_vb:n_vb + (n_h + 7) // 8])[:n_h].reshape(Y, X + 1)
        return cls(X, Y, v_in[1:].astype(np.uint8), h_in[:, 1:].astype(np.uint8))


def sample_s6v(seed: int, params: S6VParams, X: int, Y: int) -> HeightField:
    """Exact draw of the window, one replica, with full arrow planes."""
    if X < 1 or Y < 1:
        raise S6VError("window must be at least 1 x 1")
    planes, _ = _sweep(np.array([seed], dtype=np.uint64), params, X, Y, keep_planes=True)
    return HeightField(X, Y, planes[0][0], planes[1][0], seed)


def sample_heights(seeds, params: S6VParams, X: int, Y: int, rows=None) -> dict:
    """Batch sampler: height tables h(x, y) for x = 1..X+1 at the requested
    rows (default: the top row Y), for a vector of replica seeds.

    Returns {y: (R, X+1) int array}.
    """
    rows = [Y] if rows is None else list(rows)
    _, heights = _sweep(np.asarray(seeds, dtype=np.uint64), params, X, Y, height_rows=rows)
    return heights
