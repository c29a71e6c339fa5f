"""Event-driven continuous-time asymmetric simple exclusion process.

Particles on the integer line jump right at rate 1 and left at rate t,
suppressed when the target site is occupied.  Step initial data packs
particles onto the nonpositive integers; the infinite system is truncated
to the first M0 particles, which only unblocks left jumps of the deepest
one, and every run asserts that the deepest particle never reached the
reliable window.  The event engine is aggregate-rate sampling with O(1)
enabled-move bookkeeping, driven by a splitmix64 stream so the compiled
and pure-Python kernels produce identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover - exercised only on broken installs
    _HAVE_NUMBA = False


class WindowError(ValueError):
    """Height queried left of the truncation-reliable window."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Number of simulated particles and the window they make reliable."""

    n_particles: int
    reliable_left: float
    derivation_log: tuple = ()

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")


def default_policy(T: float) -> TruncationPolicy:
    """M0 = ceil(2T) + ceil(10 sqrt(T)) + 10, reliable window [-T/2, inf).

    The deepest particle starts at -(M0-1) <= -2T; truncation only removes
    blockers of its left jumps, and its rightward displacement is at most
    its Poisson(T) count of right-jump attempts, so reaching -T/2 is an
    exponentially rare event.  The simulator records the deepest particle's
    maximum so each run can assert it stayed left of the window.
    """
    M0 = math.ceil(2 * T) + math.ceil(10 * math.sqrt(T)) + 10
    left = -T / 2.0 if T > 0 else -(M0 - 1.0)   # at T=0 nothing has moved
    log = (
        f"T={T}",
        f"M0 = ceil(2T) + ceil(10*sqrt(T)) + 10 = {M0}",
        f"deepest particle starts at {-(M0 - 1)}",
        f"reliable window [{left}, inf)",
    )
    return TruncationPolicy(M0, left, log)


_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / 9007199254740992.0


def _gillespie(seed, n, t_rate, T_end):
    """Aggregate-rate event loop.  Also the numba kernel source."""
    mask = np.uint64(0xFFFFFFFFFFFFFFFF)
    pos = np.empty(n, dtype=np.int64)
    for m in range(n):
        pos[m] = -m
    # enabled-move index sets with O(1) add/remove
    rlist = np.empty(n, dtype=np.int64)
    rwhere = np.full(n, -1, dtype=np.int64)
    llist = np.empty(n, dtype=np.int64)
    lwhere = np.full(n, -1, dtype=np.int64)
    rlist[0] = 0
    rwhere[0] = 0
    rcount = 1
    llist[0] = n - 1
    lwhere[n - 1] = 0
    lcount = 1

    state = np.uint64(seed)
    time = 0.0
    events = 0
    max_last = pos[n - 1]

    while True:
        total = rcount * 1.0 + lcount * t_rate
        # three splitmix64 draws per event: waiting time, move class, member
        state = (state + np.uint64(_GOLDEN)) & mask
        z = state
        z ^= z >> np.uint64(30)
        z = (z * np.uint64(_M1)) & mask
        z ^= z >> np.uint64(27)
        z = (z * np.uint64(_M2)) & mask
        z ^= z >> np.uint64(31)
        u = (float(z >> np.uint64(11)) + 1.0) * _INV53
        time -= math.log(u) / total
        if time > T_end:
            break
        state = (state + np.uint64(_GOLDEN)) & mask
        z = state
        z ^= z >> np.uint64(30)
        z = (z * np.uint64(_M1)) & mask
        z ^= z >> np.uint64(27)
        z = (z * np.uint64(_M2)) & mask
        z ^= z >> np.uint64(31)
        pick = float(z >> np.uint64(11)) * _INV53 * total
        state = (state + np.uint64(_GOLDEN)) & mask
        z = state
        z ^= z >> np.uint64(30)
        z = (z * np.uint64(_M1)) & mask
        z ^= z >> np.uint64(27)
        z = (z * np.uint64(_M2)) & mask
        z ^= z >> np.uint64(31)
        u = float(z >> np.uint64(11)) * _INV53
        if pick < rcount:
            idx = int(u * rcount)
            if idx >= rcount:
                idx = rcount - 1
            m = rlist[idx]
            pos[m] += 1
        else:
            idx = int(u * lcount)
            if idx >= lcount:
                idx = lcount - 1
            m = llist[idx]
            pos[m] -= 1
        events += 1
        if m == n - 1 and pos[m] > max_last:
            max_last = pos[m]

        # refresh enabled status around the mover
        for mm in range(m, m + 2):
            if 0 <= mm < n:
                ok = mm == 0 or pos[mm - 1] > pos[mm] + 1
                if ok and rwhere[mm] < 0:
                    rlist[rcount] = mm
                    rwhere[mm] = rcount
                    rcount += 1
                elif (not ok) and rwhere[mm] >= 0:
                    i = rwhere[mm]
                    last = rlist[rcount - 1]
                    rlist[i] = last
                    rwhere[last] = i
                    rwhere[mm] = -1
                    rcount -= 1
        for mm in range(m - 1, m + 1):
            if 0 <= mm < n:
                ok = mm == n - 1 or pos[mm + 1] < pos[mm] - 1
                if ok and lwhere[mm] < 0:
                    llist[lcount] = mm
                    lwhere[mm] = lcount
                    lcount += 1
                elif (not ok) and lwhere[mm] >= 0:
                    i = lwhere[mm]
                    last = llist[lcount - 1]
                    llist[i] = last
                    lwhere[last] = i
                    lwhere[mm] = -1
                    lcount -= 1
    return pos, events, max_last


_kernel_py = _gillespie
_kernel_nb = njit(cache=True)(_gillespie) if _HAVE_NUMBA else _gillespie


@dataclass
class AsepState:
    """Positions (strictly decreasing, rightmost first) at a fixed time."""

    positions: np.ndarray
    time: float
    t: float
    policy: TruncationPolicy
    events: int = 0
    max_last_position: int = 0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.int64)
        if np.any(np.diff(self.positions) >= 0):
            raise ValueError("positions must be strictly decreasing")

    @property
    def truncation_safe(self) -> bool:
        """Deepest particle never entered the reliable window."""
        return self.max_last_position < self.policy.reliable_left

    def height(self, x):
        """Number of particles at or to the right of x, interpolated."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs < self.policy.reliable_left):
            raise WindowError(
                f"x left of the reliable window edge {self.policy.reliable_left}; "
                f"policy: {'; '.join(self.policy.derivation_log)}"
            )
        asc = self.positions[::-1].astype(float)
        lo = np.floor(xs)
        h_lo = len(asc) - np.searchsorted(asc, lo, side="left")
        h_hi = len(asc) - np.searchsorted(asc, lo + 1, side="left")
        out = h_lo + (xs - lo) * (h_hi - h_lo)
        return float(out[0]) if np.asarray(x).ndim == 0 else out

    def height_slice_csv(self, xs) -> str:
        rows = ["x,h"]
        for x in xs:
            rows.append(f"{x},{self.height(float(x))}")
        return "\n".join(rows) + "\n"


def simulate_asep(seed: int, t: float, T: float, policy: TruncationPolicy | None = None,
                  compiled: bool = True) -> AsepState:
    """Run the truncated system to time T; exact event-driven dynamics."""
    if not 0.0 <= t < 1.0:
        raise ValueError("left rate t must lie in [0,1)")
    if T < 0:
        raise ValueError("T must be nonnegative")
    if policy is None:
        policy = default_policy(T)
    kern = _kernel_nb if compiled else _kernel_py
    with np.errstate(over="ignore"):    # uint64 wraparound is intentional
        pos, events, max_last = kern(np.uint64(seed & ((1 << 64) - 1)), policy.n_particles, t, T)
    return AsepState(pos, T, t, policy, int(events), int(max_last))


def tw_centering(sigma: float):
    """Centering and scale constants (c1, c2) for the particle of index
    sigma*T: c1 = 1 - 2*sqrt(sigma), c2 = sigma**(-1/6)*(1-sqrt(sigma))**(2/3)."""
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie in (0,1)")
    return 1.0 - 2.0 * math.sqrt(sigma), sigma ** (-1 / 6) * (1.0 - math.sqrt(sigma)) ** (2 / 3)


def event_identity_ok(state: AsepState, m_values, n_values) -> bool:
    """Pathwise check that the events {h(n) >= m} and {x_m >= n} agree."""
    for m in m_values:
        if not 1 <= m <= len(state.positions):
            raise ValueError("particle index out of range")
        xm = state.positions[m - 1]
        for n in n_values:
            if (state.height(float(n)) >= m) != (xm >= n):
                return False
    return True
