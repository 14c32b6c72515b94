"""Adaptive 21-point Gauss-Kronrod quadrature, vectorised over many intervals.

The antiderivative machinery anchors every evaluation on a fixed geometric
lattice of points, so that the value returned for a given ``z`` does not
depend on which other points were evaluated before.
"""

from __future__ import annotations

import math
import os
import threading
from typing import Callable

import numpy as np

from ..errors import DivergentIntegral, DomainError, ToleranceNotMet

# Kronrod abscissae (non-negative half, descending) and weights.
_XK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
# Gauss 10-point weights, matching _XK[1], _XK[3], ..., _XK[9].
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
for _j, _w in enumerate(_WG):
    _i = 2 * _j + 1
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[20 - _i] = _w

_EPS = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny

DEFAULT_ABS_TOL = 1e-12
DEFAULT_REL_TOL = 1e-10


def default_tolerances() -> tuple[float, float]:
    """(absolute, relative) tolerance; ``KLSC_QUAD_TOL`` overrides the relative one."""
    env = os.environ.get("KLSC_QUAD_TOL")
    if env:
        rel = float(env)
        if not rel > 0:
            raise ValueError("KLSC_QUAD_TOL must be positive")
        return min(DEFAULT_ABS_TOL, rel * 1e-2), rel
    return DEFAULT_ABS_TOL, DEFAULT_REL_TOL


Integrand = Callable[[np.ndarray], np.ndarray]


def gk21(f: Integrand, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kronrod estimates, error bounds and integrals of |f| for each interval [lo[i], hi[i]]."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = center[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise DomainError("integrand is not finite on the integration path")
    k = fx @ KRONROD_WEIGHTS
    g = fx @ GAUSS_WEIGHTS
    ahalf = np.abs(half)
    resabs = (np.abs(fx) @ KRONROD_WEIGHTS) * ahalf
    mean = k * 0.5
    resasc = (np.abs(fx - mean[:, None]) @ KRONROD_WEIGHTS) * ahalf
    err = np.abs((k - g) * half)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50 * _EPS * resabs
    err = np.where(resabs > _UFLOW / (50 * _EPS), np.maximum(floor, err), err)
    return k * half, err, resabs


def integrate_intervals(
    f: Integrand,
    a: np.ndarray,
    b: np.ndarray,
    abs_tol: float | None = None,
    rel_tol: float | None = None,
    limit: int = 500,
) -> np.ndarray:
    """Integrate ``f`` over each finite interval [a[i], b[i]] adaptively.

    All pending subintervals are evaluated in one vectorised call per pass.
    An interval is refined by bisecting every piece whose error exceeds its
    equal share of the tolerance, which also drives geometric refinement
    toward an endpoint singularity.
    """
    if abs_tol is None or rel_tol is None:
        da, dr = default_tolerances()
        abs_tol = da if abs_tol is None else abs_tol
        rel_tol = dr if rel_tol is None else rel_tol
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m = len(a)
    out = np.zeros(m)
    active = [i for i in range(m) if a[i] != b[i]]
    # piece layout: [lo, hi, value, error, depth, integral of |f|]
    pieces: dict[int, list[list[float]]] = {i: [[a[i], b[i], 0.0, 0.0, 0, 0.0]] for i in active}
    pending = [(i, 0) for i in active]
    while pending:
        lo = np.array([pieces[i][j][0] for i, j in pending])
        hi = np.array([pieces[i][j][1] for i, j in pending])
        val, err, mass = gk21(f, lo, hi)
        for (i, j), v, e, w in zip(pending, val, err, mass):
            pieces[i][j][2] = v
            pieces[i][j][3] = e
            pieces[i][j][5] = w
        pending = []
        still = []
        for i in active:
            ps = pieces[i]
            total = math.fsum(p[2] for p in ps)
            errsum = sum(p[3] for p in ps)
            # the last term keeps cancelling integrands from demanding the impossible
            tol = max(abs_tol, rel_tol * abs(total), 1e3 * _EPS * sum(p[5] for p in ps))
            if errsum <= tol:
                out[i] = total
                continue
            share = tol / len(ps)
            split = [j for j, p in enumerate(ps) if p[3] > share]
            if len(ps) + len(split) > limit:
                _fail(ps, a[i], b[i], tol)
            new = []
            for j in split:
                lo_j, hi_j, _, _, depth, _ = ps[j]
                mid = 0.5 * (lo_j + hi_j)
                if not (min(lo_j, hi_j) < mid < max(lo_j, hi_j)) or depth > 200:
                    _fail(ps, a[i], b[i], tol)
                ps[j] = [lo_j, mid, 0.0, 0.0, depth + 1, 0.0]
                new.append([mid, hi_j, 0.0, 0.0, depth + 1, 0.0])
                pending.append((i, j))
            for piece in new:
                ps.append(piece)
                pending.append((i, len(ps) - 1))
            still.append(i)
        active = still
    return out


def _fail(ps, a, b, tol):
    worst = max(ps, key=lambda p: p[3])
    at_end = worst[0] in (a, b) or worst[1] in (a, b)
    if at_end and abs(worst[2]) > tol:
        raise DivergentIntegral(f"integrand is not integrable near {a if a in worst[:2] else b}")
    raise ToleranceNotMet(f"quadrature on [{a}, {b}] did not reach tolerance {tol:.3g}")


def integrate(f: Integrand, a: float, b: float, abs_tol=None, rel_tol=None) -> float:
    """Integral of ``f`` from ``a`` to ``b``; either limit may be infinite."""
    if a == b:
        return 0.0
    if math.isinf(a) and not math.isinf(b):
        return -integrate(f, b, a, abs_tol, rel_tol)
    if math.isinf(b):
        if math.isinf(a):
            raise ValueError("at most one infinite limit is supported")
        if b < 0:
            return -integrate(lambda t: f(-t), -a, math.inf, abs_tol, rel_tol)
        if a <= 0:
            head = integrate(f, a, 1.0, abs_tol, rel_tol)
            return head + _tail(f, 1.0, abs_tol, rel_tol)
        return _tail(f, a, abs_tol, rel_tol)
    return float(integrate_intervals(f, np.array([a]), np.array([b]), abs_tol, rel_tol)[0])


RATIO = 2.0 ** 0.25


def _tail_cells(f, start: float, abs_tol, rel_tol, cell: Callable[[int], float]) -> float:
    """Sum cell(0) + cell(1) + ... until the geometric tail estimate is negligible."""
    total = 0.0
    history: list[float] = []
    j = 0
    while True:
        c = cell(j)
        total += c
        history.append(abs(c))
        j += 1
        if j >= 8:
            recent = history[-4:]
            prev = history[-8:-4]
            if sum(prev) == 0.0:
                return total
            r = (sum(recent) / sum(prev)) ** 0.25
            tol = max(abs_tol if abs_tol is not None else DEFAULT_ABS_TOL,
                      (rel_tol if rel_tol is not None else DEFAULT_REL_TOL) * abs(total),
                      1e3 * _EPS * sum(history))
            if r < 0.999:
                remaining = history[-1] * r / (1 - r)
                if remaining <= 0.05 * tol:
                    return total
            elif j >= 64:
                raise DivergentIntegral("integrand does not decay toward infinity")
        if start * RATIO ** j > 1e280:
            raise ToleranceNotMet("improper integral did not converge before overflow")


def _tail(f, a: float, abs_tol, rel_tol) -> float:
    def cell(j: int) -> float:
        lo, hi = a * RATIO ** j, a * RATIO ** (j + 1)
        return float(integrate_intervals(f, np.array([lo]), np.array([hi]), abs_tol, rel_tol)[0])

    return _tail_cells(f, a, abs_tol, rel_tol, cell)


class Antiderivative:
    """Values of ``t -> integral of f from basepoint to t`` for positive t.

    Every query is answered as (anchor value) + (short integral from the
    anchor), with anchors on the lattice ``basepoint * RATIO**k`` (or
    ``RATIO**k`` for an infinite basepoint).  Anchor values are built from
    cached lattice cells summed in a fixed order, so results are
    deterministic regardless of query history.  Access is thread-safe.
    """

    def __init__(self, f: Integrand, basepoint: float):
        self.f = f
        self.basepoint = float(basepoint)
        # purely relative accuracy: antiderivatives are often tiny far out in a tail
        self.abs_tol, self.rel_tol = 0.0, default_tolerances()[1]
        self._cells: dict[int, float] = {}
        self._anchors: dict[int, float] = {}
        self._lock = threading.RLock()
        self._log_ratio = math.log(RATIO)

    # lattice helpers
    def _point(self, k: int) -> float:
        if math.isinf(self.basepoint):
            return RATIO ** k
        return self.basepoint * RATIO ** k

    def _cell(self, k: int) -> float:
        """Integral from lattice point k to k+1."""
        if k not in self._cells:
            # tails walk upward one cell at a time, so fetch a batch ahead
            self._fill_cells(range(k, k + 16))
        return self._cells[k]

    def _fill_cells(self, ks):
        missing = sorted({k for k in ks if k not in self._cells})
        if not missing:
            return
        lo = np.array([self._point(k) for k in missing])
        hi = np.array([self._point(k + 1) for k in missing])
        vals = integrate_intervals(self.f, lo, hi, self.abs_tol, self.rel_tol)
        for k, v in zip(missing, vals):
            self._cells[k] = float(v)

    def _anchor(self, k: int) -> float:
        v = self._anchors.get(k)
        if v is not None:
            return v
        if math.isinf(self.basepoint):
            v = -_tail_cells(self.f, self._point(k), self.abs_tol, self.rel_tol,
                             lambda j: self._cell(k + j))
        elif k == 0:
            v = 0.0
        elif k > 0:
            self._fill_cells(range(0, k))
            v = math.fsum(self._cells[j] for j in range(0, k))
        else:
            self._fill_cells(range(k, 0))
            v = -math.fsum(self._cells[j] for j in range(k, 0))
        self._anchors[k] = v
        return v

    def _anchor_index(self, t: np.ndarray) -> np.ndarray:
        if math.isinf(self.basepoint):
            k = np.ceil(np.log(t) / self._log_ratio - 1e-12)
        else:
            x = np.log(t / self.basepoint) / self._log_ratio
            k = np.trunc(x)
        return k.astype(np.int64)

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        if np.any(~(flat > 0)) or np.any(~np.isfinite(flat)):
            raise DomainError("antiderivatives are evaluated at finite positive z only")
        if self.basepoint <= 0:
            # no log lattice: integrate directly from the basepoint
            vals = integrate_intervals(self.f, np.full(flat.shape, self.basepoint), flat,
                                       self.abs_tol, self.rel_tol)
            return vals.reshape(t.shape)
        ks = self._anchor_index(flat)
        with self._lock:
            uniq = np.unique(ks)
            if not math.isinf(self.basepoint):
                lo_k, hi_k = min(int(uniq.min()), 0), max(int(uniq.max()), 0)
                self._fill_cells(range(lo_k, hi_k))
            anchors = {int(k): self._anchor(int(k)) for k in uniq}
        starts = np.array([self._point(int(k)) for k in ks])
        base = np.array([anchors[int(k)] for k in ks])
        rest = integrate_intervals(self.f, starts, flat, self.abs_tol, self.rel_tol)
        return (base + rest).reshape(t.shape)
