"""Parallel transport of parameter families, spectral periods, WKB rate fits.

Paths are piecewise lines/arcs parametrized proportionally to arc length.
Transport solves the flat-section system s'(t) = -M(t) s(t) with an adaptive
embedded pair (DOP853), segment by segment; the error estimate comes from
comparing a second run at a hundredfold tighter tolerance, so est_error is a
conservative bound for the reported matrix.  Determinant fidelity of a sample
is meaningful while eps_machine * ||H||^2 stays below est_error; at extreme
magnitudes the determinant of the stored double-precision matrix is dominated
by representation roundoff.

Eigenvalue tracking keeps the square-root branch by continuation. Reversing a
path flips its orientation flag, and the branch seed follows the orientation,
so periods are exactly odd under reversal.
"""

from __future__ import annotations

import cmath
import math
import os
import warnings
from bisect import bisect_right
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from .connection import ConnectionFamily, MatrixOneForm
from .errors import (
    BranchPointOnPath,
    ClearanceViolated,
    InsufficientSamples,
    NonDecayingSequence,
    StiffnessBudgetExceeded,
    TieAtStart,
)

DEFAULT_CLEARANCE = 1e-6
STEP_BUDGET = 10_000_000


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineSegment:
    start: complex
    end: complex

    def length(self) -> float:
        return abs(self.end - self.start)

    def point(self, s: float) -> complex:
        return self.start + s * (self.end - self.start)

    def velocity(self, s: float) -> complex:
        return self.end - self.start

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)

    def distance_to(self, q: complex) -> float:
        d = self.end - self.start
        L2 = abs(d) ** 2
        if L2 == 0:
            return abs(q - self.start)
        s = max(0.0, min(1.0, ((q - self.start) * d.conjugate()).real / L2))
        return abs(q - self.point(s))

    def to_json(self) -> dict:
        return {
            "type": "line",
            "from": [self.start.real, self.start.imag],
            "to": [self.end.real, self.end.imag],
        }


@dataclass(frozen=True)
class ArcSegment:
    center: complex
    radius: float
    angle0: float
    angle1: float

    def length(self) -> float:
        return abs(self.angle1 - self.angle0) * self.radius

    def point(self, s: float) -> complex:
        theta = self.angle0 + s * (self.angle1 - self.angle0)
        return self.center + self.radius * cmath.exp(1j * theta)

    def velocity(self, s: float) -> complex:
        theta = self.angle0 + s * (self.angle1 - self.angle0)
        return 1j * (self.angle1 - self.angle0) * self.radius * cmath.exp(1j * theta)

    def reversed(self) -> "ArcSegment":
        return ArcSegment(self.center, self.radius, self.angle1, self.angle0)

    def distance_to(self, q: complex) -> float:
        rel = q - self.center
        if abs(rel) == 0:
            return self.radius
        psi = cmath.phase(rel)
        a0, a1 = self.angle0, self.angle1
        span = a1 - a0
        frac = (psi - a0) / span if span != 0 else -1.0
        # account for 2 pi wraps of the query angle
        candidates = [frac + k * 2 * math.pi / span for k in (-1, 0, 1)] if span else []
        if any(0.0 <= f <= 1.0 for f in candidates):
            return abs(abs(rel) - self.radius)
        return min(abs(q - self.point(0.0)), abs(q - self.point(1.0)))

    def to_json(self) -> dict:
        return {
            "type": "arc",
            "center": [self.center.real, self.center.imag],
            "radius": self.radius,
            "angles": [self.angle0, self.angle1],
        }


Segment = LineSegment | ArcSegment


class ParamPath:
    """Piecewise path, parametrized over [0,1] proportionally to arc length.

    Consecutive segments must share endpoints; a closed path returns to its
    start.  ``orientation`` records whether the path is a reversal: the
    eigenvalue-branch seed follows it, making periods odd under reversal.
    """

    def __init__(self, segments: Sequence[Segment], closed: bool = False, orientation: int = 1):
        segments = tuple(segments)
        if not segments:
            raise ValueError("a path needs at least one segment")
        scale = max(1.0, max(abs(s.point(0.0)) + abs(s.point(1.0)) for s in segments))
        for a, b in zip(segments, segments[1:]):
            if abs(a.point(1.0) - b.point(0.0)) > 1e-12 * scale:
                raise ValueError("consecutive segments do not share endpoints")
        if closed and abs(segments[-1].point(1.0) - segments[0].point(0.0)) > 1e-12 * scale:
            raise ValueError("closed path must end where it starts")
        self.segments = segments
        self.closed = closed
        self.orientation = 1 if orientation >= 0 else -1
        lengths = [s.length() for s in segments]
        if any(L <= 0 for L in lengths):
            raise ValueError("zero-length path segment")
        total = sum(lengths)
        self.total_length = total
        breaks = [0.0]
        for L in lengths:
            breaks.append(breaks[-1] + L / total)
        breaks[-1] = 1.0
        self.breaks = breaks

    # -- constructors --------------------------------------------------------

    @classmethod
    def from_points(cls, points: Sequence[complex], closed: bool = False) -> "ParamPath":
        pts = [complex(p) for p in points]
        if closed and pts[-1] != pts[0]:
            pts.append(pts[0])
        return cls(
            [LineSegment(a, b) for a, b in zip(pts, pts[1:])],
            closed=closed,
        )

    @classmethod
    def segment(cls, start: complex, end: complex) -> "ParamPath":
        return cls([LineSegment(complex(start), complex(end))])

    @classmethod
    def circle(cls, center: complex = 0j, radius: float = 1.0) -> "ParamPath":
        return cls([ArcSegment(complex(center), radius, 0.0, 2 * math.pi)], closed=True)

    def reversed(self) -> "ParamPath":
        return ParamPath(
            [s.reversed() for s in reversed(self.segments)],
            closed=self.closed,
            orientation=-self.orientation,
        )

    # -- evaluation ------------------------------------------------------------

    def _locate(self, t: float) -> Tuple[int, float, float]:
        t = min(1.0, max(0.0, t))
        k = min(bisect_right(self.breaks, t) - 1, len(self.segments) - 1)
        t0, t1 = self.breaks[k], self.breaks[k + 1]
        return k, (t - t0) / (t1 - t0), t1 - t0

    def point(self, t: float) -> complex:
        k, s, _dt = self._locate(t)
        return self.segments[k].point(s)

    def velocity(self, t: float) -> complex:
        k, s, dt = self._locate(t)
        return self.segments[k].velocity(s) / dt

    def check_clearance(self, punctures, clearance: float = DEFAULT_CLEARANCE) -> None:
        for p in punctures:
            q = p.to_complex() if hasattr(p, "to_complex") else complex(p)
            d = min(seg.distance_to(q) for seg in self.segments)
            if d < clearance:
                raise ClearanceViolated(
                    f"path passes within {d:.3e} of puncture {q} (clearance {clearance:.1e})"
                )

    # -- serialization -----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "schema": "nilwkb/1",
            "segments": [s.to_json() for s in self.segments],
            "closed": self.closed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ParamPath":
        segs: List[Segment] = []
        for s in data["segments"]:
            if s["type"] == "line":
                segs.append(LineSegment(complex(*s["from"]), complex(*s["to"])))
            elif s["type"] == "arc":
                segs.append(
                    ArcSegment(complex(*s["center"]), float(s["radius"]), *map(float, s["angles"]))
                )
            else:
                raise ValueError(f"unknown segment type {s['type']!r}")
        return cls(segs, closed=bool(data.get("closed", False)))

    def __repr__(self):
        return f"ParamPath({len(self.segments)} segments, closed={self.closed})"


# ---------------------------------------------------------------------------
# transport
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HolonomySample:
    """One transported family member: eps, fundamental matrix at t=1, trace."""

    epsilon: float
    holonomy: np.ndarray
    trace: complex
    est_error: float


def pullback(
    family: ConnectionFamily,
    gamma: ParamPath,
    epsilon: float,
    clearance: float = DEFAULT_CLEARANCE,
) -> Callable[[float], np.ndarray]:
    """t -> sum over terms of eps^exponent (P(gamma(t)) gamma'(t) + Q(gamma(t)) conj(gamma'(t))).

    Entries are compiled to double-precision closures once; fractional term
    exponents become real powers of the (positive) parameter here and only
    here.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    gamma.check_clearance(family.punctures, clearance)
    n = family.n
    compiled = []
    for _name, exponent, form in family.terms():
        if form.is_zero:
            continue
        compiled.append(
            (
                float(epsilon) ** float(exponent),
                form.dz_part.compiled(),
                form.dzbar_part.compiled(),
            )
        )

    def M(t: float) -> np.ndarray:
        z = gamma.point(t)
        v = gamma.velocity(t)
        vv = v.conjugate()
        out = np.zeros((n, n), dtype=complex)
        for coeff, dz_fns, dzbar_fns in compiled:
            for i in range(n):
                row_dz = dz_fns[i]
                row_dzbar = dzbar_fns[i]
                for j in range(n):
                    acc = 0j
                    if row_dz[j] is not None:
                        acc += row_dz[j](z) * v
                    if row_dzbar[j] is not None:
                        acc += row_dzbar[j](z) * vv
                    if acc:
                        out[i, j] += coeff * acc
        return out

    return M


def _integrate(M, breaks, n, rtol) -> Tuple[np.ndarray, int]:
    y = np.eye(n, dtype=complex).reshape(-1)
    steps = 0

    def rhs(t, yv):
        return (-M(t) @ yv.reshape(n, n)).reshape(-1)

    for t0, t1 in zip(breaks, breaks[1:]):
        sol = solve_ivp(
            rhs,
            (t0, t1),
            y,
            method="DOP853",
            rtol=rtol,
            atol=rtol * 1e-3,
            dense_output=False,
        )
        if sol.status != 0:
            raise StiffnessBudgetExceeded(f"integrator failed on [{t0}, {t1}]: {sol.message}")
        steps += len(sol.t)
        if steps > STEP_BUDGET:
            raise StiffnessBudgetExceeded(f"step budget {STEP_BUDGET} exceeded")
        y = sol.y[:, -1]
    return y.reshape(n, n), steps


def transport(
    family: ConnectionFamily,
    gamma: ParamPath,
    epsilon: float,
    rel_tol: float = 1e-10,
) -> HolonomySample:
    """Fundamental matrix S(1) of s' = -M(t)s, S(0) = 1, along the path.

    Integrates with the requested tolerance and again a hundredfold tighter;
    the Frobenius distance between the two runs is the reported error bound
    and the tighter run is the reported matrix.
    """
    M = pullback(family, gamma, epsilon)
    n = family.n
    coarse_tol = max(rel_tol, 3e-14)
    fine_tol = max(rel_tol * 1e-2, 3e-14)
    coarse, _ = _integrate(M, gamma.breaks, n, coarse_tol)
    fine, _ = _integrate(M, gamma.breaks, n, fine_tol)
    diff = float(np.linalg.norm(coarse - fine))
    scale = float(np.linalg.norm(fine))
    est = max(diff, 2.3e-16 * (1.0 + scale))
    return HolonomySample(
        epsilon=float(epsilon),
        holonomy=fine,
        trace=complex(np.trace(fine)),
        est_error=est,
    )


def transport_grid(
    family: ConnectionFamily,
    gamma: ParamPath,
    epsilons: Sequence[float],
    rel_tol: float = 1e-10,
    workers: Optional[int] = None,
) -> List[HolonomySample]:
    """Transport over a parameter grid; results keyed to input order.

    Grid members are independent; NILWKB_THREADS (or ``workers``) caps the
    worker pool.  Output ordering never depends on completion order.
    """
    if workers is None:
        workers = int(os.environ.get("NILWKB_THREADS", "1"))
    eps_list = list(epsilons)
    if workers <= 1 or len(eps_list) <= 1:
        return [transport(family, gamma, e, rel_tol) for e in eps_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(transport, family, gamma, e, rel_tol) for e in eps_list]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# spectral tracking
# ---------------------------------------------------------------------------


class EigenvalueTrack:
    """Continuously tracked eigenvalues of the pulled-back field along a path.

    Rank 2: mu(t) = sqrt(q(gamma(t)) gamma'(t)^2) with q = Tr(Phi^2)/2, the
    branch seeded by Re(orientation * mu(0)) > 0 and continued by angle
    unwinding on an adaptively refined grid.  Higher rank: numerically
    ordered-by-real-part eigenvalue paths with nearest-matching continuity.
    """

    BRANCH_TOL = 1e-12

    def __init__(self, Phi: MatrixOneForm, gamma: ParamPath, grid_size: int = 257):
        self.n = Phi.n
        self.gamma = gamma
        if self.n == 2:
            q = (Phi.dz_part @ Phi.dz_part).trace().scale(Fraction(1, 2))
            qf = q.compiled()
            self._f = lambda t: qf(gamma.point(t)) * gamma.velocity(t) ** 2
            self._build_sqrt_grid(grid_size)
        else:
            mats = Phi.dz_part.compiled()
            if not Phi.dzbar_part.is_zero:
                raise ValueError("eigenvalue tracking expects a (1,0)-form field")

            def matval(t):
                z = gamma.point(t)
                v = gamma.velocity(t)
                out = np.zeros((self.n, self.n), dtype=complex)
                for i in range(self.n):
                    for j in range(self.n):
                        if mats[i][j] is not None:
                            out[i, j] = mats[i][j](z) * v
                return out

            self._matval = matval
            self._build_eig_grid(grid_size)

    # -- rank 2 ------------------------------------------------------------------

    def _build_sqrt_grid(self, grid_size: int):
        ts = sorted(set(np.linspace(0.0, 1.0, grid_size)) | set(self.gamma.breaks))
        fs = [self._f(t) for t in ts]
        # adaptive refinement: bounded angle increments between grid nodes
        changed = True
        depth = 0
        while changed and depth < 14:
            changed = False
            new_ts, new_fs = [ts[0]], [fs[0]]
            for t0, t1, f0, f1 in zip(ts, ts[1:], fs, fs[1:]):
                if abs(f0) > 0 and abs(f1) > 0:
                    dphi = abs(cmath.phase(f1 / f0))
                    if dphi > 0.5 and t1 - t0 > 1e-9:
                        tm = 0.5 * (t0 + t1)
                        new_ts.append(tm)
                        new_fs.append(self._f(tm))
                        changed = True
                new_ts.append(t1)
                new_fs.append(f1)
            ts, fs = new_ts, new_fs
            depth += 1
        scale = max(abs(f) for f in fs)
        if scale == 0 or min(abs(f) for f in fs) < 1e-12 * scale:
            raise BranchPointOnPath("eigenvalues collide (discriminant vanishes) on the path")
        args = [cmath.phase(fs[0])]
        for f0, f1 in zip(fs, fs[1:]):
            d = cmath.phase(f1 / f0)
            args.append(args[-1] + d)
        self._ts = ts
        self._fs = fs
        self._args = args
        mu0 = cmath.sqrt(abs(fs[0])) * cmath.exp(0.5j * args[0])
        seed = self.gamma.orientation * mu0
        if abs(seed.real) <= self.BRANCH_TOL * abs(mu0):
            raise TieAtStart("Re mu(0) vanishes within tolerance; cannot seed the branch")
        self._sign = 1.0 if seed.real > 0 else -1.0

    def _mu2(self, t: float) -> complex:
        k = min(bisect_right(self._ts, t) - 1, len(self._ts) - 2)
        f = self._f(t)
        base = self._fs[k]
        arg = self._args[k] + cmath.phase(f / base)
        return self._sign * math.sqrt(abs(f)) * cmath.exp(0.5j * arg)

    # -- higher rank -----------------------------------------------------------------

    def _build_eig_grid(self, grid_size: int):
        from scipy.optimize import linear_sum_assignment

        ts = sorted(set(np.linspace(0.0, 1.0, grid_size)) | set(self.gamma.breaks))
        rows = []
        prev = None
        for t in ts:
            lam = np.linalg.eigvals(self._matval(t))
            if prev is None:
                lam = lam[np.argsort(-lam.real)]
                if self.gamma.orientation < 0:
                    lam = lam[::-1]
            else:
                cost = np.abs(lam[None, :] - prev[:, None])
                _r, c = linear_sum_assignment(cost)
                lam = lam[c]
            rows.append(lam)
            prev = lam
        spread = max(np.abs(np.array(rows)).max(), 1e-300)
        mingap = np.abs(np.diff(np.sort(np.array(rows).real, axis=1), axis=1)).min()
        if mingap < 1e-12 * spread:
            # collisions of real parts are allowed; full collisions are not
            pair_dist = min(
                np.abs(row[i] - row[j])
                for row in rows
                for i in range(self.n)
                for j in range(i + 1, self.n)
            )
            if pair_dist < 1e-12 * spread:
                raise BranchPointOnPath("eigenvalues collide on the path")
        self._ts = ts
        self._rows = rows

    def _values_n(self, t: float) -> np.ndarray:
        k = min(bisect_right(self._ts, t) - 1, len(self._ts) - 2)
        from scipy.optimize import linear_sum_assignment

        lam = np.linalg.eigvals(self._matval(t))
        prev = self._rows[k]
        cost = np.abs(lam[None, :] - prev[:, None])
        _r, c = linear_sum_assignment(cost)
        return lam[c]

    # -- public surface ----------------------------------------------------------------

    def __call__(self, t: float) -> complex:
        if self.n == 2:
            return self._mu2(t)
        return self._values_n(t)[0]

    def values(self, t: float) -> np.ndarray:
        if self.n == 2:
            mu = self._mu2(t)
            return np.array([mu, -mu])
        return self._values_n(t)

    def grid(self) -> List[float]:
        return list(self._ts)


def spectral_eigenvalue_track(Phi: MatrixOneForm, gamma: ParamPath) -> EigenvalueTrack:
    return EigenvalueTrack(Phi, gamma)


@dataclass(frozen=True)
class WkbCurveCheck:
    is_wkb: bool
    margin: float


def is_wkb_curve(Phi: MatrixOneForm, gamma: ParamPath, track: Optional[EigenvalueTrack] = None) -> WkbCurveCheck:
    """Strict positivity of the tracked real part (rank 2) or of all
    consecutive real-part gaps (higher rank), with refinement near minima.

    A branch tie at the start (Re mu(0) = 0) already decides the answer: the
    path is not a WKB curve, margin zero.
    """
    if track is None:
        try:
            track = EigenvalueTrack(Phi, gamma)
        except TieAtStart:
            return WkbCurveCheck(is_wkb=False, margin=0.0)

    if track.n == 2:
        margin_at = lambda t: track(t).real
        scale_vals = [abs(track(t)) for t in track.grid()]
    else:
        def margin_at(t):
            re = np.sort(track.values(t).real)[::-1]
            return float(np.min(re[:-1] - re[1:]))

        scale_vals = [float(np.abs(track.values(t)).max()) for t in track.grid()]

    ts = list(track.grid())
    vals = [margin_at(t) for t in ts]
    for _ in range(16):
        k = int(np.argmin(vals))
        inserted = False
        for lo, hi in ((max(k - 1, 0), k), (k, min(k + 1, len(ts) - 1))):
            if hi > lo and ts[hi] - ts[lo] > 1e-10:
                tm = 0.5 * (ts[lo] + ts[hi])
                ts.insert(lo + 1, tm)
                vals.insert(lo + 1, margin_at(tm))
                inserted = True
                break
        if not inserted:
            break
    margin = float(min(vals))
    tol = 1e-12 * max(scale_vals)
    return WkbCurveCheck(is_wkb=margin > tol, margin=margin)


def period(
    Phi: MatrixOneForm,
    gamma: ParamPath,
    track: Optional[EigenvalueTrack] = None,
    abs_tol: float = 1e-10,
) -> complex:
    """Adaptive quadrature of the tracked eigenvalue over the path.

    Warns (but still integrates) when the path fails the WKB predicate.
    """
    track = track or EigenvalueTrack(Phi, gamma)
    check = is_wkb_curve(Phi, gamma, track)
    if not check.is_wkb:
        warnings.warn(
            f"path is not a WKB curve (margin {check.margin:.3e}); period computed anyway",
            stacklevel=2,
        )
    total = 0j
    for t0, t1 in zip(gamma.breaks, gamma.breaks[1:]):
        re, _ = quad(lambda t: track(t).real, t0, t1, epsabs=abs_tol * 1e-2, epsrel=1e-12, limit=200)
        im, _ = quad(lambda t: track(t).imag, t0, t1, epsabs=abs_tol * 1e-2, epsrel=1e-12, limit=200)
        total += re + 1j * im
    return total


# ---------------------------------------------------------------------------
# rate fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WkbFit:
    """Asymptotic rate fit: log trace = Z * eps^-p + offset, anchored on the tail.

    ``residual`` is the RMS of the complex log-trace misfit over the whole
    sample set; candidates are compared by that number.  free_fit_exponent is
    the log-log slope of log|trace| against 1/eps: an exponent estimate that
    assumes no candidate list.
    """

    exponent_p: Fraction
    Z: complex
    offset: complex
    residual: float
    free_fit_exponent: float
    candidates: Tuple[Tuple[Fraction, float], ...]

    def to_json(self) -> dict:
        return {
            "schema": "nilwkb/1",
            "exponent": str(self.exponent_p),
            "Z": [self.Z.real, self.Z.imag],
            "offset": [self.offset.real, self.offset.imag],
            "residual": self.residual,
            "free_fit_exponent": self.free_fit_exponent,
            "candidates": [[str(p), r] for p, r in self.candidates],
        }


def _unwound_log(traces: Sequence[complex]) -> np.ndarray:
    """Complex log along the sample sequence, phase unwound continuously."""
    out = []
    prev_arg = None
    for T in traces:
        mag = math.log(abs(T))
        a = cmath.phase(T)
        if prev_arg is None:
            arg = a
        else:
            arg = prev_arg + (a - prev_arg + math.pi) % (2 * math.pi) - math.pi
        out.append(mag + 1j * arg)
        prev_arg = arg
    return np.array(out)


def _tail_linear_fit(u: np.ndarray, y: np.ndarray, tail: int) -> Tuple[complex, complex, float]:
    order = np.argsort(u)
    uu, yy = u[order], y[order]
    ut, yt = uu[-tail:], yy[-tail:]
    A = np.vstack([ut, np.ones_like(ut)]).T.astype(complex)
    coef, *_ = np.linalg.lstsq(A, yt, rcond=None)
    Z, c = complex(coef[0]), complex(coef[1])
    resid = float(np.sqrt(np.mean(np.abs(yy - (Z * uu + c)) ** 2)))
    return Z, c, resid


def _free_fit_exponent(eps: np.ndarray, traces: Sequence[complex]) -> float:
    """Log-log slope of log|T| against 1/eps, with one outlier-trim pass."""
    logmag = np.array([math.log(abs(T)) if T != 0 else -math.inf for T in traces])
    good = logmag > 0
    if good.sum() < 3:
        return math.nan
    x = np.log(1.0 / eps[good])
    y = np.log(logmag[good])
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    med = np.median(resid)
    mad = np.median(np.abs(resid - med)) + 1e-30
    keep = np.abs(resid - med) < 5 * mad
    if 3 <= keep.sum() < len(x):
        coef, *_ = np.linalg.lstsq(A[keep], y[keep], rcond=None)
    return float(coef[0])


def wkb_fit(
    samples: Sequence[HolonomySample],
    candidate_exponents: Optional[Sequence[Fraction]] = None,
    tail: Optional[int] = None,
) -> WkbFit:
    """Select the growth exponent and rate constant from transported samples.

    For each candidate p the model log T = Z eps^-p + c is fitted by least
    squares on the asymptotic tail (the largest eps^-p; the limit statement
    is exact only there), and candidates are ranked by the RMS misfit over
    the whole sample set.  The complex log is unwound along the
    decreasing-eps sequence.
    """
    samples = sorted(samples, key=lambda s: -s.epsilon)
    eps = np.array([s.epsilon for s in samples], dtype=float)
    if len(samples) < 6:
        raise InsufficientSamples("need at least 6 samples")
    if len(set(eps)) != len(eps):
        raise InsufficientSamples("epsilon values must be strictly decreasing")
    if eps[0] / eps[-1] < 8.0:
        raise InsufficientSamples("epsilon range must span at least a factor 8")
    traces = [s.trace for s in samples]
    if any(T == 0 for T in traces):
        raise NonDecayingSequence("zero trace in the sample set")
    if abs(traces[-1]) <= abs(traces[0]):
        raise NonDecayingSequence("traces do not grow as epsilon decreases")

    n = samples[0].holonomy.shape[0] if samples[0].holonomy is not None else 2
    if candidate_exponents is None:
        candidate_exponents = [Fraction(1, k) for k in range(1, max(2, n) + 1)]
    if tail is None:
        tail = max(3, len(samples) // 4)

    y = _unwound_log(traces)
    results = []
    for p in candidate_exponents:
        u = eps ** (-float(p))
        Z, c, resid = _tail_linear_fit(u, y, tail)
        results.append((Fraction(p), Z, c, resid))
    results.sort(key=lambda r: r[3])
    best_p, best_Z, best_c, best_resid = results[0]
    return WkbFit(
        exponent_p=best_p,
        Z=best_Z,
        offset=best_c,
        residual=best_resid,
        free_fit_exponent=_free_fit_exponent(eps, traces),
        candidates=tuple((p, r) for p, _z, _c, r in results),
    )
