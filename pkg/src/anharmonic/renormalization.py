"""Frequency renormalization of the hbar-series and choice of the trial frequency.

The physical frequency is split as ``omega^2 = omega0^2 + w_s^2 hbar^s`` where
``s`` is the lowest order at which anharmonic corrections appear. The
partial sums ``S_N(omega0)`` then depend on ``omega0``, which is fixed by a
scheme: a root of ``E_N`` (minimal difference) or a stationary point of
``E_N`` or ``S_N`` (minimal sensitivity).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np
from scipy import optimize

from .errors import DegenerateObjective, NoRootFound, ValidationError
from .numeric import DOUBLE, NumericContext
from .potential import PotentialSpec
from .series import (
    DEFAULT_CONTEXT,
    EnergySeries,
    OmegaExpansion,
    compute_series,
    energies_double,
)

MINIMAL_DIFFERENCE = "minimal-difference"
MINIMAL_SENSITIVITY_LAST = "minimal-sensitivity-last"
MINIMAL_SENSITIVITY_SUM = "minimal-sensitivity-sum"
ZERO_CORRECTIONS = "zero-corrections"
SCHEMES = (MINIMAL_DIFFERENCE, MINIMAL_SENSITIVITY_LAST, MINIMAL_SENSITIVITY_SUM, ZERO_CORRECTIONS)

FLATTEST = "flattest"
SMALLEST = "smallest"
ALL = "all"
ROOT_POLICIES = (FLATTEST, SMALLEST, ALL)

DOUBLE_DIGITS = 15


def renormalization_order(potential: PotentialSpec) -> int:
    """Lowest hbar-order ``s`` carried by the anharmonic terms.

    After ``x -> sqrt(hbar) x`` a coupling ``f_i`` comes with ``hbar^(i/2)``,
    and odd ``i`` only contribute in pairs. ``s`` is the gcd of the attainable
    exponents: 1 for cubic or quartic terms, 2 for the pure sextic. A
    harmonic potential gets 2.
    """
    exps = [i // 2 for i in potential.couplings if i % 2 == 0]
    odd = [i for i in potential.couplings if i % 2]
    exps += [(a + b) // 2 for a in odd for b in odd]
    if not exps:
        return 2
    g = 0
    for e in exps:
        g = gcd(g, e)
    return g


def renormalized_series(potential: PotentialSpec, n: int, K: int, omega: OmegaExpansion,
                        ctx: NumericContext = DEFAULT_CONTEXT) -> EnergySeries:
    """E_1..E_K as functions of the trial frequency in ``omega``."""
    return compute_series(potential, n, K, omega, ctx)[1]


def sextic_closed_form(n: int, lam, omega0, ctx: NumericContext | None = None) -> list:
    """[E1, E3, E5, E7] of the renormalized sextic series (hbar = m = omega = 1).

    ``omega0 = 1`` gives the plain perturbation series.
    """
    ctx = ctx or NumericContext()
    with ctx.local():
        n = ctx.number(n)
        lam = ctx.number(lam)
        w = ctx.number(omega0)
        w2 = w * w
        d = 1 - w2
        p3 = 3 + 2 * n + 2 * n**2
        p5 = 3495 + 4538 * n + 5324 * n**2 + 1572 * n**3 + 786 * n**4
        p7 = (247935 + 444014 * n + 600050 * n**2 + 323868 * n**3 + 191424 * n**4
              + 35388 * n**5 + 11796 * n**6)
        a = 1 + 2 * n
        e1 = w * (n + ctx.number(Fraction(1, 2)))
        e3 = a * (5 * lam * p3 + 4 * w2 * d) / (16 * w**3)
        e5 = -a * (lam**2 * p5 + 120 * lam * w2 * d * p3 + 16 * w2**2 * d**2) / (256 * w**7)
        e7 = a * (5 * lam**3 * p7 + 28 * lam**2 * w2 * d * p5 + 1200 * lam * w2**2 * d**2 * p3
                  + 64 * w2**3 * d**3) / (2048 * w**11)
    return [e1, e3, e5, e7]


@dataclass(frozen=True)
class SchemeSpec:
    """How to fix the trial frequency.

    ``kind`` is one of `SCHEMES`; ``root_selection`` one of `ROOT_POLICIES`.
    ``search_interval=None`` uses `default_search_interval`. ``tolerance`` is
    the final bracket width relative to ``max(1, omega0)``; ``None`` picks
    1e-10 in double mode and ``10**(-digits/2)`` otherwise. ``turning_points`` additionally
    admits local minima of ``|g|`` that do not cross zero.
    """

    kind: str = MINIMAL_SENSITIVITY_SUM
    order_N: int = 3
    root_selection: str = FLATTEST
    search_interval: tuple | None = None
    grid_points: int = 256
    tolerance: float | None = None
    turning_points: bool = False
    turning_point_threshold: float = 1e-3

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise ValidationError(f"unknown scheme {self.kind!r}; expected one of {SCHEMES}")
        if self.root_selection not in ROOT_POLICIES:
            raise ValidationError(f"unknown root policy {self.root_selection!r}")
        if int(self.order_N) != self.order_N or self.order_N < 1:
            raise ValidationError("order_N must be a positive integer")
        if self.grid_points < 16:
            raise ValidationError("grid_points must be at least 16")
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValidationError("tolerance must be positive")
        if self.search_interval is not None:
            a, b = self.search_interval
            if not 0 < a < b:
                raise ValidationError("search interval must satisfy 0 < a < b")


@dataclass
class Candidate:
    omega0: float
    flatness: float
    objective: float
    partial_sum: float
    kind: str = "root"
    converged: bool = True


@dataclass
class OptimizationResult:
    omega0: object
    candidates: list
    partial_sums: list
    scheme: SchemeSpec
    closure_order: int
    interval: tuple
    chosen: Candidate | None = None
    series: EnergySeries | None = None

    @property
    def value(self):
        return self.partial_sums[-1]


def default_search_interval(potential: PotentialSpec, n: int) -> tuple:
    """(0.1, 20) scaled by max(1, (lambda (2n+1)^2)^(1/4)), lambda = 2 f_4.

    For potentials without a sextic term the largest coupling of even index
    plays the role of ``lambda``.
    """
    lam = 2 * float(potential.coupling(4))
    if lam == 0:
        lam = max((abs(2 * float(f)) for i, f in potential.couplings.items() if i % 2 == 0), default=0.0)
    scale = max(1.0, (lam * (2 * n + 1) ** 2) ** 0.25) * float(potential.omega)
    return 0.1 * scale, 20.0 * scale


class _Evaluator:
    """Energies and partial sums as functions of omega0 under the closure."""

    def __init__(self, potential, n, N, s, ctx):
        self.potential, self.n, self.N, self.s, self.ctx = potential, n, N, s, ctx
        self.double = ctx.mode == DOUBLE
        self.digits = DOUBLE_DIGITS if self.double else ctx.precision_digits
        self.w2 = float(potential.omega_squared)
        self.hbar = float(potential.hbar)
        self.cache = {}

    def num(self, w):
        if self.double:
            return float(w)
        with self.ctx.local():
            return self.ctx.number(w)

    def energies(self, w):
        key = w
        if key in self.cache:
            return self.cache[key]
        if self.double:
            corr = (self.w2 - w * w) / self.hbar**self.s
            E = energies_double(self.potential, self.n, self.N, w, {self.s: corr})
            h = self.hbar ** np.arange(1, self.N + 1)
            out = (E, np.cumsum(E * h))
        else:
            omega = OmegaExpansion.one_parameter(self.potential, w, self.s, self.ctx)
            series = compute_series(self.potential, self.n, self.N, omega, self.ctx)[1]
            out = (series.orders, series.partial_sums())
        if len(self.cache) > 4096:
            self.cache.clear()
        self.cache[key] = out
        return out

    def E_N(self, w):
        return self.energies(w)[0][self.N - 1]

    def S_N(self, w):
        return self.energies(w)[1][self.N - 1]

    def step(self, w, power):
        with self.ctx.local():
            return w * self.num(10.0) ** (-self.digits / power) if not self.double else w * 10.0 ** (-self.digits / power)

    def derivative(self, fn, w):
        h = self.step(w, 3)
        with self.ctx.local():
            return (fn(w + h) - fn(w - h)) / (2 * h)

    def curvature(self, w):
        h = self.step(w, 5)
        with self.ctx.local():
            return (self.S_N(w + h) - 2 * self.S_N(w) + self.S_N(w - h)) / (h * h)


def _objective(ev: _Evaluator, kind: str):
    if kind in (MINIMAL_DIFFERENCE, ZERO_CORRECTIONS):
        return ev.E_N
    if kind == MINIMAL_SENSITIVITY_LAST:
        return lambda w: ev.derivative(ev.E_N, w)
    return lambda w: ev.derivative(ev.S_N, w)


def _finite(v) -> bool:
    try:
        return math.isfinite(float(v))
    except (OverflowError, ValueError):
        return False


def _bisect(g, a, b, ga, gb, tol, ev):
    """Bisection on a sign change down to a bracket width of ``tol * max(1, omega0)``.

    Far out in the series the partial sum is so flat that ``|g|`` alone is a
    poor stopping rule, so the bracket width decides. Returns
    ``(omega0, g, converged)``; ``converged`` is false if a non-finite value
    or the resolution floor of the arithmetic ended the search.
    """
    floor = 4 * 10.0 ** (-ev.digits)
    for _ in range(64 * ev.digits):
        with ev.ctx.local():
            mid = (a + b) / 2
        gm = g(mid)
        if not _finite(gm):
            return mid, gm, False
        width = float(b - a)
        if gm == 0 or width <= tol * max(1.0, float(mid)):
            return mid, gm, True
        if width <= floor * float(mid):
            return mid, gm, False
        if (gm > 0) == (ga > 0):
            a, ga = mid, gm
        else:
            b = mid
    return mid, gm, False


def find_omega0(potential: PotentialSpec, n: int, scheme: SchemeSpec,
                ctx: NumericContext = NumericContext(DOUBLE), closure_order: int | None = None) -> OptimizationResult:
    """Scan, bracket and refine the trial frequency.

    The objective ``g`` is sampled on a uniform grid; every sign change is
    refined by bisection and scored by ``|S_N''|`` (second central
    difference). Non-finite samples break brackets.

    Raises
    ------
    DegenerateObjective
        ``g`` vanishes on the whole grid.
    NoRootFound
        No sign change (and no admissible turning point) on the grid.
    """
    s = closure_order or renormalization_order(potential)
    N = scheme.order_N
    kind = scheme.kind
    if kind == ZERO_CORRECTIONS:
        # one free parameter: annul the first correction that depends on it
        N = s + 1
    ev = _Evaluator(potential, n, N, s, ctx)
    tol = scheme.tolerance if scheme.tolerance is not None else (
        1e-10 if ev.double else 10.0 ** (-ctx.precision_digits / 2))
    a, b = scheme.search_interval or default_search_interval(potential, n)
    g = _objective(ev, kind)

    grid = [a + (b - a) * j / (scheme.grid_points - 1) for j in range(scheme.grid_points)]
    if not ev.double:
        grid = [ev.num(Fraction(a) + (Fraction(b) - Fraction(a)) * j / (scheme.grid_points - 1))
                for j in range(scheme.grid_points)]
    vals = [g(w) for w in grid]
    finite = [float(v) for v in vals if _finite(v)]
    if finite and max(abs(v) for v in finite) == 0.0 or (
            finite and max(abs(v) for v in finite) <= 10.0 ** (-ev.digits) * max(1.0, abs(float(ev.S_N(grid[0]))))):
        raise DegenerateObjective(f"objective vanishes identically on [{a}, {b}] (N={N})")

    candidates = []
    for j in range(len(grid) - 1):
        ga, gb = vals[j], vals[j + 1]
        if not (_finite(ga) and _finite(gb)):
            continue
        if ga == 0:
            w, gw, ok = grid[j], ga, True
        elif (ga > 0) != (gb > 0) and gb != 0:
            w, gw, ok = _bisect(g, grid[j], grid[j + 1], ga, gb, tol, ev)
        else:
            continue
        candidates.append(_score(ev, w, gw, "root", ok))

    if scheme.turning_points and kind != MINIMAL_DIFFERENCE:
        candidates += _turning_points(ev, g, grid, vals, scheme.turning_point_threshold)

    if not candidates:
        ext = (min(finite), max(finite)) if finite else (math.nan, math.nan)
        raise NoRootFound(
            f"no sign change of the {kind} objective on [{a:.6g}, {b:.6g}] with {scheme.grid_points} points; "
            f"objective range [{ext[0]:.3g}, {ext[1]:.3g}]",
            interval=(a, b), extrema=ext)

    candidates.sort(key=lambda c: c.omega0)
    if scheme.root_selection == SMALLEST:
        chosen = candidates[0]
    else:
        chosen = min(candidates, key=lambda c: (abs(c.flatness), c.omega0))
    w = chosen.omega0
    if ev.double:
        series = EnergySeries(n, [float(e) for e in ev.energies(w)[0]], float(potential.hbar), ctx)
    else:
        omega = OmegaExpansion.one_parameter(potential, w, s, ctx)
        series = compute_series(potential, n, N, omega, ctx)[1]
    return OptimizationResult(w, candidates, series.partial_sums(), scheme, s, (a, b), chosen, series)


def _score(ev: _Evaluator, w, gw, kind, ok) -> Candidate:
    return Candidate(w, ev.curvature(w), gw, ev.S_N(w), kind, ok)


def _turning_points(ev, g, grid, vals, threshold):
    out = []
    for j in range(1, len(grid) - 1):
        trio = vals[j - 1: j + 2]
        if not all(_finite(v) for v in trio):
            continue
        if not ((trio[0] > 0) == (trio[1] > 0) == (trio[2] > 0)):
            continue
        if not abs(trio[1]) < min(abs(trio[0]), abs(trio[2])):
            continue
        lo, hi = float(grid[j - 1]), float(grid[j + 1])
        res = optimize.minimize_scalar(lambda w: abs(float(g(ev.num(w)))), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-10 * hi})
        w = ev.num(res.x)
        gw = g(w)
        S = ev.S_N(w)
        if S != 0 and abs(float(gw) * float(w) / float(S)) <= threshold:
            out.append(_score(ev, w, gw, "turning-point", True))
    return out


def zero_corrections(potential: PotentialSpec, n: int, N: int, ctx: NumericContext = DEFAULT_CONTEXT,
                     omega0=None) -> OmegaExpansion:
    """Corrections w_1^2..w_{N-1}^2 that annul E_2..E_N at a given ``omega0``.

    ``E_{k+1}`` depends on ``w_k^2`` affinely (it enters only through index
    ``2k`` of row ``k``), so each order is a linear solve from two
    evaluations, checked afterwards.
    """
    if int(N) != N or N < 2:
        raise ValidationError("N must be an integer >= 2")
    w0 = potential.omega if omega0 is None else omega0
    with ctx.local():
        corrections = {}
        for k in range(1, N):
            def e_next(x):
                trial = OmegaExpansion(w0, {**corrections, k: x})
                return compute_series(potential, n, k + 1, trial, ctx)[1].orders[k]

            e0 = e_next(ctx.number(0))
            e1 = e_next(ctx.number(1))
            slope = e1 - e0
            if slope == 0:
                if e0 == 0:
                    corrections[k] = ctx.number(0)
                    continue
                raise NoRootFound(f"E_{k + 1} does not depend on w_{k}^2", order=k)
            x = -e0 / slope
            resid = e_next(x)
            scale = max(abs(e0), abs(e1), 1)
            limit = 0 if ctx.exact else scale * 10.0 ** (-(DOUBLE_DIGITS if ctx.mode == DOUBLE else ctx.precision_digits) + 6)
            if not _finite(resid) or abs(resid) > limit:
                raise NoRootFound(f"E_{k + 1} could not be annulled (residual {float(resid):.3g})", order=k)
            corrections[k] = x
    return OmegaExpansion(w0, corrections)
