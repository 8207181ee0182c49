"""Bound states of -hbar^2/(2m) U'' + V U = E U by Numerov shooting.

The eigenvalue is first isolated by Sturm node counting of a single
left-to-right integration, then refined by bisection on the Casoratian of
inward and outward solutions matched at the outermost right turning point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import integrate, optimize

from .errors import BracketFailure, NoConvergence, ValidationError
from .potential import PotentialSpec

SEED = 1e-20
RESCALE = 1e100
DEFAULT_POINTS = 4096


@dataclass(frozen=True)
class ShootingConfig:
    """Parameters of `solve_eigenvalue`; ``None`` entries are chosen automatically."""

    domain_halfwidth: float | None = None
    step: float | None = None
    energy_bracket: tuple | None = None
    target_nodes: int | None = None
    tolerance: float = 1e-11
    max_iterations: int = 400
    refine_grid: bool = True
    max_refinements: int = 6
    match_point_rule: str = "outermost right turning point, Casoratian sign"

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")
        if self.domain_halfwidth is not None and self.domain_halfwidth <= 0:
            raise ValidationError("domain_halfwidth must be positive")
        if self.step is not None:
            if self.step <= 0:
                raise ValidationError("step must be positive")
            if self.domain_halfwidth is not None and not self.step < self.domain_halfwidth / 100:
                raise ValidationError("step must be below L/100")
        if self.energy_bracket is not None:
            lo, hi = self.energy_bracket
            if not lo < hi:
                raise ValidationError("energy bracket must satisfy E_lo < E_hi")


@dataclass
class EigenResult:
    energy: float
    nodes: int
    log_derivative_mismatch: float
    grid: tuple
    energy_change: float = math.nan
    history: list = field(default_factory=list)

    def to_record(self) -> dict:
        L, h = self.grid
        return {"energy": self.energy, "nodes": self.nodes, "mismatch": self.log_derivative_mismatch,
                "L": L, "h": h}


@njit(cache=True)
def _numerov(q, h, u0, u1, rescale):
    # summed form of the three-term recurrence: with z = (1 + h^2 q / 12) u,
    # z[j+1] - z[j] = z[j] - z[j-1] - h^2 q[j] u[j]; this keeps rounding
    # errors from being amplified by 1/h^2 on fine grids
    n = q.shape[0]
    u = np.empty(n)
    f = 1.0 + h * h * q / 12.0
    u[0] = u0
    u[1] = u1
    z = f[1] * u1
    dz = z - f[0] * u0
    for j in range(1, n - 1):
        dz -= h * h * q[j] * u[j]
        z += dz
        u[j + 1] = z / f[j + 1]
        if abs(u[j + 1]) > rescale:
            for i in range(j + 2):
                u[i] /= rescale
            z /= rescale
            dz /= rescale
    return u


def make_grid(L: float, h: float):
    """Uniform grid on [-L, L] with spacing close to ``h``."""
    N = max(int(round(2 * L / h)), 8)
    return np.linspace(-L, L, N + 1), 2 * L / N


def _q(potential: PotentialSpec, E: float, x: np.ndarray) -> np.ndarray:
    m, hb = float(potential.mass), float(potential.hbar)
    return 2 * m * (E - potential.value(x)) / hb**2


def numerov_propagate(potential: PotentialSpec, E: float, grid, direction: str = "left-to-right"):
    """Integrate from one edge of [-L, L] to the other.

    Returns ``(x, u)``. The seeds are ``0`` at the starting edge and ``1e-20``
    one step inside; the running solution is scaled down by positive factors
    whenever it exceeds ``1e100``.
    """
    L, h = grid
    x, h = make_grid(L, h)
    q = _q(potential, E, x)
    if direction == "left-to-right":
        u = _numerov(q, h, 0.0, SEED, RESCALE)
    elif direction == "right-to-left":
        u = _numerov(q[::-1].copy(), h, 0.0, SEED, RESCALE)[::-1]
    else:
        raise ValidationError(f"unknown direction {direction!r}")
    return x, u


def count_nodes(u) -> int:
    """Strict sign changes of ``u``, skipping exact zeros such as the clamped edges."""
    u = np.asarray(u)
    s = np.sign(u[u != 0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _harmonic_scale(potential: PotentialSpec) -> float:
    return float(potential.hbar) * float(potential.omega)


def auto_domain(potential: PotentialSpec, E_estimate: float, points: int = DEFAULT_POINTS):
    """Half-width ``L`` and step ``h = L / points`` for an energy near ``E_estimate``.

    ``L`` is the larger of two distances: where ``V`` exceeds
    ``E + 30 hbar omega``, and where the WKB decay exponent
    ``int sqrt(2m(V-E))/hbar dx`` measured from the turning point reaches 30.
    Both sides of the origin are checked.
    """
    E = float(E_estimate)
    if not math.isfinite(E):
        raise ValidationError("E_estimate must be finite")
    m, hb = float(potential.mass), float(potential.hbar)
    ceiling = E + 30 * _harmonic_scale(potential)
    L = 0.0
    for sign in (1.0, -1.0):
        V = lambda r: potential.value(sign * r)
        r_wall = _first_crossing(V, ceiling)
        r_turn = _first_crossing(V, E)
        decay = lambda r: integrate.quad(lambda s: math.sqrt(max(2 * m * (V(s) - E), 0.0)) / hb, r_turn, r,
                                         limit=200)[0] - 30.0
        r_wkb = _first_crossing_fn(decay, r_turn)
        L = max(L, r_wall, r_wkb)
    return L, L / points


def _first_crossing(V, level: float) -> float:
    if V(0.0) >= level:
        return 0.0
    return _first_crossing_fn(lambda r: V(r) - level, 0.0)


def _first_crossing_fn(g, start: float) -> float:
    a, b = start, max(start, 1e-3) * 2
    while g(b) < 0:
        a, b = b, 2 * b
        if b > 1e8:
            raise BracketFailure("potential does not confine: no classical wall found")
    return optimize.brentq(g, a, b, xtol=1e-12, rtol=1e-12)


class _Shooter:
    """Node counting and matching on one fixed grid."""

    def __init__(self, potential: PotentialSpec, L: float, h: float):
        self.potential = potential
        self.x, self.h = make_grid(L, h)
        self.L = L
        self.V = potential.value(self.x)
        self.c = 2 * float(potential.mass) / float(potential.hbar) ** 2
        # 1 + h^2 q / 12 must stay positive or the recurrence flips sign each step
        worst = self.h**2 * self.c * float(np.max(self.V) - np.min(self.V)) / 12
        if worst >= 1:
            raise ValidationError(f"step {self.h:.4g} too coarse for V on [-{L}, {L}] "
                                  f"(h^2 |q| / 12 = {worst:.3g} >= 1)")

    def q(self, E):
        return self.c * (E - self.V)

    def nodes(self, E) -> int:
        return count_nodes(_numerov(self.q(E), self.h, 0.0, SEED, RESCALE))

    def match_index(self, E) -> int:
        inside = np.nonzero(self.V <= E)[0]
        N = len(self.x)
        if len(inside) == 0:
            return N // 2
        return int(min(max(inside[-1], 2), N - 4))

    def pieces(self, E, m):
        q = self.q(E)
        left = _numerov(q[: m + 2], self.h, 0.0, SEED, RESCALE)
        right = _numerov(q[m:][::-1].copy(), self.h, 0.0, SEED, RESCALE)[::-1]
        return left / np.max(np.abs(left)), right / np.max(np.abs(right))

    def casoratian(self, E, m) -> float:
        left, right = self.pieces(E, m)
        return left[m] * right[1] - left[m + 1] * right[0]

    def mismatch(self, E, m) -> float:
        left, right = self.pieces(E, m)
        return (right[1] / right[0] - left[m + 1] / left[m]) / self.h

    def eigenfunction(self, E, m):
        left, right = self.pieces(E, m)
        return np.concatenate([left[: m + 1] / left[m], right[1:] / right[0]])


def _bracket(sh: _Shooter, n: int, lo: float, hi: float, max_iter: int):
    """Shrink [lo, hi] until nodes(lo) == n and nodes(hi) == n + 1."""
    c_lo, c_hi = sh.nodes(lo), sh.nodes(hi)
    if c_lo > n or c_hi <= n:
        raise BracketFailure(f"no node-count transition {n}->{n + 1} in [{lo}, {hi}] "
                             f"(counts {c_lo}, {c_hi})")
    for _ in range(max_iter):
        if c_lo == n and c_hi == n + 1:
            return lo, hi
        mid = 0.5 * (lo + hi)
        c = sh.nodes(mid)
        if c <= n:
            lo, c_lo = mid, c
        else:
            hi, c_hi = mid, c
    raise NoConvergence("node-count bisection did not isolate the eigenvalue")


def _solve_on_grid(sh: _Shooter, n: int, lo: float, hi: float, tol: float, max_iter: int):
    lo, hi = _bracket(sh, n, lo, hi, max_iter)
    m = sh.match_index(0.5 * (lo + hi))
    w_lo, w_hi = sh.casoratian(lo, m), sh.casoratian(hi, m)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol and abs(sh.mismatch(mid, m)) <= tol:
            break
        if mid in (lo, hi):
            break
        if w_lo * w_hi < 0:
            w = sh.casoratian(mid, m)
            if w * w_lo > 0:
                lo, w_lo = mid, w
            else:
                hi, w_hi = mid, w
        else:
            # matching sign lost to rounding; fall back to node counting
            if sh.nodes(mid) <= n:
                lo = mid
            else:
                hi = mid
    else:
        raise NoConvergence(f"eigenvalue bisection exceeded {max_iter} iterations")
    E = 0.5 * (lo + hi)
    psi = sh.eigenfunction(E, m)
    return E, count_nodes(psi), sh.mismatch(E, m)


def find_bracket(potential: PotentialSpec, n: int, L: float, h: float, E_guess: float | None = None):
    """Energy interval whose node counts straddle ``n`` on the grid (L, h)."""
    sh = _Shooter(potential, L, h)
    lo = float(np.min(sh.V))
    step = max(_harmonic_scale(potential), 1e-3)
    hi = E_guess if E_guess is not None and E_guess > lo else lo + step * (n + 1)
    for _ in range(200):
        if sh.nodes(hi) > n:
            return lo, hi
        lo, hi = hi, hi + step
        step *= 2
    raise BracketFailure(f"no energy with more than {n} nodes found below {hi}")


def solve_eigenvalue(potential: PotentialSpec, n: int, cfg: ShootingConfig | None = None) -> EigenResult:
    """Eigenvalue with exactly ``n`` nodes.

    Halves the step until successive eigenvalues differ by less than
    ``10 * cfg.tolerance`` (unless ``cfg.refine_grid`` is false).
    """
    cfg = cfg or ShootingConfig()
    if cfg.target_nodes is not None and cfg.target_nodes != n:
        raise ValidationError(f"target_nodes={cfg.target_nodes} disagrees with n={n}")
    if int(n) != n or n < 0:
        raise ValidationError("n must be a non-negative integer")
    n = int(n)

    if cfg.domain_halfwidth is not None:
        L = cfg.domain_halfwidth
        h = cfg.step or L / DEFAULT_POINTS
        bracket = cfg.energy_bracket or find_bracket(potential, n, L, h)
    else:
        # grow the domain until it covers the bracket's upper energy
        E_est = _harmonic_scale(potential) * (n + 0.5)
        bracket = cfg.energy_bracket
        for _ in range(20):
            L, h = auto_domain(potential, E_est)
            if bracket is None or bracket[1] > E_est:
                bracket = cfg.energy_bracket or find_bracket(potential, n, L, h)
            if bracket[1] <= E_est * (1 + 1e-12):
                break
            E_est = bracket[1]
        if cfg.step is not None:
            h = cfg.step
    if not h < L / 100:
        raise ValidationError(f"step {h} must be below L/100 = {L / 100}")

    history = []
    lo, hi = bracket
    E, nodes, mis = _solve_on_grid(_Shooter(potential, L, h), n, lo, hi, cfg.tolerance, cfg.max_iterations)
    history.append((h, E))
    change = math.nan
    if cfg.refine_grid:
        for _ in range(cfg.max_refinements):
            h /= 2
            width = max(abs(E) * 1e-3, 10 * cfg.tolerance)
            sh = _Shooter(potential, L, h)
            lo2, hi2 = E - width, E + width
            while sh.nodes(lo2) > n:
                lo2 -= width
                width *= 2
            while sh.nodes(hi2) <= n:
                hi2 += width
                width *= 2
            E_new, nodes, mis = _solve_on_grid(sh, n, lo2, hi2, cfg.tolerance, cfg.max_iterations)
            change = abs(E_new - E)
            E = E_new
            history.append((h, E))
            if change < 10 * cfg.tolerance:
                break
        else:
            raise NoConvergence(f"grid refinement did not settle: last change {change:.3g}")
    return EigenResult(E, nodes, float(mis), (L, make_grid(L, h)[1]), change, history)
