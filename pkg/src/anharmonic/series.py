"""hbar-expansion of the energy through Laurent coefficients of C(x) = hbar U'/U.

Row ``k`` of a `LaurentTable` holds the coefficients of
``C_k(x) = x**(1 - 2k) * sum_i C[k][i] x**i``; the same exponent rule
covers ``k = 0``, where ``C_0(x) = x * sum_i C[0][i] x**i``. With this
alignment every product ``C_j C_{k-j}`` is a plain index convolution.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateMinimum,
    IrrationalInExactMode,
    OrderingViolation,
    OrderOutOfRange,
    PoleAtOrigin,
    ValidationError,
)
from .numeric import DOUBLE, FLOAT, NumericContext, SqrtOf, to_exact
from .potential import PotentialSpec

DEFAULT_CONTEXT = NumericContext()


@dataclass
class OmegaExpansion:
    """Trial frequency ``omega0`` with formal corrections ``w_k^2``.

    The physical frequency is ``omega**2 = omega0**2 + sum_k corrections[k] hbar**k``.
    Correction values may be negative.
    """

    omega0: object
    corrections: dict = field(default_factory=dict)

    def __post_init__(self):
        w = self.omega0
        if isinstance(w, (str, SqrtOf)):
            w = to_exact(w)
        if not float(w) > 0:
            raise DegenerateMinimum(f"omega0 must be positive, got {self.omega0}")
        self.omega0 = w
        bad = [k for k in self.corrections if int(k) < 1]
        if bad:
            raise ValidationError(f"correction orders must be >= 1, got {bad}")
        self.corrections = {int(k): v for k, v in self.corrections.items()}

    @classmethod
    def identity(cls, potential: PotentialSpec) -> "OmegaExpansion":
        return cls(potential.omega, {})

    @classmethod
    def one_parameter(cls, potential: PotentialSpec, omega0, order: int, ctx: NumericContext | None = None):
        """Single correction at ``order`` fixed by ``omega**2`` (the closure).

        ``w_s^2 = (omega**2 - omega0**2) / hbar**s``. Exact inputs give an exact
        result unless ``ctx`` is supplied.
        """
        if ctx is None:
            w0 = to_exact(omega0)
            hb = potential.hbar
            if isinstance(w0, SqrtOf):
                sq = w0.radicand
            else:
                sq = w0 * w0
            return cls(w0, {order: (potential.omega_squared - sq) / hb**order})
        with ctx.local():
            w0 = ctx.number(omega0)
            corr = (ctx.number(potential.omega_squared) - w0 * w0) / ctx.number(potential.hbar) ** order
        return cls(w0, {order: corr})


@dataclass
class LaurentTable:
    """Dense table ``coeff[k][i]``; unfilled rows are ``None``."""

    coeff: list
    max_order: int
    max_index: int
    quantum_number: int
    mass: object
    omega_eff: object
    ctx: NumericContext
    stride: int = 1

    def row(self, k: int) -> list:
        r = self.coeff[k]
        if r is None:
            raise OrderingViolation(f"row {k} has not been computed")
        return r

    @property
    def filled_order(self) -> int:
        k = -1
        for r in self.coeff:
            if r is None:
                break
            k += 1
        return k


@dataclass
class EnergySeries:
    quantum_number: int
    orders: list
    hbar: object
    ctx: NumericContext = DEFAULT_CONTEXT

    def __len__(self):
        return len(self.orders)

    def partial_sum(self, N: int | None = None):
        return partial_sum(self, len(self.orders) if N is None else N)

    def partial_sums(self) -> list:
        with self.ctx.local():
            out, s, hk = [], self.ctx.zero(), self.ctx.number(1)
            for e in self.orders:
                hk = hk * self.hbar
                s = s + e * hk
                out.append(s)
        return out


def _effective_stride(potential: PotentialSpec) -> int:
    return potential.index_stride


def build_c0(potential: PotentialSpec, omega_eff, max_index: int, ctx: NumericContext = DEFAULT_CONTEXT) -> list:
    """Taylor coefficients of C_0(x)/x = -sqrt(2 m V(x))/x.

    ``C[0][0] = -m * omega_eff``; higher entries follow from squaring the
    series and matching ``2 m f_i``.
    """
    if max_index < 0:
        raise ValidationError("max_index must be non-negative")
    w = to_exact(omega_eff) if isinstance(omega_eff, (str, SqrtOf)) else omega_eff
    if not float(w) > 0:
        raise DegenerateMinimum(f"effective frequency must be positive, got {omega_eff}")
    if ctx.exact and not ctx.is_representable(w):
        raise IrrationalInExactMode(f"m*omega = {potential.mass}*{w} is not rational")
    with ctx.local():
        m = ctx.number(potential.mass)
        mw = m * ctx.number(w)
        c0 = [-mw]
        denom = 2 * mw
        for i in range(1, max_index + 1):
            acc = ctx.zero()
            for p in range(1, i):
                acc += c0[p] * c0[i - p]
            c0.append((acc - 2 * m * ctx.number(potential.coupling(i))) / denom)
    return c0


def new_table(potential: PotentialSpec, n: int, K: int, omega_eff, ctx: NumericContext = DEFAULT_CONTEXT,
              max_index: int | None = None) -> LaurentTable:
    """Empty table with row 0 filled."""
    if max_index is None:
        max_index = 2 * K - 2
    if max_index < 2 * K - 2:
        raise ValidationError(f"max_index {max_index} < 2K-2 = {2 * K - 2}")
    c0 = build_c0(potential, omega_eff, max_index, ctx)
    with ctx.local():
        mass = ctx.number(potential.mass)
        w = ctx.number(omega_eff)
    coeff = [c0] + [None] * K
    return LaurentTable(coeff, K, max_index, n, mass, w, ctx, _effective_stride(potential))


def extend_laurent(table: LaurentTable, k: int, omega_expansion: OmegaExpansion | None = None,
                   n: int | None = None) -> list:
    """Fill row ``k`` of ``table`` in place and return it.

    Entry ``2k-2`` is not computed by the recursion: it is fixed to ``n`` for
    ``k == 1`` and to zero otherwise (the node-counting condition). A
    correction ``w_k^2`` from ``omega_expansion`` subtracts ``m^2 w_k^2`` from
    the bracket at ``i == 2k``.
    """
    if n is None:
        n = table.quantum_number
    if not 1 <= k <= table.max_order:
        raise OrderOutOfRange(f"order {k} outside 1..{table.max_order}")
    for j in range(k):
        if table.coeff[j] is None:
            raise OrderingViolation(f"row {k} needs row {j}, which is missing")
    ctx, C, I, s = table.ctx, table.coeff, table.max_index, table.stride
    with ctx.local():
        zero = ctx.zero()
        c0 = C[0]
        prev = C[k - 1]
        inv = 1 / (2 * c0[0])
        w2 = None
        if omega_expansion is not None and k in omega_expansion.corrections:
            w2 = ctx.number(omega_expansion.corrections[k])
            if w2 == 0:
                w2 = None
        mm = table.mass * table.mass
        row = [zero] * (I + 1)
        fixed = 2 * k - 2
        for i in range(0, I + 1, s):
            if i == fixed:
                row[i] = ctx.number(n if k == 1 else 0)
                continue
            b = (3 - 2 * k + i) * prev[i]
            for j in range(1, k):
                a, c = C[j], C[k - j]
                for p in range(0, i + 1, s):
                    b += a[p] * c[i - p]
            if w2 is not None and i == 2 * k:
                b -= mm * w2
            for p in range(s, i + 1, s):
                b += 2 * c0[p] * row[i - p]
            row[i] = -b * inv
    C[k] = row
    return row


def energy_coefficient(table: LaurentTable, k: int, potential: PotentialSpec | None = None):
    """E_k from the ``i = 2k-2`` instance of the order-k Riccati equation."""
    if not 1 <= k <= table.max_order:
        raise OrderOutOfRange(f"order {k} outside 1..{table.max_order}")
    for j in range(k + 1):
        if table.coeff[j] is None:
            raise OrderingViolation(f"E_{k} needs row {j}, which is missing")
    ctx, C, s = table.ctx, table.coeff, table.stride
    t = 2 * k - 2
    with ctx.local():
        acc = C[k - 1][t]
        for j in range(k + 1):
            a, c = C[j], C[k - j]
            for p in range(0, t + 1, s):
                acc += a[p] * c[t - p]
        return -acc / (2 * table.mass)


def _resolve_context(potential: PotentialSpec, omega_eff, ctx: NumericContext) -> NumericContext:
    if ctx.exact and not ctx.is_representable(omega_eff):
        warnings.warn(
            f"omega = {omega_eff} is irrational; falling back to float mode "
            f"with {ctx.precision_digits} digits",
            stacklevel=3,
        )
        return NumericContext(FLOAT, ctx.precision_digits)
    return ctx


def compute_series(potential: PotentialSpec, n: int, K: int, omega_expansion: OmegaExpansion | None = None,
                   ctx: NumericContext = DEFAULT_CONTEXT, max_index: int | None = None):
    """Laurent table and energy coefficients E_1..E_K.

    Parameters
    ----------
    potential : PotentialSpec
    n : int
        Quantum number (number of nodes).
    K : int
        Highest order in hbar.
    omega_expansion : OmegaExpansion, optional
        Renormalized frequency. ``None`` uses the physical frequency.
    ctx : NumericContext
    max_index : int, optional
        Highest Laurent index stored per row; defaults to ``2K - 2``.

    Returns
    -------
    (LaurentTable, EnergySeries)
    """
    n, K = _check_nK(n, K)
    omega_eff = potential.omega if omega_expansion is None else omega_expansion.omega0
    ctx = _resolve_context(potential, omega_eff, ctx)
    if max_index is None:
        max_index = 2 * K - 2
    if ctx.mode == DOUBLE:
        return _compute_double(potential, n, K, omega_expansion, ctx, max_index)
    table = new_table(potential, n, K, omega_eff, ctx, max_index)
    energies = []
    for k in range(1, K + 1):
        extend_laurent(table, k, omega_expansion, n)
        energies.append(energy_coefficient(table, k, potential))
    with ctx.local():
        hbar = ctx.number(potential.hbar)
    return table, EnergySeries(n, energies, hbar, ctx)


def _check_nK(n, K):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ValidationError(f"quantum number must be a non-negative integer, got {n!r}")
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise ValidationError(f"order K must be a positive integer, got {K!r}")
    return int(n), int(K)


def energies_double(potential: PotentialSpec, n: int, K: int, omega0: float, w2: dict | None = None,
                    max_index: int | None = None) -> np.ndarray:
    """E_1..E_K in float64 for a trial frequency ``omega0``; fast path for scans."""
    return _run_kernel(potential, n, K, omega0, w2, max_index)[1]


def _run_kernel(potential, n, K, omega0, w2, max_index):
    from ._kernel import laurent_double

    if max_index is None:
        max_index = 2 * K - 2
    s = potential.index_stride
    max_index -= max_index % s
    f = np.zeros(max_index + 1)
    for i, v in potential.couplings.items():
        if i <= max_index:
            f[i] = float(v)
    w = np.zeros(K + 1)
    for k, v in (w2 or {}).items():
        if k <= K:
            w[k] = float(v)
    if not float(omega0) > 0:
        raise DegenerateMinimum(f"effective frequency must be positive, got {omega0}")
    return laurent_double(f, float(n), K, max_index, float(potential.mass), float(omega0), w, s)


def _compute_double(potential, n, K, omega_expansion, ctx, max_index):
    omega0 = potential.omega if omega_expansion is None else omega_expansion.omega0
    w2 = None if omega_expansion is None else omega_expansion.corrections
    R, E = _run_kernel(potential, n, K, omega0, w2, max_index)
    s = potential.index_stride
    coeff = []
    for r in R:
        full = [0.0] * (max_index + 1)
        full[::s] = [float(v) for v in r[: len(full[::s])]]
        coeff.append(full)
    table = LaurentTable(coeff, K, max_index, n, float(potential.mass), float(omega0), ctx, s)
    return table, EnergySeries(n, [float(e) for e in E], float(potential.hbar), ctx)


def partial_sum(series: EnergySeries, N: int):
    """S_N = sum_{k=1}^N E_k hbar^k."""
    if isinstance(N, bool) or int(N) != N or not 0 <= N <= len(series.orders):
        raise OrderOutOfRange(f"N = {N} outside 0..{len(series.orders)}")
    if N == 0:
        with series.ctx.local():
            return series.ctx.zero()
    return series.partial_sums()[N - 1]


def eval_log_derivative(table: LaurentTable, x, hbar=1):
    """Truncated C(x) = sum_k hbar^k C_k(x)."""
    return _c_and_dc(table, x, hbar)[0]


def _c_and_dc(table: LaurentTable, x, hbar):
    ctx = table.ctx
    with ctx.local():
        x = ctx.number(x)
        if x == 0:
            raise PoleAtOrigin("C_k(x) has a pole at x = 0 for k >= 1")
        h = ctx.number(hbar)
        c, dc = ctx.zero(), ctx.zero()
        hk = ctx.number(1)
        for k in range(table.filled_order + 1):
            row = table.coeff[k]
            # Horner in x for sum_i C_i x^i and its derivative
            poly, dpoly = ctx.zero(), ctx.zero()
            for ci in reversed(row):
                dpoly = dpoly * x + poly
                poly = poly * x + ci
            xe = x ** (1 - 2 * k)
            c += hk * xe * poly
            dc += hk * ((1 - 2 * k) * xe / x * poly + xe * dpoly)
            hk = hk * h
        return c, dc


def riccati_residual(potential: PotentialSpec, table: LaurentTable, series: EnergySeries, x, hbar=None,
                     omega_expansion: OmegaExpansion | None = None):
    """hbar C' + C^2 - 2m (V - E) with C and E truncated at the table order.

    With ``omega_expansion`` the harmonic term uses
    ``omega0^2 + sum_k w_k^2 hbar^k``.
    """
    ctx = table.ctx
    if hbar is None:
        hbar = potential.hbar
    c, dc = _c_and_dc(table, x, hbar)
    with ctx.local():
        x = ctx.number(x)
        h = ctx.number(hbar)
        m = ctx.number(potential.mass)
        if omega_expansion is None:
            w2 = ctx.number(potential.omega_squared)
        else:
            w0 = ctx.number(omega_expansion.omega0)
            w2 = w0 * w0
            for k, v in omega_expansion.corrections.items():
                w2 += ctx.number(v) * h**k
        v = m * w2 * x * x / 2
        for i, f in potential.couplings.items():
            v += ctx.number(f) * x ** (i + 2)
        e, hk = ctx.zero(), ctx.number(1)
        for ek in series.orders:
            hk = hk * h
            e += ctx.number(ek) * hk
        return h * dc + c * c - 2 * m * (v - e)
