"""Quasi-exactly solvable sextic oscillator -U'' + (V2 x^2 + V4 x^4 + V6 x^6) U = E U.

For ``V2 = V4^2/(4 V6) - 3 sqrt(V6)`` the ground state is
``exp(-V4 x^2 / (4 sqrt(V6)) - sqrt(V6) x^4 / 4)`` with ``E = V4 / (2 sqrt(V6))``.
Units: hbar = 1, m = 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import NoMinimum, ValidationError
from .numeric import NumericContext, SqrtOf, to_fraction
from .potential import PotentialSpec

HALF = Fraction(1, 2)
_SQRT_DIGITS = 80


def _sqrt_rational(q: Fraction) -> Fraction:
    """sqrt(q), exact when possible, else rounded to 80 significant digits."""
    root = SqrtOf(q).exact()
    if root is not None:
        return root
    with mpmath.workdps(_SQRT_DIGITS + 10):
        r = mpmath.sqrt(mpmath.mpf(q.numerator) / q.denominator)
        return Fraction(mpmath.nstr(r, _SQRT_DIGITS, min_fixed=-1, max_fixed=1))


@dataclass(frozen=True)
class QuasiExactConfig:
    potential: PotentialSpec
    v2: Fraction
    v4: Fraction
    v6: Fraction
    energy: Fraction
    wave_quadratic: Fraction  # coefficient of -x^2 in log(psi)
    wave_quartic: Fraction  # coefficient of -x^4 in log(psi)

    @property
    def exact(self) -> bool:
        return SqrtOf(self.v6).exact() is not None

    def wavefunction(self, x):
        import numpy as np

        return np.exp(-float(self.wave_quadratic) * x**2 - float(self.wave_quartic) * x**4)


def physical_potential(v2, v4, v6) -> PotentialSpec:
    """V2 x^2 + V4 x^4 + V6 x^6 with kinetic term -U'' (m = 1/2, hbar = 1)."""
    v2 = to_fraction(v2)
    if v2 <= 0:
        raise NoMinimum(f"V2 = {v2} <= 0: no single minimum at the origin")
    return PotentialSpec(mass=HALF, omega=SqrtOf(4 * v2), hbar=1, couplings={2: to_fraction(v4), 4: to_fraction(v6)})


def quasi_exact_config(v4, v6) -> QuasiExactConfig:
    v4, v6 = to_fraction(v4), to_fraction(v6)
    if v6 <= 0:
        raise ValidationError(f"V6 must be positive, got {v6}")
    r6 = _sqrt_rational(v6)
    v2 = v4 * v4 / (4 * v6) - 3 * r6
    if v2 <= 0:
        raise NoMinimum(f"V2 = V4^2/(4 V6) - 3 sqrt(V6) = {float(v2):.6g} <= 0")
    return QuasiExactConfig(
        potential=physical_potential(v2, v4, v6),
        v2=v2,
        v4=v4,
        v6=v6,
        energy=v4 / (2 * r6),
        wave_quadratic=v4 / (4 * r6),
        wave_quartic=r6 / 4,
    )


def closed_form_potential(v2, v4, v6) -> PotentialSpec:
    """Potential whose series `quasi_exact_corrections` reproduces.

    The closed forms carry the anharmonic couplings with an extra factor 2
    relative to ``V2 x^2 + V4 x^4 + V6 x^6`` under ``-U''``; expanding that
    physical potential gives ``E_2 = 3 V4 / (4 V2)`` instead of ``3 V4 / (2 V2)``.
    """
    v4, v6 = to_fraction(v4), to_fraction(v6)
    return physical_potential(v2, 2 * v4, 2 * v6)


def quasi_exact_corrections(v2, v4, v6, K: int = 6, ctx: NumericContext | None = None) -> list:
    """Closed forms of the ground-state E_1..E_K (K <= 6) for V2, V4, V6."""
    if not 1 <= K <= 6:
        raise ValidationError(f"closed forms exist for K <= 6 only, got {K}")
    ctx = ctx or NumericContext()
    v2f = to_fraction(v2)
    if v2f <= 0:
        raise ValidationError(f"V2 must be positive, got {v2f}")
    with ctx.local():
        V2, V4, V6 = (ctx.number(to_fraction(v)) for v in (v2, v4, v6))
        s = ctx.number(SqrtOf(v2f))
        out = [
            s,
            3 * V4 / (2 * V2),
            3 * (-7 * V4**2 + 5 * V2 * V6) / (4 * V2**2 * s),
            -9 * (-37 * V4**3 + 40 * V2 * V4 * V6) / (8 * V2**4),
            -15 * (2059 * V4**4 - 2992 * V2 * V4**2 * V6 + 466 * V2**2 * V6**2) / (64 * V2**5 * s),
            9 * (101859 * V4**5 - 186380 * V2 * V4**3 * V6 + 61420 * V2**2 * V4 * V6**2) / (128 * V2**7),
        ]
    return out[:K]
