"""Polynomial potentials V(x) = m w^2 x^2 / 2 + sum_i f_i x^(i+2)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ValidationError
from .numeric import SqrtOf, exact_square, exact_str, to_exact, to_fraction


@dataclass(frozen=True)
class PotentialSpec:
    """Single-well polynomial potential with exact parameters.

    ``couplings[i]`` is the coefficient of ``x**(i+2)``. Zero couplings are
    dropped so that equal potentials compare equal.
    """

    mass: Fraction = Fraction(1)
    omega: Fraction | SqrtOf = Fraction(1)
    hbar: Fraction = Fraction(1)
    couplings: dict = field(default_factory=dict)

    def __post_init__(self):
        mass = to_fraction(self.mass)
        omega = to_exact(self.omega)
        hbar = to_fraction(self.hbar)
        if mass <= 0:
            raise ValidationError(f"mass must be positive, got {mass}")
        if exact_square(omega) <= 0:
            raise ValidationError(f"omega must be positive, got {exact_str(omega)}")
        if isinstance(omega, Fraction) and omega < 0:
            raise ValidationError(f"omega must be positive, got {omega}")
        if hbar <= 0:
            raise ValidationError(f"hbar must be positive, got {hbar}")
        cleaned = {}
        for key, val in dict(self.couplings).items():
            try:
                i = int(key)
            except (TypeError, ValueError):
                i = 0
            if i < 1 or str(i) != str(key).strip():
                raise ValidationError(f"coupling index must be an integer >= 1, got {key!r}")
            v = to_fraction(val)
            if v != 0:
                cleaned[i] = v
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "hbar", hbar)
        object.__setattr__(self, "couplings", dict(sorted(cleaned.items())))

    def coupling(self, i: int) -> Fraction:
        return self.couplings.get(i, Fraction(0))

    @property
    def omega_squared(self) -> Fraction:
        return exact_square(self.omega)

    @property
    def degree(self) -> int:
        return max((i + 2 for i in self.couplings), default=2)

    @property
    def is_harmonic(self) -> bool:
        return not self.couplings

    @property
    def index_stride(self) -> int:
        """2 if only even-index couplings are present, else 1.

        Odd Laurent indices then vanish identically in every row.
        """
        return 1 if any(i % 2 for i in self.couplings) else 2

    def value(self, x):
        """V(x) for float or numpy input."""
        v = 0.5 * float(self.mass) * float(self.omega_squared) * x * x
        for i, f in self.couplings.items():
            v = v + float(f) * x ** (i + 2)
        return v

    def replace(self, **changes) -> "PotentialSpec":
        data = dict(mass=self.mass, omega=self.omega, hbar=self.hbar, couplings=self.couplings)
        data.update(changes)
        return PotentialSpec(**data)

    def to_mapping(self) -> dict:
        return {
            "m": exact_str(self.mass),
            "omega": exact_str(self.omega),
            "hbar": exact_str(self.hbar),
            "couplings": {str(i): exact_str(f) for i, f in self.couplings.items()},
        }

    @classmethod
    def from_mapping(cls, data: dict) -> "PotentialSpec":
        if not isinstance(data, dict):
            raise ValidationError("potential specification must be a JSON object")
        unknown = set(data) - {"m", "mass", "omega", "hbar", "couplings"}
        if unknown:
            raise ValidationError(f"unknown potential fields: {sorted(unknown)}")
        couplings = data.get("couplings", {}) or {}
        if not isinstance(couplings, dict):
            raise ValidationError("couplings must be an object mapping index -> value")
        return cls(
            mass=_parse(data.get("m", data.get("mass", 1))),
            omega=_parse(data.get("omega", 1)),
            hbar=_parse(data.get("hbar", 1)),
            couplings={k: _parse(v) for k, v in couplings.items()},
        )


def _parse(v):
    # JSON floats go through repr, so 0.1 stays 1/10
    return to_exact(v)


def harmonic(mass=1, omega=1, hbar=1) -> PotentialSpec:
    return PotentialSpec(mass=mass, omega=omega, hbar=hbar)


def sextic(lam, hbar=1) -> PotentialSpec:
    """x^2/2 + lam x^6 / 2 with unit mass and frequency."""
    return PotentialSpec(couplings={4: to_fraction(lam) / 2}, hbar=hbar)


def load_potential(path) -> PotentialSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return PotentialSpec.from_mapping(data)


def dump_potential(spec: PotentialSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_mapping(), indent=2) + "\n")
