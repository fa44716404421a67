"""The complex torus C/Lambda: canonical lifts, group law, torsion points."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: Default generic lattice parameter; avoids square/hexagonal extra symmetry.
DEFAULT_TAU = 0.21 + 1.3j

#: Two torus points closer than this (after reduction) are the same point.
POINT_TOL = 1e-8


class Lattice:
    """The lattice Z + Z*tau with Im tau > 0.

    Carries a write-once cache used for per-lattice derived data (branch
    points of the double cover); instances are otherwise immutable.
    """

    __slots__ = ("tau", "_cache")

    def __init__(self, tau: complex = DEFAULT_TAU):
        tau = complex(tau)
        if tau.imag <= 0:
            raise ValueError(f"Im tau must be positive, got {tau}")
        self.tau = tau
        self._cache = {}

    def __repr__(self) -> str:
        return f"Lattice(tau={self.tau})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Lattice) and self.tau == other.tau

    def __hash__(self) -> int:
        return hash(("Lattice", self.tau))

    def coords(self, z: complex) -> tuple[float, float]:
        """Real coordinates (x, y) with z = x + y*tau."""
        y = z.imag / self.tau.imag
        x = z.real - y * self.tau.real
        return x, y

    def reduce(self, z: complex) -> complex:
        """Canonical lift: x, y reduced into [0, 1)."""
        x, y = self.coords(complex(z))
        return (x % 1.0) + (y % 1.0) * self.tau

    def reduce_centered(self, z: complex) -> complex:
        """Lift with lattice coordinates in [-1/2, 1/2); balanced for
        numerical work with doubled arguments."""
        x, y = self.coords(complex(z))
        return ((x + 0.5) % 1.0 - 0.5) + ((y + 0.5) % 1.0 - 0.5) * self.tau

    def lattice_part(self, z: complex) -> tuple[int, int]:
        """Integers (m, n) with z - (m + n*tau) in the fundamental domain."""
        x, y = self.coords(complex(z))
        return int(np.floor(x)), int(np.floor(y))

    def distance(self, z1: complex, z2: complex) -> float:
        """Distance |z1 - z2| minimized over lattice translates."""
        d = self.reduce(complex(z1) - complex(z2))
        best = abs(d)
        for m in (0, -1):
            for n in (0, -1):
                best = min(best, abs(d + m + n * self.tau))
        return best

    def torsion_lifts(self) -> tuple[complex, complex, complex, complex]:
        """Lifts of the four 2-torsion points: 0, 1/2, tau/2, (1+tau)/2."""
        return (0.0 + 0.0j, 0.5 + 0.0j, self.tau / 2, (1.0 + self.tau) / 2)


@dataclass(frozen=True)
class CurvePoint:
    """A point of C/Lambda with its canonical fundamental-domain lift."""

    lift: complex
    lattice: Lattice = field(default_factory=Lattice)

    def __post_init__(self):
        object.__setattr__(self, "lift", self.lattice.reduce(self.lift))

    def __add__(self, other: "CurvePoint") -> "CurvePoint":
        return CurvePoint(self.lift + other.lift, self.lattice)

    def __sub__(self, other: "CurvePoint") -> "CurvePoint":
        return CurvePoint(self.lift - other.lift, self.lattice)

    def __neg__(self) -> "CurvePoint":
        return CurvePoint(-self.lift, self.lattice)

    def double(self) -> "CurvePoint":
        return CurvePoint(2 * self.lift, self.lattice)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CurvePoint)
            and self.lattice == other.lattice
            and self.lattice.distance(self.lift, other.lift) < POINT_TOL
        )

    def __hash__(self):  # pragma: no cover - equality is tolerance based
        raise TypeError("CurvePoint is not hashable")

    def is_zero(self) -> bool:
        return self.lattice.distance(self.lift, 0.0) < POINT_TOL

    def is_two_torsion(self) -> bool:
        return self.double().is_zero()

    def torsion_index(self) -> int | None:
        """Index 1..4 among the 2-torsion points, or None."""
        for i, t in enumerate(self.lattice.torsion_lifts(), start=1):
            if self.lattice.distance(self.lift, t) < POINT_TOL:
                return i
        return None


def add(p: CurvePoint, q: CurvePoint) -> CurvePoint:
    return p + q


def neg(p: CurvePoint) -> CurvePoint:
    return -p


def halve_sum(p: CurvePoint, q: CurvePoint) -> CurvePoint:
    """The canonical e with 2e = p + q: the average of the canonical lifts.

    The other three solutions differ by the 2-torsion points.
    """
    return CurvePoint((p.lift + q.lift) / 2, p.lattice)


def torsion_point(lattice: Lattice, index: int) -> CurvePoint:
    """The 2-torsion point [z_index] for index in 1..4."""
    return CurvePoint(lattice.torsion_lifts()[index - 1], lattice)
