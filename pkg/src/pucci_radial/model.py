"""Problem parameters and the radial Pucci operator algebra.

A radial function u(|x|) has Hessian eigenvalues u'' (simple) and u'/r
(multiplicity N-1). The extremal operators weight positive and negative
eigenvalues differently, so on radial functions they reduce to a piecewise
linear ODE operator whose pieces are selected by the signs of u'' and u'.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from . import _kernels


class Branch(str, enum.Enum):
    MINUS = "minus"
    PLUS = "plus"

    @property
    def opposite(self) -> "Branch":
        return Branch.PLUS if self is Branch.MINUS else Branch.MINUS


class USign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    ZERO = "zero"


class DuSign(enum.Enum):
    NON_NEGATIVE = "non_negative"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class SignRegime:
    u_sign: USign
    du_sign: DuSign

    @classmethod
    def classify(cls, u: float, du: float) -> "SignRegime":
        if u > 0:
            us = USign.POSITIVE
        elif u < 0:
            us = USign.NEGATIVE
        else:
            us = USign.ZERO
        return cls(us, DuSign.NON_NEGATIVE if du >= 0 else DuSign.NEGATIVE)


@dataclass(frozen=True)
class OperatorSpec:
    """Ellipticity constants, dimension and operator branch.

    ``lam == Lam`` is accepted: both operators then reduce to ``lam`` times
    the Laplacian, which is the analytic test limit.
    """

    lam: float
    Lam: float
    N: int
    branch: Branch = Branch.MINUS

    def __post_init__(self):
        if isinstance(self.branch, str) and not isinstance(self.branch, Branch):
            object.__setattr__(self, "branch", Branch(self.branch))
        if not (self.lam > 0 and self.Lam > 0):
            raise ValueError("ellipticity constants must be positive")
        if self.lam > self.Lam:
            raise ValueError(f"need lambda <= Lambda, got {self.lam} > {self.Lam}")
        if int(self.N) != self.N or self.N < 3:
            raise ValueError(f"dimension N must be an integer >= 3, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        for b in Branch:
            if dimension_like(self, b) <= 2:
                raise ValueError(f"dimension-like exponent for {b.value} must exceed 2")

    def with_branch(self, branch) -> "OperatorSpec":
        return replace(self, branch=Branch(branch))

    @property
    def weights(self) -> tuple[float, float]:
        """(weight on positive eigenvalues, weight on negative eigenvalues)."""
        if self.branch is Branch.MINUS:
            return self.lam, self.Lam
        return self.Lam, self.lam

    @property
    def is_laplacian(self) -> bool:
        return self.lam == self.Lam

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "Lambda": self.Lam, "N": self.N, "branch": self.branch.value}

    @classmethod
    def from_dict(cls, d: dict) -> "OperatorSpec":
        return cls(float(d["lambda"]), float(d["Lambda"]), int(d["N"]), Branch(d.get("branch", "minus")))


def dimension_like(spec: OperatorSpec, branch: Branch | str | None = None) -> float:
    """Effective dimension governing decay: (Lam/lam)(N-1)+1 for minus, (lam/Lam)(N-1)+1 for plus."""
    b = spec.branch if branch is None else Branch(branch)
    if b is Branch.MINUS:
        return spec.Lam / spec.lam * (spec.N - 1) + 1.0
    return spec.lam / spec.Lam * (spec.N - 1) + 1.0


def sobolev_exponent(N: int) -> float:
    if N < 3:
        raise ValueError(f"Sobolev exponent needs N >= 3, got {N}")
    return (N + 2) / (N - 2)


def center_coefficient(spec: OperatorSpec) -> float:
    """Coefficient of u'' near the origin, where u > 0 is decreasing and concave."""
    return spec.weights[1]


def pucci_radial_value(spec: OperatorSpec, ddu: float, du_over_r: float) -> float:
    wpos, wneg = spec.weights
    return _kernels.pucci_value(ddu, du_over_r, wpos, wneg, spec.N - 1.0)


def resolve_second_derivative(spec: OperatorSpec, r: float, u: float, du: float, p: float) -> float:
    """Return the u'' solving -F(D^2 u) = |u|^(p-1) u at radius r.

    The eigenvalue weights follow the actual signs of u'' and u'/r, which
    extends the constant-sign radial equations across zeros of u.
    """
    if not r > 0:
        raise ValueError("r must be positive; use the origin series at r = 0")
    wpos, wneg = spec.weights
    return _kernels.ddu(r, u, du, p, wpos, wneg, spec.N - 1.0)


def power_nonlinearity(u: float, p: float) -> float:
    return math.copysign(abs(u) ** p, u) if u != 0 else 0.0
