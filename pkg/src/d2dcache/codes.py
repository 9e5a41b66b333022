"""Storage-scheme parameter arithmetic.

A scheme is described by (n, k, d) plus the derived per-node storage
alpha, per-helper repair traffic beta, and total repair bandwidth
gamma = d * beta, all in units of the (unit-size) file. Replication and
simple caching are carried as degenerate parameter sets so the cost
model can treat every method uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Scheme(str, Enum):
    SIMPLE = "simple"
    REPLICATION = "replication"
    MSR = "msr"
    MBR = "mbr"


class FeasibilityError(ValueError):
    """Raised when (scheme, n, k, d) violates a feasibility constraint."""


@dataclass(frozen=True)
class CodeSpec:
    scheme: Scheme
    n: int
    k: int
    d: int
    alpha: float
    beta: float
    gamma: float

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "n": self.n,
            "k": self.k,
            "d": self.d,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CodeSpec":
        return cls(
            scheme=Scheme(doc["scheme"]),
            n=int(doc["n"]),
            k=int(doc["k"]),
            d=int(doc["d"]),
            alpha=float(doc["alpha"]),
            beta=float(doc["beta"]),
            gamma=float(doc["gamma"]),
        )


def _check_kd(k: int, d: int) -> None:
    if k < 1 or d < 1:
        raise FeasibilityError(f"k and d must be positive, got k={k}, d={d}")
    if k > d:
        raise FeasibilityError(f"reconstruction degree k={k} exceeds repair degree d={d}")


def msr_point(k: int, d: int) -> tuple[float, float, float]:
    """Minimum-storage extremal point: alpha = 1/k, gamma = d / (k(d - k + 1)).

    beta is computed first and gamma as d * beta so that gamma == d * beta
    holds exactly in floating point.
    """
    _check_kd(k, d)
    beta = 1.0 / (k * (d - k + 1))
    return 1.0 / k, beta, d * beta


def mbr_point(k: int, d: int) -> tuple[float, float, float]:
    """Minimum-bandwidth extremal point: alpha = gamma = 2d / (k(2d - k + 1))."""
    _check_kd(k, d)
    beta = 2.0 / (k * (2 * d - k + 1))
    gamma = d * beta
    return gamma, beta, gamma


def make_code(scheme: Scheme, n: int = 1, k: int | None = None, d: int | None = None) -> CodeSpec:
    """Build a fully populated CodeSpec, enforcing feasibility.

    Simple caching forces n = 1; replication ignores k and d. For
    MSR/MBR the constraints 2 <= n and 1 <= k <= d <= n-1 apply.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.SIMPLE:
        return CodeSpec(scheme, n=1, k=1, d=0, alpha=1.0, beta=0.0, gamma=0.0)
    if scheme is Scheme.REPLICATION:
        if n < 2:
            raise FeasibilityError(f"replication needs n >= 2, got n={n}")
        return CodeSpec(scheme, n=n, k=1, d=1, alpha=1.0, beta=1.0, gamma=1.0)
    if k is None or d is None:
        raise FeasibilityError(f"{scheme.value} requires k and d")
    if n < 2:
        raise FeasibilityError(f"{scheme.value} needs n >= 2, got n={n}")
    _check_kd(k, d)
    if d > n - 1:
        raise FeasibilityError(f"repair degree d={d} exceeds n-1={n - 1}")
    point = msr_point if scheme is Scheme.MSR else mbr_point
    alpha, beta, gamma = point(k, d)
    return CodeSpec(scheme, n=n, k=k, d=d, alpha=alpha, beta=beta, gamma=gamma)
