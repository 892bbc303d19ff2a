"""Concentration scale delta(beta) and the reduced-energy constants."""
from __future__ import annotations

import math
from dataclasses import dataclass

BETA_MAX = -math.e / 2.0
S_MIN, S_MAX = 1.0, 500.0
BISECTION_STEPS = 200


class NoRootError(ValueError):
    """Raised when sqrt(delta)|log delta| = -1/beta has no root in (0, e^-2)."""


@dataclass(frozen=True)
class DeltaBetaSolve:
    beta: float
    delta: float
    residual: float

    @property
    def log_delta(self) -> float:
        return math.log(self.delta)


def _h(s: float) -> float:
    # sqrt(delta)|log delta| with delta = exp(-2 s)
    return 2.0 * s * math.exp(-s)


def solve_delta_beta(beta: float) -> DeltaBetaSolve:
    """The root delta in (0, e^-2) of sqrt(delta)|log delta| = -1/beta.

    Bisection runs in s = -log(delta)/2, where the left side becomes the
    decreasing function 2 s e^-s on (1, 500].
    """
    beta = float(beta)
    if not beta < BETA_MAX:
        raise NoRootError(f"no root for beta={beta:g}; need beta < -e/2 = {BETA_MAX:.6f}")
    target = -1.0 / beta
    if target < _h(S_MAX):
        raise NoRootError(f"beta={beta:g} is below the supported range")
    lo, hi = S_MIN, S_MAX
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _h(mid) > target:
            lo = mid
        else:
            hi = mid
    s = lo if abs(_h(lo) - target) <= abs(_h(hi) - target) else hi
    delta = math.exp(-2.0 * s)
    residual = abs(math.sqrt(delta) * abs(math.log(delta)) + 1.0 / beta)
    return DeltaBetaSolve(beta, delta, residual)


def beta_for_delta(delta: float) -> float:
    """Inverse map: the beta whose scale is ``delta``."""
    if not 0 < delta < math.exp(-2):
        raise ValueError(f"delta must lie in (0, e^-2), got {delta}")
    return -1.0 / (math.sqrt(delta) * abs(math.log(delta)))


@dataclass(frozen=True)
class ReducedEnergyConstants:
    k: int
    c1: float
    c2: float
    c1_tilde: float
    c2_tilde: float
    t_star: float
    t_star_tilde: float


def constants(k: int) -> ReducedEnergyConstants:
    if int(k) != k or k < 2:
        raise ValueError(f"k must be an integer >= 2, got {k}")
    k = int(k)
    base = math.sqrt(6.0) * math.pi * k
    lattice = math.fsum((1.0 - math.cos(_vertex_angle(j, k))) ** -0.5 for j in range(2, k + 1))
    c1 = base * lattice
    c2 = base
    c1t, c2t = c1, 1.5 * c2
    ratio = c1 / c2
    # (2c1/3c2)^2 and (c1t/c2t)^2 evaluated through the same ratio so they agree bit for bit
    t_star = (2.0 * ratio / 3.0) ** 2
    return ReducedEnergyConstants(k, c1, c2, c1t, c2t, t_star, t_star)


def _vertex_angle(j: int, k: int) -> float:
    return 2.0 * math.pi * (j - 1) / k


def g(k: int, t: float) -> float:
    """Leading reduced energy -c1 t + c2 t^(3/2)."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    c = constants(k)
    return -c.c1 * t + c.c2 * t**1.5


def g_prime(k: int, t: float) -> float:
    c = constants(k)
    return -c.c1 + 1.5 * c.c2 * math.sqrt(t)


def c_tilde_leading(k: int, beta: float, t: float) -> float:
    """Leading part of the m >= 3 reduced equation at scale multiplier t."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    c = constants(k)
    d = solve_delta_beta(beta).delta
    return -c.c1_tilde * t * d - c.c2_tilde * beta * (t * d) ** 1.5 * abs(math.log(d))
