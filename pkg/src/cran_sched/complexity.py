"""Turbo-decoder complexity model and its quadratic approximation.

Decoding a rate-``r`` codeword received at SINR ``g`` costs

    C(g, r) = r / log2(zeta - 1) * [log2((zeta - 2) / (K * zeta)) - 2 * log2(gap)]

bit-iterations per channel use, where ``gap = log2(1 + g) - r`` is the
distance of the operating point from capacity and ``K`` scales the iteration
count with the target codeword error rate.  The cost blows up logarithmically
as the gap closes and is clamped at zero from below (far from capacity the
fitted closed form goes negative; physically the decoder converges in
essentially no iterations there).

Linearizing ``log2(gap)`` in the rate turns the cost into a quadratic
``quad_alpha * r**2 + quad_beta * r`` that downstream water-filling and the
greedy schedulers rely on.  The tangent construction makes the quadratic agree
with the exact cost at the expansion rate, which the test suite pins to 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)

# below this capacity gap (bpcu) the log blows up; callers must stay above it
GAP_GUARD = 1e-9


class DomainError(ValueError):
    """An input left the domain where the closed forms are defined."""


@dataclass(frozen=True)
class ModelParams:
    """Decoder and link-adaptation constants shared across the package."""

    k_prime: float = 0.2        # iteration-count fit constant (> 0)
    zeta: float = 6.0           # convergence-speed fit constant (> 2)
    nu: float = 10.0 ** 0.02    # SNR margin of the MCS thresholds, linear (0.2 dB)
    eps_channel: float = 0.1    # target codeword error rate in (0, 1)
    l_max: int = 8              # decoder iteration budget, diagnostics only

    def __post_init__(self) -> None:
        if not self.k_prime > 0:
            raise ValueError(f"k_prime must be > 0, got {self.k_prime}")
        if not self.zeta > 2:
            raise ValueError(f"zeta must be > 2, got {self.zeta}")
        if not self.nu > 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if not 0 < self.eps_channel < 1:
            raise ValueError(
                f"eps_channel must be in (0, 1), got {self.eps_channel}"
            )
        if self.l_max < 1:
            raise ValueError(f"l_max must be >= 1, got {self.l_max}")

    @property
    def k_eps(self) -> float:
        """Iteration scale factor for the configured target error rate."""
        return -self.k_prime / math.log10(self.eps_channel)

    def kernel_constants(self) -> tuple[float, float]:
        """Precomputed ``(c0, ilz)`` pair used by the scalar kernels.

        ``c0`` is the rate-independent bracket term
        ``log2((zeta - 2) / (k_eps * zeta))`` and ``ilz`` is
        ``1 / log2(zeta - 1)``.
        """
        c0 = math.log2((self.zeta - 2.0) / (self.k_eps * self.zeta))
        ilz = 1.0 / math.log2(self.zeta - 1.0)
        return c0, ilz


@dataclass(frozen=True)
class LinearizationCoeffs:
    """Tangent-line and induced quadratic coefficients at one operating point."""

    a: float                # slope of log2(gap) in the rate (always < 0)
    b: float                # intercept of the tangent line
    quad_alpha: float       # quadratic rate coefficient (always > 0)
    quad_beta: float        # linear rate coefficient (either sign)
    expansion_rate: float   # rate the tangent was taken at
    sinr: float             # linear SINR of the operating point


def k_of_epsilon(params: ModelParams) -> float:
    """Iteration scale factor ``-k_prime / log10(eps_channel)``."""
    return params.k_eps


def gap(sinr: float, rate: float) -> float:
    """Capacity gap ``log2(1 + sinr) - rate`` in bpcu.

    Parameters
    ----------
    sinr : float
        Linear (not dB) SINR, >= 0.
    rate : float
        Spectral efficiency in bpcu.
    """
    if sinr < 0:
        raise DomainError(f"sinr must be >= 0, got {sinr}")
    return math.log2(1.0 + sinr) - rate


def decode_complexity(params: ModelParams, sinr: float, rate: float) -> float:
    """Decoding cost in bit-iterations per channel use, clamped at zero.

    A zero rate costs nothing and short-circuits before any log is taken.
    Positive rates must keep the capacity gap above ``GAP_GUARD``.
    """
    if rate < 0:
        raise DomainError(f"rate must be >= 0, got {rate}")
    if rate == 0.0:
        return 0.0
    g = gap(sinr, rate)
    if g < GAP_GUARD:
        raise DomainError(
            f"capacity gap {g:.3e} below guard {GAP_GUARD:.0e} "
            f"(sinr={sinr}, rate={rate})"
        )
    c0, ilz = params.kernel_constants()
    raw = rate * ilz * (c0 - 2.0 * math.log2(g))
    return raw if raw > 0.0 else 0.0


def iteration_count(params: ModelParams, sinr: float, rate: float) -> float:
    """Unclamped per-bit iteration count, for diagnostics.

    Returns the raw (possibly negative) cost divided by the rate; values above
    ``params.l_max`` flag operating points the fitted decoder cannot reach.
    """
    if rate <= 0:
        raise DomainError(f"rate must be > 0, got {rate}")
    g = gap(sinr, rate)
    if g < GAP_GUARD:
        raise DomainError(
            f"capacity gap {g:.3e} below guard {GAP_GUARD:.0e} "
            f"(sinr={sinr}, rate={rate})"
        )
    c0, ilz = params.kernel_constants()
    return ilz * (c0 - 2.0 * math.log2(g))


def linearize(
    params: ModelParams, sinr: float, expansion_rate: float
) -> LinearizationCoeffs:
    """Tangent of ``log2(gap)`` at ``expansion_rate`` and the induced quadratic.

    The tangent ``a * r + b`` replaces ``log2(gap)`` inside the cost bracket,
    giving ``quad_alpha * r**2 + quad_beta * r``; by construction the
    quadratic equals the exact (unclamped) cost at the expansion rate.
    """
    g = gap(sinr, expansion_rate)
    if g < GAP_GUARD:
        raise DomainError(
            f"capacity gap {g:.3e} below guard {GAP_GUARD:.0e} "
            f"(sinr={sinr}, rate={expansion_rate})"
        )
    a = -1.0 / (LN2 * g)
    b = math.log2(g) - a * expansion_rate
    c0, ilz = params.kernel_constants()
    return LinearizationCoeffs(
        a=a,
        b=b,
        quad_alpha=-2.0 * a * ilz,
        quad_beta=(c0 - 2.0 * b) * ilz,
        expansion_rate=expansion_rate,
        sinr=sinr,
    )


def quadratic_complexity(coeffs: LinearizationCoeffs, rate: float) -> float:
    """Quadratic cost model ``quad_alpha * rate**2 + quad_beta * rate``."""
    return coeffs.quad_alpha * rate * rate + coeffs.quad_beta * rate
