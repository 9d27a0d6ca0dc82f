"""Restricted distinguishability: exact enumeration, sampling, and bounds.

gamma_r(A) is the worst contraction of r-sparse directions under A. We
compute it exactly by minimizing sigma_min over all column submatrices
(colex support order, first occurrence wins ties), estimate it from
sampled supports (an upper bound), and lower-bound it through the
Gershgorin coherence inequality.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator, Optional

import numpy as np

from .dictionaries import EffectiveSensing, self_coherence
from .errors import DegenerateGamma, EnumerationTooLarge, InvalidSparsity
from .numerics import TOL, smallest_singular_pair, smallest_singular_value

EXACT_GUARD = 10 ** 6


@dataclass(frozen=True)
class GeometryReport:
    r: int
    gamma_exact: Optional[float]
    gamma_upper: float
    gamma_lower: float
    injective_on_r_sparse: str  # yes | no | unknown
    witness: Optional[np.ndarray]
    supports_examined: int
    method: str  # exact | sampled | bound


def colex_supports(n: int, r: int) -> Iterator[tuple[int, ...]]:
    """All size-r subsets of range(n), colexicographic order."""
    if r == 0:
        yield ()
        return
    for last in range(r - 1, n):
        for rest in colex_supports(last, r - 1):
            yield rest + (last,)


def _zero_cutoff(a: np.ndarray) -> float:
    return TOL.gamma_zero * float(np.max(np.linalg.norm(a, axis=0)))


def gamma_exact(a: EffectiveSensing, r: int, with_witness: bool = False):
    """min sigma_min(A_S) over all |S| = r; 0 iff A loses injectivity at r.

    Returns the value, or (value, witness, supports_examined) when
    with_witness is set; witness is an r-sparse kernel direction in R^N
    when the minimum is numerically zero, else None.
    """
    mat = a.a
    n = mat.shape[1]
    if not 1 <= r <= n:
        raise InvalidSparsity(f"r={r} outside 1..{n}")
    total = comb(n, r)
    if total > EXACT_GUARD:
        raise EnumerationTooLarge(f"binomial({n},{r}) = {total} > {EXACT_GUARD}")
    best = np.inf
    best_support: tuple[int, ...] = ()
    for support in colex_supports(n, r):
        sigma = smallest_singular_value(mat[:, list(support)])
        if sigma < best:
            best = sigma
            best_support = support
    witness = None
    if best < _zero_cutoff(a.a):
        _, direction = smallest_singular_pair(mat[:, list(best_support)])
        witness = np.zeros(n)
        witness[list(best_support)] = direction
        best = max(best, 0.0)
    if with_witness:
        return best, witness, total
    return best


def gamma_sampled(a: EffectiveSensing, r: int, trials: int, stream) -> float:
    """Minimum of sigma_min over sampled supports; an upper bound on gamma_r.

    When trials covers the full support count the enumeration is
    exhausted instead, making the value equal to gamma_exact.
    """
    mat = a.a
    n = mat.shape[1]
    if not 1 <= r <= n:
        raise InvalidSparsity(f"r={r} outside 1..{n}")
    if trials < 1:
        raise InvalidSparsity("trials must be >= 1")
    total = comb(n, r)
    if trials >= total and total <= EXACT_GUARD:
        return min(
            smallest_singular_value(mat[:, list(s)]) for s in colex_supports(n, r)
        )
    best = np.inf
    for t in range(trials):
        support = stream.split(t).choose_without_replacement(n, r)
        best = min(best, smallest_singular_value(mat[:, support]))
    return float(best)


def gamma_lower_coherence(a: EffectiveSensing, r: int) -> float:
    """Gershgorin bound sqrt(max(0, 1 - (r-1) mu)) for unit-norm columns."""
    mu = self_coherence(a)
    return float(np.sqrt(max(0.0, 1.0 - (r - 1) * mu)))


def perturbation_check(
    a: EffectiveSensing, z1: np.ndarray, z2: np.ndarray, gamma_2k: float
) -> tuple[bool, float]:
    """Check ||z1 - z2|| <= ||A (z1 - z2)|| / gamma_2k; returns (holds, slack)."""
    if gamma_2k <= TOL.gamma_zero:
        raise DegenerateGamma(f"gamma_2k = {gamma_2k} is numerically zero")
    h = np.asarray(z1, dtype=float) - np.asarray(z2, dtype=float)
    lhs = float(np.linalg.norm(h))
    rhs = float(np.linalg.norm(a.a @ h)) / gamma_2k
    slack = rhs - lhs
    return slack >= -1e-9 * max(lhs, 1.0), slack


def geometry_report(
    a: EffectiveSensing,
    r: int,
    mode: str = "exact",
    trials: int = 0,
    stream=None,
) -> GeometryReport:
    """Assemble the gamma triple; the method used is always recorded."""
    n = a.a.shape[1]
    total = comb(n, r)
    try:
        lower = gamma_lower_coherence(a, r)
    except Exception:
        lower = 0.0  # columns not normalized: bound unavailable
    exact = witness = None
    examined = 0
    upper = np.inf
    if mode == "exact":
        exact, witness, examined = gamma_exact(a, r, with_witness=True)
        upper = exact
    elif mode == "sampled":
        if stream is None or trials < 1:
            raise InvalidSparsity("sampled mode needs trials >= 1 and a stream")
        upper = gamma_sampled(a, r, trials, stream)
        examined = min(trials, total)
    elif mode == "bound":
        upper = float(np.max(np.linalg.norm(a.a, axis=0)))  # trivial sigma bound
    else:
        raise InvalidSparsity(f"unknown mode {mode!r}")
    if exact is not None and lower > exact:
        # the r = 2 Gershgorin bound is tight; absorb last-ulp rounding
        lower = min(lower, exact)
    if exact is not None:
        injective = "no" if exact <= _zero_cutoff(a.a) else "yes"
    elif upper <= _zero_cutoff(a.a):
        injective = "no"
    else:
        injective = "unknown"
    return GeometryReport(
        r=r,
        gamma_exact=exact,
        gamma_upper=float(upper),
        gamma_lower=lower,
        injective_on_r_sparse=injective,
        witness=witness,
        supports_examined=examined,
        method=mode,
    )
