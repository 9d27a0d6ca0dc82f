"""Representation-complexity oracles, mismatch sparsity, and planted instances."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .dictionaries import Dictionary, SensingOperator
from .errors import (
    DimensionMismatch,
    EnumerationTooLarge,
    InvalidSparsity,
    RankDeficient,
    ZeroSignal,
)
from .geometry import colex_supports
from .numerics import TOL, least_squares
from .rng import RandomStream

DEFAULT_TAU = TOL.zero_tau
ENUMERATION_GUARD = 2 ** 24
MIN_COEFF = 0.1  # planted magnitudes bounded away from the zero threshold


@dataclass(frozen=True)
class SparsityReport:
    k_psi: int
    support: tuple[int, ...]
    tau: float


@dataclass(frozen=True)
class PlantedInstance:
    truth_basis: Dictionary
    alpha_star: np.ndarray
    x: np.ndarray
    k: int

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(np.flatnonzero(self.alpha_star))


@dataclass(frozen=True)
class Observation:
    y: np.ndarray
    epsilon: float
    noise_realization: np.ndarray


def _as_matrix(psi) -> np.ndarray:
    return psi.psi if isinstance(psi, Dictionary) else np.atleast_2d(np.asarray(psi, dtype=float))


def _is_orthonormal(mat: np.ndarray) -> bool:
    if mat.shape[0] != mat.shape[1]:
        return False
    return bool(np.allclose(mat.T @ mat, np.eye(mat.shape[1]), atol=TOL.ortho))


def representation_complexity(x: np.ndarray, psi, tau: float = DEFAULT_TAU) -> SparsityReport:
    """Minimal support size expressing x in psi, up to relative threshold tau.

    Orthonormal bases use the analysis transform directly; a general
    matrix argument falls back to support enumeration in increasing size
    (guarded at 2^24 candidate supports).
    """
    x = np.asarray(x, dtype=float)
    xnorm = float(np.linalg.norm(x))
    if xnorm == 0.0:
        raise ZeroSignal("representation complexity of the zero signal is undefined")
    if not 0.0 < tau <= 1e-3:
        raise InvalidSparsity(f"tau must lie in (0, 1e-3], got {tau}")
    mat = _as_matrix(psi)
    if mat.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"psi has {mat.shape[0]} rows, x has {x.shape[0]} entries")
    if _is_orthonormal(mat):
        coeffs = mat.T @ x
        support = np.flatnonzero(np.abs(coeffs) > tau * xnorm)
        return SparsityReport(k_psi=len(support), support=tuple(support), tau=tau)
    n = mat.shape[1]
    examined = 0
    for size in range(1, n + 1):
        examined += comb(n, size)
        if examined > ENUMERATION_GUARD:
            raise EnumerationTooLarge(f"> {ENUMERATION_GUARD} candidate supports")
        for support in colex_supports(n, size):
            cols = mat[:, list(support)]
            try:
                c = least_squares(cols, x)
            except RankDeficient:
                continue
            if np.linalg.norm(cols @ c - x) <= tau * xnorm:
                return SparsityReport(k_psi=size, support=support, tau=tau)
    raise ZeroSignal("x is not in the column span of psi")  # unreachable for spanning psi


def effective_sparsity(x: np.ndarray, psi: Dictionary, tau: float = DEFAULT_TAU) -> int:
    """Nonzero count of the analysis coefficients of x in an orthonormal basis."""
    x = np.asarray(x, dtype=float)
    xnorm = float(np.linalg.norm(x))
    if xnorm == 0.0:
        raise ZeroSignal("effective sparsity of the zero signal is undefined")
    mat = _as_matrix(psi)
    if not _is_orthonormal(mat):
        raise InvalidSparsity("effective_sparsity requires an orthonormal basis")
    return int(np.sum(np.abs(mat.T @ x) > tau * xnorm))


def plant(truth_basis: Dictionary, k: int, stream: RandomStream) -> PlantedInstance:
    """k-sparse coefficients with magnitudes >= 0.1, deterministic per stream."""
    n = truth_basis.n
    if not 1 <= k <= n:
        raise InvalidSparsity(f"k={k} outside 1..{n}")
    support = stream.split(0).choose_without_replacement(n, k)
    signs = np.where(stream.split(1).uniforms(k) < 0.5, -1.0, 1.0)
    magnitudes = MIN_COEFF + np.abs(stream.split(2).gaussians(k))
    alpha = np.zeros(n)
    alpha[support] = signs * magnitudes
    return PlantedInstance(truth_basis=truth_basis, alpha_star=alpha, x=truth_basis.psi @ alpha, k=k)


def observe(x: np.ndarray, phi: SensingOperator, epsilon: float, stream: RandomStream) -> Observation:
    """Noisy measurement; noise drawn uniformly on the epsilon-sphere."""
    x = np.asarray(x, dtype=float)
    if phi.d != x.shape[0]:
        raise DimensionMismatch(f"phi.d={phi.d}, len(x)={x.shape[0]}")
    if epsilon < 0:
        raise InvalidSparsity("epsilon must be nonnegative")
    clean = phi.phi @ x
    if epsilon == 0.0:
        noise = np.zeros(phi.m)
    else:
        g = stream.split(3).gaussians(phi.m)
        noise = epsilon * g / np.linalg.norm(g)
    return Observation(y=clean + noise, epsilon=epsilon, noise_realization=noise)


def validate_instance(inst: PlantedInstance) -> None:
    """Re-check PlantedInstance invariants, e.g. after loading from disk."""
    if not np.allclose(inst.x, inst.truth_basis.psi @ inst.alpha_star, atol=1e-12):
        raise InvalidSparsity("x != psi @ alpha within 1e-12")
    nz = np.abs(inst.alpha_star[np.flatnonzero(inst.alpha_star)])
    if len(nz) != inst.k:
        raise InvalidSparsity(f"||alpha||_0 = {len(nz)} != k = {inst.k}")
    if len(nz) and np.min(nz) < MIN_COEFF:
        raise InvalidSparsity("planted coefficient below the 0.1 magnitude floor")
