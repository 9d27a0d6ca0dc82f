"""Dense linear-algebra primitives and matrix/vector CSV serialization.

Matrices and vectors are plain float64 numpy arrays throughout the
package; all functions here are pure. Numerical policy (every tolerance
used downstream) lives in a single `Tolerances` record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IoFailure, RankDeficient


@dataclass(frozen=True)
class Tolerances:
    """Single source of truth for numerical thresholds."""

    rank_rel: float = 1e-12        # sigma_min / sigma_max below this => rank deficient
    ortho: float = 1e-10           # orthonormality of basis Gram matrices
    unit_column: float = 1e-12     # unit-norm column check
    residual_ortho: float = 1e-9   # least-squares residual orthogonality
    zero_tau: float = 1e-8         # relative magnitude threshold for "zero" coefficients
    gamma_zero: float = 1e-10      # gamma treated as exactly 0 below this
    feasibility_slack: float = 1e-10


TOL = Tolerances()


def least_squares(a_sub: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum-residual coefficients for a_sub @ c ~ y via SVD.

    Raises RankDeficient when the column condition exceeds 1/rank_rel.
    """
    a_sub = np.atleast_2d(np.asarray(a_sub, dtype=float))
    y = np.asarray(y, dtype=float)
    if a_sub.shape[0] != y.shape[0]:
        raise RankDeficient(
            f"shape mismatch: {a_sub.shape[0]} rows vs {y.shape[0]} entries"
        )
    u, s, vt = np.linalg.svd(a_sub, full_matrices=False)
    if s[0] == 0.0 or s[-1] < TOL.rank_rel * s[0]:
        raise RankDeficient(f"sigma_min/sigma_max = {s[-1]:.3e}/{s[0]:.3e}")
    return vt.T @ ((u.T @ y) / s)


def smallest_singular_value(m: np.ndarray) -> float:
    """sigma_min of m as an operator on its column space coordinates.

    Computed from a direct SVD: absolute accuracy ~eps * sigma_max, which
    a Gram-matrix eigensolve cannot deliver near zero. Returns 0 for
    rank-deficient (including wide) matrices; never negative.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    s = np.linalg.svd(m, compute_uv=False)
    if m.shape[1] > m.shape[0]:
        return 0.0  # wide: the kernel is nontrivial
    return float(s[-1])


def smallest_singular_pair(m: np.ndarray) -> tuple[float, np.ndarray]:
    """(sigma_min, right singular vector attaining it)."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    _, s, vt = np.linalg.svd(m)
    sigma = 0.0 if m.shape[1] > m.shape[0] else float(s[-1])
    return sigma, vt[-1]


def save_matrix(path, m: np.ndarray) -> None:
    """Write a matrix in the lab CSV format: header `rows,cols`, 17 sig digits."""
    m = np.atleast_2d(np.asarray(m, dtype=float))
    rows, cols = m.shape
    try:
        with open(path, "w") as fh:
            fh.write(f"{rows},{cols}\n")
            for r in range(rows):
                fh.write(",".join(f"{v:.17g}" for v in m[r]) + "\n")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def load_matrix(path) -> np.ndarray:
    """Read a matrix written by save_matrix; validates the declared shape."""
    try:
        with open(path) as fh:
            header = fh.readline().strip()
            rows, cols = (int(t) for t in header.split(","))
            data = [
                [float(t) for t in line.strip().split(",")]
                for line in fh
                if line.strip()
            ]
    except (OSError, ValueError) as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    m = np.array(data, dtype=float)
    if m.shape != (rows, cols):
        raise IoFailure(f"{path}: declared {rows}x{cols}, found {m.shape}")
    if not np.all(np.isfinite(m)):
        raise IoFailure(f"{path}: non-finite entries")
    return m


def save_vector(path, v: np.ndarray) -> None:
    save_matrix(path, np.asarray(v, dtype=float).reshape(-1, 1))


def load_vector(path) -> np.ndarray:
    m = load_matrix(path)
    if m.shape[1] != 1:
        raise IoFailure(f"{path}: expected a single column, found {m.shape[1]}")
    return m[:, 0]
