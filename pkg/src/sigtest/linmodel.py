"""Dense linear-model primitives.

Standardization, least squares on variable subsets, residual sums of squares,
and the scaled RSS-drop statistics that the significance tests consume.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .exceptions import (
    DegenerateColumnError,
    DegenerateVarianceError,
    MissingVarianceError,
    NotEstimableError,
    SingularDesignError,
)

# A subset is declared rank deficient when a triangular-factor diagonal falls
# below this fraction of the largest diagonal.
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix, response, and noise-variance declaration.

    ``sigma2=None`` means the noise variance is unknown; operations that
    divide by it raise :class:`MissingVarianceError` in that case.
    """

    X: np.ndarray
    y: np.ndarray
    sigma2: float | None = None

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float)).ravel()
        if X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        n, p = X.shape
        if n < 2 or p < 1:
            raise ValueError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.shape[0] != n:
            raise ValueError(f"y has length {y.shape[0]}, expected {n}")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains non-finite entries")
        if self.sigma2 is not None and not (self.sigma2 > 0):
            raise ValueError("sigma2 must be positive when supplied")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @cached_property
    def digest(self) -> str:
        """Checksum identifying (X, y) so solution paths can detect staleness."""
        h = hashlib.sha256()
        h.update(str(self.X.shape).encode())
        h.update(self.X.tobytes())
        h.update(self.y.tobytes())
        return h.hexdigest()

    def is_standardized(self, tol: float = 1e-8) -> bool:
        """True if every column of X has squared Euclidean norm 1 within tol."""
        norms2 = np.einsum("ij,ij->j", self.X, self.X)
        return bool(np.all(np.abs(norms2 - 1.0) <= tol))

    def require_sigma2(self) -> float:
        if self.sigma2 is None:
            raise MissingVarianceError(
                "noise variance is unknown; supply sigma2 or estimate it with estimate_sigma2"
            )
        return float(self.sigma2)


@dataclass(frozen=True, eq=False)
class SubsetFit:
    """Least-squares fit of y on an ordered subset of design columns."""

    subset: tuple[int, ...]
    coefficients: np.ndarray
    rss: float
    fitted: np.ndarray = field(repr=False)


def standardize(X: np.ndarray, center: bool = False) -> np.ndarray:
    """Rescale each column to unit squared Euclidean norm.

    With ``center=True`` the column mean is removed first. Unit *norm* (not
    unit variance) is used throughout so that path knots coincide with
    absolute residual correlations.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-d matrix")
    out = X.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        scale2 = float(col @ col)
        if center:
            col = col - col.mean()
            c2 = float(col @ col)
            if c2 == 0.0 or c2 <= 1e-24 * max(scale2, 1.0):
                raise DegenerateColumnError(j, f"column {j} is constant; cannot center and scale")
            out[:, j] = col / np.sqrt(c2)
        else:
            if scale2 == 0.0:
                raise DegenerateColumnError(j, f"column {j} has zero norm")
            out[:, j] = col / np.sqrt(scale2)
    return out


def _check_subset(data: Dataset, M: Sequence[int]) -> list[int]:
    M = [int(m) for m in M]
    if len(set(M)) != len(M):
        raise ValueError(f"subset contains repeated indices: {M}")
    for m in M:
        if not 0 <= m < data.p:
            raise IndexError(f"column index {m} out of range [0, {data.p})")
    return M


def least_squares(data: Dataset, M: Sequence[int]) -> SubsetFit:
    """Least-squares fit on columns M, solved by QR decomposition.

    Raises :class:`SingularDesignError` when X_M is rank deficient (diagonal
    of the triangular factor below RANK_TOL times its largest entry).
    """
    M = _check_subset(data, M)
    y = data.y
    if not M:
        return SubsetFit(subset=(), coefficients=np.zeros(0), rss=float(y @ y),
                         fitted=np.zeros(data.n))
    if len(M) > data.n:
        raise SingularDesignError(f"subset of size {len(M)} exceeds n={data.n}")
    XM = data.X[:, M]
    Q, R = np.linalg.qr(XM)
    diag = np.abs(np.diag(R))
    if diag.min() < RANK_TOL * diag.max():
        raise SingularDesignError(f"columns {M} are linearly dependent")
    coef = np.linalg.solve(R, Q.T @ y)
    fitted = XM @ coef
    resid = y - fitted
    return SubsetFit(subset=tuple(M), coefficients=coef, rss=float(resid @ resid),
                     fitted=fitted)


def r_stat(data: Dataset, A: Sequence[int], m: int) -> float:
    """Scaled RSS drop (RSS_A - RSS_{A u {m}}) / sigma2 from adding column m.

    Computed by two direct subset fits; always nonnegative.
    """
    sigma2 = data.require_sigma2()
    A = _check_subset(data, A)
    m = int(m)
    if m in A:
        raise ValueError(f"candidate index {m} already in the subset")
    rss_a = least_squares(data, A).rss
    rss_am = least_squares(data, list(A) + [m]).rss
    return max((rss_a - rss_am) / sigma2, 0.0)


def r_stats_batch(data: Dataset, A: Sequence[int]) -> dict[int, float]:
    """Scaled RSS drop for every candidate column not in A, in one pass.

    Uses the projection identity: the drop for column m equals
    (x_m' r_A)^2 / ||(I - P_A) x_m||^2 where r_A is the residual of y on A.
    Candidates numerically collinear with A get a drop of 0.
    """
    sigma2 = data.require_sigma2()
    A = _check_subset(data, A)
    mask = np.ones(data.p, dtype=bool)
    mask[A] = False
    cand = np.flatnonzero(mask)
    if cand.size == 0:
        return {}
    y = data.y
    Xc = data.X[:, cand]
    if A:
        Q, R = np.linalg.qr(data.X[:, A])
        diag = np.abs(np.diag(R))
        if diag.min() < RANK_TOL * diag.max():
            raise SingularDesignError(f"columns {list(A)} are linearly dependent")
        resid = y - Q @ (Q.T @ y)
        Z = Xc - Q @ (Q.T @ Xc)
    else:
        resid = y
        Z = Xc
    num = (Xc.T @ resid) ** 2
    den = np.einsum("ij,ij->j", Z, Z)
    drops = np.zeros(cand.size)
    ok = den > 1e-12
    drops[ok] = num[ok] / den[ok] / sigma2
    return {int(m): float(d) for m, d in zip(cand, drops)}


def estimate_sigma2(data: Dataset) -> float:
    """Plug-in noise variance RSS_full / (n - p); requires n > p."""
    if data.n <= data.p:
        raise NotEstimableError(f"cannot estimate sigma2 with n={data.n} <= p={data.p}")
    fit = least_squares(data, list(range(data.p)))
    est = fit.rss / (data.n - data.p)
    scale = float(data.y @ data.y)
    if est == 0.0 or est <= 1e-24 * max(scale, 1.0):
        raise DegenerateVarianceError(
            "full fit is exact; variance estimate of 0 would break every test"
        )
    return float(est)
