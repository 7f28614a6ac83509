"""Likelihood-based analogue of the test for logistic and Cox regression.

Per-variable likelihood-ratio drops replace the scaled RSS drops of the
linear model; the extreme-value centering and Gumbel reference apply
unchanged to the maximal drop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (
    ConvergenceError,
    NoEventsError,
    SeparationError,
    SingularDesignError,
    TooFewRemainingError,
    UnreliableMaxError,
)
from .linmodel import RANK_TOL, Dataset, least_squares
from .significance import TestOutcome, gumbel_correction, gumbel_sf

MAX_ITER = 100
GRAD_TOL = 1e-8
DIVERGENCE_NORM = 1e3
MAX_HALVINGS = 20


@dataclass(frozen=True, eq=False)
class BinaryDataset:
    """Design matrix and 0/1 response for logistic regression."""

    X: np.ndarray
    y: np.ndarray
    include_intercept: bool = True

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        y = np.ascontiguousarray(np.asarray(self.y, dtype=float)).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError("X must be n x p with y of length n")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValueError("y must contain only 0 and 1")
        if y.min() == y.max():
            raise ValueError("y must contain at least one 0 and one 1")
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


@dataclass(frozen=True, eq=False)
class SurvivalDataset:
    """Design matrix, follow-up times, and event indicators for Cox regression."""

    X: np.ndarray
    time: np.ndarray
    status: np.ndarray

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.X, dtype=float))
        time = np.ascontiguousarray(np.asarray(self.time, dtype=float)).ravel()
        status = np.ascontiguousarray(np.asarray(self.status, dtype=float)).ravel()
        if X.ndim != 2 or X.shape[0] != time.shape[0] or time.shape != status.shape:
            raise ValueError("X must be n x p with time and status of length n")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(time)):
            raise ValueError("non-finite entries in X or time")
        if np.any(time <= 0):
            raise ValueError("all times must be positive")
        if not np.all(np.isin(status, (0.0, 1.0))):
            raise ValueError("status must contain only 0 and 1")
        if status.sum() < 1:
            raise NoEventsError("survival data contains no observed events")
        X.setflags(write=False)
        time.setflags(write=False)
        status.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "status", status)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True, eq=False)
class FitResult:
    """Converged maximum-likelihood fit on a variable subset.

    For logistic fits with an intercept, ``coefficients[0]`` is the
    intercept and the remaining entries follow ``subset`` order.
    """

    subset: tuple[int, ...]
    coefficients: np.ndarray
    loglik: float
    converged: bool
    iterations: int


def _check_rank(Z: np.ndarray, what: str) -> None:
    if Z.shape[1] == 0:
        return
    if Z.shape[1] > Z.shape[0]:
        raise SingularDesignError(f"{what}: more columns than rows")
    diag = np.abs(np.diag(np.linalg.qr(Z, mode="r")))
    if diag.min() < RANK_TOL * diag.max():
        raise SingularDesignError(f"{what}: design is rank deficient")


def _newton(loglik_grad_hess, beta0: np.ndarray, what: str) -> tuple[np.ndarray, float, int]:
    """Damped Newton ascent with step halving; shared by both families.

    The callback returns (loglik, gradient, information matrix), the
    information matrix being the negated Hessian, so the ascent step solves
    ``info @ step = grad``.
    """
    beta = beta0.copy()
    ll, grad, hess = loglik_grad_hess(beta)
    for it in range(1, MAX_ITER + 1):
        if np.linalg.norm(grad) < GRAD_TOL:
            return beta, ll, it - 1
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            raise ConvergenceError(f"{what}: singular information matrix") from None
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            cand = beta + scale * step
            ll_new, grad_new, hess_new = loglik_grad_hess(cand)
            if np.isfinite(ll_new) and ll_new >= ll - 1e-12:
                break
            scale *= 0.5
        else:
            raise ConvergenceError(f"{what}: step halving failed to improve the likelihood")
        beta, ll, grad, hess = cand, ll_new, grad_new, hess_new
        if np.linalg.norm(beta) > DIVERGENCE_NORM:
            raise SeparationError(f"{what}: coefficients diverging; likelihood unbounded")
    if np.linalg.norm(grad) < GRAD_TOL:
        return beta, ll, MAX_ITER
    raise ConvergenceError(f"{what}: no convergence after {MAX_ITER} iterations")


def logistic_fit(data: BinaryDataset, M: Sequence[int]) -> FitResult:
    """Maximize the Bernoulli log-likelihood on columns M by Newton iterations.

    Includes an unpenalized intercept when the dataset requests one.
    """
    M = [int(m) for m in M]
    if len(set(M)) != len(M):
        raise ValueError("subset contains repeated indices")
    blocks = []
    if data.include_intercept:
        blocks.append(np.ones((data.n, 1)))
    if M:
        blocks.append(data.X[:, M])
    if not blocks:
        # No parameters at all: eta = 0, p = 1/2 for every observation.
        return FitResult(subset=(), coefficients=np.zeros(0),
                         loglik=-data.n * math.log(2.0), converged=True, iterations=0)
    Z = np.hstack(blocks)
    _check_rank(Z, "logistic fit")
    y = data.y

    def objective(beta):
        eta = Z @ beta
        ll = float(y @ eta - np.logaddexp(0.0, eta).sum())
        prob = 1.0 / (1.0 + np.exp(-np.clip(eta, -500.0, 500.0)))
        grad = Z.T @ (y - prob)
        w = prob * (1.0 - prob)
        hess = Z.T @ (w[:, None] * Z)
        return ll, grad, hess

    beta, ll, iters = _newton(objective, np.zeros(Z.shape[1]), "logistic fit")
    return FitResult(subset=tuple(M), coefficients=beta, loglik=ll,
                     converged=True, iterations=iters)


def _cox_prepared(data: SurvivalDataset):
    """Sort by follow-up time and group tied event times for suffix sums."""
    order = np.argsort(data.time, kind="stable")
    time = data.time[order]
    status = data.status[order]
    event_pos = np.flatnonzero(status == 1.0)
    # Risk set of an event at position i is positions first(i)..n-1, where
    # first(i) is the first index sharing the event's time.
    first = np.searchsorted(time, time[event_pos], side="left")
    return order, event_pos, first


def cox_fit(data: SurvivalDataset, M: Sequence[int]) -> FitResult:
    """Maximize the partial log-likelihood on columns M by damped Newton.

    Ties are handled by pooling tied events over the same risk set.
    """
    M = [int(m) for m in M]
    if len(set(M)) != len(M):
        raise ValueError("subset contains repeated indices")
    if data.status.sum() < 1:
        raise NoEventsError("survival data contains no observed events")
    order, event_pos, first = _cox_prepared(data)
    if not M:
        riskset_sizes = data.n - first
        ll = -float(np.log(riskset_sizes).sum())
        return FitResult(subset=(), coefficients=np.zeros(0), loglik=ll,
                         converged=True, iterations=0)
    Xs = data.X[order][:, M]
    _check_rank(Xs, "cox fit")
    m = len(M)

    def objective(beta):
        # Far along a diverging direction the risk-set sums can underflow;
        # the resulting non-finite candidates are rejected by the line
        # search, so the numpy warnings are suppressed here.
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            eta = Xs @ beta
            shift = eta.max()
            w = np.exp(eta - shift)
            wx = w[:, None] * Xs
            # Suffix sums over the sorted order: sum of w (and w*x, w*x*x')
            # from each position to the end.
            s0 = np.cumsum(w[::-1])[::-1]
            s1 = np.cumsum(wx[::-1], axis=0)[::-1]
            wxx = wx[:, :, None] * Xs[:, None, :]
            s2 = np.cumsum(wxx[::-1], axis=0)[::-1]
            denom = s0[first]
            ll = float(eta[event_pos].sum() - (np.log(denom) + shift).sum())
            mean = s1[first] / denom[:, None]
            grad = Xs[event_pos].sum(axis=0) - mean.sum(axis=0)
            hess = (s2[first] / denom[:, None, None]).sum(axis=0) \
                - np.einsum("ei,ej->ij", mean, mean)
        return ll, grad, hess

    beta, ll, iters = _newton(objective, np.zeros(m), "cox fit")
    return FitResult(subset=tuple(M), coefficients=beta, loglik=ll,
                     converged=True, iterations=iters)


def gaussian_loglik(data: Dataset, M: Sequence[int]) -> float:
    """Gaussian log-likelihood of the least-squares fit on M with known variance."""
    sigma2 = data.require_sigma2()
    fit = least_squares(data, M)
    return -0.5 * data.n * math.log(2.0 * math.pi * sigma2) - fit.rss / (2.0 * sigma2)


def lrt_drop(family: str, data, A: Sequence[int], m: int) -> float:
    """Likelihood-ratio drop 2*(loglik(A u {m}) - loglik(A)), clamped at 0."""
    A = [int(a) for a in A]
    m = int(m)
    if m in A:
        raise ValueError(f"candidate index {m} already in the subset")
    if family == "gaussian":
        base = gaussian_loglik(data, A)
        full = gaussian_loglik(data, A + [m])
    elif family == "logistic":
        base = logistic_fit(data, A).loglik
        full = logistic_fit(data, A + [m]).loglik
    elif family == "cox":
        base = cox_fit(data, A).loglik
        full = cox_fit(data, A + [m]).loglik
    else:
        raise ValueError(f"unknown family {family!r}")
    return max(2.0 * (full - base), 0.0)


def _base_loglik(family: str, data, A: list[int]) -> float:
    if family == "gaussian":
        return gaussian_loglik(data, A)
    if family == "logistic":
        return logistic_fit(data, A).loglik
    if family == "cox":
        return cox_fit(data, A).loglik
    raise ValueError(f"unknown family {family!r}")


def lrt_drops_all(family: str, data, A: Sequence[int]) -> tuple[dict[int, float], list[str]]:
    """Drop of every candidate outside A; failed fits are reported, not raised."""
    A = [int(a) for a in A]
    base = _base_loglik(family, data, A)
    drops: dict[int, float] = {}
    failures: list[str] = []
    for m in range(data.p):
        if m in A:
            continue
        try:
            if family == "gaussian":
                full = gaussian_loglik(data, A + [m])
            elif family == "logistic":
                full = logistic_fit(data, A + [m]).loglik
            else:
                full = cox_fit(data, A + [m]).loglik
        except (SeparationError, ConvergenceError, SingularDesignError) as exc:
            failures.append(f"fit failed for candidate {m}: {exc}")
            continue
        drops[m] = max(2.0 * (full - base), 0.0)
    return drops, failures


def gumbel_test_glm(family: str, data, A: Sequence[int],
                    alpha: float = 0.05) -> TestOutcome:
    """Extreme-value test of the best remaining candidate by likelihood ratio.

    The statistic is the maximal drop minus the centering for the number of
    remaining candidates. Candidates whose fit fails are excluded with a
    warning; if more than 10% fail the maximum is unreliable and the test
    aborts.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    A = [int(a) for a in A]
    m_remaining = data.p - len(A)
    if m_remaining < 3:
        raise TooFewRemainingError(
            f"need at least 3 remaining candidates, got {m_remaining}")
    drops, failures = lrt_drops_all(family, data, A)
    if len(failures) > 0.10 * m_remaining or not drops:
        raise UnreliableMaxError(
            f"{len(failures)} of {m_remaining} candidate fits failed; "
            "maximum statistic unreliable")
    best = max(drops.values())
    j = min(m for m, d in drops.items() if d >= best - 1e-12)
    corr = gumbel_correction(m_remaining)
    stat = best - corr
    p_value = gumbel_sf(stat)
    return TestOutcome(kind="gumbel_glm", k=len(A) + 1, statistic=float(stat),
                       p_value=float(p_value), alpha=float(alpha),
                       reject=bool(p_value <= alpha), A=tuple(A), j=j,
                       correction=float(corr), conservative=False,
                       warnings=tuple(failures))
