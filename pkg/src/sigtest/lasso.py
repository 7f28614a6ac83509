"""Lasso solution path via least angle regression (lasso modification).

Produces the ordered sequence of path knots -- penalty values at which the
active set changes -- together with exact lasso solutions at arbitrary
penalty values, on the full variable set or a restricted one.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DuplicateColumnError, NonUniqueSolutionWarning, SingularDesignError
from .linmodel import RANK_TOL, Dataset

# Penalty comparisons on standardized data use this absolute tolerance.
LAMBDA_TOL = 1e-10
# A path with max |x_m' y| below this is empty (zero response).
ZERO_CORR_TOL = 1e-12


@dataclass(frozen=True)
class Knot:
    """One path event: a variable entering (or leaving) the active set.

    ``entering`` holds the leaving variable when ``action == "leave"``.
    ``active_before`` is the active set just above the knot, in entry order;
    ``signs_after`` aligns with the active set just below the knot
    (``active_before + [entering]`` for entries, the remaining variables in
    order for deletions).
    """

    k: int
    lam: float
    entering: int
    active_before: tuple[int, ...]
    signs_after: tuple[int, ...]
    action: str = "enter"

    def __post_init__(self):
        if self.action not in ("enter", "leave"):
            raise ValueError(f"unknown knot action {self.action!r}")
        if self.action == "enter" and self.entering in self.active_before:
            raise ValueError("entering variable already active")

    @property
    def active_after(self) -> tuple[int, ...]:
        if self.action == "enter":
            return self.active_before + (self.entering,)
        return tuple(i for i in self.active_before if i != self.entering)


@dataclass(frozen=True)
class LassoPath:
    """Ordered knots of one lasso path plus the digest of its dataset."""

    knots: tuple[Knot, ...]
    data_digest: str
    warnings: tuple[str, ...] = ()

    def entry_knots(self) -> tuple[Knot, ...]:
        return tuple(kn for kn in self.knots if kn.action == "enter")

    @property
    def lambdas(self) -> tuple[float, ...]:
        return tuple(kn.lam for kn in self.knots)


@dataclass(frozen=True)
class KKTCoordinate:
    index: int
    active: bool
    correlation: float
    slack: float


@dataclass(frozen=True)
class KKTReport:
    """Per-coordinate stationarity check of a lasso solution."""

    passed: bool
    lam: float
    coordinates: tuple[KKTCoordinate, ...] = field(repr=False)
    violations: tuple[int, ...] = ()

    @property
    def worst_slack(self) -> float:
        return min(c.slack for c in self.coordinates) if self.coordinates else 0.0


def _check_duplicates(X: np.ndarray, columns: Sequence[int]) -> None:
    seen: dict[bytes, int] = {}
    for j in columns:
        key = X[:, j].tobytes()
        if key in seen:
            raise DuplicateColumnError(seen[key], j)
        seen[key] = j


def _segment_direction(X: np.ndarray, y: np.ndarray, active: list[int],
                       signs: dict[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Intercept and slope of the piecewise-linear segment on the active set.

    On a segment where ``active`` and ``signs`` are constant the solution is
    beta(lam) = b0 - lam * b1 with b0 the least-squares coefficients and
    b1 = (X_A' X_A)^{-1} s.
    """
    XA = X[:, active]
    Q, R = np.linalg.qr(XA)
    diag = np.abs(np.diag(R))
    if diag.min() < RANK_TOL * diag.max():
        raise SingularDesignError(f"active set {active} became rank deficient")
    s = np.array([signs[i] for i in active], dtype=float)
    b0 = np.linalg.solve(R, Q.T @ y)
    b1 = np.linalg.solve(R, np.linalg.solve(R.T, s))
    return b0, b1


def lars_path(data: Dataset, max_steps: int | None = None,
              columns: Sequence[int] | None = None,
              stop_lambda: float = 0.0) -> LassoPath:
    """Trace the lasso path, recording a knot per entry or deletion event.

    ``max_steps`` caps the number of *entry* events; deletions are recorded
    but do not count toward the cap. ``columns`` restricts the path to a
    subset of variables (indices stay in the full coordinate space).
    ``stop_lambda`` stops tracing once the next event falls below it.

    Entry ties within 1e-10 are broken by lowest column index and recorded in
    the path's warnings.
    """
    X, y = data.X, data.y
    cols = list(range(data.p)) if columns is None else [int(c) for c in columns]
    if len(set(cols)) != len(cols):
        raise ValueError("restricted column set contains repeats")
    if max_steps is not None and max_steps > min(data.n, len(cols) or 1):
        raise ValueError(f"max_steps={max_steps} exceeds min(n, p)")
    _check_duplicates(X, cols)

    warnings_list: list[str] = []
    knots: list[Knot] = []
    active: list[int] = []
    signs: dict[int, int] = {}
    inactive = set(cols)
    lam_cur = np.inf
    just_dropped: int | None = None
    entries = 0
    max_events = 50 * max(len(cols), 1)

    for _ in range(max_events):
        if max_steps is not None and entries >= max_steps:
            break
        if not active:
            if not inactive:
                break
            idx = sorted(inactive)
            c = X[:, idx].T @ y
            order = np.abs(c)
            lam_next = float(order.max()) if idx else 0.0
            if lam_next <= ZERO_CORR_TOL:
                break
            tied = [idx[i] for i in np.flatnonzero(order >= lam_next - LAMBDA_TOL)]
            j = min(tied)
            if len(tied) > 1:
                warnings_list.append(
                    f"entry tie at lambda={lam_next:.6g} among {tied}; chose {j}")
            lam_next = min(lam_next, lam_cur)
            if lam_next < stop_lambda:
                break
            sign = 1 if c[idx.index(j)] >= 0 else -1
            knots.append(Knot(k=len(knots) + 1, lam=lam_next, entering=j,
                              active_before=tuple(active),
                              signs_after=tuple([sign])))
            active.append(j)
            signs[j] = sign
            inactive.discard(j)
            entries += 1
            lam_cur = lam_next
            just_dropped = None
            continue

        try:
            b0, b1 = _segment_direction(X, y, active, signs)
        except SingularDesignError:
            break
        XA = X[:, active]
        r_ols = y - XA @ b0
        drift = XA @ b1

        # Entry candidates: inactive m crosses |x_m' r(lam)| = lam.
        best_entry_lam = -np.inf
        entry_ties: list[tuple[int, int]] = []
        for m in sorted(inactive):
            xm = X[:, m]
            a_m = float(xm @ r_ols)
            v_m = float(xm @ drift)
            # Correlation along the segment is a_m + lam*v_m; it meets the
            # boundary +lam at a/(1-v) and the boundary -lam at -a/(1+v).
            for denom, root_sign in ((1.0 - v_m, 1), (1.0 + v_m, -1)):
                if abs(denom) < 1e-14:
                    continue
                root = root_sign * a_m / denom
                if not np.isfinite(root):
                    continue
                if root <= ZERO_CORR_TOL or root > lam_cur + LAMBDA_TOL:
                    continue
                if m == just_dropped and root >= lam_cur - LAMBDA_TOL:
                    continue  # a just-deleted variable re-enters only strictly below
                if root > best_entry_lam + LAMBDA_TOL:
                    best_entry_lam = root
                    entry_ties = [(m, root_sign)]
                elif root >= best_entry_lam - LAMBDA_TOL:
                    entry_ties.append((m, root_sign))

        # Deletion candidates: active coefficient b0_i - lam*b1_i crosses zero.
        best_drop_lam = -np.inf
        drop_idx: int | None = None
        for pos, i in enumerate(active):
            if abs(b1[pos]) < 1e-14:
                continue
            root = b0[pos] / b1[pos]
            if root <= ZERO_CORR_TOL or root >= lam_cur - LAMBDA_TOL:
                continue
            if root > best_drop_lam:
                best_drop_lam = root
                drop_idx = i

        has_entry = np.isfinite(best_entry_lam) and best_entry_lam > ZERO_CORR_TOL
        has_drop = drop_idx is not None
        if not has_entry and not has_drop:
            break

        # Deletions take precedence on exact ties so the sign vector stays valid.
        if has_drop and (not has_entry or best_drop_lam >= best_entry_lam - LAMBDA_TOL):
            lam_next = min(best_drop_lam, lam_cur)
            if lam_next < stop_lambda:
                break
            before = tuple(active)
            knots.append(Knot(k=len(knots) + 1, lam=lam_next, entering=drop_idx,
                              active_before=before,
                              signs_after=tuple(signs[i] for i in active if i != drop_idx),
                              action="leave"))
            active.remove(drop_idx)
            del signs[drop_idx]
            inactive.add(drop_idx)
            just_dropped = drop_idx
            lam_cur = lam_next
            continue

        lam_next = min(best_entry_lam, lam_cur)
        if lam_next < stop_lambda:
            break
        if len(entry_ties) > 1:
            tied_vars = sorted({m for m, _ in entry_ties})
            warnings_list.append(
                f"entry tie at lambda={lam_next:.6g} among {tied_vars}; chose {min(tied_vars)}")
        j, sgn = min(entry_ties, key=lambda t: t[0])
        before = tuple(active)
        knots.append(Knot(k=len(knots) + 1, lam=lam_next, entering=j,
                          active_before=before,
                          signs_after=tuple([signs[i] for i in active] + [sgn])))
        active.append(j)
        signs[j] = sgn
        inactive.discard(j)
        entries += 1
        lam_cur = lam_next
        just_dropped = None
        if len(active) >= min(data.n, len(cols)):
            break
    else:
        raise RuntimeError("path did not terminate; data may be degenerate")

    return LassoPath(knots=tuple(knots), data_digest=data.digest,
                     warnings=tuple(warnings_list))


def _state_at(path: LassoPath, lam: float) -> tuple[list[int], dict[int, int]]:
    """Active set and signs of the path segment containing penalty ``lam``."""
    active: list[int] = []
    signs: dict[int, int] = {}
    for kn in path.knots:
        if kn.lam <= lam + LAMBDA_TOL:
            break
        if kn.action == "enter":
            active.append(kn.entering)
            signs[kn.entering] = kn.signs_after[-1]
        else:
            active.remove(kn.entering)
            del signs[kn.entering]
    return active, signs


def solve_at(path: LassoPath, data: Dataset, lam: float) -> np.ndarray:
    """Exact solution at penalty ``lam`` interpolated from an existing path.

    The path must extend below ``lam`` (or be exhausted above it).
    """
    if path.data_digest != data.digest:
        from .exceptions import StalePathError

        raise StalePathError("path was computed from different data")
    beta = np.zeros(data.p)
    active, signs = _state_at(path, lam)
    if not active:
        return beta
    b0, b1 = _segment_direction(data.X, data.y, active, signs)
    beta[active] = b0 - lam * b1
    return beta


def lasso_solve(data: Dataset, lam: float, subset: Sequence[int] | str = "all",
               path: LassoPath | None = None) -> np.ndarray:
    """Minimize 0.5*||y - X beta||^2 + lam*||beta||_1 over the given coordinates.

    Returns a vector in the full coordinate space with support inside
    ``subset``. Solved by tracing the restricted path and evaluating the
    containing linear segment, so knot values are reproduced exactly.
    A precomputed ``path`` (full-set only) is reused when supplied.

    A degenerate equicorrelation set (entry tie) makes the solution
    non-unique; the lowest-index representative is returned with a
    :class:`NonUniqueSolutionWarning`.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if isinstance(subset, str):
        if subset != "all":
            raise ValueError(f"unknown subset spec {subset!r}")
        columns = None
    else:
        columns = [int(c) for c in subset]
        if not columns:
            return np.zeros(data.p)
    if path is None or columns is not None:
        path = lars_path(data, columns=columns, stop_lambda=lam)
    if path.warnings:
        _warnings.warn(
            "solution may be non-unique (" + "; ".join(path.warnings) + ")",
            NonUniqueSolutionWarning)
    return solve_at(path, data, lam)


def kkt_check(data: Dataset, beta: np.ndarray, lam: float,
              subset: Sequence[int] | str = "all", tol: float = 1e-6) -> KKTReport:
    """Verify lasso stationarity of ``beta`` at penalty ``lam``.

    Passes iff every coordinate m in the subset satisfies
    x_m'(y - X beta) = lam * sign(beta_m) within tol when beta_m != 0 and
    |x_m'(y - X beta)| <= lam + tol when beta_m = 0.
    """
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (data.p,):
        raise ValueError(f"beta must have length p={data.p}")
    if isinstance(subset, str):
        if subset != "all":
            raise ValueError(f"unknown subset spec {subset!r}")
        cols = list(range(data.p))
    else:
        cols = [int(c) for c in subset]
    resid = data.y - data.X @ beta
    coords = []
    violations = []
    for m in cols:
        c_m = float(data.X[:, m] @ resid)
        if beta[m] != 0.0:
            slack = tol - abs(c_m - lam * np.sign(beta[m]))
        else:
            slack = lam + tol - abs(c_m)
        ok = slack >= 0.0
        if not ok:
            violations.append(m)
        coords.append(KKTCoordinate(index=m, active=beta[m] != 0.0,
                                    correlation=c_m, slack=float(slack)))
    return KKTReport(passed=not violations, lam=float(lam),
                     coordinates=tuple(coords), violations=tuple(violations))
