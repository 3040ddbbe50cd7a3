"""Local linear gap models: LARS-lasso path, Mallows Cp selection, residual pools."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import SeasonalSeries
from .embedding import EmbeddedDataset
from .neighbors import NeighborSet

_TOL = 1e-10


class RegressionError(ValueError):
    pass


@dataclass(frozen=True)
class LarsStep:
    active: tuple[int, ...]     # original column indices
    coef: np.ndarray            # (p,) shrunken path coefficients, original X units
    sse: float                  # residual sum of squares of the path fit
    coef_ols: np.ndarray        # OLS refit on the active set
    sse_ols: float


@dataclass(frozen=True)
class LarsPath:
    steps: tuple[LarsStep, ...]  # steps[0] is the intercept-only model
    xbar: np.ndarray
    ybar: float
    n: int
    p: int

    def predict(self, step: int, x: np.ndarray) -> float:
        st = self.steps[step]
        return float(self.ybar + (np.asarray(x) - self.xbar) @ st.coef)


def lars_path(X: np.ndarray, y: np.ndarray) -> LarsPath:
    """Least-angle regression path with the lasso modification (drops).

    Columns are centered and scaled to unit norm internally; reported
    coefficients are in the original units with the intercept implied by
    (xbar, ybar). The path runs from the empty model to at most
    min(n-1, p) variables, stopping early at rank deficiency.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n < 2:
        raise RegressionError("need at least 2 rows")
    if y.shape != (n,):
        raise RegressionError("y length mismatch")
    xbar = X.mean(axis=0)
    ybar = float(y.mean())
    Xc = X - xbar
    yc = y - ybar
    norms = np.sqrt((Xc ** 2).sum(axis=0))
    scale_ref = max(norms.max(), 1.0) if p else 1.0
    usable = np.flatnonzero(norms > 1e-12 * scale_ref)
    Xs = Xc[:, usable] / norms[usable] if len(usable) else np.empty((n, 0))
    pu = len(usable)

    def record(beta_std, mu):
        coef = np.zeros(p)
        coef[usable] = beta_std / norms[usable]
        act = tuple(int(usable[j]) for j in range(pu) if beta_std[j] != 0.0)
        coef_ols = np.zeros(p)
        if act:
            XA = Xc[:, act]
            b, *_ = np.linalg.lstsq(XA, yc, rcond=None)
            coef_ols[list(act)] = b
            sse_ols = float(((yc - XA @ b) ** 2).sum())
        else:
            sse_ols = float((yc ** 2).sum())
        return LarsStep(active=act, coef=coef, sse=float(((yc - mu) ** 2).sum()),
                        coef_ols=coef_ols, sse_ols=sse_ols)

    beta = np.zeros(pu)
    mu = np.zeros(n)
    steps = [record(beta, mu)]
    active: list[int] = []
    max_vars = min(n - 1, pu)
    just_dropped = False
    y_scale = max(np.sqrt((yc ** 2).sum()), 1.0)

    while True:
        c = Xs.T @ (yc - mu) if pu else np.empty(0)
        inactive = [j for j in range(pu) if j not in active]
        if not just_dropped:
            if not inactive or len(active) >= max_vars:
                break
            cmax_in = np.max(np.abs(c[inactive]))
            if cmax_in < _TOL * y_scale:
                break
            # ties break to the lower column index
            jnew = min(j for j in inactive if abs(c[j]) >= cmax_in - _TOL * y_scale)
            active.append(jnew)
        C = float(np.max(np.abs(c[active])))
        if C < _TOL * y_scale:
            break
        s = np.sign(c[active])
        XA = Xs[:, active] * s
        G = XA.T @ XA
        try:
            Ginv1 = np.linalg.solve(G, np.ones(len(active)))
        except np.linalg.LinAlgError:
            active.pop() if not just_dropped else None
            break
        denom = float(np.ones(len(active)) @ Ginv1)
        if denom <= 0 or not np.isfinite(denom):
            if not just_dropped:
                active.pop()
            break
        A = 1.0 / np.sqrt(denom)
        w = A * Ginv1
        u = XA @ w
        a = Xs.T @ u if pu else np.empty(0)
        gamma = C / A
        inactive = [j for j in range(pu) if j not in active]
        if len(active) < max_vars:
            for j in inactive:
                for val in ((C - c[j]) / (A - a[j]) if abs(A - a[j]) > _TOL else np.inf,
                            (C + c[j]) / (A + a[j]) if abs(A + a[j]) > _TOL else np.inf):
                    if _TOL * y_scale < val < gamma:
                        gamma = float(val)
        # lasso modification: drop a coefficient crossing zero
        d = s * w
        gamma_tilde, drop_pos = np.inf, None
        for pos, j in enumerate(active):
            if abs(d[pos]) > _TOL:
                g = -beta[j] / d[pos]
                if _TOL * y_scale < g < gamma_tilde:
                    gamma_tilde, drop_pos = g, pos
        just_dropped = False
        if gamma_tilde < gamma:
            gamma = gamma_tilde
            just_dropped = True
        beta[active] += gamma * d
        mu = mu + gamma * u
        if just_dropped:
            beta[active[drop_pos]] = 0.0
            del active[drop_pos]
        steps.append(record(beta, mu))
        if len(steps) > 4 * (pu + 1) + 2:   # safety against cycling
            break

    return LarsPath(steps=tuple(steps), xbar=xbar, ybar=ybar, n=n, p=p)


def cp_select(path: LarsPath, sigma2: float | None = None) -> int:
    """Index of the path step minimizing Mallows Cp; ties go to the smaller
    active set.

    Cp is scored on the OLS refit of each step's active set (the path
    proposes candidate subsets; shrunken fits would bias Cp toward larger
    models). sigma2 defaults to the residual variance of the fullest step.
    """
    if sigma2 is None:
        last = path.steps[-1]
        dof = path.n - len(last.active) - 1
        sigma2 = last.sse_ols / dof if dof > 0 else last.sse_ols
        sigma2 = max(sigma2, 1e-12)
    if sigma2 <= 0:
        raise RegressionError("sigma2 must be positive")
    best, best_cp, best_p = 0, np.inf, np.inf
    for i, st in enumerate(path.steps):
        psize = len(st.active)
        cp = st.sse_ols / sigma2 - path.n + 2 * (psize + 1)
        if cp < best_cp - 1e-12 or (abs(cp - best_cp) <= 1e-12 and psize < best_p):
            best, best_cp, best_p = i, cp, psize
    return best


@dataclass(frozen=True)
class GapModel:
    gap: int
    target: int                  # 1-based column of the predicted variable
    intercept: float
    coef: np.ndarray             # (m,) over view coordinates
    residual_pool: np.ndarray    # (j,) in-sample residuals of the selected model
    cp: float
    active: tuple[int, ...]

    def predict(self, query: np.ndarray) -> float:
        return float(self.intercept + np.asarray(query) @ self.coef)


def fit_gap_regression(train: SeasonalSeries, embedded: EmbeddedDataset,
                       hood: NeighborSet, target: int, gap: int) -> GapModel:
    """Fit the Cp-selected LARS model predicting the target `gap` seasons
    ahead of each neighbor anchor, over the view coordinates."""
    m = embedded.points.shape[1]
    if hood.j < m + 2 and hood.j < len(embedded.points):
        raise RegressionError(
            f"{hood.j} neighbors for {m}-dimensional design; request a larger j")
    flat = train.flat()
    t_max = train.n_train_times() if train.train_through is not None else len(flat)
    ahead = hood.anchors + gap
    if np.any(ahead >= t_max):
        raise RegressionError(
            f"neighbor anchor(s) lack a target value {gap} seasons ahead in training")
    X = embedded.points[hood.indices]
    y = flat[ahead, target - 1]
    path = lars_path(X, y)
    step = cp_select(path)
    st = path.steps[step]
    intercept = path.ybar - path.xbar @ st.coef_ols
    fitted = intercept + X @ st.coef_ols
    last = path.steps[-1]
    sigma2 = max(last.sse_ols / max(path.n - len(last.active) - 1, 1), 1e-12)
    cp = st.sse_ols / sigma2 - path.n + 2 * (len(st.active) + 1)
    return GapModel(gap=gap, target=target, intercept=float(intercept),
                    coef=st.coef_ols, residual_pool=y - fitted, cp=float(cp),
                    active=st.active)


def predict_with_residual(model: GapModel, query: np.ndarray,
                          rng: np.random.Generator,
                          residual_index: int | None = None) -> float:
    """Linear prediction at the query plus one residual resampled from the
    training pool (uniformly, or at a caller-fixed index)."""
    if residual_index is None:
        residual_index = int(rng.integers(len(model.residual_pool)))
    return model.predict(query) + float(model.residual_pool[residual_index])
