"""Exact maximum-likelihood ARIMA and regression-with-ARIMA-errors models.

The differenced, regression-adjusted series ``w_t = D^d y_t - mu - D^d X_t beta``
follows a zero-mean ARMA(p, q)::

    w_t = phi_1 w_{t-1} + ... + phi_p w_{t-p} + e_t + theta_1 e_{t-1} + ... + theta_q e_{t-q}

Its likelihood comes from the prediction-error decomposition of a Kalman
filter over the Harvey state-space form, started from the stationary state
covariance, so the likelihood is exact rather than conditional.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import optimize
from scipy.signal import lfilter

from teleconnect.errors import DomainError, NumericError, SearchError, TeleconnectError
from teleconnect.series import ErrorMeasures, Period, TimeSeries, _values, error_measures

LOG_2PI = math.log(2.0 * math.pi)
ADMISSIBLE_ROOT = 1.01


@dataclass(frozen=True)
class ModelSpec:
    p: int = 0
    d: int = 0
    q: int = 0
    include_drift: bool = False
    exog_names: tuple = ()

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise DomainError("ARIMA orders must be non-negative")
        if self.d > 2:
            raise DomainError("differencing order above 2 is not supported")
        object.__setattr__(self, "exog_names", tuple(self.exog_names))

    @property
    def order(self) -> tuple[int, int, int]:
        return (self.p, self.d, self.q)

    @property
    def n_regression(self) -> int:
        return int(self.include_drift) + len(self.exog_names)

    @property
    def n_params(self) -> int:
        """Estimated parameters, counting the innovation variance."""
        return self.p + self.q + self.n_regression + 1

    def coef_names(self) -> list[str]:
        names = [f"ar{i}" for i in range(1, self.p + 1)]
        names += [f"ma{i}" for i in range(1, self.q + 1)]
        if self.include_drift:
            names.append("drift" if self.d > 0 else "intercept")
        names += list(self.exog_names)
        return names

    def describe(self) -> str:
        label = "ARIMAX" if self.exog_names else "ARIMA"
        extra = " with drift" if self.include_drift else ""
        return f"{label}({self.p},{self.d},{self.q}){extra}"


@dataclass(frozen=True)
class ParamVector:
    phi: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu: float = 0.0
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sigma2: float = 1.0

    def __post_init__(self):
        for name in ("phi", "theta", "beta"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))

    def coefficients(self, spec: ModelSpec) -> list[float]:
        vals = list(self.phi) + list(self.theta)
        if spec.include_drift:
            vals.append(self.mu)
        vals += list(self.beta)
        return [float(v) for v in vals]


# -- constraint transforms -------------------------------------------------

@njit(cache=True, nogil=True)
def _pacf_to_ar(r):  # pragma: no cover - compiled
    m = r.shape[0]
    phi = np.zeros(m)
    prev = np.zeros(m)
    for k in range(m):
        for j in range(k):
            prev[j] = phi[j]
        for j in range(k):
            phi[j] = prev[j] - r[k] * prev[k - 1 - j]
        phi[k] = r[k]
    return phi


def pacf_to_ar(r) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to stationary AR coefficients."""
    return _pacf_to_ar(np.ascontiguousarray(r, dtype=float))


def ar_to_pacf(phi) -> np.ndarray:
    """Inverse of :func:`pacf_to_ar` (step-down recursion)."""
    a = np.asarray(phi, dtype=float).copy()
    m = a.size
    r = np.zeros(m)
    for k in range(m - 1, -1, -1):
        rk = a[k]
        r[k] = rk
        if k == 0:
            break
        denom = 1.0 - rk * rk
        if denom <= 0:
            raise DomainError("coefficients are not stationary")
        a = (a[:k] + rk * a[:k][::-1]) / denom
    return r


def _unconstrain(coefs, sign=1.0, clip=0.99) -> np.ndarray:
    if coefs.size == 0:
        return np.zeros(0)
    r = np.clip(ar_to_pacf(sign * coefs), -clip, clip)
    return np.arctanh(r)


def _constrain(u, sign=1.0) -> np.ndarray:
    return sign * pacf_to_ar(np.tanh(u))


def is_stationary(phi) -> bool:
    phi = np.asarray(phi, dtype=float)
    if phi.size == 0:
        return True
    comp = np.zeros((phi.size, phi.size))
    comp[0] = phi
    comp[1:, :-1] = np.eye(phi.size - 1)
    return bool(np.max(np.abs(np.linalg.eigvals(comp))) < 1.0)


def is_invertible(theta) -> bool:
    return is_stationary(-np.asarray(theta, dtype=float))


def min_root_modulus(phi, theta) -> float:
    """Smallest modulus among the AR and MA polynomial roots (inf when there are none)."""
    out = math.inf
    for poly in (-np.asarray(phi, float), np.asarray(theta, float)):
        if poly.size and np.any(poly != 0):
            roots = np.roots(np.r_[poly[::-1], 1.0])
            if roots.size:
                out = min(out, float(np.min(np.abs(roots))))
    return out


# -- state space -------------------------------------------------------------

@njit(cache=True, nogil=True)
def _state_space(phi, theta):  # pragma: no cover - compiled
    p, q = phi.shape[0], theta.shape[0]
    r = max(p, q + 1)
    T = np.zeros((r, r))
    for i in range(p):
        T[i, 0] = phi[i]
    for i in range(r - 1):
        T[i, i + 1] = 1.0
    R = np.zeros(r)
    R[0] = 1.0
    for i in range(q):
        R[i + 1] = theta[i]
    # vec(P0) solves (I - T kron T) vec(P0) = vec(R R')
    m = r * r
    lhs = np.eye(m)
    rhs = np.empty(m)
    for i in range(r):
        for j in range(r):
            rhs[i * r + j] = R[i] * R[j]
            for k in range(r):
                for l in range(r):
                    lhs[i * r + j, k * r + l] -= T[i, k] * T[j, l]
    P0 = np.linalg.solve(lhs, rhs).reshape((r, r))
    return T, R, 0.5 * (P0 + P0.T)


def state_space(phi, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Transition matrix, disturbance loading and stationary state covariance (unit variance)."""
    try:
        return _state_space(np.asarray(phi, dtype=float), np.asarray(theta, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NumericError("stationary covariance is singular") from exc


@njit(cache=True, nogil=True)
def _filter(w, T, R, P0):  # pragma: no cover - compiled
    n = w.shape[0]
    r = T.shape[0]
    a = np.zeros(r)
    P = P0.copy()
    v = np.empty(n)
    F = np.empty(n)
    K = np.empty(r)
    row = np.empty(r)
    an = np.empty(r)
    TP = np.empty((r, r))
    for t in range(n):
        f = P[0, 0]
        e = w[t] - a[0]
        v[t] = e
        F[t] = f
        if not f > 0.0:
            F[t] = np.nan
            return v, F
        for i in range(r):
            K[i] = P[i, 0] / f
            row[i] = P[0, i]
        for i in range(r):
            a[i] += K[i] * e
            for j in range(r):
                P[i, j] -= K[i] * row[j]
        for i in range(r):
            s = 0.0
            for k in range(r):
                s += T[i, k] * a[k]
            an[i] = s
        for i in range(r):
            a[i] = an[i]
            for j in range(r):
                s = 0.0
                for k in range(r):
                    s += T[i, k] * P[k, j]
                TP[i, j] = s
        for i in range(r):
            for j in range(r):
                s = 0.0
                for k in range(r):
                    s += TP[i, k] * T[j, k]
                P[i, j] = s + R[i] * R[j]
    return v, F


@njit(cache=True, nogil=True)
def _innovations(w, phi, theta):  # pragma: no cover - compiled
    T, R, P0 = _state_space(phi, theta)
    return _filter(w, T, R, P0)


def innovations(w, phi, theta) -> tuple[np.ndarray, np.ndarray]:
    """One-step prediction errors and their variances (in units of sigma^2)."""
    try:
        v, F = _innovations(np.ascontiguousarray(w, dtype=float),
                            np.ascontiguousarray(phi, dtype=float), np.ascontiguousarray(theta, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise NumericError("stationary covariance is singular") from exc
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(F))):
        raise NumericError("Kalman filter produced non-finite values")
    return v, F


# -- data preparation --------------------------------------------------------

def _exog_matrix(X, n: int, spec: ModelSpec) -> np.ndarray:
    k = len(spec.exog_names)
    if X is None:
        if k:
            raise DomainError("model names exogenous regressors but no matrix was given")
        return np.zeros((n, 0))
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] != n:
        raise DomainError(f"exogenous matrix has {X.shape[0]} rows, series has {n}")
    if X.shape[1] != k:
        raise DomainError(f"exogenous matrix has {X.shape[1]} columns, spec names {k}")
    if np.isnan(X).any():
        raise DomainError("exogenous regressors contain missing values")
    return X


def _prepare(spec: ModelSpec, y, X):
    """Differenced response and regression design on the differenced scale."""
    yv = _values(y)
    if np.isnan(yv).any():
        raise DomainError("series contains missing values")
    n = yv.size
    Xm = _exog_matrix(X, n, spec)
    if n <= spec.d:
        raise DomainError("series is too short to difference")
    yd = np.diff(yv, n=spec.d) if spec.d else yv.copy()
    Xd = np.diff(Xm, n=spec.d, axis=0) if spec.d else Xm.copy()
    cols = []
    if spec.include_drift:
        cols.append(np.ones(yd.size))
    design = np.column_stack(cols + [Xd]) if cols else Xd
    return yv, yd, design


def loglikelihood(spec: ModelSpec, params: ParamVector, y, X=None) -> float:
    """Exact Gaussian log-likelihood of ``y`` under ``spec`` at ``params``."""
    if params.phi.size != spec.p or params.theta.size != spec.q:
        raise DomainError("parameter vector does not match the model orders")
    if params.beta.size != len(spec.exog_names):
        raise DomainError("one regression coefficient per exogenous column is required")
    if not params.sigma2 > 0:
        raise DomainError("innovation variance must be positive")
    if not is_stationary(params.phi):
        raise DomainError("AR coefficients are not stationary")
    if not is_invertible(params.theta):
        raise DomainError("MA coefficients are not invertible")
    _, yd, design = _prepare(spec, y, X)
    w = yd - design @ _regression_coefs(spec, params)
    v, F = innovations(w, params.phi, params.theta)
    s2 = params.sigma2
    ll = -0.5 * float(np.sum(LOG_2PI + np.log(s2 * F) + v * v / (s2 * F)))
    if not math.isfinite(ll):
        raise NumericError("log-likelihood is not finite")
    return ll


def _regression_coefs(spec: ModelSpec, params: ParamVector) -> np.ndarray:
    c = [params.mu] if spec.include_drift else []
    return np.concatenate([np.asarray(c, float), params.beta])


# -- estimation ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FittedModel:
    spec: ModelSpec
    params: ParamVector
    loglik: float
    aic: float
    aicc: float | None
    bic: float
    residuals: TimeSeries
    fitted: TimeSeries
    actual: TimeSeries
    n_obs: int
    converged: bool
    accuracy: ErrorMeasures | None = None
    optimizer_message: str = ""

    @property
    def k(self) -> int:
        return self.spec.n_params

    @property
    def admissible(self) -> bool:
        """Converged with every AR/MA root clear of the unit circle by 1%."""
        return self.converged and min_root_modulus(self.params.phi, self.params.theta) > ADMISSIBLE_ROOT

    def coefficient_table(self) -> list[dict]:
        return [{"name": n, "estimate": v}
                for n, v in zip(self.spec.coef_names(), self.params.coefficients(self.spec))]

    def to_dict(self) -> dict:
        return {
            "model": self.spec.describe(),
            "spec": {"p": self.spec.p, "d": self.spec.d, "q": self.spec.q,
                     "include_drift": self.spec.include_drift,
                     "exog_names": list(self.spec.exog_names)},
            "coefficients": self.coefficient_table(),
            "sigma2": self.params.sigma2,
            "loglik": self.loglik,
            "aic": self.aic,
            "aicc": self.aicc,
            "bic": self.bic,
            "n_obs": self.n_obs,
            "n_params": self.k,
            "error_measures": self.accuracy.as_dict() if self.accuracy else None,
            "converged": self.converged,
        }


def information_criteria(loglik: float, k: int, n: int) -> dict:
    """AIC, AICc and BIC; ``aicc`` is None when ``n - k - 1 <= 0``."""
    aic = -2.0 * loglik + 2.0 * k
    denom = n - k - 1
    aicc = aic + 2.0 * k * (k + 1) / denom if denom > 0 else None
    bic = -2.0 * loglik + k * math.log(n)
    return {"aic": aic, "aicc": aicc, "bic": bic, "aicc_defined": aicc is not None}


def model_information_criteria(m: FittedModel) -> dict:
    return information_criteria(m.loglik, m.k, m.n_obs)


class _Objective:
    """Negative concentrated log-likelihood per observation, over unconstrained parameters."""

    def __init__(self, spec: ModelSpec, yd: np.ndarray, design: np.ndarray):
        self.spec = spec
        self.yd = yd
        self.design = design
        self.n = yd.size

    def unpack(self, u):
        p, q = self.spec.p, self.spec.q
        phi = _constrain(u[:p])
        theta = _constrain(u[p: p + q], sign=-1.0)
        coefs = u[p + q:]
        return phi, theta, coefs

    def pack(self, phi, theta, coefs) -> np.ndarray:
        return np.concatenate([_unconstrain(np.asarray(phi, float)),
                               _unconstrain(np.asarray(theta, float), sign=-1.0),
                               np.asarray(coefs, float)])

    def evaluate(self, u):
        phi, theta, coefs = self.unpack(u)
        w = self.yd - self.design @ coefs if coefs.size else self.yd
        v, F = innovations(w, phi, theta)
        s2 = float(np.sum(v * v / F)) / self.n
        if not s2 > 0:
            raise NumericError("zero innovation variance")
        ll = -0.5 * self.n * (LOG_2PI + math.log(s2) + 1.0) - 0.5 * float(np.sum(np.log(F)))
        return ll, s2, v

    def __call__(self, u):
        try:
            ll, _, _ = self.evaluate(u)
        except TeleconnectError:
            return 1e10
        return -ll / self.n if math.isfinite(ll) else 1e10


def _css_start(obj: _Objective) -> np.ndarray:
    """Conditional-sum-of-squares warm start after an OLS regression step."""
    spec = obj.spec
    if obj.design.shape[1]:
        coefs, *_ = np.linalg.lstsq(obj.design, obj.yd, rcond=None)
    else:
        coefs = np.zeros(0)
    resid = obj.yd - obj.design @ coefs if coefs.size else obj.yd
    p, q = spec.p, spec.q
    if p + q == 0:
        return coefs.copy()

    def css(u):
        phi = _constrain(u[:p])
        theta = _constrain(u[p:], sign=-1.0)
        e = lfilter(np.r_[1.0, -phi], np.r_[1.0, theta], resid)
        return float(np.mean(e[p:] ** 2))

    res = optimize.minimize(css, np.zeros(p + q), method="BFGS")
    u = np.clip(res.x, -3.0, 3.0)
    return np.concatenate([u, coefs])


def _check_inputs(spec: ModelSpec, yd: np.ndarray, design: np.ndarray):
    n = yd.size
    if n <= spec.n_params + 5:
        raise DomainError(f"{n} observations after differencing is too few for {spec.n_params} parameters")
    if np.ptp(yd) == 0 and design.shape[1] == 0:
        raise DomainError("series is constant after differencing")
    if design.shape[1]:
        if np.linalg.matrix_rank(design) < design.shape[1]:
            raise NumericError("regression design is collinear")
        if np.linalg.matrix_rank(np.column_stack([design, yd])) == design.shape[1]:
            raise DomainError("series is an exact linear function of the regressors")


def fit(spec: ModelSpec, y, X=None, *, restarts: int = 3, seed: int = 0,
        gtol: float = 1e-6, maxiter: int = 500) -> FittedModel:
    """Maximum-likelihood fit by BFGS from a CSS warm start plus random restarts.

    The innovation variance is concentrated out; the reported ``sigma2`` is the
    ML (1/n) estimate. ``converged`` is False when no start met the gradient
    tolerance, in which case the best point found is still returned.
    """
    if isinstance(y, TimeSeries):
        series = y
    else:
        series = TimeSeries((1, 0), Period.ANNUAL, np.asarray(y, float))
    yv, yd, design = _prepare(spec, series, X)
    _check_inputs(spec, yd, design)
    obj = _Objective(spec, yd, design)
    u0 = _css_start(obj)
    starts = [u0]
    n_arma = spec.p + spec.q
    if n_arma:
        rng = np.random.default_rng(seed)
        for _ in range(restarts):
            u = u0.copy()
            u[:n_arma] += rng.normal(0.0, 0.5, n_arma)
            starts.append(u)

    best = None
    if u0.size == 0:
        # nothing to optimize: only the concentrated variance remains
        res = optimize.OptimizeResult(x=u0, fun=obj(u0), jac=u0, success=True, status=0,
                                      message="no free parameters")
        best = ((False, float(res.fun)), res, True)
        starts = []
    for u in starts:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = optimize.minimize(obj, u, method="BFGS", jac="3-point",
                                    options={"gtol": gtol, "maxiter": maxiter})
        if not np.isfinite(res.fun) or res.fun >= 1e10:
            continue
        grad_norm = float(np.max(np.abs(res.jac))) if res.jac.size else 0.0
        # status 2: the line search could make no further relative progress
        ok = bool(res.success) or (res.status == 2 and grad_norm < 1e-4)
        key = (not ok, float(res.fun))
        if best is None or key < best[0]:
            best = (key, res, ok)
    if best is None:
        raise NumericError(f"likelihood could not be evaluated for {spec.describe()}")
    _, res, ok = best

    ll, s2, v = obj.evaluate(res.x)
    phi, theta, coefs = obj.unpack(res.x)
    mu = float(coefs[0]) if spec.include_drift else 0.0
    beta = coefs[1:] if spec.include_drift else coefs
    params = ParamVector(phi, theta, mu, beta, s2)
    n = yd.size
    ic = information_criteria(ll, spec.n_params, n)
    actual = series.with_values(yv[spec.d:], offset=spec.d)
    fitted = actual.with_values(actual.values - v)
    resid = actual.with_values(v, name=f"{series.name}_residuals" if series.name else "residuals")
    return FittedModel(
        spec=spec, params=params, loglik=ll, aic=ic["aic"], aicc=ic["aicc"], bic=ic["bic"],
        residuals=resid, fitted=fitted, actual=actual, n_obs=n, converged=ok,
        accuracy=error_measures(actual, fitted), optimizer_message=str(res.message),
    )


def grid_search(y, X=None, *, d: int = 1, p_max: int = 3, q_max: int = 3, drift: bool = False,
                exog_names=None, workers: int = 1, seed: int = 0) -> tuple[FittedModel, dict]:
    """Fit every (p, q) up to the bounds and keep the admissible fit of least AIC.

    A fit is admissible when it converged and none of its AR or MA roots lies
    within 1% of the unit circle (boundary fits mimic over-differencing).
    Ties go to the smaller ``p + q``, then the smaller ``q``. Returns the
    winner and a mapping ``(p, q) -> FittedModel or error message`` for every
    cell, ordered by ``(p, q)`` whatever the completion order.
    """
    if p_max > 5 or q_max > 5 or p_max < 0 or q_max < 0:
        raise DomainError("order bounds must lie in [0, 5]")
    if exog_names is None:
        k = 0 if X is None else (1 if np.ndim(X) == 1 else np.shape(X)[1])
        exog_names = tuple(f"x{i + 1}" for i in range(k))
    cells = [(p, q) for p in range(p_max + 1) for q in range(q_max + 1)]

    def run(cell):
        p, q = cell
        spec = ModelSpec(p, d, q, drift, exog_names)
        try:
            return fit(spec, y, X, seed=seed)
        except TeleconnectError as exc:
            return f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, cells))
    else:
        outcomes = [run(c) for c in cells]
    table = dict(zip(cells, outcomes))
    candidates = [(m.aic, p + q, q, (p, q)) for (p, q), m in table.items()
                  if isinstance(m, FittedModel) and m.admissible]
    if not candidates:
        failures = {f"({p},{q})": (m if isinstance(m, str) else "not admissible")
                    for (p, q), m in table.items()}
        raise SearchError("no cell of the grid produced an admissible fit", failures)
    winner = min(candidates)[3]
    return table[winner], table


def simulate(spec: ModelSpec, params: ParamVector, n: int, seed: int) -> TimeSeries:
    """Gaussian ARIMA sample path; ``params.mu`` is the mean of the differenced series."""
    if not is_stationary(params.phi) or not is_invertible(params.theta):
        raise DomainError("simulation needs stationary and invertible coefficients")
    if params.sigma2 < 0:
        raise DomainError("innovation variance must be non-negative")
    burn = max(200, 10 * (spec.p + spec.q))
    rng = np.random.default_rng(seed)
    total = n + burn
    e = rng.standard_normal(total) * math.sqrt(params.sigma2)
    w = lfilter(np.r_[1.0, params.theta], np.r_[1.0, -params.phi], e)[burn:]
    w = w + params.mu
    for _ in range(spec.d):
        w = np.cumsum(w)
    return TimeSeries((1, 0), Period.ANNUAL, w, name="simulated")
