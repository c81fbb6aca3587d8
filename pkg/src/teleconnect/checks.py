"""Reference values for the CET/NAO/PDO analysis and the comparison against a report.

Each check carries the observed value, the target, the tolerance and a
pass flag, so a failing run states exactly what drifted.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from teleconnect.stationarity import adf_test

# (criterion, name, target, tolerance)
ADF_TARGETS = [
    ("ADF p-value CET", "cet", 0.08158, 0.03),
    ("ADF p-value NAO", "nao", 0.244, 0.03),
    ("ADF p-value PDO", "pdo", 0.01035, 0.03),
]
ARIMA_TARGETS = {
    "ar1": (0.1108, 0.02), "ar2": (0.1676, 0.02), "ma1": (-0.9309, 0.02),
    "sigma2": (0.3396, 0.02), "loglik": (-262.03, 1.0),
    "aic": (532.07, 2.0), "aicc": (532.2, 2.0), "bic": (546.87, 2.0),
    "ME": (0.0372, 0.02), "RMSE": (0.5788, 0.02), "MAE": (0.45, 0.02),
    "MAPE": (4.86, 0.3), "ACF1": (0.00057, 0.05),
}
LJUNG_BOX_TARGETS = {
    "arima": {"Q_star": (4.9507, 0.5), "df": (7, 0), "p_value": (0.666, 0.05)},
    "arimax": {"Q_star": (13.881, 0.5), "df": (9, 0), "p_value": (0.1266, 0.05)},
}
ARIMAX_TARGETS = {
    "ma1": (-0.8248, 0.03), "drift": (0.0207, 0.03), "PDO": (0.0128, 0.03), "NAO": (0.2835, 0.03),
    "sigma2": (0.2444, 0.02), "loglik": (-49.96, 1.0),
    "aic": (109.92, 2.0), "aicc": (110.83, 2.0), "bic": (121.3, 2.0),
}
ARIMAX_ORDER = (0, 1, 1)
THRESHOLD_TARGETS = {
    "nao": {"df": 17.75, "F_crit": 6.257, "C": (0.2606, 0.01)},
    "pdo": {"df": 17.94, "F_crit": 6.234, "C": (0.2579, 0.02)},
}
NAO_BANDS = [(0.133, 0.2), (0.427, 0.493)]
NAO_PEAK = 0.15
ADF_RUNTIME_LIMIT = 1.0


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    observed: object
    target: object
    tolerance: object
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.criterion}: {self.name}: observed={_fmt(self.observed)} "
                f"target={_fmt(self.target)} tol={_fmt(self.tolerance)}")

    def as_dict(self) -> dict:
        return {"criterion": self.criterion, "name": self.name, "observed": self.observed,
                "target": self.target, "tolerance": self.tolerance, "passed": self.passed}


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _close(criterion, name, observed, target, tol) -> Check:
    ok = observed is not None and abs(observed - target) <= tol
    return Check(criterion, name, observed, target, tol, bool(ok))


def adf_checks(report) -> list[Check]:
    out = []
    for name, key, target, tol in ADF_TARGETS:
        out.append(_close(1, name, report.adf[key].p_value, target, tol))
    t0 = time.perf_counter()
    for key in ("cet", "nao", "pdo"):
        adf_test(report.annual[key])
    elapsed = time.perf_counter() - t0
    out.append(Check(1, "ADF runtime (s)", elapsed, f"< {ADF_RUNTIME_LIMIT}", None, elapsed < ADF_RUNTIME_LIMIT))
    return out


def _coef_map(model) -> dict:
    out = {row["name"]: row["estimate"] for row in model.coefficient_table()}
    out.update(sigma2=model.params.sigma2, loglik=model.loglik, aic=model.aic, aicc=model.aicc, bic=model.bic)
    if model.accuracy is not None:
        out.update(model.accuracy.as_dict())
    return out


def arima_checks(report) -> list[Check]:
    values = _coef_map(report.arima)
    return [_close(2, f"ARIMA(2,1,1) {k}", values.get(k), t, tol) for k, (t, tol) in ARIMA_TARGETS.items()]


def ljung_box_checks(report) -> list[Check]:
    out = []
    for which, lb in (("arima", report.arima_lb), ("arimax", report.arimax_lb)):
        observed = lb.as_dict()
        for k, (t, tol) in LJUNG_BOX_TARGETS[which].items():
            out.append(_close(3, f"Ljung-Box {which} {k}", observed[k], t, tol))
    return out


def arimax_checks(report) -> list[Check]:
    m = report.arimax
    order = (m.spec.p, m.spec.d, m.spec.q)
    out = [Check(4, "grid search selected order", list(order), list(ARIMAX_ORDER), None, order == ARIMAX_ORDER)]
    values = _coef_map(m)
    for k, (t, tol) in ARIMAX_TARGETS.items():
        out.append(_close(4, f"ARIMAX {k}", values.get(k), t, tol))
    return out


def threshold_checks(report) -> list[Check]:
    out = []
    for partner, targets in THRESHOLD_TARGETS.items():
        thr = report.coherence[partner].threshold
        t, tol = targets["C"]
        check = _close(5, f"coherence threshold C (CET-{partner.upper()}, N={thr.N}, df={thr.df:.4g})",
                       thr.C, t, tol)
        out.append(check)
    return out


def band_checks(report) -> list[Check]:
    nao = report.coherence["nao"]
    bin_width = nao.estimate.bin_width
    observed = [(round(b.lo, 4), round(b.hi, 4)) for b in nao.bands]
    out = []
    for lo, hi in NAO_BANDS:
        hit = any(abs(b.lo - lo) <= bin_width + 1e-9 and abs(b.hi - hi) <= bin_width + 1e-9 for b in nao.bands)
        out.append(Check(6, f"CET-NAO band [{lo}, {hi}]", observed, [lo, hi], bin_width, hit))
    freq = nao.peak[0]
    out.append(_close(6, "CET-NAO peak frequency", freq, NAO_PEAK, bin_width + 1e-9))
    pdo_bands = [(round(b.lo, 4), round(b.hi, 4)) for b in report.coherence["pdo"].bands]
    out.append(Check(6, "CET-PDO significant bands", pdo_bands, [], None, not pdo_bands))
    return out


def evaluate(report) -> list[Check]:
    return (adf_checks(report) + arima_checks(report) + ljung_box_checks(report)
            + arimax_checks(report) + threshold_checks(report) + band_checks(report))
