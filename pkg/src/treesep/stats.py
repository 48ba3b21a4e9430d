"""Estimators and diagnostics over replica trajectories.

Everything here is pure and deterministic: bootstrap procedures sort
their inputs and use a fixed counter-based bit generator, so estimates
are permutation-invariant in the sample order and reproducible without
any ambient RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

_BOOTSTRAP_KEY = 0x7EE5EB007575  # stable default bootstrap stream


class InsufficientDataError(ValueError):
    """Too few samples for the requested estimator."""


class SingularFitError(ValueError):
    """Design matrix is degenerate (fewer than 3 distinct abscissae)."""


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    se: float
    variance: float
    ci95: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "se": self.se,
            "variance": self.variance,
            "ci95": list(self.ci95),
        }


def mean_ci(samples: Sequence[float]) -> SummaryStats:
    """Sample mean with unbiased variance and a 1.96-SE interval."""
    arr = np.asarray(samples, dtype=float)
    n = arr.size
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    mean = float(arr.mean())
    variance = float(arr.var(ddof=1))
    se = math.sqrt(variance / n)
    return SummaryStats(n=n, mean=mean, se=se, variance=variance, ci95=(mean - 1.96 * se, mean + 1.96 * se))


def zscore_report(stats: SummaryStats, reference: float, tolerance_se: float = 3.0) -> dict:
    """Attach a z-score against a reference; exact match required when SE is 0."""
    if stats.se > 0.0:
        z: float | None = (stats.mean - reference) / stats.se
        ok = abs(z) <= tolerance_se
    else:
        z = None
        ok = stats.mean == reference
    out = stats.as_dict()
    out.update({"reference": reference, "zscore": z, "tolerance_se": tolerance_se, "pass": ok})
    return out


def speed_estimate(
    t: float,
    horos: Sequence[float],
    depths: Sequence[float],
    v_ref: float,
) -> dict:
    """Speed report at one time: horodistance-based, plus depth-based.

    The depth estimate carries an O(1/t) positive bias (the tag's distance
    from the root exceeds its ray progress by twice the depth of the last
    common vertex), so only the horodistance check is meant as a gate.
    """
    if t <= 0:
        raise ValueError(f"time must be > 0, got {t}")
    horo_stats = mean_ci([h / t for h in horos])
    depth_stats = mean_ci([w / t for w in depths])
    report = zscore_report(horo_stats, v_ref)
    depth_report = zscore_report(depth_stats, v_ref)
    depth_report["note"] = "O(1/t) bias; informational"
    return {"t": t, "horo": report, "depth": depth_report}


def linear_fit(points: Sequence[tuple[float, float, float]]) -> dict:
    """Weighted least squares through (t, mean, se) points.

    SEs are floored at 1e-12 so exact data (zero spread) fits cleanly.
    """
    ts = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    ses = np.maximum(np.array([p[2] for p in points], dtype=float), 1e-12)
    if np.unique(ts).size < 3:
        raise SingularFitError(f"need >= 3 distinct abscissae, got {np.unique(ts).size}")
    w = 1.0 / ses**2
    sw = float(w.sum())
    swt = float((w * ts).sum())
    swtt = float((w * ts * ts).sum())
    swy = float((w * ys).sum())
    swty = float((w * ts * ys).sum())
    delta = sw * swtt - swt * swt
    if delta <= 0:
        raise SingularFitError("degenerate design matrix")
    slope = (sw * swty - swt * swy) / delta
    intercept = (swtt * swy - swt * swty) / delta
    slope_se = math.sqrt(sw / delta)
    intercept_se = math.sqrt(swtt / delta)
    return {
        "slope": slope,
        "slope_se": slope_se,
        "slope_ci95": [slope - 1.96 * slope_se, slope + 1.96 * slope_se],
        "intercept": intercept,
        "intercept_se": intercept_se,
        "intercept_ci95": [intercept - 1.96 * intercept_se, intercept + 1.96 * intercept_se],
        "n_points": int(ts.size),
    }


def _sorted_array(samples: Sequence[float]) -> np.ndarray:
    arr = np.asarray(samples, dtype=float).copy()
    arr.sort()
    return arr


def _bootstrap_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1)))


def clt_diagnostic(
    horos: Sequence[float],
    t: float,
    v: float,
    d: int,
    ks_tolerance: float = 0.05,
    n_bootstrap: int = 500,
    seed: int = _BOOTSTRAP_KEY,
) -> dict:
    """Studentized-normality report for horodistance samples at one time.

    z_i = (horo_i - v t) / (sigma_hat sqrt(t)) with sigma_hat^2 the sample
    variance of horo/sqrt(t); reports the KS distance to the standard
    normal and a bootstrap SE for sigma_hat^2.  For d = 2 the diffusive
    scaling does not hold, so the KS claim is skipped entirely.
    """
    arr = _sorted_array(horos)
    n = arr.size
    if n < 500:
        raise InsufficientDataError(f"need >= 500 samples for the CLT check, got {n}")
    if t <= 0:
        raise ValueError(f"time must be > 0, got {t}")
    sigma2 = float(arr.var(ddof=1)) / t
    rng = _bootstrap_rng(seed)
    boots = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        boots[b] = rng.choice(arr, size=n, replace=True).var(ddof=1) / t
    sigma2_se = float(boots.std(ddof=1))
    if d == 2:
        return {
            "n": n,
            "t": t,
            "subdiffusive": True,
            "skipped": True,
            "warning": "d=2 is subdiffusive; no CLT claim at diffusive scaling",
            "sigma2_hat": sigma2,
            "sigma2_se": sigma2_se,
        }
    degenerate = sigma2 == 0.0
    if degenerate:
        z = np.zeros(n)
    else:
        z = (arr - v * t) / math.sqrt(sigma2 * t)
    ks = float(sps.kstest(z, "norm").statistic)
    return {
        "n": n,
        "t": t,
        "subdiffusive": False,
        "skipped": False,
        "sigma2_hat": sigma2,
        "sigma2_se": sigma2_se,
        "ks_distance": ks,
        "ks_tolerance": ks_tolerance,
        "degenerate": degenerate,
        "pass": (not degenerate) and ks < ks_tolerance,
    }


def variance_growth(
    samples1: Sequence[float],
    t1: float,
    samples2: Sequence[float],
    t2: float,
    n_bootstrap: int = 2000,
    seed: int = _BOOTSTRAP_KEY,
) -> dict:
    """Var(t2)/Var(t1) with a bootstrap percentile CI.

    Diffusive scaling predicts the ratio t2/t1; subdiffusive regimes fall
    strictly below it.  Both verdicts are reported; callers pick the one
    their model predicts.
    """
    if not 0 < t1 < t2:
        raise ValueError(f"need 0 < t1 < t2, got {t1}, {t2}")
    a1 = _sorted_array(samples1)
    a2 = _sorted_array(samples2)
    if a1.size < 2 or a2.size < 2:
        raise InsufficientDataError("need >= 2 samples per time point")
    v1 = float(a1.var(ddof=1))
    v2 = float(a2.var(ddof=1))
    if v1 == 0.0:
        return {"t1": t1, "t2": t2, "degenerate": True, "reference": t2 / t1}
    ratio = v2 / v1
    rng = _bootstrap_rng(seed)
    boots = np.empty(n_bootstrap)
    for b in range(n_bootstrap):
        b1 = rng.choice(a1, size=a1.size, replace=True).var(ddof=1)
        b2 = rng.choice(a2, size=a2.size, replace=True).var(ddof=1)
        boots[b] = b2 / b1 if b1 > 0 else np.inf
    lo, hi = (float(q) for q in np.percentile(boots, [2.5, 97.5]))
    reference = t2 / t1
    return {
        "t1": t1,
        "t2": t2,
        "var1": v1,
        "var2": v2,
        "ratio": ratio,
        "ci95": [lo, hi],
        "reference": reference,
        "degenerate": False,
        "contains_reference": lo <= reference <= hi,
        "below_reference": hi < reference,
    }
