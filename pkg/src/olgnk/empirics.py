"""Cross-country debt / real-rate panel and the (beta, q) calibration.

The model's closed-form steady-state rate is an increasing function of
the debt-to-GDP ratio.  This module fits the corresponding relation in
country-level data (long-run averages of general-government debt and
inflation-adjusted long-term yields) by ordinary least squares and then
chooses the discount factor and survival probability so that the model
reproduces the fitted rates at two anchor debt levels, 60% and 100% of
annual GDP.

Input CSV schema (decimal fractions, annual basis):

    country,debt_to_gdp,real_rate[,n_years]

A small synthetic panel with this schema ships in ``olgnk/data`` for
demonstrations; substitute real data with the same columns.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .calibration import Calibration, PreferenceKind
from .errors import (
    DegenerateDesign,
    EmptyPanel,
    NonpositiveDenominator,
    NoRoot,
    ParseError,
)
from .steady_state import annualize_rate, steady_state_rate

BUNDLED_PANEL = Path(__file__).parent / "data" / "country_panel.csv"

PANEL_COLUMNS = ("country", "debt_to_gdp", "real_rate")
DEFAULT_ANCHORS = (0.6, 1.0)


@dataclass(frozen=True)
class CountryObservation:
    """Long-run averages for one country (fractions, annual basis)."""

    country: str
    debt_to_gdp: float
    real_rate: float       # may be negative after high-inflation samples
    n_years: int | None = None


@dataclass(frozen=True)
class FittedLine:
    """OLS fit of real_rate on debt_to_gdp."""

    intercept: float
    slope: float
    r_squared: float
    n: int

    def predict(self, debt_to_gdp: float) -> float:
        return self.intercept + self.slope * debt_to_gdp

    def to_dict(self) -> dict:
        return {
            "intercept": self.intercept,
            "slope": self.slope,
            "r2": self.r_squared,
            "n": self.n,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def load_panel(path: str | Path) -> list[CountryObservation]:
    """Read and validate a country panel CSV.

    Raises ParseError (naming the offending row) for malformed rows,
    nonpositive debt ratios or duplicate countries, and EmptyPanel for a
    file with no data rows.
    """
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyPanel(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if header[:3] != list(PANEL_COLUMNS) or len(header) > 4 or (
            len(header) == 4 and header[3] != "n_years"
        ):
            raise ParseError(
                f"{path}: header must be 'country,debt_to_gdp,real_rate[,n_years]', "
                f"got {','.join(header)!r}"
            )
        has_years = len(header) == 4

        rows: list[CountryObservation] = []
        seen: set[str] = set()
        for number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}:{number}: expected {len(header)} fields")
            country = row[0].strip()
            if not country:
                raise ParseError(f"{path}:{number}: empty country")
            if country in seen:
                raise ParseError(f"{path}:{number}: duplicate country {country!r}")
            try:
                debt = float(row[1])
                rate = float(row[2])
            except ValueError as exc:
                raise ParseError(f"{path}:{number}: {exc}") from None
            if debt <= 0.0:
                raise ParseError(
                    f"{path}:{number}: debt_to_gdp must be positive, got {debt}"
                )
            n_years = None
            if has_years:
                try:
                    n_years = int(row[3])
                except ValueError as exc:
                    raise ParseError(f"{path}:{number}: {exc}") from None
                if n_years <= 0:
                    raise ParseError(f"{path}:{number}: n_years must be positive")
            seen.add(country)
            rows.append(CountryObservation(country, debt, rate, n_years))
    if not rows:
        raise EmptyPanel(f"{path} has a header but no observations")
    return rows


def fit_line(panel: Sequence[CountryObservation] | Iterable[CountryObservation]
             ) -> FittedLine:
    """OLS of the real rate on the debt ratio.

    Raises DegenerateDesign with fewer than two observations or zero
    variance in the debt ratios.
    """
    panel = list(panel)
    n = len(panel)
    if n < 2:
        raise DegenerateDesign(f"need at least 2 observations, got {n}")
    x = np.array([obs.debt_to_gdp for obs in panel])
    y = np.array([obs.real_rate for obs in panel])
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise DegenerateDesign("all debt ratios are equal")
    slope = float(np.sum((x - x.mean()) * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    syy = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if syy == 0.0 else 1.0 - float(np.sum(resid**2)) / syy
    return FittedLine(intercept=intercept, slope=slope, r_squared=r2, n=n)


def residuals_by_country(panel: Sequence[CountryObservation],
                         line: FittedLine) -> dict[str, float]:
    return {
        obs.country: obs.real_rate - line.predict(obs.debt_to_gdp)
        for obs in panel
    }


# ---------------------------------------------------------------------------
# Two-parameter calibration
# ---------------------------------------------------------------------------

def _anchor_residuals(beta: float, q: float, pref: PreferenceKind,
                      base: Calibration, anchors: tuple[float, float],
                      targets: tuple[float, float]) -> np.ndarray:
    out = np.empty(2)
    for k, (anchor, target) in enumerate(zip(anchors, targets)):
        calib = base.replace(
            beta=beta, q=q, pref=pref, debt_to_gdp=4.0 * anchor, eta=None
        ).with_eta_pinned()
        out[k] = annualize_rate(steady_state_rate(calib)) - target
    return out


def calibrate_beta_q(fitted: FittedLine,
                     pref: PreferenceKind | str = PreferenceKind.LOG_LOG,
                     anchors: tuple[float, float] = DEFAULT_ANCHORS,
                     base_calib: Calibration | None = None,
                     tol: float = 1e-10) -> tuple[float, float]:
    """Choose (beta, q) so the model's annualized steady-state rate
    matches the fitted line at both anchor debt levels (annual basis).

    Damped Newton on the 2x2 system with a finite-difference Jacobian,
    initial guess (0.99, 0.95), iterates projected into the unit box.
    Raises NoRoot when no interior solution exists (e.g. a flat target
    line at the pure-discount rate, which is the q -> 1 boundary).
    """
    pref = PreferenceKind.parse(pref)
    base = base_calib if base_calib is not None else Calibration()
    targets = (fitted.predict(anchors[0]), fitted.predict(anchors[1]))
    if targets[0] <= 0.0 or targets[1] <= 0.0:
        raise NoRoot(
            f"anchor rates must be positive, got {targets}", residuals=None
        )

    def wrapped(beta: float, q: float) -> np.ndarray | None:
        try:
            return _anchor_residuals(beta, q, pref, base, anchors, targets)
        except NonpositiveDenominator:
            return None

    lo = np.array([1e-6, 1e-6])
    hi = np.array([1.0 - 1e-12, 1.0 - 1e-12])
    point = np.array([0.99, 0.95])
    res = wrapped(*point)
    if res is None:
        raise NoRoot("initial guess infeasible", residuals=None)

    for _ in range(200):
        if np.abs(res).max() < tol:
            beta, q = float(point[0]), float(point[1])
            if q > 1.0 - 1e-9 or beta > 1.0 - 1e-12 or min(beta, q) < 1e-4:
                raise NoRoot(
                    f"converged on the unit-box boundary (beta={beta:.6f}, "
                    f"q={q:.9f}); a flat target line at the pure-discount "
                    "rate has no interior solution",
                    residuals=tuple(res),
                )
            return beta, q
        # forward-difference Jacobian
        jac = np.empty((2, 2))
        feasible = True
        for k in range(2):
            h = 1e-8 * max(1.0, abs(point[k]))
            bumped = point.copy()
            bumped[k] = min(bumped[k] + h, hi[k])
            res_h = wrapped(*bumped)
            if res_h is None or bumped[k] == point[k]:
                feasible = False
                break
            jac[:, k] = (res_h - res) / (bumped[k] - point[k])
        if not feasible or abs(np.linalg.det(jac)) < 1e-300:
            raise NoRoot(
                "Jacobian singular or infeasible near the unit-box boundary "
                f"at (beta, q) = ({point[0]:.6f}, {point[1]:.6f})",
                residuals=tuple(res),
            )
        step = np.linalg.solve(jac, res)
        scale = 1.0
        while scale > 1e-6:
            cand = np.clip(point - scale * step, lo, hi)
            cand_res = wrapped(*cand)
            if cand_res is not None and (
                np.abs(cand_res).max() < np.abs(res).max()
                or np.abs(cand_res).max() < tol
            ):
                break
            scale *= 0.5
        else:
            raise NoRoot(
                "no descent step; the target line may be outside the "
                "model's feasible rate range (q -> 1 boundary)",
                residuals=tuple(res),
            )
        point, res = cand, cand_res
    raise NoRoot("iteration limit reached", residuals=tuple(res))


def calibration_report(fitted: FittedLine, beta: float, q: float,
                       pref: PreferenceKind | str,
                       anchors: tuple[float, float] = DEFAULT_ANCHORS) -> dict:
    """JSON-ready summary of a fitted line plus calibrated parameters."""
    pref = PreferenceKind.parse(pref)
    return {
        "intercept": fitted.intercept,
        "slope": fitted.slope,
        "r2": fitted.r_squared,
        "pref": pref.value,
        "beta": beta,
        "q": q,
        "anchor_rates": {
            f"{int(round(100 * a))}pct": fitted.predict(a) for a in anchors
        },
    }
