"""Multivariate linear regression benchmark.

Plain OLS with an always-present intercept, classical standard errors and
normal-quantile coefficient bounds (the 5%/95% columns of the coefficient
table are read as a two-sided 90% interval).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from statistics import NormalDist
from typing import IO

import numpy as np

from .errors import InsufficientDataError, SingularDesignError, ValidationError
from .features import FeatureMatrix


@dataclass
class LinearModel:
    intercept: float
    coefficients: list[tuple[str, float]]  # (column name, b)
    standard_errors: list[float]
    r_squared: float
    n: int
    p: int
    constant_target: bool = False

    @property
    def column_names(self) -> list[str]:
        return [name for name, _ in self.coefficients]

    def predict(self, rows: np.ndarray) -> np.ndarray:
        """Row-wise intercept + b.x; columns must match the model order."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        if rows.shape[1] != self.p:
            raise ValidationError(f"expected {self.p} columns, got {rows.shape[1]}")
        beta = np.array([b for _, b in self.coefficients])
        return self.intercept + rows @ beta

    def predict_row(self, row: np.ndarray) -> float:
        return float(self.predict(np.asarray(row, dtype=float).reshape(1, -1))[0])

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema": "linear_model.v1",
                "intercept": self.intercept,
                "coefficients": [
                    {"name": name, "b": b, "se": se}
                    for (name, b), se in zip(self.coefficients, self.standard_errors)
                ],
                "r_squared": self.r_squared,
                "n": self.n,
                "p": self.p,
                "constant_target": self.constant_target,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "LinearModel":
        doc = json.loads(text)
        if doc.get("schema") != "linear_model.v1":
            raise ValidationError(f"not a linear model artifact: {doc.get('schema')!r}")
        return cls(
            intercept=doc["intercept"],
            coefficients=[(c["name"], c["b"]) for c in doc["coefficients"]],
            standard_errors=[c["se"] for c in doc["coefficients"]],
            r_squared=doc["r_squared"],
            n=doc["n"],
            p=doc["p"],
            constant_target=doc["constant_target"],
        )


@dataclass(frozen=True)
class CoefficientBound:
    name: str
    lower: float
    upper: float
    significant: bool


def _dependent_columns(design: np.ndarray, names: list[str]) -> list[str]:
    # Greedy pass: a column is dependent if adding it does not raise the rank.
    kept: list[int] = []
    dependent = []
    for j in range(design.shape[1]):
        cand = design[:, kept + [j]]
        if np.linalg.matrix_rank(cand) == len(kept) + 1:
            kept.append(j)
        else:
            dependent.append(names[j] if j > 0 else "intercept")
    return dependent


def fit_ols(m: FeatureMatrix) -> LinearModel:
    """Least-squares fit of the matrix target on its columns plus an intercept.

    Solved by QR-backed lstsq; standard errors come from the classical
    covariance s2 * inv(X'X) with s2 = SS_res / (n - p - 1).
    """
    X = m.rows
    y = m.target
    n, p = X.shape
    if n <= p + 1:
        raise InsufficientDataError(f"need n > p + 1 (n={n}, p={p})")
    design = np.hstack([np.ones((n, 1)), X])
    rank = np.linalg.matrix_rank(design)
    if rank < p + 1:
        raise SingularDesignError(_dependent_columns(design, ["intercept"] + m.column_names))
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ beta
    ss_res = float(residuals @ residuals)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    constant_target = ss_tot == 0.0
    r_squared = 0.0 if constant_target else 1.0 - ss_res / ss_tot
    sigma2 = ss_res / (n - p - 1)
    cov = sigma2 * np.linalg.inv(design.T @ design)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return LinearModel(
        intercept=float(beta[0]),
        coefficients=list(zip(m.column_names, (float(b) for b in beta[1:]))),
        standard_errors=[float(s) for s in se[1:]],
        r_squared=r_squared,
        n=n,
        p=p,
        constant_target=constant_target,
    )


def coefficient_bounds(
    model: LinearModel, lower_q: float = 0.05, upper_q: float = 0.95
) -> list[CoefficientBound]:
    """Per-coefficient quantile bounds b + z(q) * se under the normal approximation."""
    if not 0.0 < lower_q < upper_q < 1.0:
        raise ValidationError("need 0 < lower_q < upper_q < 1")
    z_lo = NormalDist().inv_cdf(lower_q)
    z_hi = NormalDist().inv_cdf(upper_q)
    bounds = []
    for (name, b), se in zip(model.coefficients, model.standard_errors):
        lower = b + z_lo * se
        upper = b + z_hi * se
        bounds.append(
            CoefficientBound(name, lower, upper, significant=not (lower <= 0.0 <= upper))
        )
    return bounds


def predict_linear(model: LinearModel, rows: np.ndarray) -> np.ndarray:
    return model.predict(rows)


def write_model_report(model: LinearModel, sink: IO[str]) -> None:
    sink.write(f"n={model.n} p={model.p} r_squared={model.r_squared:.6g}\n")
    sink.write("column\tb\tse\tlower_5\tupper_95\tsignificant\n")
    for bound, (name, b), se in zip(
        coefficient_bounds(model), model.coefficients, model.standard_errors
    ):
        sink.write(
            f"{name}\t{b:.6g}\t{se:.6g}\t{bound.lower:.6g}\t{bound.upper:.6g}"
            f"\t{str(bound.significant).lower()}\n"
        )
