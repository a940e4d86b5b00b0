"""Least-squares fit of the treatment/day-class/patient model and randomization inference.

The model has no global intercept: patient indicators already span the
constant, so one day-class column (by default the shared Friday class) is
dropped.  tau is estimated by partialling out the nuisance columns,

    tau_hat = a' M y / a' M a,   M = I - P(nuisance),

which is the ordinary least-squares coefficient of the full model.  ``a' M a``
is exactly the information computed in :mod:`crossover.information`, restricted
to the observed sessions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .construction import SequenceWeights, allocation_vector, default_weights
from .data import TrialDataset
from .information import column_basis, residualize
from .matrices import PERIOD_COLUMN
from . import rng as rngmod

ESTIMABLE_RTOL = 1e-10
MAX_FAILURE_RATE = 0.05


class NotEstimableError(ValueError):
    pass


class TransformError(ValueError):
    pass


class RandomizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class FitResult:
    tau_hat: float
    se: float
    ci95: tuple[float, float]
    p_value: float
    dof: int
    residuals: np.ndarray
    fitted: np.ndarray
    keys: tuple[tuple[str, int, str], ...]
    transform: str = "identity"
    sigma_hat: float = float("nan")
    information: float = float("nan")
    reference: str = "t"

    def as_dict(self) -> dict:
        return {
            "tau_hat": self.tau_hat,
            "se": self.se,
            "ci95": list(self.ci95),
            "p_value": self.p_value,
            "dof": self.dof,
            "n": len(self.keys),
            "sigma_hat": self.sigma_hat,
            "information": self.information,
            "transform": self.transform,
            "reference_distribution": self.reference,
        }


class PartialledFit:
    """OLS for one treatment column after projecting out fixed nuisance columns.

    The nuisance basis is computed once; any number of treatment columns can
    then be fitted against the same responses, which is what re-randomization
    needs.
    """

    def __init__(self, nuisance: np.ndarray):
        self.nuisance = np.asarray(nuisance, dtype=float)
        self.basis = column_basis(self.nuisance)
        self.n = self.nuisance.shape[0]

    @property
    def nuisance_rank(self) -> int:
        return self.basis.shape[1]

    def information(self, a) -> float:
        r = residualize(a, self.basis)
        return float(r @ r)

    def check_estimable(self, a: np.ndarray, info: float) -> None:
        if info <= ESTIMABLE_RTOL * max(float(a @ a), 1.0):
            raise NotEstimableError("tau not estimable: treatment is confounded with "
                                    "patient and day-class effects")

    def fit(self, a, y) -> tuple[float, float, np.ndarray, np.ndarray]:
        """(tau_hat, information, fitted, residuals)."""
        a = np.asarray(a, dtype=float)
        y = np.asarray(y, dtype=float)
        a_res = residualize(a, self.basis)
        info = float(a_res @ a_res)
        self.check_estimable(a, info)
        y_res = residualize(y, self.basis)
        tau = float(a_res @ y_res) / info
        resid = y_res - tau * a_res
        return tau, info, y - resid, resid

    def tau_many(self, A: np.ndarray, y) -> np.ndarray:
        """tau_hat for each row of ``A`` (shape reps x n); NaN where not estimable.

        Rows are fitted one at a time so each value is bit-identical however
        many replicates are batched together.
        """
        A = np.asarray(A, dtype=float)
        y_res = residualize(np.asarray(y, dtype=float), self.basis)
        out = np.full(A.shape[0], np.nan)
        for i, a in enumerate(A):
            a_res = residualize(a, self.basis)
            info = float(a_res @ a_res)
            if info > ESTIMABLE_RTOL * max(float(a @ a), 1.0):
                out[i] = float(a_res @ y_res) / info
        return out


def nuisance_matrix(data: TrialDataset, observed_only: bool = True,
                    reference_period: int = 3) -> np.ndarray:
    """Day-class columns (minus the reference class and empty classes) and patient indicators.

    ``reference_period`` is 1..4 in the order (thrice Mon, thrice Wed, Fri, twice Mon).
    """
    if reference_period not in (1, 2, 3, 4):
        raise ValueError(f"reference_period must be 1..4, got {reference_period}")
    recs = [r for r in data.records if r.observed or not observed_only]
    patients = [p for p in data.patients if any(r.patient_id == p for r in recs)]
    col = {p: i for i, p in enumerate(patients)}
    periods = np.zeros((len(recs), 4))
    pats = np.zeros((len(recs), len(patients)))
    for i, r in enumerate(recs):
        periods[i, PERIOD_COLUMN[(data.schedules[r.patient_id], r.day)]] = 1.0
        pats[i, col[r.patient_id]] = 1.0
    keep = [k for k in range(4) if k != reference_period - 1 and periods[:, k].any()]
    return np.hstack([periods[:, keep], pats])


def _transform(y: np.ndarray, log_shift: float | None) -> tuple[np.ndarray, str]:
    if log_shift is None:
        return y, "identity"
    shifted = y + log_shift
    if np.any(shifted <= 0):
        raise TransformError(
            f"log(y + k) undefined: k={log_shift} leaves {int(np.sum(shifted <= 0))} "
            f"responses non-positive (k must exceed -min(y))"
        )
    return np.log(shifted), f"log_shift({log_shift:g})"


def fit_model(data: TrialDataset, log_shift: float | None = None,
              reference_period: int = 3) -> FitResult:
    """OLS fit on observed records; normal-theory se with t-based CI and p-value."""
    obs = [r for r in data.records if r.observed]
    if not obs:
        raise NotEstimableError("tau not estimable: no observed responses")
    y, label = _transform(np.array([r.y for r in obs], dtype=float), log_shift)
    a = np.array([r.treatment.signed for r in obs], dtype=float)
    fitter = PartialledFit(nuisance_matrix(data, reference_period=reference_period))
    tau, info, fitted, resid = fitter.fit(a, y)
    dof = len(obs) - fitter.nuisance_rank - 1
    if dof > 0:
        sigma2 = float(resid @ resid) / dof
        se = math.sqrt(sigma2 / info)
        tcrit = float(stats.t.ppf(0.975, dof))
        ci = (tau - tcrit * se, tau + tcrit * se)
        p = float(2 * stats.t.sf(abs(tau) / se, dof)) if se > 0 else (0.0 if tau else 1.0)
    else:
        sigma2, se, ci, p = float("nan"), float("nan"), (float("nan"), float("nan")), float("nan")
    return FitResult(
        tau_hat=tau, se=se, ci95=ci, p_value=p, dof=dof,
        residuals=resid, fitted=fitted, keys=tuple(r.key for r in obs),
        transform=label, sigma_hat=math.sqrt(sigma2) if sigma2 == sigma2 else sigma2,
        information=info,
    )


# -- randomization ------------------------------------------------------------

@dataclass(frozen=True)
class RandomizationScheme:
    n3: int
    n2: int
    weeks: int
    weights: SequenceWeights = field(default_factory=default_weights)

    @classmethod
    def for_data(cls, data: TrialDataset, weights: SequenceWeights | None = None) -> "RandomizationScheme":
        return cls(data.n3, data.n2, data.weeks, weights or default_weights())


@dataclass(frozen=True)
class RandomizationResult:
    p_value: float
    statistic: float
    n_rep: int
    n_failed: int
    replicate_stats: np.ndarray

    def as_dict(self) -> dict:
        return {"p_value": self.p_value, "statistic": self.statistic,
                "n_rep": self.n_rep, "n_failed": self.n_failed}


def grid_positions(data: TrialDataset, scheme: RandomizationScheme) -> np.ndarray:
    """Index of each observed record within the scheme's canonical allocation vector."""
    if (data.n3, data.n2) != (scheme.n3, scheme.n2):
        raise ValueError(f"data has n3={data.n3}, n2={data.n2}; scheme expects "
                         f"n3={scheme.n3}, n2={scheme.n2}")
    if data.weeks > scheme.weeks:
        raise ValueError(f"data runs {data.weeks} weeks; scheme has {scheme.weeks}")
    index = {}
    pos = 0
    for pid in data.patients:
        days = data.schedules[pid].days
        for week in range(1, scheme.weeks + 1):
            for day in days:
                index[(pid, week, day)] = pos
                pos += 1
    return np.array([index[r.key] for r in data.records if r.observed], dtype=np.int64)


def randomization_test(data: TrialDataset, scheme: RandomizationScheme, n_rep: int,
                       seed, log_shift: float | None = None) -> RandomizationResult:
    """Re-randomize treatments with the construction scheme, keeping responses in their slots.

    Replicate ``r`` uses the design ``construct_design(..., seed=substream(seed, r))``.
    p = (1 + #{|tau*| >= |tau_hat|}) / (1 + number of successful replicates).
    """
    observed = fit_model(data, log_shift=log_shift)
    stat = abs(observed.tau_hat)
    if n_rep <= 0:
        return RandomizationResult(1.0, stat, 0, 0, np.zeros(0))
    positions = grid_positions(data, scheme)
    y, _ = _transform(data.responses(), log_shift)
    fitter = PartialledFit(nuisance_matrix(data))
    A = np.empty((n_rep, positions.size))
    for r in range(n_rep):
        alloc = allocation_vector(scheme.n3, scheme.n2, scheme.weeks, scheme.weights,
                                  rngmod.substream(seed, r))
        A[r] = alloc[positions]
    taus = fitter.tau_many(A, y)
    failed = int(np.isnan(taus).sum())
    if failed > MAX_FAILURE_RATE * n_rep:
        raise RandomizationError(
            f"{failed} of {n_rep} re-randomized designs left tau inestimable "
            f"(limit {MAX_FAILURE_RATE:.0%}); the missingness pattern is too severe"
        )
    p = addone_p_value(stat, taus[~np.isnan(taus)])
    return RandomizationResult(p, stat, n_rep, failed, taus)


def addone_p_value(statistic: float, replicates) -> float:
    """(1 + #{|t*| >= statistic}) / (1 + n); ties within 1e-10 relative count as exceedances."""
    reps = np.abs(np.asarray(replicates, dtype=float))
    tol = 1e-10 * max(1.0, abs(statistic))
    return (1 + int(np.sum(reps >= abs(statistic) - tol))) / (1 + reps.size)


# -- residual export ------------------------------------------------------------

def plotting_positions(n: int) -> np.ndarray:
    """Blom positions (i - 3/8) / (n + 1/4), i = 1..n."""
    i = np.arange(1, n + 1)
    return (i - 0.375) / (n + 0.25)


def export_residuals(fit: FitResult, path) -> None:
    """CSV sorted by residual, one row per observed record, for normal probability plots."""
    order = np.argsort(fit.residuals, kind="stable")
    pos = plotting_positions(len(order))
    scores = stats.norm.ppf(pos)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["patient_id", "week", "day", "fitted", "residual", "position", "normal_score"])
        for rank, idx in enumerate(order):
            pid, week, day = fit.keys[idx]
            writer.writerow([pid, week, day, repr(float(fit.fitted[idx])),
                             repr(float(fit.residuals[idx])), repr(float(pos[rank])),
                             repr(float(scores[rank]))])
