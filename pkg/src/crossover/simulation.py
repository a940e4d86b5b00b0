"""Synthetic trials from the additive model, with iid or AR(1) within-patient errors.

AR(1) errors run over each patient's sessions in chronological order and
ignore the unequal calendar gaps (Fri to Mon is treated like Mon to Wed).
Missing responses are kept as empty slots so the data still carry the full
allocation grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.signal import lfilter

from . import rng as rngmod
from .analysis import PartialledFit, nuisance_matrix
from .information import residualize
from .data import TrialDataset, dataset_from_design
from .design import Design, ModelParams, Schedule
from .matrices import build_A, build_B1


@dataclass(frozen=True)
class ErrorModel:
    kind: str = "iid"
    sigma: float = 1.0
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in ("iid", "ar1"):
            raise ValueError(f"error kind must be 'iid' or 'ar1', got {self.kind!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.kind == "ar1" and not -1 < self.rho < 1:
            raise ValueError(f"AR(1) needs |rho| < 1, got {self.rho}")


@dataclass(frozen=True)
class MissingnessSpec:
    """``tail_losses`` maps patient_id to a number of final sessions lost (e.g. a transplant)."""

    final_period_loss: bool = False
    random_loss_prob: float = 0.0
    tail_losses: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.random_loss_prob < 1:
            raise ValueError(f"random_loss_prob must lie in [0, 1), got {self.random_loss_prob}")


def draw_patient_effects(n: int, sd: float, gen: np.random.Generator) -> tuple[float, ...]:
    return tuple(gen.normal(0.0, sd, size=n))


class _Layout:
    """Per-design arrays reused across replicates."""

    def __init__(self, design: Design):
        self.design = design
        self.plans = design.canonical_plans()
        self.A = build_A(design).ravel().astype(float)
        self.period = build_B1(design).argmax(axis=1)
        self.sizes = np.array([len(p.weeks) * p.schedule.sessions_per_week for p in self.plans])
        self.patient = np.repeat(np.arange(len(self.plans)), self.sizes)
        self.starts = np.concatenate([[0], np.cumsum(self.sizes)[:-1]])
        self.groups = [
            (int(size), np.array([np.arange(st, st + size) for st in self.starts[self.sizes == size]]))
            for size in np.unique(self.sizes)
        ]

    def mean(self, params: ModelParams) -> np.ndarray:
        xi = np.zeros(len(self.plans)) if not params.xi else np.asarray(params.xi, dtype=float)
        if xi.size != len(self.plans):
            raise ValueError(f"{xi.size} patient effects for {len(self.plans)} patients")
        return params.tau * self.A + np.asarray(params.pi)[self.period] + xi[self.patient]

    def errors(self, err: ErrorModel, gen: np.random.Generator) -> np.ndarray:
        z = gen.standard_normal(self.A.size)
        if err.kind == "iid" or err.rho == 0.0:
            return err.sigma * z
        # e_0 = z_0 (stationary start), e_t = rho e_{t-1} + sqrt(1 - rho^2) z_t;
        # patients with equal session counts are filtered together.
        e = np.empty_like(z)
        innov = math.sqrt(1.0 - err.rho ** 2)
        for size, rows in self.groups:
            seg = z[rows]
            e[rows[:, 0]] = seg[:, 0]
            if size > 1:
                e[rows[:, 1:]], _ = lfilter([innov], [1.0, -err.rho], seg[:, 1:], axis=1,
                                            zi=err.rho * seg[:, :1])
        return err.sigma * e

    def missing(self, miss: MissingnessSpec, gen: np.random.Generator) -> np.ndarray:
        lost = np.zeros(self.A.size, dtype=bool)
        for plan, start, size in zip(self.plans, self.starts, self.sizes):
            if miss.final_period_loss and plan.schedule is Schedule.THRICE:
                lost[start + size - 1] = True
            tail = int(miss.tail_losses.get(plan.patient_id, 0))
            if tail:
                lost[start + size - min(tail, size):start + size] = True
        if miss.random_loss_prob > 0:
            lost |= gen.random(self.A.size) < miss.random_loss_prob
        return lost


def simulate_trial(design: Design, params: ModelParams, err: ErrorModel | None = None,
                   miss: MissingnessSpec | None = None, seed=0) -> TrialDataset:
    """One synthetic trial; ``err`` defaults to iid errors with ``params.sigma``."""
    err = err or ErrorModel("iid", params.sigma)
    miss = miss or MissingnessSpec()
    layout = _Layout(design)
    gen = rngmod.generator(seed)
    y = layout.mean(params) + layout.errors(err, gen)
    lost = layout.missing(miss, gen)
    return dataset_from_design(design, [None if l else v for v, l in zip(y, lost)])


def simulate_estimates(design: Design, params: ModelParams, err: ErrorModel | None = None,
                       reps: int = 1000, seed=0, miss: MissingnessSpec | None = None) -> np.ndarray:
    """tau_hat from ``reps`` independent trials; replicate r draws from substream r.

    Missingness, if given, is drawn once (replicate-independent) so every
    replicate shares one fitted layout.
    """
    err = err or ErrorModel("iid", params.sigma)
    layout = _Layout(design)
    lost = layout.missing(miss, rngmod.generator(seed, 2**32 - 1)) if miss else np.zeros(layout.A.size, bool)
    keep = ~lost
    template = dataset_from_design(design, [None if l else 0.0 for l in lost])
    fitter = PartialledFit(nuisance_matrix(template))
    mean = layout.mean(params)
    a = layout.A[keep]
    a_res = residualize(a, fitter.basis)
    info = float(a_res @ a_res)
    fitter.check_estimable(a, info)
    est = np.empty(reps)
    for r in range(reps):
        y = (mean + layout.errors(err, rngmod.generator(seed, r)))[keep]
        est[r] = float(a_res @ y) / info
    return est


def variance_mc(design: Design, params: ModelParams, err: ErrorModel | None = None,
                reps: int = 1000, seed=0) -> float:
    """Empirical variance of tau_hat over ``reps`` simulated trials."""
    return float(np.var(simulate_estimates(design, params, err, reps, seed), ddof=1))
