"""Information on the treatment effect, by projection and by closed form.

All values are reported in units of sigma^2 ("effective observations"): an
optimal design reaches ``m``, the total number of sessions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import Design, Schedule, validate_design
from .matrices import (P2, P3, QVector, R_matrix, build_A, build_B1, build_B2,
                       q_vector)

RANK_RTOL = 1e-12
# Absolute floor: matrices that vanish in exact arithmetic (e.g. P_perp(B1) B2 for
# a single-stratum design) come out at ~1e-17 and must still project to zero.
RANK_ATOL = 1e-10
SCALAR_ATOL = 1e-9
OPTIMAL_ATOL = 1e-6


class InconsistentDesignError(RuntimeError):
    """An imbalance was found in a stratum that has no patients."""


def column_basis(X, rtol: float = RANK_RTOL, atol: float = RANK_ATOL) -> np.ndarray:
    """Orthonormal basis of the column space of ``X`` (thin SVD, rank-revealing).

    Singular values at or below ``max(rtol * largest, atol)`` count as zero.
    """
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return np.zeros((X.shape[0], 0))
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    if s.size == 0:
        return np.zeros((X.shape[0], 0))
    return U[:, s > max(rtol * s[0], atol)]


def projector(X) -> np.ndarray:
    """Orthogonal projection onto the column space of ``X``, i.e. X (X'X)^- X'."""
    U = column_basis(X)
    return U @ U.T


def residual_projector(X) -> np.ndarray:
    X = np.asarray(X)
    return np.eye(X.shape[0]) - projector(X)


def residualize(v, basis: np.ndarray) -> np.ndarray:
    """``v`` minus its projection onto the span of the orthonormal ``basis``."""
    v = np.asarray(v, dtype=float)
    return v - basis @ (basis.T @ v)


def treatment_information(A, nuisance) -> float:
    """A' P_perp(nuisance) A for a single treatment column."""
    a = np.asarray(A, dtype=float).ravel()
    r = residualize(a, column_basis(nuisance))
    return float(r @ r)


def info_full(design: Design) -> float:
    return treatment_information(build_A(design), np.hstack([build_B1(design), build_B2(design)]))


def info_reduced(design: Design) -> float:
    return treatment_information(build_A(design), build_B1(design))


def closed_form_information(q: QVector, n3: int, n2: int, w: int) -> float:
    """m - q'Rq with 0^2/0 taken as 0 for empty strata."""
    m = w * (3 * n3 + 2 * n2)
    denominators = (w * n3, w * n3, w * (n3 + n2), w * n2)
    penalty = 0.0
    for qk, d in zip(q.contracted, denominators):
        if d == 0:
            if qk != 0:
                raise InconsistentDesignError(f"imbalance {qk} in an empty stratum")
            continue
        penalty += float(qk) ** 2 / d
    return m - penalty


def info_closed(design: Design) -> float:
    return closed_form_information(q_vector(design), design.n3, design.n2, design.weeks)


def orthogonality_sides(design: Design) -> tuple[np.ndarray, np.ndarray]:
    """(A'B2, A'P(B1)B2), both as 1-d arrays over canonical patients."""
    A = build_A(design).astype(float)
    B1 = build_B1(design)
    B2 = build_B2(design).astype(float)
    lhs = (A.T @ B2).ravel()
    rhs = (A.T @ projector(B1) @ B2).ravel()
    return lhs, rhs


def projected_balance_closed_form(design: Design) -> np.ndarray:
    """A'P(B1)B2 without projection: q'R(B1'B2), i.e. w q'R P3 or w q'R P2 per patient."""
    q = q_vector(design).contracted
    R = R_matrix(design).matrix
    per_schedule = {
        Schedule.THRICE: design.weeks * float(q @ R @ P3),
        Schedule.TWICE: design.weeks * float(q @ R @ P2),
    }
    return np.array([per_schedule[p.schedule] for p in design.canonical_plans()])


def check_orthogonality(design: Design) -> bool:
    lhs, rhs = orthogonality_sides(design)
    return bool(np.max(np.abs(lhs - rhs), initial=0.0) < SCALAR_ATOL)


@dataclass(frozen=True)
class InformationReport:
    m: int
    info_full: float
    info_reduced: float
    info_closed: float
    orthogonal: bool
    patient_balanced: bool
    optimal: bool
    q: QVector
    patient_imbalance: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "info_full": self.info_full,
            "info_reduced": self.info_reduced,
            "info_closed": self.info_closed,
            "orthogonal": self.orthogonal,
            "patient_balanced": self.patient_balanced,
            "optimal": self.optimal,
            "q": self.q.as_dict(),
            "patient_imbalance": list(self.patient_imbalance),
        }


def verdict(design: Design) -> InformationReport:
    """Full report; optimal means q = 0 and every patient gets H and A equally often.

    The sufficient condition is cross-checked against the projection-based
    information; disagreement is a bug and raises.
    """
    report = validate_design(design)
    if not report.valid:
        raise ValueError("invalid design: " + "; ".join(report.violations))
    q = q_vector(design)
    full = info_full(design)
    reduced = info_reduced(design)
    closed = closed_form_information(q, design.n3, design.n2, design.weeks)
    imbalance = tuple(p.imbalance() for p in design.canonical_plans())
    balanced = not any(imbalance)
    optimal = q.is_zero() and balanced
    if optimal != (abs(full - design.m) < OPTIMAL_ATOL):
        raise InconsistentDesignError(
            f"balance test says optimal={optimal} but projection gives {full} of m={design.m}"
        )
    return InformationReport(
        m=design.m,
        info_full=full,
        info_reduced=reduced,
        info_closed=closed,
        orthogonal=check_orthogonality(design),
        patient_balanced=balanced,
        optimal=optimal,
        q=q,
        patient_imbalance=imbalance,
    )
