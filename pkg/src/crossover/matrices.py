"""Design matrices for the treatment/day-class/patient model.

Rows follow ``Design.canonical_plans()``: thrice-weekly patients first, then
twice-weekly, each patient's sessions in (week, day) order.  Columns:

* ``A``  (m x 1): +1 where H was given, -1 where A was given.
* ``B1`` (m x 4): day-class indicators (thrice Mon, thrice Wed, Fri, twice Mon).
* ``B2`` (m x N): patient indicators.

The ``*_closed_form`` builders assemble the same matrices from Kronecker
products of identities and ones vectors; they serve as the independent route
for the row-walk builders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .design import Design, Schedule

# Column of B1 for each (schedule, day).  Twice-weekly Fridays share column 2.
PERIOD_COLUMN = {
    (Schedule.THRICE, "Mon"): 0,
    (Schedule.THRICE, "Wed"): 1,
    (Schedule.THRICE, "Fri"): 2,
    (Schedule.TWICE, "Fri"): 2,
    (Schedule.TWICE, "Mon"): 3,
}

# Per-schedule sums of B1 rows for one week of one patient.
P3 = np.array([1, 1, 1, 0])
P2 = np.array([0, 0, 1, 1])

SWAP = np.array([[0, 1], [1, 0]])


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def ones(n: int) -> np.ndarray:
    return np.ones((n, 1), dtype=np.int64)


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def build_A(design: Design) -> np.ndarray:
    return np.array([[t.signed] for *_, t in design.cells()], dtype=np.int64).reshape(-1, 1)


def build_B1(design: Design) -> np.ndarray:
    rows = [PERIOD_COLUMN[(sched, day)] for _, sched, _, day, _ in design.cells()]
    out = np.zeros((len(rows), 4), dtype=np.int64)
    out[np.arange(len(rows)), rows] = 1
    return out


def build_B2(design: Design) -> np.ndarray:
    plans = design.canonical_plans()
    index = {p.patient_id: i for i, p in enumerate(plans)}
    rows = [index[pid] for pid, *_ in design.cells()]
    out = np.zeros((len(rows), len(plans)), dtype=np.int64)
    out[np.arange(len(rows)), rows] = 1
    return out


def build_X(design: Design) -> np.ndarray:
    return np.hstack([build_A(design), build_B1(design), build_B2(design)])


def B1_closed_form(n3: int, n2: int, w: int) -> np.ndarray:
    top = np.hstack([kron(ones(w * n3), eye(3)), np.zeros((3 * w * n3, 1), dtype=np.int64)])
    bottom = np.hstack([np.zeros((2 * w * n2, 2), dtype=np.int64), kron(ones(w * n2), SWAP)])
    return np.vstack([top, bottom])


def B2_closed_form(n3: int, n2: int, w: int) -> np.ndarray:
    top = np.hstack([kron(eye(n3), ones(3 * w)), np.zeros((3 * w * n3, n2), dtype=np.int64)])
    bottom = np.hstack([np.zeros((2 * w * n2, n3), dtype=np.int64), kron(eye(n2), ones(2 * w))])
    return np.vstack([top, bottom])


def B1tB1_closed_form(n3: int, n2: int, w: int) -> np.ndarray:
    return w * np.diag([n3, n3, n3 + n2, n2]).astype(np.int64)


def B1tB2_closed_form(n3: int, n2: int, w: int) -> np.ndarray:
    return w * np.hstack([
        kron(ones(n3).T, P3.reshape(-1, 1)),
        kron(ones(n2).T, P2.reshape(-1, 1)),
    ]).astype(np.int64)


@dataclass(frozen=True)
class QVector:
    """Day-by-schedule H-minus-A counts."""

    q3_M: int
    q3_W: int
    q3_F: int
    q2_F: int
    q2_M: int

    @property
    def contracted(self) -> np.ndarray:
        return np.array([self.q3_M, self.q3_W, self.q3_F + self.q2_F, self.q2_M], dtype=np.int64)

    def is_zero(self) -> bool:
        return not self.contracted.any()

    def as_dict(self) -> dict:
        return {
            "q3_M": self.q3_M, "q3_W": self.q3_W, "q3_F": self.q3_F,
            "q2_F": self.q2_F, "q2_M": self.q2_M,
            "contracted": [int(v) for v in self.contracted],
        }


def q_vector(design: Design) -> QVector:
    counts = {key: 0 for key in PERIOD_COLUMN}
    for _, sched, _, day, t in design.cells():
        counts[(sched, day)] += t.signed
    return QVector(
        q3_M=counts[(Schedule.THRICE, "Mon")],
        q3_W=counts[(Schedule.THRICE, "Wed")],
        q3_F=counts[(Schedule.THRICE, "Fri")],
        q2_F=counts[(Schedule.TWICE, "Fri")],
        q2_M=counts[(Schedule.TWICE, "Mon")],
    )


class RMatrix(NamedTuple):
    matrix: np.ndarray
    degenerate: bool


def R_matrix(design: Design) -> RMatrix:
    """Generalized inverse of B1'B1; empty strata get zero diagonal entries."""
    return r_matrix_from_counts(design.n3, design.n2, design.weeks)


def r_matrix_from_counts(n3: int, n2: int, w: int) -> RMatrix:
    diag = np.array([n3, n3, n3 + n2, n2], dtype=float) * w
    inv = np.divide(1.0, diag, out=np.zeros(4), where=diag > 0)
    return RMatrix(np.diag(inv), bool((diag == 0).any()))


def write_matrix_csv(matrix, path) -> None:
    """Row-major CSV preceded by a ``# rows=.. cols=..`` header line."""
    mat = np.atleast_2d(np.asarray(matrix))
    fmt = "%d" if np.issubdtype(mat.dtype, np.integer) else "%.17g"
    np.savetxt(path, mat, delimiter=",", fmt=fmt,
               header=f"rows={mat.shape[0]} cols={mat.shape[1]}", comments="# ")
