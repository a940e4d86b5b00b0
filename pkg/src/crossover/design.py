"""Schedules, treatment sequences and whole designs, plus the JSON design file.

A design allocates one of two treatments, H or A, to every dialysis session of
every patient over ``w`` weeks.  Patients attend either three times a week
(Mon/Wed/Fri) or twice a week (Mon/Fri); no other attendance pattern exists.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

DAY_LABELS = ("Mon", "Wed", "Fri")


class DesignFormatError(ValueError):
    """Malformed design file (bad JSON or a missing/ill-typed field)."""


class SchemaError(DesignFormatError):
    """Well-formed file whose content violates the design schema."""


class Treatment(enum.Enum):
    H = "H"
    A = "A"

    @property
    def signed(self) -> int:
        return 1 if self is Treatment.H else -1

    @property
    def dual(self) -> "Treatment":
        return Treatment.A if self is Treatment.H else Treatment.H

    @classmethod
    def parse(cls, code: str) -> "Treatment":
        try:
            return cls(code)
        except ValueError:
            raise SchemaError(f"unknown treatment code {code!r}; expected 'H' or 'A'") from None


class Schedule(enum.Enum):
    """Weekly attendance pattern; the value is the number of sessions."""

    TWICE = 2
    THRICE = 3

    @property
    def sessions_per_week(self) -> int:
        return self.value

    @property
    def days(self) -> tuple[str, ...]:
        return ("Mon", "Wed", "Fri") if self is Schedule.THRICE else ("Mon", "Fri")

    @classmethod
    def from_sessions(cls, sessions: int) -> "Schedule":
        try:
            return cls(int(sessions))
        except ValueError:
            raise SchemaError(f"sessions_per_week must be 2 or 3, got {sessions!r}") from None


@dataclass(frozen=True)
class WeekSequence:
    schedule: Schedule
    treatments: tuple[Treatment, ...]

    def __post_init__(self):
        object.__setattr__(self, "treatments", tuple(self.treatments))
        if len(self.treatments) != self.schedule.sessions_per_week:
            raise ValueError(
                f"{self.schedule.name} week needs {self.schedule.sessions_per_week} "
                f"treatments, got {len(self.treatments)}"
            )

    @classmethod
    def from_string(cls, codes: str) -> "WeekSequence":
        """``"AHA"`` -> thrice-weekly sequence, ``"AH"`` -> twice-weekly."""
        schedule = Schedule.from_sessions(len(codes))
        return cls(schedule, tuple(Treatment.parse(c) for c in codes))

    def dual(self) -> "WeekSequence":
        return WeekSequence(self.schedule, tuple(t.dual for t in self.treatments))

    def signed(self) -> tuple[int, ...]:
        return tuple(t.signed for t in self.treatments)

    def __str__(self) -> str:
        return "".join(t.value for t in self.treatments)


@dataclass(frozen=True)
class PatientPlan:
    patient_id: str
    schedule: Schedule
    weeks: tuple[WeekSequence, ...]

    def __post_init__(self):
        object.__setattr__(self, "weeks", tuple(self.weeks))
        for k, seq in enumerate(self.weeks):
            if seq.schedule is not self.schedule:
                raise ValueError(
                    f"patient {self.patient_id}: week {k + 1} uses {seq.schedule.name} "
                    f"but the patient is {self.schedule.name}; schedule changes are unsupported"
                )

    @classmethod
    def from_strings(cls, patient_id: str, weeks: Sequence[str]) -> "PatientPlan":
        seqs = tuple(WeekSequence.from_string(s) for s in weeks)
        if not seqs:
            raise ValueError("a plan needs at least one week to infer its schedule")
        return cls(str(patient_id), seqs[0].schedule, seqs)

    @property
    def n_sessions(self) -> int:
        return self.schedule.sessions_per_week * len(self.weeks)

    def cells(self) -> Iterable[tuple[int, str, Treatment]]:
        """(week, day, treatment) in chronological order, weeks numbered from 1."""
        for k, seq in enumerate(self.weeks, start=1):
            for day, t in zip(self.schedule.days, seq.treatments):
                yield k, day, t

    def imbalance(self) -> int:
        """H count minus A count."""
        return sum(t.signed for seq in self.weeks for t in seq.treatments)


@dataclass(frozen=True)
class Design:
    weeks: int
    plans: tuple[PatientPlan, ...]

    def __post_init__(self):
        object.__setattr__(self, "plans", tuple(self.plans))

    @property
    def n3(self) -> int:
        return sum(p.schedule is Schedule.THRICE for p in self.plans)

    @property
    def n2(self) -> int:
        return sum(p.schedule is Schedule.TWICE for p in self.plans)

    @property
    def m(self) -> int:
        return self.weeks * (3 * self.n3 + 2 * self.n2)

    def canonical_plans(self) -> tuple[PatientPlan, ...]:
        """Thrice-weekly patients first, then twice-weekly, each group in plan order.

        Every matrix in the package uses this row order.
        """
        three = [p for p in self.plans if p.schedule is Schedule.THRICE]
        two = [p for p in self.plans if p.schedule is Schedule.TWICE]
        return tuple(three + two)

    def cells(self) -> Iterable[tuple[str, Schedule, int, str, Treatment]]:
        """Every allocation cell in canonical row order."""
        for plan in self.canonical_plans():
            for week, day, t in plan.cells():
                yield plan.patient_id, plan.schedule, week, day, t

    def n_cells(self) -> int:
        return sum(len(p.weeks) * p.schedule.sessions_per_week for p in self.plans)


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the additive model: treatment, day-class and patient effects.

    ``pi`` holds (pi1, pi2, pi3, pi4): thrice-weekly Mon, Wed, Fri, and
    twice-weekly Mon.  Twice-weekly Fridays share pi3.  ``xi`` is indexed by
    canonical patient order; empty means all zero.
    """

    tau: float
    pi: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    xi: tuple[float, ...] = ()
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(float(v) for v in self.pi))
        object.__setattr__(self, "xi", tuple(float(v) for v in self.xi))
        if len(self.pi) != 4:
            raise ValueError(f"need four period effects, got {len(self.pi)}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def empty(self) -> bool:
        return not self.violations and not self.warnings

    def __bool__(self) -> bool:
        return not self.empty


def validate_design(design: Design) -> ValidationReport:
    report = ValidationReport()
    if design.weeks < 1:
        report.violations.append(f"weeks must be >= 1, got {design.weeks}")
    if not design.plans:
        report.violations.append("design has no patients")
    counts = Counter(p.patient_id for p in design.plans)
    for pid, n in counts.items():
        if n > 1:
            report.violations.append(f"duplicate patient_id {pid!r} ({n} plans)")
    for plan in design.plans:
        if len(plan.weeks) != design.weeks:
            report.violations.append(
                f"patient {plan.patient_id}: plan length {len(plan.weeks)} != w={design.weeks}"
            )
        imb = plan.imbalance()
        if imb != 0:
            report.warnings.append(f"patient {plan.patient_id}: patient imbalance = {imb}")
    return report


# -- design file --------------------------------------------------------------

def design_to_dict(design: Design) -> dict:
    return {
        "weeks": design.weeks,
        "plans": [
            {
                "patient_id": p.patient_id,
                "sessions_per_week": p.schedule.sessions_per_week,
                "weeks": [[t.value for t in seq.treatments] for seq in p.weeks],
            }
            for p in design.plans
        ],
    }


def design_to_json(design: Design) -> str:
    return json.dumps(design_to_dict(design), indent=1) + "\n"


def write_design(design: Design, path) -> None:
    Path(path).write_text(design_to_json(design), encoding="utf-8")


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict):
        raise DesignFormatError(f"{where}: expected an object")
    if key not in obj:
        raise DesignFormatError(f"{where}: missing field {key!r}")
    return obj[key]


def design_from_dict(raw: dict) -> Design:
    weeks = _require(raw, "weeks", "design")
    if isinstance(weeks, bool) or not isinstance(weeks, int):
        raise DesignFormatError(f"weeks: expected an integer, got {weeks!r}")
    plans_raw = _require(raw, "plans", "design")
    if not isinstance(plans_raw, list):
        raise DesignFormatError("plans: expected a list")
    plans = []
    for i, pr in enumerate(plans_raw):
        where = f"plans[{i}]"
        pid = _require(pr, "patient_id", where)
        schedule = Schedule.from_sessions(_require(pr, "sessions_per_week", where))
        days = pr.get("days")
        if days is not None:
            bad = [d for d in days if d not in DAY_LABELS]
            if bad:
                raise SchemaError(f"{where}.days: unknown day label {bad[0]!r}")
            if tuple(days) != schedule.days:
                raise SchemaError(
                    f"{where}.days: {list(days)} does not match the "
                    f"{schedule.sessions_per_week}-day schedule {list(schedule.days)}"
                )
        weeks_raw = _require(pr, "weeks", where)
        if not isinstance(weeks_raw, list):
            raise DesignFormatError(f"{where}.weeks: expected a list")
        seqs = []
        for k, wk in enumerate(weeks_raw):
            if not isinstance(wk, list) or not all(isinstance(c, str) for c in wk):
                raise DesignFormatError(f"{where}.weeks[{k}]: expected a list of 'H'/'A' strings")
            try:
                seqs.append(WeekSequence(schedule, tuple(Treatment.parse(c) for c in wk)))
            except SchemaError as exc:
                raise SchemaError(f"{where}.weeks[{k}]: {exc}") from None
            except ValueError as exc:
                raise SchemaError(f"{where}.weeks[{k}]: {exc}") from None
        plans.append(PatientPlan(str(pid), schedule, tuple(seqs)))
    return Design(weeks, tuple(plans))


def design_from_json(text: str) -> Design:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DesignFormatError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return design_from_dict(raw)


def read_design(path) -> Design:
    return design_from_json(Path(path).read_text(encoding="utf-8"))
