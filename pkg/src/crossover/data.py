"""Trial data: one record per scheduled session, with missing responses kept as slots.

CSV layout (header required)::

    patient_id,week,day,treatment,y
    1,1,Mon,H,12.5
    1,1,Wed,A,

``y`` is empty when the session's response was not observed.  A patient's
schedule is inferred from the days present: any Wednesday row makes the
patient thrice-weekly, otherwise twice-weekly.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .design import DAY_LABELS, Design, Schedule, SchemaError, Treatment

CSV_FIELDS = ("patient_id", "week", "day", "treatment", "y")


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Record:
    patient_id: str
    week: int
    day: str
    treatment: Treatment
    y: float | None

    @property
    def key(self) -> tuple[str, int, str]:
        return self.patient_id, self.week, self.day

    @property
    def observed(self) -> bool:
        return self.y is not None


@dataclass(frozen=True)
class TrialDataset:
    """Records in canonical order: thrice-weekly patients, then twice-weekly, chronological."""

    records: tuple[Record, ...]
    schedules: Mapping[str, Schedule]

    def __post_init__(self):
        seen = set()
        for r in self.records:
            if r.key in seen:
                raise DataFormatError(f"duplicate record for {r.key}")
            seen.add(r.key)
            sched = self.schedules.get(r.patient_id)
            if sched is None:
                raise DataFormatError(f"no schedule for patient {r.patient_id!r}")
            if r.day not in sched.days:
                raise DataFormatError(
                    f"patient {r.patient_id}: day {r.day} is not on the {sched.name} schedule"
                )
            if r.week < 1:
                raise DataFormatError(f"patient {r.patient_id}: week must be >= 1, got {r.week}")
        patients = _ordered_patients(self.records, self.schedules)
        rank = {pid: i for i, pid in enumerate(patients)}

        def sort_key(r: Record):
            return rank[r.patient_id], r.week, DAY_LABELS.index(r.day)

        object.__setattr__(self, "records", tuple(sorted(self.records, key=sort_key)))
        object.__setattr__(self, "schedules", dict(self.schedules))

    @property
    def patients(self) -> tuple[str, ...]:
        return _ordered_patients(self.records, self.schedules)

    @property
    def n3(self) -> int:
        return sum(self.schedules[p] is Schedule.THRICE for p in self.patients)

    @property
    def n2(self) -> int:
        return sum(self.schedules[p] is Schedule.TWICE for p in self.patients)

    @property
    def weeks(self) -> int:
        return max((r.week for r in self.records), default=0)

    @property
    def observed_mask(self) -> np.ndarray:
        return np.array([r.observed for r in self.records], dtype=bool)

    def responses(self) -> np.ndarray:
        """Observed responses only, in record order."""
        return np.array([r.y for r in self.records if r.observed], dtype=float)

    def n_observed(self) -> int:
        return int(self.observed_mask.sum())

    def with_responses(self, y: Sequence[float | None]) -> "TrialDataset":
        recs = tuple(Record(r.patient_id, r.week, r.day, r.treatment, v)
                     for r, v in zip(self.records, y, strict=True))
        return TrialDataset(recs, self.schedules)


def _ordered_patients(records: Iterable[Record], schedules: Mapping[str, Schedule]) -> tuple[str, ...]:
    first_seen = list(dict.fromkeys(r.patient_id for r in records))
    three = [p for p in first_seen if schedules[p] is Schedule.THRICE]
    two = [p for p in first_seen if schedules[p] is Schedule.TWICE]
    return tuple(three + two)


def dataset_from_design(design: Design, y: Sequence[float | None]) -> TrialDataset:
    """Pair each allocation cell (canonical order) with a response or ``None``."""
    cells = list(design.cells())
    if len(cells) != len(y):
        raise ValueError(f"{len(y)} responses for {len(cells)} cells")
    recs = tuple(
        Record(pid, week, day, t, None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v))
        for (pid, _, week, day, t), v in zip(cells, y)
    )
    schedules = {p.patient_id: p.schedule for p in design.plans}
    return TrialDataset(recs, schedules)


def trial_csv_text(data: TrialDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in data.records:
        writer.writerow([r.patient_id, r.week, r.day, r.treatment.value,
                         "" if r.y is None else repr(float(r.y))])
    return buf.getvalue()


def write_trial_csv(data: TrialDataset, path) -> None:
    Path(path).write_text(trial_csv_text(data), encoding="utf-8")


def read_trial_csv(path) -> TrialDataset:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_FIELDS:
            raise DataFormatError(f"header must be {','.join(CSV_FIELDS)}, got {reader.fieldnames}")
        records = []
        for lineno, row in enumerate(reader, start=2):
            try:
                day = row["day"]
                if day not in DAY_LABELS:
                    raise SchemaError(f"unknown day label {day!r}")
                y_raw = (row["y"] or "").strip()
                records.append(Record(
                    patient_id=row["patient_id"],
                    week=int(row["week"]),
                    day=day,
                    treatment=Treatment.parse(row["treatment"]),
                    y=float(y_raw) if y_raw else None,
                ))
            except (ValueError, TypeError) as exc:
                raise DataFormatError(f"line {lineno}: {exc}") from None
    days_by_patient: dict[str, set[str]] = {}
    for r in records:
        days_by_patient.setdefault(r.patient_id, set()).add(r.day)
    schedules = {pid: Schedule.THRICE if "Wed" in days else Schedule.TWICE
                 for pid, days in days_by_patient.items()}
    return TrialDataset(tuple(records), schedules)
