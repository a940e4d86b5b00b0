"""Randomized optimal designs built from dual pairs of weekly sequences.

For each patient, ``w/2`` base sequences are drawn (with replacement) from the
sequences starting with A, each is paired with its dual, and the resulting
``w`` weekly sequences are shuffled over the weeks.  Every day-of-week column
then holds equal numbers of H and A for that patient, which makes the design
optimal regardless of how many patients follow each schedule.

Each patient draws from its own substream keyed by its position within its
schedule group, so adding patients leaves existing plans untouched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .design import Design, PatientPlan, Schedule, WeekSequence

THRICE_SEQUENCES = tuple(WeekSequence.from_string(s) for s in ("AAA", "AAH", "AHH", "AHA"))
TWICE_SEQUENCES = tuple(WeekSequence.from_string(s) for s in ("AA", "AH"))

_STREAM_KEY = {Schedule.THRICE: 3, Schedule.TWICE: 2}


def base_sequences(schedule: Schedule) -> tuple[WeekSequence, ...]:
    return THRICE_SEQUENCES if schedule is Schedule.THRICE else TWICE_SEQUENCES


def dual(seq: WeekSequence) -> WeekSequence:
    return seq.dual()


@dataclass(frozen=True)
class SequenceWeights:
    """Selection probabilities over (AAA, AAH, AHH, AHA) and (AA, AH)."""

    thrice: tuple[float, float, float, float]
    twice: tuple[float, float]

    def __post_init__(self):
        for name, probs, n in (("thrice", self.thrice, 4), ("twice", self.twice, 2)):
            probs = tuple(float(p) for p in probs)
            object.__setattr__(self, name, probs)
            if len(probs) != n:
                raise ValueError(f"{name} weights need {n} entries, got {len(probs)}")
            if min(probs) < 0:
                raise ValueError(f"{name} weights must be non-negative")
            if abs(sum(probs) - 1.0) > 1e-12:
                raise ValueError(f"{name} weights must sum to 1, got {sum(probs)!r}")

    def for_schedule(self, schedule: Schedule) -> tuple[float, ...]:
        return self.thrice if schedule is Schedule.THRICE else self.twice

    def as_dict(self) -> dict:
        return {"thrice": list(self.thrice), "twice": list(self.twice)}


def default_weights() -> SequenceWeights:
    """Favours the rapidly alternating AHA / AH, for robustness to positive autocorrelation."""
    return SequenceWeights(thrice=(0.1, 0.2, 0.2, 0.5), twice=(0.2, 0.8))


def uniform_weights() -> SequenceWeights:
    return SequenceWeights(thrice=(0.25, 0.25, 0.25, 0.25), twice=(0.5, 0.5))


def weights_by_name(name: str) -> SequenceWeights:
    if name == "paper":
        return default_weights()
    if name == "uniform":
        return uniform_weights()
    raise ValueError(f"unknown weights {name!r}; expected 'paper' or 'uniform'")


def _check_weeks(w: int) -> None:
    if w < 2 or w % 2:
        raise ValueError(
            f"the dual-pair construction needs an even number of weeks >= 2, got {w}; "
            f"round up to {max(2, w + (w % 2))}"
        )


def draw_week_indices(schedule: Schedule, w: int, weights: SequenceWeights,
                      gen: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Base-sequence index and dual flag for each of the ``w`` weeks, in week order."""
    _check_weeks(w)
    half = w // 2
    base = gen.choice(len(base_sequences(schedule)), size=half, p=weights.for_schedule(schedule))
    labelled = np.concatenate([base, base])
    is_dual = np.repeat([False, True], half)
    order = gen.permutation(w)
    return labelled[order], is_dual[order]


def construct_patient_plan(schedule: Schedule, w: int, weights: SequenceWeights,
                           rng: np.random.Generator, patient_id: str = "1") -> PatientPlan:
    idx, is_dual = draw_week_indices(schedule, w, weights, rng)
    seqs = base_sequences(schedule)
    weeks = tuple(seqs[i].dual() if d else seqs[i] for i, d in zip(idx, is_dual))
    return PatientPlan(str(patient_id), schedule, weeks)


def patient_generator(seed, schedule: Schedule, index: int) -> np.random.Generator:
    return rngmod.generator(seed, _STREAM_KEY[schedule], index)


def construct_design(n3: int, n2: int, w: int, weights: SequenceWeights | None = None,
                     seed=0) -> Design:
    """Optimal design with patients "1".."n3" thrice-weekly, then the twice-weekly ones."""
    if n3 < 0 or n2 < 0 or n3 + n2 < 1:
        raise ValueError(f"need at least one patient, got n3={n3}, n2={n2}")
    _check_weeks(w)
    weights = weights or default_weights()
    plans = []
    for schedule, count, offset in ((Schedule.THRICE, n3, 0), (Schedule.TWICE, n2, n3)):
        for i in range(count):
            gen = patient_generator(seed, schedule, i)
            plans.append(construct_patient_plan(schedule, w, weights, gen, str(offset + i + 1)))
    return Design(w, tuple(plans))


# Signed allocation of each base sequence and of its dual, by schedule.
_SIGNED = {
    s: np.array([seq.signed() for seq in base_sequences(s)], dtype=np.int8)
    for s in (Schedule.THRICE, Schedule.TWICE)
}


def allocation_vector(n3: int, n2: int, w: int, weights: SequenceWeights, seed) -> np.ndarray:
    """Signed allocation of ``construct_design(n3, n2, w, weights, seed)`` in canonical row order.

    Same draws as the full construction, without building the value objects;
    used for re-randomization where many thousands of designs are needed.
    """
    parts = []
    for schedule, count in ((Schedule.THRICE, n3), (Schedule.TWICE, n2)):
        signed = _SIGNED[schedule]
        for i in range(count):
            idx, is_dual = draw_week_indices(schedule, w, weights, patient_generator(seed, schedule, i))
            rows = signed[idx] * np.where(is_dual, -1, 1)[:, None]
            parts.append(rows.ravel())
    return np.concatenate(parts).astype(float) if parts else np.zeros(0)


def random_allocation_design(n3: int, n2: int, w: int, gen: np.random.Generator,
                             p_h: float = 0.5) -> Design:
    """Unstructured design: each session independently H with probability ``p_h``.

    Not optimal in general; used to stress the information identities.
    """
    plans = []
    for schedule, count, offset in ((Schedule.THRICE, n3, 0), (Schedule.TWICE, n2, n3)):
        ell = schedule.sessions_per_week
        for i in range(count):
            draws = gen.random((w, ell)) < p_h
            weeks = tuple(WeekSequence.from_string("".join("H" if h else "A" for h in row))
                          for row in draws)
            plans.append(PatientPlan(str(offset + i + 1), schedule, weeks))
    return Design(w, tuple(plans))
