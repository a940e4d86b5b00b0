import hypothesis
import numpy as np
import pytest
from hypothesis import strategies as st

from crossover.construction import random_allocation_design
from crossover.design import Design, PatientPlan

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")


def design_from(weeks_by_patient):
    """``[["HAH", "AHA"], ["AH", "HA"]]`` -> Design with patients "1", "2", ..."""
    plans = tuple(PatientPlan.from_strings(str(i + 1), weeks) for i, weeks in enumerate(weeks_by_patient))
    return Design(len(weeks_by_patient[0]), plans)


@st.composite
def random_designs(draw, max_n3=5, max_n2=3, max_w=6):
    n3 = draw(st.integers(0, max_n3))
    n2 = draw(st.integers(0 if n3 else 1, max_n2))
    w = draw(st.integers(1, max_w))
    seed = draw(st.integers(0, 2**32 - 1))
    p_h = draw(st.sampled_from([0.5, 0.2, 0.9, 1.0]))
    return random_allocation_design(n3, n2, w, np.random.default_rng(seed), p_h)


def sweep(n, seed=0):
    """``n`` random unstructured designs over N3 0..5, N2 0..3, w 1..6 (no empty designs)."""
    gen = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        n3, n2, w = int(gen.integers(0, 6)), int(gen.integers(0, 4)), int(gen.integers(1, 7))
        if n3 + n2 == 0:
            continue
        out.append(random_allocation_design(n3, n2, w, gen, p_h=float(gen.choice([0.5, 0.5, 0.3, 0.8]))))
    return out


@pytest.fixture
def paper_design():
    from crossover.construction import construct_design
    return construct_design(4, 2, 10, seed=2024)
