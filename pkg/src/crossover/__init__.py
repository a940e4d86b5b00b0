"""Optimal two-treatment crossover designs for patients on Mon/Wed/Fri and Mon/Fri schedules."""

from .design import (Design, ModelParams, PatientPlan, Schedule, Treatment,
                     ValidationReport, WeekSequence, read_design, validate_design,
                     write_design)
from .matrices import (QVector, R_matrix, build_A, build_B1, build_B2, kron,
                       q_vector)
from .information import (InformationReport, check_orthogonality, info_closed,
                          info_full, info_reduced, projector, verdict)
from .construction import (SequenceWeights, construct_design,
                           construct_patient_plan, default_weights, dual,
                           uniform_weights)
from .planning import (PlanInputs, estimator_variance, required_observations,
                       required_weeks)
from .data import TrialDataset, read_trial_csv, write_trial_csv
from .analysis import (FitResult, RandomizationScheme, export_residuals,
                       fit_model, randomization_test)
from .simulation import (ErrorModel, MissingnessSpec, simulate_trial,
                         variance_mc)

__version__ = "0.1.0"
