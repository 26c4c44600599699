"""Adiabatic and slow-drive asymptotics for time-dependent Lindblad dynamics."""
__version__ = "0.1.0"

from .operators import (ContractViolation, InvalidInputError, apply_superop, choi_matrix,
                        induced_trace_norm, is_cptp, lindblad_superop, trace_norm, unvec, vec)
from .model import (LindbladModel, OperatorPath, SmoothSchedule, builtin_models,
                    check_hypotheses, model_from_config, smooth_switch, spectral_frame)
from .propagators import (IntegrationError, PropagatorTable, adiabatic_V, evolve, kato_W,
                          lindblad_U, schrodinger_U, superadiabatic_frame, superadiabatic_Vhat)
from .asymptotics import (dyson_terms, lindblad_spectral_frame, markov_generator,
                          perturbative_transition, reduced_dynamics, slow_drive_approx,
                          splitting_matrix, stationary_state, transition_regime_approx)
from .experiments import (HypothesisError, SweepPlan, coherence_decay_suite, default_plan,
                          fit_rate, qubit_closed_form, run_regime_suite)
