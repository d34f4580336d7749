"""fdsp: spectral simulation and verification lab for fractional NLS and
fractional wave equations on periodic domains."""

__version__ = "0.1.0"

from .exponents import (EquationKind, EquationParams, ExponentPair,
                        HypothesisError, audit_all, audit_theorem,
                        critical_exponent_nlfs, critical_exponent_nlfw,
                        is_admissible, nlfs_critical_pair, nlfs_subcritical_pair,
                        nlfw_critical_pair, nlfw_subcritical_pair,
                        regularity_gap)
from .spectral import (Field, Multiplier, NonFiniteFieldError, PeriodicGrid,
                       WaveState, ZeroModePolicyError, apply_multiplier,
                       make_grid, read_snapshot, schrodinger_propagate,
                       wave_propagate, write_snapshot)
from .lpnorms import (DyadicBand, NormSpec, besov_norm, lebesgue_norm,
                      lp_project, sobolev_norm, spacetime_norm)
from .evolution import (GridSpec, InitialSpec, NoContractionError, PicardSpec,
                        RunConfig, Trajectory, integrate, integrate_nlfs,
                        integrate_nlfw, nonlinear_phase_step,
                        picard_solve_nlfs, picard_solve_nlfw)
from .diagnostics import (ConservedSet, InequalitySample, WraparoundAlarm,
                          blowup_monitor, conserved_set,
                          dispersive_decay_probe, inequality_sample,
                          rescale_field, scaling_covariance_check,
                          scattering_monitor)
