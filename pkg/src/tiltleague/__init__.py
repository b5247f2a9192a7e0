"""League win counts under stationary strength tilts.

A league of 2n teams plays a single round robin. Each team carries a base
strength; a stationary tilting process multiplies it day by day, and a win
function turns the two day-strengths of a match into a win probability.
The package computes the limiting win-rate curve and the fluctuation
variance of the season win count, simulates leagues reproducibly, validates
the limit theorems statistically, and fits the model to observed ranking
curves.
"""

__version__ = "0.1.0"

from .analytic import (BlockSchedule, LimitReport, check_block_conditions,
                       default_block_schedule, ell, limit_report, rho2_markov,
                       sigma2)
from .calibrate import (FitSpec, ModelInstance, RankingData, default_fit_spec,
                        fit, predicted_curve, reference_instance)
from .match_model import (ConstantHalf, Kernel, Ratio, Table,
                          TransformedRatio, WinFunction, eval_f, F_s,
                          F_tilde_s, G_s)
from .measures import (Discrete, Empirical, Measure, UniformInterval, cdf,
                       discrete, discrete_renormalized, expect, inverse_cdf,
                       sample)
from .processes import (IIDTilting, MarkovTilting, TiltingProcess, alpha,
                        alpha_tail_bound, iid_tilting, joint_law,
                        marginal_measure, markov2, markov_tilting,
                        sample_path)
from .scheduling import (Calendar, calendar_to_csv, canonical_focal_calendar,
                         circle_calendar, validate_calendar)
from .simulate import (QuenchedEnvironment, ReplicaResult, draw_environment,
                       expected_wins_quenched, ranking_curve, run_replicas)
from .stats import (NormalityReport, ShiftDeviationReport, clt_check_gsum,
                    clt_check_wins, ks_against_normal,
                    product_shift_deviation, uniform_shift_deviation)
from .streams import substream

__all__ = [name for name in dir() if not name.startswith("_")]
