"""
Finite-constellation MIMO interference channels: treat-interference-as-noise
rates, saturation analysis, MMSE-gradient precoder optimization and
interference-alignment baselines.
"""
__version__ = "0.1.0"

from .model import (Constellation, JointSymbolTable, Scenario, ScenarioError, CapacityError,
                    make_constellation, scenario_from_blocks, db_to_linear, effective_channel,
                    difference_vectors, enumerate_joint)
from .infotheory import (ApproximationRegimeWarning, RateReport, mi_joint_mc, mi_conditional_mc,
                         mi_user, sum_rate_mc, mi_joint_approx, mi_conditional_approx,
                         mi_user_approx, gaussian_rate_tin, gaussian_saturation_siso, rate_report,
                         receiver_stats)
from .ccsc import (CcscReport, SaturationReport, CcscSearchError, ccsc_check, ccsc_check_all,
                   saturation_limit, random_ccsc_precoders)
from .mmse import mmse_full, mmse_interference, sum_rate_gradient, sum_rate_and_gradient
from .optimizer import OptimizeParams, OptimizeTrace, optimize_sum_rate, project_power
from .baselines import (SingularChannelError, AlignmentReport, ia_precoders_3user, ia_candidates,
                        verify_alignment, identity_precoders, random_precoders)
from .io import ScenarioFileError, load_scenario, save_scenario, loads_scenario, dumps_scenario
