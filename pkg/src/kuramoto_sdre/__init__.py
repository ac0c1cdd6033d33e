"""SDRE feedback control of Kuramoto oscillator networks toward phase-locked targets."""
from .controller import ControlDecision, SdreController, SdreWeights, control_step
from .kuramoto import NetworkParams
from .riccati import CareProblem, CareSolution, NotStabilizable, solve_care
from .scenarios import Scenario, builtin_scenarios, get_builtin
from .sim import SimConfig, run_closed_loop, steady_state_u

__version__ = "0.1.0"

__all__ = [
    "CareProblem",
    "CareSolution",
    "ControlDecision",
    "NetworkParams",
    "NotStabilizable",
    "Scenario",
    "SdreController",
    "SdreWeights",
    "SimConfig",
    "builtin_scenarios",
    "control_step",
    "get_builtin",
    "run_closed_loop",
    "solve_care",
    "steady_state_u",
]
