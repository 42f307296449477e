"""Electrode-lift plant toolkit for a 40t UHP arc furnace.

Submodules: hydraulics (actuator model and its LTI reduction), arc_circuit
(arc length -> voltage/current/impedance maps), sim_engine (open/closed-loop
time-domain simulation), identification (step-response estimation and model
fit scoring), cli_io (scenario files, CSV formats, command line).
"""
from .arc_circuit import (
    ArcOperatingPoint,
    CircuitParams,
    MeltingStagePreset,
    TapTable,
    arc_current,
    arc_voltage,
    characteristic_sweep,
    impedance,
    operating_point,
    valid_arc_range,
)
from .errors import ArcPlantError, ConfigError, DataError, DomainError, UnsustainableArcError
from .hydraulics import (
    DEFAULT_HYDRAULICS,
    HydraulicDerivation,
    HydraulicParams,
    PlantLTI,
    PlantTransfer,
    TransferFunction,
    analytic_step,
    derive_lti,
    hydraulic_state,
    transfer_function,
)
from .identification import (
    FieldSeries,
    FitReport,
    StepIdResult,
    StepRecord,
    fit_percent,
    identify_step,
    validate_against_field,
)
from .sim_engine import (
    NO_CONTROLLER,
    ControllerConfig,
    InputProgram,
    PlantState,
    Scenario,
    Trajectory,
    rk4_reference,
    scenario_fingerprint,
    simulate,
    step_state,
)

__version__ = "0.1.0"
