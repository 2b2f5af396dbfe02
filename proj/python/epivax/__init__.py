"""Dengue vaccination dynamics: simulation, reproduction numbers and optimal control."""

from ._core import (
    COMPARTMENTS,
    DEFAULT_STEP,
    ContractViolation,
    ControlProblem,
    EpiParams,
    Error,
    IntegrationError,
    LookupError,
    ParseError,
    Scenario,
    SolveReport,
    SysState,
    Trajectory,
    ValidationError,
    ViabilityError,
    compare_policies,
    critical_mass_rate,
    critical_pediatric_coverage,
    disease_free_equilibrium,
    evaluate_constant_policy,
    parse_scenario,
    peak,
    preset_names,
    preset_scenario,
    r0_baseline,
    r0_imperfect,
    r0_mass,
    r0_pediatric,
    r0_waning,
    run_cli,
    simulate,
    solve_direct,
    solve_indirect,
    trajectory_csv,
)

__version__ = "0.1.0"
