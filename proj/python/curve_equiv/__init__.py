"""Equivalence of two parametric regression curves by the area between them.

Thin wrapper around the compiled ``_core`` extension; see the project README
for the C++ API this mirrors.
"""

from ._core import (  # noqa: F401
    BootstrapConfig,
    CiReport,
    Domain,
    FitOptions,
    FittedGroup,
    FittedPair,
    GroupSample,
    InputError,
    Interval,
    MethodOC,
    ModelSpec,
    OperatingCharacteristics,
    ParameterBox,
    ProcedureError,
    RunMethod,
    Scenario,
    ScenarioShape,
    TestReport,
    TwoGroupData,
    asymptotic_ci,
    asymptotic_test,
    bootstrap_ci,
    bootstrap_ci_test,
    constrained_bootstrap_test,
    default_sn,
    delta_for_d1,
    derivative_bootstrap_test,
    derive_seed,
    estimate_null_set,
    fit_both,
    gamma_for_d1,
    kappa_hat,
    l1_distance,
    load_csv,
    ls_fit,
    make_scenario_data,
    run_coverage,
    run_power,
    save_csv,
    scenario_d1,
    scenario_model,
    two_sided_ci,
)

__version__ = "0.1.0"
