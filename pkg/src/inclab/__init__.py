"""inclab: exact and stochastic laboratory for condensate motion in the
finite reversible inclusion process.

Workflow: build a validated random-walk kernel, enumerate the particle
configurations, materialize the sparse process generator with its
stationary measure, then interrogate the metastable dynamics three ways:
Dirichlet solves (capacities, equilibrium potentials, exact mean hitting
times, trace rates), closed-form time-scale predictions, and exact kinetic
Monte Carlo.
"""

__version__ = "0.1.0"

from .asymptotics import (
    ScalePrediction,
    TestFunctionSpec,
    evaluate_test_function,
    phi_ramp,
    predict_scale1,
    predict_scale2,
    predict_scale3_bracket,
    series_conductance,
)
from .config_space import ConfigSpace, move, space_size
from .generator import (
    SparseGenerator,
    apply_generator,
    build_generator,
    dirichlet_form,
)
from .measure import (
    MeasureReport,
    WeightTable,
    build_weights,
    default_dn,
    log_partition_enumerated,
    log_partition_profile,
    measure_report,
    partition_function,
)
from .model import SiteKernel, build_kernel, is_linear_chain, load_kernel
from .potential import (
    PotentialReport,
    mean_hitting_time,
    solve_equilibrium_potential,
    trace_rates,
)
from .scenario import Scenario, load_scenario, scenario_from_config
from .simulator import (
    TrajectorySummary,
    simulate_condensate_path,
    simulate_hitting,
)

__all__ = [
    "ConfigSpace",
    "MeasureReport",
    "PotentialReport",
    "ScalePrediction",
    "Scenario",
    "SiteKernel",
    "SparseGenerator",
    "TestFunctionSpec",
    "TrajectorySummary",
    "WeightTable",
    "apply_generator",
    "build_generator",
    "build_kernel",
    "build_weights",
    "default_dn",
    "dirichlet_form",
    "evaluate_test_function",
    "is_linear_chain",
    "load_kernel",
    "load_scenario",
    "log_partition_enumerated",
    "log_partition_profile",
    "mean_hitting_time",
    "measure_report",
    "move",
    "partition_function",
    "phi_ramp",
    "predict_scale1",
    "predict_scale2",
    "predict_scale3_bracket",
    "scenario_from_config",
    "series_conductance",
    "simulate_condensate_path",
    "simulate_hitting",
    "solve_equilibrium_potential",
    "space_size",
    "trace_rates",
]
