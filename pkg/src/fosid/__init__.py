"""Simulation and joint parameter/order estimation of initialized fractional-order systems."""

from .estimator import (
    EstimationConfig,
    EstimationResult,
    estimate,
    jacobian,
    pinv,
    pinv_derivative,
    projection_residual,
    solve_linear_params,
)
from .glkernel import (
    BinomialTable,
    FosModel,
    OrderValue,
    binom_coeff_derivs,
    binom_coeffs,
    binomial_table,
    gl_full,
    gl_initialized,
    gl_solve,
    gl_uninitialized,
    psi_init,
    psi_init_all,
    simulate_fos,
)
from .generators import (
    AberrationDemo,
    ExampleSpec,
    GeneratedExample,
    aberration_demo,
    example_names,
    gen_example,
    generate,
    get_example,
    neuro_param_map,
)
from .history import HistorySpec, apply_history, build_duplicate_history
from .metrics import relative_error_param, relative_error_signal
from .protocols import (
    PaperModeReport,
    SweepReport,
    inverse_crime_example,
    paper_mode_experiment,
    reconstruct_output,
    run_sweep,
)
from .regressor import RegressorBundle, assemble, assemble_with_sensitivities, sensitivities
from .signalkit import (
    Dataset,
    HistorySegment,
    SampledSignal,
    SamplingGrid,
    concat_history_output,
    make_grid,
)

__version__ = "0.1.0"
