"""Symbol-level precoding toolkit.

Precoders that steer noise-free received signals into per-symbol
constructive-interference regions by minimizing a weighted MSE, their
classical degenerate cases (WMMSE, MMSE, CI-ZF, ZF), a certified
active-set nonnegative least-squares solver, and a reproducible
link-level Monte Carlo simulator.
"""

from .constellation import (
    CirBoundary,
    CirLambda,
    ConfigurationError,
    Constellation,
    ConstellationPoint,
)
from .embedding import (
    complexify_matrix,
    complexify_vector,
    realify_matrix,
    realify_vector,
)
from .nnls import NnlsConvergenceError, NnlsSolution, solve_active_set, verify_kkt
from .precoding import (
    CIWMMSEPrecoder,
    CIZFPrecoder,
    FactorCache,
    FactorizationError,
    MMSEPrecoder,
    PrecodeResult,
    WMMSEPrecoder,
    ZFPrecoder,
    block_gamma,
    build_factor_cache,
    make_precoder,
    objective_gradient_x,
    objective_value,
)
from .simulation import (
    SerCurve,
    SerPoint,
    SimConfig,
    generate_rayleigh,
    simulate_ser,
    snr_at_ser,
    transmit_receive,
)
from .complexity import OpCountReport, complexity_report

__version__ = "0.1.0"

__all__ = [
    "CirBoundary",
    "CirLambda",
    "ConfigurationError",
    "Constellation",
    "ConstellationPoint",
    "realify_vector",
    "realify_matrix",
    "complexify_vector",
    "complexify_matrix",
    "NnlsSolution",
    "NnlsConvergenceError",
    "solve_active_set",
    "verify_kkt",
    "ZFPrecoder",
    "MMSEPrecoder",
    "WMMSEPrecoder",
    "CIZFPrecoder",
    "CIWMMSEPrecoder",
    "FactorCache",
    "FactorizationError",
    "PrecodeResult",
    "block_gamma",
    "build_factor_cache",
    "make_precoder",
    "objective_value",
    "objective_gradient_x",
    "SimConfig",
    "SerPoint",
    "SerCurve",
    "generate_rayleigh",
    "transmit_receive",
    "simulate_ser",
    "snr_at_ser",
    "OpCountReport",
    "complexity_report",
    "__version__",
]
