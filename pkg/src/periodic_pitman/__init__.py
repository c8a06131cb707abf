"""Periodic Pitman transform algebra, invariant-measure samplers, and the
associated Markov chains, SDE integrators, and verification harness."""

from .cyclic import (
    DomainError,
    SlopedFamily,
    coupled_step,
    cyclic_shift,
    d2,
    d_multi,
    d_multi_qform,
    dk_stack,
    fullline_d_periodic,
    j2,
    jk_stack,
    l2,
    logsumexp,
    multiline_step,
    pitman_w,
    pitman_w_inv,
    reflect,
    seg_sum,
    slope,
    t2,
)
from .dynamics import (
    PolymerEnvironment,
    SdeState,
    chain_step,
    draw_polymer_environment,
    em_step_dual,
    em_step_sbe,
    evolve,
    polymer_ratio_layer,
)
from .kernels import (
    KernelParams,
    PeriodizedValue,
    dirichlet_integral,
    dirichlet_quadrature,
    dirichlet_report,
    gauss_kernel,
    gauss_kernel_sq,
    periodized_kernel,
    periodized_pn_kernel,
    pn_kernel,
    poisson_kernel,
)
from .samplers import (
    BridgeFamily,
    BridgePath,
    McmcConfig,
    RngStream,
    derivative_limit_sample,
    log_inv_gamma,
    phi2,
    phi2_trop,
    psi_k,
    sample_bridge,
    sample_horizon,
    sample_mu,
    sample_nu,
)
from .verify import (
    MomentSummary,
    TestReport,
    burke_test,
    drift_gamma,
    estimate_R,
    estimate_sigma2,
    invariance_chain_test,
    invariance_sde_test,
    jacobian_det_check,
    ks_two_sample,
    monotone_sandwich_check,
)

__version__ = "0.1.0"

__all__ = [
    "BridgeFamily",
    "BridgePath",
    "DomainError",
    "KernelParams",
    "McmcConfig",
    "MomentSummary",
    "PeriodizedValue",
    "PolymerEnvironment",
    "RngStream",
    "SdeState",
    "SlopedFamily",
    "TestReport",
    "burke_test",
    "chain_step",
    "coupled_step",
    "cyclic_shift",
    "d2",
    "d_multi",
    "d_multi_qform",
    "derivative_limit_sample",
    "dirichlet_integral",
    "dirichlet_quadrature",
    "dirichlet_report",
    "dk_stack",
    "draw_polymer_environment",
    "drift_gamma",
    "em_step_dual",
    "em_step_sbe",
    "estimate_R",
    "estimate_sigma2",
    "evolve",
    "fullline_d_periodic",
    "gauss_kernel",
    "gauss_kernel_sq",
    "invariance_chain_test",
    "invariance_sde_test",
    "j2",
    "jacobian_det_check",
    "jk_stack",
    "ks_two_sample",
    "l2",
    "log_inv_gamma",
    "logsumexp",
    "monotone_sandwich_check",
    "multiline_step",
    "periodized_kernel",
    "periodized_pn_kernel",
    "phi2",
    "phi2_trop",
    "pitman_w",
    "pitman_w_inv",
    "pn_kernel",
    "poisson_kernel",
    "psi_k",
    "reflect",
    "sample_bridge",
    "sample_horizon",
    "sample_mu",
    "sample_nu",
    "seg_sum",
    "slope",
    "t2",
    "__version__",
]
