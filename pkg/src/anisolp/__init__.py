"""anisolp: anisotropic dyadic analysis fused with a periodic-box spectral solver."""

__version__ = "0.1.0"

from .grid import (  # noqa: F401
    Grid,
    RealField,
    SpectralField,
    forward_transform,
    from_samples,
    inverse_transform,
    physical,
    single_mode,
)
from .spectral import (  # noqa: F401
    alpha_of_r,
    apply_multiplier,
    dealiased_product,
    htheta_r_norm,
    lp_norm,
    mixed_lp_norm,
    sobolev_aniso_norm,
    sobolev_iso_norm,
    sobolev_iso_norm_vector,
    spectral_derivative,
)
from .dyadic import (  # noqa: F401
    DEFAULT_CUTOFF,
    DyadicCutoff,
    aniso_besov_norm,
    besov_norm,
    block,
    block_range,
    bony_decomposition,
    horizontal_bony_split,
    paraproduct_T,
    remainder_R,
    vertical_bony_split,
)
from .flow import (  # noqa: F401
    VelocityField,
    VorticityState,
    d3v3,
    horizontal_biot_savart,
    leray_project,
    pressure_from_velocity,
    signed_power,
    vertical_vorticity,
)
from .solver import (  # noqa: F401
    NavierStokesStepper,
    SolverConfig,
    StateSnapshot,
    TransportDiffusionStepper,
    initial_abc,
    initial_random_bandlimited,
    initial_taylor_green,
    ns_rhs,
    transport_diffusion_step,
)
from .monitor import (  # noqa: F401
    MonitorConfig,
    MonitorRecord,
    accumulate,
    bp_norm,
    directional_critical_norm,
    monitor_series,
    prop41_sides,
    prop51_sides,
)
from .lab import CASE_IDS, EnsembleSpec, InequalityCase, default_case, make_ensemble, run_case  # noqa: F401
