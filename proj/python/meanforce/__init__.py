"""Equilibrium mean-force states of the theta-angled spin-boson model."""

from ._meanforce import (  # noqa: F401
    ConfigError,
    ConvergenceError,
    SpinExpectation,
    ModelParams,
    BoundaryResult,
    __version__,
    model,
    cgibbs,
    qgibbs,
    cmf,
    cmf_wk,
    cmf_us,
    cmf_density,
    qmf_wk,
    qmf_rc,
    qmf_us,
    rc_state,
    cdyn,
    bath_a,
    find_boundary,
    classify,
    correspondence,
    regime_atlas,
    beta_from_t_half,
    beta_from_t_spin,
)

METHODS = {
    "cgibbs": cgibbs,
    "qgibbs": qgibbs,
    "cmf": cmf,
    "cmf-wk": cmf_wk,
    "cmf-us": cmf_us,
    "qmf-wk": qmf_wk,
    "qmf-rc": qmf_rc,
    "qmf-us": qmf_us,
    "cdyn": cdyn,
}


def evaluate(method, params, **kwargs):
    """Spin expectations of `params` by one of the METHODS names."""
    try:
        fn = METHODS[method]
    except KeyError:
        raise ConfigError(f"unknown method '{method}'") from None
    return fn(params, **kwargs)
