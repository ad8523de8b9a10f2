"""Weak measurements, two-state vectors and Aharonov-Bohm interferometers."""
from .hilbert import (
    IDENTITY2,
    KET_L,
    KET_R,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SX_MINUS,
    SX_PLUS,
    SZ_MINUS,
    SZ_PLUS,
    Ket,
    LinOp,
    apply,
    inner,
    make_ket,
    matrix_exponential,
    tensor,
)
from .tsvf import TwoStateVector, make_tsv, postselect_probability, weak_value
from .pointer import (
    GaussianPointer,
    PointerCoupledState,
    ReadoutRecord,
    conditional_pointer_mean,
    couple,
    first_order_state,
    flip_probability,
    readout,
)
from .runner import ScenarioConfig, parse_config, run_scenario, survival_scaling

__version__ = "0.1.0"
