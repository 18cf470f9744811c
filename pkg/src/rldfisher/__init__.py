"""RLD Fisher information of quantum state and channel families.

Closed-form values, semidefinite-program certificates, Cramer-Rao bounds for
sequential channel estimation, and the generalized amplitude damping case study.
"""

from .bounds import (
    CrbReport,
    SequentialProtocol,
    Verdict,
    amortized_gain,
    chain_rule_matrix_gap,
    chain_rule_slack,
    crb_channel_multi,
    crb_channel_single,
    crb_state_multi,
    heisenberg_verdict,
    sequential_fi,
)
from .families import ChannelFamilyPoint, StateFamilyPoint, push_through_channel
from .gadc import GadcParams, figure2_sweep, gadc_family, gadc_rld_value
from .rld import (
    rld_matrix_state,
    rld_value_channel,
    rld_value_channel_single,
    rld_value_state,
)
from .sld import helstrom_value, optimize_probe, sld_matrix

__version__ = "0.1.0"

__all__ = [
    "ChannelFamilyPoint",
    "CrbReport",
    "GadcParams",
    "SequentialProtocol",
    "StateFamilyPoint",
    "Verdict",
    "amortized_gain",
    "chain_rule_matrix_gap",
    "chain_rule_slack",
    "crb_channel_multi",
    "crb_channel_single",
    "crb_state_multi",
    "figure2_sweep",
    "gadc_family",
    "gadc_rld_value",
    "heisenberg_verdict",
    "helstrom_value",
    "optimize_probe",
    "push_through_channel",
    "rld_matrix_state",
    "rld_value_channel",
    "rld_value_channel_single",
    "rld_value_state",
    "sequential_fi",
    "sld_matrix",
]
