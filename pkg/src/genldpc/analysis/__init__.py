from .dmin import DminResult, SystematicEncoder, dmin_bound, dmin_exact, encoder_from
from .exit import (
    J,
    ExitCurve,
    J_inv,
    edge_distributions,
    exit_cnd,
    exit_threshold,
    exit_vnd,
    sigma_channel,
    tunnel_open,
)
from .structure import StructureReport, structure_report

__all__ = [
    "DminResult", "SystematicEncoder", "dmin_bound", "dmin_exact", "encoder_from",
    "J", "J_inv", "ExitCurve", "edge_distributions", "exit_cnd", "exit_threshold", "exit_vnd",
    "sigma_channel", "tunnel_open", "StructureReport", "structure_report",
]
