from .assemble import AssembledModel, DelayTap, StateIndexMap, assemble, gfc_residual, sg_residual
from ..netmodel.network import network_residual

__all__ = ["AssembledModel", "DelayTap", "StateIndexMap", "assemble", "gfc_residual", "sg_residual",
           "network_residual"]
