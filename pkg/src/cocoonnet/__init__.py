"""Community detection on multi-layer networks by modularity-tensor
reconstruction, influence ranking, and intervention simulation."""
from ._backend import BACKEND
from .metrics import Attitude, CommunityAssignment
from .netcore import ModularityTensor, MultiLayerGraph, build_modularity_tensor

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Attitude",
    "CommunityAssignment",
    "ModularityTensor",
    "MultiLayerGraph",
    "build_modularity_tensor",
]
