"""Quaternion arithmetic, GHR calculus and quaternion feed-forward networks."""

from .quaternion import Quaternion, SingularQuaternionError
from .network import ActivationKind, DenseLayer, Network, backward, forward, gradient_check, predict

__all__ = [
    "Quaternion", "SingularQuaternionError", "ActivationKind", "DenseLayer", "Network",
    "forward", "backward", "predict", "gradient_check",
]
__version__ = "0.1.0"
