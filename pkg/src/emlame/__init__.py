"""Bound states of an effective-mass Hamiltonian solved through the
one-period associated Lame equation, with an independent shooting check."""
from .model import DerivedConstants, ModelParams, derive
from .spectrum import BoundState, find_bound_states
from .wavefunc import WaveFunction, assemble

__all__ = ["ModelParams", "DerivedConstants", "derive", "BoundState", "find_bound_states",
           "WaveFunction", "assemble"]
__version__ = "0.1.0"
