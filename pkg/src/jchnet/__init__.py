"""Mean-field Jaynes-Cummings-Hubbard phase diagrams on complex networks."""
from ._backend import BACKEND
from .cavity import CavityParams

__version__ = "0.1.0"
__all__ = ["BACKEND", "CavityParams", "__version__"]
