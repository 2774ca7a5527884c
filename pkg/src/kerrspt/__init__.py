"""Phase diagrams, spectra and mean-field dynamics of a qubit-cavity system
coupled to a Kerr magnon mode."""

__version__ = "0.1.0"

from .params import SystemParams, MaterialParams, derive, enforce_constraint, from_ratios  # noqa: E402
from .criticality import CriticalityInput, PhaseLabel  # noqa: E402

__all__ = ["SystemParams", "MaterialParams", "derive", "enforce_constraint", "from_ratios",
           "CriticalityInput", "PhaseLabel", "__version__"]
