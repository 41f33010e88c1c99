"""Floquet analysis of N-vortex relative equilibria continued into bounded domains.

The main entry points are re-exported here; see the submodules for details.
"""

from .bifurcation import MatrixFamily, counterexample_suite, fit_expansion, predict_and_match
from .continuation import continue_family, multiplier_curve, reduced_monodromy, trace_curve
from .core import ScaledHamiltonian, Vorticities
from .domains import ConformalImage, SyntheticQuadratic, Translated, UnitDisc, WholePlane
from .dynamics import flow, variational_flow
from .equilibria import (RelativeEquilibrium, make_equilateral_triangle, make_gamma_zero_rotor, make_rhombus,
                         make_vortex_pair)
from .errors import VortexError
from .floquet import equilibrium_spectrum, monodromy, spectrum
from .robin import find_critical_points

__version__ = "0.1.0"

__all__ = [
    "ConformalImage", "MatrixFamily", "RelativeEquilibrium", "ScaledHamiltonian", "SyntheticQuadratic",
    "Translated", "UnitDisc", "VortexError", "Vorticities", "WholePlane", "continue_family",
    "counterexample_suite", "equilibrium_spectrum", "find_critical_points", "fit_expansion", "flow",
    "make_equilateral_triangle", "make_gamma_zero_rotor", "make_rhombus", "make_vortex_pair", "monodromy",
    "multiplier_curve", "predict_and_match", "reduced_monodromy", "spectrum", "trace_curve", "variational_flow",
]
