"""Numerical laboratory for the heterogeneous Allen-Cahn equation with
moving wells and its sharp-interface limit, weighted mean curvature flow.

Submodules:
  wells       heterogeneous double wells, surface tension, profiles
  grid        cell-centered Neumann grids, operators, level sets
  flow        semi-implicit / minimizing-movements time integration
  variations  first variations, equipartition, recovery sequences
  sharp       exact radial/1-d flows and BV-solution residuals
  calib       gradient-flow calibrations and relative-energy stability
  experiments named desk-scale experiments behind the CLI
"""

__version__ = "0.1.0"

from . import (calib, experiments, flow, grid, sharp, testfields,  # noqa: F401
               variations, wells)
