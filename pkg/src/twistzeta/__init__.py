"""Spectral-triple combinatorics for Cuntz-Krieger boundaries.

The package is organized in layers.  ``words`` holds admissible-word
combinatorics and the free-group boundary, ``ckalg`` the symbolic
Cuntz-Krieger algebra, ``operators`` dense truncated-operator utilities,
``traces`` the closed-form and brute-force heat and Toeplitz traces with
their pole data, ``circle`` and ``higher_order`` the circle-based models,
``damp`` the logarithmic dampening toolkit, and ``cochain`` the residue
cochains used by the counterexample verdict.  ``cli`` exposes the command
line entry point.
"""

from __future__ import annotations

__all__ = ["__version__"]

__version__ = "0.1.0"
