"""Eigenpairs of the model operator and the growth of its eigenvalues.

Run from the repository root:  python3 demos/spectrum_and_weyl.py
Writes spectrum.svg to the current directory.
"""
from pathlib import Path

import numpy as np

from sglab.grid import Grid, OperatorSpec, assemble_operator
from sglab.io import Axes, emit_svg
from sglab.spectral import certified_window, default_decomposition, eigendecompose, weyl_fit

# the 3x3 operator can be checked by hand: eigenvalues 2, 6, 7
tiny = eigendecompose(assemble_operator(Grid(1.0, 3), OperatorSpec(2, 2)))
print("L=1, N=3 eigenvalues:", tiny.eigenvalues)

# default grid: low modes are fine, but the box is too small for many of them
eig = default_decomposition()
print(f"L=12, N=801: {len(eig)} pairs, {eig.trusted_count} trusted, lambda_1 = {eig.eigenvalues[0]:.6f}")

# a wider, finer pair of grids certifies enough modes for a slope fit
spec = OperatorSpec(2, 2)
ref = eigendecompose(assemble_operator(Grid(72.0, 28801), spec), count=300)
chk = eigendecompose(assemble_operator(Grid(96.0, 48001), spec), count=300)
window = certified_window(ref, chk)
fit = weyl_fit(ref, spec, (20, 150), trusted_count=window)
print(f"certified window j <= {window}")
print(f"slope vs log j          {fit.slope_plain:.3f}")
print(f"slope vs log(j / log j) {fit.slope_logcorrected:.3f}   (expected 2)")

j = np.arange(1, window + 1, dtype=float)
emit_svg([("lambda_j", j, ref.eigenvalues[:window])],
         Axes("j", "lambda_j", True, True, "eigenvalue growth"), Path("spectrum.svg"))
print("wrote spectrum.svg")
