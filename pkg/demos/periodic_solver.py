"""Solve D_t u + omega lambda_j u = f_j on the circle, mode by mode.

Compares Fourier division with the two integral forms, then shows that a
resonant mode needs an admissible forcing.
"""
import numpy as np

from sglab.classify import decay_classify
from sglab.diophantine import ModelSequence
from sglab.errors import AdmissibilityError
from sglab.evolution import CoefficientField, EvolutionProblem, TimeGrid, solve

rng = np.random.default_rng(1)
grid, J = TimeGrid(64), 30
seq = ModelSequence.power()
lam = seq.values(1, J)
k = grid.freqs

coef = rng.standard_normal((J, grid.T)) + 1j * rng.standard_normal((J, grid.T))
spec = np.where(np.abs(k) <= 16, coef * np.exp(-np.abs(k) / 2), 0) * lam[:, None] ** -6.0
f = CoefficientField.from_spectrum(spec, grid)

problem = EvolutionProblem(-1j, seq, f)
sols = {m: solve(problem, m)[0].values for m in ("fourier", "quadrature-1", "quadrature-2")}
print("max |fourier - quadrature-1| =", np.max(np.abs(sols["fourier"] - sols["quadrature-1"])))
print("max |fourier - quadrature-2| =", np.max(np.abs(sols["fourier"] - sols["quadrature-2"])))

u, report = solve(problem)
verdict = decay_classify(u, seq)
print("omega = -i:", verdict.verdict, [round(r.slope, 2) for r in verdict.rows])
print("small divisor range", report.theta_range)

# omega = 1: every mode is resonant at k = -j
try:
    solve(EvolutionProblem(1.0, seq, f))
except AdmissibilityError as exc:
    print("omega = 1, raw forcing:", exc)
for j in range(1, J + 1):
    spec[j - 1, grid.index(-j)] = 0
u, report = solve(EvolutionProblem(1.0, seq, CoefficientField.from_spectrum(spec, grid)))
print("omega = 1, resonant coefficients removed:", len(report.resonant), "resonant modes solved,",
      "max residual", f"{report.residuals.max():.2e}")
