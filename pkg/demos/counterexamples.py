"""The two Liouville counterexamples, checked with exact arithmetic.

Frequencies like 10^24 do not fit on a time grid, so the modes stay
symbolic and only their logarithms are used for decay fits.
"""
from sglab.counterexamples import counterexample_hypoellipticity, counterexample_solvability
from sglab.diophantine import construct_failing_subsequence, liouville_number

alpha = liouville_number(3)

hypo = counterexample_hypoellipticity(construct_failing_subsequence(alpha, 3), alpha)
print("hypoellipticity")
print("  Lu = f exactly on every mode:", hypo.exact)
print("  |u_j| - 1 on the sample grid:", hypo.unit_modulus_defect)
print("  f:", hypo.f_report.verdict, " u:", hypo.u_report.verdict)

solv = counterexample_solvability(alpha)
print("solvability")
print("  witness levels:", [w.level for w in solv.schedule])
print("  f:", solv.f_report.verdict, [round(r.slope, 2) for r in solv.f_report.rows], " admissible:", solv.admissible)
print("  candidate u:", solv.u_growth.verdict)
for M in range(6):
    tail = solv.values(M)[2 * M:]
    print(f"  M={M}: pairing grows for l > {2 * M}: {solv.increasing[M]}  (last log value {tail[-1]:.3e})")
