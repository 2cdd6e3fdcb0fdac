"""How far alpha * lambda_j stays from the integers, for lambda_j = j.

Rational alpha hits integers exactly, the golden ratio stays away at rate
1/j, and the Liouville constant comes closer than any power of j.
"""
from fractions import Fraction

from sglab.diophantine import (GOLDEN, ModelSequence, check_condition_A, check_condition_B,
                               construct_failing_subsequence, liouville_number)

seq = ModelSequence.power()

half = Fraction(1, 2)
print("alpha = 1/2")
print("  A:", check_condition_A(half, seq, 1000, (1.0,)).verdict)
print("  B:", check_condition_B(half, seq, 1000, (1.0,)).verdict)

gold = check_condition_B(GOLDEN, seq, 100_000, (0.5, 1.0), j_min=10)
print("golden ratio, 10 <= j <= 1e5")
for eps in (0.5, 1.0):
    print(f"  C({eps}) = {gold.constant(eps):.5f}")
print(f"  compare 1/sqrt(5) = {5 ** -0.5:.5f}")

alpha = liouville_number(3)
print("Liouville constant, depth 3:", alpha.describe())
for e in construct_failing_subsequence(alpha, 3).entries:
    print(f"  k={e.k}  j={e.j:.0e}  tau={e.tau}  gap <= {float(e.gap_high):.3e}  < j^-k = {float(e.j) ** -e.k:.3e}")
