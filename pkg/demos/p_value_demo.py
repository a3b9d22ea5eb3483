"""
Exact two-tailed p-values for Pearson correlations
==================================================

For a correlation r over n points the two-tailed significance comes from
the exact t-test: t = r sqrt(df / (1 - r^2)) with df = n - 2, and
p = I_x(df/2, 1/2) where I is the regularized incomplete beta function at
x = df / (df + t^2).  No table lookup, no normal approximation.

The sweep below shows how the same r gains significance as the series
grows, and how quickly p collapses as |r| -> 1 for the five-pair series
used throughout this package.
"""

from repbench.stats import p_value_two_tailed

print("p as a function of r at n = 5")
for r in (0.0, 0.3, 0.591, 0.7, 0.8, 0.889, 0.95, 0.99, 0.999):
    print(f"  r={r:+.3f}  p={p_value_two_tailed(r, 5):.4f}")

print("p as a function of n at r = 0.8")
for n in (3, 4, 5, 8, 12, 20, 50):
    print(f"  n={n:3d}  p={p_value_two_tailed(0.8, n):.6f}")

print("sign does not matter, magnitude does")
print(f"  p(+0.6, 10) = {p_value_two_tailed(0.6, 10):.6f}")
print(f"  p(-0.6, 10) = {p_value_two_tailed(-0.6, 10):.6f}")
