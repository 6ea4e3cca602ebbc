"""Empirical likelihood in a few lines.

Solves the EL problem for the mean of a small sample, then shows how the
log EL falls off as the hypothesised mean moves towards the edge of the
data, where the problem becomes infeasible.

    python3 demos/el_basics.py
"""
import numpy as np

from bayesel.elcore import solve_el

x = np.array([1.2, -0.4, 0.9, 2.3, 0.1, -1.1, 0.6])
n = x.size

# at the sample mean every observation gets weight 1/n
sol = solve_el((x - x.mean())[:, None])
print(f"at the sample mean: log EL = {sol.log_el:.6f}  (-n log n = {-n * np.log(n):.6f})")
print("weights:", np.round(sol.weights, 4))

print("\n  mu      log EL   -2 log ratio")
for mu in np.linspace(x.min() - 0.2, x.max() + 0.2, 13):
    s = solve_el((x - mu)[:, None])
    if s.feasible:
        print(f"{mu:6.2f}  {s.log_el:9.4f}  {-2 * (s.log_el + n * np.log(n)):9.4f}")
    else:
        print(f"{mu:6.2f}  infeasible (outside the convex hull)")

# two constraints at once: mean and variance
mu, s2 = 0.5, 1.2
c = np.column_stack([x - mu, (x - mu) ** 2 - s2])
s = solve_el(c)
print(f"\nmean {mu}, variance {s2}: log EL {s.log_el:.4f}, multipliers {np.round(s.multipliers, 4)}")
