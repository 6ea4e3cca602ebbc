"""Two-step Metropolis-Hastings on the normal toy model.

Ten standard normal observations; the parameter is (mu, sigma2).  The
posterior is prior times empirical likelihood, so its support is the set
where the EL problem is feasible.  The script compares a chain against a
brute-force grid of the same posterior.

    python3 demos/toy_posterior.py
"""
import time

import numpy as np

from bayesel.applications import normal_toy_model
from bayesel.diagnostics import ess, heidelberger_welch, summarize
from bayesel.estimating import ThetaSplit, log_posterior_unnorm
from bayesel.mcele import mcele
from bayesel.sampler import Proposal1, Proposal2, two_step_mh

x = np.random.default_rng(7).normal(0.0, 1.0, 10)
model = normal_toy_model(x)

# the MCELE of sigma2 given mu is the weighted variance under the trial weights
for mu in (-0.5, 0.0, 0.5):
    r = mcele(model, [mu])
    print(f"mu = {mu:+.1f}: MCELE sigma2 = {r.theta2_hat[0]:.4f}")

t0 = time.perf_counter()
trace = two_step_mh(model, ThetaSplit([x.mean()], [x.var()]), Proposal1([0.5]),
                    Proposal2([0.5], "truncated-normal-at-mcele", [0.0]), 40_000, seed=1,
                    burn_in=8_000)
print(f"\n40k iterations in {time.perf_counter() - t0:.1f}s, "
      f"acceptance {trace.accepted.mean():.3f}")
print(summarize(trace, 8_000).to_text())
for name, v in trace.columns().items():
    hw = heidelberger_welch(v[8_000:])
    print(f"{name}: ESS {ess(v[8_000:]):.0f}, HW stationary {hw.stationary}")

# grid posterior for comparison
mu_g = np.linspace(x.min(), x.max(), 120)
s2_g = np.linspace(1e-3, (x.max() - x.min()) ** 2, 120)
lp = np.array([[log_posterior_unnorm(model, ThetaSplit([a], [b])) for b in s2_g] for a in mu_g])
p = np.exp(lp - lp[np.isfinite(lp)].max())
p /= p.sum()
print(f"\ngrid means: mu {p.sum(1) @ mu_g:.4f}, sigma2 {p.sum(0) @ s2_g:.4f}")
print(f"feasible cells: {np.isfinite(lp).mean():.1%} of the box")
