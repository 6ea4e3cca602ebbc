"""Hierarchical growth curves for 30 rats.

Each rat has its own intercept and slope; the within-rat errors are only
assumed to have mean zero, common variance and no correlation with time,
which is what the empirical likelihood encodes.  Population parameters get
conjugate Gibbs updates.  A short run is enough to see the posterior
settle; pass a larger length for a closer match to long-run values.

    python3 demos/rat_growth.py [length]
"""
import sys
import time

from bayesel.applications import rat_table, run_rat_chain
from bayesel.diagnostics import acceptance_report, ess, heidelberger_welch, summarize

length = int(sys.argv[1]) if len(sys.argv) > 1 else 15_000
burn = length // 3

t0 = time.perf_counter()
trace = run_rat_chain(length, 20240501, burn_in=burn)
print(f"{length} iterations in {time.perf_counter() - t0:.1f}s")

tab = rat_table(trace, burn)
print(summarize(tab).to_text())
for name, v in tab.items():
    hw = heidelberger_welch(v)
    print(f"{name}: ESS {ess(v):.0f}, stationary {hw.stationary}, "
          f"half-width ok {hw.halfwidth_ok}")
for block, rate in acceptance_report(trace)["by_move_type"].items():
    print(f"acceptance, {block}: {rate:.3f}")
