"""How fast does the all-transitions estimate settle on the +/-10% walk?

Runs the binomial experiment at desk scale, prints the distance to the
full-run steady state at a few path counts, and compares the steady state
with the plain terminal histogram.
"""

import numpy as np

from eigenmc import SimulationConfig, run_binomial_experiment

config = SimulationConfig(n_paths=100_000, master_seed=1)
result = run_binomial_experiment(config, replications=5)

print("n_paths   rms gap    W1      band mean +/- std (rms gap)")
band = result.bands["paper-w"]
for n in (1, 10, 100, 1000, 10_000, 100_000):
    i = int(np.searchsorted(band["n_paths"], n))
    print(f"{n:>7d}  {result.curves['paper-w'].at(n):.5f}  {result.curves['w1'].at(n):.5f}  "
          f"{band['mean'][i]:.5f} +/- {band['std'][i]:.5f}")

grid = config.grid
eigen, classic = result.distributions["eigen"].probs, result.distributions["classic"].probs
print("\nstate   terminal   steady-state")
for v, c, e in zip(grid.values, classic, eigen):
    if c > 0 or e > 1e-4:
        print(f"{v:5.2f}   {c:.4f}     {e:.4f}")

# the steady state of a walk that only goes up or down by 10% is not the
# distribution after 9 steps: it describes where the chain spends its time
print("\nruntimes (s):", {k: round(v, 3) for k, v in result.runtimes.items()})
