"""Price a call from a small diffusion ensemble, two ways.

300 paths of 30 steps from 100, strike 110.  The terminal histogram uses one
observation per path; the steady state of the intertemporal chain uses all
9000 transitions.  Thirty replications show how much each estimate moves.
"""

from eigenmc import SimulationConfig, run_diffusion_experiment

config = SimulationConfig.diffusion_default()
result = run_diffusion_experiment(config, replications=30)

print(f"call price, terminal histogram : {result.prices['classic']:.4f}")
print(f"call price, steady state       : {result.prices['eigen']:.4f}")
print(f"mean over 30 replications      : {result.prices['classic_mean']:.4f} vs {result.prices['eigen_mean']:.4f}")

ve, vc = result.variance["eigen"], result.variance["classic"]
print(f"\ntotal variance across replications: steady state {ve.total_variance:.5f}, "
      f"terminal {vc.total_variance:.5f}, ratio {result.variance_ratio():.1f}")

# with a positive drift the chain keeps climbing, so its long-run mass
# collects in the clamped top state instead of near the 30-step horizon
top = config.grid.values[-1]
print(f"steady-state mass at the top state {top:.0f}: {result.distributions['eigen'].probs[-1]:.3f}")

if result.nonconverged:
    print("replications without a stationary vector:", result.nonconverged)
