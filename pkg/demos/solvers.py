"""Three ways to get a stationary vector, and where they disagree."""

import numpy as np

from eigenmc import stationary_eigen, stationary_power, stationary_svd

# a two-state chain with a known answer: pi = (b, a) / (a + b)
a, b = 0.3, 0.1
P = np.array([[1 - a, a], [b, 1 - b]])
for solve in (stationary_eigen, stationary_power, stationary_svd):
    pi, rep = solve(P)
    print(f"{rep.method:6s} {np.round(pi.probs, 6)}  residual {rep.residual:.1e}  iterations {rep.iterations}")
print("exact ", np.array([b, a]) / (a + b))

# period 2: undamped power iteration would oscillate forever
flip = np.array([[0.0, 1.0], [1.0, 0.0]])
pi, rep = stationary_power(flip)
print("\nperiodic chain, damped power iteration:", pi.probs, "converged:", rep.converged)

# a non-normal matrix: the leading right singular vector is not stationary
P = np.array([[0.5, 0.5, 0.0], [0.1, 0.1, 0.8], [0.0, 0.2, 0.8]])
pi_e, _ = stationary_eigen(P)
pi_s, rep_s = stationary_svd(P)
print("\nnon-normal chain")
print("eigen", np.round(pi_e.probs, 5))
print("svd  ", np.round(pi_s.probs, 5), "residual", f"{rep_s.residual:.2e}", "converged:", rep_s.converged)

# two absorbing states: several stationary vectors, the report says how many
P = np.array([[1.0, 0.0, 0.0], [0.25, 0.5, 0.25], [0.0, 0.0, 1.0]])
pi, rep = stationary_eigen(P)
print("\nreducible chain:", pi.probs, "closed classes:", rep.multiplicity)
