"""The actor's action distribution: a Gaussian squashed through tanh.

Run: python3 demos/01_squashed_gaussian.py
"""

import numpy as np

from cgar.distributions import PolicyDistribution, log_prob_squashed, sample_squashed

rng = np.random.default_rng(0)

# A 1-d policy head outputs a mean and a log standard deviation. Sampling draws
# u ~ N(mean, std) and squashes it, so every action lies inside (-1, 1).
dist = PolicyDistribution([0.5], [-0.5])
actions, presquash = sample_squashed(dist, rng.standard_normal((100_000, 1)))
print(f"sampled actions lie in [{actions.min():.4f}, {actions.max():.4f}]")

# The log density carries the tanh change-of-variables term. Evaluating it
# on a fine grid of actions and integrating should give one.
a = np.linspace(-1 + 1e-9, 1 - 1e-9, 200_001)
density = np.exp(log_prob_squashed(dist, np.arctanh(a)[:, None]))
print(f"integral of the density over (-1, 1): {np.trapezoid(density, a):.6f}")

# Compare with a histogram of the samples.
hist, edges = np.histogram(actions[:, 0], bins=8, range=(-1, 1), density=True)
mids = 0.5 * (edges[1:] + edges[:-1])
print("\n  action   histogram   bin-mean density")
for m, h, lo, hi in zip(mids, hist, edges[:-1], edges[1:]):
    sel = (a >= lo) & (a < hi)
    print(f"  {m:+.3f}   {h:9.4f}   {density[sel].mean():9.4f}")

# Deep in the tails the naive log(1 - tanh(u)^2) underflows to -inf; the
# library uses an equivalent softplus form that stays finite.
u = np.array([[25.0]])
with np.errstate(divide="ignore"):
    naive = np.log(1 - np.tanh(u) ** 2)
print(f"\nat u = 25: naive log-det {naive[0, 0]}, stable log-prob {log_prob_squashed(dist, u)[0]:.3f}")
