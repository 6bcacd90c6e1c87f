import numpy as np

from genlearn.divergence.f_divergence import NAMED, f_divergence, named_spec
from genlearn.divergence.measures import data_processed, js_divergence, renyi_divergence
from genlearn.divergence.pmf import Channel, Pmf
from genlearn.gan.optimal import optimal_discriminator_check
from genlearn.numcore.rng import Rng


# -- EXERCISE 1.1: the named f-divergences on one pair (bits)

p, q = Pmf([0.5, 0.5]), Pmf([0.25, 0.75])
for name in sorted(NAMED):
    print(f"{name:>13}: {f_divergence(p, q, named_spec(name)):.6f}")
print(f"{'hockey_stick':>13}: {f_divergence(p, q, named_spec('hockey_stick', 1.5)):.6f} (gamma=1.5)")
print(f"{'renyi_gen':>13}: {f_divergence(p, q, named_spec('renyi_gen', 2.0)):.6f} (alpha=2)")
print(f"{'renyi':>13}: {renyi_divergence(p, q, 2.0):.6f} (alpha=2)")


# -- EXERCISE 1.2: data processing shrinks every divergence

rng = Rng(seed=1, purpose="ex1")
p, q = Pmf.random(rng, 6), Pmf.random(rng, 6)
ch = Channel.random(rng, 6, 3)
p_out, q_out = data_processed(p, q, ch)
print("\nbefore / after a random 6x3 channel")
for name in sorted(NAMED):
    spec = named_spec(name)
    print(f"{name:>13}: {f_divergence(p, q, spec):.6f} / {f_divergence(p_out, q_out, spec):.6f}")


# -- EXERCISE 1.3: the optimal discriminator of the logarithmic game

report = optimal_discriminator_check(p, q)
print(f"\nd* = {np.round(report.d_star, 4)}")
print(f"value = {report.value:.6f} bits, JS - 2 = {js_divergence(p, q) - 2:.6f} bits")
print(f"grid search value = {report.search_value:.6f} bits, stationarity residual = {report.stationarity:.2e}")
