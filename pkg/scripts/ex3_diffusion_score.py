import matplotlib.pyplot as plt
import numpy as np

from genlearn.cli.gen_data import gen_data
from genlearn.diffusion.denoiser import LinearDenoiser
from genlearn.diffusion.elbo_gap import tractable_elbo_gap
from genlearn.diffusion.schedule import make_schedule
from genlearn.diffusion.training import diffusion_sample, diffusion_train
from genlearn.numcore.rng import Rng
from genlearn.score.density import MixtureDensity
from genlearn.score.dsm import dsm_train
from genlearn.score.fisher import fisher_divergence, standard_normal
from genlearn.score.tweedie import posterior_mean_quadrature, tweedie_estimate
from genlearn.utils.config import ExperimentConfig


# -- EXERCISE 3.1: a diffusion model on a 2-D mixture

data = gen_data("mixture2d", {"components": 4, "separation": 6.0}, seed=0, n=1000)
schedule = make_schedule(50, (1e-4, 0.2))
cfg = ExperimentConfig(seed=1, learning_rate=0.01, max_steps=3000, batch_size=64, momentum=0.9, verbose=True)
net, trace = diffusion_train(data, schedule, cfg, hidden=(64, 64))
samples = diffusion_sample(net, schedule, Rng(seed=2, purpose="ex3"), 1000)

plt.scatter(data.X[:, 0], data.X[:, 1], s=4, color="blue", label="data")
plt.scatter(samples[:, 0], samples[:, 1], s=4, color="red", label="samples")
plt.title("Diffusion samples"), plt.legend()
plt.show()


# -- EXERCISE 3.2: the ELBO of a tractable linear denoiser

report = tractable_elbo_gap(LinearDenoiser.matched(schedule, mean=1.0, var=0.5), schedule, 0.3)
print(f"\n{report}")


# -- EXERCISE 3.3: Fisher divergence, Tweedie denoising and score matching in 1-D

prior = MixtureDensity([0.5, 0.5], [[-2.0], [2.0]], [0.25, 0.25])
print(f"\nFisher(prior || N(0,1)) = {fisher_divergence(prior, standard_normal()):.6f} nats")
sigma2 = 0.5
noisy = prior.smoothed(sigma2)
for y in (-3.0, -1.0, 0.0, 1.0, 3.0):
    print(f"y = {y:+.1f}: tweedie = {tweedie_estimate(noisy, y, sigma2)[0]:+.6f}, "
          f"bayes = {posterior_mean_quadrature(prior, y, sigma2):+.6f}")

X = np.concatenate([Rng(seed=3, purpose="ex3/prior").normal(500) * 0.5 - 2,
                    Rng(seed=4, purpose="ex3/prior").normal(500) * 0.5 + 2])
model, score_trace = dsm_train(X, sigma2, cfg.replace(max_steps=4000, verbose=False), hidden=(32,))
grid = np.linspace(-4, 4, 200)
plt.plot(grid, model(grid)[:, 0], color="red", label="learned")
plt.plot(grid, noisy.score(grid)[:, 0], color="blue", label="exact")
plt.title("Score of the noisy mixture"), plt.xlabel("y"), plt.legend()
plt.show()
