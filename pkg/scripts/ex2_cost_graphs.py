import matplotlib.pyplot as plt

from genlearn.cli.gen_data import gen_data
from genlearn.gan.gan import gan_train
from genlearn.linear_model.logistic_regression import fit_logistic
from genlearn.mixture.em import em_fit
from genlearn.utils.config import ExperimentConfig
from genlearn.variational.vae import vae_train


# datasets
separated = gen_data("separated_gaussians", {"separation": 3.0}, seed=0, n=400)
mixture = gen_data("mixture2d", {"components": 3}, seed=0, n=600)

# define variables
cfg = ExperimentConfig(seed=2, learning_rate=0.005, max_steps=300, epochs=60, batch_size=32, momentum=0.5)
titles = {0: "Logistic regression (log-likelihood, nats)", 1: "EM on a 3-component mixture (log-likelihood, nats)",
          2: "VAE (ELBO per example, nats)", 3: "GAN (value function, bits)"}

_, logreg_trace = fit_logistic(separated, cfg)
em_trace = em_fit(mixture, 3, cfg).trace
_, vae_trace = vae_train(mixture, 1, cfg, hidden=(16,))
_, gan_trace = gan_train(mixture, cfg.replace(learning_rate=0.02, max_steps=500), latent_dim=2)

traces = {0: logreg_trace, 1: em_trace, 2: vae_trace, 3: gan_trace["d_obj"].to_numpy()}
xlabels = {0: "Step", 1: "Step", 2: "Epoch", 3: "Step"}
color = ("red", "blue", "red", "blue")

# draw one graph per trainer
for i in range(len(traces)):
    plt.plot(range(len(traces[i])), traces[i], linestyle="-", color=color[i])
    plt.title(titles[i]), plt.xlabel(xlabels[i]), plt.ylabel("Objective")
    plt.show()
