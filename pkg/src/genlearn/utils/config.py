import os
from typing import Optional, Union

from genlearn.utils.exceptions import InvalidArgumentError

# environment variable that overrides the output directory of every run
OUT_DIR_ENV = "GENLEARN_OUT"

MAX_SEED = 2 ** 64


class ExperimentConfig:

    """
    Holds the knobs shared by every trainer: the seed (the root of all randomness), the learning
    rate, step/epoch counts, the minibatch size and the number of Monte-Carlo samples. A config
    snapshot is stored in every run manifest.
    """

    def __init__(self,
                 seed: int,
                 learning_rate: Union[int, float] = 0.01,
                 max_steps: int = 1000,
                 epochs: int = 100,
                 batch_size: int = 32,
                 mc_samples: int = 1,
                 momentum: float = 0.0,
                 generator_learning_rate: Optional[float] = None,
                 backtracking: bool = True,
                 verbose: bool = False,
                 out_dir: str = "runs"):
        """
        Holds the knobs shared by every trainer.

        Parameters
        ----------
        seed: int
            Seed of the random number generator (mandatory, no wall-clock default)
        learning_rate: int, float (default=0.01)
            The learning rate (gamma); zero is accepted so that null updates can be checked
        max_steps: int (default=1000)
            The maximum number of optimisation steps (step-based trainers)
        epochs: int (default=100)
            The number of passes over the data (epoch-based trainers)
        batch_size: int (default=32)
            The minibatch size
        mc_samples: int (default=1)
            The number of Monte-Carlo samples per data point (VAE)
        momentum: float (default=0.0)
            Heavy-ball coefficient of the SGD updates
        generator_learning_rate: float (default=None)
            Learning rate of the GAN generator (None -> learning_rate)
        backtracking: bool (default=True)
            Whether full-batch ascent/descent halves the step on a worsening objective
        verbose: bool (default=False)
            Whether to print the value of the objective at each epoch
        out_dir: str (default="runs")
            Directory where the CLI writes models, metrics and manifests (GENLEARN_OUT overrides it)
        """
        # check values of parameters
        self._check_init(seed, learning_rate, max_steps, epochs, batch_size, mc_samples, momentum,
                         generator_learning_rate)
        # parameters
        self.seed = int(seed)
        self.learning_rate = float(learning_rate)
        self.max_steps = int(max_steps)
        self.epochs = int(epochs)
        self.batch_size = int(batch_size)
        self.mc_samples = int(mc_samples)
        self.momentum = float(momentum)
        self.generator_learning_rate = None if generator_learning_rate is None else float(generator_learning_rate)
        self.backtracking = bool(backtracking)
        self.verbose = bool(verbose)
        self.out_dir = os.environ.get(OUT_DIR_ENV, out_dir)

    @staticmethod
    def _check_init(seed, learning_rate, max_steps, epochs, batch_size, mc_samples, momentum,
                    generator_learning_rate):
        """
        Checks the values of the numeric parameters.
        """
        if seed is None or int(seed) != seed or not 0 <= seed < MAX_SEED:
            raise InvalidArgumentError("The value of 'seed' must be an integer in [0, 2**64).")
        if learning_rate < 0:
            raise InvalidArgumentError("The value of 'learning_rate' must be non-negative.")
        if generator_learning_rate is not None and generator_learning_rate < 0:
            raise InvalidArgumentError("The value of 'generator_learning_rate' must be non-negative.")
        if max_steps < 1:
            raise InvalidArgumentError("The value of 'max_steps' must be a positive integer.")
        if epochs < 1:
            raise InvalidArgumentError("The value of 'epochs' must be a positive integer.")
        if batch_size < 1:
            raise InvalidArgumentError("The value of 'batch_size' must be a positive integer.")
        if mc_samples < 1:
            raise InvalidArgumentError("The value of 'mc_samples' must be a positive integer.")
        if not 0 <= momentum < 1:
            raise InvalidArgumentError("The value of 'momentum' must be in [0,1).")

    @property
    def generator_lr(self) -> float:
        """
        Learning rate of the GAN generator (defaults to the shared learning rate).
        """
        if self.generator_learning_rate is None:
            return self.learning_rate
        return self.generator_learning_rate

    def replace(self, **changes) -> "ExperimentConfig":
        """
        Returns a copy of the config with some fields replaced.
        """
        values = self.to_dict()
        values.update(changes)
        return ExperimentConfig.from_dict(values)

    def to_dict(self) -> dict:
        """
        Returns the JSON-serialisable snapshot of the config.
        """
        return {"seed": self.seed,
                "learning_rate": self.learning_rate,
                "max_steps": self.max_steps,
                "epochs": self.epochs,
                "batch_size": self.batch_size,
                "mc_samples": self.mc_samples,
                "momentum": self.momentum,
                "generator_learning_rate": self.generator_learning_rate,
                "backtracking": self.backtracking,
                "verbose": self.verbose,
                "out_dir": self.out_dir}

    @classmethod
    def from_dict(cls, values: dict) -> "ExperimentConfig":
        """
        Builds a config from a snapshot produced by 'to_dict' (unknown keys are rejected).

        Parameters
        ----------
        values: dict
            The config snapshot
        """
        known = {"seed", "learning_rate", "max_steps", "epochs", "batch_size", "mc_samples",
                 "momentum", "generator_learning_rate", "backtracking", "verbose", "out_dir"}
        unknown = set(values) - known
        if unknown:
            raise InvalidArgumentError(f"Unknown config field(s): {', '.join(sorted(unknown))}.")
        if "seed" not in values:
            raise InvalidArgumentError("The config must define a 'seed'.")
        return cls(**values)

    def __repr__(self) -> str:
        fields = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items())
        return f"ExperimentConfig({fields})"
