import warnings
from typing import Callable, Tuple

import numpy as np

from genlearn.utils.config import ExperimentConfig
from genlearn.utils.exceptions import DivergenceError, StepSizeTooLargeError

# stop when the largest gradient component falls below this value
GRAD_TOL = 1e-8
MAX_HALVINGS = 40
MAX_NORM = 1e8


class AscentResult:

    """
    Outcome of a gradient-ascent run: the final iterate, the objective trace (one entry for the
    starting point and one per accepted step), the number of steps and why the run stopped.
    """

    def __init__(self, w: np.ndarray, trace: np.ndarray, n_steps: int, stop_reason: str, learning_rate: float):
        self.w = w
        self.trace = trace
        self.n_steps = n_steps
        self.stop_reason = stop_reason
        self.learning_rate = learning_rate


def gradient_ascent(objective: Callable[[np.ndarray], float],
                    gradient: Callable[[np.ndarray], np.ndarray],
                    w0: np.ndarray,
                    cfg: ExperimentConfig,
                    name: str = "model") -> AscentResult:
    """
    Full-batch gradient ascent w <- w + gamma grad(w). With cfg.backtracking, a step that lowers
    the objective is retried with gamma halved (at most 40 halvings) and the halved rate is kept for
    the remaining steps. The run stops when ||grad||_inf < 1e-8 ('converged'), when cfg.max_steps
    is reached ('max_steps'), or when no halving restores progress ('stalled').

    Parameters
    ----------
    objective: callable
        The function to maximise
    gradient: callable
        Its gradient
    w0: np.ndarray
        The starting point
    cfg: ExperimentConfig
        Learning rate, step budget, backtracking flag and verbosity
    name: str (default="model")
        Name used in progress messages
    """
    w = np.array(w0, dtype=float)
    lr = cfg.learning_rate
    value = objective(w)
    trace = [value]
    stop_reason = "max_steps"
    for step in range(1, cfg.max_steps + 1):
        grad = gradient(w)
        if not np.all(np.isfinite(grad)):
            raise DivergenceError(step, f"Gradient of '{name}' is not finite.")
        if np.max(np.abs(grad)) < GRAD_TOL:
            stop_reason = "converged"
            break
        candidate = w + lr * grad
        new_value = objective(candidate)
        if cfg.backtracking:
            halvings = 0
            while not new_value >= value and halvings < MAX_HALVINGS:
                lr /= 2
                halvings += 1
                candidate = w + lr * grad
                new_value = objective(candidate)
            if not new_value >= value:
                warnings.warn(f"Backtracking exhausted for '{name}' at step {step}; stopping.", Warning)
                stop_reason = "stalled"
                break
        elif np.linalg.norm(candidate) > MAX_NORM:
            raise StepSizeTooLargeError(f"Iterates of '{name}' diverged (||w|| > {MAX_NORM:g}) at step {step}.")
        if not np.isfinite(new_value):
            raise DivergenceError(step, f"Objective of '{name}' is not finite.")
        w, value = candidate, new_value
        trace.append(value)
        if cfg.verbose:
            print(f"Step {step}/{cfg.max_steps} -- {value = :.6f}")
    return AscentResult(w, np.array(trace), len(trace) - 1, stop_reason, lr)
