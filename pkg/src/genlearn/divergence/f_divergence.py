"""
The f-divergence family D_f(p||q) = SUM_x q(x) f(p(x)/q(x)) over finite pmfs, with the boundary
conventions 0 f(0/0) = 0, f(0) = lim_{t->0} f(t) and 0 f(a/0) = a lim_{u->inf} f(u)/u.
"""
from typing import Callable, Optional

import numpy as np

from genlearn.divergence.pmf import Pmf, check_alphabets
from genlearn.utils.exceptions import InvalidArgumentError, InvalidSpecError

# grid on which convexity and normalization of a generator are spot-checked
CHECK_GRID = np.logspace(-3, 3, 61)
CHECK_TOL = 1e-12


class FDivSpec:

    """
    A convex generator f: (0, inf) -> R with f(1) = 0, together with its two boundary limits.
    """

    def __init__(self,
                 name: str,
                 generator: Callable[[np.ndarray], np.ndarray],
                 f_zero: float,
                 slope_at_infinity: float,
                 param: Optional[float] = None):
        """
        A convex generator with its boundary limits.

        Parameters
        ----------
        name: str
            The name of the divergence
        generator: callable
            Vectorised f, evaluated on t > 0 only
        f_zero: float
            lim_{t->0} f(t) (may be np.inf)
        slope_at_infinity: float
            lim_{u->inf} f(u)/u (may be np.inf); the contribution of a point with q = 0 < p is
            p times this value
        param: float (default=None)
            The parameter of parametric families (gamma, alpha)
        """
        self.name = name
        self.generator = generator
        self.f_zero = float(f_zero)
        self.slope_at_infinity = float(slope_at_infinity)
        self.param = param
        self._valid = None

    def validate(self) -> None:
        """
        Spot-checks that f(1) = 0 and that f is midpoint-convex on a log-spaced grid of (0, inf).
        Raises InvalidSpecError otherwise. The outcome is cached.
        """
        if self._valid is None:
            self._valid = self._check()
        if not self._valid:
            raise InvalidSpecError(f"The generator of '{self.name}' is not a valid f-divergence generator.")

    def _check(self) -> bool:
        with np.errstate(all="ignore"):
            f_one = float(np.asarray(self.generator(np.array([1.0])))[0])
            if not abs(f_one) <= CHECK_TOL:
                return False
            a, b = np.meshgrid(CHECK_GRID, CHECK_GRID)
            fa, fb = self.generator(a), self.generator(b)
            fm = self.generator((a + b) / 2)
        if not (np.all(np.isfinite(fa)) and np.all(np.isfinite(fm))):
            return False
        slack = CHECK_TOL * np.maximum(1.0, np.abs(fa) + np.abs(fb))
        return bool(np.all(fm <= (fa + fb) / 2 + slack))

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.generator(t)

    def __repr__(self) -> str:
        return self.name if self.param is None else f"{self.name}({self.param:g})"


# -- NAMED GENERATORS

def kl() -> FDivSpec:
    """
    Relative entropy, f(t) = t log2 t (bits).
    """
    return FDivSpec("kl", lambda t: t * np.log2(t), 0.0, np.inf)


def reverse_kl() -> FDivSpec:
    """
    Reverse relative entropy D(q||p), f(t) = -log2 t (bits).
    """
    return FDivSpec("reverse_kl", lambda t: -np.log2(t), np.inf, 0.0)


def tv() -> FDivSpec:
    """
    Total variation distance, f(t) = |t - 1| / 2.
    """
    return FDivSpec("tv", lambda t: 0.5 * np.abs(t - 1), 0.5, 0.5)


def hockey_stick(gamma: float) -> FDivSpec:
    """
    Hockey-stick divergence E_gamma, f(t) = [t - gamma]_+ with gamma >= 1.
    """
    if gamma < 1:
        raise InvalidSpecError("The value of 'gamma' must be at least 1 (f(1) = 0 requires it).")
    return FDivSpec("hockey_stick", lambda t: np.maximum(t - gamma, 0.0), 0.0, 1.0, param=gamma)


def chi_sq() -> FDivSpec:
    """
    Chi-squared divergence, f(t) = (t - 1)^2.
    """
    return FDivSpec("chi_sq", lambda t: (t - 1) ** 2, 1.0, np.inf)


def js() -> FDivSpec:
    """
    Jensen-Shannon divergence without the 1/2 prefactor, f(t) = t log2(2t/(t+1)) + log2(2/(t+1)).
    """
    return FDivSpec("js", lambda t: t * np.log2(2 * t / (t + 1)) + np.log2(2 / (t + 1)), 1.0, 1.0)


def hellinger_sq() -> FDivSpec:
    """
    Squared Hellinger distance, f(t) = (sqrt(t) - 1)^2 / 2.
    """
    return FDivSpec("hellinger_sq", lambda t: 0.5 * (np.sqrt(t) - 1) ** 2, 0.5, 0.5)


def renyi_gen(alpha: float) -> FDivSpec:
    """
    Generator f_alpha(t) = (t^alpha - 1) / (alpha - 1) of the Renyi divergence of order alpha.
    """
    if alpha <= 0 or alpha == 1:
        raise InvalidArgumentError("The value of 'alpha' must be positive and different from 1.")
    slope = 0.0 if alpha < 1 else np.inf
    return FDivSpec("renyi_gen", lambda t: (t ** alpha - 1) / (alpha - 1), 1 / (1 - alpha), slope, param=alpha)


# named specs that take no parameter, by name
NAMED = {"kl": kl, "reverse_kl": reverse_kl, "tv": tv, "chi_sq": chi_sq, "js": js,
         "hellinger_sq": hellinger_sq}
# parametric families, by name
PARAMETRIC = {"hockey_stick": hockey_stick, "renyi_gen": renyi_gen}


def named_spec(name: str, param: Optional[float] = None) -> FDivSpec:
    """
    Looks up a named generator. Parametric families ('hockey_stick', 'renyi_gen') need 'param'.

    Parameters
    ----------
    name: str
        The name of the divergence
    param: float (default=None)
        gamma (hockey_stick) or alpha (renyi_gen)
    """
    if name in NAMED:
        return NAMED[name]()
    if name in PARAMETRIC:
        if param is None:
            raise InvalidArgumentError(f"The divergence '{name}' needs a parameter.")
        return PARAMETRIC[name](param)
    poss = list(NAMED) + list(PARAMETRIC)
    raise InvalidArgumentError(f"The value of 'name' must be in {{{', '.join(poss)}}}.")


def f_divergence(p: Pmf, q: Pmf, spec: FDivSpec) -> float:
    """
    Computes D_f(p||q) under the boundary conventions of the f-divergence definition. Returns
    np.inf when a boundary limit is infinite and its point carries positive mass.

    Parameters
    ----------
    p: Pmf
        The first pmf
    q: Pmf
        The second (reference) pmf
    spec: FDivSpec
        The generator
    """
    check_alphabets(p, q)
    spec.validate()
    pp, qq = p.probs, q.probs
    both = (pp > 0) & (qq > 0)
    only_q = (pp == 0) & (qq > 0)
    only_p = (pp > 0) & (qq == 0)
    total = float(np.sum(qq[both] * spec(pp[both] / qq[both])))
    # 0 * inf never happens: the masks only select points with positive mass
    if np.any(only_q):
        total += float(np.sum(qq[only_q])) * spec.f_zero
    if np.any(only_p):
        total += float(np.sum(pp[only_p])) * spec.slope_at_infinity
    return total
