"""Discrete-time branching processes with pairwise cooperation.

Given a current generation of size k, the next size is the sum of k i.i.d.
offspring draws plus one cooperation draw for each of the C(k,2) unordered
pairs.  Zero is absorbing.  The Poisson family ``poisson_dbpc(a)`` has
offspring mean a^2/2 and cooperation mean a^2; its survival probability is
the quantity the epidemic invasion probabilities are compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExplosionError, InvalidArgumentError

PAIR_LIMIT = 10**7  # beyond this many cooperation terms, explicit sampling is pointless

TAIL_AT_CUTOFF_PLUS_ONE = "cutoff_plus_one"
TAIL_AT_ZERO = "zero"

_SURVIVAL_BATCH = 1 << 20


@dataclass(frozen=True)
class PoissonLaw:
    """Poisson offspring/cooperation law."""

    lam: float

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise InvalidArgumentError(f"Poisson rate must be nonnegative, got {self.lam}")

    @property
    def mean(self) -> float:
        return self.lam

    @property
    def variance(self) -> float:
        return self.lam

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.poisson(self.lam, size)


class TableLaw:
    """Finite law on {0..K} given by probability weights."""

    def __init__(self, weights) -> None:
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise InvalidArgumentError("weights must be a nonempty 1-d sequence")
        if np.any(w < 0):
            raise InvalidArgumentError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InvalidArgumentError(f"weights must sum to 1, got {w.sum()!r}")
        self.weights = w
        self._cdf = np.cumsum(w)
        self._support = np.arange(w.size)

    @property
    def mean(self) -> float:
        return float(self._support @ self.weights)

    @property
    def variance(self) -> float:
        m = self.mean
        return float((self._support.astype(float) - m) ** 2 @ self.weights)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        return np.minimum(
            np.searchsorted(self._cdf, u, side="right"), self.weights.size - 1
        ).astype(np.int64)

    def __repr__(self) -> str:
        return f"TableLaw({np.array2string(self.weights, precision=6)})"


OffspringLaw = PoissonLaw | TableLaw


@dataclass(frozen=True)
class DbpcParams:
    offspring: OffspringLaw
    cooperation: OffspringLaw


@dataclass(frozen=True)
class DbpcState:
    generation: int
    current: int
    cumulative: int


def initial_state(z0: int) -> DbpcState:
    if z0 < 0:
        raise InvalidArgumentError(f"initial size must be nonnegative, got {z0}")
    return DbpcState(generation=0, current=z0, cumulative=z0)


def poisson_dbpc(a: float) -> DbpcParams:
    """The Poisson family: offspring Poisson(a^2/2), cooperation Poisson(a^2)."""
    if not a > 0:
        raise InvalidArgumentError(f"a must be positive, got {a}")
    return DbpcParams(offspring=PoissonLaw(a * a / 2.0), cooperation=PoissonLaw(a * a))


def conditional_mean(params: DbpcParams, k: int) -> float:
    """E[next size | current size k] = k*mu_o + C(k,2)*mu_c."""
    return k * params.offspring.mean + k * (k - 1) / 2.0 * params.cooperation.mean


def conditional_variance(params: DbpcParams, k: int) -> float:
    """Var[next size | current size k] = k*nu_o + C(k,2)*nu_c."""
    return k * params.offspring.variance + k * (k - 1) / 2.0 * params.cooperation.variance


def dbpc_step(
    state: DbpcState,
    params: DbpcParams,
    rng: np.random.Generator,
    method: str = "auto",
) -> DbpcState:
    """Advance one generation.

    ``method``: "auto" uses the closed form (a single Poisson draw, by closure
    under convolution) when both laws are Poisson, otherwise explicit sums;
    "closed_form" / "explicit" force a path.  The explicit path refuses to
    sample more than PAIR_LIMIT cooperation terms.
    """
    k = state.current
    if k == 0:
        return DbpcState(state.generation + 1, 0, state.cumulative)
    pairs = k * (k - 1) // 2
    both_poisson = isinstance(params.offspring, PoissonLaw) and isinstance(
        params.cooperation, PoissonLaw
    )
    if method == "closed_form" and not both_poisson:
        raise InvalidArgumentError("closed_form requires Poisson offspring and cooperation")
    if method not in ("auto", "closed_form", "explicit"):
        raise InvalidArgumentError(f"unknown step method {method!r}")

    if both_poisson and method != "explicit":
        lam = k * params.offspring.lam + pairs * params.cooperation.lam
        nxt = int(rng.poisson(lam))
    else:
        if pairs > PAIR_LIMIT:
            raise ExplosionError(
                f"{pairs} cooperation terms exceed the explicit sampling limit"
            )
        nxt = int(params.offspring.sample(rng, k).sum())
        if pairs:
            nxt += int(params.cooperation.sample(rng, pairs).sum())
    return DbpcState(state.generation + 1, nxt, state.cumulative + nxt)


@dataclass(frozen=True)
class SurvivalEstimate:
    pi_hat: float
    stderr: float
    survived: int
    died: int
    undecided: int
    replicates: int


def estimate_survival(
    params: DbpcParams,
    z0: int,
    threshold: int,
    replicates: int,
    rng: np.random.Generator,
    generation_cap: int = 500,
) -> SurvivalEstimate:
    """Monte Carlo survival probability.

    A replicate survives when its size first reaches ``threshold``, dies when
    it hits 0, and is reported as undecided (never folded into either class)
    when the generation cap strikes first.  An explicit-path explosion counts
    as survival: the process has left any realistic extinction regime.
    """
    if threshold < 2:
        raise InvalidArgumentError(f"threshold must be >= 2, got {threshold}")
    if replicates < 1:
        raise InvalidArgumentError(f"replicates must be >= 1, got {replicates}")
    if z0 < 1:
        raise InvalidArgumentError(f"z0 must be >= 1, got {z0}")

    both_poisson = isinstance(params.offspring, PoissonLaw) and isinstance(
        params.cooperation, PoissonLaw
    )
    survived = died = undecided = 0
    if z0 >= threshold:  # trivially at the survival level already
        survived = replicates
        return SurvivalEstimate(1.0, 0.0, survived, 0, 0, replicates)

    if both_poisson:
        lo, lc = params.offspring.lam, params.cooperation.lam
        done = 0
        while done < replicates:
            batch = min(_SURVIVAL_BATCH, replicates - done)
            z = np.full(batch, z0, dtype=np.int64)
            alive = np.ones(batch, dtype=bool)
            for _ in range(generation_cap):
                idx = np.flatnonzero(alive)
                if idx.size == 0:
                    break
                zi = z[idx].astype(float)
                lam = zi * lo + zi * (zi - 1.0) * 0.5 * lc
                zn = rng.poisson(lam)
                z[idx] = zn
                alive[idx[zn == 0]] = False
                alive[idx[zn >= threshold]] = False
            died += int(np.count_nonzero(z == 0))
            survived += int(np.count_nonzero(z >= threshold))
            undecided += int(np.count_nonzero(alive))
            done += batch
    else:
        for _ in range(replicates):
            state = initial_state(z0)
            for _ in range(generation_cap):
                try:
                    state = dbpc_step(state, params, rng)
                except ExplosionError:
                    state = DbpcState(state.generation + 1, threshold, state.cumulative)
                if state.current == 0 or state.current >= threshold:
                    break
            if state.current == 0:
                died += 1
            elif state.current >= threshold:
                survived += 1
            else:
                undecided += 1

    decided = survived + died
    if decided == 0:
        pi_hat = stderr = float("nan")
    else:
        pi_hat = survived / decided
        stderr = math.sqrt(pi_hat * (1.0 - pi_hat) / decided)
    return SurvivalEstimate(
        pi_hat=pi_hat,
        stderr=stderr,
        survived=survived,
        died=died,
        undecided=undecided,
        replicates=replicates,
    )


def _poisson_pmf(lam: float, upto: int) -> np.ndarray:
    out = np.empty(upto + 1)
    out[0] = math.exp(-lam)
    for j in range(1, upto + 1):
        out[j] = out[j - 1] * lam / j
    return out


def truncated_reweighted_law(
    base_lambda: float, cutoff: int, damping: float, tail_policy: str
) -> TableLaw:
    """Poisson weights, damped and truncated, with the leftover mass parked
    at ``cutoff + 1`` (upper construction) or at 0 (lower construction).

    ``tail_policy`` is TAIL_AT_CUTOFF_PLUS_ONE or TAIL_AT_ZERO.  With the
    upper policy, weights 0..cutoff are the damped Poisson masses; with the
    lower policy only weights 1..cutoff are damped and the remainder sinks
    to 0.  Damping 1 with a large cutoff recovers the Poisson law pointwise.
    """
    if cutoff < 1:
        raise InvalidArgumentError(f"cutoff must be >= 1, got {cutoff}")
    if not 0.0 < damping <= 1.0:
        raise InvalidArgumentError(f"damping must lie in (0,1], got {damping}")
    if base_lambda < 0:
        raise InvalidArgumentError(f"base_lambda must be nonnegative, got {base_lambda}")
    pmf = _poisson_pmf(base_lambda, cutoff)
    if tail_policy == TAIL_AT_CUTOFF_PLUS_ONE:
        weights = np.zeros(cutoff + 2)
        weights[: cutoff + 1] = pmf * damping
        weights[cutoff + 1] = 1.0 - weights[: cutoff + 1].sum()
    elif tail_policy == TAIL_AT_ZERO:
        weights = np.zeros(cutoff + 1)
        weights[1 : cutoff + 1] = pmf[1:] * damping
        weights[0] = 1.0 - weights[1:].sum()
    else:
        raise InvalidArgumentError(f"unknown tail policy {tail_policy!r}")
    return TableLaw(weights)
