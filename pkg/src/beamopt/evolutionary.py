"""Real-coded evolutionary optimizers SADE and GRADE on box domains.

Both algorithms evolve a population of ``pool_rate * n`` real vectors by
mutation toward random points, differential cross-over and modified
tournament reduction; SADE additionally applies a small local mutation
and uses fixed mutation/cross-over coefficients, while GRADE draws them
randomly (MR from (0,1), CR from (0,CL)) and steps from the better of
the two cross-over parents.  Every generation draws all random numbers
from a single seeded stream before evaluating, so runs are bitwise
reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GaSettings",
    "default_settings",
    "GenerationRecord",
    "EvolveResult",
    "mutate",
    "local_mutate",
    "cross_sade",
    "cross_grade",
    "tournament_reduce",
    "evolve",
]


@dataclass(frozen=True)
class GaSettings:
    """Algorithm constants and stopping rule.

    ``pool_rate`` times the variable count gives the population size.
    ``target`` stops the search at the first fitness value at or below it;
    ``max_calls`` caps the number of objective evaluations; a positive
    ``stall_generations`` stops once the best value improves by less than
    ``stall_tol`` (scaled by max(1, |best|)) over that many generations.
    """

    pool_rate: int = 10
    mutation_rate: float = 0.5
    cross_rate: float = 0.3
    cross_limit: float = 1.0
    radioactivity: float = 0.1
    local_range: float = 0.0025
    target: float | None = None
    max_calls: int = 100_000
    stall_generations: int = 0
    stall_tol: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.pool_rate < 2:
            raise ValueError("pool_rate must be at least 2")
        if not 0.0 <= self.radioactivity <= 1.0:
            raise ValueError("radioactivity must lie in [0, 1]")
        if self.cross_limit <= 0.0:
            raise ValueError("cross_limit must be positive")
        if self.local_range < 0.0:
            raise ValueError("local_range must be nonnegative")


def default_settings(mode: str, **overrides) -> GaSettings:
    """Stated algorithm constants: SADE (MR 0.5, CR 0.3, radioactivity 0.1)
    and GRADE (CL 1, radioactivity 0.2, no local mutation)."""
    if mode == "sade":
        base = dict(mutation_rate=0.5, cross_rate=0.3, radioactivity=0.1)
    elif mode == "grade":
        base = dict(cross_limit=1.0, radioactivity=0.2)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    base.update(overrides)
    return GaSettings(**base)


@dataclass
class GenerationRecord:
    generation: int
    best_value: float
    mean_value: float
    best_x: np.ndarray
    n_calls: int


@dataclass
class EvolveResult:
    best_x: np.ndarray
    best_value: float
    n_calls: int
    reached_target: bool
    stop_reason: str
    generations: int
    history: list[GenerationRecord] = field(default_factory=list)


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def _clamp(x: np.ndarray, box: np.ndarray) -> np.ndarray:
    return np.clip(x, box[:, 0], box[:, 1])


def mutate(x: np.ndarray, box: np.ndarray, mutation_rate: float, rng: np.random.Generator) -> np.ndarray:
    """Step from ``x`` toward a uniformly random point of the box by MR."""
    rp = box[:, 0] + rng.random(box.shape[0]) * (box[:, 1] - box[:, 0])
    return x + mutation_rate * (rp - x)


def local_mutate(x: np.ndarray, ranges: np.ndarray, box: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Perturb every coordinate uniformly within +/- its range, then clamp."""
    shift = rng.uniform(-1.0, 1.0, size=x.shape) * np.asarray(ranges, dtype=float)
    return _clamp(x + shift, box)


def cross_sade(
    x_p: np.ndarray, x_q: np.ndarray, x_r: np.ndarray, cross_rate: float, box: np.ndarray
) -> np.ndarray:
    """Differential cross-over ``x_p + CR (x_q - x_r)`` with boundary clamp."""
    return _clamp(x_p + cross_rate * (x_q - x_r), box)


def cross_grade(
    x_q: np.ndarray,
    f_q: float,
    x_r: np.ndarray,
    f_r: float,
    cross_limit: float,
    rng: np.random.Generator,
    box: np.ndarray,
) -> np.ndarray:
    """Cross-over stepping from the better parent along the worse-to-better direction.

    The coefficient is drawn uniformly from (0, CL); the sign factor orients
    the difference vector so the step continues past the better parent.
    """
    cr = rng.uniform(0.0, cross_limit)
    if f_q <= f_r:
        base, sg = x_q, 1.0
    else:
        base, sg = x_r, -1.0
    return _clamp(base + sg * cr * (x_q - x_r), box)


def tournament_reduce(
    points: np.ndarray, fits: np.ndarray, nominal: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Randomly paired eliminations down to ``nominal`` members.

    Two members are drawn without replacement and the worse one is cast
    off (ties drop the newer member); the best member can never lose and
    therefore always survives.
    """
    if nominal < 1:
        raise ValueError("nominal population size must be positive")
    alive = list(range(len(fits)))
    while len(alive) > nominal:
        pos = rng.choice(len(alive), size=2, replace=False)
        a, b = alive[pos[0]], alive[pos[1]]
        if fits[a] > fits[b] or (fits[a] == fits[b] and a > b):
            worse_pos = pos[0]
        else:
            worse_pos = pos[1]
        alive.pop(int(worse_pos))
    idx = np.fromiter(alive, dtype=int)
    return points[idx].copy(), fits[idx].copy()


# ---------------------------------------------------------------------------
# the generational loop
# ---------------------------------------------------------------------------


class _TargetReached(Exception):
    pass


class _BudgetExhausted(Exception):
    pass


class _Counter:
    """Exact objective-call accounting with immediate target detection."""

    def __init__(self, objective, settings: GaSettings):
        self.objective = objective
        self.settings = settings
        self.calls = 0
        self.best_value = np.inf
        self.best_x: np.ndarray | None = None

    def __call__(self, x: np.ndarray) -> float:
        if self.calls >= self.settings.max_calls:
            raise _BudgetExhausted
        self.calls += 1
        value = float(self.objective(x))
        if value < self.best_value:
            self.best_value = value
            self.best_x = np.array(x, dtype=float)
        if self.settings.target is not None and value <= self.settings.target:
            raise _TargetReached
        return value


def evolve(objective, box: np.ndarray, settings: GaSettings, mode: str = "grade") -> EvolveResult:
    """Minimize ``objective`` over the box with SADE or GRADE.

    Returns the best chromosome together with the exact number of fitness
    calls and a per-generation history; ``reached_target`` is False when
    the call budget (or stall rule) ended the search first.
    """
    if mode not in ("sade", "grade"):
        raise ValueError(f"unknown mode {mode!r}")
    box = np.atleast_2d(np.asarray(box, dtype=float))
    if np.any(box[:, 0] >= box[:, 1]):
        raise ValueError("every box interval must satisfy lo < hi")
    n = box.shape[0]
    pop_size = settings.pool_rate * n
    rng = np.random.default_rng(settings.seed)
    counter = _Counter(objective, settings)
    widths = box[:, 1] - box[:, 0]
    local_ranges = settings.local_range * widths

    history: list[GenerationRecord] = []
    stop_reason = "budget"
    reached = False
    generation = 0

    try:
        pop = box[:, 0] + rng.random((pop_size, n)) * widths[None, :]
        fits = np.empty(pop_size)
        for i in range(pop_size):
            fits[i] = counter(pop[i])

        stall_anchor = counter.best_value
        stall_count = 0
        while True:
            offspring: list[np.ndarray] = []
            n_mut = int(round(settings.radioactivity * pop_size))
            for _ in range(n_mut):
                parent = pop[rng.integers(pop_size)]
                mr = settings.mutation_rate if mode == "sade" else rng.uniform(0.0, 1.0)
                offspring.append(mutate(parent, box, mr, rng))
            if mode == "sade":
                for _ in range(n_mut):
                    parent = pop[rng.integers(pop_size)]
                    offspring.append(local_mutate(parent, local_ranges, box, rng))
            for _ in range(pop_size):
                if mode == "sade":
                    p, q, r = rng.choice(pop_size, size=3, replace=False)
                    offspring.append(cross_sade(pop[p], pop[q], pop[r], settings.cross_rate, box))
                else:
                    q, r = rng.choice(pop_size, size=2, replace=False)
                    offspring.append(
                        cross_grade(pop[q], fits[q], pop[r], fits[r], settings.cross_limit, rng, box)
                    )
            new_fits = np.empty(len(offspring))
            for i, child in enumerate(offspring):
                new_fits[i] = counter(child)
            pool = np.vstack([pop, np.asarray(offspring)])
            pool_fits = np.concatenate([fits, new_fits])
            pop, fits = tournament_reduce(pool, pool_fits, pop_size, rng)
            generation += 1
            best_i = int(np.argmin(fits))
            history.append(
                GenerationRecord(
                    generation=generation,
                    best_value=float(fits[best_i]),
                    mean_value=float(fits.mean()),
                    best_x=pop[best_i].copy(),
                    n_calls=counter.calls,
                )
            )
            if settings.stall_generations > 0:
                improvement = stall_anchor - counter.best_value
                if improvement <= settings.stall_tol * max(1.0, abs(counter.best_value)):
                    stall_count += 1
                    if stall_count >= settings.stall_generations:
                        stop_reason = "stalled"
                        break
                else:
                    stall_count = 0
                    stall_anchor = counter.best_value
    except _TargetReached:
        stop_reason = "target"
        reached = True
    except _BudgetExhausted:
        stop_reason = "budget"

    if counter.best_x is None:
        raise RuntimeError("no objective evaluation completed within the budget")
    return EvolveResult(
        best_x=counter.best_x,
        best_value=counter.best_value,
        n_calls=counter.calls,
        reached_target=reached,
        stop_reason=stop_reason,
        generations=generation,
        history=history,
    )
