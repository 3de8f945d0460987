"""Generational evolution: tournament selection, subtree variation, elitism."""

import random
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional, Tuple

from .errors import InvalidParameterError, TimeLimitExceeded
from .expr import (
    Expr,
    Individual,
    PrimitiveSet,
    depth,
    make_primitive_set,
    replace_at,
    subtrees,
    to_text,
)
from .generate import gen_grow, ramped_half_and_half

MAX_VARIATION_ATTEMPTS = 10

Population = List[Individual]
FitnessFunction = Callable[[Expr], float]


@dataclass
class RunParams:
    """Evolution settings. Defaults reproduce the reference experimental profile."""

    runs: int = 30
    generations: int = 50
    pop_size: int = 50
    elite_size: int = 1
    tournament_size: int = 3
    crossover_prob: float = 0.9
    mutation_prob: float = 0.1
    min_init_depth: int = 1
    max_init_depth: int = 10
    max_depth: int = 10
    seed: int = 0
    epsilon_hit: float = 1e-12

    def validate(self) -> "RunParams":
        checks = [
            (self.runs >= 1, "runs must be >= 1"),
            (self.generations >= 0, "generations must be >= 0"),
            (self.pop_size >= 1, "pop_size must be >= 1"),
            (0 <= self.elite_size < self.pop_size, "need 0 <= elite_size < pop_size"),
            (1 <= self.tournament_size <= self.pop_size, "need 1 <= tournament_size <= pop_size"),
            (0.0 <= self.crossover_prob <= 1.0, "crossover_prob must lie in [0, 1]"),
            (0.0 <= self.mutation_prob <= 1.0, "mutation_prob must lie in [0, 1]"),
            (
                0 <= self.min_init_depth <= self.max_init_depth <= self.max_depth,
                "need 0 <= min_init_depth <= max_init_depth <= max_depth",
            ),
            (0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer"),
            (self.epsilon_hit >= 0.0, "epsilon_hit must be >= 0"),
        ]
        for ok, msg in checks:
            if not ok:
                raise InvalidParameterError(msg)
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Timings:
    init_s: float = 0.0
    eval_s: float = 0.0
    breed_s: float = 0.0
    total_s: float = 0.0


@dataclass
class RunResult:
    best_per_generation: List[Tuple[int, float, str]]
    timings: Timings
    final_population: Population = field(repr=False)
    hit: bool = False

    @property
    def best_rmse(self) -> float:
        return self.best_per_generation[-1][1]

    @property
    def best_text(self) -> str:
        return self.best_per_generation[-1][2]

    def to_dict(self) -> dict:
        return {
            "best_per_generation": [
                {"generation": g, "best_rmse": f, "best_genotype": t}
                for g, f, t in self.best_per_generation
            ],
            "timings": asdict(self.timings),
            "hit": self.hit,
            "final_population": [
                {"genotype": ind.text, "fitness": ind.fitness, "depth": ind.depth,
                 "node_count": ind.node_count}
                for ind in self.final_population
            ],
        }


def tournament_select(pop: Population, k: int, rng: random.Random) -> Individual:
    """Best of ``k`` uniform draws with replacement; the earliest draw wins ties."""
    if k < 1:
        raise InvalidParameterError("tournament size must be >= 1")
    best = None
    for _ in range(k):
        cand = pop[rng.randrange(len(pop))]
        if cand.fitness is None:
            raise InvalidParameterError("tournament over an individual without fitness")
        if best is None or cand.fitness < best.fitness:
            best = cand
    return best


def subtree_crossover(a: Expr, b: Expr, max_depth: int, rng: random.Random) -> Expr:
    """Replace a random node of ``a`` with a random subtree of ``b``.

    Offspring deeper than ``max_depth`` are rejected; after
    ``MAX_VARIATION_ATTEMPTS`` rejections ``a`` is returned unchanged.
    """
    a_nodes = list(subtrees(a))
    b_nodes = list(subtrees(b))
    for _ in range(MAX_VARIATION_ATTEMPTS):
        path, _ = a_nodes[rng.randrange(len(a_nodes))]
        _, donor = b_nodes[rng.randrange(len(b_nodes))]
        # the rest of `a` already fits, so only the grafted branch can overflow
        if len(path) + depth(donor) <= max_depth:
            return replace_at(a, path, donor)
    return a


def subtree_mutation(a: Expr, ps: PrimitiveSet, max_depth: int, rng: random.Random) -> Expr:
    """Replace a random node with a grow tree sized to respect ``max_depth``."""
    nodes = list(subtrees(a))
    path, _ = nodes[rng.randrange(len(nodes))]
    room = max(0, max_depth - len(path))
    return replace_at(a, path, gen_grow(room, ps, rng))


def _ranked(pop: Population) -> Population:
    return [pop[i] for i in sorted(range(len(pop)), key=lambda i: (pop[i].fitness, i))]


def evolve_generation(
    pop: Population,
    params: RunParams,
    ps: PrimitiveSet,
    evaluate: FitnessFunction,
    rng: random.Random,
    on_bred: Callable[[], None] = None,
) -> Population:
    """Breed the next population.

    Elites are copied with their cached fitness.  Every other slot takes a
    tournament winner, replaces it with a crossover child (second parent
    from an independent tournament) with probability ``crossover_prob``, and
    then mutates the result with probability ``mutation_prob``.  All
    non-elite offspring are evaluated after breeding; ``on_bred`` fires in
    between so callers can split breeding time from evaluation time.
    """
    elites = [Individual(ind.genotype, ind.fitness) for ind in _ranked(pop)[: params.elite_size]]
    genotypes = []
    for _ in range(params.pop_size - params.elite_size):
        parent = tournament_select(pop, params.tournament_size, rng)
        child = parent.genotype
        if rng.random() < params.crossover_prob:
            other = tournament_select(pop, params.tournament_size, rng)
            child = subtree_crossover(child, other.genotype, params.max_depth, rng)
        if rng.random() < params.mutation_prob:
            child = subtree_mutation(child, ps, params.max_depth, rng)
        genotypes.append(child)
    if on_bred is not None:
        on_bred()
    return elites + [Individual(g, evaluate(g)) for g in genotypes]


def _best(pop: Population) -> Individual:
    return _ranked(pop)[0]


def run(
    params: RunParams,
    problem: FitnessFunction,
    ps: PrimitiveSet = None,
    time_limit_s: Optional[float] = None,
    trace: list = None,
) -> RunResult:
    """One evolutionary run from a ramped half-and-half population.

    ``problem`` maps a genotype to its RMSE (normally a
    :class:`vecgp.evaluation.Problem`).  Without ``ps`` the default function
    set is used with one variable per domain axis.

    Stops after ``params.generations`` generations, or earlier when the best
    RMSE drops to ``epsilon_hit``.  Raises :class:`TimeLimitExceeded` if the
    wall time passes ``time_limit_s``.
    """
    params.validate()
    if ps is None:
        domain = getattr(problem, "domain", None)
        ps = make_primitive_set(n_variables=domain.n_dims if domain is not None else 1)
    evaluate = problem
    rng = random.Random(params.seed)
    clock = time.perf_counter
    t_start = clock()
    timings = Timings()

    def check_time():
        if time_limit_s is not None and clock() - t_start > time_limit_s:
            raise TimeLimitExceeded(f"run exceeded {time_limit_s:.1f} s")

    genotypes = ramped_half_and_half(
        params.pop_size, params.min_init_depth, params.max_init_depth, ps, rng, trace=trace
    )
    t_init = clock()
    timings.init_s = t_init - t_start
    pop = [Individual(g, evaluate(g)) for g in genotypes]
    timings.eval_s += clock() - t_init

    best = _best(pop)
    history = [(0, best.fitness, to_text(best.genotype))]
    hit = best.fitness <= params.epsilon_hit
    for gen in range(1, params.generations + 1):
        if hit:
            break
        check_time()
        t0 = clock()
        marks = []
        pop = evolve_generation(pop, params, ps, evaluate, rng, on_bred=lambda: marks.append(clock()))
        t1 = clock()
        timings.breed_s += marks[0] - t0
        timings.eval_s += t1 - marks[0]
        best = _best(pop)
        history.append((gen, best.fitness, to_text(best.genotype)))
        hit = best.fitness <= params.epsilon_hit
    timings.total_s = clock() - t_start
    return RunResult(history, timings, pop, hit)
