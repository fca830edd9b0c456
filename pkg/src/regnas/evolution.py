"""Aging (regularized) tournament evolution, generic over genome type.

Loop shape: P random individuals seed a FIFO population; each iteration
samples S distinct members, mutates the fittest of the sample, evaluates the
child, enqueues it and drops the oldest member.  The returned best is taken
over the full visit history, not just the surviving population.
"""

from collections import deque
from dataclasses import dataclass


@dataclass(frozen=True)
class EvolutionConfig:
    population: int = 50
    sample: int = 10
    iterations: int = 400
    maximize: bool = True

    def __post_init__(self):
        if not (1 <= self.sample <= self.population) or self.iterations < 0:
            raise ValueError("need 1 <= sample <= population and iterations >= 0")


@dataclass
class Individual:
    genome: object
    fitness: float
    birth_index: int


def _better(a, b, maximize):
    """a strictly preferred over b; fitness first, then age (older wins)."""
    if a.fitness != b.fitness:
        return a.fitness > b.fitness if maximize else a.fitness < b.fitness
    return a.birth_index < b.birth_index


def tournament_select(population, sample_size, rng, maximize=True):
    idx = rng.choice(len(population), size=sample_size, replace=False)
    best = population[idx[0]]
    for i in idx[1:]:
        if _better(population[i], best, maximize):
            best = population[i]
    return best


def evolve(init_sampler, mutator, fitness_fn, cfg, rng, log_fn=None):
    """Returns (best individual, history).  ``log_fn``, if given, is called
    with (iteration, child, population_size) after each evolution step."""
    population = deque()
    history = []
    for i in range(cfg.population):
        genome = init_sampler(rng)
        ind = Individual(genome, float(fitness_fn(genome)), i)
        population.append(ind)
        history.append(ind)
    for it in range(cfg.iterations):
        parent = tournament_select(list(population), cfg.sample, rng, cfg.maximize)
        child_genome = mutator(parent.genome, rng)
        child = Individual(child_genome, float(fitness_fn(child_genome)), len(history))
        population.append(child)
        history.append(child)
        population.popleft()
        if log_fn is not None:
            log_fn(it, child, len(population))
    best = history[0]
    for ind in history[1:]:
        if _better(ind, best, cfg.maximize):
            best = ind
    return best, history
