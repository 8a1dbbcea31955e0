"""Evolution engine: vote-driven selection, crossover, mutation, sampling.

Fitness is the raw vote count an individual received. Votes feed two
preference structures: an additive weight per discrete value (weights
start at 1 and only ever grow) and a normal model per continuous
attribute (vote-weighted mean and variance of the voted individuals).
The frozen pair of those structures is the exported prompting model: a
standalone sampler of user-preferred prompts.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable

import yaml

from .chromosome import (
    SEED_BOUND,
    Chromosome,
    canonical_values,
    chromosome_from_doc,
    chromosome_to_doc,
    random_chromosome,
)
from .guideline import AttributeSchema, schema_from_doc, schema_hash, schema_to_doc

VARIANCE_FLOOR = 0.0025  # sigma 0.05; keeps continuous models from collapsing

# Render callback: (individual id, chromosome) -> (image ref, degraded flag)
RenderFn = Callable[[str, Chromosome], "tuple[str | None, bool]"]


@dataclass(frozen=True)
class Individual:
    id: str
    chromosome: Chromosome
    image_ref: str | None = None
    votes: int = 0
    degraded: bool = False


@dataclass(frozen=True)
class Generation:
    index: int
    individuals: tuple[Individual, ...]


@dataclass(frozen=True)
class NormalModel:
    mean: float
    var: float


@dataclass(frozen=True)
class IterationSnapshot:
    """One completed vote/evolve cycle, kept for replay and charts."""

    iteration: int
    ballot: dict[str, int]
    weights: dict[str, float]
    models: dict[str, NormalModel]


@dataclass(frozen=True)
class EvolutionState:
    weights: dict[str, float]
    models: dict[str, NormalModel]
    history: tuple[IterationSnapshot, ...] = ()


@dataclass(frozen=True)
class OptimizedPromptingModel:
    """Frozen preference snapshot; samples prompts with no further feedback."""

    schema: AttributeSchema
    weights: dict[str, float]
    models: dict[str, NormalModel]
    provenance: dict


def initial_state(schema: AttributeSchema) -> EvolutionState:
    weights = {v: 1.0 for a in schema.discrete_attributes for v in a.values}
    models = {a.id: NormalModel(0.5, 1.0 / 12.0) for a in schema.continuous_attributes}
    return EvolutionState(weights=weights, models=models, history=())


def initial_generation(
    schema: AttributeSchema, n: int, rng: random.Random, render: RenderFn | None = None
) -> Generation:
    individuals = []
    for i in range(n):
        c = random_chromosome(schema, rng)
        ind_id = f"g0-{i:02d}"
        ref, degraded = render(ind_id, c) if render else (None, False)
        individuals.append(Individual(ind_id, c, ref, 0, degraded))
    return Generation(0, tuple(individuals))


def apply_ballot(g: Generation, ballot: dict[str, int]) -> Generation:
    known = {i.id for i in g.individuals}
    for ind_id, count in ballot.items():
        if ind_id not in known:
            raise ValueError(f"unknown individual '{ind_id}'")
        if int(count) < 0:
            raise ValueError(f"negative vote count for '{ind_id}'")
    return Generation(
        g.index,
        tuple(replace(i, votes=int(ballot.get(i.id, 0))) for i in g.individuals),
    )


def update_weights(state: EvolutionState, g: Generation) -> EvolutionState:
    """w_v += sum of votes of every individual whose chromosome carries v."""
    weights = dict(state.weights)
    for ind in g.individuals:
        if ind.votes <= 0:
            continue
        for values in ind.chromosome.discrete_genes.values():
            for v in values:
                weights[v] += ind.votes
    return replace(state, weights=weights)


def update_continuous(state: EvolutionState, g: Generation) -> EvolutionState:
    """Refit each normal model to the vote-weighted moments of the voted
    individuals; no-op when nothing was voted."""
    voted = [i for i in g.individuals if i.votes > 0]
    total = sum(i.votes for i in voted)
    if total == 0:
        return state
    models = dict(state.models)
    for attr_id in state.models:
        mean = sum(i.votes * i.chromosome.continuous_genes[attr_id] for i in voted) / total
        var = (
            sum(i.votes * (i.chromosome.continuous_genes[attr_id] - mean) ** 2 for i in voted)
            / total
        )
        models[attr_id] = NormalModel(mean, max(var, VARIANCE_FLOOR))
    return replace(state, models=models)


def _spin(individuals, rng: random.Random) -> Individual:
    total = sum(i.votes for i in individuals)
    r = rng.random() * total
    acc = 0.0
    for ind in individuals:
        acc += ind.votes
        if r < acc:
            return ind
    return individuals[-1]


def select_parent_pair(g: Generation, rng: random.Random) -> tuple[Individual, Individual]:
    """Roulette wheel over vote counts; falls back to uniform draws when
    the wheel has no mass. The pair is always distinct."""
    individuals = g.individuals
    if len(individuals) < 2:
        raise ValueError("need at least two individuals to select parents")
    total = sum(i.votes for i in individuals)
    if total == 0:
        a, b = rng.sample(range(len(individuals)), 2)
        return individuals[a], individuals[b]
    first = _spin(individuals, rng)
    if total - first.votes > 0:
        second = first
        while second is first:
            second = _spin(individuals, rng)
    else:
        rest = [i for i in individuals if i is not first]
        second = rest[rng.randrange(len(rest))]
    return first, second


def _weighted_draw(candidates: list[str], weights: dict[str, float], rng: random.Random) -> str:
    total = sum(weights[v] for v in candidates)
    r = rng.random() * total
    acc = 0.0
    for v in candidates:
        acc += weights[v]
        if r < acc:
            return v
    return candidates[-1]


def crossover(
    p1: Chromosome,
    p2: Chromosome,
    schema: AttributeSchema,
    weights: dict[str, float],
    rng: random.Random,
) -> Chromosome:
    """One offspring. Seed: coin flip between parents. Continuous genes:
    arithmetic mean. Discrete genes: a without-replacement draw from the
    union multiset of the parents' values, weight-proportional, backfilled
    from the attribute's unused values when the union runs short."""
    seed = p1.seed if rng.random() < 0.5 else p2.seed
    continuous = {
        a.id: 0.5 * (p1.continuous_genes[a.id] + p2.continuous_genes[a.id])
        for a in schema.continuous_attributes
    }
    genes: dict[str, tuple[str, ...]] = {}
    for attr in schema.discrete_attributes:
        k = rng.randint(attr.pick[0], attr.pick[1])
        pool = list(p1.discrete_genes[attr.id]) + list(p2.discrete_genes[attr.id])
        chosen: list[str] = []
        while len(chosen) < k and pool:
            v = _weighted_draw(pool, weights, rng)
            chosen.append(v)
            pool = [x for x in pool if x != v]
        if len(chosen) < k:
            unused = [v for v in attr.values if v not in chosen]
            while len(chosen) < k:
                v = _weighted_draw(unused, weights, rng)
                chosen.append(v)
                unused.remove(v)
        genes[attr.id] = canonical_values(attr, chosen)
    return Chromosome(p1.style, genes, continuous, seed)


def mutate(
    c: Chromosome,
    schema: AttributeSchema,
    state: EvolutionState,
    rng: random.Random,
    rate: float = 0.05,
) -> Chromosome:
    """Uniform mutation per gene at the given rate. Discrete attributes and
    the seed redraw uniformly from their possible sets; continuous genes
    resample from the attribute's current normal model, clamped to [0, 1]."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"mutation rate must be in [0, 1], got {rate}")
    genes = dict(c.discrete_genes)
    for attr in schema.discrete_attributes:
        if rng.random() < rate:
            k = rng.randint(attr.pick[0], attr.pick[1])
            genes[attr.id] = canonical_values(attr, rng.sample(list(attr.values), k))
    continuous = dict(c.continuous_genes)
    for attr in schema.continuous_attributes:
        if rng.random() < rate:
            m = state.models[attr.id]
            continuous[attr.id] = min(1.0, max(0.0, rng.gauss(m.mean, math.sqrt(m.var))))
    seed = c.seed
    if rng.random() < rate:
        seed = rng.randrange(SEED_BOUND)
    return Chromosome(c.style, genes, continuous, seed)


def evolve(
    g: Generation,
    ballot: dict[str, int],
    state: EvolutionState,
    schema: AttributeSchema,
    rng: random.Random,
    *,
    mutation_rate: float = 0.05,
    render: RenderFn | None = None,
    rerender_survivors: bool = False,
) -> tuple[Generation, EvolutionState]:
    """One full iteration: apply the ballot, update both preference
    structures, carry over voted survivors (at most n/2, best votes first,
    ties by id), then breed offspring until the population is full again."""
    voted = apply_ballot(g, ballot)
    state = update_weights(state, voted)
    state = update_continuous(state, voted)

    n = len(voted.individuals)
    cap = n // 2
    survivors = sorted(
        (i for i in voted.individuals if i.votes > 0), key=lambda i: (-i.votes, i.id)
    )[:cap]
    next_individuals: list[Individual] = []
    for ind in survivors:
        ref, degraded = ind.image_ref, ind.degraded
        if rerender_survivors and render is not None:
            ref, degraded = render(ind.id, ind.chromosome)
        next_individuals.append(replace(ind, votes=0, image_ref=ref, degraded=degraded))

    while len(next_individuals) < n:
        p1, p2 = select_parent_pair(voted, rng)
        child = crossover(p1.chromosome, p2.chromosome, schema, state.weights, rng)
        child = mutate(child, schema, state, rng, mutation_rate)
        child_id = f"g{g.index + 1}-{len(next_individuals):02d}"
        ref, degraded = render(child_id, child) if render else (None, False)
        next_individuals.append(Individual(child_id, child, ref, 0, degraded))

    snapshot = IterationSnapshot(
        iteration=g.index,
        ballot={k: int(v) for k, v in ballot.items()},
        weights=dict(state.weights),
        models=dict(state.models),
    )
    state = replace(state, history=state.history + (snapshot,))
    return Generation(g.index + 1, tuple(next_individuals)), state


# ---------------------------------------------------------------------------
# Exported prompting model
# ---------------------------------------------------------------------------


def export_model(
    state: EvolutionState, schema: AttributeSchema, session_id: str = ""
) -> OptimizedPromptingModel:
    if not state.history:
        raise ValueError("no completed iterations: vote at least once before exporting")
    return OptimizedPromptingModel(
        schema=schema,
        weights=dict(state.weights),
        models=dict(state.models),
        provenance={"session_id": session_id, "iterations": len(state.history)},
    )


def sample_prompt(model: OptimizedPromptingModel, rng: random.Random) -> Chromosome:
    """Draw one chromosome from the frozen preference structures: discrete
    values weight-proportionally without replacement, continuous values
    from the frozen normal models, and a fresh uniform seed."""
    schema = model.schema
    genes: dict[str, tuple[str, ...]] = {}
    for attr in schema.discrete_attributes:
        k = rng.randint(attr.pick[0], attr.pick[1])
        candidates = list(attr.values)
        chosen: list[str] = []
        for _ in range(k):
            v = _weighted_draw(candidates, model.weights, rng)
            chosen.append(v)
            candidates.remove(v)
        genes[attr.id] = canonical_values(attr, chosen)
    continuous = {}
    for attr in schema.continuous_attributes:
        m = model.models[attr.id]
        continuous[attr.id] = min(1.0, max(0.0, rng.gauss(m.mean, math.sqrt(m.var))))
    return Chromosome(schema.style_token, genes, continuous, rng.randrange(SEED_BOUND))


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def state_to_doc(state: EvolutionState) -> dict:
    return {
        "weights": {v: float(w) for v, w in state.weights.items()},
        "continuous": {
            a: {"mean": float(m.mean), "var": float(m.var)} for a, m in state.models.items()
        },
    }


def state_from_doc(doc, history: tuple[IterationSnapshot, ...] = ()) -> EvolutionState:
    return EvolutionState(
        weights={v: float(w) for v, w in doc["weights"].items()},
        models={a: NormalModel(d["mean"], d["var"]) for a, d in doc["continuous"].items()},
        history=history,
    )


def generation_to_doc(g: Generation) -> dict:
    return {
        "index": g.index,
        "individuals": [
            {
                "id": i.id,
                "chromosome": chromosome_to_doc(i.chromosome),
                "image_ref": i.image_ref,
                "votes": i.votes,
                "degraded": i.degraded,
            }
            for i in g.individuals
        ],
    }


def generation_from_doc(doc) -> Generation:
    return Generation(
        int(doc["index"]),
        tuple(
            Individual(
                d["id"],
                chromosome_from_doc(d["chromosome"]),
                d.get("image_ref"),
                int(d.get("votes", 0)),
                bool(d.get("degraded", False)),
            )
            for d in doc["individuals"]
        ),
    )


MODEL_DOC_VERSION = 1


def model_to_doc(m: OptimizedPromptingModel) -> dict:
    return {
        "version": MODEL_DOC_VERSION,
        "schema_hash": schema_hash(m.schema),
        "schema": schema_to_doc(m.schema),
        "weights": {v: float(w) for v, w in m.weights.items()},
        "continuous": {
            a: {"mean": float(x.mean), "var": float(x.var)} for a, x in m.models.items()
        },
        "provenance": dict(m.provenance),
    }


def model_from_doc(doc) -> OptimizedPromptingModel:
    if doc.get("version") != MODEL_DOC_VERSION:
        raise ValueError(f"unsupported model document version {doc.get('version')!r}")
    schema = schema_from_doc(doc["schema"])
    if schema_hash(schema) != doc["schema_hash"]:
        raise ValueError("model document schema hash mismatch")
    return OptimizedPromptingModel(
        schema=schema,
        weights={v: float(w) for v, w in doc["weights"].items()},
        models={a: NormalModel(d["mean"], d["var"]) for a, d in doc["continuous"].items()},
        provenance=dict(doc.get("provenance", {})),
    )


def dump_model(m: OptimizedPromptingModel) -> str:
    """Byte-stable document: same model, same text."""
    return yaml.safe_dump(model_to_doc(m), sort_keys=True)


def load_model(text: str) -> OptimizedPromptingModel:
    return model_from_doc(yaml.safe_load(text))
