"""Simulated-user convergence experiments.

A simulated user holds a fixed target chromosome (a consistent aesthetic
preference) and each iteration votes a fixed schedule — by default
4/3/2/1 over the four individuals closest to the target — so whole
sessions run headlessly and reproducibly. The report tracks, per
iteration, how often each attribute's heaviest value matches the target
and how far each continuous model mean sits from the target value.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .chromosome import Chromosome, canonical_values
from .genetics import (
    EvolutionState,
    Generation,
    evolve,
    initial_generation,
    initial_state,
)
from .guideline import AttributeSchema

CONTINUOUS_TOLERANCE = 0.20


@dataclass(frozen=True)
class SimulatedUser:
    """Fixed preference plus a voting policy (budget = sum of schedule)."""

    target: Chromosome
    schedule: tuple[int, ...] = (4, 3, 2, 1)

    def __post_init__(self):
        if not self.schedule or any(v < 1 for v in self.schedule):
            raise ValueError("vote schedule must be non-empty positive counts")

    @property
    def budget(self) -> int:
        return sum(self.schedule)


def similarity(c: Chromosome, target: Chromosome, schema: AttributeSchema) -> float:
    """(matched target values / total target values) minus the mean absolute
    continuous distance; ranges over [-1, 1], 1.0 iff genes coincide."""
    target_values = [v for vs in target.discrete_genes.values() for v in vs]
    if target_values:
        carried = {v for vs in c.discrete_genes.values() for v in vs}
        match = sum(1 for v in target_values if v in carried) / len(target_values)
    else:
        match = 1.0
    deltas = [
        abs(c.continuous_genes[a] - target.continuous_genes[a]) for a in target.continuous_genes
    ]
    penalty = sum(deltas) / len(deltas) if deltas else 0.0
    return match - penalty


def cast_ballot(g: Generation, user: SimulatedUser, schema: AttributeSchema) -> dict[str, int]:
    ranked = sorted(
        g.individuals, key=lambda i: (-similarity(i.chromosome, user.target, schema), i.id)
    )
    return {ind.id: votes for ind, votes in zip(ranked, user.schedule)}


def random_target(schema: AttributeSchema, rng: random.Random) -> Chromosome:
    """Random preference with at least one value per discrete attribute, so
    "does the heaviest value match the target" is well-defined everywhere."""
    genes = {}
    for attr in schema.discrete_attributes:
        k = rng.randint(max(1, attr.pick[0]), attr.pick[1])
        genes[attr.id] = canonical_values(attr, rng.sample(list(attr.values), k))
    continuous = {a.id: rng.random() for a in schema.continuous_attributes}
    return Chromosome(schema.style_token, genes, continuous, rng.randrange(2_147_483_647))


def heaviest_value(state: EvolutionState, attr) -> str:
    """Argmax-weight value within one attribute; ties break toward the
    attribute's declared value order."""
    return max(attr.values, key=lambda v: (state.weights[v], -attr.values.index(v)))


def measure(state: EvolutionState, target: Chromosome, schema: AttributeSchema):
    matches = {
        attr.id: heaviest_value(state, attr) in target.discrete_genes[attr.id]
        for attr in schema.discrete_attributes
    }
    errors = {
        a.id: abs(state.models[a.id].mean - target.continuous_genes[a.id])
        for a in schema.continuous_attributes
    }
    return matches, errors


@dataclass
class IterationRow:
    iteration: int
    match_rate: dict[str, float]
    mean_match_rate: float
    continuous_mae: dict[str, float]
    continuous_within: dict[str, float]


@dataclass
class ConvergenceReport:
    runs: int
    iterations: int
    seed: int
    n: int
    schedule: tuple[int, ...]
    tolerance: float
    rows: list[IterationRow] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "runs": self.runs,
            "iterations": self.iterations,
            "seed": self.seed,
            "n": self.n,
            "schedule": list(self.schedule),
            "tolerance": self.tolerance,
            "rows": [
                {
                    "iteration": r.iteration,
                    "match_rate": r.match_rate,
                    "mean_match_rate": r.mean_match_rate,
                    "continuous_mae": r.continuous_mae,
                    "continuous_within_tolerance": r.continuous_within,
                }
                for r in self.rows
            ],
        }

    def table(self) -> str:
        if not self.rows:
            return "(empty report)"
        d_attrs = sorted(self.rows[0].match_rate)
        c_attrs = sorted(self.rows[0].continuous_mae)
        header = (
            ["iter"]
            + [f"match:{a}" for a in d_attrs]
            + ["match:mean"]
            + [f"mae:{a}" for a in c_attrs]
            + [f"within{self.tolerance:.2f}:{a}" for a in c_attrs]
        )
        lines = ["  ".join(f"{h:>16}" for h in header)]
        for r in self.rows:
            cells = [f"{r.iteration:>16}"]
            cells += [f"{r.match_rate[a]:>16.3f}" for a in d_attrs]
            cells += [f"{r.mean_match_rate:>16.3f}"]
            cells += [f"{r.continuous_mae[a]:>16.3f}" for a in c_attrs]
            cells += [f"{r.continuous_within[a]:>16.3f}" for a in c_attrs]
            lines.append("  ".join(cells))
        return "\n".join(lines)


def run_session(
    schema: AttributeSchema,
    user: SimulatedUser,
    iterations: int,
    rng: random.Random,
    *,
    n: int = 16,
    mutation_rate: float = 0.05,
):
    """One headless session; images are never rasterized because the voter
    scores chromosomes directly. Yields (matches, errors) per iteration,
    including iteration 0 (the untouched initial state)."""
    state = initial_state(schema)
    generation = initial_generation(schema, n, rng)
    trace = [measure(state, user.target, schema)]
    for _ in range(iterations):
        ballot = cast_ballot(generation, user, schema)
        generation, state = evolve(
            generation, ballot, state, schema, rng, mutation_rate=mutation_rate
        )
        trace.append(measure(state, user.target, schema))
    return trace


def simulate(
    schema: AttributeSchema,
    *,
    runs: int = 50,
    iterations: int = 5,
    seed: int = 0,
    n: int = 16,
    mutation_rate: float = 0.05,
    schedule: tuple[int, ...] = (4, 3, 2, 1),
    tolerance: float = CONTINUOUS_TOLERANCE,
) -> ConvergenceReport:
    """Reproducible multi-run convergence experiment: same seed, same report."""
    d_ids = [a.id for a in schema.discrete_attributes]
    c_ids = [a.id for a in schema.continuous_attributes]
    match_acc = [{a: 0 for a in d_ids} for _ in range(iterations + 1)]
    err_acc = [{a: 0.0 for a in c_ids} for _ in range(iterations + 1)]
    within_acc = [{a: 0 for a in c_ids} for _ in range(iterations + 1)]

    for r in range(runs):
        rng = random.Random(f"{seed}:{r}")
        user = SimulatedUser(random_target(schema, rng), schedule)
        trace = run_session(schema, user, iterations, rng, n=n, mutation_rate=mutation_rate)
        for t, (matches, errors) in enumerate(trace):
            for a, ok in matches.items():
                match_acc[t][a] += int(ok)
            for a, e in errors.items():
                err_acc[t][a] += e
                within_acc[t][a] += int(e <= tolerance)

    report = ConvergenceReport(runs, iterations, seed, n, tuple(schedule), tolerance)
    for t in range(iterations + 1):
        match_rate = {a: match_acc[t][a] / runs for a in d_ids}
        report.rows.append(
            IterationRow(
                iteration=t,
                match_rate=match_rate,
                mean_match_rate=sum(match_rate.values()) / len(d_ids),
                continuous_mae={a: err_acc[t][a] / runs for a in c_ids},
                continuous_within={a: within_acc[t][a] / runs for a in c_ids},
            )
        )
    return report
