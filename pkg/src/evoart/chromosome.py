"""Prompt genotypes: random initialization, validation, prompt serialization.

A chromosome is one prompt: the style token, a value selection per
discrete attribute, a unit-interval value per continuous attribute, and
the generation seed the image backend will consume. Chromosomes are
immutable values.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .guideline import Attribute, AttributeSchema

SEED_BOUND = 2_147_483_647  # valid seeds are [0, SEED_BOUND)


@dataclass(frozen=True)
class Chromosome:
    style: str
    discrete_genes: dict[str, tuple[str, ...]]
    continuous_genes: dict[str, float]
    seed: int


@dataclass(frozen=True)
class PromptText:
    """Rendered prompt plus which gene emitted which token (for UI hover)."""

    text: str
    token_trace: tuple[tuple[str, str], ...]


def canonical_values(attr: Attribute, chosen) -> tuple[str, ...]:
    """Order a value selection by the attribute's declared value order."""
    order = {v: i for i, v in enumerate(attr.values)}
    return tuple(sorted(chosen, key=lambda v: order.get(v, len(order))))


def random_chromosome(schema: AttributeSchema, rng: random.Random) -> Chromosome:
    """Uniform draw over the whole gene space."""
    genes: dict[str, tuple[str, ...]] = {}
    for attr in schema.discrete_attributes:
        k = rng.randint(attr.pick[0], attr.pick[1])
        genes[attr.id] = canonical_values(attr, rng.sample(list(attr.values), k))
    continuous = {a.id: rng.random() for a in schema.continuous_attributes}
    return Chromosome(
        style=schema.style_token,
        discrete_genes=genes,
        continuous_genes=continuous,
        seed=rng.randrange(SEED_BOUND),
    )


def validate(c: Chromosome, schema: AttributeSchema) -> list[str]:
    """All invariant violations, empty when the chromosome is well-formed."""
    problems: list[str] = []
    if c.style != schema.style_token:
        problems.append(f"style '{c.style}' does not match schema style '{schema.style_token}'")

    discrete_ids = {a.id for a in schema.discrete_attributes}
    for aid in c.discrete_genes:
        if aid not in discrete_ids:
            problems.append(f"unexpected discrete gene '{aid}'")
    for attr in schema.discrete_attributes:
        if attr.id not in c.discrete_genes:
            problems.append(f"missing discrete gene '{attr.id}'")
            continue
        values = tuple(c.discrete_genes[attr.id])
        seen = set()
        for v in values:
            if v in seen:
                problems.append(f"duplicate value '{v}' in attribute '{attr.id}'")
            seen.add(v)
            if v not in attr.values:
                problems.append(f"unknown value '{v}' for attribute '{attr.id}'")
        lo, hi = attr.pick
        if not (lo <= len(values) <= hi):
            problems.append(
                f"attribute '{attr.id}' carries {len(values)} values, allowed {lo}..{hi}"
            )

    continuous_ids = {a.id for a in schema.continuous_attributes}
    for aid in c.continuous_genes:
        if aid not in continuous_ids:
            problems.append(f"unexpected continuous gene '{aid}'")
    for attr in schema.continuous_attributes:
        if attr.id not in c.continuous_genes:
            problems.append(f"missing continuous gene '{attr.id}'")
            continue
        x = c.continuous_genes[attr.id]
        if not isinstance(x, (int, float)) or not (0.0 <= float(x) <= 1.0):
            problems.append(f"continuous gene '{attr.id}' out of range [0, 1]: {x!r}")

    if not isinstance(c.seed, int) or not (0 <= c.seed < SEED_BOUND):
        problems.append(f"seed out of range [0, {SEED_BOUND}): {c.seed!r}")
    return problems


def to_prompt(c: Chromosome, schema: AttributeSchema) -> PromptText:
    """Deterministic prompt text. The seed is not serialized; it travels
    in the render request."""
    problems = validate(c, schema)
    if problems:
        raise ValueError("invalid chromosome: " + "; ".join(problems))

    groups: dict[str, list[tuple[str, str]]] = {
        "style": [("style", schema.style_token)],
        "discrete": [],
        "tags": [],
        "lora": [],
    }
    all_values: list[str] = []
    for attr in schema.discrete_attributes:
        for v in canonical_values(attr, c.discrete_genes[attr.id]):
            groups["discrete"].append((attr.id, v))
            all_values.append(v)
    for tag in schema.tags_for(all_values):
        groups["tags"].append(("tag", tag))
    for attr in schema.continuous_attributes:
        token = f"<lora:{attr.id}:{c.continuous_genes[attr.id]:.2f}>"
        groups["lora"].append((attr.id, token))

    rendered = {
        name: (" " if name == "lora" else ", ").join(tok for _, tok in entries)
        for name, entries in groups.items()
    }
    text = schema.prompt_template.format(**rendered)
    text = re.sub(r"(, )+", ", ", text).strip(" ,")

    trace: list[tuple[str, str]] = []
    for name in re.findall(r"{(\w+)}", schema.prompt_template):
        trace.extend(groups[name])
    return PromptText(text=text, token_trace=tuple(trace))


def chromosome_to_doc(c: Chromosome) -> dict:
    return {
        "style": c.style,
        "discrete": {aid: list(vals) for aid, vals in c.discrete_genes.items()},
        "continuous": {aid: float(x) for aid, x in c.continuous_genes.items()},
        "seed": int(c.seed),
    }


def chromosome_from_doc(doc) -> Chromosome:
    return Chromosome(
        style=doc["style"],
        discrete_genes={aid: tuple(vals) for aid, vals in doc["discrete"].items()},
        continuous_genes={aid: float(x) for aid, x in doc["continuous"].items()},
        seed=int(doc["seed"]),
    )
