"""Scripted interactive session: vote, evolve, watch preferences sharpen.

Plays a user who likes warm, dark, centric compositions, votes on each grid
the way the UI would, and prints the radar/weight movement per iteration.
Writes each generation's grid images to demos/output/evolution/.
"""

import random
from pathlib import Path

from evoart import (
    ImageStore,
    ProceduralBackend,
    compute_stats,
    default_schema,
    evolve,
    export_model,
    dump_model,
    initial_generation,
    initial_state,
    make_render_callback,
    sample_prompt,
    to_prompt,
)
from evoart.genetics import apply_ballot

OUT = Path(__file__).parent / "output" / "evolution"
OUT.mkdir(parents=True, exist_ok=True)

schema = default_schema()
store = ImageStore(OUT / "images")
backend = ProceduralBackend(store)
render_cb = make_render_callback(backend, backend, schema, width=256, height=256)

WARM = {"red", "orange", "yellow"}


def taste(chromosome) -> float:
    """How much our scripted user likes a chromosome."""
    hues = set(chromosome.discrete_genes["hue"])
    warmth = len(hues & WARM) / len(hues)
    darkness = chromosome.continuous_genes["brightness"]
    centric = chromosome.continuous_genes["structure"]
    return warmth + darkness + centric


rng = random.Random(11)
generation = initial_generation(schema, 16, rng, render=render_cb)
state = initial_state(schema)

for iteration in range(1, 5):
    ranked = sorted(generation.individuals, key=lambda i: -taste(i.chromosome))
    ballot = {ind.id: votes for ind, votes in zip(ranked, (4, 3, 2, 1))}
    voted = apply_ballot(generation, ballot)
    generation, state = evolve(generation, ballot, state, schema, rng, render=render_cb)

    stats = compute_stats(state, voted, schema)
    radar = stats.radar["hue"]
    warm_share = sum(radar[h] for h in WARM)
    print(f"iteration {iteration}: warm hue share {warm_share:.2f}  "
          f"brightness mean {state.models['brightness'].mean:.2f}  "
          f"structure mean {state.models['structure'].mean:.2f}")
    top = max(radar, key=radar.get)
    print(f"  heaviest hue: {top} (normalized weight {radar[top]:.2f})")

print("\n=== finalize and sample ===")
model = export_model(state, schema, session_id="demo-03")
(OUT / "model.yaml").write_text(dump_model(model))
for k in range(3):
    c = sample_prompt(model, rng)
    print(f"sampled: {to_prompt(c, schema).text}")
print(f"model written to {OUT / 'model.yaml'}")
print(f"grid images stored under {store.root} (content-addressed)")
