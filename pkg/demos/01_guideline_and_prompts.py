"""Walk through the attribute guideline and prompt serialization.

Builds the default Kandinsky guideline, draws random chromosomes, shows how
gene assignments become prompt text, and demonstrates loading a customized
schema document.
"""

import random

from evoart import (
    Chromosome,
    default_schema,
    dump_schema,
    load_schema,
    random_chromosome,
    to_prompt,
    validate_chromosome,
)

schema = default_schema()

print("=== the default guideline ===")
print(f"style token: {schema.style_token}")
for attr in schema.attributes:
    if attr.is_discrete:
        lo, hi = attr.pick
        print(f"  {attr.id:<12} discrete    pick {lo}..{hi} of {list(attr.values)}")
    else:
        print(f"  {attr.id:<12} continuous  0={attr.labels[0]} .. 1={attr.labels[1]}")
print(f"derived tags: { {t: list(v) for t, v in schema.derived_tags.items()} }")

print("\n=== random chromosomes and their prompts ===")
rng = random.Random(2)
for _ in range(4):
    c = random_chromosome(schema, rng)
    pt = to_prompt(c, schema)
    print(f"seed={c.seed:<11} {pt.text}")

print("\n=== token trace (what the UI shows on hover) ===")
c = Chromosome(
    style="Kandinsky",
    discrete_genes={
        "hue": ("orange",),
        "form_point": ("point",),
        "form_line": ("angular_line",),
        "form_plane": ("square",),
    },
    continuous_genes={"brightness": 0.20, "structure": 0.10, "parallel": 0.90},
    seed=7,
)
for gene, token in to_prompt(c, schema).token_trace:
    print(f"  {gene:<12} -> {token}")

print("\n=== validation catches malformed chromosomes ===")
broken = Chromosome(
    style="Kandinsky",
    discrete_genes={**c.discrete_genes, "hue": ("red", "red")},
    continuous_genes=c.continuous_genes,
    seed=2147483647,
)
for problem in validate_chromosome(broken, schema):
    print(f"  violation: {problem}")

print("\n=== schemas are plain documents ===")
doc = dump_schema(schema)
print(doc.splitlines()[0], "... ({} lines total)".format(len(doc.splitlines())))
tweaked = doc.replace("pick: [1, 2]", "pick: [2, 2]")  # always two hues
two_hue = load_schema(tweaked)
print("tweaked hue pick:", two_hue.attribute("hue").pick)
print("sample prompt   :", to_prompt(random_chromosome(two_hue, rng), two_hue).text)
