"""Render a gallery showing how each continuous gene shapes the image.

Writes PNG sweeps (brightness, structure, parallel) plus one SVG into
demos/output/gallery/, and prints the geometric statistics each gene drives.
"""

import math
from dataclasses import replace
from pathlib import Path

import numpy as np

from evoart import Chromosome, compose, composition_svg, render, render_png

OUT = Path(__file__).parent / "output" / "gallery"
OUT.mkdir(parents=True, exist_ok=True)

base = Chromosome(
    style="Kandinsky",
    discrete_genes={
        "hue": ("red", "blue"),
        "form_point": ("point",),
        "form_line": ("angular_line", "curved_line"),
        "form_plane": ("circle",),
    },
    continuous_genes={"brightness": 0.25, "structure": 0.35, "parallel": 0.6},
    seed=20240404,
)


def luminance(c):
    arr = np.asarray(render(c, 256, 256), dtype=np.float64)
    return float((arr @ np.array([0.2126, 0.7152, 0.0722])).mean())


def center_distance(c):
    comp = compose(c, 256, 256)
    return sum(math.hypot(e.x - 128, e.y - 128) for e in comp.elements) / len(comp.elements)


def set_gene(gene, value):
    return replace(base, continuous_genes={**base.continuous_genes, gene: value})


print("=== gene sweeps (each row: gene value, measured statistic) ===")
for gene, measure, label in [
    ("brightness", luminance, "mean luminance"),
    ("structure", center_distance, "mean distance to center (px)"),
]:
    print(f"\n{gene} -> {label}")
    for k in range(5):
        value = k / 4.0
        c = set_gene(gene, value)
        print(f"  {gene}={value:.2f}  {label}={measure(c):8.2f}")
        (OUT / f"{gene}-{k}.png").write_bytes(render_png(c, 256, 256))

print("\nparallel -> orientation alignment")
for k in range(5):
    value = k / 4.0
    c = set_gene("parallel", value)
    comp = compose(c, 256, 256)
    oriented = [e for e in comp.elements if e.kind not in ("point", "circle")]
    err = sum(
        min(e.orientation % math.pi, abs(e.orientation % math.pi - math.pi / 2),
            abs(e.orientation % math.pi - math.pi))
        for e in oriented
    ) / len(oriented)
    print(f"  parallel={value:.2f}  mean deviation from edge axes = {math.degrees(err):5.1f} deg")
    (OUT / f"parallel-{k}.png").write_bytes(render_png(c, 256, 256))

svg_path = OUT / "composition.svg"
svg_path.write_text(composition_svg(compose(base, 512, 512)))
print(f"\nwrote {len(list(OUT.glob('*.png')))} PNGs and {svg_path.name} to {OUT}")
print("same chromosome, same bytes:", render_png(base) == render_png(base))
