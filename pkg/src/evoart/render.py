"""Deterministic procedural renderer: chromosome -> geometric composition -> raster.

Every stochastic choice comes from a PCG64 stream seeded with the
chromosome's seed gene, so a chromosome is a complete description of its
image. Each continuous gene drives one measurable statistic:

* brightness  -> mean luminance (0 light, 1 dark), via background
  interpolation and multiplicative shading of element colors;
* structure   -> mean element distance to the canvas center (0 ring
  placement away from the center, 1 Gaussian cluster at the center);
* parallel    -> element orientation (0 diagonal-ish, 1 exactly parallel
  to the canvas edges).

Hue genes pick colors from the fixed palettes below; form genes decide
which element kinds appear (each chosen kind at least twice).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .chromosome import Chromosome

POINT_KIND = "point"
LINE_KINDS = ("straight_line", "curved_line", "angular_line")
PLANE_KINDS = ("triangle", "square", "circle")
ALL_KINDS = (POINT_KIND,) + LINE_KINDS + PLANE_KINDS

# Kinds whose orientation field is meaningful (circles and points are isotropic).
ORIENTED_KINDS = frozenset(LINE_KINDS + ("triangle", "square"))

# Six shades per hue. The dominant RGB channel of every entry matches the
# hue family (documented in the README); "grey" is the fallback for
# chromosomes that carry no hue gene.
PALETTES: dict[str, tuple[tuple[int, int, int], ...]] = {
    "red": ((195, 39, 43), (161, 47, 47), (214, 69, 69), (142, 31, 31), (224, 106, 90), (178, 58, 72)),
    "yellow": ((241, 196, 15), (232, 177, 20), (246, 211, 61), (214, 158, 27), (250, 225, 113), (226, 190, 46)),
    "blue": ((41, 98, 184), (26, 70, 143), (73, 126, 201), (18, 49, 102), (108, 155, 214), (52, 86, 158)),
    "orange": ((230, 126, 34), (211, 104, 19), (240, 154, 72), (184, 88, 22), (247, 178, 110), (222, 118, 41)),
    "green": ((39, 154, 80), (24, 120, 62), (76, 175, 108), (17, 92, 48), (118, 196, 142), (46, 139, 87)),
    "violet": ((125, 60, 152), (99, 44, 124), (150, 85, 176), (78, 34, 99), (173, 118, 196), (113, 52, 141)),
    "grey": ((120, 120, 120), (90, 90, 90), (150, 150, 150), (70, 70, 70), (180, 180, 180), (105, 105, 105)),
}

WARM_HUES = frozenset({"red", "yellow", "orange"})
COLD_HUES = frozenset({"green", "blue", "violet"})

BG_LIGHT = (246, 243, 237)
BG_DARK = (23, 22, 26)

MIN_CANVAS = 64


@dataclass(frozen=True)
class Element:
    kind: str
    x: float
    y: float
    orientation: float  # radians
    scale: float  # pixels
    color: tuple[int, int, int]
    filled: bool
    bend: float  # in [0, 1]; arm/curvature direction for line kinds


@dataclass(frozen=True)
class Composition:
    width: int
    height: int
    background: tuple[int, int, int]
    elements: tuple[Element, ...]


def shade(color: tuple[int, int, int], brightness: float) -> tuple[int, int, int]:
    """Scale a palette color's luminance; 0 keeps it, 1 darkens hard."""
    factor = 1.0 - 0.75 * brightness
    return tuple(int(round(ch * factor)) for ch in color)


def _clamp8(x: float) -> int:
    return max(0, min(255, int(round(x))))


def _background(hues, brightness: float) -> tuple[int, int, int]:
    base = [
        (1.0 - brightness) * lo + brightness * hi for lo, hi in zip(BG_LIGHT, BG_DARK)
    ]
    chosen = set(hues)
    if chosen & WARM_HUES:
        base[0] += 9
        base[2] -= 7
    if chosen & COLD_HUES:
        base[0] -= 7
        base[2] += 9
    return (_clamp8(base[0]), _clamp8(base[1]), _clamp8(base[2]))


def compose(c: Chromosome, width: int = 512, height: int = 512) -> Composition:
    """Build the geometric scene for a chromosome. Pure function."""
    if width < MIN_CANVAS or height < MIN_CANVAS:
        raise ValueError(f"canvas must be at least {MIN_CANVAS}x{MIN_CANVAS}")
    rng = np.random.Generator(np.random.PCG64(int(c.seed)))

    hues = [v for v in c.discrete_genes.get("hue", ()) if v in PALETTES] or ["grey"]
    kinds = [
        v
        for aid in ("form_point", "form_line", "form_plane")
        for v in c.discrete_genes.get(aid, ())
        if v in ALL_KINDS
    ]
    if not kinds:
        kinds = [POINT_KIND]

    brightness = float(c.continuous_genes.get("brightness", 0.5))
    structure = float(c.continuous_genes.get("structure", 0.5))
    parallel = float(c.continuous_genes.get("parallel", 0.5))

    count = int(rng.integers(12, 25))
    count = max(count, 2 * len(kinds))
    allocation = list(kinds) * 2
    allocation += [kinds[int(rng.integers(0, len(kinds)))] for _ in range(count - len(allocation))]

    min_dim = float(min(width, height))
    cx, cy = width / 2.0, height / 2.0
    elements = []
    for kind in allocation:
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        ring = float(rng.uniform(0.30, 0.45)) * min_dim
        cluster = min(abs(float(rng.normal(0.0, 0.10 * min_dim))), 0.25 * min_dim)
        radius = (1.0 - structure) * ring + structure * cluster
        edge = float(rng.choice((0.0, math.pi / 2.0)))
        sign = float(rng.choice((-1.0, 1.0)))
        shrink = float(rng.uniform(0.8, 1.0))
        orientation = edge + (1.0 - parallel) * sign * (math.pi / 4.0) * shrink
        base_scale = float(rng.uniform(0.06, 0.18)) * min_dim
        hue = hues[int(rng.integers(0, len(hues)))]
        color = shade(PALETTES[hue][int(rng.integers(0, 6))], brightness)
        fill_draw = float(rng.random())
        bend = float(rng.random())
        elements.append(
            Element(
                kind=kind,
                x=cx + radius * math.cos(theta),
                y=cy + radius * math.sin(theta),
                orientation=orientation,
                scale=base_scale * (0.3 if kind == POINT_KIND else 1.0),
                color=color,
                filled=fill_draw < 0.7,
                bend=bend,
            )
        )
    return Composition(width, height, _background(hues, brightness), tuple(elements))


# ---------------------------------------------------------------------------
# Rasterization
# ---------------------------------------------------------------------------


def _line_width(scale: float) -> int:
    return max(2, int(scale * 0.10))


def _draw_point(draw: ImageDraw.ImageDraw, el: Element) -> None:
    r = el.scale / 2.0
    draw.ellipse((el.x - r, el.y - r, el.x + r, el.y + r), fill=el.color)


def _draw_straight(draw: ImageDraw.ImageDraw, el: Element) -> None:
    dx, dy = math.cos(el.orientation), math.sin(el.orientation)
    half = el.scale / 2.0
    draw.line(
        (el.x - dx * half, el.y - dy * half, el.x + dx * half, el.y + dy * half),
        fill=el.color,
        width=_line_width(el.scale),
    )


def _draw_angular(draw: ImageDraw.ImageDraw, el: Element) -> None:
    half = el.scale / 2.0
    a1 = el.orientation
    a2 = el.orientation + (math.pi / 2.0 if el.bend < 0.5 else -math.pi / 2.0)
    pts = [
        (el.x - math.cos(a1) * half, el.y - math.sin(a1) * half),
        (el.x, el.y),
        (el.x + math.cos(a2) * half, el.y + math.sin(a2) * half),
    ]
    draw.line(pts, fill=el.color, width=_line_width(el.scale), joint="curve")


def _draw_curved(draw: ImageDraw.ImageDraw, el: Element) -> None:
    half = el.scale / 2.0
    dx, dy = math.cos(el.orientation), math.sin(el.orientation)
    px, py = -dy, dx
    amp = el.scale * 0.4 * (el.bend - 0.5) * 2.0
    p0 = (el.x - dx * half, el.y - dy * half)
    p2 = (el.x + dx * half, el.y + dy * half)
    p1 = (el.x + px * amp, el.y + py * amp)
    pts = []
    for i in range(25):
        t = i / 24.0
        u = 1.0 - t
        pts.append(
            (
                u * u * p0[0] + 2 * u * t * p1[0] + t * t * p2[0],
                u * u * p0[1] + 2 * u * t * p1[1] + t * t * p2[1],
            )
        )
    draw.line(pts, fill=el.color, width=_line_width(el.scale), joint="curve")


def _polygon(el: Element, angles) -> list[tuple[float, float]]:
    r = el.scale / 2.0
    return [
        (el.x + r * math.cos(el.orientation + a), el.y + r * math.sin(el.orientation + a))
        for a in angles
    ]


def _draw_triangle(draw: ImageDraw.ImageDraw, el: Element) -> None:
    pts = _polygon(el, (math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3))
    if el.filled:
        draw.polygon(pts, fill=el.color)
    else:
        draw.polygon(pts, outline=el.color, width=3)


def _draw_square(draw: ImageDraw.ImageDraw, el: Element) -> None:
    pts = _polygon(el, (math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4))
    if el.filled:
        draw.polygon(pts, fill=el.color)
    else:
        draw.polygon(pts, outline=el.color, width=3)


def _draw_circle(draw: ImageDraw.ImageDraw, el: Element) -> None:
    r = el.scale / 2.0
    box = (el.x - r, el.y - r, el.x + r, el.y + r)
    if el.filled:
        draw.ellipse(box, fill=el.color)
    else:
        draw.ellipse(box, outline=el.color, width=3)


_DRAWERS = {
    "point": _draw_point,
    "straight_line": _draw_straight,
    "angular_line": _draw_angular,
    "curved_line": _draw_curved,
    "triangle": _draw_triangle,
    "square": _draw_square,
    "circle": _draw_circle,
}


def rasterize(comp: Composition) -> Image.Image:
    img = Image.new("RGB", (comp.width, comp.height), comp.background)
    draw = ImageDraw.Draw(img)
    for el in comp.elements:
        _DRAWERS[el.kind](draw, el)
    return img


def render(c: Chromosome, width: int = 512, height: int = 512) -> Image.Image:
    return rasterize(compose(c, width, height))


def render_png(c: Chromosome, width: int = 512, height: int = 512) -> bytes:
    buf = io.BytesIO()
    render(c, width, height).save(buf, format="PNG")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# SVG export (inspection aid)
# ---------------------------------------------------------------------------


def _hex(color: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*color)


def composition_svg(comp: Composition) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{comp.width}" '
        f'height="{comp.height}" viewBox="0 0 {comp.width} {comp.height}">',
        f'<rect width="{comp.width}" height="{comp.height}" fill="{_hex(comp.background)}"/>',
    ]
    for el in comp.elements:
        col = _hex(el.color)
        w = _line_width(el.scale)
        half = el.scale / 2.0
        dx, dy = math.cos(el.orientation), math.sin(el.orientation)
        if el.kind == "point":
            parts.append(f'<circle cx="{el.x:.2f}" cy="{el.y:.2f}" r="{half:.2f}" fill="{col}"/>')
        elif el.kind == "straight_line":
            parts.append(
                f'<line x1="{el.x - dx * half:.2f}" y1="{el.y - dy * half:.2f}" '
                f'x2="{el.x + dx * half:.2f}" y2="{el.y + dy * half:.2f}" '
                f'stroke="{col}" stroke-width="{w}"/>'
            )
        elif el.kind == "angular_line":
            a2 = el.orientation + (math.pi / 2 if el.bend < 0.5 else -math.pi / 2)
            pts = (
                f"{el.x - dx * half:.2f},{el.y - dy * half:.2f} {el.x:.2f},{el.y:.2f} "
                f"{el.x + math.cos(a2) * half:.2f},{el.y + math.sin(a2) * half:.2f}"
            )
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="{w}"/>'
            )
        elif el.kind == "curved_line":
            px, py = -dy, dx
            amp = el.scale * 0.4 * (el.bend - 0.5) * 2.0
            parts.append(
                f'<path d="M {el.x - dx * half:.2f} {el.y - dy * half:.2f} '
                f"Q {el.x + px * amp:.2f} {el.y + py * amp:.2f} "
                f'{el.x + dx * half:.2f} {el.y + dy * half:.2f}" '
                f'fill="none" stroke="{col}" stroke-width="{w}"/>'
            )
        elif el.kind == "circle":
            style = f'fill="{col}"' if el.filled else f'fill="none" stroke="{col}" stroke-width="3"'
            parts.append(f'<circle cx="{el.x:.2f}" cy="{el.y:.2f}" r="{half:.2f}" {style}/>')
        else:  # triangle, square
            angles = (
                (math.pi / 2, math.pi / 2 + 2 * math.pi / 3, math.pi / 2 + 4 * math.pi / 3)
                if el.kind == "triangle"
                else (math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4)
            )
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in _polygon(el, angles))
            style = f'fill="{col}"' if el.filled else f'fill="none" stroke="{col}" stroke-width="3"'
            parts.append(f'<polygon points="{pts}" {style}/>')
    parts.append("</svg>")
    return "\n".join(parts)
