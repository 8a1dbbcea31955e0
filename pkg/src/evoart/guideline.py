"""Attribute-value guideline: the gene vocabulary prompts are built from.

A guideline names one style token, an ordered list of discrete and
continuous attributes, and a table of derived tags (extra prompt tokens
triggered by discrete values, e.g. warm/cold temperature from hue).
Guidelines are immutable and fully validated at construction; the loader
accepts a small human-editable YAML dialect documented in the README.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

import yaml

DISCRETE = "discrete"
CONTINUOUS = "continuous"

DEFAULT_TEMPLATE = "{style}, {discrete}, {tags}, {lora}"
TEMPLATE_PLACEHOLDERS = ("style", "discrete", "tags", "lora")

_TOKEN_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_\-]*$")


class SchemaError(ValueError):
    """Malformed or inconsistent guideline document."""


@dataclass(frozen=True)
class Attribute:
    """One named axis of the guideline.

    Discrete attributes carry an ordered value vocabulary plus a
    ``pick`` range: how many of those values a single chromosome
    selects. Continuous attributes live on [0, 1] with a label for each
    endpoint; when a document declares a wider interval it is rescaled
    onto the unit interval and the original endpoints are kept in
    ``source_range``.
    """

    id: str
    kind: str
    values: tuple[str, ...] = ()
    pick: tuple[int, int] = (1, 1)
    labels: tuple[str, str] = ("low", "high")
    source_range: tuple[float, float] | None = None

    @property
    def is_discrete(self) -> bool:
        return self.kind == DISCRETE

    def to_unit(self, x: float) -> float:
        """Map a value expressed in the original (pre-rescale) units onto [0, 1]."""
        if self.source_range is None:
            return float(x)
        lo, hi = self.source_range
        return (float(x) - lo) / (hi - lo)


def discrete(attr_id: str, values, pick: tuple[int, int] = (1, 1)) -> Attribute:
    return Attribute(id=attr_id, kind=DISCRETE, values=tuple(values), pick=(int(pick[0]), int(pick[1])))


def continuous(attr_id: str, labels: tuple[str, str]) -> Attribute:
    return Attribute(id=attr_id, kind=CONTINUOUS, labels=(str(labels[0]), str(labels[1])))


@dataclass(frozen=True)
class AttributeSchema:
    """Validated, immutable guideline. Safe to share across threads."""

    style_token: str
    attributes: tuple[Attribute, ...]
    derived_tags: dict[str, tuple[str, ...]] = field(default_factory=dict)
    prompt_template: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(
            self, "derived_tags", {t: tuple(v) for t, v in self.derived_tags.items()}
        )
        _check_schema(self)

    @property
    def discrete_attributes(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.attributes if a.is_discrete)

    @property
    def continuous_attributes(self) -> tuple[Attribute, ...]:
        return tuple(a for a in self.attributes if not a.is_discrete)

    @property
    def value_tokens(self) -> tuple[str, ...]:
        """All discrete value tokens, in schema order."""
        return tuple(v for a in self.discrete_attributes for v in a.values)

    def attribute(self, attr_id: str) -> Attribute:
        for a in self.attributes:
            if a.id == attr_id:
                return a
        raise KeyError(attr_id)

    def tags_for(self, values) -> tuple[str, ...]:
        """Derived tags triggered by a set of discrete values, lexicographic order."""
        chosen = set(values)
        return tuple(sorted(t for t, trig in self.derived_tags.items() if chosen & set(trig)))


def _fail(msg: str) -> None:
    raise SchemaError(msg)


def _check_token(token, what: str) -> None:
    if not isinstance(token, str) or not _TOKEN_RE.match(token):
        _fail(f"{what} {token!r} is not a valid token")


def _check_schema(s: AttributeSchema) -> None:
    _check_token(s.style_token, "style token")
    if not s.attributes:
        _fail("schema has no attributes")
    seen_ids: set[str] = set()
    seen_values: set[str] = set()
    for a in s.attributes:
        _check_token(a.id, "attribute id")
        if a.id in seen_ids:
            _fail(f"duplicate attribute id '{a.id}'")
        seen_ids.add(a.id)
        if a.kind == DISCRETE:
            if not a.values:
                _fail(f"attribute '{a.id}' has an empty value set")
            lo, hi = a.pick
            if not (0 <= lo <= hi <= len(a.values)) or hi < 1:
                _fail(
                    f"attribute '{a.id}' pick range {lo}..{hi} out of bounds "
                    f"for {len(a.values)} values"
                )
            for v in a.values:
                _check_token(v, f"value in attribute '{a.id}':")
                if v in seen_values:
                    _fail(f"duplicate value token '{v}' (attribute '{a.id}')")
                seen_values.add(v)
        elif a.kind == CONTINUOUS:
            la, lb = a.labels
            if not la or not lb or la == lb:
                _fail(f"attribute '{a.id}' needs two distinct endpoint labels")
            if a.source_range is not None and a.source_range[0] >= a.source_range[1]:
                _fail(f"attribute '{a.id}' has a degenerate range")
        else:
            _fail(f"attribute '{a.id}' has unknown kind '{a.kind}'")
    if not any(a.is_discrete for a in s.attributes):
        _fail("schema needs at least one discrete attribute")
    if not any(not a.is_discrete for a in s.attributes):
        _fail("schema needs at least one continuous attribute")
    for tag, triggers in s.derived_tags.items():
        _check_token(tag, "derived tag")
        if tag in seen_values:
            _fail(f"derived tag '{tag}' collides with a value token")
        if not triggers:
            _fail(f"derived tag '{tag}' has no trigger values")
        for v in triggers:
            if v not in seen_values:
                _fail(f"derived tag '{tag}' references unknown value '{v}'")
    unknown = [
        m for m in re.findall(r"{(\w+)}", s.prompt_template) if m not in TEMPLATE_PLACEHOLDERS
    ]
    if unknown:
        _fail(f"prompt template uses unknown placeholder '{unknown[0]}'")


def default_schema() -> AttributeSchema:
    """The built-in Kandinsky Bauhaus guideline used throughout the project."""
    return AttributeSchema(
        style_token="Kandinsky",
        attributes=(
            discrete("hue", ("red", "yellow", "blue", "orange", "green", "violet"), pick=(1, 2)),
            discrete("form_point", ("point",), pick=(0, 1)),
            discrete("form_line", ("straight_line", "curved_line", "angular_line"), pick=(0, 2)),
            discrete("form_plane", ("triangle", "square", "circle"), pick=(0, 2)),
            continuous("brightness", ("light", "dark")),
            continuous("structure", ("acentric", "centric")),
            continuous("parallel", ("inner", "external")),
        ),
        derived_tags={
            "warm": ("red", "yellow", "orange"),
            "cold": ("green", "blue", "violet"),
        },
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def schema_to_doc(s: AttributeSchema) -> dict:
    attrs = []
    for a in s.attributes:
        if a.is_discrete:
            attrs.append(
                {"id": a.id, "kind": DISCRETE, "values": list(a.values), "pick": list(a.pick)}
            )
        else:
            doc = {
                "id": a.id,
                "kind": CONTINUOUS,
                "range": [0.0, 1.0],
                "labels": list(a.labels),
            }
            if a.source_range is not None:
                doc["source_range"] = [float(a.source_range[0]), float(a.source_range[1])]
            attrs.append(doc)
    doc = {
        "style": s.style_token,
        "template": s.prompt_template,
        "attributes": attrs,
        "tags": {t: list(v) for t, v in s.derived_tags.items()},
    }
    return doc


def schema_from_doc(doc) -> AttributeSchema:
    if not isinstance(doc, dict):
        _fail("schema document is not a mapping")
    try:
        style = doc["style"]
        attr_docs = doc["attributes"]
    except (KeyError, TypeError):
        _fail("schema document needs 'style' and 'attributes' keys")
    if not isinstance(attr_docs, list):
        _fail("'attributes' must be a list")
    attributes = []
    for ad in attr_docs:
        if not isinstance(ad, dict) or "id" not in ad:
            _fail("every attribute needs an 'id'")
        aid = ad["id"]
        kind = ad.get("kind", DISCRETE if "values" in ad else CONTINUOUS)
        if kind == DISCRETE:
            values = ad.get("values")
            if not isinstance(values, list):
                _fail(f"attribute '{aid}' needs a 'values' list")
            pick = ad.get("pick", [1, 1])
            if not (isinstance(pick, list) and len(pick) == 2):
                _fail(f"attribute '{aid}' pick must be a [min, max] pair")
            attributes.append(discrete(aid, values, (pick[0], pick[1])))
        elif kind == CONTINUOUS:
            labels = ad.get("labels", ["low", "high"])
            if not (isinstance(labels, list) and len(labels) == 2):
                _fail(f"attribute '{aid}' labels must be a [low, high] pair")
            rng = ad.get("range", [0.0, 1.0])
            if not (isinstance(rng, list) and len(rng) == 2):
                _fail(f"attribute '{aid}' range must be a [lo, hi] pair")
            lo, hi = float(rng[0]), float(rng[1])
            if lo >= hi:
                _fail(f"attribute '{aid}' has a degenerate range [{lo}, {hi}]")
            source = ad.get("source_range")
            if (lo, hi) != (0.0, 1.0):
                # Non-unit interval: rescale onto [0, 1], remember the endpoints.
                source = [lo, hi]
            attr = continuous(aid, (labels[0], labels[1]))
            if source is not None:
                attr = Attribute(
                    id=attr.id,
                    kind=attr.kind,
                    labels=attr.labels,
                    source_range=(float(source[0]), float(source[1])),
                )
            attributes.append(attr)
        else:
            _fail(f"attribute '{aid}' has unknown kind '{kind}'")
    tags = doc.get("tags", {})
    if not isinstance(tags, dict):
        _fail("'tags' must be a mapping of tag -> trigger values")
    return AttributeSchema(
        style_token=style,
        attributes=tuple(attributes),
        derived_tags={t: tuple(v) for t, v in tags.items()},
        prompt_template=doc.get("template", DEFAULT_TEMPLATE),
    )


def dump_schema(s: AttributeSchema) -> str:
    return yaml.safe_dump(schema_to_doc(s), sort_keys=False, default_flow_style=None)


def load_schema(text: str) -> AttributeSchema:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"cannot parse schema document: {exc}") from exc
    return schema_from_doc(doc)


def schema_hash(s: AttributeSchema) -> str:
    canonical = json.dumps(schema_to_doc(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
