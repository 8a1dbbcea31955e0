"""evoart: vote-driven genetic optimization of text-to-image prompts.

The library evolves prompt chromosomes (style token, discrete
attribute values, continuous attribute values, generation seed) toward
a user's taste: each iteration the user votes on a grid of images,
votes update an additive weight per discrete value and a normal model
per continuous attribute, and roulette selection + crossover + mutation
breed the next population. The frozen preference structures export as a
standalone prompting model that keeps sampling on-taste prompts with no
further feedback.

Images come from a pluggable backend: a deterministic procedural
renderer (geometric compositions, in-process, no GPU) or any
Stable-Diffusion-compatible txt2img HTTP service.
"""

from .guideline import (
    Attribute,
    AttributeSchema,
    SchemaError,
    continuous,
    default_schema,
    discrete,
    dump_schema,
    load_schema,
    schema_from_doc,
    schema_hash,
    schema_to_doc,
)
from .chromosome import (
    SEED_BOUND,
    Chromosome,
    PromptText,
    chromosome_from_doc,
    chromosome_to_doc,
    random_chromosome,
    to_prompt,
)
from .chromosome import validate as validate_chromosome
from .genetics import (
    EvolutionState,
    Generation,
    Individual,
    NormalModel,
    OptimizedPromptingModel,
    VARIANCE_FLOOR,
    apply_ballot,
    crossover,
    dump_model,
    evolve,
    export_model,
    initial_generation,
    initial_state,
    load_model,
    model_from_doc,
    model_to_doc,
    mutate,
    sample_prompt,
    select_parent_pair,
    update_continuous,
    update_weights,
)
from .render import (
    Composition,
    Element,
    PALETTES,
    compose,
    composition_svg,
    rasterize,
    render,
    render_png,
)
from .backend import (
    BackendError,
    Health,
    ImageRef,
    ImageStore,
    ProceduralBackend,
    RemoteBackend,
    RenderRequest,
    build_request,
    generate_with_fallback,
    make_render_callback,
)
from .analytics import (
    IterationStats,
    LogRecord,
    SessionLog,
    SessionLogStore,
    StreamSeries,
    compute_stats,
    replay_session,
    stream,
)
from .simulate import ConvergenceReport, SimulatedUser, random_target, similarity, simulate

__version__ = "0.1.0"
