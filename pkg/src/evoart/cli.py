"""Command line entry points: serve, render, simulate, export-model, sample."""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

import yaml

from .analytics import SessionLogStore, replay_session
from .chromosome import chromosome_from_doc, to_prompt, validate
from .genetics import dump_model, export_model, load_model, sample_prompt
from .guideline import default_schema, load_schema
from .render import compose, composition_svg, render_png


def _load_schema_arg(path: str | None):
    if path is None:
        return default_schema()
    return load_schema(Path(path).read_text())


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    if args.backend == "remote" and not args.remote_url:
        print("--backend remote needs --remote-url", file=sys.stderr)
        return 1
    static = Path(args.ui) if args.ui else None
    app = create_app(
        args.store,
        static_dir=static,
        default_backend=args.backend,
        default_backend_params={"url": args.remote_url} if args.backend == "remote" else {},
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_render(args) -> int:
    schema = _load_schema_arg(args.config)
    doc = yaml.safe_load(Path(args.chromosome).read_text())
    c = chromosome_from_doc(doc)
    problems = validate(c, schema)
    if problems:
        print("invalid chromosome:", file=sys.stderr)
        for p in problems:
            print(f"  - {p}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.write_bytes(render_png(c, args.width, args.height))
    print(f"wrote {out}")
    if args.svg:
        Path(args.svg).write_text(composition_svg(compose(c, args.width, args.height)))
        print(f"wrote {args.svg}")
    print(f"prompt: {to_prompt(c, schema).text}")
    return 0


def _cmd_simulate(args) -> int:
    from .simulate import simulate

    schema = _load_schema_arg(args.config)
    report = simulate(
        schema,
        runs=args.runs,
        iterations=args.iterations,
        seed=args.seed,
        n=args.population,
        schedule=tuple(int(x) for x in args.schedule.split("/")),
    )
    print(report.table())
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_doc(), indent=2, sort_keys=True) + "\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_export_model(args) -> int:
    store = SessionLogStore(Path(args.log).parent)
    log = store.load_path(args.log)
    schema, state, _generation, _rng = replay_session(log, strict=True)
    model = export_model(state, schema, session_id=log.session_id)
    Path(args.out).write_text(dump_model(model))
    print(f"wrote {args.out} ({model.provenance['iterations']} iterations)")
    return 0


def _cmd_sample(args) -> int:
    model = load_model(Path(args.model).read_text())
    rng = random.Random(args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    generate = None
    if args.backend == "remote":
        if not args.remote_url:
            print("--backend remote needs --remote-url", file=sys.stderr)
            return 1
        from .backend import (
            ImageStore,
            ProceduralBackend,
            RemoteBackend,
            build_request,
            generate_with_fallback,
        )

        store = ImageStore(out_dir / ".cache")
        remote = RemoteBackend(args.remote_url, store)
        fallback = ProceduralBackend(store)

        def generate(c):  # noqa: F811
            req = build_request(c, model.schema, width=args.width, height=args.height)
            ref, degraded = generate_with_fallback(remote, fallback, req)
            return store.get(ref.id), degraded

    manifest = []
    for k in range(args.count):
        c = sample_prompt(model, rng)
        name = f"sample-{k:02d}.png"
        if generate is None:
            data, degraded = render_png(c, args.width, args.height), False
        else:
            data, degraded = generate(c)
        (out_dir / name).write_bytes(data)
        prompt = to_prompt(c, model.schema)
        manifest.append(
            {"file": name, "prompt": prompt.text, "seed": c.seed, "degraded": degraded}
        )
        print(f"{name}  {prompt.text}")
    (out_dir / "prompts.jsonl").write_text(
        "".join(json.dumps(m, sort_keys=True) + "\n" for m in manifest)
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evoart",
        description="Vote-driven genetic optimization of abstract-art prompts",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--store", default="./evoart-store", help="image + session log directory")
    p.add_argument("--ui", default=None, help="directory of static UI files to mount at /ui")
    p.add_argument("--backend", choices=("procedural", "remote"), default="procedural",
                   help="default image backend for new sessions")
    p.add_argument("--remote-url", default=None, help="txt2img service URL for --backend remote")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("render", help="render one chromosome file to PNG (and SVG)")
    p.add_argument("chromosome", help="chromosome document (YAML/JSON)")
    p.add_argument("--config", default=None, help="schema file (defaults to the built-in)")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--svg", default=None, help="also write the composition as SVG")
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("simulate", help="run simulated-user convergence experiments")
    p.add_argument("--config", default=None, help="schema file (defaults to the built-in)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--population", type=int, default=16)
    p.add_argument("--schedule", default="4/3/2/1", help="votes for the top-ranked individuals")
    p.add_argument("--out", default=None, help="write the report as JSON")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("export-model", help="replay a session log and export its model")
    p.add_argument("--log", required=True, help="session log (.jsonl)")
    p.add_argument("--out", required=True, help="output model document (YAML)")
    p.set_defaults(func=_cmd_export_model)

    p = sub.add_parser("sample", help="sample prompts/images from an exported model")
    p.add_argument("--model", required=True, help="model document (YAML)")
    p.add_argument("--count", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--height", type=int, default=512)
    p.add_argument("--backend", choices=("procedural", "remote"), default="procedural")
    p.add_argument("--remote-url", default=None, help="txt2img service URL for --backend remote")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_sample)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
