"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they
complete. Tolerances are fixed here, not calibrated elsewhere.
"""

import math
import random
import time
from dataclasses import replace

import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy import stats as scipy_stats

from evoart.analytics import replay_session
from evoart.backend import ImageStore, ProceduralBackend, make_render_callback
from evoart.chromosome import SEED_BOUND, Chromosome, random_chromosome, validate
from evoart.genetics import (
    apply_ballot,
    evolve,
    export_model,
    dump_model,
    initial_generation,
    initial_state,
    load_model,
    sample_prompt,
    select_parent_pair,
    update_weights,
)
from evoart.guideline import default_schema, schema_from_doc, schema_to_doc
from evoart.render import compose, render
from evoart.service import create_app
from evoart.simulate import simulate

SCHEMA = default_schema()


def report(name: str, failures: list[str]) -> None:
    status = "PASS" if not failures else "FAIL"
    detail = "" if not failures else "  [" + "; ".join(failures) + "]"
    print(f"\n[{status}] {name}{detail}")
    assert not failures, f"{name}: " + "; ".join(failures)


# ---------------------------------------------------------------------------
# 1. Convergence reproduction
# ---------------------------------------------------------------------------


def test_convergence_reproduction():
    failures = []
    t0 = time.perf_counter()
    rep = simulate(SCHEMA, runs=50, iterations=5, seed=0)
    elapsed = time.perf_counter() - t0
    final = rep.rows[-1]
    for attr, rate in sorted(final.match_rate.items()):
        if rate < 0.75:
            failures.append(f"discrete '{attr}' argmax match {rate:.2f} < 0.75")
    for attr, rate in sorted(final.continuous_within.items()):
        if rate < 0.75:
            failures.append(f"continuous '{attr}' within-0.20 rate {rate:.2f} < 0.75")
    if elapsed >= 60.0:
        failures.append(f"runtime {elapsed:.1f}s >= 60s")
    report(
        "convergence: 50 runs, 4/3/2/1 voter, by iteration 5 argmax matches and "
        "model means within 0.20 in >=75% of runs, under 60s",
        failures,
    )


# ---------------------------------------------------------------------------
# 2. Wall-clock: 5-iteration interactive-equivalent session at 512x512
# ---------------------------------------------------------------------------


def test_wall_clock_interactive_session(tmp_path):
    failures = []
    store = ImageStore(tmp_path / "images")
    backend = ProceduralBackend(store)
    render_cb = make_render_callback(backend, backend, SCHEMA, width=512, height=512)
    rng = random.Random(2024)

    t0 = time.perf_counter()
    generation = initial_generation(SCHEMA, 16, rng, render=render_cb)
    state = initial_state(SCHEMA)
    for _ in range(5):
        ids = [i.id for i in generation.individuals]
        ballot = {ids[0]: 4, ids[1]: 3, ids[2]: 2, ids[3]: 1}
        generation, state = evolve(
            generation, ballot, state, SCHEMA, rng, render=render_cb
        )
    elapsed = time.perf_counter() - t0

    if elapsed > 10.0:
        failures.append(f"session took {elapsed:.2f}s > 10s budget")
    missing = [i.id for i in generation.individuals if not store.exists(i.image_ref)]
    if missing:
        failures.append(f"missing rendered images for {missing}")
    report(
        f"wall clock: 16 images/iteration x 5 iterations at 512x512 in "
        f"{elapsed:.2f}s (budget 10s)",
        failures,
    )


# ---------------------------------------------------------------------------
# 3. Roulette statistics
# ---------------------------------------------------------------------------


def test_roulette_statistics():
    failures = []
    g = initial_generation(SCHEMA, 16, random.Random(7))
    ids = [i.id for i in g.individuals]
    votes = {ids[0]: 4, ids[1]: 3, ids[2]: 2, ids[3]: 1}
    voted = apply_ballot(g, votes)
    total = sum(votes.values())
    rng = random.Random(0)
    draws = 100_000
    counts = {i: 0 for i in ids}
    for _ in range(draws):
        counts[select_parent_pair(voted, rng)[0].id] += 1

    for ind_id in ids:
        expected_p = votes.get(ind_id, 0) / total
        err = abs(counts[ind_id] / draws - expected_p)
        if err > 0.01:
            failures.append(f"{ind_id}: |freq - P| = {err:.4f} > 0.01")

    positive = [i for i in ids if votes.get(i, 0) > 0]
    observed = [counts[i] for i in positive]
    expected = [votes[i] / total * draws for i in positive]
    chi = scipy_stats.chisquare(observed, expected)
    if chi.pvalue <= 0.01:
        failures.append(f"chi-square p = {chi.pvalue:.4f} <= 0.01")
    if any(counts[i] for i in ids if votes.get(i, 0) == 0):
        failures.append("zero-fitness individual was selected")
    report("roulette: first-draw frequencies match P_i = F_i/sum(F) within 0.01 "
           "over 1e5 draws, chi-square alpha 0.01", failures)


# ---------------------------------------------------------------------------
# 4. Weight-update oracle
# ---------------------------------------------------------------------------


def test_weight_update_oracle():
    failures = []
    rng = random.Random(99)
    mismatches = 0
    for trial in range(1000):
        n = rng.choice((4, 8, 16))
        g = initial_generation(SCHEMA, n, rng)
        ballot = {
            i.id: rng.randint(0, 5) for i in g.individuals if rng.random() < 0.7
        }
        voted = apply_ballot(g, ballot)
        state = initial_state(SCHEMA)
        engine = update_weights(state, voted).weights

        oracle = dict(state.weights)
        for ind in voted.individuals:
            carried = {v for vals in ind.chromosome.discrete_genes.values() for v in vals}
            for v in carried:
                oracle[v] += ind.votes
        if engine != oracle:
            mismatches += 1
    if mismatches:
        failures.append(f"{mismatches}/1000 updates differ from brute force")
    report("weight updates equal an independent brute-force accumulator exactly "
           "on 1000 random (generation, ballot) pairs", failures)


# ---------------------------------------------------------------------------
# 5. GA closure over 1e4 evolve steps
# ---------------------------------------------------------------------------


def test_ga_closure_ten_thousand_steps():
    failures = []
    rng = random.Random(31337)
    steps_done = 0
    invalid = size_wrong = seed_wrong = weight_drop = 0

    plans = [(4, 8, 1000), (16, 10, 200)]  # (n, steps per chain, chains)
    for n, chain_len, chains in plans:
        for _ in range(chains):
            g = initial_generation(SCHEMA, n, rng)
            state = initial_state(SCHEMA)
            for _ in range(chain_len):
                ballot = {
                    i.id: rng.randint(0, 3)
                    for i in g.individuals
                    if rng.random() < 0.5
                }
                prev_weights = state.weights
                g, state = evolve(g, ballot, state, SCHEMA, rng)
                steps_done += 1
                if len(g.individuals) != n:
                    size_wrong += 1
                for ind in g.individuals:
                    if validate(ind.chromosome, SCHEMA):
                        invalid += 1
                    if not (0 <= ind.chromosome.seed < SEED_BOUND):
                        seed_wrong += 1
                if any(state.weights[v] < prev_weights[v] for v in prev_weights):
                    weight_drop += 1

    if steps_done != 10_000:
        failures.append(f"ran {steps_done} steps, wanted 10000")
    if invalid:
        failures.append(f"{invalid} invalid chromosomes")
    if size_wrong:
        failures.append(f"{size_wrong} generations with wrong size")
    if seed_wrong:
        failures.append(f"{seed_wrong} out-of-range seeds")
    if weight_drop:
        failures.append(f"{weight_drop} weight decreases")
    report("closure: 1e4 evolve steps keep chromosomes valid, population size n, "
           "seeds in range, weights non-decreasing", failures)


# ---------------------------------------------------------------------------
# 6. Renderer monotonicity
# ---------------------------------------------------------------------------


def _sweep_chromosome(**continuous):
    cont = {"brightness": 0.5, "structure": 0.5, "parallel": 0.5}
    cont.update(continuous)
    return Chromosome(
        "Kandinsky",
        {
            "hue": ("blue",),
            "form_point": ("point",),
            "form_line": ("straight_line", "angular_line"),
            "form_plane": ("square",),
        },
        cont,
        seed=4242,
    )


def test_renderer_monotonicity():
    failures = []
    lum_w = np.array([0.2126, 0.7152, 0.0722])

    lum = []
    for k in range(10):
        img = render(_sweep_chromosome(brightness=k / 9.0), 512, 512)
        lum.append(float((np.asarray(img, dtype=np.float64) @ lum_w).mean()))
    bad = sum(lum[i + 1] >= lum[i] for i in range(9))
    if bad:
        failures.append(f"luminance sweep has {bad} non-decreasing steps: {lum}")

    dist = []
    for k in range(10):
        comp = compose(_sweep_chromosome(structure=k / 9.0), 512, 512)
        cx, cy = comp.width / 2, comp.height / 2
        dist.append(
            sum(math.hypot(e.x - cx, e.y - cy) for e in comp.elements) / len(comp.elements)
        )
    bad = sum(dist[i + 1] >= dist[i] for i in range(9))
    if bad:
        failures.append(f"distance sweep has {bad} non-decreasing steps: {dist}")

    align = []
    for k in range(10):
        comp = compose(_sweep_chromosome(parallel=k / 9.0), 512, 512)
        oriented = [e for e in comp.elements if e.kind not in ("point", "circle")]
        err = 0.0
        for e in oriented:
            a = e.orientation % math.pi
            err += min(a, abs(a - math.pi / 2), abs(a - math.pi))
        align.append(err / len(oriented))
    bad = sum(align[i + 1] >= align[i] for i in range(9))
    if bad:
        failures.append(f"alignment sweep has {bad} non-decreasing steps: {align}")

    report("renderer: luminance, distance-to-center, and edge alignment are "
           "monotone over 10-point gene sweeps with zero violations", failures)


# ---------------------------------------------------------------------------
# 7. Determinism and replay
# ---------------------------------------------------------------------------


def _drive_session(store_dir, ballots, seed=777):
    with TestClient(create_app(store_dir)) as client:
        created = client.post(
            "/sessions", json={"n": 8, "width": 64, "height": 64, "master_seed": seed}
        ).json()
        sid = created["session"]
        for k, picks in enumerate(ballots):
            pop = client.get(f"/sessions/{sid}/population").json()
            ids = [i["id"] for i in pop["individuals"]]
            ballot = {ids[j]: v for j, v in picks.items()}
            client.post(
                f"/sessions/{sid}/votes", json={"ballot": ballot, "nonce": f"n{k}"}
            )
        return sid


def test_determinism_and_replay(tmp_path):
    failures = []
    ballots = [{0: 3, 2: 1}, {1: 2}, {0: 1, 3: 4}]

    sids = []
    logs = []
    for name in ("run-a", "run-b"):
        sid = _drive_session(tmp_path / name, ballots)
        sids.append(sid)
        logs.append((tmp_path / name / "sessions" / f"{sid}.jsonl").read_bytes())
    if sids[0] != sids[1]:
        failures.append("session ids differ for identical configs")
    if logs[0] != logs[1]:
        failures.append("identical (seed, ballots) produced different log bytes")

    from evoart.analytics import SessionLogStore

    log = SessionLogStore(tmp_path / "run-a" / "sessions").load(sids[0])
    try:
        replay_session(log, strict=True)
    except ValueError as exc:
        failures.append(f"replay mismatch: {exc}")

    # crash-restart: drop all in-memory state after two ballots, resume, and
    # finish; the transcript must match the uninterrupted run's bytes
    crashed_dir = tmp_path / "run-crash"
    sid = _drive_session(crashed_dir, ballots[:2])
    with TestClient(create_app(crashed_dir)) as client:  # fresh process state
        pop = client.get(f"/sessions/{sid}/population").json()
        if pop["index"] != 2:
            failures.append(f"restart resumed at generation {pop['index']}, wanted 2")
        ids = [i["id"] for i in pop["individuals"]]
        ballot = {ids[j]: v for j, v in ballots[2].items()}
        client.post(f"/sessions/{sid}/votes", json={"ballot": ballot, "nonce": "n2"})
    resumed = (crashed_dir / "sessions" / f"{sid}.jsonl").read_bytes()
    if resumed != logs[0]:
        failures.append("crash-restart transcript differs from uninterrupted run")

    report("determinism: identical (master seed, ballots) give byte-identical "
           "logs; replay reproduces snapshots; crash-restart resumes and "
           "converges to the same transcript", failures)


# ---------------------------------------------------------------------------
# 8. Model round trip
# ---------------------------------------------------------------------------


def test_model_round_trip_frequencies():
    failures = []
    # pick-exactly-1 attributes make "frequencies match frozen weights" exact
    doc = schema_to_doc(SCHEMA)
    for attr_doc in doc["attributes"]:
        if attr_doc.get("kind") == "discrete":
            attr_doc["pick"] = [1, 1]
    schema = schema_from_doc(doc)

    rng = random.Random(5150)
    g = initial_generation(schema, 16, rng)
    state = initial_state(schema)
    for _ in range(3):
        ids = [i.id for i in g.individuals]
        ballot = {ids[0]: 4, ids[1]: 3, ids[2]: 2, ids[3]: 1}
        g, state = evolve(g, ballot, state, schema, rng)

    model = export_model(state, schema, session_id="round-trip")
    text = dump_model(model)
    loaded = load_model(text)
    if loaded != model:
        failures.append("loaded model differs from exported model")
    if dump_model(loaded) != text:
        failures.append("serialization is not byte-stable")

    n = 10_000
    counts: dict[str, int] = {v: 0 for v in schema.value_tokens}
    sample_rng = random.Random(6)
    for _ in range(n):
        c = sample_prompt(loaded, sample_rng)
        for vals in c.discrete_genes.values():
            for v in vals:
                counts[v] += 1
    for attr in schema.discrete_attributes:
        total_w = sum(loaded.weights[v] for v in attr.values)
        for v in attr.values:
            expected = loaded.weights[v] / total_w
            err = abs(counts[v] / n - expected)
            if err > 0.02:
                failures.append(f"value '{v}': |freq - weight| = {err:.4f} > 0.02")

    report("model round trip: finalize -> serialize -> load -> 1e4 samples match "
           "frozen weights within 0.02 per value", failures)


# ---------------------------------------------------------------------------
# 9. API conformance
# ---------------------------------------------------------------------------


def test_api_conformance_full_loop(tmp_path):
    failures = []
    with TestClient(create_app(tmp_path / "store")) as client:
        created = client.post("/sessions", json={"master_seed": 11}).json()
        sid = created["session"]
        if len(created["generation"]["individuals"]) != 16:
            failures.append("default population is not 16")

        pop = client.get(f"/sessions/{sid}/population").json()
        img = client.get(pop["individuals"][0]["image_url"])
        if img.status_code != 200 or img.content[:8] != b"\x89PNG\r\n\x1a\n":
            failures.append("population image not servable as PNG")

        for k in range(5):
            pop = client.get(f"/sessions/{sid}/population").json()
            ids = [i["id"] for i in pop["individuals"]]
            resp = client.post(
                f"/sessions/{sid}/votes",
                json={"ballot": {ids[0]: 3, ids[1]: 1}, "nonce": f"loop-{k}"},
            )
            if resp.status_code != 200:
                failures.append(f"vote {k} failed: {resp.status_code}")
        pop = client.get(f"/sessions/{sid}/population").json()
        if pop["index"] != 5:
            failures.append(f"after 5 ballots generation index is {pop['index']}")

        # duplicate nonce: replay the last ballot, generation must not advance
        ids = [i["id"] for i in pop["individuals"]]
        first = client.post(
            f"/sessions/{sid}/votes", json={"ballot": {ids[0]: 2}, "nonce": "dup"}
        ).json()
        again = client.post(
            f"/sessions/{sid}/votes", json={"ballot": {ids[0]: 2}, "nonce": "dup"}
        ).json()
        if first != again:
            failures.append("duplicate nonce returned a different response")
        if client.get(f"/sessions/{sid}/population").json()["index"] != 6:
            failures.append("duplicate nonce advanced the generation twice")

        stats = client.get(f"/sessions/{sid}/stats").json()
        if len(stats["iterations"]) != 7:
            failures.append(f"stats carry {len(stats['iterations'])} records, wanted 7")

        final = client.post(f"/sessions/{sid}/finalize")
        if final.status_code != 200:
            failures.append(f"finalize failed: {final.status_code}")
        model = load_model(final.json()["yaml"])
        if model.provenance["iterations"] != 6:
            failures.append("finalized model provenance misses iterations")

        sampled = client.post(f"/sessions/{sid}/sample", json={"count": 4}).json()
        if len(sampled["samples"]) != 4:
            failures.append("sample did not return 4 prompts")
        for s in sampled["samples"]:
            if client.get(s["image_url"]).status_code != 200:
                failures.append("sampled image not servable")
                break

    report("api: create -> view -> vote x5 -> finalize -> sample over HTTP with "
           "the procedural backend; duplicate nonce advances exactly once", failures)
