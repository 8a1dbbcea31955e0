import random
from dataclasses import replace

import pytest

from evoart.chromosome import random_chromosome, validate
from evoart.guideline import default_schema
from evoart.simulate import (
    ConvergenceReport,
    SimulatedUser,
    cast_ballot,
    random_target,
    similarity,
    simulate,
)
from evoart.genetics import initial_generation

SCHEMA = default_schema()


class TestSimilarity:
    def test_identical_is_one(self):
        c = random_chromosome(SCHEMA, random.Random(0))
        assert similarity(c, c, SCHEMA) == pytest.approx(1.0)

    def test_disjoint_and_max_distance_is_minus_one(self):
        target = random_chromosome(SCHEMA, random.Random(1))
        target = replace(
            target,
            discrete_genes={**target.discrete_genes, "hue": ("red",)},
            continuous_genes={"brightness": 0.0, "structure": 0.0, "parallel": 0.0},
        )
        other = replace(
            target,
            discrete_genes={"hue": ("blue",), "form_point": (), "form_line": (), "form_plane": ()},
            continuous_genes={"brightness": 1.0, "structure": 1.0, "parallel": 1.0},
        )
        target = replace(
            target,
            discrete_genes={"hue": ("red",), "form_point": (), "form_line": (), "form_plane": ()},
        )
        assert similarity(other, target, SCHEMA) == pytest.approx(-1.0)

    def test_half_overlap_zero_distance_is_half(self):
        target = random_chromosome(SCHEMA, random.Random(2))
        target = replace(
            target,
            discrete_genes={
                "hue": ("red", "blue"),
                "form_point": (),
                "form_line": (),
                "form_plane": (),
            },
        )
        c = replace(
            target,
            discrete_genes={
                "hue": ("red", "yellow"),
                "form_point": (),
                "form_line": (),
                "form_plane": (),
            },
        )
        assert similarity(c, target, SCHEMA) == pytest.approx(0.5)

    def test_extra_values_do_not_penalize(self):
        target = replace(
            random_chromosome(SCHEMA, random.Random(3)),
            discrete_genes={"hue": ("red",), "form_point": (), "form_line": (), "form_plane": ()},
        )
        more = replace(
            target,
            discrete_genes={
                "hue": ("red", "blue"),
                "form_point": ("point",),
                "form_line": (),
                "form_plane": (),
            },
        )
        assert similarity(more, target, SCHEMA) == pytest.approx(1.0)


class TestSimulatedUser:
    def test_budget_is_schedule_sum(self):
        user = SimulatedUser(random_chromosome(SCHEMA, random.Random(0)))
        assert user.budget == 10

    def test_empty_schedule_rejected(self):
        with pytest.raises(ValueError):
            SimulatedUser(random_chromosome(SCHEMA, random.Random(0)), schedule=())

    def test_ballot_covers_top_four(self):
        rng = random.Random(1)
        user = SimulatedUser(random_target(SCHEMA, rng))
        g = initial_generation(SCHEMA, 16, rng)
        ballot = cast_ballot(g, user, SCHEMA)
        assert sorted(ballot.values(), reverse=True) == [4, 3, 2, 1]
        ranked = sorted(
            g.individuals,
            key=lambda i: (-similarity(i.chromosome, user.target, SCHEMA), i.id),
        )
        assert set(ballot) == {i.id for i in ranked[:4]}


class TestRandomTarget:
    def test_every_discrete_attribute_nonempty(self):
        rng = random.Random(2)
        for _ in range(100):
            t = random_target(SCHEMA, rng)
            assert validate(t, SCHEMA) == []
            for attr in SCHEMA.discrete_attributes:
                assert len(t.discrete_genes[attr.id]) >= 1


class TestSimulate:
    def test_zero_iterations_reports_initial_state(self):
        report = simulate(SCHEMA, runs=5, iterations=0, seed=3)
        assert len(report.rows) == 1
        assert report.rows[0].iteration == 0

    def test_row_per_iteration(self):
        report = simulate(SCHEMA, runs=3, iterations=4, seed=4)
        assert [r.iteration for r in report.rows] == [0, 1, 2, 3, 4]

    def test_reproducible_reports(self):
        a = simulate(SCHEMA, runs=5, iterations=3, seed=5)
        b = simulate(SCHEMA, runs=5, iterations=3, seed=5)
        assert a.to_doc() == b.to_doc()

    def test_match_rate_improves_on_average(self):
        report = simulate(SCHEMA, runs=20, iterations=5, seed=6)
        assert report.rows[-1].mean_match_rate >= report.rows[0].mean_match_rate

    def test_table_renders(self):
        report = simulate(SCHEMA, runs=2, iterations=1, seed=7)
        text = report.table()
        assert "match:hue" in text
        assert len(text.splitlines()) == 3
