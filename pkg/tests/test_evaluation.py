"""Corruption operators, ranking semantics, and suite aggregation."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from lawmix.env import (
    add_object, blank_state, set_player_inventory_item, transition,
)
from lawmix.evaluation import (
    MUTATORS, MixtureWorldModel, OracleWorldModel, RandomWorldModel,
    ScenarioPolicyError, aggregate_rows, evaluate_model, fidelity,
    generate_distractors, rank_candidates, run_scenario,
)
from lawmix.mixture import ReconstructionError, make_model, states_equal
from lawmix.scenarios import build_scenario, build_suite

BY_NAME = {m.name: m for m in MUTATORS}


def world_with_npc():
    state = blank_state(9, 9, "grass", (4, 4), seed=3)
    state, zid = add_object(state, "zombie", 7, 7)
    return state, zid


# ---------------------------------------------------------------------------
# Mutator catalogue.

def test_catalogue_names_and_count():
    assert len(MUTATORS) == 8
    assert set(BY_NAME) == {
        "IllegalMovement", "EntityPosition", "PlayerHealth", "EntityHealth",
        "CraftIllegalItem", "CollectIllegalMaterial", "PlaceIllegalItem",
        "Inventory",
    }


def test_illegal_movement_displaces_player_on_non_movement_action():
    state, _ = world_with_npc()
    truth = transition(state, "noop")
    mutator = BY_NAME["IllegalMovement"]
    assert not mutator.applicable(state, "move_up")
    assert mutator.applicable(state, "noop")
    for seed in range(10):
        mutant = mutator.mutate(state, "noop", truth, random.Random(seed))
        tp = truth.player.position
        mp = mutant.player.position
        assert abs(mp.x - tp.x) + abs(mp.y - tp.y) == 1


def test_entity_position_teleports_npc_far():
    state, zid = world_with_npc()
    truth = transition(state, "noop")
    mutator = BY_NAME["EntityPosition"]
    assert mutator.applicable(state, "noop")
    for seed in range(10):
        mutant = mutator.mutate(state, "noop", truth, random.Random(seed))
        before = truth.entity_by_id(zid).position
        after = mutant.entity_by_id(zid).position
        assert abs(after.x - before.x) + abs(after.y - before.y) >= 4
        assert mutant.player.position == truth.player.position


def test_player_health_stays_in_bounds_and_moves_one_or_two():
    state = blank_state(9, 9, "grass", (4, 4), seed=0)
    for start in (0, 1, 5, 9):
        base = set_player_inventory_item(state, "health", start)
        truth = transition(base, "noop")
        true_h = truth.player.inventory["health"]
        for seed in range(12):
            mutant = BY_NAME["PlayerHealth"].mutate(
                base, "noop", truth, random.Random(seed))
            got = mutant.player.inventory["health"]
            assert 0 <= got <= 9
            assert 1 <= abs(got - true_h) <= 2


def test_entity_health_excludes_neighborhood():
    state, zid = world_with_npc()
    truth = transition(state, "noop")
    h = truth.entity_by_id(zid).health
    seen = set()
    for seed in range(60):
        mutant = BY_NAME["EntityHealth"].mutate(
            state, "noop", truth, random.Random(seed))
        got = mutant.entity_by_id(zid).health
        assert got not in {h - 1, h, h + 1}
        assert 0 <= got <= 9
        seen.add(got)
    assert len(seen) > 3


def test_craft_illegal_item_swaps_output():
    state = blank_state(9, 9, "grass", (4, 4), seed=0)
    from lawmix.env import set_tile_material
    state = set_tile_material(state, 4, 5, "table")
    state = set_player_inventory_item(state, "wood", 1)
    action = "make_wood_pickaxe"
    truth = transition(state, action)
    assert truth.player.inventory["wood_pickaxe"] == 1
    mutator = BY_NAME["CraftIllegalItem"]
    assert mutator.applicable(state, action)
    assert not mutator.applicable(state, "do")
    for seed in range(10):
        mutant = mutator.mutate(state, action, truth, random.Random(seed))
        inv = mutant.player.inventory
        # the true output is rolled back and some other craftable appears
        assert inv["wood_pickaxe"] == 0
        others = [k for k in ("stone_pickaxe", "iron_pickaxe", "wood_sword",
                              "stone_sword", "iron_sword") if inv[k] > 0]
        assert len(others) == 1


def test_collect_illegal_material_swaps_resource():
    state = blank_state(9, 9, "grass", (4, 4), seed=0)
    from lawmix.env import set_tile_material, set_player_facing
    state = set_player_facing(state, 1, 0)
    state = set_tile_material(state, 5, 4, "tree")
    truth = transition(state, "do")
    assert truth.player.inventory["wood"] == 1
    for seed in range(10):
        mutant = BY_NAME["CollectIllegalMaterial"].mutate(
            state, "do", truth, random.Random(seed))
        inv = mutant.player.inventory
        assert inv["wood"] == 0
        gained = [k for k in ("stone", "coal", "iron", "diamond", "sapling",
                              "drink", "food")
                  if inv[k] > truth.player.inventory[k]]
        assert len(gained) == 1


def test_place_illegal_item_changes_faced_tile():
    state = blank_state(9, 9, "grass", (4, 4), seed=0)
    from lawmix.env import set_player_facing
    state = set_player_facing(state, 0, 1)
    state = set_player_inventory_item(state, "wood", 2)
    truth = transition(state, "place_table")
    assert truth.material_at(4, 5) == "table"
    for seed in range(10):
        mutant = BY_NAME["PlaceIllegalItem"].mutate(
            state, "place_table", truth, random.Random(seed))
        assert mutant.material_at(4, 5) != "table"
        assert mutant.material_at(4, 5) in (
            "stone", "furnace", "plant-sapling")


def test_inventory_scramble_differs_and_respects_caps():
    state = blank_state(9, 9, "grass", (4, 4), seed=0)
    truth = transition(state, "noop")
    rnd = random.Random(4)
    candidates = generate_distractors(
        state, "noop", truth, 8, rnd,
        mutators=(BY_NAME["Inventory"],))
    assert len(candidates) == 1
    name, mutant = candidates[0]
    assert name == "Inventory"
    assert not states_equal(mutant, truth)
    for key, value in mutant.player.inventory.items():
        assert 0 <= value <= 9


# ---------------------------------------------------------------------------
# Distractor generation.

def test_generate_distractors_distinct_operators_and_never_truth():
    state, _ = world_with_npc()
    truth = transition(state, "noop")
    rnd = random.Random(9)
    drawn = generate_distractors(state, "noop", truth, 8, rnd)
    names = [n for n, _ in drawn]
    assert len(names) == len(set(names))
    # craft and place operators cannot apply to a noop
    assert "CraftIllegalItem" not in names
    assert "PlaceIllegalItem" not in names
    assert 1 <= len(drawn) <= 8
    for _, candidate in drawn:
        assert not states_equal(candidate, truth)


def test_generate_distractors_respects_k():
    state, _ = world_with_npc()
    truth = transition(state, "noop")
    drawn = generate_distractors(state, "noop", truth, 2, random.Random(1))
    assert len(drawn) == 2


def test_generate_distractors_deterministic_given_seed():
    state, _ = world_with_npc()
    truth = transition(state, "noop")
    a = generate_distractors(state, "noop", truth, 8, random.Random(12))
    b = generate_distractors(state, "noop", truth, 8, random.Random(12))
    assert [n for n, _ in a] == [n for n, _ in b]
    for (_, ca), (_, cb) in zip(a, b):
        assert states_equal(ca, cb)


# ---------------------------------------------------------------------------
# Ranking semantics.

class FixedScores:
    def __init__(self, scores):
        self.scores = list(scores)
        self.cursor = 0

    def score(self, state, action, candidate):
        value = self.scores[self.cursor]
        self.cursor += 1
        return value

    def sample(self, state, action, rng):
        return state


DUMMY = object()


def test_rank_prefers_higher_score():
    model = FixedScores([-0.7, -15.4])
    outcome = rank_candidates(model, DUMMY, "noop", [DUMMY, DUMMY], 0)
    assert outcome.rank == 1
    assert outcome.reciprocal_rank == 1.0


def test_rank_counts_ties_against_the_truth():
    model = FixedScores([-1.0, -1.0, -5.0])
    outcome = rank_candidates(model, DUMMY, "noop", [DUMMY] * 3, 0)
    assert outcome.rank == 2


def test_rank_nonfinite_truth_goes_last_and_flags():
    model = FixedScores([float("nan"), -2.0, -3.0])
    outcome = rank_candidates(model, DUMMY, "noop", [DUMMY] * 3, 0)
    assert outcome.rank == 3
    assert outcome.nonfinite


def test_rank_nonfinite_distractor_never_beats_truth():
    model = FixedScores([float("-inf"), -50.0, float("inf")])
    outcome = rank_candidates(model, DUMMY, "noop", [DUMMY] * 3, 1)
    assert outcome.rank == 1
    assert outcome.nonfinite


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-100, 0, allow_nan=False), min_size=2,
                max_size=9),
       st.data())
def test_rank_invariant_to_candidate_order(scores, data):
    truth_index = data.draw(st.integers(0, len(scores) - 1))
    outcome = rank_candidates(FixedScores(scores), DUMMY, "noop",
                              [DUMMY] * len(scores), truth_index)
    # permuting candidates (with scores attached) must not change the rank
    order = list(range(len(scores)))
    rnd = random.Random(data.draw(st.integers(0, 10 ** 6)))
    rnd.shuffle(order)
    permuted = [scores[i] for i in order]
    new_truth = order.index(truth_index)
    again = rank_candidates(FixedScores(permuted), DUMMY, "noop",
                            [DUMMY] * len(scores), new_truth)
    assert outcome.rank == again.rank


def test_uniform_scores_give_harmonic_mrr():
    model = RandomWorldModel(2)
    total = 0.0
    trials = 20000
    for t in range(trials):
        outcome = rank_candidates(model, DUMMY, "noop", [DUMMY] * 9, t % 9)
        total += outcome.reciprocal_rank
    h9 = sum(1.0 / i for i in range(1, 10))
    assert total / trials == pytest.approx(h9 / 9, abs=0.02)


# ---------------------------------------------------------------------------
# Fidelity.

def test_oracle_fidelity_is_zero_on_deterministic_scenarios():
    scenario = build_scenario("craft_wood_pickaxe", 0)
    run = run_scenario(scenario)
    model = OracleWorldModel()
    for state, action, truth in run.transitions:
        outcome = fidelity(model, state, action, truth, random.Random(0))
        assert outcome.raw_distance == 0
        assert outcome.normalized_distance == 0.0
        assert not outcome.violation


def test_fidelity_counts_reconstruction_violations():
    state = blank_state(9, 9, "grass", (4, 4), seed=1)
    broken = state.copy()
    broken.player.inventory["wood"] = 5

    class Violating:
        def sample(self, s, a, rng):
            raise ReconstructionError(broken, ["objects/000001/position: x"])

        def score(self, s, a, c):
            return 0.0

    outcome = fidelity(Violating(), state, "noop", transition(state, "noop"),
                       random.Random(0))
    assert outcome.violation
    assert outcome.raw_distance >= 1


def test_single_wrong_leaf_costs_exactly_one():
    state = blank_state(9, 9, "grass", (4, 4), seed=1)
    truth = transition(state, "noop")

    class OneLeafOff:
        def sample(self, s, a, rng):
            wrong = truth.copy()
            wrong.player.inventory["wood"] = 7
            return wrong

        def score(self, s, a, c):
            return 0.0

    outcome = fidelity(OneLeafOff(), state, "noop", truth, random.Random(0))
    assert outcome.raw_distance == 1
    assert 0.0 < outcome.normalized_distance < 0.02


# ---------------------------------------------------------------------------
# Scenario execution and suite wiring.

def test_suite_has_23_scenarios_and_goals_pass():
    suite = build_suite(0)
    assert len(suite) == 23
    stochastic = {s.name for s in suite if not s.deterministic}
    assert stochastic == {"defeat_skeleton", "cow_movement"}
    for scenario in suite:
        run = run_scenario(scenario)
        assert run.goal_met, scenario.name
        assert len(run.transitions) == scenario.max_steps


def test_run_scenario_reports_policy_failures_with_step():
    scenario = build_scenario("collect_wood", 0)

    def exploding(state):
        raise RuntimeError("boom")

    scenario.policy = exploding
    with pytest.raises(ScenarioPolicyError) as err:
        run_scenario(scenario)
    assert err.value.step == 0

    scenario2 = build_scenario("collect_wood", 0)
    scenario2.policy = lambda state: "fly"
    with pytest.raises(ScenarioPolicyError):
        run_scenario(scenario2)


def test_aggregate_is_mean_of_scenario_means():
    rows = [
        {"ranked": 1, "mrr": 1.0, "rank_at_1": 1.0, "goal_met": True,
         "mean_raw_distance": 0.0, "mean_normalized_distance": 0.0},
        {"ranked": 100, "mrr": 0.0, "rank_at_1": 0.0, "goal_met": False,
         "mean_raw_distance": 2.0, "mean_normalized_distance": 0.5},
    ]
    agg = aggregate_rows(rows)
    assert agg["mrr"] == 0.5
    assert agg["rank_at_1"] == 0.5
    assert agg["mean_raw_distance"] == 1.0
    assert agg["scenarios"] == 2


def test_aggregate_excludes_unranked_scenarios_from_ranking_means():
    rows = [
        {"ranked": 4, "mrr": 0.8, "rank_at_1": 0.75, "goal_met": True,
         "mean_raw_distance": 1.0, "mean_normalized_distance": 0.1},
        {"ranked": 0, "mrr": 0.0, "rank_at_1": 0.0, "goal_met": True,
         "mean_raw_distance": 0.0, "mean_normalized_distance": 0.0},
    ]
    agg = aggregate_rows(rows)
    assert agg["mrr"] == 0.8
    assert agg["rank_at_1"] == 0.75


def test_zero_applicable_transitions_are_skipped_not_scored():
    craft_only = (BY_NAME["CraftIllegalItem"],)
    scenario = build_scenario("random_movement", 0)
    report = evaluate_model(OracleWorldModel(), [scenario],
                            mutators=craft_only, seed=0)
    row = report["scenarios"]["random_movement"]
    assert row["ranked"] == 0
    assert row["skipped"] == row["transitions"]
    assert report["skipped_transitions"] == row["transitions"]
    assert report["aggregate"]["all"]["mrr"] == 0.0


def test_evaluate_model_is_deterministic(law_library):
    suite = [build_scenario("collect_wood", 3),
             build_scenario("defeat_zombie", 3)]
    model = MixtureWorldModel(make_model(law_library))
    first = evaluate_model(model, suite, seed=5)
    suite2 = [build_scenario("collect_wood", 3),
              build_scenario("defeat_zombie", 3)]
    second = evaluate_model(model, suite2, seed=5)
    assert first == second


def test_report_shape(law_library):
    model = MixtureWorldModel(make_model(law_library))
    report = evaluate_model(model, [build_scenario("eat_cow", 0)], seed=1)
    row = report["scenarios"]["eat_cow"]
    for key in ("group", "deterministic", "goal_met", "transitions",
                "ranked", "skipped", "mrr", "rank_at_1", "nonfinite_flags",
                "mean_raw_distance", "mean_normalized_distance",
                "violations", "mutator_usage"):
        assert key in row
    assert "npc" in report["groups"]
    assert set(report["aggregate"]) == {"all", "deterministic"}
