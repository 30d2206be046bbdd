import pytest

from stlworkbench.formulas import parse_formula, satisfies
from stlworkbench.world import (
    ACTIONS,
    ATOM_REGISTRY,
    Demonstration,
    InconsistentDemo,
    ON_ROBOT,
    WorldError,
    atom_eval,
    default_grid,
    demo_to_trace,
    initial_state,
    inject_delays,
    load_demo,
    prefixes_as_negatives,
    replay,
    save_demo,
    state_record,
    state_space_size,
    step,
)


class TestGrid:
    def test_default_layout(self, grid):
        assert grid.width == grid.height == 8
        assert grid.lamp == (0, 0)
        assert set(grid.items) == {"doorKey", "greenCube", "purpleCube"}
        assert grid.robot_start not in grid.walls

    def test_registry_has_fifteen_atoms(self):
        assert len(ATOM_REGISTRY) == 15

    def test_state_space_exceeds_eight_billion(self, grid):
        assert state_space_size(grid) > 8_000_000_000


class TestStep:
    def test_plain_move(self, grid):
        s = initial_state(grid, {"robot": [1, 0]})
        assert step(s, "moveW", grid).robot == (0, 0)

    def test_wall_bump_keeps_position_and_flags(self, grid):
        s = initial_state(grid, {"robot": [2, 3]})
        bumped = step(s, "moveE", grid)  # (3,3) is a wall
        assert bumped.robot == (2, 3)
        assert bumped.wall_bump
        # flag clears on the next legal action
        assert not step(bumped, "moveS", grid).wall_bump

    def test_bounds_bump(self, grid):
        s = initial_state(grid, {"robot": [0, 0]})
        assert step(s, "moveW", grid).wall_bump

    def test_pickup_requires_light_away_from_lamp(self, grid):
        s = initial_state(grid, {"robot": [3, 2]})  # purple cube cell, lamp off
        assert step(s, "pickUp", grid).items()["purpleCube"] == (3, 2)
        lit = initial_state(grid, {"robot": [3, 2], "lampOn": True})
        assert step(lit, "pickUp", grid).items()["purpleCube"] == ON_ROBOT

    def test_pickup_next_to_lamp_works_in_dark(self, grid):
        s = initial_state(grid, {"robot": [0, 1], "items": {"doorKey": [0, 1]}})
        assert step(s, "pickUp", grid).items()["doorKey"] == ON_ROBOT

    def test_carried_item_follows_robot_and_drop(self, grid):
        s = initial_state(grid, {"robot": [3, 2], "lampOn": True})
        s = step(s, "pickUp", grid)
        s = step(s, "moveW", grid)
        assert s.items()["purpleCube"] == ON_ROBOT
        dropped = step(s, "drop", grid)
        assert dropped.items()["purpleCube"] == (2, 2)

    def test_door_blocks_until_opened_with_key(self, grid):
        s = initial_state(grid, {"robot": [5, 4], "lampOn": True})
        assert step(s, "moveE", grid).robot == (5, 4)  # closed door is impassable
        assert not step(s, "toggleDoor", grid).door_open  # no key
        s = step(s, "pickUp", grid)  # key sits at (5,4)
        s = step(s, "toggleDoor", grid)
        assert s.door_open
        assert step(s, "moveE", grid).robot == (6, 4)

    def test_toggles_require_adjacency(self, grid):
        s = initial_state(grid, {"robot": [4, 4]})
        assert not step(s, "toggleLamp", grid).lamp_on
        near = initial_state(grid, {"robot": [1, 0]})
        assert step(near, "toggleLamp", grid).lamp_on

    def test_sit_only_on_chair_and_blocks_moves(self, grid):
        s = initial_state(grid, {"robot": [1, 5]})
        sitting = step(s, "sit", grid)
        assert sitting.sitting
        assert step(sitting, "moveN", grid).robot == (1, 5)
        assert not step(sitting, "stand", grid).sitting
        elsewhere = initial_state(grid, {"robot": [4, 4]})
        assert not step(elsewhere, "sit", grid).sitting

    def test_charger_plug(self, grid):
        s = initial_state(grid, {"robot": [2, 6]})
        assert step(s, "plugCharger", grid).charger_plugged

    def test_unknown_action_rejected(self, grid):
        with pytest.raises(WorldError):
            step(initial_state(grid), "fly", grid)

    def test_item_conservation_under_random_actions(self, grid):
        import random
        rng = random.Random(5)
        s = initial_state(grid, {"lampOn": True})
        for _ in range(300):
            s = step(s, rng.choice(ACTIONS), grid)
            places = s.items()
            assert len(places) == 3
            for pos in places.values():
                assert pos == ON_ROBOT or grid.in_bounds(pos)
            assert s.robot not in grid.walls and grid.in_bounds(s.robot)


class TestAtoms:
    def test_robot_at(self, grid):
        s = initial_state(grid, {"robot": [0, 0]})
        assert atom_eval(s, "robotAt", (0, 0), grid)
        assert not atom_eval(s, "robotAt", (1, 0), grid)

    def test_complement_pairs_pointwise(self, grid):
        import random
        rng = random.Random(9)
        pairs = [
            ("lampOn", "lampOff"),
            ("fireOn", "fireOff"),
            ("doorOpen", "doorClosed"),
            ("chargerPlugged", "chargerUnplugged"),
            ("robotSittingOnChair", "robotStanding"),
        ]
        s = initial_state(grid, {"lampOn": True})
        for _ in range(200):
            s = step(s, rng.choice(ACTIONS), grid)
            for pos_atom, neg_atom in pairs:
                assert atom_eval(s, pos_atom, (), grid) != atom_eval(s, neg_atom, (), grid)

    def test_water_and_items(self, grid):
        s = initial_state(grid, {"robot": [2, 3]})
        assert atom_eval(s, "robotAtWater", (), grid)
        assert atom_eval(s, "itemAt", ("purpleCube", 3, 2), grid)
        assert not atom_eval(s, "itemOnRobot", ("purpleCube",), grid)

    def test_unregistered_atom(self, grid):
        with pytest.raises(WorldError):
            atom_eval(initial_state(grid), "blorp", (), grid)
        with pytest.raises(WorldError):
            atom_eval(initial_state(grid), "itemOnRobot", ("ghostCube",), grid)


class TestDemos:
    def test_green_demo_satisfies_reach(self, grid, demos):
        trace = demo_to_trace(demos("fig2_green"), grid)
        assert satisfies(parse_formula("F[0,15](robotAt(0,0))"), trace, 0)

    def test_red_demo_marks_wall_and_water(self, grid, demos):
        trace = demo_to_trace(demos("fig2_red"), grid)
        assert any(rec["robotAtWall"] for rec in trace.records)
        assert any(rec["robotAtWater"] for rec in trace.records)

    def test_green_demo_avoids_hazards_everywhere(self, grid, demos):
        trace = demo_to_trace(demos("fig2_green"), grid)
        assert not any(rec["robotAtWall"] or rec["robotAtWater"] for rec in trace.records)

    def test_trace_length_equals_demo_length(self, grid, demos):
        demo = demos("run_lamp_cube")
        assert len(demo_to_trace(demo, grid)) == len(demo)

    def test_single_step_demo(self, grid):
        demo = replay(initial_state(grid), [], grid)
        assert len(demo) == 1
        assert len(demo_to_trace(demo, grid)) == 1

    def test_inconsistent_demo_detected(self, grid):
        demo = replay(initial_state(grid), ["moveE", "moveN"], grid)
        # tamper with an intermediate state
        steps = list(demo.steps)
        state, action = steps[1]
        from dataclasses import replace as dc_replace
        steps[1] = (dc_replace(state, robot=(7, 7)), action)
        with pytest.raises(InconsistentDemo):
            demo_to_trace(Demonstration(tuple(steps)), grid)

    def test_save_load_round_trip(self, grid, tmp_path):
        demo = replay(initial_state(grid), ["moveE", "moveN", "wait"], grid)
        path = tmp_path / "demo.jsonl"
        save_demo(demo, path)
        loaded = load_demo(path, grid)
        assert loaded.steps == demo.steps


class TestNegativesAndDelays:
    def test_prefix_counts(self, grid):
        demo = replay(initial_state(grid), ["moveE"] * 4, grid)  # 5 steps
        negs = prefixes_as_negatives(demo)
        assert len(negs) == 4
        assert all(d.label == "negative" for d in negs)
        short = Demonstration(demo.steps[:1])
        assert prefixes_as_negatives(short) == []

    def test_no_prefix_satisfies_selected_formula(self, grid, demos):
        phi = parse_formula("F[0,15](lampOn & F[0,10](itemOnRobot(purpleCube)))")
        demo = demos("run_lamp_cube")
        assert satisfies(phi, demo_to_trace(demo, grid), 0)
        for prefix in prefixes_as_negatives(demo):
            assert not satisfies(phi, demo_to_trace(prefix, grid), 0)

    def test_inject_delays_splice(self, grid):
        demo = replay(initial_state(grid), ["moveE", "moveN", "moveN"], grid)
        variants = inject_delays(demo, [(1, 2)], grid)
        assert len(variants) == 1
        assert len(variants[0]) == len(demo) + 2
        assert variants[0].label == "unlabeled"
        assert variants[0].actions[1:3] == ("wait", "wait")

    def test_delayed_variant_blows_deadline(self, grid, demos):
        phi = parse_formula("F[0,15](lampOn & F[0,10](itemOnRobot(purpleCube)))")
        demo = demos("run_lamp_cube")
        delayed = inject_delays(demo, [(1, 20)], grid)[0]
        assert not satisfies(phi, demo_to_trace(delayed, grid), 0)

    def test_empty_delay_list(self, grid, demos):
        assert inject_delays(demos("fig2_green"), [], grid) == []

    def test_bad_delay_position(self, grid, demos):
        with pytest.raises(WorldError):
            inject_delays(demos("fig2_green"), [(99, 1)], grid)


class TestRecords:
    def test_record_covers_nullary_atoms_and_signals(self, grid):
        rec = state_record(initial_state(grid), grid)
        for name, params in ATOM_REGISTRY.items():
            if not params:
                assert name in rec
        assert rec["robot_x"] == grid.robot_start[0]
        assert "purpleCube_x" in rec and "itemOnRobot(purpleCube)" in rec

    def test_carried_item_coordinates_are_sentinel(self, grid):
        s = initial_state(grid, {"robot": [3, 2], "lampOn": True})
        rec = state_record(step(s, "pickUp", grid), grid)
        assert rec["itemOnRobot(purpleCube)"] is True
        assert rec["purpleCube_x"] == -1
