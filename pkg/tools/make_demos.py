"""Regenerate the shipped demonstration fixtures from action scripts.

Run from the repository root:  python tools/make_demos.py
"""

import pathlib

from stlworkbench.world import default_grid, initial_state, replay, save_demo

OUT = pathlib.Path(__file__).resolve().parent.parent / "src" / "stlworkbench" / "data" / "demos"

W, E, N, S = "moveW", "moveE", "moveN", "moveS"

SCRIPTS = {
    # Both reach the lamp corner within 15 seconds; only red crosses water
    # and bumps a wall on the way.
    "fig2_green": (
        {"robot": [6, 6]},
        [W, S, S, S, S, W, W, W, W, S, S, W],
    ),
    "fig2_red": (
        {"robot": [6, 6]},
        [W, W, W, W, S, S, E, S, S, S, W, W, S],
    ),
    # "turn on the lamp and pick up the cube": lamp lit at second 14,
    # pickup lands at second 19 (inside the inner window, past the outer).
    "run_lamp_cube": (
        {"robot": [7, 7]},
        [W, W, W, W, W, W, W, S, S, S, S, S, S, "toggleLamp", E, E, E, N, "pickUp"],
    ),
    # Constraint rows: compliant wander vs. wall bumps / water entry.
    "wall_pos": ({"robot": [4, 6]}, [S, S, E, S, S, S, S]),
    "wall_neg": ({"robot": [4, 6]}, [S, S, W, S, E]),
    "water_pos": ({"robot": [1, 1]}, [E, E, N, W, W, S]),
    "water_neg": ({"robot": [1, 1]}, [N, N, N]),
    # Single tasks.
    "pick_purple": ({"robot": [5, 2], "lampOn": True}, [W, W, "pickUp"]),
    "fire_off": ({"robot": [4, 1], "fireOn": True}, [E, "toggleFire"]),
    # Sequences (door pocket holds the green cube; key sits at (5,4)).
    "door_charge": (
        {"robot": [4, 4], "lampOn": True},
        [E, "pickUp", "toggleDoor", N, N, W, W, W, "wait", "wait", "wait", "plugCharger"],
    ),
    "goto_green": (
        {"robot": [4, 4], "lampOn": True},
        [E, "pickUp", "toggleDoor", E, E] + ["wait"] * 10 + ["pickUp"],
    ),
    "gate_green": (
        {"robot": [4, 4], "lampOn": True},
        [E, "pickUp", "toggleDoor", E, E, "wait", "wait", "pickUp"],
    ),
    # "lamp before cube": lamp lit at second 4, pickup at second 12.
    "lamp_before_cube": (
        {"robot": [3, 1]},
        [W, W, S, "toggleLamp", N, E, E, N, "wait", "wait", "wait", "pickUp"],
    ),
    # Multiple-choice alternatives.
    "lamp_on": ({"robot": [2, 1]}, [W, S, "toggleLamp"]),
    "fire_on": ({"robot": [4, 1]}, [E, "toggleFire"]),
    "chair_sit": ({"robot": [1, 4]}, [N, "sit"]),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    grid = default_grid()
    for name, (overrides, actions) in SCRIPTS.items():
        demo = replay(initial_state(grid, overrides), actions, grid)
        save_demo(demo, OUT / f"{name}.demo")
        print(f"{name}: {len(demo)} steps")


if __name__ == "__main__":
    main()
