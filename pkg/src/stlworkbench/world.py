"""Grid-world environment: layout, dynamics, atoms, and demonstrations.

The world is an 8x8 grid by default, with wall and water cells, fixed
fixtures (lamp, fire, door, charger, chair) and movable items (doorKey,
greenCube, purpleCube).  Dynamics are deterministic and total: illegal
actions are no-ops, so exploration never crashes.  An attempted move into
a wall or out of bounds leaves the robot in place but raises a bump flag
on the resulting state, which is how ``robotAtWall`` becomes observable on
traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources

from .formulas import Trace

ACTIONS = (
    "moveN",
    "moveS",
    "moveE",
    "moveW",
    "pickUp",
    "drop",
    "toggleLamp",
    "toggleFire",
    "toggleDoor",
    "plugCharger",
    "sit",
    "stand",
    "wait",
)

_MOVES = {"moveN": (0, 1), "moveS": (0, -1), "moveE": (1, 0), "moveW": (-1, 0)}

ON_ROBOT = "onRobot"

# Registry of the 15 atoms: name -> parameter schema.
ATOM_REGISTRY = {
    "robotAt": (("x", "coordinate"), ("y", "coordinate")),
    "robotAtWall": (),
    "robotAtWater": (),
    "lampOn": (),
    "lampOff": (),
    "fireOn": (),
    "fireOff": (),
    "doorOpen": (),
    "doorClosed": (),
    "itemOnRobot": (("item", "itemName"),),
    "itemAt": (("item", "itemName"), ("x", "coordinate"), ("y", "coordinate")),
    "chargerPlugged": (),
    "chargerUnplugged": (),
    "robotSittingOnChair": (),
    "robotStanding": (),
}

NULLARY_ATOMS = tuple(name for name, params in ATOM_REGISTRY.items() if not params)


class WorldError(Exception):
    pass


class InconsistentDemo(WorldError):
    """A stored demonstration does not replay under the world dynamics."""


@dataclass(frozen=True)
class GridSpec:
    width: int = 8
    height: int = 8
    walls: frozenset = frozenset()
    water: frozenset = frozenset()
    lamp: tuple = (0, 0)
    fire: tuple = (6, 1)
    door: tuple = (6, 4)
    charger: tuple = (2, 6)
    chair: tuple = (1, 5)
    items: dict = field(default_factory=dict)  # item -> initial cell
    robot_start: tuple = (1, 0)

    def __post_init__(self):
        for cell in self.walls | self.water:
            if not self.in_bounds(cell):
                raise WorldError(f"cell {cell} outside the grid")
        for name, cell in list(self.fixtures().items()) + list(self.items.items()):
            if not self.in_bounds(cell):
                raise WorldError(f"{name} at {cell} outside the grid")
            if cell in self.walls:
                raise WorldError(f"{name} at {cell} is inside a wall")
        if self.robot_start in self.walls or not self.in_bounds(self.robot_start):
            raise WorldError(f"robot start {self.robot_start} is not a free cell")

    def fixtures(self):
        return {
            "lamp": self.lamp,
            "fire": self.fire,
            "door": self.door,
            "charger": self.charger,
            "chair": self.chair,
        }

    def in_bounds(self, cell):
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def to_dict(self):
        return {
            "width": self.width,
            "height": self.height,
            "walls": sorted(self.walls),
            "water": sorted(self.water),
            "lamp": list(self.lamp),
            "fire": list(self.fire),
            "door": list(self.door),
            "charger": list(self.charger),
            "chair": list(self.chair),
            "items": {k: list(v) for k, v in self.items.items()},
            "robot_start": list(self.robot_start),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            width=data["width"],
            height=data["height"],
            walls=frozenset(tuple(c) for c in data["walls"]),
            water=frozenset(tuple(c) for c in data["water"]),
            lamp=tuple(data["lamp"]),
            fire=tuple(data["fire"]),
            door=tuple(data["door"]),
            charger=tuple(data["charger"]),
            chair=tuple(data["chair"]),
            items={k: tuple(v) for k, v in data["items"].items()},
            robot_start=tuple(data["robot_start"]),
        )


@dataclass(frozen=True)
class WorldState:
    robot: tuple
    item_positions: tuple  # ((item, cell-or-ON_ROBOT), ...) in registry order
    lamp_on: bool = False
    fire_on: bool = False
    door_open: bool = False
    charger_plugged: bool = False
    sitting: bool = False
    wall_bump: bool = False

    def items(self):
        return dict(self.item_positions)

    def carrying(self, item):
        return dict(self.item_positions).get(item) == ON_ROBOT

    def to_dict(self):
        return {
            "robot": list(self.robot),
            "items": {k: (v if v == ON_ROBOT else list(v)) for k, v in self.item_positions},
            "lampOn": self.lamp_on,
            "fireOn": self.fire_on,
            "doorOpen": self.door_open,
            "chargerPlugged": self.charger_plugged,
            "sitting": self.sitting,
            "wallBump": self.wall_bump,
        }

    @classmethod
    def from_dict(cls, data):
        items = tuple(
            (k, v if v == ON_ROBOT else tuple(v)) for k, v in data["items"].items()
        )
        return cls(
            robot=tuple(data["robot"]),
            item_positions=items,
            lamp_on=data.get("lampOn", False),
            fire_on=data.get("fireOn", False),
            door_open=data.get("doorOpen", False),
            charger_plugged=data.get("chargerPlugged", False),
            sitting=data.get("sitting", False),
            wall_bump=data.get("wallBump", False),
        )


def default_grid() -> GridSpec:
    """The shipped grid fixture (see data/grid_default.json)."""
    text = resources.files("stlworkbench.data").joinpath("grid_default.json").read_text()
    return GridSpec.from_dict(json.loads(text))


def initial_state(grid: GridSpec, overrides: dict | None = None) -> WorldState:
    """Initial world state for a grid, with optional field overrides
    (robot position, flag values, item placements)."""
    data = {
        "robot": list(grid.robot_start),
        "items": {k: list(v) for k, v in grid.items.items()},
        "lampOn": False,
        "fireOn": False,
        "doorOpen": False,
        "chargerPlugged": False,
        "sitting": False,
        "wallBump": False,
    }
    if overrides:
        for key, value in overrides.items():
            if key == "items":
                data["items"].update(value)
            elif key not in data:
                raise WorldError(f"unknown initial-state field {key!r}")
            else:
                data[key] = value
    state = WorldState.from_dict(data)
    if not grid.in_bounds(state.robot) or state.robot in grid.walls:
        raise WorldError(f"robot start {state.robot} is not a free cell")
    return state


def _adjacent(a, b):
    return abs(a[0] - b[0]) + abs(a[1] - b[1]) <= 1


def _item_visible(grid, state, cell):
    # In the dark only cells next to the lamp are visible enough to pick from.
    return state.lamp_on or _adjacent(cell, grid.lamp)


def step(state: WorldState, action: str, grid: GridSpec) -> WorldState:
    """Apply one action; illegal actions leave the state unchanged apart
    from the wall-bump flag on attempted wall entry."""
    if action not in ACTIONS:
        raise WorldError(f"unknown action {action!r}")
    state = replace(state, wall_bump=False)
    if action in _MOVES:
        if state.sitting:
            return state
        dx, dy = _MOVES[action]
        target = (state.robot[0] + dx, state.robot[1] + dy)
        if not grid.in_bounds(target) or target in grid.walls:
            return replace(state, wall_bump=True)
        if target == grid.door and not state.door_open:
            return state
        moved = replace(state, robot=target)
        carried = tuple(
            (k, ON_ROBOT if v == ON_ROBOT else v) for k, v in state.item_positions
        )
        return replace(moved, item_positions=carried)
    if action == "pickUp":
        here = state.robot
        if not _item_visible(grid, state, here):
            return state
        picked = tuple(
            (k, ON_ROBOT if v == here else v) for k, v in state.item_positions
        )
        return replace(state, item_positions=picked)
    if action == "drop":
        dropped = tuple(
            (k, state.robot if v == ON_ROBOT else v) for k, v in state.item_positions
        )
        return replace(state, item_positions=dropped)
    if action == "toggleLamp":
        if _adjacent(state.robot, grid.lamp):
            return replace(state, lamp_on=not state.lamp_on)
        return state
    if action == "toggleFire":
        if _adjacent(state.robot, grid.fire):
            return replace(state, fire_on=not state.fire_on)
        return state
    if action == "toggleDoor":
        if _adjacent(state.robot, grid.door) and state.carrying("doorKey"):
            return replace(state, door_open=not state.door_open)
        return state
    if action == "plugCharger":
        if _adjacent(state.robot, grid.charger):
            return replace(state, charger_plugged=True)
        return state
    if action == "sit":
        if state.robot == grid.chair:
            return replace(state, sitting=True)
        return state
    if action == "stand":
        return replace(state, sitting=False)
    return state  # wait


def atom_eval(state: WorldState, name: str, args, grid: GridSpec) -> bool:
    """Truth value of a registered ground atom in a world state."""
    if name not in ATOM_REGISTRY:
        raise WorldError(f"unregistered atom {name!r}")
    expected = len(ATOM_REGISTRY[name])
    if len(args) != expected:
        raise WorldError(f"atom {name} takes {expected} arguments, got {len(args)}")
    items = state.items()
    if name == "robotAt":
        return state.robot == tuple(args)
    if name == "robotAtWall":
        return state.wall_bump
    if name == "robotAtWater":
        return state.robot in grid.water
    if name == "lampOn":
        return state.lamp_on
    if name == "lampOff":
        return not state.lamp_on
    if name == "fireOn":
        return state.fire_on
    if name == "fireOff":
        return not state.fire_on
    if name == "doorOpen":
        return state.door_open
    if name == "doorClosed":
        return not state.door_open
    if name == "itemOnRobot":
        if args[0] not in items:
            raise WorldError(f"unknown item {args[0]!r}")
        return items[args[0]] == ON_ROBOT
    if name == "itemAt":
        if args[0] not in items:
            raise WorldError(f"unknown item {args[0]!r}")
        return items[args[0]] == tuple(args[1:])
    if name == "chargerPlugged":
        return state.charger_plugged
    if name == "chargerUnplugged":
        return not state.charger_plugged
    if name == "robotSittingOnChair":
        return state.sitting
    return not state.sitting  # robotStanding


def state_record(state: WorldState, grid: GridSpec) -> dict:
    """Flat trace record for a state: every nullary atom, per-item pickup
    atoms, and numeric position signals (carried items read (-1,-1))."""
    rec = {name: atom_eval(state, name, (), grid) for name in NULLARY_ATOMS}
    rec["robot_x"], rec["robot_y"] = state.robot
    for item, pos in state.item_positions:
        rec[f"itemOnRobot({item})"] = pos == ON_ROBOT
        rec[f"{item}_x"], rec[f"{item}_y"] = (-1, -1) if pos == ON_ROBOT else pos
    return rec


@dataclass(frozen=True)
class Demonstration:
    """Finite state-action sequence; the final pair records the terminal
    state with a trailing ``wait`` so traces include the last effect."""

    steps: tuple  # ((WorldState, action), ...)
    label: str = "positive"

    def __post_init__(self):
        if not self.steps:
            raise WorldError("demonstration must be non-empty")
        if self.label not in ("positive", "negative", "unlabeled"):
            raise WorldError(f"bad demonstration label {self.label!r}")

    def __len__(self):
        return len(self.steps)

    @property
    def actions(self):
        return tuple(a for _, a in self.steps[:-1])

    @property
    def initial(self):
        return self.steps[0][0]

    def validate(self, grid: GridSpec):
        for (s, a), (s_next, _) in zip(self.steps, self.steps[1:]):
            if step(s, a, grid) != s_next:
                raise InconsistentDemo(f"action {a!r} does not produce the recorded successor")


def replay(initial: WorldState, actions, grid: GridSpec, label="positive") -> Demonstration:
    """Build a demonstration by replaying actions from an initial state."""
    steps = []
    state = initial
    for action in actions:
        steps.append((state, action))
        state = step(state, action, grid)
    steps.append((state, "wait"))
    return Demonstration(tuple(steps), label)


def demo_to_trace(demo: Demonstration, grid: GridSpec) -> Trace:
    """One trace record per demonstration step."""
    demo.validate(grid)
    return Trace([state_record(s, grid) for s, _ in demo.steps])


def prefixes_as_negatives(demo: Demonstration):
    """All proper prefixes of a positive demonstration, labeled negative
    (no-excessive-effort assumption).  Length-1 demos yield nothing."""
    if len(demo.steps) < 2:
        return []
    return [
        Demonstration(demo.steps[:k], "negative") for k in range(1, len(demo.steps))
    ]


def inject_delays(demo: Demonstration, delays, grid: GridSpec):
    """One unlabeled variant per (position, waitCount) spec, with ``wait``
    actions spliced in after the given step position."""
    variants = []
    for position, wait_count in delays:
        if not 0 <= position < len(demo.steps):
            raise WorldError(f"delay position {position} out of range")
        if wait_count < 1:
            raise WorldError("waitCount must be at least 1")
        actions = list(demo.actions)
        actions[position:position] = ["wait"] * wait_count
        variants.append(replay(demo.initial, actions, grid, "unlabeled"))
    return variants


def state_space_size(grid: GridSpec) -> int:
    """Size of the state encoding space: robot cell, each item's (cell,
    carried) pair, and the six state flags (lamp, fire, door, charger,
    sitting, bump)."""
    cells = grid.width * grid.height
    size = cells
    for _ in grid.items:
        size *= cells * 2
    return size * 2 ** 6


def save_demo(demo: Demonstration, path):
    """Line-oriented demo file: one (state record, action) JSON pair per line."""
    with open(path, "w") as fh:
        for state, action in demo.steps:
            fh.write(json.dumps({"state": state.to_dict(), "action": action}) + "\n")


def load_demo(path, grid: GridSpec, label="positive") -> Demonstration:
    steps = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rec = json.loads(line)
            steps.append((WorldState.from_dict(rec["state"]), rec["action"]))
    demo = Demonstration(tuple(steps), label)
    demo.validate(grid)
    return demo
