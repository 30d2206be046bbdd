"""Tabular Q-learning with robustness-of-partial-trajectory rewards.

The reward at each step is the change in robustness of the trajectory so
far with respect to the task formula, plus a terminal bonus once the
robustness turns positive (potential-style shaping that preserves the
optimal policy while keeping returns informative).  States are projected
onto the components the formula actually mentions, plus the robot cell,
which keeps tables small at desk scale.  Training is fully reproducible
from the seed.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field

from .formulas import EnvAtom, Formula, Trace, robustness, satisfies
from .world import ACTIONS, GridSpec, WorldState, state_record, step

GOAL_BONUS = 10.0


class TrainingError(Exception):
    pass


@dataclass(frozen=True)
class Hyperparams:
    episodes: int = 50_000
    max_steps: int = 40
    gamma: float = 0.99
    alpha: float = 0.1
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay: float = 5_000.0
    replay_min: int = 500        # M: minimum buffer size before updates
    replay_capacity: int = 10_000
    target_sync: int = 50        # C: episodes between target snapshots
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.episodes < 0 or self.max_steps < 1:
            raise ValueError("episode and step budgets must be positive")
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must be in (0, 1]")
        if not (0 <= self.eps_end <= self.eps_start <= 1):
            raise ValueError("epsilon schedule must stay within [0, 1]")

    def epsilon(self, episode):
        return self.eps_end + (self.eps_start - self.eps_end) * math.exp(
            -episode / self.eps_decay
        )


class QFunction:
    """Sparse action-value table; missing entries read as zero."""

    def __init__(self):
        self.table = {}

    def get(self, key, action):
        return self.table.get((key, action), 0.0)

    def set(self, key, action, value):
        if not math.isfinite(value):
            raise TrainingError(f"non-finite update for {key}/{action}: {value}")
        self.table[(key, action)] = value

    def best_action(self, key):
        best, best_value = ACTIONS[0], self.get(key, ACTIONS[0])
        for action in ACTIONS[1:]:
            value = self.get(key, action)
            if value > best_value:
                best, best_value = action, value
        return best

    def max_value(self, key):
        return max(self.get(key, action) for action in ACTIONS)

    def snapshot(self):
        clone = QFunction()
        clone.table = dict(self.table)
        return clone

    def __len__(self):
        return len(self.table)


class ReplayMemory:
    """FIFO ring buffer of transitions."""

    def __init__(self, capacity):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.buffer = []
        self._next = 0

    def push(self, transition):
        if len(self.buffer) < self.capacity:
            self.buffer.append(transition)
        else:
            self.buffer[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def sample(self, rng, k):
        return [self.buffer[rng.randrange(len(self.buffer))] for _ in range(k)]

    def __len__(self):
        return len(self.buffer)


def _key_components(phi: Formula):
    flags = set()
    items = set()
    for node in phi.walk():
        if not isinstance(node, EnvAtom):
            continue
        name = node.name
        if name in ("lampOn", "lampOff"):
            flags.add("lamp")
        elif name in ("fireOn", "fireOff"):
            flags.add("fire")
        elif name in ("doorOpen", "doorClosed"):
            flags.add("door")
        elif name in ("chargerPlugged", "chargerUnplugged"):
            flags.add("charger")
        elif name in ("robotSittingOnChair", "robotStanding"):
            flags.add("sitting")
        elif name == "robotAtWall":
            flags.add("bump")
        elif name in ("itemOnRobot", "itemAt") and node.args:
            items.add(str(node.args[0]))
    return tuple(sorted(flags)), tuple(sorted(items))


def state_key(state: WorldState, phi: Formula, components=None):
    """Project a world state onto the formula-relevant components (the
    robot cell is always included)."""
    flags, items = components if components else _key_components(phi)
    parts = [state.robot]
    lookup = {
        "lamp": state.lamp_on,
        "fire": state.fire_on,
        "door": state.door_open,
        "charger": state.charger_plugged,
        "sitting": state.sitting,
        "bump": state.wall_bump,
    }
    parts.extend(lookup[f] for f in flags)
    positions = state.items()
    parts.extend(positions[i] for i in items if i in positions)
    return tuple(parts)


def robustness_reward(partial_trace: Trace, phi: Formula) -> float:
    """Robustness of the trajectory so far, evaluated at its start."""
    return robustness(phi, partial_trace, 0)


def train(grid: GridSpec, s0: WorldState, phi: Formula, hp: Hyperparams,
          progress=None):
    """Episodic Q-learning; returns the learned table and the per-episode
    return curve (return, epsilon, replay size per episode).

    ``progress``, when given, is called with the episode index before each
    episode; returning False cancels training between episodes.
    """
    rng = random.Random(hp.seed)
    q = QFunction()
    target = q.snapshot()
    replay = ReplayMemory(hp.replay_capacity)
    components = _key_components(phi)
    curve = []
    for episode in range(hp.episodes):
        if progress is not None and progress(episode) is False:
            break
        if episode % hp.target_sync == 0:
            target = q.snapshot()
        eps = hp.epsilon(episode)
        state = s0
        records = [state_record(state, grid)]
        prev_rho = robustness(phi, Trace(records), 0)
        key = state_key(state, phi, components)
        episode_return = 0.0
        for _ in range(hp.max_steps):
            if rng.random() < eps:
                action = ACTIONS[rng.randrange(len(ACTIONS))]
            else:
                action = q.best_action(key)
            state = step(state, action, grid)
            records.append(state_record(state, grid))
            rho = robustness(phi, Trace(records), 0)
            delta = 0.0 if rho == prev_rho else rho - prev_rho
            done = rho > 0
            reward = delta + (GOAL_BONUS if done else 0.0)
            next_key = state_key(state, phi, components)
            replay.push((key, action, reward, next_key, done))
            episode_return += reward
            prev_rho = rho
            key = next_key
            if len(replay) > hp.replay_min:
                for s, a, r, s2, d in replay.sample(rng, hp.batch_size):
                    bootstrap = 0.0 if d else hp.gamma * target.max_value(s2)
                    old = q.get(s, a)
                    q.set(s, a, old + hp.alpha * (r + bootstrap - old))
            if done:
                break
        curve.append((episode_return, eps, len(replay)))
    return q, curve


def evaluate(policy: QFunction, grid: GridSpec, s0: WorldState, phi: Formula,
             max_steps: int = 40):
    """Greedy rollout (ties broken by fixed action order); returns whether
    the rollout trace satisfies the formula, plus the trace itself."""
    components = _key_components(phi)
    state = s0
    records = [state_record(state, grid)]
    actions = []
    for _ in range(max_steps):
        action = policy.best_action(state_key(state, phi, components))
        actions.append(action)
        state = step(state, action, grid)
        records.append(state_record(state, grid))
        trace = Trace(records)
        if robustness(phi, trace, 0) > 0:
            break
    trace = Trace(records)
    return satisfies(phi, trace, 0), trace, actions


def save_curve(curve, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "return", "epsilon", "replaySize"])
        for episode, (ret, eps, size) in enumerate(curve):
            writer.writerow([episode, repr(ret), f"{eps:.6f}", size])


def save_policy(policy: QFunction, path):
    best = {}
    for (key, action), value in policy.table.items():
        current = best.get(key)
        if current is None or value > current[1] or (
            value == current[1] and ACTIONS.index(action) < ACTIONS.index(current[0])
        ):
            best[key] = (action, value)
    with open(path, "w") as fh:
        for key in sorted(best, key=repr):
            action, value = best[key]
            fh.write(f"{key!r}\t{action}\t{value!r}\n")
