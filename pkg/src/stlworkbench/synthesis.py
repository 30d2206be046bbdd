"""Enumerative PSTL template synthesis with causal pruning.

Templates are formula skeletons whose interval upper bounds and atom
arguments are named slots.  Enumeration produces every well-formed tree
within the length bounds that uses each predicted atom exactly once,
excludes directly nested identical unary operators, and orders the result
deterministically: by length, then by how closely the left-to-right leaf
order follows the order atoms were mentioned, then by canonical string.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .formulas import (
    And,
    EnvAtom,
    Eventually,
    Always,
    Formula,
    Implies,
    Interval,
    Not,
    Or,
    Slot,
    Trace,
    Until,
    format_formula,
    formula_length,
    satisfies,
)

UNARY_OPS = ("!", "F", "G")
BINARY_OPS = ("&", "|", "->", "U")
ALL_OPS = UNARY_OPS + BINARY_OPS

# Slot kinds.
KIND_INTERVAL = "intervalBound"
KIND_COORD = "coordinate"
KIND_ITEM = "itemName"
KIND_THRESHOLD = "threshold"


class SynthesisError(Exception):
    pass


class InstantiationError(SynthesisError):
    pass


@dataclass(frozen=True)
class AtomSpec:
    """An atom to synthesize over: registry name, parameter schema, and
    whether the verb phrase used it with negative polarity."""

    name: str
    params: tuple = ()  # (paramName, kind) pairs
    negated: bool = False

    def leaf(self) -> Formula:
        args = tuple(Slot(f"{self.name}.{p}", kind) for p, kind in self.params)
        atom = EnvAtom(self.name, args)
        return Not(atom) if self.negated else atom

    def leaf_length(self) -> int:
        return 2 if self.negated else 1


@dataclass(frozen=True)
class SynthesisBounds:
    l: int
    u: int

    def __post_init__(self):
        if not 1 <= self.l <= self.u:
            raise ValueError(f"bad length bounds ({self.l},{self.u})")


@dataclass(frozen=True)
class CausalDependency:
    """`before` must not be achievable strictly after `after` is done."""

    before: str
    after: str

    def __post_init__(self):
        if self.before == self.after:
            raise ValueError("causal dependency must relate distinct atoms")


@dataclass(frozen=True)
class PSTLTemplate:
    skeleton: Formula
    slots: tuple
    length: int
    canonical: str
    leaf_order: tuple = field(default=(), compare=False)

    def __str__(self):
        return self.canonical


def compute_length_bounds(n_vphrases: int, n_conjs: int, n_advbs: int) -> SynthesisBounds:
    """Length bounds for enumeration: n phrases need n-1 connectors, and
    each phrase may additionally take an F wrapper."""
    if n_vphrases < 1:
        raise ValueError("at least one verb phrase is required")
    return SynthesisBounds(2 * n_vphrases - 1, 2 * n_vphrases + n_conjs + n_advbs)


_PLACEHOLDER = Slot("?", KIND_INTERVAL)


def _raw_trees(atoms, unary_ops, binary_ops, max_len):
    """Exact-length tree lists per (atom index subset, length).

    Trees carry placeholder interval slots; the root operator tag is used
    to reject directly nested identical unary operators.
    """
    n = len(atoms)
    table = {}

    def get(subset, length):
        return table.get((subset, length), ())

    for length in range(1, max_len + 1):
        for size in range(1, n + 1):
            for combo in itertools.combinations(range(n), size):
                subset = frozenset(combo)
                out = []
                if size == 1:
                    spec = atoms[combo[0]]
                    if spec.leaf_length() == length:
                        root = "!" if spec.negated else None
                        out.append((spec.leaf(), root, (combo[0],)))
                for op in unary_ops:
                    for tree, root, leaves in get(subset, length - 1):
                        if root == op:
                            continue
                        if op == "!":
                            node = Not(tree)
                        elif op == "F":
                            node = Eventually(Interval(0, _PLACEHOLDER), tree)
                        else:
                            node = Always(Interval(0, _PLACEHOLDER), tree)
                        out.append((node, op, leaves))
                if size >= 2 and length >= 3:
                    for lsize in range(1, size):
                        for left_combo in itertools.combinations(combo, lsize):
                            left = frozenset(left_combo)
                            right = subset - left
                            for llen in range(1, length - 1):
                                rlen = length - 1 - llen
                                for ltree, _, lleaves in get(left, llen):
                                    for rtree, _, rleaves in get(right, rlen):
                                        for op in binary_ops:
                                            if op == "&":
                                                node = And(ltree, rtree)
                                            elif op == "|":
                                                node = Or(ltree, rtree)
                                            elif op == "->":
                                                node = Implies(ltree, rtree)
                                            else:
                                                node = Until(Interval(0, _PLACEHOLDER), ltree, rtree)
                                            out.append((node, op, lleaves + rleaves))
                if out:
                    table[(subset, length)] = tuple(out)
    return table


def _number_slots(phi, counters, collected):
    """Rebuild ``phi`` giving interval slots canonical preorder names (F1,
    F2, G1, U1, ...) and collecting every slot in preorder."""
    if isinstance(phi, EnvAtom):
        for a in phi.args:
            if isinstance(a, Slot):
                collected.append(a)
        return phi
    if isinstance(phi, Not):
        return Not(_number_slots(phi.child, counters, collected))
    if isinstance(phi, (Eventually, Always)):
        letter = "F" if isinstance(phi, Eventually) else "G"
        counters[letter] += 1
        slot = Slot(f"{letter}{counters[letter]}", KIND_INTERVAL)
        collected.append(slot)
        child = _number_slots(phi.child, counters, collected)
        return type(phi)(Interval(phi.interval.lo, slot), child)
    if isinstance(phi, Until):
        counters["U"] += 1
        slot = Slot(f"U{counters['U']}", KIND_INTERVAL)
        collected.append(slot)
        left = _number_slots(phi.left, counters, collected)
        right = _number_slots(phi.right, counters, collected)
        return Until(Interval(phi.interval.lo, slot), left, right)
    if isinstance(phi, (And, Or, Implies)):
        left = _number_slots(phi.left, counters, collected)
        right = _number_slots(phi.right, counters, collected)
        return type(phi)(left, right)
    return phi


def finalize_template(tree: Formula, leaf_order=()) -> PSTLTemplate:
    counters = {"F": 0, "G": 0, "U": 0}
    collected = []
    skeleton = _number_slots(tree, counters, collected)
    return PSTLTemplate(
        skeleton=skeleton,
        slots=tuple(collected),
        length=formula_length(skeleton),
        canonical=format_formula(skeleton),
        leaf_order=tuple(leaf_order),
    )


def enumerate_pstl(atoms, ops, bounds: SynthesisBounds):
    """All templates over exactly the given atoms within the length bounds.

    Deterministic: duplicate skeletons (by canonical string) are dropped and
    the result is sorted by (length, leaf mention order, canonical string).
    """
    if not atoms:
        raise SynthesisError("cannot enumerate over an empty atom list")
    for op in ops:
        if op not in ALL_OPS:
            raise SynthesisError(f"unknown operator {op!r}")
    unary = [op for op in UNARY_OPS if op in ops]
    binary = [op for op in BINARY_OPS if op in ops]
    table = _raw_trees(tuple(atoms), unary, binary, bounds.u)
    full = frozenset(range(len(atoms)))
    seen = {}
    for length in range(bounds.l, bounds.u + 1):
        for tree, _, leaves in table.get((full, length), ()):
            template = finalize_template(tree, leaves)
            if template.canonical not in seen:
                seen[template.canonical] = template
    return sorted(seen.values(), key=lambda tp: (tp.length, tp.leaf_order, tp.canonical))


def instantiate(template: PSTLTemplate, valuation: dict) -> Formula:
    """Ground a template with a total valuation over its slots."""
    for slot in template.slots:
        if slot.name not in valuation:
            raise InstantiationError(f"missing binding for slot {slot.name!r}")
        value = valuation[slot.name]
        if slot.kind in (KIND_INTERVAL, KIND_COORD):
            if isinstance(value, bool) or not isinstance(value, int):
                raise InstantiationError(f"slot {slot.name!r} needs an integer, got {value!r}")
            if slot.kind == KIND_INTERVAL and value < 0:
                raise InstantiationError(f"interval slot {slot.name!r} must be non-negative")
        elif slot.kind == KIND_ITEM:
            if not isinstance(value, str):
                raise InstantiationError(f"slot {slot.name!r} needs an item name, got {value!r}")
        elif slot.kind == KIND_THRESHOLD:
            if not isinstance(value, (int, float)):
                raise InstantiationError(f"slot {slot.name!r} needs a number, got {value!r}")
    return _substitute(template.skeleton, valuation)


def _substitute(phi, valuation):
    if isinstance(phi, EnvAtom):
        if not phi.args:
            return phi
        args = tuple(valuation[a.name] if isinstance(a, Slot) else a for a in phi.args)
        return EnvAtom(phi.name, args)
    if isinstance(phi, Not):
        return Not(_substitute(phi.child, valuation))
    if isinstance(phi, (Eventually, Always)):
        interval = _ground_interval(phi.interval, valuation)
        return type(phi)(interval, _substitute(phi.child, valuation))
    if isinstance(phi, Until):
        interval = _ground_interval(phi.interval, valuation)
        return Until(interval, _substitute(phi.left, valuation), _substitute(phi.right, valuation))
    if isinstance(phi, (And, Or, Implies)):
        return type(phi)(_substitute(phi.left, valuation), _substitute(phi.right, valuation))
    return phi


def _ground_interval(interval, valuation):
    hi = interval.hi
    if isinstance(hi, Slot):
        hi = valuation[hi.name]
    try:
        return Interval(interval.lo, hi)
    except ValueError as exc:
        raise InstantiationError(str(exc)) from None


def probe_formula(phi: Formula, horizon: int | None = None) -> Formula:
    """Strip atom arguments (atoms become nullary names) and optionally bind
    every interval slot to [lo, horizon], for bounded semantic checks."""
    if isinstance(phi, EnvAtom):
        return EnvAtom(phi.name)
    if isinstance(phi, Not):
        return Not(probe_formula(phi.child, horizon))
    if isinstance(phi, (Eventually, Always)):
        interval = phi.interval
        if isinstance(interval.hi, Slot):
            if horizon is None:
                raise SynthesisError("probe needs a horizon to bind interval slots")
            interval = Interval(interval.lo, horizon)
        return type(phi)(interval, probe_formula(phi.child, horizon))
    if isinstance(phi, Until):
        interval = phi.interval
        if isinstance(interval.hi, Slot):
            if horizon is None:
                raise SynthesisError("probe needs a horizon to bind interval slots")
            interval = Interval(interval.lo, horizon)
        return Until(interval, probe_formula(phi.left, horizon), probe_formula(phi.right, horizon))
    if isinstance(phi, (And, Or, Implies)):
        return type(phi)(probe_formula(phi.left, horizon), probe_formula(phi.right, horizon))
    return phi


def _first_true(bits):
    for i, b in enumerate(bits):
        if b:
            return i
    return None


def order_violation_trace(phi, before: str, after: str, horizon: int):
    """Search all Boolean traces of length horizon+1 over {before, after}
    for one that satisfies ``phi`` at t=0 while achieving ``after`` entirely
    before ``before`` ever holds (last ``after`` < first ``before``).

    Returns the witness as a (before_bits, after_bits) pair, or None.
    """
    if horizon < 1:
        raise ValueError("probe horizon must be at least 1")
    length = horizon + 1
    for bits in itertools.product((False, True), repeat=2 * length):
        before_bits = bits[:length]
        after_bits = bits[length:]
        if not any(after_bits):
            continue
        last_after = max(i for i, b in enumerate(after_bits) if b)
        first_before = _first_true(before_bits)
        if first_before is not None and last_after >= first_before:
            continue
        trace = Trace([{before: bb, after: ab} for bb, ab in zip(before_bits, after_bits)])
        if satisfies(phi, trace, 0):
            return before_bits, after_bits
    return None


@dataclass(frozen=True)
class PruneResult:
    survivors: tuple
    pruned: tuple  # (template, before_bits, after_bits)

    def report_lines(self, dep: CausalDependency):
        lines = []
        for template, before_bits, after_bits in self.pruned:
            bb = "".join("1" if b else "0" for b in before_bits)
            ab = "".join("1" if b else "0" for b in after_bits)
            lines.append(f"{template.canonical} {dep.before}={bb} {dep.after}={ab}")
        return lines


def prune_causal(templates, dep: CausalDependency, probe_horizon: int = 3) -> PruneResult:
    """Keep templates that cannot be satisfied by any bounded trace in which
    ``dep.after`` is achieved strictly before ``dep.before`` first holds.

    Interval slots are bound to [lo, probe_horizon] for the check; templates
    not mentioning both atoms are kept unchanged.
    """
    if probe_horizon < 1:
        raise ValueError("probe horizon must be at least 1")
    survivors, pruned = [], []
    for template in templates:
        names = {node.name for node in template.skeleton.walk() if isinstance(node, EnvAtom)}
        if dep.before not in names or dep.after not in names:
            survivors.append(template)
            continue
        probe = probe_formula(template.skeleton, probe_horizon)
        witness = order_violation_trace(probe, dep.before, dep.after, probe_horizon)
        if witness is None:
            survivors.append(template)
        else:
            pruned.append((template, witness[0], witness[1]))
    return PruneResult(tuple(survivors), tuple(pruned))
