"""Brute-force time-expansion evaluator used as an independent oracle.

A formula is first expanded into an explicit propositional tree over
(atom, time) leaves -- temporal operators become conjunctions/disjunctions
over concrete time indices, with windows clipped at the trace end.  The
tree is then evaluated either against a single trace or, via bit masks,
against every Boolean trace of a given length at once (bit i of a mask is
the value in the i-th trace of the enumeration).

This module deliberately avoids the package's monitor recursion.
"""

from stlworkbench.formulas import (
    And,
    Always,
    EnvAtom,
    Eventually,
    Implies,
    Not,
    Or,
    SignalAtom,
    TrueFormula,
    Until,
)

TRUE_LEAF = ("true",)
FALSE_LEAF = ("false",)


def expand(phi, t, length):
    """Propositional expansion of ``phi`` at time ``t`` over a trace of the
    given length."""
    if isinstance(phi, TrueFormula):
        return TRUE_LEAF
    if isinstance(phi, EnvAtom):
        return ("var", phi.key(), t)
    if isinstance(phi, SignalAtom):
        return ("sig", phi.signal, phi.op, phi.threshold, t)
    if isinstance(phi, Not):
        return ("not", expand(phi.child, t, length))
    if isinstance(phi, And):
        return ("and", [expand(phi.left, t, length), expand(phi.right, t, length)])
    if isinstance(phi, Or):
        return ("or", [expand(phi.left, t, length), expand(phi.right, t, length)])
    if isinstance(phi, Implies):
        return ("or", [("not", expand(phi.left, t, length)), expand(phi.right, t, length)])
    if isinstance(phi, (Eventually, Always, Until)):
        lo = t + phi.interval.lo
        hi = min(t + phi.interval.hi, length - 1)
        times = range(lo, hi + 1)
        if isinstance(phi, Eventually):
            terms = [expand(phi.child, u, length) for u in times]
            return ("or", terms) if terms else FALSE_LEAF
        if isinstance(phi, Always):
            terms = [expand(phi.child, u, length) for u in times]
            return ("and", terms) if terms else TRUE_LEAF
        terms = []
        for u in times:
            prefix = [expand(phi.left, v, length) for v in range(t, u)]
            terms.append(("and", [expand(phi.right, u, length)] + prefix))
        return ("or", terms) if terms else FALSE_LEAF
    raise TypeError(f"cannot expand {phi!r}")


def eval_tree(tree, record_at):
    """Evaluate an expansion against one trace (``record_at(t)`` -> dict)."""
    tag = tree[0]
    if tag == "true":
        return True
    if tag == "false":
        return False
    if tag == "var":
        return bool(record_at(tree[2])[tree[1]])
    if tag == "sig":
        _, name, op, c, t = tree
        v = float(record_at(t)[name])
        return v <= c if op == "<=" else v >= c if op == ">=" else v == c
    if tag == "not":
        return not eval_tree(tree[1], record_at)
    if tag == "and":
        return all(eval_tree(x, record_at) for x in tree[1])
    return any(eval_tree(x, record_at) for x in tree[1])


def brute_satisfies(phi, trace, t):
    tree = expand(phi, t, len(trace.records))
    return eval_tree(tree, lambda u: trace.records[u])


class MaskUniverse:
    """All Boolean traces of one length over two atoms, as bit masks."""

    def __init__(self, length, atoms=("a", "b")):
        self.length = length
        self.atoms = atoms
        self.count = 4 ** length
        self.full = (1 << self.count) - 1
        self.var_masks = {}
        for time in range(length):
            for which, atom in enumerate(atoms):
                mask = 0
                bit_index = 2 * time + which
                for i in range(self.count):
                    if (i >> bit_index) & 1:
                        mask |= 1 << i
                self.var_masks[(atom, time)] = mask

    def trace_records(self, i):
        return [
            {
                self.atoms[0]: bool((i >> (2 * t)) & 1),
                self.atoms[1]: bool((i >> (2 * t + 1)) & 1),
            }
            for t in range(self.length)
        ]

    def eval_mask(self, tree):
        tag = tree[0]
        if tag == "true":
            return self.full
        if tag == "false":
            return 0
        if tag == "var":
            return self.var_masks[(tree[1], tree[2])]
        if tag == "not":
            return self.full ^ self.eval_mask(tree[1])
        if tag == "and":
            out = self.full
            for x in tree[1]:
                out &= self.eval_mask(x)
                if not out:
                    break
            return out
        out = 0
        for x in tree[1]:
            out |= self.eval_mask(x)
            if out == self.full:
                break
        return out
