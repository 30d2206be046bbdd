import itertools

import pytest

from stlworkbench.formulas import Trace, formula_length, satisfies
from stlworkbench.synthesis import (
    AtomSpec,
    CausalDependency,
    InstantiationError,
    KIND_ITEM,
    SynthesisBounds,
    SynthesisError,
    compute_length_bounds,
    enumerate_pstl,
    instantiate,
    probe_formula,
    prune_causal,
)

LAMP = AtomSpec("lampOn")
ITEM = AtomSpec("itemOnRobot", (("item", KIND_ITEM),))
A = AtomSpec("a")
B = AtomSpec("b")


class TestBounds:
    def test_running_example(self):
        assert compute_length_bounds(2, 1, 0) == SynthesisBounds(3, 5)

    def test_single_phrase(self):
        assert compute_length_bounds(1, 0, 0) == SynthesisBounds(1, 2)

    def test_three_phrases(self):
        assert compute_length_bounds(3, 2, 1) == SynthesisBounds(5, 9)

    def test_zero_phrases_rejected(self):
        with pytest.raises(ValueError):
            compute_length_bounds(0, 0, 0)

    def test_bad_bounds_rejected(self):
        with pytest.raises(ValueError):
            SynthesisBounds(3, 2)


class TestEnumeration:
    def test_running_example_contains_expected_templates(self):
        templates = enumerate_pstl([LAMP, ITEM], ["&", "F"], SynthesisBounds(3, 5))
        canon = [t.canonical for t in templates]
        assert "(lampOn & itemOnRobot(itemOnRobot.item))" in canon
        assert "(lampOn & F[0,F1](itemOnRobot(itemOnRobot.item)))" in canon
        assert "F[0,F1]((lampOn & F[0,F2](itemOnRobot(itemOnRobot.item))))" in canon
        assert "(F[0,F1](lampOn) & F[0,F2](itemOnRobot(itemOnRobot.item)))" in canon
        assert "(itemOnRobot(itemOnRobot.item) & F[0,F1](lampOn))" in canon

    def test_single_atom(self):
        templates = enumerate_pstl([A], ["F"], SynthesisBounds(1, 2))
        assert [t.canonical for t in templates] == ["a", "F[0,F1](a)"]

    def test_ordered_operands(self):
        templates = enumerate_pstl([A, B], ["&"], SynthesisBounds(3, 3))
        assert [t.canonical for t in templates] == ["(a & b)", "(b & a)"]

    def test_each_atom_exactly_once_and_within_bounds(self):
        bounds = SynthesisBounds(3, 5)
        for template in enumerate_pstl([LAMP, ITEM], ["&", "F", "!"], bounds):
            assert bounds.l <= template.length <= bounds.u
            assert template.length == formula_length(template.skeleton)
            text = template.canonical
            assert text.count("lampOn") == 1
            assert text.count("itemOnRobot") == 2  # atom name + slot name

    def test_no_directly_nested_identical_unaries(self):
        templates = enumerate_pstl([A], ["F", "G", "!"], SynthesisBounds(1, 3))
        canon = {t.canonical for t in templates}
        assert "F[0,F1](F[0,F2](a))" not in canon
        assert "!(!(a))" not in canon
        assert "F[0,F1](G[0,G1](a))" in canon

    def test_negated_atom_leaf(self):
        wall = AtomSpec("robotAtWall", negated=True)
        templates = enumerate_pstl([wall], ["G", "F"], SynthesisBounds(1, 3))
        assert [t.canonical for t in templates] == [
            "!(robotAtWall)",
            "F[0,F1](!(robotAtWall))",
            "G[0,G1](!(robotAtWall))",
        ]

    def test_deterministic(self):
        bounds = SynthesisBounds(3, 5)
        first = [t.canonical for t in enumerate_pstl([A, B], ["&", "F", "U"], bounds)]
        second = [t.canonical for t in enumerate_pstl([A, B], ["&", "F", "U"], bounds)]
        assert first == second

    def test_empty_atoms_rejected(self):
        with pytest.raises(SynthesisError):
            enumerate_pstl([], ["&"], SynthesisBounds(1, 2))


class TestPruning:
    def setup_method(self):
        self.templates = enumerate_pstl([LAMP, ITEM], ["&", "F"], SynthesisBounds(3, 5))
        self.dep = CausalDependency("lampOn", "itemOnRobot")

    def test_sequence_dependency_eliminations_and_survivors(self):
        result = prune_causal(self.templates, self.dep, 3)
        survivors = {t.canonical for t in result.survivors}
        pruned = {t.canonical for t, _, _ in result.pruned}
        assert "(F[0,F1](lampOn) & F[0,F2](itemOnRobot(itemOnRobot.item)))" in pruned
        assert "(itemOnRobot(itemOnRobot.item) & F[0,F1](lampOn))" in pruned
        assert "(lampOn & itemOnRobot(itemOnRobot.item))" in survivors
        assert "(lampOn & F[0,F1](itemOnRobot(itemOnRobot.item)))" in survivors
        assert "F[0,F1]((lampOn & F[0,F2](itemOnRobot(itemOnRobot.item))))" in survivors

    def test_every_pruned_template_has_a_real_witness(self):
        result = prune_causal(self.templates, self.dep, 3)
        for template, before_bits, after_bits in result.pruned:
            probe = probe_formula(template.skeleton, 3)
            trace = Trace([
                {"lampOn": bb, "itemOnRobot": ab}
                for bb, ab in zip(before_bits, after_bits)
            ])
            assert satisfies(probe, trace, 0)
            last_after = max(i for i, b in enumerate(after_bits) if b)
            firsts = [i for i, b in enumerate(before_bits) if b]
            assert not firsts or last_after < firsts[0]

    def test_survivors_have_no_witness_by_exhaustion(self):
        result = prune_causal(self.templates, self.dep, 3)
        horizon = 3
        for template in result.survivors:
            probe = probe_formula(template.skeleton, horizon)
            for bits in itertools.product((False, True), repeat=2 * (horizon + 1)):
                before = bits[: horizon + 1]
                after = bits[horizon + 1:]
                if not any(after):
                    continue
                last_after = max(i for i, b in enumerate(after) if b)
                firsts = [i for i, b in enumerate(before) if b]
                if firsts and last_after >= firsts[0]:
                    continue
                trace = Trace([
                    {"lampOn": bb, "itemOnRobot": ab} for bb, ab in zip(before, after)
                ])
                assert not satisfies(probe, trace, 0), template.canonical

    def test_longer_horizon_never_prunes_less(self):
        short = {t.canonical for t, _, _ in prune_causal(self.templates, self.dep, 2).pruned}
        long = {t.canonical for t, _, _ in prune_causal(self.templates, self.dep, 4).pruned}
        assert short <= long

    def test_single_atom_templates_kept(self):
        templates = enumerate_pstl([A], ["F"], SynthesisBounds(1, 2))
        result = prune_causal(templates, CausalDependency("a", "b"), 3)
        assert list(result.survivors) == list(templates)

    def test_report_lines(self):
        result = prune_causal(self.templates, self.dep, 3)
        lines = result.report_lines(self.dep)
        assert len(lines) == len(result.pruned)
        for line in lines:
            assert "lampOn=" in line and "itemOnRobot=" in line

    def test_bad_horizon(self):
        with pytest.raises(ValueError):
            prune_causal(self.templates, self.dep, 0)


class TestInstantiation:
    def test_reach_template_valuation(self):
        robot_at = AtomSpec("robotAt", (("x", "coordinate"), ("y", "coordinate")))
        templates = enumerate_pstl([robot_at], ["F"], SynthesisBounds(1, 2))
        template = next(t for t in templates if t.canonical.startswith("F"))
        phi = instantiate(template, {"F1": 15, "robotAt.x": 0, "robotAt.y": 0})
        from stlworkbench.formulas import format_formula
        assert format_formula(phi) == "F[0,15](robotAt(0,0))"
        assert formula_length(phi) == template.length

    def test_zero_slot_template(self):
        templates = enumerate_pstl([A, B], ["&"], SynthesisBounds(3, 3))
        phi = instantiate(templates[0], {})
        from stlworkbench.formulas import format_formula
        assert format_formula(phi) == "(a & b)"

    def test_selected_formula_round_trips(self):
        templates = enumerate_pstl([LAMP, ITEM], ["&", "F"], SynthesisBounds(3, 5))
        phi3 = next(
            t for t in templates
            if t.canonical == "F[0,F1]((lampOn & F[0,F2](itemOnRobot(itemOnRobot.item))))"
        )
        phi = instantiate(phi3, {"F1": 15, "F2": 10, "itemOnRobot.item": "purpleCube"})
        from stlworkbench.formulas import format_formula, parse_formula
        assert parse_formula(format_formula(phi)) == phi

    def test_missing_binding(self):
        templates = enumerate_pstl([ITEM], ["F"], SynthesisBounds(1, 2))
        with pytest.raises(InstantiationError):
            instantiate(templates[-1], {"F1": 10})

    def test_ill_typed_binding(self):
        templates = enumerate_pstl([ITEM], ["F"], SynthesisBounds(2, 2))
        with pytest.raises(InstantiationError):
            instantiate(templates[0], {"F1": 10, "itemOnRobot.item": 7})
        with pytest.raises(InstantiationError):
            instantiate(templates[0], {"F1": "soon", "itemOnRobot.item": "purpleCube"})
