"""Property-based invariants over randomly generated formulas and traces."""

from hypothesis import given, settings, strategies as st

from stlworkbench.formulas import (
    And,
    Always,
    EnvAtom,
    Eventually,
    Implies,
    Interval,
    Not,
    Or,
    TRUE,
    Trace,
    Until,
    format_formula,
    parse_formula,
    robustness,
    satisfies,
)

atoms = st.sampled_from([EnvAtom("a"), EnvAtom("b")])
intervals = st.tuples(st.integers(0, 3), st.integers(0, 4)).map(
    lambda p: Interval(min(p), max(p))
)


def formulas(depth=3):
    if depth == 0:
        return atoms
    sub = formulas(depth - 1)
    return st.one_of(
        atoms,
        st.just(TRUE),
        st.builds(Not, sub),
        st.builds(And, sub, sub),
        st.builds(Or, sub, sub),
        st.builds(Implies, sub, sub),
        st.builds(Eventually, intervals, sub),
        st.builds(Always, intervals, sub),
        st.builds(Until, intervals, sub, sub),
    )


traces = st.lists(
    st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=7
).map(lambda pairs: Trace([{"a": a, "b": b} for a, b in pairs]))


@settings(max_examples=300)
@given(formulas())
def test_format_parse_round_trip(phi):
    assert parse_formula(format_formula(phi)) == phi


@settings(max_examples=300)
@given(formulas(2), traces)
def test_robustness_sign_implies_satisfaction(phi, trace):
    rho = robustness(phi, trace, 0)
    if rho > 0:
        assert satisfies(phi, trace, 0)
    elif rho < 0:
        assert not satisfies(phi, trace, 0)


@settings(max_examples=200)
@given(intervals, formulas(2), traces)
def test_always_eventually_duality(interval, phi, trace):
    lhs = Always(interval, phi)
    rhs = Not(Eventually(interval, Not(phi)))
    for t in range(len(trace)):
        assert satisfies(lhs, trace, t) == satisfies(rhs, trace, t)


@settings(max_examples=200)
@given(intervals, formulas(2), traces)
def test_eventually_as_until(interval, phi, trace):
    lhs = Eventually(interval, phi)
    rhs = Until(interval, TRUE, phi)
    for t in range(len(trace)):
        assert satisfies(lhs, trace, t) == satisfies(rhs, trace, t)
