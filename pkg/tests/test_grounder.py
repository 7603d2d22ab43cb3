import pytest

from microasp.grounder import (
    GroundingError,
    ground_deferred_violations,
    ground_program,
    ground_rule,
    herbrand_universe,
    naive_ground_program,
)
from microasp.model import Atom, GroundRule, Literal, Term
from microasp.oracle import enumerate_stable_models
from microasp.parser import ParseError, parse_program
from support import PI1_DEFERRED_TEXT, PI1_TEXT, random_program_text


def ga(pred, *args):
    return Atom(pred, tuple(Term.num(a) for a in args))


class TestHerbrandUniverse:
    def test_pi1(self):
        assert herbrand_universe(parse_program(PI1_TEXT)) == {Term.num(1)}

    def test_empty(self):
        assert herbrand_universe(parse_program("")) == set()

    def test_mixed_constants(self):
        program = parse_program("p(1). p(2). q(a).\n")
        assert herbrand_universe(program) == {Term.num(1), Term.num(2), Term.sym("a")}


class TestGroundRule:
    def test_constraint_over_unit_domain(self):
        rule = parse_program(":- a(X), b(X).\n").rules[0]
        domains = {"a": [(Term.num(1),)], "b": [(Term.num(1),)]}
        assert ground_rule(rule, domains) == [
            GroundRule(None, (Literal(ga("a", 1)), Literal(ga("b", 1))))
        ]

    def test_variable_free_rule_is_itself(self):
        rule = parse_program("a(1) :- not b(1).\n").rules[0]
        out = ground_rule(rule, {})
        assert out == [GroundRule(ga("a", 1), (Literal(ga("b", 1), False),))]

    def test_contradictory_comparison_yields_nothing(self):
        rule = parse_program(":- p(X), X != X.\n").rules[0]
        domains = {"p": [(Term.num(1),), (Term.num(2),)]}
        assert ground_rule(rule, domains) == []

    def test_instance_count_bound(self):
        rule = parse_program(":- p(X), q(Y).\n").rules[0]
        domain = [(Term.num(i),) for i in range(3)]
        out = ground_rule(rule, {"p": domain, "q": domain})
        assert len(out) <= 3 ** 2

    def test_binding_equality(self):
        rule = parse_program(":- p(X), W = X+1, q(W).\n").rules[0]
        domains = {"p": [(Term.num(1),)], "q": [(Term.num(2),)]}
        out = ground_rule(rule, domains)
        assert out == [GroundRule(None, (Literal(ga("p", 1)), Literal(ga("q", 2))))]

    def test_arithmetic_on_symbol_errors(self):
        rule = parse_program("q(Y) :- p(X), Y = X+1.\n").rules[0]
        with pytest.raises(GroundingError, match="non-integer"):
            ground_rule(rule, {"p": [(Term.sym("a"),)]})


class TestGroundProgram:
    def test_pi1_full(self):
        gp = ground_program(parse_program(PI1_TEXT), include_deferred=True)
        assert [str(r) for r in gp.rules] == [
            "a(1) :- not b(1)",
            "b(1) :- not a(1)",
            ":- a(1), b(1)",
            "c(1) :- not d(1)",
            "d(1) :- not c(1)",
            ":- a(1), not b(1)",
        ]
        assert gp.facts == ()
        assert len(gp.atoms) == 4

    def test_pi1_deferred_removed(self):
        gp = ground_program(parse_program(PI1_DEFERRED_TEXT))
        assert [str(r) for r in gp.rules] == [
            "a(1) :- not b(1)",
            "b(1) :- not a(1)",
            "c(1) :- not d(1)",
            "d(1) :- not c(1)",
        ]

    def test_facts_only(self):
        gp = ground_program(parse_program("p(1). p(2). q(a).\n"))
        assert sorted(str(a) for a in gp.facts) == ["p(1)", "p(2)", "q(a)"]
        assert gp.rules == ()

    def test_fact_simplification(self):
        gp = ground_program(parse_program("p(1). q(X) :- p(X). r(1) :- q(1), not s(1).\n"))
        # q(1) becomes a fact; s(1) is underivable so its literal vanishes
        assert sorted(str(a) for a in gp.facts) == ["p(1)", "q(1)", "r(1)"]
        assert gp.rules == ()

    def test_derivable_restriction(self):
        gp = ground_program(parse_program("p(1). q(X) :- p(X), r(X).\n"))
        # r has no deriving rule, so q never gets instantiated
        assert sorted(str(a) for a in gp.facts) == ["p(1)"]
        assert gp.rules == ()

    def test_empty_body_constraint_kept(self):
        gp = ground_program(parse_program("p(1). :- p(1).\n"))
        assert GroundRule(None, ()) in gp.rules

    def test_dump_text_sorted(self):
        gp = ground_program(parse_program(PI1_TEXT), include_deferred=True)
        lines = gp.to_text().splitlines()
        assert lines == sorted(lines)


class TestGroundDeferredViolations:
    @pytest.fixture
    def deferred(self):
        return parse_program(PI1_DEFERRED_TEXT).deferred_rules()

    def test_violating_interpretation(self, deferred):
        out = ground_deferred_violations(deferred, [ga("a", 1), ga("c", 1)])
        assert [str(c) for c in out] == [":- a(1), not b(1)"]

    def test_clean_interpretation(self, deferred):
        assert ground_deferred_violations(deferred, [ga("b", 1), ga("c", 1)]) == []

    def test_no_constraints(self):
        assert ground_deferred_violations([], [ga("a", 1)]) == []

    def test_rejects_non_constraint(self):
        rule = parse_program("a(1) :- b(1).\n").rules[0]
        with pytest.raises(ValueError):
            ground_deferred_violations([rule], [])

    def test_matches_naive_instantiation(self):
        """Cross-check the join against filtering the naive instantiation."""
        from microasp.model import is_violated, total_interpretation

        checked = 0
        for seed in range(160):
            try:
                program = parse_program(random_program_text(seed))
            except ParseError:
                continue
            deferred = program.deferred_rules()
            if not deferred:
                continue
            naive = naive_ground_program(program)
            universe = list(naive.atoms)
            if len(universe) > 8:
                continue
            import itertools

            for bits in itertools.product([False, True], repeat=len(universe)):
                truths = {a for a, b in zip(universe, bits) if b}
                interp = total_interpretation(truths, universe)
                got = {
                    (c.head, frozenset(c.body))
                    for c in ground_deferred_violations(deferred, truths)
                }
                want = set()
                for rule in deferred:
                    for inst in ground_rule(rule, _full_domains(program)):
                        if is_violated(inst, interp):
                            want.add((inst.head, frozenset(inst.body)))
                assert got == want
            checked += 1
            if checked >= 12:
                break
        assert checked >= 5


def _full_domains(program):
    import itertools as it

    constants = sorted(herbrand_universe(program), key=str)
    out = {}
    for rule in program.rules:
        atoms = ([rule.head] if rule.head else []) + [
            e.atom for e in rule.body if isinstance(e, Literal)
        ]
        for atom in atoms:
            out[atom.predicate] = [
                tuple(c) for c in it.product(constants, repeat=atom.arity)
            ]
    return out


def test_simplified_grounding_preserves_stable_models():
    """Simplified and naive instantiation have the same stable models."""
    checked = 0
    for seed in range(120):
        try:
            program = parse_program(random_program_text(seed))
        except ParseError:
            continue
        naive = naive_ground_program(program)
        simplified = ground_program(program, include_deferred=True)
        want = {frozenset(m) for m in enumerate_stable_models(naive)}
        got = {frozenset(m) for m in enumerate_stable_models(simplified)}
        assert got == want, f"seed {seed}"
        checked += 1
    assert checked >= 60
