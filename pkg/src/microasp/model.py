"""AST types for the input language, their ground counterparts, and the
semantic predicates (nogoods, violation, support) shared by the grounder,
the solver, and the oracle.

Variables start with an uppercase letter, constants do not.  Rules have at
most one head atom; a rule without a head is a constraint and a rule with a
ground head and empty body is a fact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Union

if TYPE_CHECKING:
    from .grounder import GroundProgram


@dataclass(frozen=True)
class Term:
    """A variable, a symbolic constant, or an integer constant."""

    name: str
    value: Optional[int] = None  # set iff the term is an integer constant

    @staticmethod
    def var(name: str) -> "Term":
        if not name[:1].isupper():
            raise ValueError(f"variable names start uppercase: {name!r}")
        return Term(name)

    @staticmethod
    def sym(name: str) -> "Term":
        if name[:1].isupper():
            raise ValueError(f"constant names start lowercase: {name!r}")
        return Term(name)

    @staticmethod
    def num(value: int) -> "Term":
        return Term(str(value), value)

    @property
    def is_variable(self) -> bool:
        return self.name[:1].isupper()

    @property
    def is_integer(self) -> bool:
        return self.value is not None

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    @property
    def is_ground(self) -> bool:
        return not any(t.is_variable for t in self.args)

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> set[str]:
        return {t.name for t in self.args if t.is_variable}

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True)
class Literal:
    """An atom or its negation-as-failure complement."""

    atom: Atom
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"not {self.atom}"


#: Operators allowed in comparisons.  Order comparisons require integers on
#: both sides; (in)equality also applies to symbolic constants.
COMPARISON_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True)
class Comparison:
    """lhs OP rhs where each side is a sum of terms (only + is supported)."""

    op: str
    lhs: tuple[Term, ...]
    rhs: tuple[Term, ...]

    def variables(self) -> set[str]:
        return {t.name for t in self.lhs + self.rhs if t.is_variable}

    def __str__(self) -> str:
        left = "+".join(str(t) for t in self.lhs)
        right = "+".join(str(t) for t in self.rhs)
        return f"{left} {self.op} {right}"


BodyElement = Union[Literal, Comparison]


@dataclass(frozen=True)
class Rule:
    head: Optional[Atom]
    body: tuple[BodyElement, ...] = ()
    line: int = field(default=0, compare=False)

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    @property
    def is_fact(self) -> bool:
        return self.head is not None and self.head.is_ground and not self.body

    def positive_literals(self) -> list[Literal]:
        return [e for e in self.body if isinstance(e, Literal) and e.positive]

    def negative_literals(self) -> list[Literal]:
        return [e for e in self.body if isinstance(e, Literal) and not e.positive]

    def comparisons(self) -> list[Comparison]:
        return [e for e in self.body if isinstance(e, Comparison)]

    def variables(self) -> set[str]:
        out: set[str] = set()
        if self.head is not None:
            out |= self.head.variables()
        for elem in self.body:
            if isinstance(elem, Literal):
                out |= elem.atom.variables()
            else:
                out |= elem.variables()
        return out

    def __str__(self) -> str:
        body = ", ".join(str(e) for e in self.body)
        if self.head is None:
            return f":- {body}"
        if not self.body:
            return str(self.head)
        return f"{self.head} :- {body}"


@dataclass(frozen=True)
class Program:
    """Parsed program plus the indices of constraints marked for deferral."""

    rules: tuple[Rule, ...] = ()
    deferred: frozenset[int] = frozenset()

    def deferred_rules(self) -> list[Rule]:
        return [self.rules[i] for i in sorted(self.deferred)]

    def kept_rules(self) -> list[Rule]:
        return [r for i, r in enumerate(self.rules) if i not in self.deferred]


@dataclass(frozen=True)
class GroundRule:
    """A variable-free rule; comparisons have been evaluated away."""

    head: Optional[Atom]
    body: tuple[Literal, ...] = ()

    @property
    def is_constraint(self) -> bool:
        return self.head is None

    def __str__(self) -> str:
        body = ", ".join(str(lit) for lit in self.body)
        if self.head is None:
            return f":- {body}"
        if not self.body:
            return str(self.head)
        return f"{self.head} :- {body}"


#: A nogood is a set of ground literals that must not be simultaneously true.
Nogood = frozenset


def nogood_of(rule: GroundRule) -> Nogood:
    """Map a ground rule to the set of literals whose joint truth violates it.

    The head contributes its complement, body literals are kept as written;
    a constraint contributes its body alone.
    """
    lits = set(rule.body)
    if rule.head is not None:
        lits.add(Literal(rule.head, False))
    return frozenset(lits)


def nogood_falsified(nogood: Iterable[Literal], interp: set) -> bool:
    """True iff every literal of the nogood is true w.r.t. the interpretation."""
    return all(lit in interp for lit in nogood)


def is_violated(constraint: GroundRule, interp: set) -> bool:
    """A constraint is violated when every literal of its body is true."""
    return all(lit in interp for lit in constraint.body)


def is_supported(atom: Atom, model: set, program: "GroundProgram") -> bool:
    """True iff some rule of the program derives `atom` with a fully true body.

    Facts support their own atom unconditionally.
    """
    if atom in program.fact_set:
        return True
    for rule in program.rules:
        if rule.head == atom and all(lit in model for lit in rule.body):
            return True
    return False


def total_interpretation(true_atoms: Iterable[Atom], universe: Iterable[Atom]) -> set:
    """Build the literal set assigning `true_atoms` true and the rest false."""
    truths = set(true_atoms)
    interp = set()
    for atom in universe:
        interp.add(Literal(atom, atom in truths))
    return interp


def binding_stages(rule: Rule) -> tuple[list[Literal], list[list[BodyElement]], set[str]]:
    """Order body evaluation for safety checking and for join planning.

    Positive literals are matched left to right in written order; each
    comparison or negative literal is slotted in at the earliest point where
    its variables are bound.  An `=` comparison with a lone unbound variable
    on one side binds it once the other side is bound.

    Returns (positives, stages, unsafe) where stages[i] holds the elements
    evaluable once positives[:i] are matched (stages has len(positives)+1
    entries) and unsafe names the variables never bound.
    """
    positives = [e for e in rule.body if isinstance(e, Literal) and e.positive]
    rest: list[BodyElement] = [
        e for e in rule.body if not (isinstance(e, Literal) and e.positive)
    ]
    stages: list[list[BodyElement]] = [[] for _ in range(len(positives) + 1)]
    bound: set[str] = set()

    def place(stage: int) -> None:
        changed = True
        while changed:
            changed = False
            for elem in list(rest):
                if isinstance(elem, Literal):
                    if elem.atom.variables() <= bound:
                        stages[stage].append(elem)
                        rest.remove(elem)
                        changed = True
                else:
                    lhs_vars = {t.name for t in elem.lhs if t.is_variable}
                    rhs_vars = {t.name for t in elem.rhs if t.is_variable}
                    if lhs_vars | rhs_vars <= bound:
                        stages[stage].append(elem)
                        rest.remove(elem)
                        changed = True
                    elif elem.op == "=":
                        # One side is a lone unbound variable, the other fully
                        # bound: the comparison acts as an assignment.
                        if (
                            len(elem.lhs) == 1
                            and elem.lhs[0].is_variable
                            and elem.lhs[0].name not in bound
                            and rhs_vars <= bound
                        ):
                            bound.add(elem.lhs[0].name)
                            stages[stage].append(elem)
                            rest.remove(elem)
                            changed = True
                        elif (
                            len(elem.rhs) == 1
                            and elem.rhs[0].is_variable
                            and elem.rhs[0].name not in bound
                            and lhs_vars <= bound
                        ):
                            bound.add(elem.rhs[0].name)
                            stages[stage].append(elem)
                            rest.remove(elem)
                            changed = True

    place(0)
    for i, lit in enumerate(positives):
        bound |= lit.atom.variables()
        place(i + 1)
    unsafe = rule.variables() - bound
    for elem in rest:  # elements that never became evaluable
        if isinstance(elem, Literal):
            unsafe |= elem.atom.variables() - bound
        else:
            unsafe |= elem.variables() - bound
    return positives, stages, unsafe
