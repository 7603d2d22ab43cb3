"""Bottom-up grounding over derivable atoms, plus the violation join used by
the deferred-constraint strategies.

Rules are instantiated by matching positive body literals left to right
against the set of derivable atoms; comparisons are evaluated (or, for `=`,
used to bind a variable) as soon as their inputs are bound.  Facts are
simplified out of bodies and rules with a definitely false body are dropped.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .model import (
    Atom,
    BodyElement,
    Comparison,
    GroundRule,
    Literal,
    Program,
    Rule,
    Term,
    binding_stages,
)

Substitution = dict  # variable name -> ground Term


class GroundingError(Exception):
    pass


class AtomTable:
    """Bijection between ground atoms and dense integer ids (0-based)."""

    def __init__(self, atoms: Iterable[Atom] = ()):
        self._atoms: list[Atom] = []
        self._ids: dict[Atom, int] = {}
        for atom in atoms:
            self.add(atom)

    def add(self, atom: Atom) -> int:
        idx = self._ids.get(atom)
        if idx is None:
            idx = len(self._atoms)
            self._ids[atom] = idx
            self._atoms.append(atom)
        return idx

    def id_of(self, atom: Atom) -> Optional[int]:
        return self._ids.get(atom)

    def atom(self, idx: int) -> Atom:
        return self._atoms[idx]

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._ids

    def __len__(self) -> int:
        return len(self._atoms)

    def __iter__(self) -> Iterator[Atom]:
        return iter(self._atoms)


class AtomIndex:
    """Ground atoms grouped by predicate with per-argument value buckets."""

    def __init__(self, atoms: Iterable[Atom] = ()):
        self._rows: dict[str, list[tuple[Term, ...]]] = {}
        self._buckets: dict[tuple[str, int, Term], list[tuple[Term, ...]]] = {}
        self._members: set[Atom] = set()
        self._order: list[Atom] = []
        for atom in atoms:
            self.add(atom)

    def add(self, atom: Atom) -> None:
        if atom in self._members:
            return
        self._members.add(atom)
        self._order.append(atom)
        self._rows.setdefault(atom.predicate, []).append(atom.args)
        for i, term in enumerate(atom.args):
            self._buckets.setdefault((atom.predicate, i, term), []).append(atom.args)

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._members

    def __len__(self) -> int:
        return len(self._members)

    def atoms(self) -> list[Atom]:
        return list(self._order)

    def candidates(
        self, predicate: str, args: tuple[Term, ...], subst: Substitution
    ) -> list[tuple[Term, ...]]:
        """Rows possibly matching the pattern, via its most selective bound arg."""
        rows = self._rows.get(predicate)
        if not rows:
            return []
        best = rows
        for i, arg in enumerate(args):
            term = subst.get(arg.name) if arg.is_variable else arg
            if term is None:
                continue
            bucket = self._buckets.get((predicate, i, term))
            if bucket is None:
                return []
            if len(bucket) < len(best):
                best = bucket
        return best


class GroundProgram:
    """Ground rules and constraints over a dense atom table."""

    def __init__(
        self,
        atoms: AtomTable,
        facts: tuple[Atom, ...],
        rules: tuple[GroundRule, ...],
    ):
        self.atoms = atoms
        self.facts = facts
        self.rules = rules
        self.fact_set = frozenset(facts)

    def to_text(self) -> str:
        """Textual form with lexicographically sorted statements."""
        lines = [f"{atom}." for atom in self.facts]
        lines.extend(f"{rule}." for rule in self.rules)
        return "\n".join(sorted(lines)) + ("\n" if lines else "")

    def __repr__(self) -> str:
        return (
            f"GroundProgram(atoms={len(self.atoms)}, facts={len(self.facts)}, "
            f"rules={len(self.rules)})"
        )


def herbrand_universe(program: Program) -> set[Term]:
    """All constants syntactically present in the program."""
    constants: set[Term] = set()

    def scan_terms(terms: Iterable[Term]) -> None:
        for term in terms:
            if not term.is_variable:
                constants.add(term)

    for rule in program.rules:
        if rule.head is not None:
            scan_terms(rule.head.args)
        for elem in rule.body:
            if isinstance(elem, Literal):
                scan_terms(elem.atom.args)
            else:
                scan_terms(elem.lhs)
                scan_terms(elem.rhs)
    return constants


def substitute_atom(atom: Atom, subst: Substitution) -> Atom:
    if not atom.args:
        return atom
    return Atom(
        atom.predicate,
        tuple(subst[t.name] if t.is_variable else t for t in atom.args),
    )


def _unify(
    args: tuple[Term, ...], row: tuple[Term, ...], subst: Substitution
) -> Optional[Substitution]:
    out = subst
    for pat, val in zip(args, row):
        if pat.is_variable:
            bound = out.get(pat.name)
            if bound is None:
                if out is subst:
                    out = dict(subst)
                out[pat.name] = val
            elif bound != val:
                return None
        elif pat != val:
            return None
    return out if out is not subst else dict(subst)


def _eval_side(
    terms: tuple[Term, ...], subst: Substitution, rule: Rule
) -> Optional[Term]:
    """Ground value of a term sum, or None while a variable is unbound."""
    values: list[Term] = []
    for term in terms:
        if term.is_variable:
            bound = subst.get(term.name)
            if bound is None:
                return None
            values.append(bound)
        else:
            values.append(term)
    if len(values) == 1:
        return values[0]
    total = 0
    for value in values:
        if not value.is_integer:
            raise GroundingError(
                f"arithmetic on non-integer constant '{value}' in rule '{rule}.'"
            )
        total += value.value
    return Term.num(total)


def _compare(op: str, left: Term, right: Term, rule: Rule) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if not (left.is_integer and right.is_integer):
        bad = left if not left.is_integer else right
        raise GroundingError(
            f"ordered comparison on non-integer constant '{bad}' in rule '{rule}.'"
        )
    if op == "<":
        return left.value < right.value
    if op == "<=":
        return left.value <= right.value
    if op == ">":
        return left.value > right.value
    return left.value >= right.value


def _apply_comparison(
    cmp: Comparison, subst: Substitution, rule: Rule
) -> Optional[Substitution]:
    """Evaluate a comparison; a binding `=` extends the substitution instead."""
    left = _eval_side(cmp.lhs, subst, rule)
    right = _eval_side(cmp.rhs, subst, rule)
    if left is not None and right is not None:
        return subst if _compare(cmp.op, left, right, rule) else None
    if cmp.op == "=":
        if left is None and len(cmp.lhs) == 1 and right is not None:
            out = dict(subst)
            out[cmp.lhs[0].name] = right
            return out
        if right is None and len(cmp.rhs) == 1 and left is not None:
            out = dict(subst)
            out[cmp.rhs[0].name] = left
            return out
    raise GroundingError(f"comparison '{cmp}' not evaluable in rule '{rule}.'")


class BodyPlan:
    """Precomputed join order for one rule body."""

    def __init__(self, rule: Rule):
        self.rule = rule
        self.positives, self.stages, unsafe = binding_stages(rule)
        if unsafe:
            raise GroundingError(
                f"unsafe variable {sorted(unsafe)[0]} in rule '{rule}.'"
            )


def _run_stage(
    elems: list[BodyElement],
    subst: Substitution,
    rule: Rule,
    neg_filter: Optional[Callable[[Atom], bool]],
) -> Optional[Substitution]:
    for elem in elems:
        if isinstance(elem, Comparison):
            subst = _apply_comparison(elem, subst, rule)
            if subst is None:
                return None
        elif neg_filter is not None:
            if not neg_filter(substitute_atom(elem.atom, subst)):
                return None
    return subst


def iter_matches(
    plan: BodyPlan,
    index: AtomIndex,
    neg_filter: Optional[Callable[[Atom], bool]] = None,
) -> Iterator[Substitution]:
    """All substitutions whose positive body literals match the index.

    Comparisons prune (or bind) as soon as evaluable.  When `neg_filter` is
    given, a negative literal prunes unless the filter accepts its atom;
    otherwise negative literals do not restrict matching.
    """
    rule = plan.rule

    def rec(i: int, subst: Substitution) -> Iterator[Substitution]:
        if i == len(plan.positives):
            yield subst
            return
        pattern = plan.positives[i].atom
        for row in index.candidates(pattern.predicate, pattern.args, subst):
            nxt = _unify(pattern.args, row, subst)
            if nxt is None:
                continue
            nxt = _run_stage(plan.stages[i + 1], nxt, rule, neg_filter)
            if nxt is None:
                continue
            yield from rec(i + 1, nxt)

    start = _run_stage(plan.stages[0], {}, rule, neg_filter)
    if start is not None:
        yield from rec(0, start)


def _instantiate(
    rule: Rule, subst: Substitution, keep_negative: Callable[[Atom], bool]
) -> Optional[GroundRule]:
    """Ground rule instance for a complete substitution, or None if inert.

    Negative literals failing `keep_negative` are dropped as definitely true;
    a body holding an atom both positively and negatively never fires.
    """
    head = substitute_atom(rule.head, subst) if rule.head is not None else None
    body: list[Literal] = []
    seen: set[Literal] = set()
    for elem in rule.body:
        if not isinstance(elem, Literal):
            continue
        atom = substitute_atom(elem.atom, subst)
        if not elem.positive and not keep_negative(atom):
            continue
        lit = Literal(atom, elem.positive)
        if lit in seen:
            continue
        if lit.negated() in seen:
            return None
        seen.add(lit)
        body.append(lit)
    return GroundRule(head, tuple(body))


def ground_rule(
    rule: Rule,
    domains: Union[AtomIndex, Mapping[str, Iterable[tuple[Term, ...]]]],
) -> list[GroundRule]:
    """Instances of one rule over per-predicate ground-atom extents.

    Positive body literals match the extents, comparisons are evaluated away,
    and negative literals are kept verbatim.
    """
    if isinstance(domains, AtomIndex):
        index = domains
    else:
        index = AtomIndex(
            Atom(pred, row) for pred, rows in domains.items() for row in rows
        )
    plan = BodyPlan(rule)
    out: dict[GroundRule, None] = {}
    for subst in iter_matches(plan, index):
        inst = _instantiate(rule, subst, keep_negative=lambda atom: True)
        if inst is not None:
            out[inst] = None
    return list(out)


def ground_program(program: Program, include_deferred: bool = False) -> GroundProgram:
    """Ground the program (deferred constraints excluded unless requested).

    Instantiation is bottom-up over derivable atoms: positive body literals
    only match atoms derivable by some rule, so the result is usually far
    smaller than the full instantiation while having the same stable models.
    """
    kept = [
        rule
        for i, rule in enumerate(program.rules)
        if include_deferred or i not in program.deferred
    ]
    head_plans = [BodyPlan(r) for r in kept if r.head is not None]
    index = AtomIndex()
    changed = True
    while changed:
        changed = False
        for plan in head_plans:
            for subst in iter_matches(plan, index):
                head = substitute_atom(plan.rule.head, subst)
                if head not in index:
                    index.add(head)
                    changed = True

    instances: dict[GroundRule, None] = {}
    for rule in kept:
        plan = BodyPlan(rule)
        for subst in iter_matches(plan, index):
            inst = _instantiate(rule, subst, keep_negative=lambda atom: atom in index)
            if inst is not None:
                instances[inst] = None

    # Fact propagation: definitely true atoms vanish from bodies, rules with a
    # definitely false literal vanish entirely.
    facts: dict[Atom, None] = {}
    pending = list(instances)
    changed = True
    while changed:
        changed = False
        out: list[GroundRule] = []
        for inst in pending:
            if inst.head is not None and inst.head in facts:
                changed = True
                continue
            body: list[Literal] = []
            dropped = False
            for lit in inst.body:
                if lit.atom in facts:
                    if lit.positive:
                        continue
                    dropped = True
                    break
                body.append(lit)
            if dropped:
                changed = True
                continue
            if len(body) != len(inst.body):
                changed = True
                inst = GroundRule(inst.head, tuple(body))
            if not inst.body and inst.head is not None:
                facts[inst.head] = None
                changed = True
                continue
            out.append(inst)
        pending = out

    unique: dict[GroundRule, None] = {}
    for inst in pending:
        unique[inst] = None
    return GroundProgram(
        AtomTable(index.atoms()), tuple(facts), tuple(unique)
    )


def naive_ground_program(program: Program) -> GroundProgram:
    """Full instantiation over the Herbrand base, with no simplification.

    Reference semantics for oracle cross-checks; exponential in rule arity.
    """
    constants = sorted(
        herbrand_universe(program),
        key=lambda t: (0, t.value, "") if t.is_integer else (1, 0, t.name),
    )
    arities: dict[str, int] = {}
    for rule in program.rules:
        atoms = [rule.head] if rule.head is not None else []
        atoms.extend(
            e.atom for e in rule.body if isinstance(e, Literal)
        )
        for atom in atoms:
            arities[atom.predicate] = atom.arity
    domains = {
        pred: [tuple(c) for c in itertools.product(constants, repeat=arity)]
        for pred, arity in arities.items()
    }
    table = AtomTable()
    facts: dict[Atom, None] = {}
    rules: dict[GroundRule, None] = {}
    for rule in program.rules:
        for inst in ground_rule(rule, domains):
            if inst.head is not None:
                table.add(inst.head)
            for lit in inst.body:
                table.add(lit.atom)
            if inst.head is not None and not inst.body:
                facts[inst.head] = None
            else:
                rules[inst] = None
    return GroundProgram(table, tuple(facts), tuple(rules))


def ground_deferred_violations(
    constraints: Iterable[Rule], true_atoms: Iterable[Atom]
) -> list[GroundRule]:
    """Ground instances of the constraints violated by a total interpretation.

    The join runs against the true atoms only, so the full instantiation of
    the constraints is never materialized.
    """
    index = AtomIndex(true_atoms)
    out: dict[GroundRule, None] = {}
    for constraint in constraints:
        if constraint.head is not None:
            raise ValueError(f"not a constraint: '{constraint}.'")
        plan = BodyPlan(constraint)
        for subst in iter_matches(
            plan, index, neg_filter=lambda atom: atom not in index
        ):
            inst = _instantiate(constraint, subst, keep_negative=lambda atom: True)
            if inst is not None:
                out[inst] = None
    return list(out)
