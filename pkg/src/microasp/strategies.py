"""The four realizations of deferred constraints.

FULL grounds them with the rest of the program.  LAZY solves without them
and adds the ground instances violated by each stable-model candidate.
EAGER simulates their unit propagation per assigned literal; POST checks for
fully violated instances at each propagation fixpoint.  Eager and post keep
the exhaustive check on total candidates as a safety net, so all four agree
on the returned models.
"""
from __future__ import annotations

from enum import Enum
from typing import Callable, Iterable, Optional, Sequence

from .cdcl import Budget, Solver, SolverCallbacks, SolveResult
from .grounder import (
    BodyPlan,
    GroundProgram,
    Substitution,
    _apply_comparison,
    _instantiate,
    _unify,
    ground_deferred_violations,
    ground_program,
    substitute_atom,
)
from .model import Atom, Comparison, GroundRule, Literal, Program, Rule, Term


class StrategyKind(str, Enum):
    FULL = "full"
    LAZY = "lazy"
    EAGER = "eager"
    POST = "post"


def check_total_candidate(
    true_atoms: Iterable[Atom], constraints: Sequence[Rule]
) -> list[GroundRule]:
    """Violated ground instances of the deferred constraints; empty = accept."""
    if not constraints:
        return []
    return ground_deferred_violations(constraints, true_atoms)


def solver_nogood(gp: GroundProgram, constraint: GroundRule) -> Optional[tuple[int, ...]]:
    """Constraint body as solver literals.

    Atoms outside the table can never become true: a positive literal on one
    makes the nogood unfalsifiable (the whole nogood is dropped, None), a
    negative literal on one is permanently true and is simply omitted.
    """
    lits: list[int] = []
    for lit in constraint.body:
        idx = gp.atoms.id_of(lit.atom)
        if idx is None:
            if lit.positive:
                return None
            continue
        lits.append(idx + 1 if lit.positive else -(idx + 1))
    return tuple(sorted(set(lits), key=lambda l: (abs(l), l < 0)))


class ConstraintIndex:
    """Joins deferred constraint bodies against the solver assignment.

    Ground atoms of the table are bucketed per predicate and argument value;
    truth is read off the assignment at query time, so no per-assignment
    bookkeeping is needed.
    """

    def __init__(self, constraints: Sequence[Rule], gp: GroundProgram):
        self.constraints = list(constraints)
        self.gp = gp
        self.plans = [BodyPlan(c) for c in self.constraints]
        self._rows: dict[str, list[tuple[int, tuple[Term, ...]]]] = {}
        self._buckets: dict[
            tuple[str, int, Term], list[tuple[int, tuple[Term, ...]]]
        ] = {}
        for i, atom in enumerate(gp.atoms):
            entry = (i + 1, atom.args)
            self._rows.setdefault(atom.predicate, []).append(entry)
            for pos, term in enumerate(atom.args):
                self._buckets.setdefault((atom.predicate, pos, term), []).append(entry)
        self._triggers: dict[tuple[str, bool], list[tuple[int, int]]] = {}
        for ci, constraint in enumerate(self.constraints):
            for ei, elem in enumerate(constraint.body):
                if isinstance(elem, Literal):
                    key = (elem.atom.predicate, elem.positive)
                    self._triggers.setdefault(key, []).append((ci, ei))

    def _candidates(
        self, predicate: str, args: tuple[Term, ...], subst: Substitution
    ) -> list[tuple[int, tuple[Term, ...]]]:
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

    def _matches(
        self, solver: Solver, ci: int, seed_subst: Substitution, budget: int
    ) -> list[tuple[Substitution, tuple[int, ...]]]:
        """Instances whose body is fully true except for at most `budget`
        undefined literals, under a starting substitution.

        Results carry the complete substitution and the nogood literals of
        the in-table body atoms.
        """
        plan = self.plans[ci]
        constraint = self.constraints[ci]
        assign = solver._assign
        id_of = self.gp.atoms.id_of
        out: list[tuple[Substitution, tuple[int, ...]]] = []

        def run_stage(
            stage: list, subst: Substitution, budget: int, lits: list[int]
        ) -> Optional[tuple[Substitution, int]]:
            for elem in stage:
                if isinstance(elem, Comparison):
                    subst = _apply_comparison(elem, subst, constraint)
                    if subst is None:
                        return None
                else:  # negative literal, bound at this point
                    atom = substitute_atom(elem.atom, subst)
                    idx = id_of(atom)
                    if idx is None:
                        continue  # never derivable: permanently true
                    val = assign[idx + 1]
                    if val == 1:
                        return None
                    if val == 0:
                        if budget == 0:
                            return None
                        budget -= 1
                    lits.append(-(idx + 1))
            return subst, budget

        def rec(i: int, subst: Substitution, budget: int, lits: list[int]) -> None:
            if i == len(plan.positives):
                out.append((subst, tuple(lits)))
                return
            pattern = plan.positives[i].atom
            if all(not t.is_variable or t.name in subst for t in pattern.args):
                atom = substitute_atom(pattern, subst)
                idx = id_of(atom)
                if idx is None:
                    return
                val = assign[idx + 1]
                if val == -1:
                    return
                nb = budget
                if val == 0:
                    if nb == 0:
                        return
                    nb -= 1
                nlits = lits + [idx + 1]
                staged = run_stage(plan.stages[i + 1], subst, nb, nlits)
                if staged is not None:
                    rec(i + 1, staged[0], staged[1], nlits)
                return
            for var, row in self._candidates(pattern.predicate, pattern.args, subst):
                val = assign[var]
                if val == -1:
                    continue
                nb = budget
                if val == 0:
                    if nb == 0:
                        continue
                    nb -= 1
                nxt = _unify(pattern.args, row, subst)
                if nxt is None:
                    continue
                nlits = lits + [var]
                staged = run_stage(plan.stages[i + 1], nxt, nb, nlits)
                if staged is None:
                    continue
                rec(i + 1, staged[0], staged[1], nlits)

        seed_lits: list[int] = []
        staged = run_stage(plan.stages[0], dict(seed_subst), budget, seed_lits)
        if staged is not None:
            rec(0, staged[0], staged[1], seed_lits)
        return out

    def eager_nogoods(
        self, solver: Solver, lit: int
    ) -> list[tuple[Substitution, int, tuple[int, ...]]]:
        """Instances made unit or falsified by `lit` having turned true.

        The assigned literal seeds a substitution through every body element
        it can match; the rest of the body joins over true atoms with at most
        one undefined literal left (the one the emitted nogood will infer).
        """
        atom = solver.atom_of(abs(lit))
        out: list[tuple[Substitution, int, tuple[int, ...]]] = []
        emitted: set[tuple[int, ...]] = set()
        for ci, ei in self._triggers.get((atom.predicate, lit > 0), ()):
            elem = self.constraints[ci].body[ei]
            subst = _unify(elem.atom.args, atom.args, {})
            if subst is None:
                continue
            for full_subst, lits in self._matches(solver, ci, subst, budget=1):
                nogood = tuple(sorted(set(lits), key=lambda l: (abs(l), l < 0)))
                if nogood in emitted or solver.has_nogood(nogood):
                    continue
                emitted.add(nogood)
                out.append((full_subst, ci, nogood))
        return out

    def post_nogoods(
        self, solver: Solver
    ) -> list[tuple[Substitution, int, tuple[int, ...]]]:
        """Instances whose body is fully true under the current trail."""
        out: list[tuple[Substitution, int, tuple[int, ...]]] = []
        emitted: set[tuple[int, ...]] = set()
        for ci in range(len(self.constraints)):
            for full_subst, lits in self._matches(solver, ci, {}, budget=0):
                nogood = tuple(sorted(set(lits), key=lambda l: (abs(l), l < 0)))
                if nogood in emitted or solver.has_nogood(nogood):
                    continue
                emitted.add(nogood)
                out.append((full_subst, ci, nogood))
        return out


def solve(
    program: Program,
    kind: StrategyKind | str = StrategyKind.FULL,
    *,
    seed: int = 0,
    budget: Optional[Budget] = None,
    support_mode: str = "auto",
    max_lazy_per_check: Optional[int] = None,
    forced_decisions: Sequence[int] = (),
    on_model: Optional[Callable] = None,
    instance_sink: Optional[list] = None,
) -> SolveResult:
    """Solve a program under the chosen deferred-constraint strategy.

    `on_model` is called with each accepted model; returning an iterable of
    nogoods (each an iterable of model literals) blocks it and continues the
    search, returning None keeps the model.  `instance_sink`, when given,
    collects (source constraint, ground instance, origin) for every deferred
    instance the strategy materializes.
    """
    kind = StrategyKind(kind)
    if kind is StrategyKind.FULL:
        gp = ground_program(program, include_deferred=True)
        deferred: list[Rule] = []
    else:
        gp = ground_program(program, include_deferred=False)
        deferred = program.deferred_rules()

    callbacks = SolverCallbacks()
    index = ConstraintIndex(deferred, gp) if deferred else None

    def record(constraint: Optional[Rule], subst: Substitution, origin: str) -> None:
        if instance_sink is None or constraint is None:
            return
        inst = _instantiate(constraint, subst, keep_negative=lambda atom: True)
        instance_sink.append((constraint, inst, origin))

    if index is not None and kind is StrategyKind.EAGER:

        def on_literal(solver: Solver, lit: int) -> list[tuple[int, ...]]:
            results = []
            for subst, ci, nogood in index.eager_nogoods(solver, lit):
                record(index.constraints[ci], subst, "eager")
                results.append(nogood)
            return results

        callbacks.on_literal_true = on_literal

    if index is not None and kind is StrategyKind.POST:

        def on_fixpoint(solver: Solver) -> list[tuple[int, ...]]:
            results = []
            for subst, ci, nogood in index.post_nogoods(solver):
                record(index.constraints[ci], subst, "post")
                results.append(nogood)
            return results

        callbacks.on_propagation_fixpoint = on_fixpoint

    if deferred or on_model is not None:

        def on_total(solver: Solver, model: frozenset[Atom]) -> list[tuple[int, ...]]:
            nogoods: list[tuple[int, ...]] = []
            for rule in deferred:
                for inst in ground_deferred_violations([rule], model):
                    lits = solver_nogood(gp, inst)
                    if lits is None:
                        continue
                    nogoods.append(lits)
                    if instance_sink is not None:
                        instance_sink.append((rule, inst, "check"))
                    if (
                        max_lazy_per_check is not None
                        and len(nogoods) >= max_lazy_per_check
                    ):
                        break
                if (
                    max_lazy_per_check is not None
                    and len(nogoods) >= max_lazy_per_check
                ):
                    break
            if nogoods:
                solver.stats.invalidations += 1
                solver.stats.lazy_added += len(nogoods)
                return nogoods
            if on_model is not None:
                extra = on_model(model)
                if extra is not None:
                    converted = []
                    for nogood in extra:
                        lits = solver_nogood(gp, GroundRule(None, tuple(nogood)))
                        if lits is not None:
                            converted.append(lits)
                    return converted
            return []

        callbacks.on_total_candidate = on_total

    solver = Solver(
        gp,
        seed=seed,
        support_mode=support_mode,
        callbacks=callbacks,
        budget=budget,
        forced_decisions=forced_decisions,
    )
    return solver.solve()
