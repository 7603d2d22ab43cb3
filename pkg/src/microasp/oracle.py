"""Brute-force semantic ground truth for small ground programs.

Stability is checked by the reduct construction: a total interpretation is
stable iff it is a model of the program and its positive atoms equal the
least model of the reduct's definite rules.
"""
from __future__ import annotations

import itertools
from typing import Iterable

from .grounder import GroundProgram
from .model import Atom, GroundRule

#: Enumeration guard: assignments are enumerated over atoms that are neither
#: facts nor underivable, capped at this many free atoms.
MAX_FREE_ATOMS = 24


def reduct(gp: GroundProgram, true_atoms: Iterable[Atom]) -> GroundProgram:
    """Delete rules whose negative body is false w.r.t. the interpretation,
    then strip the negative body from the survivors."""
    truths = frozenset(true_atoms)
    facts: dict[Atom, None] = {a: None for a in gp.facts}
    rules: dict[GroundRule, None] = {}
    for rule in gp.rules:
        if any(not lit.positive and lit.atom in truths for lit in rule.body):
            continue
        body = tuple(lit for lit in rule.body if lit.positive)
        if rule.head is not None and not body:
            facts[rule.head] = None
        else:
            rules[GroundRule(rule.head, body)] = None
    return GroundProgram(gp.atoms, tuple(facts), tuple(rules))


def least_model(gp: GroundProgram) -> frozenset[Atom]:
    """Least fixpoint of the definite rules of a positive program."""
    derived: set[Atom] = set(gp.facts)
    changed = True
    while changed:
        changed = False
        for rule in gp.rules:
            if rule.head is None or rule.head in derived:
                continue
            if all(lit.atom in derived for lit in rule.body):
                derived.add(rule.head)
                changed = True
    return frozenset(derived)


def is_model(gp: GroundProgram, true_atoms: frozenset[Atom]) -> bool:
    for rule in gp.rules:
        body_true = all(
            (lit.atom in true_atoms) == lit.positive for lit in rule.body
        )
        if body_true and (rule.head is None or rule.head not in true_atoms):
            return False
    return gp.fact_set <= true_atoms


def is_stable_model(gp: GroundProgram, true_atoms: Iterable[Atom]) -> bool:
    """True iff the total interpretation given by its true atoms is stable."""
    truths = frozenset(true_atoms)
    if not is_model(gp, truths):
        return False
    return least_model(reduct(gp, truths)) == truths


def enumerate_stable_models(
    gp: GroundProgram, max_free: int = MAX_FREE_ATOMS
) -> list[frozenset[Atom]]:
    """All stable models, by exhaustive assignment enumeration.

    Facts are pinned true and atoms with no deriving rule are pinned false;
    the remaining atoms are enumerated, guarded at `max_free`.
    """
    heads = {rule.head for rule in gp.rules if rule.head is not None}
    free = [
        atom for atom in gp.atoms if atom not in gp.fact_set and atom in heads
    ]
    if len(free) > max_free:
        raise ValueError(
            f"{len(free)} free atoms exceed the enumeration guard of {max_free}"
        )
    models: list[frozenset[Atom]] = []
    base = frozenset(gp.fact_set)
    for bits in itertools.product((False, True), repeat=len(free)):
        candidate = base | {atom for atom, bit in zip(free, bits) if bit}
        if is_stable_model(gp, candidate):
            models.append(candidate)
    models.sort(key=lambda m: sorted(str(a) for a in m))
    return models
