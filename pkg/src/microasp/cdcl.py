"""Conflict-driven search for stable models over a nogood store.

Literals are signed ints: +v asserts the atom with table id v-1 true, -v
asserts it false.  A nogood is falsified when all its literals are true;
unit propagation infers the complement of the last non-true literal of an
otherwise-true nogood.  Support is enforced through completion nogoods for
atoms with few defining rules and through a support propagator above that;
non-tight programs get an unfounded-set check on total candidates.
"""
from __future__ import annotations

import itertools
import time
from collections import deque
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Callable, Iterable, Optional, Sequence

from .grounder import GroundProgram
from .model import Atom

SAT = "SAT"
UNSAT = "UNSAT"
TIMEOUT = "TIMEOUT"

EXIT_MODEL = 10
EXIT_UNSAT = 20
EXIT_TIMEOUT = 30

#: Atoms with more defining rules than this get the support propagator
#: instead of completion nogoods.
COMPLETION_MAX_RULES = 8
#: Safety valve: the product expansion of the completion is also capped.
COMPLETION_MAX_PRODUCT = 4096

VSIDS_DECAY = 0.95
RESTART_UNIT = 32
DELETION_BASE = 4000
DELETION_STEP = 500


def luby(i: int) -> int:
    """The reluctant-doubling sequence 1,1,2,1,1,2,4,... (1-indexed)."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


@dataclass
class Budget:
    max_conflicts: Optional[int] = None
    max_seconds: Optional[float] = None


@dataclass
class SolveStats:
    decisions: int = 0
    conflicts: int = 0
    restarts: int = 0
    learned: int = 0
    deleted: int = 0
    propagations: int = 0
    invalidations: int = 0
    lazy_added: int = 0
    propagator_calls: int = 0
    propagator_nogoods: int = 0
    unfounded_vetoes: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "decisions": self.decisions,
            "conflicts": self.conflicts,
            "restarts": self.restarts,
            "learned": self.learned,
            "deleted": self.deleted,
            "propagations": self.propagations,
            "invalidations": self.invalidations,
            "lazy_added": self.lazy_added,
            "propagator_calls": self.propagator_calls,
            "propagator_nogoods": self.propagator_nogoods,
            "unfounded_vetoes": self.unfounded_vetoes,
        }


@dataclass
class SolveResult:
    status: str
    model: Optional[frozenset[Atom]]
    stats: SolveStats

    @property
    def exit_code(self) -> int:
        return {SAT: EXIT_MODEL, UNSAT: EXIT_UNSAT, TIMEOUT: EXIT_TIMEOUT}[self.status]


@dataclass
class SolverCallbacks:
    """Hooks may only return nogoods to add; they never touch the trail.

    on_literal_true(solver, lit) runs per assigned literal, interleaved with
    unit propagation.  on_propagation_fixpoint(solver) runs once unit and
    support propagation rest.  on_total_candidate(solver, model) may veto a
    total assignment by returning nogoods; an empty return accepts it.
    """

    on_literal_true: Optional[Callable] = None
    on_propagation_fixpoint: Optional[Callable] = None
    on_total_candidate: Optional[Callable] = None


class StoredNogood:
    __slots__ = ("lits", "w0", "w1", "learned", "deleted", "activity", "lbd")

    def __init__(self, lits: tuple[int, ...], learned: bool = False):
        self.lits = lits
        self.w0 = lits[0] if lits else 0
        self.w1 = lits[1] if len(lits) > 1 else self.w0
        self.learned = learned
        self.deleted = False
        self.activity = 0.0
        self.lbd = 0

    def __repr__(self) -> str:
        return f"Nogood{self.lits}"


class _Stop(Exception):
    pass


class Solver:
    """One CDCL search instance over a ground program."""

    def __init__(
        self,
        gp: GroundProgram,
        *,
        seed: int = 0,
        support_mode: str = "auto",
        callbacks: Optional[SolverCallbacks] = None,
        budget: Optional[Budget] = None,
        forced_decisions: Sequence[int] = (),
    ):
        if support_mode not in ("auto", "completion", "propagator"):
            raise ValueError(f"unknown support mode {support_mode!r}")
        self.gp = gp
        self.seed = seed
        self.callbacks = callbacks or SolverCallbacks()
        self.budget = budget or Budget()
        self.stats = SolveStats()
        self.nogood_queue: deque[tuple[int, ...]] = deque()

        n = len(gp.atoms)
        self._nvars = n
        self._assign = [0] * (n + 1)
        self._level_arr = [0] * (n + 1)
        self._pos = [0] * (n + 1)
        self._reason: list[Optional[StoredNogood]] = [None] * (n + 1)
        self._phase = [False] * (n + 1)
        self._trail: list[int] = []
        self._trail_lim: list[int] = []
        self._prop_head = 0
        self._num_assigned = 0

        self._watches: dict[int, list[StoredNogood]] = {}
        self._by_lits: dict[frozenset[int], StoredNogood] = {}
        self._learned: list[StoredNogood] = []
        self._fragile: list[StoredNogood] = []
        self._root_units: list[StoredNogood] = []
        self._root_conflict: Optional[StoredNogood] = None
        self._store_count = 0

        self._activity = [0.0] * (n + 1)
        self._var_inc = 1.0
        self._cla_inc = 1.0
        rank = list(range(n + 1))
        if seed:
            import random

            random.Random(seed).shuffle(rank)
        self._rank = rank
        self._heap: list[tuple[float, int, int, float]] = []
        for var in range(1, n + 1):
            heappush(self._heap, (0.0, self._rank[var], var, 0.0))

        self._forced = list(forced_decisions)
        self._forced_at = 0
        self._restart_count = 0
        self._conf_since_restart = 0
        self._n_reductions = 0
        self._start_time = time.monotonic()
        self.last_learned: Optional[tuple[int, ...]] = None

        self._fact_vars = {gp.atoms.id_of(a) + 1 for a in gp.facts}
        self._defs: dict[int, list[tuple[int, ...]]] = {}
        self._sup_heads: list[int] = []
        self._sup_watch: dict[int, list[int]] = {}
        self._build_static(support_mode)
        self._tight = self._is_tight()

    # ------------------------------------------------------------------ setup

    def lit_of(self, atom: Atom, positive: bool = True) -> Optional[int]:
        idx = self.gp.atoms.id_of(atom)
        if idx is None:
            return None
        return idx + 1 if positive else -(idx + 1)

    def atom_of(self, var: int) -> Atom:
        return self.gp.atoms.atom(var - 1)

    def _build_static(self, support_mode: str) -> None:
        for atom in self.gp.facts:
            self._install((-(self.gp.atoms.id_of(atom) + 1),))
        for rule in self.gp.rules:
            body = []
            for lit in rule.body:
                var = self.gp.atoms.id_of(lit.atom)
                if var is None:
                    raise ValueError(f"atom {lit.atom} missing from the table")
                body.append(var + 1 if lit.positive else -(var + 1))
            if rule.head is None:
                self._install(tuple(body))
            else:
                head_var = self.gp.atoms.id_of(rule.head) + 1
                self._install((-head_var, *body))
                self._defs.setdefault(head_var, []).append(tuple(body))

        for var in range(1, self._nvars + 1):
            if var in self._fact_vars:
                continue
            bodies = self._defs.get(var)
            if not bodies:
                self._install((var,))
                continue
            product = 1
            for body in bodies:
                product *= len(body)
            use_completion = support_mode == "completion" or (
                support_mode == "auto"
                and len(bodies) <= COMPLETION_MAX_RULES
                and product <= COMPLETION_MAX_PRODUCT
            )
            if use_completion:
                for combo in itertools.product(*bodies):
                    self._install((var, *(-l for l in combo)))
            else:
                self._sup_heads.append(var)
                touched = {var}
                touched.update(abs(l) for body in bodies for l in body)
                for v in touched:
                    self._sup_watch.setdefault(v, []).append(var)

    def _is_tight(self) -> bool:
        """No cycle through positive bodies in the head-dependency graph."""
        graph: dict[int, list[int]] = {}
        for head, bodies in self._defs.items():
            deps = {abs(l) for body in bodies for l in body if l > 0}
            graph[head] = sorted(deps)
        color: dict[int, int] = {}
        for start in graph:
            if color.get(start):
                continue
            stack = [(start, iter(graph.get(start, ())))]
            color[start] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for nxt in it:
                    c = color.get(nxt, 0)
                    if c == 1:
                        return False
                    if c == 0:
                        color[nxt] = 1
                        stack.append((nxt, iter(graph.get(nxt, ()))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = 2
                    stack.pop()
        return True

    # ------------------------------------------------------------- assignment

    @property
    def level(self) -> int:
        return len(self._trail_lim)

    def value_of(self, lit: int) -> int:
        """1 if the literal is true, -1 if false, 0 if undefined."""
        v = self._assign[abs(lit)]
        if v == 0:
            return 0
        return v if lit > 0 else -v

    def level_of(self, lit: int) -> int:
        return self._level_arr[abs(lit)]

    def reason_of(self, lit: int) -> Optional[StoredNogood]:
        return self._reason[abs(lit)]

    def trail_literals(self) -> list[int]:
        return list(self._trail)

    def _assign_lit(self, lit: int, reason: Optional[StoredNogood]) -> None:
        var = abs(lit)
        self._assign[var] = 1 if lit > 0 else -1
        self._level_arr[var] = self.level
        self._pos[var] = len(self._trail)
        self._reason[var] = reason
        self._phase[var] = lit > 0
        self._trail.append(lit)
        self._num_assigned += 1
        if reason is not None:
            self.stats.propagations += 1

    def _backjump(self, target: int) -> None:
        trail = self._trail
        while trail and self._level_arr[abs(trail[-1])] > target:
            var = abs(trail.pop())
            self._assign[var] = 0
            self._reason[var] = None
            self._pos[var] = 0
            self._num_assigned -= 1
            act = self._activity[var]
            heappush(self._heap, (-act, self._rank[var], var, act))
        del self._trail_lim[target:]
        if self._prop_head > len(trail):
            self._prop_head = len(trail)
        if self._fragile:
            self._recheck_fragile()

    def _recheck_fragile(self) -> None:
        """Restore unit inferences of nogoods that were added while falsified
        or unit; plain watch triggers only fire on assignments, not undoes."""
        still: list[StoredNogood] = []
        for ng in self._fragile:
            if ng.deleted:
                continue
            not_true = [l for l in ng.lits if self.value_of(l) != 1]
            if len(not_true) >= 2:
                self._rewatch(ng, not_true[0], not_true[1])
                continue
            if len(not_true) == 1 and self.value_of(not_true[0]) == 0:
                self._assign_lit(-not_true[0], ng)
            still.append(ng)
        self._fragile = still

    def _rewatch(self, ng: StoredNogood, w0: int, w1: int) -> None:
        for old in (ng.w0, ng.w1):
            if old not in (w0, w1):
                lst = self._watches.get(old)
                if lst and ng in lst:
                    lst.remove(ng)
        for new in (w0, w1):
            if new not in (ng.w0, ng.w1):
                self._watches.setdefault(new, []).append(ng)
        ng.w0, ng.w1 = w0, w1

    # ----------------------------------------------------------------- install

    def has_nogood(self, lits: Iterable[int]) -> bool:
        return frozenset(lits) in self._by_lits

    def add_nogood(self, lits: Iterable[int]) -> Optional[StoredNogood]:
        """Add a nogood mid-search; returns the conflict if it is falsified."""
        return self._install(tuple(lits))

    def _install(self, lits: Iterable[int], learned: bool = False) -> Optional[StoredNogood]:
        ordered: list[int] = []
        seen: set[int] = set()
        for lit in sorted(set(lits), key=lambda l: (abs(l), l < 0)):
            if -lit in seen:
                return None  # tautological, never falsifiable
            seen.add(lit)
            ordered.append(lit)
        if not ordered:
            ng = StoredNogood(())
            self._root_conflict = ng
            return ng
        key = frozenset(ordered)
        if not learned and key in self._by_lits:
            return None
        ng = StoredNogood(tuple(ordered), learned=learned)
        self._store_count += 1
        if not learned:
            self._by_lits[key] = ng
        if len(ordered) == 1:
            self._root_units.append(ng)
            return None
        not_true = [l for l in ordered if self.value_of(l) != 1]
        if len(not_true) >= 2:
            ng.w0, ng.w1 = not_true[0], not_true[1]
        else:
            by_depth = sorted(
                (l for l in ordered if self.value_of(l) == 1),
                key=lambda l: -self._pos[abs(l)],
            )
            if len(not_true) == 1:
                ng.w0 = not_true[0]
                ng.w1 = by_depth[0]
            else:
                ng.w0, ng.w1 = by_depth[0], by_depth[1]
        self._watches.setdefault(ng.w0, []).append(ng)
        self._watches.setdefault(ng.w1, []).append(ng)
        if learned:
            self._learned.append(ng)
        if len(not_true) == 0:
            if self.level > 0:
                self._fragile.append(ng)
            return ng
        if len(not_true) == 1:
            if self.level > 0:
                self._fragile.append(ng)
            if self.value_of(not_true[0]) == 0:
                self._assign_lit(-not_true[0], ng)
        return None

    # -------------------------------------------------------------- propagate

    def propagate(self) -> Optional[StoredNogood]:
        """Run unit, support, and hook propagation to fixpoint.

        Returns the first falsified nogood, or None at fixpoint.
        """
        cb_lit = self.callbacks.on_literal_true
        cb_fix = self.callbacks.on_propagation_fixpoint
        while True:
            if self._root_conflict is not None:
                return self._root_conflict
            if self._root_units:
                if self.level > 0:
                    self._backjump(0)
                units, self._root_units = self._root_units, []
                for ng in units:
                    lit = ng.lits[0]
                    val = self.value_of(lit)
                    if val == 1:
                        return ng
                    if val == 0:
                        self._assign_lit(-lit, ng)
                continue
            if self.nogood_queue:
                conflict = self._install(self.nogood_queue.popleft())
                if conflict is not None:
                    return conflict
                continue
            if self._prop_head < len(self._trail):
                lit = self._trail[self._prop_head]
                self._prop_head += 1
                conflict = self._propagate_watches(lit)
                if conflict is not None:
                    return conflict
                if self._sup_watch:
                    conflict = self._support_propagate(lit)
                    if conflict is not None:
                        return conflict
                if cb_lit is not None:
                    self.stats.propagator_calls += 1
                    emitted = list(cb_lit(self, lit))
                    if emitted:
                        self.stats.propagator_nogoods += len(emitted)
                        conflict, _ = self._apply_emitted(emitted)
                        if conflict is not None:
                            return conflict
                continue
            if cb_fix is not None:
                self.stats.propagator_calls += 1
                emitted = list(cb_fix(self))
                if emitted:
                    self.stats.propagator_nogoods += len(emitted)
                    conflict, progressed = self._apply_emitted(emitted)
                    if conflict is not None:
                        return conflict
                    if progressed:
                        continue
            if (
                self._root_units
                or self.nogood_queue
                or self._prop_head < len(self._trail)
            ):
                continue
            return None

    def _apply_emitted(
        self, nogoods: list[tuple[int, ...]]
    ) -> tuple[Optional[StoredNogood], bool]:
        """Install hook-produced nogoods; on conflict the rest join the queue."""
        before_trail = len(self._trail)
        before_store = self._store_count
        for i, lits in enumerate(nogoods):
            conflict = self._install(tuple(lits))
            if conflict is not None:
                self.nogood_queue.extend(tuple(l) for l in nogoods[i + 1 :])
                return conflict, True
        progressed = (
            len(self._trail) != before_trail
            or self._store_count != before_store
            or bool(self._root_units)
        )
        return None, progressed

    def _propagate_watches(self, lit: int) -> Optional[StoredNogood]:
        watchers = self._watches.get(lit)
        if not watchers:
            return None
        assign = self._assign
        kept: list[StoredNogood] = []
        n = len(watchers)
        i = 0
        while i < n:
            ng = watchers[i]
            i += 1
            if ng.deleted:
                continue
            other = ng.w1 if ng.w0 == lit else ng.w0
            ov = assign[abs(other)]
            osign = 1 if other > 0 else -1
            if ov == -osign:  # other literal false: cannot falsify now
                kept.append(ng)
                continue
            repl = 0
            for l in ng.lits:
                if l == ng.w0 or l == ng.w1:
                    continue
                lv = assign[abs(l)]
                if lv == 0 or lv != (1 if l > 0 else -1):
                    repl = l
                    break
            if repl:
                if ng.w0 == lit:
                    ng.w0 = repl
                else:
                    ng.w1 = repl
                self._watches.setdefault(repl, []).append(ng)
                continue
            kept.append(ng)
            if ov == osign:  # every literal true: falsified
                kept.extend(watchers[i:])
                self._watches[lit] = kept
                return ng
            self._assign_lit(-other, ng)
        self._watches[lit] = kept
        return None

    # ------------------------------------------------------ support propagator

    def _support_propagate(self, lit: int) -> Optional[StoredNogood]:
        heads = self._sup_watch.get(abs(lit))
        if not heads:
            return None
        for head in heads:
            conflict = self._support_check(head)
            if conflict is not None:
                return conflict
        return None

    def _support_check(self, head: int) -> Optional[StoredNogood]:
        """Lazily derive the completion nogood an unsupported head needs."""
        val = self._assign[head]
        if val == -1:
            return None
        open_bodies: list[tuple[int, ...]] = []
        witnesses: list[int] = []
        for body in self._defs[head]:
            false_lit = 0
            for l in body:
                if self.value_of(l) == -1:
                    false_lit = l
                    break
            if false_lit:
                witnesses.append(-false_lit)
            else:
                open_bodies.append(body)
        if not open_bodies:
            return self._install((head, *witnesses))
        if val == 1 and len(open_bodies) == 1:
            for l in open_bodies[0]:
                if self.value_of(l) == 0:
                    conflict = self._install((head, -l, *witnesses))
                    if conflict is not None:
                        return conflict
        return None

    # -------------------------------------------------------------- conflicts

    def analyze_conflict(
        self, conflict: StoredNogood
    ) -> Optional[tuple[tuple[int, ...], int]]:
        """First-UIP learned nogood and backjump level; None means UNSAT.

        Read-only: the caller backjumps and installs the result.
        """
        if not conflict.lits:
            return None
        level = max(self._level_arr[abs(l)] for l in conflict.lits)
        if level == 0:
            return None
        return self._analyze(conflict, level, bump=False)

    def _analyze(
        self, conflict: StoredNogood, level: int, bump: bool = True
    ) -> tuple[tuple[int, ...], int]:
        seen: set[int] = set()
        tail: list[int] = []
        counter = 0
        reason_lits: Sequence[int] = conflict.lits
        skip = 0
        idx = len(self._trail) - 1
        if bump:
            self._bump_cla(conflict)
        while True:
            for l in reason_lits:
                if l == skip:
                    continue
                var = abs(l)
                if var in seen:
                    continue
                lvl = self._level_arr[var]
                if lvl == 0:
                    continue
                seen.add(var)
                if bump:
                    self._bump_var(var)
                if lvl == level:
                    counter += 1
                else:
                    tail.append(l)
            while abs(self._trail[idx]) not in seen:
                idx -= 1
            uip = self._trail[idx]
            idx -= 1
            counter -= 1
            if counter <= 0:
                break
            reason = self._reason[abs(uip)]
            if bump:
                self._bump_cla(reason)
            reason_lits = reason.lits
            skip = -uip
        learned = (uip, *tail)
        bj = max((self._level_arr[abs(l)] for l in tail), default=0)
        return learned, bj

    def resolve_conflict(self, conflict: StoredNogood) -> bool:
        """Learn from a falsified nogood and backjump; False means UNSAT.

        Backjumping may replay inferences of previously added nogoods, so the
        asserted literal can already be set; if it came back with the wrong
        polarity the learned nogood is falsified and is analyzed in turn (at
        a strictly smaller decision level, so this terminates).
        """
        while True:
            if not conflict.lits:
                return False
            maxlvl = max(self._level_arr[abs(l)] for l in conflict.lits)
            if maxlvl == 0:
                return False
            if maxlvl < self.level:
                self._backjump(maxlvl)
            learned, bj = self._analyze(conflict, maxlvl)
            self.last_learned = learned
            self._backjump(bj)
            self._var_inc /= VSIDS_DECAY
            self._cla_inc /= 0.999
            if len(learned) == 1:
                stored = StoredNogood(learned, learned=True)
                self._store_count += 1
                self._root_units.append(stored)
                self.stats.learned += 1
                return True
            stored = self._attach_learned(learned)
            uip_val = self.value_of(learned[0])
            if uip_val == 0:
                self._assign_lit(-learned[0], stored)
                return True
            if uip_val == -1:  # complement already inferred during backjump
                if self.level > 0:
                    self._fragile.append(stored)
                return True
            conflict = stored  # falsified again; keep resolving

    def _attach_learned(self, learned: tuple[int, ...]) -> StoredNogood:
        ng = StoredNogood(learned, learned=True)
        self._store_count += 1
        ng.lbd = len({self._level_arr[abs(l)] for l in learned})
        ng.activity = self._cla_inc
        ng.w0 = learned[0]
        ng.w1 = max(learned[1:], key=lambda l: self._pos[abs(l)])
        self._watches.setdefault(ng.w0, []).append(ng)
        self._watches.setdefault(ng.w1, []).append(ng)
        self._learned.append(ng)
        self.stats.learned += 1
        return ng

    def _bump_var(self, var: int) -> None:
        act = self._activity[var] + self._var_inc
        self._activity[var] = act
        if act > 1e100:
            for v in range(1, self._nvars + 1):
                self._activity[v] *= 1e-100
            self._var_inc *= 1e-100
            act = self._activity[var]
        if self._assign[var] == 0:
            heappush(self._heap, (-act, self._rank[var], var, act))

    def _bump_cla(self, ng: Optional[StoredNogood]) -> None:
        if ng is None or not ng.learned:
            return
        ng.activity += self._cla_inc
        if ng.activity > 1e20:
            for other in self._learned:
                other.activity *= 1e-20
            self._cla_inc *= 1e-20

    # -------------------------------------------------------------- decisions

    def choose_literal(self) -> int:
        """Next decision literal: forced ones first, then best VSIDS score
        with ties broken by the seed permutation; phase saving, negative
        first."""
        while self._forced_at < len(self._forced):
            lit = self._forced[self._forced_at]
            self._forced_at += 1
            if self._assign[abs(lit)] == 0:
                return lit
        heap = self._heap
        while heap:
            negact, _, var, snap = heappop(heap)
            if self._assign[var] != 0 or snap != self._activity[var]:
                continue
            heappush(heap, (negact, self._rank[var], var, snap))  # keep for later
            return var if self._phase[var] else -var
        raise RuntimeError("choose_literal called with no undefined atoms")

    def decide(self, lit: int) -> None:
        self._trail_lim.append(len(self._trail))
        self._assign_lit(lit, None)
        self.stats.decisions += 1

    # ------------------------------------------------------- restart, deletion

    def restart_if_needed(self) -> bool:
        if self._conf_since_restart < RESTART_UNIT * luby(self._restart_count + 1):
            return False
        self._restart_count += 1
        self._conf_since_restart = 0
        self.stats.restarts += 1
        self._backjump(0)
        if self.budget.max_seconds is not None:
            if time.monotonic() - self._start_time > self.budget.max_seconds:
                raise _Stop()
        return True

    def delete_constraints_if_needed(self) -> int:
        active = self.stats.learned - self.stats.deleted
        if active <= DELETION_BASE + DELETION_STEP * self._n_reductions:
            return 0
        self._n_reductions += 1
        locked = {
            self._reason[abs(l)] for l in self._trail if self._reason[abs(l)]
        }
        candidates = [
            ng
            for ng in self._learned
            if not ng.deleted and ng.lbd > 2 and ng not in locked
        ]
        candidates.sort(key=lambda ng: ng.activity)
        victims = candidates[: len(candidates) // 2]
        for ng in victims:
            ng.deleted = True
        self.stats.deleted += len(victims)
        self._learned = [ng for ng in self._learned if not ng.deleted]
        return len(victims)

    # ------------------------------------------------------------- total check

    def model_atoms(self) -> frozenset[Atom]:
        return frozenset(
            self.gp.atoms.atom(v - 1)
            for v in range(1, self._nvars + 1)
            if self._assign[v] == 1
        )

    def _unfounded_nogoods(self) -> list[tuple[int, ...]]:
        founded = set(self._fact_vars)
        changed = True
        while changed:
            changed = False
            for head, bodies in self._defs.items():
                if self._assign[head] != 1 or head in founded:
                    continue
                for body in bodies:
                    if all(self.value_of(l) == 1 for l in body) and all(
                        abs(l) in founded for l in body if l > 0
                    ):
                        founded.add(head)
                        changed = True
                        break
        unfounded = [
            v
            for v in range(1, self._nvars + 1)
            if self._assign[v] == 1 and v not in founded
        ]
        if not unfounded:
            return []
        uset = set(unfounded)
        witnesses: list[int] = []
        for head in unfounded:
            for body in self._defs.get(head, ()):
                if any(l > 0 and abs(l) in uset for l in body):
                    continue  # internal to the loop
                false_lit = 0
                for l in body:
                    if self.value_of(l) == -1:
                        false_lit = l
                        break
                if not false_lit:
                    raise RuntimeError("external body of an unfounded set is true")
                witnesses.append(-false_lit)
        base = tuple(dict.fromkeys(witnesses))
        return [(v, *base) for v in unfounded]

    def _total_checks(self) -> list[tuple[int, ...]]:
        if not self._tight:
            vetoes = self._unfounded_nogoods()
            if vetoes:
                self.stats.unfounded_vetoes += 1
                return vetoes
        if self.callbacks.on_total_candidate is not None:
            vetoes = [
                tuple(ng)
                for ng in self.callbacks.on_total_candidate(self, self.model_atoms())
            ]
            if vetoes:
                return vetoes
        return []

    # ------------------------------------------------------------------ solve

    def _note_conflict(self) -> None:
        self.stats.conflicts += 1
        self._conf_since_restart += 1
        if (
            self.budget.max_conflicts is not None
            and self.stats.conflicts > self.budget.max_conflicts
        ):
            raise _Stop()

    def solve(self) -> SolveResult:
        try:
            while True:
                conflict = self.propagate()
                if conflict is not None:
                    self._note_conflict()
                    if not self.resolve_conflict(conflict):
                        return SolveResult(UNSAT, None, self.stats)
                    continue
                if self._num_assigned == self._nvars:
                    vetoes = self._total_checks()
                    if not vetoes:
                        return SolveResult(SAT, self.model_atoms(), self.stats)
                    conflict, progressed = self._apply_emitted(vetoes)
                    if conflict is not None:
                        self._note_conflict()
                        if not self.resolve_conflict(conflict):
                            return SolveResult(UNSAT, None, self.stats)
                    elif not progressed:
                        raise RuntimeError("total-candidate veto made no progress")
                    continue
                self.restart_if_needed()
                self.delete_constraints_if_needed()
                self.decide(self.choose_literal())
        except _Stop:
            return SolveResult(TIMEOUT, None, self.stats)


def compute_stable_model(
    gp: GroundProgram,
    callbacks: Optional[SolverCallbacks] = None,
    *,
    seed: int = 0,
    support_mode: str = "auto",
    budget: Optional[Budget] = None,
    forced_decisions: Sequence[int] = (),
) -> SolveResult:
    """Search for one stable model of a ground program."""
    solver = Solver(
        gp,
        seed=seed,
        support_mode=support_mode,
        callbacks=callbacks,
        budget=budget,
        forced_decisions=forced_decisions,
    )
    return solver.solve()
