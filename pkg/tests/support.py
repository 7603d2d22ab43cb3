"""Shared fixtures: the running two-loop example and the random-program
generator used by the equivalence fuzz."""
from __future__ import annotations

import random

PI1_TEXT = """\
a(1) :- not b(1).
b(1) :- not a(1).
:- a(X), b(X).
c(1) :- not d(1).
d(1) :- not c(1).
:- a(X), not b(X).
"""

PI1_DEFERRED_TEXT = """\
a(1) :- not b(1).
b(1) :- not a(1).
%@deferred
:- a(X), b(X).
c(1) :- not d(1).
d(1) :- not c(1).
%@deferred
:- a(X), not b(X).
"""

FUZZ_PREDS = ["a", "b", "c", "d"]
FUZZ_CONSTS = [1, 2]


def random_program_text(seed: int, max_deferred: int = 4) -> str:
    """A random normal program over at most 8 ground atoms (4 unary
    predicates, 2 constants), mixing ground and single-variable rules,
    positive cycles included.  Deferred marks go on a random subset of
    constraints."""
    rng = random.Random(seed)
    lines: list[str] = []
    deferred_at: list[int] = []
    n_deferred = 0

    def atom(var: bool = False) -> str:
        pred = rng.choice(FUZZ_PREDS)
        return f"{pred}(X)" if var else f"{pred}({rng.choice(FUZZ_CONSTS)})"

    for _ in range(rng.randint(1, 12)):
        lifted = rng.random() < 0.45
        body: list[str] = []
        if lifted:
            body.append(atom(var=True))
            for _ in range(rng.randint(0, 2)):
                neg = rng.random() < 0.4
                body.append(("not " if neg else "") + atom(var=rng.random() < 0.5))
        else:
            for _ in range(rng.randint(0, 3)):
                neg = rng.random() < 0.4
                body.append(("not " if neg else "") + atom())
        if rng.random() < 0.3 and body:
            if n_deferred < max_deferred and rng.random() < 0.5:
                deferred_at.append(len(lines))
                n_deferred += 1
            lines.append(":- " + ", ".join(body) + ".")
        else:
            head = atom(var=lifted and rng.random() < 0.7)
            if body:
                lines.append(head + " :- " + ", ".join(body) + ".")
            else:
                lines.append(
                    head.replace("(X)", f"({rng.choice(FUZZ_CONSTS)})") + "."
                )
    out: list[str] = []
    for i, line in enumerate(lines):
        if i in deferred_at:
            out.append("%@deferred")
        out.append(line)
    return "\n".join(out) + "\n"
