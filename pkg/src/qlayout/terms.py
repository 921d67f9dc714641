"""Solver-neutral constraint terms.

A term is a variable name (``str``), an ``int``/``bool`` literal, or a tuple
``(op, *args)`` whose ``op`` is an SMT-LIB2 function symbol.  The same term
feeds the SMT-LIB2 printer and the Python evaluator.
"""
from __future__ import annotations

from typing import Iterable, Mapping

Term = object

TRUE = True
FALSE = False


def And(*xs: Term) -> Term:
    parts = []
    for x in xs:
        if x is FALSE:
            return FALSE
        if x is not TRUE:
            parts.append(x)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return ("and", *parts)


def Or(*xs: Term) -> Term:
    parts = []
    for x in xs:
        if x is TRUE:
            return TRUE
        if x is not FALSE:
            parts.append(x)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return ("or", *parts)


def Not(x: Term) -> Term:
    if x is TRUE:
        return FALSE
    if x is FALSE:
        return TRUE
    return ("not", x)


def Implies(a: Term, b: Term) -> Term:
    if a is FALSE or b is TRUE:
        return TRUE
    if a is TRUE:
        return b
    return ("=>", a, b)


def Eq(a: Term, b: Term) -> Term:
    return ("=", a, b)


def Ne(a: Term, b: Term) -> Term:
    return ("not", ("=", a, b))


def Lt(a: Term, b: Term) -> Term:
    return ("<", a, b)


def Le(a: Term, b: Term) -> Term:
    return ("<=", a, b)


def Distinct(*xs: Term) -> Term:
    if len(xs) < 2:
        return TRUE
    return ("distinct", *xs)


def AtMost(bools: Iterable[str], k: int) -> Term:
    """Cardinality bound written as a sum of 0/1 indicators."""
    ind = [("ite", b, 1, 0) for b in bools]
    if not ind:
        return TRUE if k >= 0 else FALSE
    total = ind[0] if len(ind) == 1 else ("+", *ind)
    return ("<=", total, k)


def to_smt(t: Term) -> str:
    if t is True:
        return "true"
    if t is False:
        return "false"
    if isinstance(t, int):
        return str(t) if t >= 0 else f"(- {-t})"
    if isinstance(t, str):
        return t
    return "(" + " ".join(to_smt(x) for x in t) + ")"


def evaluate(t: Term, model: Mapping[str, int | bool]):
    """Evaluate a term under a total assignment."""
    if isinstance(t, (bool, int)):
        return t
    if isinstance(t, str):
        return model[t]
    op, *args = t
    if op == "and":
        return all(evaluate(a, model) for a in args)
    if op == "or":
        return any(evaluate(a, model) for a in args)
    if op == "not":
        return not evaluate(args[0], model)
    if op == "=>":
        return (not evaluate(args[0], model)) or bool(evaluate(args[1], model))
    vals = [evaluate(a, model) for a in args]
    if op == "=":
        return vals[0] == vals[1]
    if op == "<":
        return vals[0] < vals[1]
    if op == "<=":
        return vals[0] <= vals[1]
    if op == "distinct":
        return len(set(vals)) == len(vals)
    if op == "ite":
        return vals[1] if vals[0] else vals[2]
    if op == "+":
        return sum(int(v) for v in vals)
    if op == "max":
        return max(vals)
    raise ValueError(f"unknown operator {op!r}")


def variables(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, str):
            out.add(x)
        elif isinstance(x, tuple):
            stack.extend(x[1:])
    return out
