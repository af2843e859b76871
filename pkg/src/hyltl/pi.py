"""Translation of full HyLTL (in NNF) into the positive-flow fragment.

Negated flow constraints are traded for their duals on single-point
sub-trajectories; the auxiliary action ``T`` marks where a trajectory
was split.
"""

from __future__ import annotations

from .errors import FormulaError
from .formula import (
    AUX_ACTION,
    ActionAtom,
    And,
    Bottom,
    FlowAtom,
    Formula,
    Next,
    Not,
    Or,
    Release,
    T,
    Top,
    Until,
    action_names,
    dual,
    is_nnf,
)

NOT_T = Not(T)


def pi(phi: Formula) -> Formula:
    if not is_nnf(phi):
        raise FormulaError("pi expects a formula in negation normal form")
    if AUX_ACTION in action_names(phi):
        raise FormulaError("formula already mentions the auxiliary action T")
    return _pi(phi)


def _pi(phi: Formula) -> Formula:
    if isinstance(phi, (Top, Bottom, ActionAtom)):
        return phi
    if isinstance(phi, FlowAtom):
        # f & X((T & f) U !T)
        return And(phi, Next(Until(And(T, phi), NOT_T)))
    if isinstance(phi, Not):
        if isinstance(phi.arg, ActionAtom):
            return phi
        if isinstance(phi.arg, FlowAtom):
            d = FlowAtom(dual(phi.arg.constraint))
            return Or(d, Next(Until(T, And(T, d))))
        raise FormulaError(f"negation above a non-atom: {phi}")
    if isinstance(phi, And):
        return And(_pi(phi.left), _pi(phi.right))
    if isinstance(phi, Or):
        return Or(_pi(phi.left), _pi(phi.right))
    if isinstance(phi, Next):
        return Next(Until(T, And(NOT_T, _pi(phi.arg))))
    if isinstance(phi, Until):
        return Until(Or(T, _pi(phi.left)), And(NOT_T, _pi(phi.right)))
    if isinstance(phi, Release):
        return Release(And(NOT_T, _pi(phi.left)), Or(T, _pi(phi.right)))
    raise FormulaError(f"pi does not apply to {type(phi).__name__}")
