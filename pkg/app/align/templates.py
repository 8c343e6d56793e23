"""
Alignment, scale and budget-bound templates over optimizer holes.
"""
from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple

import numpy as np

from app.lang.ast import (
    Abs, Expr, Hole, LinOp, Num, OtherOp, Ternary, Var, add, mul, num,
)
from app.lang.pretty import format_expr, format_number

CONSTANT = "const"


def _coefficient(values: Sequence[float], index: int) -> float:
    return float(values[index]) if index < len(values) else 0.0


@dataclass(frozen=True)
class LinearTemplate:
    """theta[constant] + sum of theta[k] * v over distance terms v."""

    constant: int
    terms: Tuple[Tuple[int, Expr], ...] = ()

    @property
    def indices(self) -> Tuple[int, ...]:
        return (self.constant,) + tuple(k for k, _ in self.terms)

    def expr(self) -> Expr:
        total: Expr = Hole("theta", self.constant)
        for k, v in self.terms:
            total = LinOp("+", total, OtherOp("*", Hole("theta", k), v))
        return total

    def instantiate(self, theta: Sequence[float]) -> Expr:
        total: Expr = num(_coefficient(theta, self.constant))
        for k, v in self.terms:
            total = add(total, mul(num(_coefficient(theta, k)), v))
        return total

    def is_zero(self, theta: Sequence[float]) -> bool:
        return all(_coefficient(theta, k) == 0 for k in self.indices)

    def bound_expr(self, delta: Mapping[str, float]) -> Expr:
        """|theta[c]| + sum |theta[k]| * delta(v): the largest value over adjacent inputs."""
        total: Expr = Abs(Hole("theta", self.constant))
        for k, v in self.terms:
            total = LinOp("+", total, OtherOp("*", Abs(Hole("theta", k)), num(delta.get(format_expr(v), 1.0))))
        return total

    def labels(self) -> Tuple[str, ...]:
        return (CONSTANT,) + tuple(format_expr(v) for _, v in self.terms)


@dataclass(frozen=True)
class AlignmentTemplate:
    """
    Alignment of one sampling statement: a linear template, or a chain
    `c1 ? L1 : (c2 ? L2 : L3)` over branch conditions. `conditions` are
    evaluable at the sampling site; `display_conditions` are the branch
    conditions as written.
    """

    eta: str
    cases: Tuple[LinearTemplate, ...]
    conditions: Tuple[Expr, ...] = ()
    display_conditions: Tuple[Expr, ...] = ()

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(k for case in self.cases for k in case.indices)

    @property
    def is_conditional(self) -> bool:
        return bool(self.conditions)

    def _chain(self, parts: Sequence[Expr], conditions: Sequence[Expr]) -> Expr:
        result = parts[-1]
        for cond, part in reversed(list(zip(conditions, parts[:-1]))):
            result = result if part == result else Ternary(cond, part, result)
        return result

    def expr(self) -> Expr:
        return self._chain([c.expr() for c in self.cases], self.conditions)

    def instantiate(self, theta: Sequence[float], display: bool = False) -> Expr:
        conditions = self.display_conditions if display else self.conditions
        return self._chain([c.instantiate(theta) for c in self.cases], conditions)

    def is_zero(self, theta: Sequence[float]) -> bool:
        return all(c.is_zero(theta) for c in self.cases)

    def bound_expr(self, delta: Mapping[str, float]) -> Expr:
        return self._chain([c.bound_expr(delta) for c in self.cases], self.conditions)

    def describe(self, theta: Sequence[float]) -> str:
        return format_expr(self.instantiate(theta, display=True))

    def assign(self, theta: np.ndarray, *cases: Mapping[str, float]) -> np.ndarray:
        """
        Write coefficients into theta, one mapping per case keyed by
        `const` or the printed distance term (e.g. `q^[i]`).
        """
        if len(cases) > len(self.cases):
            raise ValueError(f"{self.eta} has {len(self.cases)} cases")
        for case, values in zip(self.cases, cases):
            known = dict(zip(case.labels(), case.indices))
            for label, value in values.items():
                if label not in known:
                    raise KeyError(f"{self.eta} has no term {label}")
                theta[known[label]] = value
        return theta


@dataclass(frozen=True)
class ScaleTemplate:
    """(lambda[constant] + sum of lambda[k] * v) / budget"""

    eta: str
    constant: int
    terms: Tuple[Tuple[int, str], ...]
    budget: str = "eps"

    @property
    def indices(self) -> Tuple[int, ...]:
        return (self.constant,) + tuple(k for k, _ in self.terms)

    def numerator(self) -> Expr:
        total: Expr = Hole("lambda", self.constant)
        for k, v in self.terms:
            total = LinOp("+", total, OtherOp("*", Hole("lambda", k), Var(v)))
        return total

    def expr(self) -> Expr:
        return OtherOp("/", self.numerator(), Var(self.budget))

    def evaluate(self, lam: Sequence[float], values: Mapping[str, float]) -> float:
        total = _coefficient(lam, self.constant)
        for k, v in self.terms:
            c = _coefficient(lam, k)
            if c:
                total += c * float(values[v])
        return total / float(values[self.budget])

    def instantiate(self, lam: Sequence[float]) -> Expr:
        total: Expr = Num(0.0)
        for k, v in self.terms:
            total = add(total, mul(num(_coefficient(lam, k)), Var(v)))
        total = add(total, num(_coefficient(lam, self.constant)))
        return OtherOp("/", total, Var(self.budget))

    def describe(self, lam: Sequence[float]) -> str:
        """Human form such as `3N/eps` or `(4N + 6)/eps`."""
        parts = []
        for k, v in self.terms:
            c = _coefficient(lam, k)
            if c == 0:
                continue
            coef = "" if c == 1 else "-" if c == -1 else format_number(c)
            parts.append(f"{coef}{v}" if len(v) == 1 else f"{coef}{'*' if coef and coef != '-' else ''}{v}")
        c = _coefficient(lam, self.constant)
        if c != 0 or not parts:
            parts.append(format_number(c))
        text = " + ".join(parts).replace("+ -", "- ")
        return f"({text})/{self.budget}" if len(parts) > 1 else f"{text}/{self.budget}"

    def assign(self, lam: np.ndarray, const: float = 0.0, **coefficients: float) -> np.ndarray:
        lam[self.constant] = const
        known = {v: k for k, v in self.terms}
        for v, value in coefficients.items():
            if v not in known:
                raise KeyError(f"{self.eta} scale has no term {v}")
            lam[known[v]] = value
        return lam


@dataclass(frozen=True)
class BudgetBoundTemplate:
    """Per-iteration budget bound of a while-priv loop: budget / (gamma[c] + sum gamma[k] * v)."""

    loop: int
    constant: int
    terms: Tuple[Tuple[int, str], ...]
    budget: str = "eps"

    @property
    def indices(self) -> Tuple[int, ...]:
        return (self.constant,) + tuple(k for k, _ in self.terms)

    def expr(self) -> Expr:
        total: Expr = Hole("gamma", self.constant)
        for k, v in self.terms:
            total = LinOp("+", total, OtherOp("*", Hole("gamma", k), Var(v)))
        return OtherOp("/", Var(self.budget), total)

    def instantiate(self, gamma: Sequence[float]) -> Expr:
        total: Expr = Num(0.0)
        for k, v in self.terms:
            total = add(total, mul(num(_coefficient(gamma, k)), Var(v)))
        total = add(total, num(_coefficient(gamma, self.constant)))
        return OtherOp("/", Var(self.budget), total)

    def describe(self, gamma: Sequence[float]) -> str:
        scale = ScaleTemplate("", self.constant, self.terms, self.budget).describe(gamma)
        denominator = scale.rsplit("/", 1)[0]
        return f"{self.budget}/{denominator}"

    def assign(self, gamma: np.ndarray, const: float = 0.0, **coefficients: float) -> np.ndarray:
        return ScaleTemplate("", self.constant, self.terms, self.budget).assign(gamma, const, **coefficients)


def zero_aligned(templates: Sequence[AlignmentTemplate], theta: Sequence[float]) -> Tuple[str, ...]:
    return tuple(t.eta for t in templates if t.is_zero(theta))

