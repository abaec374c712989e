"""Averaging operators: the Hardy operator A, its conjugate Q, and the
discrete prefix-average A_d, all exact on piecewise data."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .piecewise import Curve, StepFunction


@dataclass(frozen=True)
class Seq:
    """Nonnegative sequence: explicit ``terms`` then a constant ``tail``.

    The zero tail gives finitely supported sequences; a positive tail
    expresses weights like the all-ones sequence without a horizon-sized
    term list.
    """

    terms: tuple
    tail: float = 0.0

    def __post_init__(self):
        t = tuple(float(x) for x in self.terms)
        if any(x < 0 or not math.isfinite(x) for x in t):
            raise ValueError("terms must be finite and nonnegative")
        if self.tail < 0 or not math.isfinite(self.tail):
            raise ValueError("tail must be finite and nonnegative")
        object.__setattr__(self, "terms", t)

    def __getitem__(self, n: int) -> float:
        if n < 0:
            raise IndexError(n)
        return self.terms[n] if n < len(self.terms) else self.tail

    def head(self, n: int) -> np.ndarray:
        """First n terms as an array."""
        out = np.full(n, self.tail)
        k = min(n, len(self.terms))
        out[:k] = self.terms[:k]
        return out

    def prefix_sum(self, n: int) -> float:
        """Sum of terms 0..n inclusive, exact."""
        m = len(self.terms)
        if n < m:
            return float(sum(self.terms[: n + 1]))
        return float(sum(self.terms)) + (n + 1 - m) * self.tail

    def prefix_sums(self, n: int) -> np.ndarray:
        """Array of prefix sums for 0..n-1."""
        return np.cumsum(self.head(n))

    def support_len(self) -> int:
        """Number of terms before the all-zero remainder; requires tail 0."""
        if self.tail != 0.0:
            raise ValueError("sequence has a nonzero tail")
        k = len(self.terms)
        while k > 0 and self.terms[k - 1] == 0.0:
            k -= 1
        return k

    def rearranged(self) -> "Seq":
        """Terms sorted nonincreasing; requires finite support."""
        k = self.support_len()
        return Seq(tuple(sorted(self.terms[:k], reverse=True)))

    def is_positive(self, n: int) -> bool:
        """All of terms 0..n strictly positive."""
        return all(self[k] > 0 for k in range(n + 1))


def hardy(f: StepFunction, t: float) -> float:
    """Af(t) = (1/t) int_0^t f, exact."""
    if t <= 0:
        raise ValueError("t must be positive")
    return float(f.primitive_at(t)) / t


def hardy_curve(f: StepFunction) -> Curve:
    """Af as a piecewise-analytic curve with the exact M/t tail.

    On a piece [a, b) with value v the average is v + (F(a) - v a)/t.
    """
    if f.is_zero:
        return Curve([0.0], [], ("const", 0.0))
    nodes = f.breaks
    segs = []
    for i, v in enumerate(f.values):
        a = float(nodes[i])
        head = float(f.primitive_at(a))
        if a == 0.0:
            segs.append(("const", float(v)))
        else:
            segs.append(("fn", lambda t, v=v, a=a, head=head: (head + v * (t - a)) / t))
    if nodes[0] > 0.0:
        nodes = np.concatenate([[0.0], nodes])
        segs = [("const", 0.0)] + segs
    return Curve(nodes, segs, ("inv", f.integral()))


def conjugate_hardy(f: StepFunction, r: float) -> float:
    """Qf(r) = int_r^inf f(t) dt/t, exact via log antiderivatives."""
    if r <= 0:
        raise ValueError("r must be positive")
    total = 0.0
    for a, b, v in zip(f.breaks[:-1], f.breaks[1:], f.values):
        lo = max(a, r)
        if v > 0 and b > lo:
            total += v * math.log(b / lo)
    return total


def conjugate_curve(f: StepFunction) -> Curve:
    """Qf as a curve: constant left of the support, log pieces inside,
    zero beyond."""
    if f.is_zero:
        return Curve([0.0], [], ("const", 0.0))
    nodes = f.breaks
    segs = []
    for i, v in enumerate(f.values):
        b = float(nodes[i + 1])
        rest = conjugate_hardy(f, b) if b < nodes[-1] else 0.0
        if v == 0.0:
            segs.append(("const", rest))
        else:
            segs.append(("fn", lambda t, v=v, b=b, rest=rest: rest + v * math.log(b / t)))
    if nodes[0] > 0.0:
        head = conjugate_hardy(f, float(nodes[0]))
        nodes = np.concatenate([[0.0], nodes])
        segs = [("const", head)] + segs
    return Curve(nodes, segs, ("const", 0.0))


def discrete_hardy(f: Seq, horizon: int = 256) -> Seq:
    """A_d f(n) = (1/(n+1)) sum_{k<=n} f(k) on a prefix covering the
    support of f and the horizon; tail set to the limiting average."""
    n = max(horizon, len(f.terms) + 1)
    sums = f.prefix_sums(n)
    averages = sums / np.arange(1, n + 1)
    return Seq(tuple(averages), tail=f.tail)
