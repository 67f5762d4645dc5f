"""Exact arithmetic in the residue ring Z/p^mu Z for an odd prime p.

The ring is a finite local ring: an element is a unit exactly when p does
not divide it, and every element factors as unit * p^s with s its
valuation.  All values are stored canonically reduced into [0, p^mu), so
equality is plain integer equality.
"""

from __future__ import annotations

from .errors import BadLevel, MixedContext, NotUnit


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class RingCtx:
    """Ring parameters (p, mu) with the modulus p^mu cached."""

    __slots__ = ("p", "mu", "modulus", "_inv2")

    def __init__(self, p: int, mu: int):
        if p == 2 or not is_prime(p):
            raise ValueError(f"p must be an odd prime, got {p}")
        if mu < 1:
            raise ValueError(f"mu must be >= 1, got {mu}")
        self.p = p
        self.mu = mu
        self.modulus = p**mu
        # 2 is a unit since p is odd; dyadic coefficients are evaluated with it
        self._inv2 = pow(2, -1, self.modulus)

    def __eq__(self, other):
        return isinstance(other, RingCtx) and (self.p, self.mu) == (other.p, other.mu)

    def __hash__(self):
        return hash((self.p, self.mu))

    def __repr__(self):
        return f"RingCtx(p={self.p}, mu={self.mu})"

    def reduce(self, x: int) -> int:
        return x % self.modulus

    def valuation(self, x: int) -> int:
        """Largest s <= mu with p^s | x; valuation(0) = mu by convention."""
        x %= self.modulus
        if x == 0:
            return self.mu
        s = 0
        while x % self.p == 0:
            x //= self.p
            s += 1
        return s

    def inv(self, x: int) -> int:
        x %= self.modulus
        if x % self.p == 0:
            raise NotUnit(f"{x} is divisible by p={self.p} in Z/{self.modulus}")
        return pow(x, -1, self.modulus)

    def inv2(self) -> int:
        return self._inv2

    def unit_part(self, x: int) -> tuple[int, int]:
        """Write x = u * p^s with u a unit (u = 1 for x = 0); returns (u, s)."""
        s = self.valuation(x)
        if s == self.mu:
            return 1, s
        return (x % self.modulus) // self.p**s, s

    def units(self):
        """All units, in increasing order."""
        return [x for x in range(1, self.modulus) if x % self.p != 0]

    def elements(self):
        return range(self.modulus)


class Residue:
    """A canonically reduced element of Z/p^mu Z."""

    __slots__ = ("ctx", "value")

    def __init__(self, ctx: RingCtx, value: int):
        self.ctx = ctx
        self.value = value % ctx.modulus

    def _same(self, other: "Residue") -> None:
        if self.ctx != other.ctx:
            raise MixedContext(f"{self.ctx} vs {other.ctx}")

    def __add__(self, other):
        self._same(other)
        return Residue(self.ctx, self.value + other.value)

    def __sub__(self, other):
        self._same(other)
        return Residue(self.ctx, self.value - other.value)

    def __mul__(self, other):
        self._same(other)
        return Residue(self.ctx, self.value * other.value)

    def __neg__(self):
        return Residue(self.ctx, -self.value)

    def __eq__(self, other):
        return (
            isinstance(other, Residue)
            and self.ctx == other.ctx
            and self.value == other.value
        )

    def __hash__(self):
        return hash((self.ctx, self.value))

    def __repr__(self):
        return f"{self.value} (mod {self.ctx.modulus})"

    def inv(self) -> "Residue":
        return Residue(self.ctx, self.ctx.inv(self.value))

    def valuation(self) -> int:
        return self.ctx.valuation(self.value)

    def is_unit(self) -> bool:
        return self.value % self.ctx.p != 0

    def reduce_level(self, k: int) -> "Residue":
        """Image under the quotient map Z/p^mu -> Z/p^k, 1 <= k <= mu."""
        if not 1 <= k <= self.ctx.mu:
            raise BadLevel(f"level {k} outside 1..{self.ctx.mu}")
        sub = RingCtx(self.ctx.p, k)
        return Residue(sub, self.value)


def arith(a: Residue, b: Residue, op: str) -> Residue:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def inv(a: Residue) -> Residue:
    return a.inv()


def valuation(a: Residue) -> int:
    return a.valuation()


def reduce_level(a: Residue, k: int) -> Residue:
    return a.reduce_level(k)
