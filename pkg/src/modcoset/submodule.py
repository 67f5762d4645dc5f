"""Finitely generated submodules of (Z/p^mu Z)^m.

Canonical representative: a Howell-type echelon basis.  Over the local
ring the form is reachable greedily: pivots are entries of minimal
valuation in their column, normalized to exactly p^s, annihilator
multiples p^(mu-s) * row are saturated in (they expose pivots further
right), and entries above a pivot are reduced modulo p^s.  Two submodules
are equal iff their canonical matrices are identical, which gives O(1)
equality and hashing for the closure engines.

The elementary-divisor exponents (restricted to s < mu, the actual cyclic
summands) are kept alongside as the GL(m)-invariant of the submodule.
"""

from __future__ import annotations

import itertools

from .errors import DimMismatch, NoFactor, NotInvertible, RankMismatch
from .matrix import Mat, is_invertible, kernel_basis, smith_diagonal, solve_right, try_inverse, vec_mat
from .ring import RingCtx


def howell_rows(ctx: RingCtx, rows, m: int) -> tuple:
    """Canonical Howell basis of the row span, as a tuple of row tuples."""
    mod, p, mu = ctx.modulus, ctx.p, ctx.mu
    piv: list = [None] * m
    pivval: list = [None] * m
    stack = [list(r) for r in rows if any(x % mod for x in r)]
    for r in stack:
        if len(r) != m:
            raise DimMismatch(f"generator of length {len(r)} in ambient rank {m}")

    def normalize(v, j):
        s = ctx.valuation(v[j])
        u = (v[j] % mod) // p**s
        uinv = pow(u, -1, mod)
        return [(uinv * x) % mod for x in v], s

    while stack:
        v = stack.pop()
        j = 0
        while j < m:
            if v[j] % mod == 0:
                j += 1
                continue
            if piv[j] is None:
                v, s = normalize(v, j)
                piv[j], pivval[j] = v, s
                if s > 0:
                    ann = [(p ** (mu - s) * x) % mod for x in v]
                    if any(ann):
                        stack.append(ann)
                break
            t = pivval[j]
            s = ctx.valuation(v[j])
            if s >= t:
                q = (v[j] % mod) // p**t
                v = [(x - q * y) % mod for x, y in zip(v, piv[j])]
            else:
                v, s = normalize(v, j)
                old = piv[j]
                piv[j], pivval[j] = v, s
                q = p ** (t - s)
                stack.append([(x - q * y) % mod for x, y in zip(old, v)])
                ann = [(p ** (mu - s) * x) % mod for x in v]
                if any(ann):
                    stack.append(ann)
                break
        # v reduced to zero: drop it

    order = [j for j in range(m) if piv[j] is not None]
    for j in order:
        ps = p ** pivval[j]
        r = piv[j]
        for j2 in order:
            if j2 != j and piv[j2][j]:
                q = piv[j2][j] // ps
                if q:
                    piv[j2] = [(x - q * y) % mod for x, y in zip(piv[j2], r)]
    return tuple(tuple(piv[j]) for j in order)


class Submodule:
    """A submodule of (Z/p^mu)^m in canonical form."""

    __slots__ = ("ctx", "m", "gens", "pivots", "invariants")

    def __init__(self, ctx: RingCtx, m: int, raw_gens):
        self.ctx = ctx
        self.m = m
        self.gens = howell_rows(ctx, raw_gens, m)
        self.pivots = tuple(
            next(j for j in range(m) if r[j]) for r in self.gens
        )
        if self.gens:
            exps = smith_diagonal(self.gens_mat()).exponents
            self.invariants = tuple(s for s in exps if s < ctx.mu)
        else:
            self.invariants = ()

    # -- construction ------------------------------------------------

    @classmethod
    def from_generators(cls, rows: Mat) -> "Submodule":
        return cls(rows.ctx, rows.cols, [rows.row(i) for i in range(rows.rows)])

    @classmethod
    def zero(cls, ctx: RingCtx, m: int) -> "Submodule":
        return cls(ctx, m, [])

    @classmethod
    def full(cls, ctx: RingCtx, m: int) -> "Submodule":
        return cls(ctx, m, Mat.identity(ctx, m).tolist())

    # -- value semantics ----------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Submodule)
            and (self.ctx, self.m, self.gens) == (other.ctx, other.m, other.gens)
        )

    def __hash__(self):
        return hash((self.ctx, self.m, self.gens))

    def __repr__(self):
        return f"Submodule(m={self.m}, gens={[list(g) for g in self.gens]})"

    def key(self):
        return (self.m, self.gens)

    def gens_mat(self) -> Mat:
        if not self.gens:
            return Mat.zeros(self.ctx, 0, self.m)
        return Mat.from_rows(self.ctx, self.gens)

    def _same_ambient(self, other: "Submodule"):
        if self.ctx != other.ctx or self.m != other.m:
            raise RankMismatch(f"ambient rank {self.m} vs {other.m}")

    # -- membership and order -----------------------------------------

    def contains(self, v) -> bool:
        """Exact membership by greedy reduction against the Howell basis."""
        ctx = self.ctx
        mod, p = ctx.modulus, ctx.p
        v = [x % mod for x in v]
        if len(v) != self.m:
            raise RankMismatch(f"vector length {len(v)} vs rank {self.m}")
        for r, j in zip(self.gens, self.pivots):
            if v[j]:
                s = ctx.valuation(r[j])
                if ctx.valuation(v[j]) < s:
                    return False
                q = v[j] // p**s
                v = [(x - q * y) % mod for x, y in zip(v, r)]
        return not any(v)

    def is_subset(self, other: "Submodule") -> bool:
        self._same_ambient(other)
        return all(other.contains(g) for g in self.gens)

    def intersect(self, other: "Submodule") -> "Submodule":
        """Set-theoretic intersection via the kernel of the stacked basis."""
        self._same_ambient(other)
        g1, g2 = self.gens_mat(), other.gens_mat()
        stacked = g1.vstack(g2)
        gens = []
        for v in kernel_basis(stacked):
            gens.append(vec_mat(v[: g1.rows], g1))
        return Submodule(self.ctx, self.m, gens)

    def size(self) -> int:
        ctx = self.ctx
        n = 1
        for r, j in zip(self.gens, self.pivots):
            n *= ctx.p ** (ctx.mu - ctx.valuation(r[j]))
        return n

    def elements(self):
        """All elements; coefficient tuples against the basis are unique."""
        ctx = self.ctx
        orders = [ctx.p ** (ctx.mu - ctx.valuation(r[j])) for r, j in zip(self.gens, self.pivots)]
        for coeffs in itertools.product(*(range(o) for o in orders)):
            v = [0] * self.m
            for c, r in zip(coeffs, self.gens):
                if c:
                    for i in range(self.m):
                        v[i] += c * r[i]
            yield tuple(x % ctx.modulus for x in v)

    # -- maps ----------------------------------------------------------

    def act(self, g: Mat) -> "Submodule":
        """Image {v*g : v in L} under an invertible g."""
        if not is_invertible(g):
            raise NotInvertible("act requires an invertible matrix")
        if g.rows != self.m:
            raise RankMismatch(f"matrix size {g.rows} vs rank {self.m}")
        return Submodule(self.ctx, self.m, [vec_mat(r, g) for r in self.gens])

    def as_kernel(self) -> Mat:
        """Square b with kernel(b) = L: send the canonical basis e_j of a
        diagonalizing coordinate system to p^(mu - s_j) e_j."""
        ctx = self.ctx
        G = self.gens_mat()
        if G.rows == 0:
            return Mat.identity(ctx, self.m)
        dec = smith_diagonal(G)
        k = min(G.rows, self.m)
        exps = [dec.exponents[i] if i < k else ctx.mu for i in range(self.m)]
        D = Mat.diagonal(ctx, [ctx.p ** (ctx.mu - s) for s in exps])
        V = dec.V
        return try_inverse(V) * D * V


def kernel_of(A: Mat) -> Submodule:
    """The submodule {v : v*A = 0} of the domain row module."""
    return Submodule(A.ctx, A.rows, kernel_basis(A))


def factor_through(b: Mat, b_prime: Mat) -> Mat:
    """u with b_prime = b*u; invertible whenever the kernels are equal.

    The invertible case follows the canonical-basis argument: in sorted
    Smith coordinates the conjugating matrix E = U1^-1 U2 satisfies the
    valuation bounds val(E_ij) >= s_i - s_j exactly when the kernels
    agree, so the rescaled matrix w below stays in the ring and is
    invertible; u = V1^-1 w V2.
    """
    if b.rows != b_prime.rows or b.ctx != b_prime.ctx:
        raise DimMismatch("factor_through needs equal row counts")
    ctx = b.ctx
    if kernel_of(b) == kernel_of(b_prime) and b.cols == b_prime.cols:
        d1, d2 = smith_diagonal(b), smith_diagonal(b_prime)
        E = try_inverse(d1.U) * d2.U
        n = b.cols
        k = min(b.rows, n)
        exps = [d1.exponents[i] if i < k else ctx.mu for i in range(b.rows)]
        w_rows = []
        for i in range(n):
            row = []
            for j in range(n):
                if i < b.rows and j < b.rows:
                    si, sj = exps[i], exps[j]
                    e = E[i, j]
                    if sj >= si:
                        row.append((e * ctx.p ** (sj - si)) % ctx.modulus)
                    else:
                        row.append(e // ctx.p ** (si - sj))
                else:
                    row.append(1 if i == j else 0)
            w_rows.append(row)
        w = Mat.from_rows(ctx, w_rows)
        u = try_inverse(d1.V) * w * d2.V
        assert b * u == b_prime
        return u
    try:
        return solve_right(b, b_prime)
    except Exception as exc:
        raise NoFactor(f"kernel(b) not contained in kernel(b'): {exc}") from exc


def all_submodules(ctx: RingCtx, m: int) -> list:
    """Every submodule of (Z/p^mu)^m, for desk-scale ambient modules.

    Spans of all <= m element subsets; m generators always suffice.
    """
    if ctx.modulus**m > 100_000 or m > 3:
        raise ValueError("ambient module too large to enumerate")
    vectors = list(itertools.product(range(ctx.modulus), repeat=m))
    seen = {}
    for k in range(m + 1):
        for combo in itertools.combinations(vectors, k):
            sub = Submodule(ctx, m, list(combo))
            seen.setdefault(sub.gens, sub)
    return sorted(seen.values(), key=lambda s: (s.size(), s.gens))
