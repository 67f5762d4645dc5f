"""Compatible pairs of partial isomorphisms, and the functor from cosets.

A partial isomorphism from the rank-alpha row module to the rank-beta one
is an isomorphism of a submodule of the former onto a submodule of the
latter; it is stored as the pair (domain, matrix).  Equality is
extensional (same domain, same values on the canonical generators); the
matrix itself is not canonical.

The functor reads a double-coset representative [a b; c d] with inverse
[A B; C D] and restricts a to ker(b) (plus-component) and A^t to ker(C^t)
(minus-component).  The pair depends only on the class and preserves the
pairing {v, w} = sum v_j w_j, exact facts the tests exercise exhaustively
at desk scale.  This image is a computable invariant of a class, not a
decider: for mu > 1 the functor is neither injective nor surjective.
"""

from __future__ import annotations

from .cosets import DoubleCoset
from .errors import DimMismatch, ObjectMismatch
from .matrix import Mat, try_inverse, vec_mat
from .ring import RingCtx
from .submodule import Submodule, kernel_of


class PartialIso:
    """An isomorphism of a submodule of Z^src onto its image in Z^dst."""

    __slots__ = ("src", "dst", "domain", "mat", "_images")

    def __init__(self, domain: Submodule, mat: Mat, check: bool = True):
        if domain.m != mat.rows:
            raise DimMismatch("domain rank vs matrix rows")
        self.src = mat.rows
        self.dst = mat.cols
        self.domain = domain
        self.mat = mat
        self._images = tuple(vec_mat(g, mat) for g in domain.gens)
        if check and domain.intersect(kernel_of(mat)).size() != 1:
            raise ValueError("matrix is not injective on the domain")

    @classmethod
    def identity(cls, ctx: RingCtx, n: int) -> "PartialIso":
        return cls(Submodule.full(ctx, n), Mat.identity(ctx, n), check=False)

    @classmethod
    def zero(cls, ctx: RingCtx, src: int, dst: int) -> "PartialIso":
        return cls(Submodule.zero(ctx, src), Mat.zeros(ctx, src, dst), check=False)

    def apply(self, v):
        if not self.domain.contains(v):
            raise ValueError(f"{v} outside the domain")
        return vec_mat(v, self.mat)

    def image(self) -> Submodule:
        return Submodule(self.mat.ctx, self.dst, self._images)

    def is_identity_map(self) -> bool:
        return self.src == self.dst and self._images == self.domain.gens

    def __eq__(self, other):
        return (
            isinstance(other, PartialIso)
            and (self.src, self.dst) == (other.src, other.dst)
            and self.domain == other.domain
            and self._images == other._images
        )

    def __hash__(self):
        return hash((self.src, self.dst, self.domain, self._images))

    def __repr__(self):
        return f"PartialIso({self.src}->{self.dst}, dom={self.domain.gens}, im={self._images})"

    def compose(self, other: "PartialIso") -> "PartialIso":
        """Product with domain pullback: dom = preimage(dom other) ∩ dom."""
        if self.dst != other.src:
            raise ObjectMismatch("partial isomorphisms do not chain")
        ctx = self.mat.ctx
        g1 = self.domain.gens_mat()
        t = g1 * self.mat
        g2 = other.domain.gens_mat()
        from .matrix import kernel_basis

        stacked = t.vstack(g2)
        gens = [vec_mat(v[: g1.rows], g1) for v in kernel_basis(stacked)]
        dom = Submodule(ctx, self.src, gens)
        return PartialIso(dom, self.mat * other.mat, check=False)

    def adjoint(self) -> "PartialIso":
        """The inverse partial bijection, image -> domain."""
        from .matrix import solve_right

        ctx = self.mat.ctx
        img = self.image()
        g = self.domain.gens_mat()
        if g.rows == 0:
            return PartialIso.zero(ctx, self.dst, self.src)
        back = solve_right(g * self.mat, g)
        return PartialIso(img, back, check=False)


class LMorphism:
    """A compatible pair (xi_plus, xi_minus) of partial isomorphisms."""

    __slots__ = ("xi_plus", "xi_minus")

    def __init__(self, xi_plus: PartialIso, xi_minus: PartialIso, check: bool = True):
        if (xi_plus.src, xi_plus.dst) != (xi_minus.src, xi_minus.dst):
            raise ObjectMismatch("components must share source and target ranks")
        self.xi_plus = xi_plus
        self.xi_minus = xi_minus
        if check and not self.compatible_on_generators():
            raise ValueError("components are not compatible with the pairing")

    @property
    def src(self) -> int:
        return self.xi_plus.src

    @property
    def dst(self) -> int:
        return self.xi_plus.dst

    @property
    def ctx(self) -> RingCtx:
        return self.xi_plus.mat.ctx

    @classmethod
    def identity(cls, ctx: RingCtx, n: int) -> "LMorphism":
        e = PartialIso.identity(ctx, n)
        return cls(e, e, check=False)

    @classmethod
    def zero(cls, ctx: RingCtx, src: int, dst: int) -> "LMorphism":
        return cls(PartialIso.zero(ctx, src, dst), PartialIso.zero(ctx, src, dst), check=False)

    def compatible_on_generators(self) -> bool:
        """Pairing preservation on generator pairs (sufficient by bilinearity)."""
        mod = self.ctx.modulus
        for y, fy in zip(self.xi_plus.domain.gens, self.xi_plus._images):
            for w, fw in zip(self.xi_minus.domain.gens, self.xi_minus._images):
                lhs = sum(a * b for a, b in zip(fy, fw)) % mod
                rhs = sum(a * b for a, b in zip(y, w)) % mod
                if lhs != rhs:
                    return False
        return True

    def compatible_exhaustive(self) -> bool:
        """Pairing preservation on every pair of domain elements."""
        mod = self.ctx.modulus
        for y in self.xi_plus.domain.elements():
            fy = self.xi_plus.apply(y)
            for w in self.xi_minus.domain.elements():
                fw = self.xi_minus.apply(w)
                if sum(a * b for a, b in zip(fy, fw)) % mod != sum(
                    a * b for a, b in zip(y, w)
                ) % mod:
                    return False
        return True

    def is_idempotent(self) -> bool:
        return self.xi_plus.is_identity_map() and self.xi_minus.is_identity_map()

    def __eq__(self, other):
        return (
            isinstance(other, LMorphism)
            and self.xi_plus == other.xi_plus
            and self.xi_minus == other.xi_minus
        )

    def __hash__(self):
        return hash((self.xi_plus, self.xi_minus))

    def __repr__(self):
        return f"LMorphism(+{self.xi_plus!r}, -{self.xi_minus!r})"


def l_compose(m1: LMorphism, m2: LMorphism) -> LMorphism:
    if m1.dst != m2.src:
        raise ObjectMismatch(f"objects do not chain: {m1.dst} vs {m2.src}")
    return LMorphism(m1.xi_plus.compose(m2.xi_plus), m1.xi_minus.compose(m2.xi_minus))


def l_adjoint(m: LMorphism) -> LMorphism:
    return LMorphism(m.xi_plus.adjoint(), m.xi_minus.adjoint())


def l_bigstar(m: LMorphism) -> LMorphism:
    return LMorphism(m.xi_minus, m.xi_plus, check=False)


def l_equal(m1: LMorphism, m2: LMorphism) -> bool:
    return m1 == m2


def pi_functor(g: DoubleCoset) -> LMorphism:
    """xi_plus = a restricted to ker b; xi_minus = A^t restricted to ker C^t."""
    rep = g.rep
    inv = try_inverse(rep)
    n = rep.rows
    alpha, beta = g.alpha, g.beta
    a = rep.submatrix(0, alpha, 0, beta)
    b = rep.submatrix(0, alpha, beta, n)
    big_a = inv.submatrix(0, beta, 0, alpha)
    big_c = inv.submatrix(beta, n, 0, alpha)
    xi_plus = PartialIso(kernel_of(b), a, check=False)
    xi_minus = PartialIso(kernel_of(big_c.transpose()), big_a.transpose(), check=False)
    return LMorphism(xi_plus, xi_minus, check=False)
