"""The idempotent calculus: X(b,c) classes, normal forms, and the
invertible-times-idempotent decomposition of reduced elements.

The basic idempotents of End(m) are the classes of

    X(b, c) = [1_m  b  0]
              [0    1  0]
              [c    0  1]

which depend only on the pair of kernels (ker b, ker c^t) and multiply by
intersecting kernels.  Identification of an idempotent class goes through
its partial-isomorphism image (a pair of identity maps on the kernels);
the definitive check of any class equality stays with the bounded coset
equivalence engine, since the functor is not injective for mu > 1.

The three constructive engines in this module back the structure theorem
for reduced elements:

* a conjugation-and-powering normal form (zeta a zeta^-1)^N = diag(0, 1_k)
  for an arbitrary square matrix a,
* the p-adically contracting corner solver behind it (solve_uu), and
* the dyadic-series solver (solve_lemma2) producing the unit u that
  splits [1 b; c 1] as (1-bc)(1-buc) * X(b,c) when bc is nilpotent.
"""

from __future__ import annotations

from .cosets import DoubleCoset, automorphism_coset, compose, equivalent, involution
from .errors import (
    BadSizes,
    DimMismatch,
    NotIdempotent,
    NotInvertible,
    NotNilpotent,
    RankMismatch,
)
from .matrix import Mat, block_compose, is_invertible, is_nilpotent, kernel_basis, try_inverse
from .partial_iso import pi_functor
from .ring import RingCtx
from .submodule import Submodule, howell_rows, kernel_of


class XIdempotent:
    """The class of X(b,c), recorded by its invariant pair of kernels."""

    __slots__ = ("L", "M")

    def __init__(self, L: Submodule, M: Submodule):
        if L.ctx != M.ctx or L.m != M.m:
            raise RankMismatch("kernel pair must share the ambient module")
        self.L = L
        self.M = M

    @classmethod
    def unit(cls, ctx: RingCtx, m: int) -> "XIdempotent":
        return cls(Submodule.full(ctx, m), Submodule.full(ctx, m))

    @classmethod
    def bottom(cls, ctx: RingCtx, m: int) -> "XIdempotent":
        """Minimal idempotent of the X-calculus (both kernels zero)."""
        return cls(Submodule.zero(ctx, m), Submodule.zero(ctx, m))

    @property
    def ctx(self) -> RingCtx:
        return self.L.ctx

    @property
    def m(self) -> int:
        return self.L.m

    def __eq__(self, other):
        return isinstance(other, XIdempotent) and self.L == other.L and self.M == other.M

    def __hash__(self):
        return hash((self.L, self.M))

    def __repr__(self):
        return f"XIdempotent(L={self.L.gens}, M={self.M.gens})"

    def presentations(self):
        """Square (b, c) with ker b = L and ker c^t = M."""
        return self.L.as_kernel(), self.M.as_kernel().transpose()

    def coset(self) -> DoubleCoset:
        b, c = self.presentations()
        return build_X(b, c)


def build_X(b: Mat, c: Mat) -> DoubleCoset:
    """The block matrix X(b,c) as an endomorphism class of m."""
    if b.ctx != c.ctx or b.rows != c.cols:
        raise DimMismatch("b must be m x N, c must be N' x m")
    ctx = b.ctx
    m, nb, nc = b.rows, b.cols, c.rows
    z = Mat.zeros
    rep = block_compose(
        ctx,
        [
            [Mat.identity(ctx, m), b, z(ctx, m, nc)],
            [z(ctx, nb, m), Mat.identity(ctx, nb), z(ctx, nb, nc)],
            [c, z(ctx, nc, nb), Mat.identity(ctx, nc)],
        ],
    )
    return DoubleCoset(m, m, rep)


def x_product(x1: XIdempotent, x2: XIdempotent) -> XIdempotent:
    """Idempotent product: intersect both kernels."""
    return XIdempotent(x1.L.intersect(x2.L), x1.M.intersect(x2.M))


def x_leq(x1: XIdempotent, x2: XIdempotent) -> bool:
    """Idempotent partial order: x <= y iff xy = x iff both kernels nest."""
    return x_product(x1, x2) == x1


def identify_idempotent(g: DoubleCoset) -> XIdempotent:
    """Read off the X-class of an idempotent with nondegenerate corner.

    The partial-isomorphism image of X(b,c) is the pair of identity maps
    on (ker b, ker c^t); anything whose image is not of that shape is
    rejected.  The image separates idempotents of this kind, which is
    exactly where this helper is used.
    """
    if g.alpha != g.beta:
        raise NotIdempotent("endomorphism expected")
    if not is_invertible(g.a_block()):
        raise NotIdempotent("corner block degenerate: not an X-type idempotent")
    image = pi_functor(g)
    if not image.is_idempotent():
        raise NotIdempotent("partial-isomorphism image is not idempotent")
    return XIdempotent(image.xi_plus.domain, image.xi_minus.domain)


# ---------------------------------------------------------------------
# mod-p Fitting helpers


def _fp_row_basis(ctx: RingCtx, A: Mat):
    fp = RingCtx(ctx.p, 1)
    red = Mat(fp, A.rows, A.cols, A.data)
    return [tuple(r) for r in howell_rows(fp, red.tolist(), A.cols)]


def _fp_row_kernel(ctx: RingCtx, A: Mat):
    fp = RingCtx(ctx.p, 1)
    red = Mat(fp, A.rows, A.cols, A.data)
    return [tuple(r) for r in howell_rows(fp, kernel_basis(red), A.rows)]


def _fitting_single(a: Mat):
    """Rows spanning the stable kernel and image of (a mod p), lifted.

    Returns (nil_rows, reg_rows); their concatenation is invertible."""
    t = a.mod_p().pow(max(a.rows, 1)) if a.rows else a.mod_p()
    t_ring = Mat(a.ctx, t.rows, t.cols, t.data)
    nil = _fp_row_kernel(a.ctx, t_ring)
    reg = _fp_row_basis(a.ctx, t_ring)
    return nil, reg


# ---------------------------------------------------------------------
# the corner solver and the powering normal form


def _solve_corner(b11: Mat, b12: Mat, b21: Mat, b22: Mat) -> Mat:
    """Y with [[1, Y],[0, 1]] B [[1, -Y],[0, 1]] having zero corner block,
    for B = [[b11, b12],[b21, b22]], b11 = b12 = b21 = 0 and b22 = 1 mod p.

    The fixed-point map Y -> ((b11 + Y b21) Y - b12) b22^{-1} contracts
    p-adically on {Y = 0 mod p}, so mu rounds reach the exact solution.
    """
    ctx = b11.ctx
    inv22 = try_inverse(b22)
    y = (-b12) * inv22
    for _ in range(ctx.mu + 1):
        y = ((b11 + y * b21) * y - b12) * inv22
    assert (b12 + y * b22 - (b11 + y * b21) * y).is_zero()
    return y


def solve_uu(alpha: Mat, beta: Mat, gamma: Mat, delta: Mat) -> Mat:
    """u such that conjugating [[p a, p b],[p g, 1 + p d]] by [[1, pu],[0, 1]]
    zeroes the upper-right block; total (the recurrence always lands)."""
    ctx = alpha.ctx
    p = ctx.p
    y = _solve_corner(
        alpha.scale(p), beta.scale(p), gamma.scale(p),
        Mat.identity(ctx, delta.rows) + delta.scale(p),
    )
    u = Mat(ctx, y.rows, y.cols, [x // p for x in y.data])
    return u


class UnitNormalForm:
    __slots__ = ("zeta", "power", "k")

    def __init__(self, zeta, power, k):
        self.zeta = zeta
        self.power = power
        self.k = k


def nilpotent_unit_normal_form(a: Mat) -> UnitNormalForm:
    """zeta in GL(m) and minimal N with (zeta a zeta^{-1})^N = diag(0, 1_k).

    k is the rank of the stable image of a mod p.  Steps: split mod p into
    nilpotent + invertible parts, power until the matrix is diag(0, 1)
    mod p, kill the upper-right corner with the contracting solver, power
    by mu to empty the upper-left, kill the lower-left with a single
    congruence inverse, and power by p^(mu-1) to flatten 1 + p(...).
    """
    ctx = a.ctx
    if a.rows != a.cols:
        raise BadSizes("square matrix expected")
    m = a.rows
    if m == 0:
        return UnitNormalForm(Mat.identity(ctx, 0), 1, 0)
    nil, reg = _fitting_single(a)
    k = len(reg)
    basis = Mat.from_rows(ctx, list(nil) + list(reg)) if (nil or reg) else Mat.identity(ctx, m)
    zeta = basis
    work = zeta * a * try_inverse(zeta)

    # order of the invertible part modulo p
    tbar = work.mod_p().submatrix(m - k, m, m - k, m)
    e = 1
    if k:
        power = tbar
        ident = Mat.identity(tbar.ctx, k)
        while power != ident:
            power = power * tbar
            e += 1
    n1 = e
    while n1 < max(1, m - k):
        n1 += e
    b = work.pow(n1)

    b11 = b.submatrix(0, m - k, 0, m - k)
    b12 = b.submatrix(0, m - k, m - k, m)
    b21 = b.submatrix(m - k, m, 0, m - k)
    b22 = b.submatrix(m - k, m, m - k, m)
    y = _solve_corner(b11, b12, b21, b22)
    v = block_compose(
        ctx,
        [
            [Mat.identity(ctx, m - k), y],
            [Mat.zeros(ctx, k, m - k), Mat.identity(ctx, k)],
        ],
    )
    zeta = v * zeta
    c = (v * b * try_inverse(v)).pow(ctx.mu)
    assert c.submatrix(0, m - k, 0, m).is_zero()

    c21 = c.submatrix(m - k, m, 0, m - k)
    c22 = c.submatrix(m - k, m, m - k, m)
    gpp = Mat(ctx, c21.rows, c21.cols, [x // ctx.p for x in c21.data])
    vlow = try_inverse(c22) * gpp
    w = block_compose(
        ctx,
        [
            [Mat.identity(ctx, m - k), Mat.zeros(ctx, m - k, k)],
            [vlow.scale(ctx.p), Mat.identity(ctx, k)],
        ],
    )
    zeta = w * zeta
    total = n1 * ctx.mu * ctx.p ** (ctx.mu - 1)

    target = block_compose(
        ctx,
        [
            [Mat.zeros(ctx, m - k, m - k), Mat.zeros(ctx, m - k, k)],
            [Mat.zeros(ctx, k, m - k), Mat.identity(ctx, k)],
        ],
    )
    conj = zeta * a * try_inverse(zeta)
    assert conj.pow(total) == target
    # minimal exponent achieving the target
    power = conj
    n = 1
    while power != target:
        power = power * conj
        n += 1
    return UnitNormalForm(zeta, n, k)


# ---------------------------------------------------------------------
# the dyadic-series solver of the splitting lemma


def solve_lemma2(b: Mat, c: Mat) -> Mat:
    """The unit u = -1/2 + sum s_j (cb)^j with r q = 0 for the splitting
    blocks r = (u, u, (1-ucb)^{-1}), q = (1; (1-cbu)^{-1}; (1-cb)^{-1}).

    u is a polynomial in the nilpotent cb, so it commutes with cb and the
    equation collapses to 2u + 1 = u(cb)u - sum_{j>0} (cb)^j; coefficients
    are dyadic rationals evaluated with the unit 1/2 of the ring.
    """
    if b.ctx != c.ctx or b.cols != c.rows or b.rows != c.cols:
        raise DimMismatch("need b: m x N and c: N x m")
    ctx = b.ctx
    cb = c * b
    bc = b * c
    if not is_nilpotent(cb) or not is_nilpotent(bc):
        raise NotNilpotent("cb and bc must be nilpotent")
    n = cb.rows
    powers = [Mat.identity(ctx, n)]
    while not powers[-1].is_zero():
        powers.append(powers[-1] * cb)
    index = len(powers) - 1  # cb^index = 0
    inv2 = ctx.inv2()
    mod = ctx.modulus
    s = {0: (-inv2) % mod}
    if index > 1:
        s[1] = (-3 * pow(8, -1, mod)) % mod
    for j in range(2, index):
        acc = (-1 - s[j - 1]) % mod
        for a_ in range(1, j - 1):
            acc = (acc + s[a_] * s[j - 1 - a_]) % mod
        s[j] = (acc * inv2) % mod
    u = Mat.zeros(ctx, n, n)
    for j in range(index):
        u = u + powers[j].scale(s[j])
    # defining relation, then invertibility (u = -1/2 + nilpotent)
    rhs = u * cb * u
    for j in range(1, index):
        rhs = rhs - powers[j]
    assert u.scale(2) + Mat.identity(ctx, n) == rhs
    assert is_invertible(u)
    return u


def lemma2_blocks(b: Mat, c: Mat, u: Mat):
    """The proof's (r, q) blocks and their product rq (zero for the right u)."""
    ctx = b.ctx
    n = c.rows
    one = Mat.identity(ctx, n)
    inv_ucb = try_inverse(one - u * (c * b))
    inv_cbu = try_inverse(one - (c * b) * u)
    inv_cb = try_inverse(one - c * b)
    r = u.hstack(u).hstack(inv_ucb)
    q = one.vstack(inv_cbu).vstack(inv_cb)
    return r, q, r * q


# ---------------------------------------------------------------------
# canonical forms for counter pairs


class PairCanonical:
    """Transforms and reduced pair: Bt = u^{-1} B v, Ct = w^{-1} C u."""

    __slots__ = ("u", "v", "w", "Bt", "Ct", "k")

    def __init__(self, u, v, w, Bt, Ct, k):
        self.u = u
        self.v = v
        self.w = w
        self.Bt = Bt
        self.Ct = Ct
        self.k = k


def _fitting_pair(B: Mat, C: Mat):
    """(k, Mu, Mv): row bases splitting both products into regular/nilpotent.

    Mu rows: [regular of BC; nilpotent of BC];
    Mv rows: [nilpotent of CB; regular of CB]."""
    ctx = B.ctx
    m, n = B.rows, B.cols
    e = max(m, n, 1)
    bc = (B * C).mod_p().pow(e)
    cb = (C * B).mod_p().pow(e)
    bc_ring = Mat(ctx, m, m, bc.data)
    cb_ring = Mat(ctx, n, n, cb.data)
    reg_m = _fp_row_basis(ctx, bc_ring)
    nil_m = _fp_row_kernel(ctx, bc_ring)
    reg_n = _fp_row_basis(ctx, cb_ring)
    nil_n = _fp_row_kernel(ctx, cb_ring)
    k = len(reg_m)
    assert len(reg_n) == k
    mu_rows = list(reg_m) + list(nil_m)
    mv_rows = list(nil_n) + list(reg_n)
    Mu = Mat.from_rows(ctx, mu_rows) if mu_rows else Mat.identity(ctx, m)
    Mv = Mat.from_rows(ctx, mv_rows) if mv_rows else Mat.identity(ctx, n)
    return k, Mu, Mv


def _block2(ctx, tl, tr, bl, br):
    return block_compose(ctx, [[tl, tr], [bl, br]])


def _split(M: Mat, r: int, c: int):
    return (
        M.submatrix(0, r, 0, c),
        M.submatrix(0, r, c, M.cols),
        M.submatrix(r, M.rows, 0, c),
        M.submatrix(r, M.rows, c, M.cols),
    )


def pair_canonical_form(B: Mat, C: Mat, mode: str) -> PairCanonical:
    """Reduce a counter pair (B: m x N, C: N x m) by basis changes.

    mode "two_sided" shares the middle transform (C -> v^{-1} C u) and
    reaches [[0, b12],[b21, b22]], [[0, c12],[c21, c22]] with b12, c21
    square nondegenerate, nilpotent cross products, b22 = c22 = 0 mod p.

    mode "three_sided" uses an independent w on C (square pairs only) and
    reaches [[0, beta],[1, 0]], [[0, 1],[gamma, 0]] with both products
    beta gamma and gamma beta vanishing mod p.
    """
    if B.ctx != C.ctx or C.rows != B.cols or C.cols != B.rows:
        raise DimMismatch("need B: m x N and C: N x m")
    if mode == "two_sided":
        return _two_sided(B, C)
    if mode == "three_sided":
        if B.rows != B.cols:
            raise BadSizes("three_sided reduction implemented for square pairs")
        return _three_sided(B, C)
    raise ValueError(f"unknown mode {mode!r}")


def _two_sided(B0: Mat, C0: Mat) -> PairCanonical:
    ctx = B0.ctx
    m, n = B0.rows, B0.cols
    k, Mu, Mv = _fitting_pair(B0, C0)
    u = try_inverse(Mu)
    v = try_inverse(Mv)
    B = Mu * B0 * v
    C = Mv * C0 * u
    if k:
        # exact-zero the regular-row tail of B, then of C, sharing v
        b11, b12, _, _ = _split(B, k, n - k)
        dv = _block2(ctx, Mat.identity(ctx, n - k), Mat.zeros(ctx, n - k, k),
                     (-(try_inverse(b12) * b11)), Mat.identity(ctx, k))
        B = B * dv
        C = try_inverse(dv) * C
        v = v * dv
        c11, _, c21, _ = _split(C, n - k, k)
        dw = _block2(ctx, Mat.identity(ctx, n - k), c11 * try_inverse(c21),
                     Mat.zeros(ctx, k, n - k), Mat.identity(ctx, k))
        C = try_inverse(dw) * C
        B = B * dw
        v = v * dw
    pc = PairCanonical(u, v, v, B, C, k)
    _check_two_sided(B0, C0, pc)
    return pc


def _check_two_sided(B0, C0, pc):
    B, C, k = pc.Bt, pc.Ct, pc.k
    m, n = B.rows, B.cols
    p = B.ctx.p
    assert try_inverse(pc.u) * B0 * pc.v == B
    assert try_inverse(pc.w) * C0 * pc.u == C
    b11, b12, b21, b22 = _split(B, k, n - k)
    c11, c12, c21, c22 = _split(C, n - k, k)
    assert b11.is_zero() and c11.is_zero()
    assert is_invertible(b12) and is_invertible(c21)
    assert all(x % p == 0 for x in b22.data) and all(x % p == 0 for x in c22.data)
    assert is_nilpotent(b21 * c12) and is_nilpotent(c12 * b21)


def _nonnilpotizing(ctx: RingCtx, M: Mat) -> Mat:
    """Invertible U with trace(U M) nonzero mod p, for M nonzero mod p."""
    p = ctx.p
    n = M.rows
    i, j = next((a, b) for a in range(n) for b in range(n) if M[a, b] % p)
    perm = list(range(n))
    perm[i], perm[j] = perm[j], perm[i]  # sigma with sigma(j) = i
    for d in range(1, p):
        data = [0] * (n * n)
        for kk in range(n):
            data[kk * n + perm[kk]] = d if kk == j else 1
        U = Mat(ctx, n, n, data)
        tr = sum((U * M)[t, t] for t in range(n)) % p
        if tr:
            return U
    raise AssertionError("unreachable for p > 2")


def _killing(ctx: RingCtx, B: Mat, C: Mat) -> Mat:
    """Invertible U with B U C = 0 mod p, valid once C B = 0 mod p (square)."""
    n = B.cols
    fp = RingCtx(ctx.p, 1)
    Bp = Mat(fp, B.rows, B.cols, B.data)
    Cp = Mat(fp, C.rows, C.cols, C.data)
    img = _fp_row_basis(ctx, Mat(ctx, *_cols_as_rows(Cp)))  # column space of C
    ker = _fp_row_kernel(ctx, Mat(ctx, Bp.cols, Bp.rows, Bp.transpose().data))  # column kernel of B
    r = len(img)
    assert r <= len(ker)
    src = _extend_basis(fp, list(img), n)
    dst = _extend_basis(fp, list(ker[:r]), n)
    # column map: U sends the i-th src column to the i-th dst column
    src_m = Mat(fp, n, n, [src[j][i] for i in range(n) for j in range(n)])
    dst_m = Mat(fp, n, n, [dst[j][i] for i in range(n) for j in range(n)])
    U = dst_m * try_inverse(src_m)
    lifted = Mat(ctx, n, n, U.data)
    assert all(x % ctx.p == 0 for x in (B * lifted * C).data)
    return lifted


def _cols_as_rows(M: Mat):
    t = M.transpose()
    return t.rows, t.cols, t.data


def _extend_basis(fp: RingCtx, rows, n: int):
    basis = [list(r) for r in rows]
    for i in range(n):
        cand = [1 if j == i else 0 for j in range(n)]
        test = howell_rows(fp, basis + [cand], n)
        if len(test) > len(basis):
            basis.append(cand)
        if len(basis) == n:
            break
    return basis


def _three_sided(B0: Mat, C0: Mat) -> PairCanonical:
    n = B0.rows
    u, v, w, Bt, Ct, k = _three_sided_rec(B0, C0)
    pc = PairCanonical(u, v, w, Bt, Ct, k)
    _check_three_sided(B0, C0, pc)
    return pc


def _check_three_sided(B0, C0, pc):
    p = B0.ctx.p
    k = pc.k
    n = B0.rows
    assert try_inverse(pc.u) * B0 * pc.v == pc.Bt
    assert try_inverse(pc.w) * C0 * pc.u == pc.Ct
    beta = pc.Bt.submatrix(0, n - k, 0, n - k)
    gamma = pc.Ct.submatrix(k, n, 0, n - k)
    assert pc.Bt == _assemble_b(B0.ctx, beta, k)
    assert pc.Ct == _assemble_c(C0.ctx, gamma, k)
    assert all(x % p == 0 for x in (beta * gamma).data)
    assert all(x % p == 0 for x in (gamma * beta).data)


def _assemble_b(ctx, beta, k):
    nk = beta.rows
    return block_compose(ctx, [
        [Mat.zeros(ctx, nk, k), beta],
        [Mat.identity(ctx, k), Mat.zeros(ctx, k, nk)],
    ])


def _assemble_c(ctx, gamma, k):
    nk = gamma.rows
    return block_compose(ctx, [
        [Mat.zeros(ctx, k, nk), Mat.identity(ctx, k)],
        [gamma, Mat.zeros(ctx, nk, k)],
    ])


def _three_sided_rec(B: Mat, C: Mat):
    """Returns (u, v, w, Bt, Ct, k) for the square pair (B, C)."""
    ctx = B.ctx
    n = B.rows
    ident = Mat.identity(ctx, n)
    u, v, w = Mat.identity(ctx, n), Mat.identity(ctx, n), Mat.identity(ctx, n)
    if n == 0:
        return u, v, w, B, C, 0
    while True:
        if not is_nilpotent(B * C):
            return _three_sided_round(B, C, u, v, w)
        if any(x % ctx.p for x in (C * B).data):
            U = _nonnilpotizing(ctx, (C * B).mod_p())
            U = Mat(ctx, n, n, U.data)
            B = B * U
            v = v * U
            continue
        if any(x % ctx.p for x in (B * C).data):
            U = _killing(ctx, B, C)
            B = B * U
            v = v * U
        return u, v, w, B, C, 0


def _three_sided_round(B, C, u, v, w):
    ctx = B.ctx
    n = B.rows
    k, Mu, Mv = _fitting_pair(B, C)
    du, dv = try_inverse(Mu), try_inverse(Mv)
    u, v, w = u * du, v * dv, w * dv
    B = Mu * B * dv
    C = Mv * C * du
    nk = n - k
    one_k, one_nk = Mat.identity(ctx, k), Mat.identity(ctx, nk)
    z = Mat.zeros

    # exact zeros in the top-left blocks (v- and w-moves, independent here)
    b11, b12, _, _ = _split(B, k, nk)
    dv1 = _block2(ctx, one_nk, z(ctx, nk, k), -(try_inverse(b12) * b11), one_k)
    B = B * dv1
    v = v * dv1
    c11, _, c21, _ = _split(C, nk, k)
    dw1 = _block2(ctx, one_nk, c11 * try_inverse(c21), z(ctx, k, nk), one_k)
    C = try_inverse(dw1) * C
    w = w * dw1

    # normalize b12 to the identity
    _, b12, _, _ = _split(B, k, nk)
    dv2 = _block2(ctx, one_nk, z(ctx, nk, k), z(ctx, k, nk), try_inverse(b12))
    B = B * dv2
    v = v * dv2
    # kill b22 with a shared row move
    _, _, _, b22 = _split(B, k, nk)
    du1 = _block2(ctx, one_k, z(ctx, k, nk), b22, one_nk)
    B = try_inverse(du1) * B
    C = C * du1
    u = u * du1
    # normalize c21 to the identity, kill c11 (w-moves)
    c11, _, c21, c22 = _split(C, nk, k)
    dw2 = _block2(ctx, one_nk, z(ctx, nk, k), z(ctx, k, nk), c21)
    C = try_inverse(dw2) * C
    w = w * dw2
    c11, _, _, _ = _split(C, nk, k)
    dw3 = _block2(ctx, one_nk, c11, z(ctx, k, nk), one_k)
    C = try_inverse(dw3) * C
    w = w * dw3
    # kill c22 (u-move), then repair the corner of B (v-move)
    _, _, _, c22 = _split(C, nk, k)
    du2 = _block2(ctx, one_k, -c22, z(ctx, nk, k), one_nk)
    C = C * du2
    B = try_inverse(du2) * B
    u = u * du2
    b11, _, _, _ = _split(B, k, nk)
    dv3 = _block2(ctx, one_nk, z(ctx, nk, k), -b11, one_k)
    B = B * dv3
    v = v * dv3

    beta = B.submatrix(k, n, 0, nk)
    gamma = C.submatrix(0, nk, k, n)
    assert B == _block2(ctx, z(ctx, k, nk), one_k, beta, z(ctx, nk, k))
    assert C == _block2(ctx, z(ctx, nk, k), gamma, one_k, z(ctx, k, nk))

    su, sv, sw, _, _, sk = _three_sided_rec(beta, gamma)
    beta2 = try_inverse(su) * beta * sv
    gamma2 = try_inverse(sw) * gamma * su
    du3 = _block2(ctx, one_k, z(ctx, k, nk), z(ctx, nk, k), su)
    dv4 = _block2(ctx, sv, z(ctx, nk, k), z(ctx, k, nk), one_k)
    dw4 = _block2(ctx, sw, z(ctx, nk, k), z(ctx, k, nk), one_k)
    B = try_inverse(du3) * B * dv4
    C = try_inverse(dw4) * C * du3
    u, v, w = u * du3, v * dv4, w * dw4

    # permute nested corners into a single block corner of size k + sk
    kk = k + sk
    mid = n - kk
    perm_m = _perm_matrix(ctx, n, _order(k, mid, sk, "m"))
    perm_vb = _perm_matrix(ctx, n, _order_cols_b(sk, mid, k))
    perm_wc = _perm_matrix(ctx, n, _order_rows_c(sk, mid, k))
    B = try_inverse(perm_m) * B * perm_vb
    C = try_inverse(perm_wc) * C * perm_m
    u, v, w = u * perm_m, v * perm_vb, w * perm_wc

    beta_f = B.submatrix(0, mid, 0, mid)
    gamma_f = C.submatrix(kk, n, 0, mid)
    assert B == _assemble_b(ctx, beta_f, kk)
    assert C == _assemble_c(ctx, gamma_f, kk)
    return u, v, w, B, C, kk


def _order(k, mid, sk, kind):
    # m-index groups currently (k, mid, sk); new order: (mid, sk, k)
    groups = [list(range(0, k)), list(range(k, k + mid)), list(range(k + mid, k + mid + sk))]
    return groups[1] + groups[2] + groups[0]


def _order_cols_b(sk, mid, k):
    # B-column groups currently (sk, mid, k); new order: (sk, k, mid)
    groups = [list(range(0, sk)), list(range(sk, sk + mid)), list(range(sk + mid, sk + mid + k))]
    return groups[0] + groups[2] + groups[1]


def _order_rows_c(sk, mid, k):
    # C-row groups currently (sk, mid, k); new order: (sk, k, mid)
    groups = [list(range(0, sk)), list(range(sk, sk + mid)), list(range(sk + mid, sk + mid + k))]
    return groups[0] + groups[2] + groups[1]


def _perm_matrix(ctx, n, order):
    """P with (row vector) e_i P = e_{order.index(i)}: columns permuted so
    that applying M -> M * P moves old column order[j] to position j."""
    data = [0] * (n * n)
    for newpos, old in enumerate(order):
        data[old * n + newpos] = 1
    return Mat(ctx, n, n, data)


# ---------------------------------------------------------------------
# reduced elements


class ReducedElement:
    """Either the absorbing zero or an invertible-times-idempotent pair."""

    __slots__ = ("a", "x")

    def __init__(self, a, x):
        self.a = a
        self.x = x

    @classmethod
    def zero(cls) -> "ReducedElement":
        return cls(None, None)

    @property
    def is_zero(self) -> bool:
        return self.a is None

    def __repr__(self):
        if self.is_zero:
            return "ReducedElement(0)"
        return f"ReducedElement(a={self.a!r}, x={self.x!r})"

    def rebuild(self) -> DoubleCoset:
        """A representative of the class a * X[L, M] with square kernels."""
        if self.is_zero:
            raise NotInvertible("the zero class has no invertible representative")
        b, c = self.x.presentations()
        ctx = self.a.ctx
        m = self.a.rows
        z = Mat.zeros
        rep = block_compose(
            ctx,
            [
                [self.a, self.a * b, z(ctx, m, m)],
                [z(ctx, m, m), Mat.identity(ctx, m), z(ctx, m, m)],
                [c, z(ctx, m, m), Mat.identity(ctx, m)],
            ],
        )
        return DoubleCoset(m, m, rep)


def gg1_idempotent(b: Mat, c: Mat) -> XIdempotent:
    """Identify [g^{-1}] o [g] for g = [1 b; c 1] as the X-class of the kernels.

    Requires 1 - bc invertible; asserts the push-through identity
    c (1-bc)^{-1} = (1-cb)^{-1} c along the way.
    """
    ctx = b.ctx
    m, n = b.rows, b.cols
    one_m, one_n = Mat.identity(ctx, m), Mat.identity(ctx, n)
    if not is_invertible(one_m - b * c):
        raise NotInvertible("1 - bc must be invertible")
    lhs = c * try_inverse(one_m - b * c)
    rhs = try_inverse(one_n - c * b) * c
    assert lhs == rhs
    g = DoubleCoset(m, m, _block2(ctx, one_m, b, c, one_n))
    prod = compose(involution(g), g)
    got = identify_idempotent(prod)
    expect = XIdempotent(kernel_of(b), kernel_of(c.transpose()))
    assert got == expect
    return got


def decompose_reduced(g: DoubleCoset) -> ReducedElement:
    """Factor an endomorphism class as invertible * X[ker b, ker c^t].

    Degenerate corner blocks, or a reduced pair failing the nilpotency
    gate, mean the class acts as zero at the minimal height; those inputs
    return the absorbing zero value.
    """
    if g.alpha != g.beta:
        raise NotIdempotent("endomorphism expected")
    m = g.alpha
    ctx = g.ctx
    a = g.a_block()
    d = g.d_block()
    if not is_invertible(a) or not is_invertible(d):
        return ReducedElement.zero()
    b = try_inverse(a) * g.b_block() * try_inverse(d)
    c = g.c_block()
    if not is_nilpotent(b * c):
        return ReducedElement.zero()
    u = solve_lemma2(b, c)
    one = Mat.identity(ctx, m)
    factor = (one - b * c) * (one - b * u * c)
    total = a * factor
    return ReducedElement(total, XIdempotent(kernel_of(b), kernel_of(c.transpose())))


class IdempotentCanonical:
    __slots__ = ("q", "Bt", "Ct", "beta", "gamma")

    def __init__(self, q, Bt, Ct, beta, gamma):
        self.q = q
        self.Bt = Bt
        self.Ct = Ct
        self.beta = beta
        self.gamma = gamma


def idempotent_canonical(x: DoubleCoset, cap: int = 10**7) -> IdempotentCanonical:
    """Conjugator q and the canonical block pair for an X-type idempotent:
    q X(b,c) q^{-1} ~ X([[0, beta],[1, 0]], [[0, 1],[gamma, 0]]) with both
    products beta gamma, gamma beta zero mod p."""
    xid = identify_idempotent(x)  # raises NotIdempotent when not X-type
    if not equivalent(compose(x, x), x, cap=cap):
        raise NotIdempotent("class is not idempotent under composition")
    b, c = xid.presentations()
    pc = pair_canonical_form(b, c, "three_sided")
    q = try_inverse(pc.u)
    return IdempotentCanonical(q, pc.Bt, pc.Ct,
                               pc.Bt.submatrix(0, b.rows - pc.k, 0, b.rows - pc.k),
                               pc.Ct.submatrix(pc.k, b.rows, 0, b.rows - pc.k))
