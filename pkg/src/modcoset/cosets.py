"""The finite-truncation category of double cosets of block-identity groups.

A morphism beta -> alpha is a class of invertible N x N matrices g, read as
a block (alpha + (N-alpha)) x (beta + (N-beta)) matrix [a b; c d], under

    [a b; c d]  ~  diag(1_alpha, u) [a b; c d] diag(1_beta, v)

for invertible u, v.  The product of classes is the stable value of
[g1 theta^beta(j) g2] where theta^beta(j) swaps two size-j blocks past
position beta; in block form (the composition rule used everywhere here)

    [a b; c d] o [p q; r t]  =  [ap b aq; cp d cq; r 0 t].

Class equality has no known canonical form, so it is decided exactly:
cheap invariants (the a-corner, the partial-isomorphism image) prescreen,
then the relation  diag(1,u) R1 = R2 diag(1,w)  (w = v^{-1}) is solved as
a linear system over the ring and the affine solution space is searched
for a point with u, w invertible.  A plain double enumeration over unit
groups is kept as an independent oracle for small instances.
"""

from __future__ import annotations

import itertools
import random

from .errors import (
    BadSizes,
    CapExceeded,
    DimMismatch,
    NotInvertible,
    ObjectMismatch,
    SearchSpaceTooLarge,
)
from .matrix import (
    Mat,
    block_compose,
    is_invertible,
    solution_space_right,
    try_inverse,
    vec_mat,
)
from .ring import RingCtx

_GL_CACHE: dict = {}
_GL_ENUM_LIMIT = 600_000


def gl_order(ctx: RingCtx, n: int) -> int:
    """|GL(n, Z/p^mu)| = p^((mu-1) n^2) * prod_k (p^n - p^k)."""
    p = ctx.p
    order = p ** ((ctx.mu - 1) * n * n)
    for k in range(n):
        order *= p**n - p**k
    return order


def gl_group(ctx: RingCtx, n: int) -> tuple:
    """All invertible n x n matrices, in lexicographic entry order (cached)."""
    key = (ctx.p, ctx.mu, n)
    if key not in _GL_CACHE:
        total = ctx.modulus ** (n * n)
        if total > _GL_ENUM_LIMIT:
            raise CapExceeded(f"unit group of size {n} over Z/{ctx.modulus} too large to enumerate")
        _GL_CACHE[key] = tuple(
            m
            for data in itertools.product(range(ctx.modulus), repeat=n * n)
            if is_invertible(m := Mat(ctx, n, n, data))
        )
    return _GL_CACHE[key]


def random_invertible(ctx: RingCtx, n: int, rng: random.Random) -> Mat:
    while True:
        m = Mat(ctx, n, n, [rng.randrange(ctx.modulus) for _ in range(n * n)])
        if is_invertible(m):
            return m


def theta(ctx: RingCtx, beta: int, j: int, size: int | None = None) -> Mat:
    """The block permutation [1_beta, 0, 0; 0, 0, 1_j; 0, 1_j, 0], padded."""
    n = beta + 2 * j
    if size is None:
        size = n
    if size < n:
        raise BadSizes(f"theta^({beta})({j}) needs size >= {n}")
    data = [0] * (size * size)
    for i in range(beta):
        data[i * size + i] = 1
    for i in range(j):
        data[(beta + i) * size + (beta + j + i)] = 1
        data[(beta + j + i) * size + (beta + i)] = 1
    for i in range(n, size):
        data[i * size + i] = 1
    return Mat(ctx, size, size, data)


class DoubleCoset:
    """A morphism of the coset category, stored as a trimmed representative.

    The representative is always invertible; trailing coordinates on which
    it acts as the identity are stripped on construction (trimming is not
    a canonical form, just a size normalization).
    """

    __slots__ = ("alpha", "beta", "rep")

    def __init__(self, alpha: int, beta: int, rep: Mat, trim: bool = True):
        if rep.rows != rep.cols:
            raise BadSizes("representative must be square")
        if rep.rows < max(alpha, beta):
            raise BadSizes(f"size {rep.rows} below max({alpha}, {beta})")
        if not is_invertible(rep):
            raise NotInvertible("coset representative must be invertible")
        if trim:
            rep = _trim(rep, max(alpha, beta))
        self.alpha = alpha
        self.beta = beta
        self.rep = rep

    @property
    def ctx(self) -> RingCtx:
        return self.rep.ctx

    @property
    def size(self) -> int:
        return self.rep.rows

    def labels(self):
        return (self.alpha, self.beta)

    def pad(self, size: int) -> Mat:
        if size < self.size:
            raise BadSizes(f"cannot pad {self.size} down to {size}")
        n = self.size
        data = [0] * (size * size)
        for i in range(n):
            row = self.rep.row(i)
            for j in range(n):
                data[i * size + j] = row[j]
        for i in range(n, size):
            data[i * size + i] = 1
        return Mat(self.ctx, size, size, data)

    # block views (after padding conventions, with the stored size)
    def a_block(self) -> Mat:
        return self.rep.submatrix(0, self.alpha, 0, self.beta)

    def b_block(self) -> Mat:
        return self.rep.submatrix(0, self.alpha, self.beta, self.size)

    def c_block(self) -> Mat:
        return self.rep.submatrix(self.alpha, self.size, 0, self.beta)

    def d_block(self) -> Mat:
        return self.rep.submatrix(self.alpha, self.size, self.beta, self.size)

    def __repr__(self):
        return f"DoubleCoset({self.alpha}<-{self.beta}, {self.rep!r})"

    def __eq__(self, other):
        # representative equality only; class equality is `equivalent`
        return (
            isinstance(other, DoubleCoset)
            and self.labels() == other.labels()
            and self.rep == other.rep
        )

    def __hash__(self):
        return hash((self.alpha, self.beta, self.rep))


def _trim(rep: Mat, floor: int) -> Mat:
    n = rep.rows
    while n > floor:
        last = n - 1
        row_ok = all(rep[last, j] == (1 if j == last else 0) for j in range(n))
        col_ok = all(rep[i, last] == (1 if i == last else 0) for i in range(n))
        if not (row_ok and col_ok):
            break
        rep = rep.submatrix(0, last, 0, last)
        n = last
    return rep


def normalize(g: DoubleCoset) -> DoubleCoset:
    """Deterministic minimal trimmed form (idempotent on constructed cosets)."""
    return DoubleCoset(g.alpha, g.beta, g.rep)


def identity_coset(ctx: RingCtx, alpha: int) -> DoubleCoset:
    return DoubleCoset(alpha, alpha, Mat.identity(ctx, alpha))


def automorphism_coset(a: Mat, alpha: int | None = None) -> DoubleCoset:
    """The class of diag(a, 1_infty) in Aut(alpha), a in GL(alpha)."""
    alpha = a.rows if alpha is None else alpha
    if a.rows != alpha:
        raise BadSizes("automorphism block must have size alpha")
    return DoubleCoset(alpha, alpha, a)


def compose(g1: DoubleCoset, g2: DoubleCoset) -> DoubleCoset:
    """The o-product, by the stable block formula."""
    if g1.ctx != g2.ctx:
        raise ObjectMismatch("different rings")
    if g1.beta != g2.alpha:
        raise ObjectMismatch(f"cannot chain {g1.labels()} with {g2.labels()}")
    beta = g1.beta
    n = max(g1.size, g2.size)
    r1 = g1.pad(n)
    r2 = g2.pad(n)
    alpha, gamma = g1.alpha, g2.beta
    a = r1.submatrix(0, alpha, 0, beta)
    b = r1.submatrix(0, alpha, beta, n)
    c = r1.submatrix(alpha, n, 0, beta)
    d = r1.submatrix(alpha, n, beta, n)
    p = r2.submatrix(0, beta, 0, gamma)
    q = r2.submatrix(0, beta, gamma, n)
    r = r2.submatrix(beta, n, 0, gamma)
    t = r2.submatrix(beta, n, gamma, n)
    ctx = g1.ctx
    zero = Mat.zeros(ctx, n - beta, n - beta)
    rep = block_compose(
        ctx,
        [
            [a * p, b, a * q],
            [c * p, d, c * q],
            [r, zero, t],
        ],
    )
    return DoubleCoset(alpha, gamma, rep)


def compose_via_theta(g1: DoubleCoset, g2: DoubleCoset, j: int) -> DoubleCoset:
    """Literal product g1 * theta^beta(j) * g2 (independent oracle for compose)."""
    if g1.beta != g2.alpha:
        raise ObjectMismatch(f"cannot chain {g1.labels()} with {g2.labels()}")
    beta = g1.beta
    n = max(g1.size, g2.size, beta + j)
    if j < n - beta:
        raise BadSizes(f"padding j = {j} below the stable range {n - beta}")
    full = beta + 2 * j
    th = theta(g1.ctx, beta, j, full)
    prod = g1.pad(full) * th * g2.pad(full)
    return DoubleCoset(g1.alpha, g2.beta, prod)


def involution(g: DoubleCoset) -> DoubleCoset:
    """g |-> class of g^{-1}, swapping the labels."""
    return DoubleCoset(g.beta, g.alpha, try_inverse(g.rep))


def star_auto(g: DoubleCoset) -> DoubleCoset:
    """g |-> class of transpose-inverse, labels unchanged."""
    return DoubleCoset(g.alpha, g.beta, try_inverse(g.rep).transpose())


def pair_action(g: Mat, v, w):
    """(v, w) |-> (v g, w g^{t-1}); preserves the pairing sum v_j w_j."""
    ginv = try_inverse(g)
    return vec_mat(v, g), vec_mat(w, ginv.transpose())


def pairing(v, w, ctx: RingCtx) -> int:
    return sum(a * b for a, b in zip(v, w)) % ctx.modulus


# -- the special cosets of the projector calculus ----------------------


def theta_idempotent(ctx: RingCtx, m: int, alpha: int) -> DoubleCoset:
    """Class of theta^alpha(j), j >= m - alpha, as an endomorphism of m."""
    if not 0 <= alpha <= m:
        raise BadSizes(f"need 0 <= alpha <= m, got alpha={alpha}, m={m}")
    return DoubleCoset(m, m, theta(ctx, alpha, m - alpha))


def lam(ctx: RingCtx, m: int, alpha: int) -> DoubleCoset:
    """The identity matrix as a morphism alpha -> m (tautological embedding)."""
    if not 0 <= alpha <= m:
        raise BadSizes(f"need 0 <= alpha <= m, got alpha={alpha}, m={m}")
    return DoubleCoset(m, alpha, Mat.identity(ctx, m), trim=False)


def lam_star(ctx: RingCtx, m: int, alpha: int) -> DoubleCoset:
    """The identity matrix as a morphism m -> alpha (orthogonal projection)."""
    if not 0 <= alpha <= m:
        raise BadSizes(f"need 0 <= alpha <= m, got alpha={alpha}, m={m}")
    return DoubleCoset(alpha, m, Mat.identity(ctx, m), trim=False)


def iota_embed(g: DoubleCoset, alpha: int, m: int) -> DoubleCoset:
    """The block embedding of End(alpha) into End(m)."""
    if g.labels() != (alpha, alpha):
        raise BadSizes("iota_embed expects an endomorphism of alpha")
    if alpha > m:
        raise BadSizes("alpha must not exceed m")
    ctx = g.ctx
    k = g.size - alpha
    w = m - alpha
    a, b, c, d = g.a_block(), g.b_block(), g.c_block(), g.d_block()
    z = Mat.zeros
    i_w = Mat.identity(ctx, w)
    rep = block_compose(
        ctx,
        [
            [a, z(ctx, alpha, w), b, z(ctx, alpha, w)],
            [z(ctx, w, alpha), z(ctx, w, w), z(ctx, w, k), i_w],
            [c, z(ctx, k, w), d, z(ctx, k, w)],
            [z(ctx, w, alpha), i_w, z(ctx, w, k), z(ctx, w, w)],
        ],
    )
    return DoubleCoset(m, m, rep)


# -- class equality ----------------------------------------------------


def _pi_images_equal(g1: DoubleCoset, g2: DoubleCoset) -> bool:
    from .partial_iso import pi_functor

    return pi_functor(g1) == pi_functor(g2)


def equivalent(
    g1: DoubleCoset,
    g2: DoubleCoset,
    cap: int = 10**7,
    method: str = "auto",
    rng: random.Random | None = None,
    witness: bool = False,
):
    """Decide whether two representatives lie in the same double coset.

    method "solve" linearizes diag(1,u) R1 = R2 diag(1,w); "enumerate" is
    the direct search over pairs of unit-group elements (capped); "auto"
    prescreens with the a-corner and the partial-isomorphism invariant,
    then solves.
    """
    if g1.ctx != g2.ctx:
        raise ObjectMismatch("different rings")
    if g1.labels() != g2.labels():
        raise ObjectMismatch(f"labels {g1.labels()} vs {g2.labels()}")
    alpha, beta = g1.labels()
    n = max(g1.size, g2.size)
    r1, r2 = g1.pad(n), g2.pad(n)
    ctx = g1.ctx

    def reply(ok, pair=None):
        return (ok, pair) if witness else ok

    # the alpha x beta corner is exactly invariant
    if r1.submatrix(0, alpha, 0, beta) != r2.submatrix(0, alpha, 0, beta):
        return reply(False)

    if method == "enumerate":
        return _equivalent_enumerate(alpha, beta, r1, r2, cap, reply)

    if method == "auto" and not _pi_images_equal(g1, g2):
        return reply(False)
    return _equivalent_solve(alpha, beta, r1, r2, cap, reply, rng)


def _equivalent_enumerate(alpha, beta, r1, r2, cap, reply):
    ctx = r1.ctx
    n = r1.rows
    ku, kw = n - alpha, n - beta
    if gl_order(ctx, ku) * gl_order(ctx, kw) > cap:
        raise SearchSpaceTooLarge(
            f"|GL({ku})| * |GL({kw})| exceeds cap {cap}"
        )
    for u in gl_group(ctx, ku):
        left = _embed_tail(u, alpha, n) * r1
        for v in gl_group(ctx, kw):
            if left * _embed_tail(v, beta, n) == r2:
                return reply(True, (u, v))
    return reply(False)


def _embed_tail(u: Mat, head: int, n: int) -> Mat:
    data = [0] * (n * n)
    for i in range(head):
        data[i * n + i] = 1
    k = u.rows
    for i in range(k):
        for j in range(k):
            data[(head + i) * n + (head + j)] = u[i, j]
    return Mat(u.ctx, n, n, data)


def _equivalent_solve(alpha, beta, r1, r2, cap, reply, rng):
    """Solve diag(1,u) R1 = R2 diag(1,w) for invertible u, w; v = w^{-1}."""
    ctx = r1.ctx
    n = r1.rows
    ku, kw = n - alpha, n - beta
    mod = ctx.modulus
    nun = ku * ku
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            row = [0] * (nun + kw * kw)
            const = 0
            if i < alpha:
                const -= r1[i, j]
            else:
                base = (i - alpha) * ku
                for s in range(ku):
                    row[base + s] = r1[alpha + s, j]
            if j < beta:
                const += r2[i, j]
            else:
                col = j - beta
                for r in range(kw):
                    row[nun + r * kw + col] = (row[nun + r * kw + col] - r2[i, beta + r]) % mod
            rows.append(row)
            rhs.append([const % mod])
    M = Mat.from_rows(ctx, rows)
    R = Mat.from_rows(ctx, rhs)
    space = solution_space_right(M, R)
    if space is None:
        return reply(False)
    part, gens = space

    def extract(x):
        u = Mat(ctx, ku, ku, [x[i, 0] for i in range(nun)])
        w = Mat(ctx, kw, kw, [x[nun + i, 0] for i in range(kw * kw)])
        return u, w

    def check(x):
        u, w = extract(x)
        if is_invertible(u) and is_invertible(w):
            uu = _embed_tail(u, alpha, n)
            ww = _embed_tail(w, beta, n)
            if uu * r1 == r2 * ww:
                return u, try_inverse(w)
        return None

    total = 1
    for _, order in gens:
        total *= order
    if total <= cap:
        for combo in itertools.product(*(range(o) for _, o in gens)):
            x = part
            for (g, _), t in zip(gens, combo):
                if t:
                    x = x + g.scale(t)
            got = check(x)
            if got is not None:
                return reply(True, got)
        return reply(False)

    rng = rng or random.Random(0xC0537)
    for _ in range(min(cap, 20_000)):
        x = part
        for g, order in gens:
            t = rng.randrange(order)
            if t:
                x = x + g.scale(t)
        got = check(x)
        if got is not None:
            return reply(True, got)
    raise SearchSpaceTooLarge(
        f"solution space of size {total} exceeds cap {cap} and sampling failed"
    )


def stabilization_report(g1: DoubleCoset, g2: DoubleCoset, extra: int = 3, cap: int = 10**7):
    """Classes [g1 theta^beta(j) g2] across the legal j-range.

    Returns (constant, details): the product class must not depend on j
    once j reaches the stable bound (the finite shadow of multiplicativity).
    """
    base = compose(g1, g2)
    n = max(g1.size, g2.size)
    j0 = n - g1.beta
    details = []
    constant = True
    for j in range(j0, j0 + extra + 1):
        cls = compose_via_theta(g1, g2, j)
        same = equivalent(base, cls, cap=cap)
        details.append((j, same))
        constant = constant and same
    return constant, details
