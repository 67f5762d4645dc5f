"""Exact dense linear algebra over Z/p^mu Z.

Row-vector convention throughout: vectors act from the left, v |-> v*A,
so the kernel of A is the set of row vectors annihilated by right
multiplication.  Z/p^mu Z is a local ring; Gaussian elimination with
valuation-minimal (hence unit, whenever possible) pivots terminates in a
diagonal of p-powers, which gives Smith decompositions, kernels and linear
solvers without ever leaving the ring.
"""

from __future__ import annotations

from .errors import DimMismatch, NoSolution, NotInvertible, NotSquare
from .ring import RingCtx


class Mat:
    """Dense rows x cols matrix with entries reduced into [0, p^mu).

    Value type: structural equality and hashing, no mutation.  Zero-sized
    matrices (0 rows and/or 0 cols) are legal and behave like the empty
    block they represent.
    """

    __slots__ = ("ctx", "rows", "cols", "data")

    def __init__(self, ctx: RingCtx, rows: int, cols: int, data):
        if rows < 0 or cols < 0:
            raise DimMismatch(f"negative shape {rows}x{cols}")
        data = tuple(x % ctx.modulus for x in data)
        if len(data) != rows * cols:
            raise DimMismatch(f"{rows}x{cols} needs {rows*cols} entries, got {len(data)}")
        self.ctx = ctx
        self.rows = rows
        self.cols = cols
        self.data = data

    # -- construction ------------------------------------------------

    @classmethod
    def from_rows(cls, ctx: RingCtx, rows) -> "Mat":
        rows = [list(r) for r in rows]
        n = len(rows)
        m = len(rows[0]) if rows else 0
        if any(len(r) != m for r in rows):
            raise DimMismatch("ragged rows")
        return cls(ctx, n, m, [x for r in rows for x in r])

    @classmethod
    def zeros(cls, ctx: RingCtx, rows: int, cols: int) -> "Mat":
        return cls(ctx, rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, ctx: RingCtx, n: int) -> "Mat":
        data = [0] * (n * n)
        for i in range(n):
            data[i * n + i] = 1
        return cls(ctx, n, n, data)

    @classmethod
    def diagonal(cls, ctx: RingCtx, entries) -> "Mat":
        entries = list(entries)
        n = len(entries)
        data = [0] * (n * n)
        for i, e in enumerate(entries):
            data[i * n + i] = e
        return cls(ctx, n, n, data)

    @classmethod
    def row_vector(cls, ctx: RingCtx, v) -> "Mat":
        v = list(v)
        return cls(ctx, 1, len(v), v)

    # -- basic access ------------------------------------------------

    def __getitem__(self, ij) -> int:
        i, j = ij
        return self.data[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.data[i * self.cols : (i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return tuple(self.data[i * self.cols + j] for i in range(self.rows))

    def tolist(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def __eq__(self, other):
        return (
            isinstance(other, Mat)
            and self.ctx == other.ctx
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.ctx, self.rows, self.cols, self.data))

    def key(self) -> tuple:
        """Canonical hashable key (used by closure engines)."""
        return (self.rows, self.cols, self.data)

    def __repr__(self):
        body = "; ".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"Mat[{self.rows}x{self.cols} mod {self.ctx.modulus}]({body})"

    # -- arithmetic --------------------------------------------------

    def _same_shape(self, other: "Mat") -> None:
        if self.ctx != other.ctx or self.rows != other.rows or self.cols != other.cols:
            raise DimMismatch("shape/ring mismatch")

    def __add__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        m = self.ctx.modulus
        return Mat(self.ctx, self.rows, self.cols,
                   [(a + b) % m for a, b in zip(self.data, other.data)])

    def __sub__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        m = self.ctx.modulus
        return Mat(self.ctx, self.rows, self.cols,
                   [(a - b) % m for a, b in zip(self.data, other.data)])

    def __neg__(self) -> "Mat":
        m = self.ctx.modulus
        return Mat(self.ctx, self.rows, self.cols, [(-a) % m for a in self.data])

    def __mul__(self, other: "Mat") -> "Mat":
        if self.ctx != other.ctx:
            raise DimMismatch("ring mismatch")
        if self.cols != other.rows:
            raise DimMismatch(f"{self.rows}x{self.cols} times {other.rows}x{other.cols}")
        n, k, m = self.rows, self.cols, other.cols
        mod = self.ctx.modulus
        a, b = self.data, other.data
        out = [0] * (n * m)
        for i in range(n):
            ik = i * k
            im = i * m
            for t in range(k):
                ait = a[ik + t]
                if ait:
                    tm = t * m
                    for j in range(m):
                        out[im + j] += ait * b[tm + j]
        return Mat(self.ctx, n, m, [x % mod for x in out])

    def scale(self, c: int) -> "Mat":
        m = self.ctx.modulus
        c %= m
        return Mat(self.ctx, self.rows, self.cols, [(c * a) % m for a in self.data])

    def transpose(self) -> "Mat":
        return Mat(self.ctx, self.cols, self.rows,
                   [self.data[i * self.cols + j]
                    for j in range(self.cols) for i in range(self.rows)])

    def pow(self, e: int) -> "Mat":
        if self.rows != self.cols:
            raise NotSquare("pow of non-square matrix")
        result = Mat.identity(self.ctx, self.rows)
        base = self
        while e > 0:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.data)

    # -- blocks ------------------------------------------------------

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "Mat":
        data = []
        for i in range(r0, r1):
            data.extend(self.data[i * self.cols + c0 : i * self.cols + c1])
        return Mat(self.ctx, r1 - r0, c1 - c0, data)

    def hstack(self, other: "Mat") -> "Mat":
        if self.rows != other.rows or self.ctx != other.ctx:
            raise DimMismatch("hstack mismatch")
        data = []
        for i in range(self.rows):
            data.extend(self.row(i))
            data.extend(other.row(i))
        return Mat(self.ctx, self.rows, self.cols + other.cols, data)

    def vstack(self, other: "Mat") -> "Mat":
        if self.cols != other.cols or self.ctx != other.ctx:
            raise DimMismatch("vstack mismatch")
        return Mat(self.ctx, self.rows + other.rows, self.cols, self.data + other.data)

    # -- ring maps ---------------------------------------------------

    def reduce_level(self, k: int) -> "Mat":
        sub = RingCtx(self.ctx.p, k)
        return Mat(sub, self.rows, self.cols, self.data)

    def mod_p(self) -> "Mat":
        return self.reduce_level(1)


def block_compose(ctx: RingCtx, grid) -> Mat:
    """Assemble a matrix from a grid of blocks with consistent edge sizes."""
    grid = [list(row) for row in grid]
    if not grid:
        return Mat.zeros(ctx, 0, 0)
    heights = [row[0].rows for row in grid]
    widths = [b.cols for b in grid[0]]
    for row, h in zip(grid, heights):
        if len(row) != len(widths):
            raise DimMismatch("ragged block grid")
        for b, w in zip(row, widths):
            if b.rows != h or b.cols != w or b.ctx != ctx:
                raise DimMismatch("inconsistent block sizes")
    data = []
    for row, h in zip(grid, heights):
        for i in range(h):
            for b in row:
                data.extend(b.row(i))
    return Mat(ctx, sum(heights), sum(widths), data)


def vec_mat(v, A: Mat):
    """Row vector action v |-> v*A, v given and returned as a tuple."""
    if len(v) != A.rows:
        raise DimMismatch("vector length vs matrix rows")
    mod = A.ctx.modulus
    out = [0] * A.cols
    for i, vi in enumerate(v):
        if vi:
            base = i * A.cols
            for j in range(A.cols):
                out[j] += vi * A.data[base + j]
    return tuple(x % mod for x in out)


def rank_mod_p(A: Mat) -> int:
    """Rank of A over the residue field F_p."""
    p = A.ctx.p
    rows = [list(A.row(i)) for i in range(A.rows)]
    rank = 0
    for j in range(A.cols):
        piv = None
        for i in range(rank, len(rows)):
            if rows[i][j] % p:
                piv = i
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][j], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][j] % p:
                c = rows[i][j] % p
                rows[i] = [(x - c * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def is_invertible(A: Mat) -> bool:
    """A is invertible over Z/p^mu iff A mod p is invertible over F_p."""
    return A.rows == A.cols and rank_mod_p(A) == A.rows


def try_inverse(A: Mat) -> Mat:
    """Exact inverse; raises NotInvertible exactly when det(A mod p) = 0."""
    if A.rows != A.cols:
        raise NotSquare(f"{A.rows}x{A.cols}")
    n = A.rows
    mod = A.ctx.modulus
    p = A.ctx.p
    # augmented [A | I], elimination with unit pivots only
    work = [list(A.row(i)) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    for j in range(n):
        piv = None
        for i in range(j, n):
            if work[i][j] % p:
                piv = i
                break
        if piv is None:
            raise NotInvertible("singular modulo p")
        work[j], work[piv] = work[piv], work[j]
        inv = pow(work[j][j], -1, mod)
        work[j] = [(x * inv) % mod for x in work[j]]
        for i in range(n):
            if i != j and work[i][j]:
                c = work[i][j]
                rowj = work[j]
                work[i] = [(x - c * y) % mod for x, y in zip(work[i], rowj)]
    return Mat(A.ctx, n, n, [work[i][j] for i in range(n) for j in range(n, 2 * n)])


def is_nilpotent(A: Mat) -> bool:
    """True iff (A mod p)^n = 0 over F_p, equivalently A^(n*mu) = 0."""
    if A.rows != A.cols:
        raise NotSquare(f"{A.rows}x{A.cols}")
    return A.mod_p().pow(max(A.rows, 1)).is_zero() if A.rows else True


class SmithDecomp:
    """A = U * D * V with U, V invertible and D = diag(p^s_1, ..., p^s_k).

    ``exponents`` lists s_i for the min(rows, cols) diagonal positions in
    weakly increasing order; zero diagonal entries carry s_i = mu.
    """

    __slots__ = ("U", "D", "V", "exponents")

    def __init__(self, U: Mat, D: Mat, V: Mat, exponents):
        self.U = U
        self.D = D
        self.V = V
        self.exponents = tuple(exponents)


def smith_diagonal(A: Mat) -> SmithDecomp:
    """Elementary-divisor decomposition over the local ring.

    The pivot at each stage is an entry of globally minimal valuation
    (ties row-major); after moving it to the corner it divides every
    remaining entry exactly, so one elimination round per stage suffices.
    """
    ctx = A.ctx
    n, m = A.rows, A.cols
    mod, p, mu = ctx.modulus, ctx.p, ctx.mu
    work = [list(A.row(i)) for i in range(n)]
    # A = P * work * Q is maintained
    P = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    Q = [[1 if i == j else 0 for j in range(m)] for i in range(m)]

    def row_op_inverse_add(i, j, c):
        # work <- E*work with E = add c*row_j to row_i; P <- P*E^{-1}
        work[i] = [(x + c * y) % mod for x, y in zip(work[i], work[j])]
        for r in range(n):
            P[r][j] = (P[r][j] - c * P[r][i]) % mod

    def col_op_inverse_add(j, i, c):
        # work <- work*F with F = add c*col_i to col_j; Q <- F^{-1}*Q
        for r in range(n):
            work[r][j] = (work[r][j] + c * work[r][i]) % mod
        Q[i] = [(x - c * y) % mod for x, y in zip(Q[i], Q[j])]

    def swap_rows(i, j):
        work[i], work[j] = work[j], work[i]
        for r in range(n):
            P[r][i], P[r][j] = P[r][j], P[r][i]

    def swap_cols(i, j):
        for r in range(n):
            work[r][i], work[r][j] = work[r][j], work[r][i]
        Q[i], Q[j] = Q[j], Q[i]

    def scale_row(i, u):
        uinv = pow(u, -1, mod)
        work[i] = [(u * x) % mod for x in work[i]]
        for r in range(n):
            P[r][i] = (P[r][i] * uinv) % mod

    exponents = []
    k = min(n, m)
    for t in range(k):
        best = None
        best_val = mu
        for i in range(t, n):
            for j in range(t, m):
                v = ctx.valuation(work[i][j])
                if v < best_val:
                    best_val = v
                    best = (i, j)
                    if v == 0:
                        break
            if best is not None and best_val == 0:
                break
        if best is None:
            exponents.extend([mu] * (k - t))
            break
        i0, j0 = best
        if i0 != t:
            swap_rows(t, i0)
        if j0 != t:
            swap_cols(t, j0)
        s = best_val
        u, _ = ctx.unit_part(work[t][t])
        scale_row(t, pow(u, -1, mod))  # pivot now exactly p^s
        ps = p**s
        for i in range(t + 1, n):
            if work[i][t]:
                row_op_inverse_add(i, t, -(work[i][t] // ps))
        for j in range(t + 1, m):
            if work[t][j]:
                col_op_inverse_add(j, t, -(work[t][j] // ps))
        exponents.append(s)

    # min-valuation pivoting already yields weakly increasing exponents;
    # the selection sort below is a safeguard that keeps U, D, V in sync
    for pos in range(len(exponents)):
        mi = min(range(pos, len(exponents)), key=lambda i: exponents[i])
        if mi != pos:
            swap_rows(pos, mi)
            swap_cols(pos, mi)
            exponents[pos], exponents[mi] = exponents[mi], exponents[pos]

    U = Mat(ctx, n, n, [x for row in P for x in row])
    D = Mat(ctx, n, m, [x for row in work for x in row])
    V = Mat(ctx, m, m, [x for row in Q for x in row])
    return SmithDecomp(U, D, V, exponents)


def kernel_basis(A: Mat) -> list:
    """Generators (as tuples) of {v : v*A = 0} inside the row module."""
    ctx = A.ctx
    n = A.rows
    dec = smith_diagonal(A)
    Uinv = try_inverse(dec.U)
    gens = []
    k = min(n, A.cols)
    for i in range(n):
        s = dec.exponents[i] if i < k else ctx.mu
        coeff = ctx.p ** (ctx.mu - s)  # annihilator of p^s
        if coeff % ctx.modulus == 0:
            continue
        gens.append(tuple((coeff * x) % ctx.modulus for x in Uinv.row(i)))
    return gens


def solve_right(A: Mat, B: Mat) -> Mat:
    """Some X with A*X = B, or NoSolution."""
    if A.rows != B.rows or A.ctx != B.ctx:
        raise DimMismatch("solve_right shape mismatch")
    ctx = A.ctx
    dec = smith_diagonal(A)
    W = try_inverse(dec.U) * B  # D * (V*X) = W
    k = min(A.rows, A.cols)
    y_rows = []
    for i in range(A.cols):
        if i < k:
            s = dec.exponents[i]
            ps = ctx.p**s
            row = []
            for j in range(B.cols):
                w = W[i, j]
                if w % ps:
                    raise NoSolution(f"entry ({i},{j}) not divisible by p^{s}")
                row.append(w // ps)
            y_rows.append(row)
        else:
            y_rows.append([0] * B.cols)
    for i in range(A.cols, A.rows):
        if any(W[i, j] for j in range(B.cols)):
            raise NoSolution("inconsistent zero row")
    Y = Mat.from_rows(ctx, y_rows) if y_rows else Mat.zeros(ctx, A.cols, B.cols)
    return try_inverse(dec.V) * Y


def solve_left(A: Mat, B: Mat) -> Mat:
    """Some X with X*A = B, or NoSolution."""
    return solve_right(A.transpose(), B.transpose()).transpose()


def solve_linear(A: Mat, b: Mat, side: str) -> Mat:
    if side == "left":
        return solve_left(A, b)
    if side == "right":
        return solve_right(A, b)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def solve_bilinear(B: Mat, C: Mat, D: Mat) -> Mat:
    """Some u with B*u*C = D, or NoSolution.

    Vectorizes u into a single linear system: row (i,j) of the stacked
    matrix maps u_{k,l} to B_{i,k} C_{l,j}.
    """
    if B.rows != D.rows or C.cols != D.cols or B.ctx != C.ctx != D.ctx:
        raise DimMismatch("solve_bilinear shape mismatch")
    ctx = B.ctx
    nb, nc = B.cols, C.rows
    rows = []
    rhs = []
    for i in range(B.rows):
        for j in range(D.cols):
            row = [0] * (nb * nc)
            for k2 in range(nb):
                bik = B[i, k2]
                if bik:
                    for l2 in range(nc):
                        row[k2 * nc + l2] = (bik * C[l2, j]) % ctx.modulus
            rows.append(row)
            rhs.append([D[i, j]])
    M = Mat.from_rows(ctx, rows) if rows else Mat.zeros(ctx, 0, nb * nc)
    R = Mat.from_rows(ctx, rhs) if rhs else Mat.zeros(ctx, 0, 1)
    x = solve_right(M, R)
    return Mat(ctx, nb, nc, [x[i, 0] for i in range(nb * nc)])


def solution_space_right(A: Mat, B: Mat):
    """All solutions of A*X = B as (particular, homogeneous generators).

    Generators are returned with their additive orders p^e, so the full
    affine space is particular + sum t_i * gen_i with t_i in range(p^e_i).
    Returns None when the system is inconsistent.
    """
    try:
        part = solve_right(A, B)
    except NoSolution:
        return None
    ctx = A.ctx
    gens = []
    # homogeneous solutions per column: X columns solve A*x = 0
    col_kernel = kernel_basis(A.transpose())  # rows v with v*A^t = 0, i.e. A*v^t = 0
    for v in col_kernel:
        order_exp = ctx.mu - min(ctx.valuation(x) for x in v) if any(v) else 0
        for j in range(B.cols):
            g = Mat.zeros(ctx, A.cols, B.cols).tolist()
            for i in range(A.cols):
                g[i][j] = v[i]
            gens.append((Mat.from_rows(ctx, g), ctx.p**order_exp))
    return part, gens
