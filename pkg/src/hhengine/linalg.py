"""Exact rational linear algebra.

Everything in the engine reduces to dense matrices of `fractions.Fraction`
plus one elimination kernel.  The elimination is fraction-free on scaled
integer rows (Bareiss-style pivoting discipline) with a fixed deterministic
pivot rule: the pivot of each row is its first nonzero entry in column
order, and rows are processed in the order given.  Every basis produced
downstream (nullspaces, quotients, homology bases, Hochschild bases) is a
function of this rule only, so repeated runs agree bit for bit.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

Q0 = Fraction(0)
Q1 = Fraction(1)


class LinalgError(Exception):
    pass


class Inconsistent(LinalgError):
    """Right-hand side outside the column space."""


def scalar(x) -> Fraction:
    """Coerce ints, strings like '2/3', and Fractions to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def format_scalar(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class Matrix:
    """Immutable dense matrix over Q, row-major (with a lazy sparse view)."""

    __slots__ = ("rows", "cols", "data", "_cols_sparse")

    def __init__(self, rows, cols, data):
        data = tuple(scalar(x) for x in data)
        if len(data) != rows * cols:
            raise ValueError(f"matrix data length {len(data)} != {rows}x{cols}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "_cols_sparse", None)

    def __setattr__(self, *a):
        raise AttributeError("Matrix is immutable")

    @staticmethod
    def from_rows(rows_list):
        rows = len(rows_list)
        cols = len(rows_list[0]) if rows else 0
        flat = []
        for r in rows_list:
            if len(r) != cols:
                raise ValueError("ragged rows")
            flat.extend(r)
        return Matrix(rows, cols, flat)

    @staticmethod
    def zero(rows, cols):
        return Matrix(rows, cols, [Q0] * (rows * cols))

    @staticmethod
    def identity(n):
        return Matrix(n, n, [Q1 if i == j else Q0 for i in range(n) for j in range(n)])

    @staticmethod
    def from_columns(cols_list, rows):
        cols = len(cols_list)
        flat = [Q0] * (rows * cols)
        for j, col in enumerate(cols_list):
            if len(col) != rows:
                raise ValueError("column length mismatch")
            for i, x in enumerate(col):
                flat[i * cols + j] = scalar(x)
        return Matrix(rows, cols, flat)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i * self.cols + j]

    def row(self, i):
        return self.data[i * self.cols:(i + 1) * self.cols]

    def column(self, j):
        return tuple(self.data[i * self.cols + j] for i in range(self.rows))

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        rs = "; ".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows))
        return f"Matrix({self.rows}x{self.cols}: {rs})"

    def is_zero(self):
        return all(x == 0 for x in self.data)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in +")
        return Matrix(self.rows, self.cols,
                      [a + b for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in -")
        return Matrix(self.rows, self.cols,
                      [a - b for a, b in zip(self.data, other.data)])

    def __neg__(self):
        return Matrix(self.rows, self.cols, [-a for a in self.data])

    def scale(self, c):
        c = scalar(c)
        return Matrix(self.rows, self.cols, [c * a for a in self.data])

    def __mul__(self, other):
        """Matrix product, skipping zero entries (inputs are mostly sparse)."""
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch in *: {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        n, m, p = self.rows, self.cols, other.cols
        out = [Q0] * (n * p)
        a, b = self.data, other.data
        for i in range(n):
            arow = a[i * m:(i + 1) * m]
            base = i * p
            for k, aik in enumerate(arow):
                if aik:
                    brow = b[k * p:(k + 1) * p]
                    for j, bkj in enumerate(brow):
                        if bkj:
                            out[base + j] += aik * bkj
        return Matrix(n, p, out)

    def sparse_columns(self):
        if self._cols_sparse is None:
            cols = [[] for _ in range(self.cols)]
            d = self.data
            nc = self.cols
            for idx, x in enumerate(d):
                if x:
                    cols[idx % nc].append((idx // nc, x))
            object.__setattr__(self, "_cols_sparse", tuple(tuple(c) for c in cols))
        return self._cols_sparse

    def apply(self, vec):
        """Matrix times column vector (tuple in, tuple out)."""
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        out = [Q0] * self.rows
        cols = self.sparse_columns()
        for j, v in enumerate(vec):
            if v:
                for i, a in cols[j]:
                    out[i] += a * v
        return tuple(out)

    def transpose(self):
        return Matrix(self.cols, self.rows,
                      [self.data[i * self.cols + j]
                       for j in range(self.cols) for i in range(self.rows)])

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        flat = []
        for i in range(self.rows):
            flat.extend(self.row(i))
            flat.extend(other.row(i))
        return Matrix(self.rows, self.cols + other.cols, flat)

    def kronecker(self, other):
        """Kronecker product, left factor major (index (i,k) |-> i*other.rows+k)."""
        R, C = self.rows * other.rows, self.cols * other.cols
        flat = [Q0] * (R * C)
        for i in range(self.rows):
            for j in range(self.cols):
                a = self.data[i * self.cols + j]
                if not a:
                    continue
                for k in range(other.rows):
                    base = (i * other.rows + k) * C + j * other.cols
                    orow = other.row(k)
                    for l, b in enumerate(orow):
                        if b:
                            flat[base + l] = a * b
        return Matrix(R, C, flat)


# ---------------------------------------------------------------------------
# Sparse row echelon.  Rows are dicts {col: Fraction}.  The echelon keeps, for
# each pivot column, one row normalized to pivot 1, fully reduced against the
# earlier pivots on insertion.  This is GaussJordan done incrementally, which
# is what makes the big structured solves (module-hom systems) affordable.
# ---------------------------------------------------------------------------


def _clear_denominators(row):
    """Scale a dict row to coprime integers (Bareiss-style growth control)."""
    if not row:
        return row
    l = 1
    for v in row.values():
        l = l * v.denominator // gcd(l, v.denominator)
    g = 0
    for v in row.values():
        g = gcd(g, abs(v.numerator * (l // v.denominator)))
    if g == 0:
        return {}
    return {j: Fraction(v.numerator * (l // v.denominator) // g) for j, v in row.items()}


class Echelon:
    """Incremental reduced row echelon over Q with first-nonzero pivoting."""

    def __init__(self, ncols):
        self.ncols = ncols
        self.pivot_row = {}   # pivot column -> row dict (pivot entry == 1)
        self.order = []       # pivot columns in insertion order

    def reduce(self, row):
        """Fully reduce a dict row against the current echelon (copy-safe)."""
        row = dict(row)
        # repeatedly kill the leading reducible entry; iterate in column order
        while True:
            hit = None
            for j in sorted(row):
                if j in self.pivot_row:
                    hit = j
                    break
            if hit is None:
                return row
            c = row.pop(hit)
            for k, v in self.pivot_row[hit].items():
                if k == hit:
                    continue
                w = row.get(k, Q0) - c * v
                if w:
                    row[k] = w
                else:
                    row.pop(k, None)

    def insert(self, row):
        """Reduce and insert; returns the new pivot column or None if dependent."""
        row = self.reduce(row)
        row = {j: v for j, v in row.items() if v}
        if not row:
            return None
        p = min(row)
        inv = Q1 / row[p]
        row = {j: v * inv for j, v in row.items()}
        # back-substitute into existing rows so the echelon stays fully reduced
        for q in self.order:
            r = self.pivot_row[q]
            c = r.get(p)
            if c:
                for k, v in row.items():
                    if k == p:
                        r.pop(p, None)
                        continue
                    w = r.get(k, Q0) - c * v
                    if w:
                        r[k] = w
                    else:
                        r.pop(k, None)
        self.pivot_row[p] = row
        self.order.append(p)
        return p

    @property
    def rank(self):
        return len(self.order)

    def pivot_columns(self):
        return sorted(self.pivot_row)

    def free_columns(self):
        piv = self.pivot_row
        return [j for j in range(self.ncols) if j not in piv]

    def nullspace_columns(self):
        """Kernel basis of the row space seen as a map Q^ncols -> rows."""
        cols = []
        piv = self.pivot_row
        for f in self.free_columns():
            v = [Q0] * self.ncols
            v[f] = Q1
            for p, row in piv.items():
                c = row.get(f)
                if c:
                    v[p] = -c
            cols.append(tuple(v))
        return cols

    def residual(self, row):
        return {j: v for j, v in self.reduce(row).items() if v}


class SpanSolver:
    """Express vectors in a fixed spanning list (tagged-echelon bookkeeping)."""

    def __init__(self, ncols):
        self.ncols = ncols
        self.count = 0
        self.ech = Echelon(ncols)  # widened lazily with tag columns

    def add(self, row):
        """Insert a spanning vector (dict row); dependent vectors are fine."""
        tagged = dict(row)
        tagged[self.ncols + self.count] = Q1
        self.count += 1
        self.ech.ncols = self.ncols + self.count
        self.ech.insert(tagged)

    def express(self, row):
        """Coefficients over the added vectors reproducing `row`, or None."""
        res = self.ech.reduce(dict(row))
        if any(j < self.ncols and v for j, v in res.items()):
            return None
        coeffs = [Q0] * self.count
        for j, v in res.items():
            if v:
                coeffs[j - self.ncols] = -v
        return coeffs


def _matrix_rows_as_dicts(m: Matrix):
    out = []
    for i in range(m.rows):
        row = {}
        base = i * m.cols
        for j in range(m.cols):
            v = m.data[base + j]
            if v:
                row[j] = v
        out.append(row)
    return out


def rank(m: Matrix) -> int:
    ech = Echelon(m.cols)
    for row in _matrix_rows_as_dicts(m):
        ech.insert(_clear_denominators(row))
    return ech.rank


def nullspace_basis(m: Matrix) -> Matrix:
    """Columns form the canonical basis of {v : m v = 0}."""
    ech = Echelon(m.cols)
    for row in _matrix_rows_as_dicts(m):
        ech.insert(_clear_denominators(row))
    cols = ech.nullspace_columns()
    return Matrix.from_columns(cols, m.cols)


def solve(m: Matrix, b) -> tuple:
    """Some x with m x = b, or raise Inconsistent."""
    if len(b) != m.rows:
        raise ValueError("rhs length mismatch")
    # eliminate on the transpose-augmented system: row-reduce [m | b] columns
    ech = Echelon(m.cols + 1)
    for i in range(m.rows):
        row = {}
        base = i * m.cols
        for j in range(m.cols):
            v = m.data[base + j]
            if v:
                row[j] = v
        bi = scalar(b[i])
        if bi:
            row[m.cols] = bi
        ech.insert(row)
    if m.cols in ech.pivot_row:
        raise Inconsistent("rhs outside the column space")
    x = [Q0] * m.cols
    for p, row in ech.pivot_row.items():
        x[p] = row.get(m.cols, Q0)
    return tuple(x)


def column_space_echelon(m: Matrix) -> Echelon:
    ech = Echelon(m.rows)
    for j in range(m.cols):
        col = {i: m.data[i * m.cols + j] for i in range(m.rows) if m.data[i * m.cols + j]}
        ech.insert(_clear_denominators(col))
    return ech


def quotient_basis(ambient_dim: int, subspace: Matrix):
    """Projector/section pair for Q^ambient / span(columns of subspace).

    projector: ambient -> quotient, section: quotient -> ambient,
    projector . section = identity, projector kills exactly the subspace.
    """
    if subspace.rows != ambient_dim:
        raise ValueError("subspace rows must equal ambient_dim")
    ech = Echelon(ambient_dim)
    for j in range(subspace.cols):
        col = {i: subspace[i, j] for i in range(ambient_dim) if subspace[i, j]}
        ech.insert(_clear_denominators(col))
    free = ech.free_columns()
    qdim = len(free)
    # section: unit vectors on the non-pivot coordinates
    section = Matrix.from_columns(
        [tuple(Q1 if i == f else Q0 for i in range(ambient_dim)) for f in free],
        ambient_dim)
    # projector row k reads off the free-coordinate k of the reduction
    proj_rows = []
    for k, f in enumerate(free):
        proj_rows.append([Q0] * ambient_dim)
        proj_rows[k][f] = Q1
    for p, row in ech.pivot_row.items():
        # residual of e_p has free part -row[f]
        for k, f in enumerate(free):
            c = row.get(f)
            if c:
                proj_rows[k][p] = -c
    if proj_rows:
        projector = Matrix.from_rows(proj_rows)
    else:
        projector = Matrix.zero(0, ambient_dim)
    return projector, section


def intersect_rowspaces(e1_rows, ncols, e2_rows):
    """Basis (list of dict rows) of the intersection of two row spans."""
    # standard kernel trick: rows of [A; B], kernel pairing
    a = [dict(r) for r in e1_rows]
    b = [dict(r) for r in e2_rows]
    big = Echelon(len(a) + len(b))
    # x in span(A) cap span(B): x = u A = -v B: (u, v) in kernel of stacked transpose
    # build matrix with columns a-rows then b-rows, over coordinates 0..ncols
    mat_cols = []
    for r in a:
        mat_cols.append(r)
    for r in b:
        mat_cols.append({j: -v for j, v in r.items()})
    m = Matrix.zero(ncols, len(mat_cols)) if not mat_cols else Matrix.from_columns(
        [tuple(c.get(i, Q0) for i in range(ncols)) for c in mat_cols], ncols)
    ns = nullspace_basis(m)
    out = []
    seen = Echelon(ncols)
    for j in range(ns.cols):
        coeff = ns.column(j)
        vec = {}
        for idx, r in enumerate(a):
            c = coeff[idx]
            if c:
                for k, v in r.items():
                    w = vec.get(k, Q0) + c * v
                    if w:
                        vec[k] = w
                    else:
                        vec.pop(k, None)
        if vec and seen.insert(dict(vec)) is not None:
            out.append(vec)
    return out
