"""Finite-dimensional associative algebras over Q and their bimodules.

Conventions used everywhere downstream:

  * an Algebra stores one left-multiplication matrix per basis element;
    column j of L_i is b_i * b_j;
  * a tensor product A (x) B orders its basis left-factor major:
    (i, j) |-> i * dim B + j;
  * the opposite algebra keeps the same basis with reversed products;
  * a (B, A)-bimodule is a left module over the enveloping algebra
    env = B (x) A^op, acting by (b (x) a) . m  =  b . m . a;
  * the linear dual D(A) carries the actions
    (a . xi)(x) = xi(x a)  and  (xi . a)(x) = xi(a x).

Projectivity is witnessed, not just decided: every projective module the
engine touches carries a cover by cyclic summands R.u (u running over a
complete orthogonal idempotent family of R) together with a module-linear
section of the covering map.  Sections are solved for once and then
propagated through tensor products and duals by explicit formulas, which is
what keeps the larger composite kernels affordable.
"""

from __future__ import annotations

from .errors import AlgebraMismatch, CyclicQuiver, NotAGroup
from .linalg import (Echelon, Matrix, Q0, Q1, SpanSolver, _clear_denominators,
                     nullspace_basis, quotient_basis, scalar)


def _vec(entries):
    return tuple(scalar(x) for x in entries)


def _unit_vector(dim, i):
    return tuple(Q1 if k == i else Q0 for k in range(dim))


class Algebra:
    """Finite-dimensional unital associative algebra by structure constants."""

    def __init__(self, left_mult, unit, label="A", idempotents=None, check=True):
        self.left_mult = tuple(left_mult)          # L_i, column j = b_i b_j
        self.dim = len(self.left_mult)
        self.unit = _vec(unit)
        self.label = label
        # complete orthogonal idempotent family used to split covers
        self.idempotents = tuple(_vec(u) for u in (idempotents or [unit]))
        self._right_mult = None
        self._gens = None
        self._radical = None
        self._piece_cache = {}
        self._dual_piece_cache = {}
        if check:
            self._check()

    # -- basic arithmetic ---------------------------------------------------

    def multiply(self, u, v):
        out = [Q0] * self.dim
        for i, ui in enumerate(u):
            if ui:
                col = self.left_mult[i].apply(v)
                for k, x in enumerate(col):
                    if x:
                        out[k] += ui * x
        return tuple(out)

    def left_mult_matrix(self, vec):
        out = Matrix.zero(self.dim, self.dim)
        acc = [Q0] * (self.dim * self.dim)
        for i, c in enumerate(vec):
            if c:
                for idx, x in enumerate(self.left_mult[i].data):
                    if x:
                        acc[idx] += c * x
        return Matrix(self.dim, self.dim, acc)

    @property
    def right_mult(self):
        """R_j with column i = b_i b_j."""
        if self._right_mult is None:
            rm = []
            for j in range(self.dim):
                cols = [self.left_mult[i].column(j) for i in range(self.dim)]
                rm.append(Matrix.from_columns(cols, self.dim))
            self._right_mult = tuple(rm)
        return self._right_mult

    def right_mult_matrix(self, vec):
        acc = [Q0] * (self.dim * self.dim)
        for j, c in enumerate(vec):
            if c:
                for idx, x in enumerate(self.right_mult[j].data):
                    if x:
                        acc[idx] += c * x
        return Matrix(self.dim, self.dim, acc)

    def _check(self):
        iu = self.left_mult_matrix(self.unit)
        if iu != Matrix.identity(self.dim):
            raise ValueError(f"{self.label}: unit is not a left unit")
        if self.right_mult_matrix(self.unit) != Matrix.identity(self.dim):
            raise ValueError(f"{self.label}: unit is not a right unit")
        for i in range(self.dim):
            for j in range(self.dim):
                bibj = self.left_mult[i].column(j)
                if self.left_mult_matrix(bibj) != self.left_mult[i] * self.left_mult[j]:
                    raise ValueError(f"{self.label}: associativity fails at ({i},{j})")
        s = [Q0] * self.dim
        for u in self.idempotents:
            if self.multiply(u, u) != u:
                raise ValueError(f"{self.label}: declared idempotent is not idempotent")
            for k, x in enumerate(u):
                s[k] += x
        if tuple(s) != self.unit:
            raise ValueError(f"{self.label}: idempotent family does not sum to 1")

    def __repr__(self):
        return f"Algebra({self.label}, dim={self.dim})"

    # -- generators, radical ------------------------------------------------

    def generators(self):
        """A small generating list of basis-element indices (greedy, pruned)."""
        if self._gens is not None:
            return self._gens
        span = Echelon(self.dim)
        span.insert({i: x for i, x in enumerate(self.unit) if x})
        vecs = [self.unit]
        gens = []

        def close(new):
            work = [new]
            while work:
                w = work.pop()
                for v in list(vecs):
                    for prod in (self.multiply(w, v), self.multiply(v, w)):
                        row = {i: x for i, x in enumerate(prod) if x}
                        if span.insert(_clear_denominators(row)) is not None:
                            vecs.append(prod)
                            work.append(prod)

        for i in range(self.dim):
            if span.rank == self.dim:
                break
            e = _unit_vector(self.dim, i)
            if span.insert({i: Q1}) is not None:
                vecs.append(e)
                gens.append(i)
                close(e)
        self._gens = tuple(gens)
        return self._gens

    def generator_vectors(self):
        return tuple(_unit_vector(self.dim, i) for i in self.generators())

    def radical_basis(self):
        """Basis columns of rad(A) via the trace form (valid in char 0)."""
        if self._radical is None:
            gram = []
            lm = self.left_mult
            for i in range(self.dim):
                row = []
                for j in range(self.dim):
                    t = Q0
                    a, b = lm[i], lm[j]
                    for k in range(self.dim):
                        arow = a.row(k)
                        for l, x in enumerate(arow):
                            if x:
                                y = b[l, k]
                                if y:
                                    t += x * y
                    row.append(t)
                gram.append(row)
            self._radical = nullspace_basis(Matrix.from_rows(gram))
        return self._radical

    @property
    def is_semisimple(self):
        return self.radical_basis().cols == 0

    # -- cyclic pieces R.u and u.R (cached per idempotent index) -------------

    def left_piece(self, uidx):
        """(basis matrix, coordinate solver) for A.u, u = idempotents[uidx]."""
        if uidx not in self._piece_cache:
            u = self.idempotents[uidx]
            cols, solver = [], SpanSolver(self.dim)
            ech = Echelon(self.dim)
            for i in range(self.dim):
                v = self.multiply(_unit_vector(self.dim, i), u)
                row = {k: x for k, x in enumerate(v) if x}
                if ech.insert(_clear_denominators(dict(row))) is not None:
                    cols.append(v)
                    solver.add(row)
            self._piece_cache[uidx] = (Matrix.from_columns(cols, self.dim), solver)
        return self._piece_cache[uidx]

    def right_piece(self, uidx):
        """(basis matrix, coordinate solver) for u.A."""
        if uidx not in self._dual_piece_cache:
            u = self.idempotents[uidx]
            cols, solver = [], SpanSolver(self.dim)
            ech = Echelon(self.dim)
            for i in range(self.dim):
                v = self.multiply(u, _unit_vector(self.dim, i))
                row = {k: x for k, x in enumerate(v) if x}
                if ech.insert(_clear_denominators(dict(row))) is not None:
                    cols.append(v)
                    solver.add(row)
            self._dual_piece_cache[uidx] = (Matrix.from_columns(cols, self.dim), solver)
        return self._dual_piece_cache[uidx]


# -- constructors -----------------------------------------------------------


_POINT = None


def point_algebra():
    global _POINT
    if _POINT is None:
        _POINT = Algebra([Matrix.identity(1)], [Q1], label="pt", check=False)
    return _POINT


def group_algebra(cayley_table, label=None):
    """Group algebra from an n x n index table: table[i][j] = index of g_i g_j."""
    n = len(cayley_table)
    for row in cayley_table:
        if len(row) != n or any(not (0 <= x < n) for x in row):
            raise NotAGroup("table is not square over valid indices")
    t = cayley_table
    identity = None
    for e in range(n):
        if all(t[e][x] == x and t[x][e] == x for x in range(n)):
            identity = e
            break
    if identity is None:
        raise NotAGroup("no identity element")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if t[t[i][j]][k] != t[i][t[j][k]]:
                    raise NotAGroup(("associativity fails", i, j, k))
    for i in range(n):
        if not any(t[i][j] == identity and t[j][i] == identity for j in range(n)):
            raise NotAGroup(("no inverse", i))
    lm = []
    for i in range(n):
        cols = [_unit_vector(n, t[i][j]) for j in range(n)]
        lm.append(Matrix.from_columns(cols, n))
    return Algebra(lm, _unit_vector(n, identity),
                   label=label or f"kG({n})", check=False)


def path_algebra(vertices, arrows, label=None):
    """Path algebra of an acyclic quiver.

    Vertices are 0-based; arrows are (source, target) pairs.  Basis = all
    paths (trivial paths first), ordered by length then discovery; the
    product x * y is `x after y`: concatenation when target(y) = source(x),
    else 0.
    """
    arrow_list = [(int(s), int(t)) for s, t in arrows]
    for s, t in arrow_list:
        if not (0 <= s < vertices and 0 <= t < vertices):
            raise ValueError("arrow endpoint out of range")
    # cycle check: repeatedly remove sinks
    remaining = set(range(vertices))
    live = list(arrow_list)
    while remaining:
        sinks = {v for v in remaining if all(s != v for s, t in live)}
        if not sinks:
            raise CyclicQuiver("quiver has a cycle; path basis is infinite")
        remaining -= sinks
        live = [(s, t) for s, t in live if t not in sinks]
    # enumerate paths: (arrow index tuple, source, target)
    all_paths = [((), v, v) for v in range(vertices)]
    cur = list(all_paths)
    while cur:
        nxt = []
        for p, s, t in cur:
            for ai, (a_s, a_t) in enumerate(arrow_list):
                if a_s == t:
                    nxt.append((p + (ai,), s, a_t))
        all_paths.extend(nxt)
        cur = nxt
    index = {(p, s): i for i, (p, s, _) in enumerate(all_paths)}
    n = len(all_paths)
    zero = tuple([Q0] * n)
    lm = []
    for pi, si, ti in all_paths:
        cols = []
        for pj, sj, tj in all_paths:
            cols.append(_unit_vector(n, index[pj + pi, sj]) if si == tj else zero)
        lm.append(Matrix.from_columns(cols, n))
    unit = [Q0] * n
    for i, (p, _, _) in enumerate(all_paths):
        if p == ():
            unit[i] = Q1
    idems = [_unit_vector(n, i) for i, (p, _, _) in enumerate(all_paths) if p == ()]
    return Algebra(lm, unit, label=label or f"Path({vertices})",
                   idempotents=idems, check=False)


def matrix_algebra(n, label=None):
    """Full matrix algebra M_n(Q), basis e_{ij} ordered row-major."""
    dim = n * n
    def idx(i, j):
        return i * n + j
    lm = []
    for i in range(n):
        for j in range(n):
            cols = []
            for k in range(n):
                for l in range(n):
                    if j == k:
                        cols.append(_unit_vector(dim, idx(i, l)))
                    else:
                        cols.append(tuple([Q0] * dim))
            lm.append(Matrix.from_columns(cols, dim))
    unit = [Q0] * dim
    for i in range(n):
        unit[idx(i, i)] = Q1
    idems = [_unit_vector(dim, idx(i, i)) for i in range(n)]
    return Algebra(lm, unit, label=label or f"M{n}(Q)", idempotents=idems, check=False)


def opposite(a: Algebra):
    lm = [a.right_mult[i] for i in range(a.dim)]
    op = Algebra(lm, a.unit, label=f"{a.label}^op",
                 idempotents=a.idempotents, check=False)
    return op


def tensor_product(a: Algebra, b: Algebra):
    """A (x) B with basis (i, j) |-> i * dim B + j."""
    dim = a.dim * b.dim
    lm = []
    for i in range(a.dim):
        for j in range(b.dim):
            lm.append(a.left_mult[i].kronecker(b.left_mult[j]))
    unit = [x * y for x in a.unit for y in b.unit]
    idems = []
    for u in a.idempotents:
        for v in b.idempotents:
            idems.append(tuple(x * y for x in u for y in v))
    t = Algebra(lm, unit, label=f"{a.label}(x){b.label}",
                idempotents=idems, check=False)
    # generators g(x)1, 1(x)h are enough and much smaller than greedy's find
    gens = []
    for i in a.generators():
        gi = _unit_vector(a.dim, i)
        gens.append(tuple(x * y for x in gi for y in b.unit))
    for j in b.generators():
        hj = _unit_vector(b.dim, j)
        gens.append(tuple(x * y for x in a.unit for y in hj))
    t._tensor_gen_vectors = tuple(gens)
    t._tensor_factors = (a, b)
    return t


def enveloping(a: Algebra):
    return tensor_product(a, opposite(a))


def algebra_generator_vectors(a: Algebra):
    """Generator vectors; tensor products use the factorwise shortcut."""
    shortcut = getattr(a, "_tensor_gen_vectors", None)
    if shortcut is not None:
        return shortcut
    return a.generator_vectors()


# -- bimodules ---------------------------------------------------------------


class Bimodule:
    """A (left_algebra, right_algebra)-bimodule with explicit action matrices."""

    def __init__(self, left, right, dim, left_action, right_action,
                 label="M", check=True):
        self.left = left
        self.right = right
        self.dim = dim
        self.left_action = tuple(left_action)
        self.right_action = tuple(right_action)
        self.label = label
        self._env = None
        self._proj = None
        self._env_gen_acts = None
        if check:
            self._check()

    def _check(self):
        idm = Matrix.identity(self.dim)
        if self.act_left(self.left.unit) != idm:
            raise ValueError(f"{self.label}: left action not unital")
        if self.act_right(self.right.unit) != idm:
            raise ValueError(f"{self.label}: right action not unital")
        for i in range(self.left.dim):
            for j in range(self.left.dim):
                prod = self.left.left_mult[i].column(j)
                if self.left_action[i] * self.left_action[j] != self.act_left(prod):
                    raise ValueError(f"{self.label}: left action not an action at ({i},{j})")
        for i in range(self.right.dim):
            for j in range(self.right.dim):
                prod = self.right.left_mult[i].column(j)
                if self.right_action[j] * self.right_action[i] != self.act_right(prod):
                    raise ValueError(f"{self.label}: right action not an anti-action at ({i},{j})")
        for i in range(self.left.dim):
            for j in range(self.right.dim):
                if self.left_action[i] * self.right_action[j] != \
                        self.right_action[j] * self.left_action[i]:
                    raise ValueError(f"{self.label}: actions do not commute at ({i},{j})")

    def __repr__(self):
        return f"Bimodule({self.label}, {self.left.label}|{self.right.label}, dim={self.dim})"

    def act_left(self, vec):
        acc = [Q0] * (self.dim * self.dim)
        for i, c in enumerate(vec):
            if c:
                for idx, x in enumerate(self.left_action[i].data):
                    if x:
                        acc[idx] += c * x
        return Matrix(self.dim, self.dim, acc)

    def act_right(self, vec):
        acc = [Q0] * (self.dim * self.dim)
        for j, c in enumerate(vec):
            if c:
                for idx, x in enumerate(self.right_action[j].data):
                    if x:
                        acc[idx] += c * x
        return Matrix(self.dim, self.dim, acc)

    @property
    def env(self):
        if self._env is None:
            self._env = enveloping_of(self.left, self.right)
        return self._env

    def act_env(self, vec):
        """Action of an element of env = left (x) right^op."""
        nb = self.right.dim
        acc = Matrix.zero(self.dim, self.dim)
        data = [Q0] * (self.dim * self.dim)
        for idx, c in enumerate(vec):
            if c:
                i, j = divmod(idx, nb)
                m = self.left_action[i] * self.right_action[j]
                for k, x in enumerate(m.data):
                    if x:
                        data[k] += c * x
        return Matrix(self.dim, self.dim, data)

    def env_generator_actions(self):
        if self._env_gen_acts is None:
            acts = []
            for i in self.left.generators():
                acts.append(self.left_action[i])
            for j in self.right.generators():
                acts.append(self.right_action[j])
            self._env_gen_acts = tuple(acts)
        return self._env_gen_acts


_ENV_CACHE = {}


def enveloping_of(left: Algebra, right: Algebra):
    key = (id(left), id(right))
    if key not in _ENV_CACHE:
        _ENV_CACHE[key] = (tensor_product(left, opposite(right)), left, right)
    return _ENV_CACHE[key][0]


def point_bimodule(dim, label="V"):
    """A plain vector space as a (pt, pt)-bimodule."""
    pt = point_algebra()
    idm = Matrix.identity(dim)
    return Bimodule(pt, pt, dim, [idm], [idm], label=label, check=False)


def free_bimodule(left, right, rank=1, label=None):
    """(left (x) right^op)^rank as a (left, right)-bimodule."""
    env = enveloping_of(left, right)
    dim = env.dim * rank
    la, ra = [], []
    for i in range(left.dim):
        ev = tuple(x * y for k, x in enumerate(_unit_vector(left.dim, i))
                   for y in right.unit)
        m = env.left_mult_matrix(ev)
        la.append(_block_diag([m] * rank))
    for j in range(right.dim):
        ev = tuple(x * y for x in left.unit
                   for l, y in enumerate(_unit_vector(right.dim, j)))
        m = env.left_mult_matrix(ev)
        ra.append(_block_diag([m] * rank))
    return Bimodule(left, right, dim, la, ra,
                    label=label or f"free({left.label}|{right.label})^{rank}",
                    check=False)


def regular_bimodule(a: Algebra):
    return Bimodule(a, a, a.dim, a.left_mult, a.right_mult,
                    label=f"{a.label}-reg", check=False)


def dual_bimodule(a: Algebra):
    """D(A) = linear dual with (a.xi)(x) = xi(x a), (xi.a)(x) = xi(a x)."""
    la = [a.right_mult[i].transpose() for i in range(a.dim)]
    ra = [a.left_mult[j].transpose() for j in range(a.dim)]
    return Bimodule(a, a, a.dim, la, ra, label=f"D({a.label})", check=False)


def module_as_bimodule(a: Algebra, action, label="E"):
    """Left A-module (list of action matrices per basis element) as (A, pt)-bimodule."""
    dim = action[0].rows if action else 0
    pt = point_algebra()
    return Bimodule(a, pt, dim, list(action), [Matrix.identity(dim)],
                    label=label, check=True)


def _block_diag(blocks):
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    flat = [Q0] * (rows * cols)
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            base = (r0 + i) * cols + c0
            for j in range(b.cols):
                v = b[i, j]
                if v:
                    flat[base + j] = v
        r0 += b.rows
        c0 += b.cols
    return Matrix(rows, cols, flat)


# -- module spans, generators, covers, sections ------------------------------


def span_closure(gen_acts, dim, seeds):
    """Echelon of the module span of `seeds` under the generator actions."""
    ech = Echelon(dim)
    vecs = []
    work = []
    for v in seeds:
        row = {i: x for i, x in enumerate(v) if x}
        if ech.insert(_clear_denominators(row)) is not None:
            vecs.append(v)
            work.append(v)
    while work:
        w = work.pop()
        for g in gen_acts:
            gv = g.apply(w)
            row = {i: x for i, x in enumerate(gv) if x}
            if row and ech.insert(_clear_denominators(row)) is not None:
                vecs.append(gv)
                work.append(gv)
    return ech, vecs


def module_generators(m: Bimodule):
    """Greedy, pruned generating vectors of m as a left env-module."""
    acts = m.env_generator_actions()
    gens = []
    ech, _ = span_closure(acts, m.dim, [])
    for i in range(m.dim):
        if ech.rank == m.dim:
            break
        e = _unit_vector(m.dim, i)
        if ech.residual({i: Q1}):
            gens.append(e)
            ech, _ = span_closure(acts, m.dim, gens)
    # prune shadowed generators, earliest first
    k = 0
    while k < len(gens):
        rest = gens[:k] + gens[k + 1:]
        ech, _ = span_closure(acts, m.dim, rest)
        if ech.rank == m.dim:
            gens = rest
        else:
            k += 1
    return gens


class Cover:
    """A covering map  F = (+)_p env.u_p  ->>  M  with per-piece bookkeeping.

    pieces[p] = (uidx, gen_vector, piece_basis, piece_solver); ev maps the
    concatenated piece coordinates onto M.
    """

    def __init__(self, module: Bimodule, pieces, ev):
        self.module = module
        self.pieces = pieces
        self.ev = ev
        self.dim = ev.cols

    def piece_ranges(self):
        out = []
        off = 0
        for uidx, gen, basis, _ in self.pieces:
            out.append((off, off + basis.cols))
            off += basis.cols
        return out

    def as_bimodule(self):
        """F as an honest (left, right)-bimodule, block per piece."""
        m = self.module
        la, ra = [], []
        for i in range(m.left.dim):
            ev = tuple(x * y for k, x in enumerate(_unit_vector(m.left.dim, i))
                       for y in m.right.unit)
            la.append(self._piece_block(ev))
        for j in range(m.right.dim):
            ev = tuple(x * y for x in m.left.unit
                       for l, y in enumerate(_unit_vector(m.right.dim, j)))
            ra.append(self._piece_block(ev))
        f = Bimodule(m.left, m.right, self.dim, la, ra,
                     label=f"cover({m.label})", check=False)
        return f

    def _piece_block(self, env_vec):
        env = self.module.env
        blocks = []
        for uidx, gen, basis, solver in self.pieces:
            lmat = env.left_mult_matrix(env_vec)
            cols = []
            for c in range(basis.cols):
                img = lmat.apply(basis.column(c))
                coords = solver.express({i: x for i, x in enumerate(img) if x})
                cols.append(tuple(coords))
            blocks.append(Matrix.from_columns(cols, basis.cols))
        return _block_diag(blocks)


def build_cover(m: Bimodule, gens=None):
    """Cover m by cyclic summands env.u, splitting generators over the
    declared idempotent family of the enveloping algebra."""
    env = m.env
    if gens is None:
        gens = module_generators(m)
    pieces = []
    ev_cols = []
    for g in gens:
        for uidx, u in enumerate(env.idempotents):
            ug = m.act_env(u).apply(g)
            if not any(ug):
                continue
            basis, solver = env.left_piece(uidx)
            pieces.append((uidx, ug, basis, solver))
            for c in range(basis.cols):
                ev_cols.append(m.act_env(basis.column(c)).apply(ug))
    dim_f = len(ev_cols)
    ev = Matrix.from_columns(ev_cols, m.dim) if ev_cols else Matrix.zero(m.dim, 0)
    return Cover(m, pieces, ev)


def solve_section(m: Bimodule, cover: Cover):
    """Module-linear s with ev . s = id, or None if m is not projective."""
    f = cover.as_bimodule()
    gen_acts_m = m.env_generator_actions()
    gen_acts_f = f.env_generator_actions()
    nm, nf = m.dim, f.dim
    ech = Echelon(nf * nm + 1)
    rows = []

    def unk(i, j):
        return i * nm + j

    for gm, gf in zip(gen_acts_m, gen_acts_f):
        # s . gm - gf . s = 0, entry (i, j)
        for i in range(nf):
            grow = gf.row(i)
            for j in range(nm):
                row = {}
                for k in range(nm):
                    v = gm[k, j]
                    if v:
                        row[unk(i, k)] = row.get(unk(i, k), Q0) + v
                for k, v in enumerate(grow):
                    if v:
                        row[unk(k, j)] = row.get(unk(k, j), Q0) - v
                if row:
                    rows.append(row)
    idm = Matrix.identity(nm)
    aug = nf * nm  # augmented rhs column, as in linalg.solve
    for i in range(nm):
        erow = cover.ev.row(i)
        for j in range(nm):
            row = {}
            for k, v in enumerate(erow):
                if v:
                    row[unk(k, j)] = v
            if idm[i, j]:
                row[aug] = idm[i, j]
            rows.append(row)
    for row in rows:
        ech.insert(row)
    if aug in ech.pivot_row:
        return None
    data = [Q0] * (nf * nm)
    for p, row in ech.pivot_row.items():
        if p < aug:
            data[p] = row.get(aug, Q0)
    s = Matrix(nf, nm, data)
    assert cover.ev * s == idm
    return s


class ProjData:
    """Projectivity witness: cover + section, and dual-basis coordinates."""

    def __init__(self, cover: Cover, section: Matrix):
        self.cover = cover
        self.section = section

    def coordinates(self):
        """Pairs (x_p, phi_p): m = sum_p phi_p(m) . x_p with phi_p env-valued.

        x_p is the covered generator of piece p; phi_p(m) is the piece
        component of the section, written in enveloping-algebra coordinates
        (a dim-env x dim-m matrix).
        """
        out = []
        ranges = self.cover.piece_ranges()
        for (uidx, gen, basis, _), (lo, hi) in zip(self.cover.pieces, ranges):
            rows = [self.section.row(r) for r in range(lo, hi)]
            block = Matrix.from_rows(rows) if rows else Matrix.zero(0, self.section.cols)
            phi = basis * block
            out.append((gen, phi))
        return out


def proj_data(m: Bimodule):
    """Compute (and cache) a projectivity witness, or None.

    m._proj may hold a thunk installed by a derived construction (tensor,
    dual, sum); it is forced on first use.
    """
    if callable(m._proj):
        m._proj = m._proj()
    if m._proj is None:
        cover = build_cover(m)
        section = solve_section(m, cover)
        m._proj = (ProjData(cover, section) if section is not None else False)
    return m._proj if m._proj else None


def is_projective(m: Bimodule):
    if m._proj is not None:
        return callable(m._proj) or bool(m._proj)
    return proj_data(m) is not None


def sum_proj_data(ab: Bimodule, a: Bimodule, b: Bimodule):
    """Witness for a direct sum from witnesses of the summands."""
    pda, pdb = proj_data(a), proj_data(b)
    if pda is None or pdb is None:
        from .errors import NotPerfect
        raise NotPerfect("sum of non-witnessed bimodules")
    pieces = []
    for uidx, gen, basis, solver in pda.cover.pieces:
        pieces.append((uidx, tuple(gen) + (Q0,) * b.dim, basis, solver))
    for uidx, gen, basis, solver in pdb.cover.pieces:
        pieces.append((uidx, (Q0,) * a.dim + tuple(gen), basis, solver))
    za = Matrix.zero(a.dim, pdb.cover.ev.cols)
    zb = Matrix.zero(b.dim, pda.cover.ev.cols)
    ev = Matrix.from_rows(
        [tuple(pda.cover.ev.row(i)) + tuple(za.row(i)) for i in range(a.dim)] +
        [tuple(zb.row(i)) + tuple(pdb.cover.ev.row(i)) for i in range(b.dim)])
    section = _block_diag([pda.section, pdb.section])
    assert ev * section == Matrix.identity(ab.dim)
    return ProjData(Cover(ab, pieces, ev), section)


def attach_proj_data(m: Bimodule, cover: Cover, section: Matrix):
    m._proj = ProjData(cover, section)


# -- submodules and resolutions -------------------------------------------------


def kernel_submodule(f: Matrix, m: Bimodule, label="K"):
    """(K, inclusion) for ker(f) with f a module map out of m."""
    z = nullspace_basis(f)
    solver = SpanSolver(m.dim)
    for j in range(z.cols):
        solver.add({i: z[i, j] for i in range(z.rows) if z[i, j]})
    la, ra = [], []
    for k in range(m.left.dim):
        cols = []
        for j in range(z.cols):
            v = m.left_action[k].apply(z.column(j))
            c = solver.express({i: x for i, x in enumerate(v) if x})
            assert c is not None, "kernel not closed under the action"
            cols.append(tuple(c))
        la.append(Matrix.from_columns(cols, z.cols))
    for k in range(m.right.dim):
        cols = []
        for j in range(z.cols):
            v = m.right_action[k].apply(z.column(j))
            c = solver.express({i: x for i, x in enumerate(v) if x})
            assert c is not None, "kernel not closed under the action"
            cols.append(tuple(c))
        ra.append(Matrix.from_columns(cols, z.cols))
    k = Bimodule(m.left, m.right, z.cols, la, ra, label=label, check=False)
    return k, z


def attach_self_cover(f: Bimodule, cover_pieces):
    """ProjData for a module that IS a sum of cover pieces (ev = section = id)."""
    pieces = []
    off = 0
    for uidx, basis, solver in cover_pieces:
        u = f.env.idempotents[uidx]
        coords = solver.express({i: x for i, x in enumerate(u) if x})
        assert coords is not None
        gen = [Q0] * f.dim
        for r, x in enumerate(coords):
            gen[off + r] = x
        pieces.append((uidx, tuple(gen), basis, solver))
        off += basis.cols
    cover = Cover(f, pieces, Matrix.identity(f.dim))
    f._proj = ProjData(cover, Matrix.identity(f.dim))
    return f


def projective_resolution(m: Bimodule, max_length=None):
    """(Complex, augmentation) resolving m by projectives in degrees -len..0.

    Built from covers split along the idempotent family; halts when the
    kernel is projective, so the final term is that kernel itself.
    """
    from .complexes import Complex
    from .errors import ResolutionTooLong
    if max_length is None:
        max_length = m.env.dim ** 2 + 2
    if is_projective(m):
        c = Complex({0: m}, {}, m.left, m.right, check=False)
        return c, Matrix.identity(m.dim)
    cover = build_cover(m)
    f0 = cover.as_bimodule()
    attach_self_cover(f0, [(uidx, basis, solver)
                           for uidx, gen, basis, solver in cover.pieces])
    terms = {0: f0}
    diffs = {}
    aug = cover.ev
    prev_map = cover.ev      # map from current cover module onto covered thing
    prev_mod = f0
    deg = 0
    while True:
        k, incl = kernel_submodule(prev_map, prev_mod, label=f"syz{-deg+1}")
        if k.dim == 0:
            break
        deg -= 1
        if -deg > max_length:
            raise ResolutionTooLong(
                f"{m.label}: kernel still non-projective at length {max_length}")
        if is_projective(k):
            terms[deg] = k
            diffs[deg] = incl
            break
        kcover = build_cover(k)
        fk = kcover.as_bimodule()
        attach_self_cover(fk, [(uidx, basis, solver)
                               for uidx, gen, basis, solver in kcover.pieces])
        terms[deg] = fk
        diffs[deg] = incl * kcover.ev
        prev_map = kcover.ev
        prev_mod = fk
    c = Complex(terms, diffs, m.left, m.right, check=False)
    return c, aug


# -- hom spaces ---------------------------------------------------------------


_HOM_CACHE = {}


def hom_basis(m: Bimodule, n: Bimodule):
    """Basis matrices of bimodule maps m -> n (same algebra pair required)."""
    key = (id(m), id(n))
    hit = _HOM_CACHE.get(key)
    if hit is not None:
        return hit[0]
    if m.left is not n.left or m.right is not n.right:
        raise AlgebraMismatch("hom between bimodules over different pairs")
    gm = m.env_generator_actions()
    gn = n.env_generator_actions()
    nm, nn = m.dim, n.dim
    ech = Echelon(nn * nm)

    def unk(i, j):
        return i * nm + j

    for am, an in zip(gm, gn):
        for i in range(nn):
            arow = an.row(i)
            for j in range(nm):
                row = {}
                for k in range(nm):
                    v = am[k, j]
                    if v:
                        row[unk(i, k)] = row.get(unk(i, k), Q0) + v
                for k, v in enumerate(arow):
                    if v:
                        row[unk(k, j)] = row.get(unk(k, j), Q0) - v
                if row:
                    ech.insert(row)
    basis = [Matrix(nn, nm, col) for col in
             (ech.nullspace_columns() if nn * nm else [])]
    solver = SpanSolver(nn * nm)
    for b in basis:
        solver.add({i: x for i, x in enumerate(b.data) if x})
    _HOM_CACHE[key] = (basis, solver, m, n)
    return basis


def hom_coordinates(m: Bimodule, n: Bimodule, mat: Matrix):
    """Coordinates of a map in the hom_basis, or None if not a module map."""
    hom_basis(m, n)
    solver = _HOM_CACHE[(id(m), id(n))][1]
    return solver.express({i: x for i, x in enumerate(mat.data) if x})


# -- tensor over the middle algebra, with derived projectivity data -----------


def _kron_vec(u, v):
    return tuple(x * y for x in u for y in v)


def _apply_left_factor(a: Matrix, vec, n):
    """(A (x) I_n) applied to a vector indexed (i, j) -> i*n + j."""
    m = a.cols
    out = [Q0] * (a.rows * n)
    for idx, x in enumerate(vec):
        if x:
            i, j = divmod(idx, n)
            for k in range(a.rows):
                c = a[k, i]
                if c:
                    out[k * n + j] += c * x
    return tuple(out)


def _apply_right_factor(b: Matrix, vec, n):
    """(I (x) B) applied to a vector indexed (i, j) -> i*n + j, n = b.cols."""
    out = [Q0] * ((len(vec) // n) * b.rows)
    for idx, x in enumerate(vec):
        if x:
            i, j = divmod(idx, n)
            for k in range(b.rows):
                c = b[k, j]
                if c:
                    out[i * b.rows + k] += c * x
    return tuple(out)


def _piece_factor_indices(m: Bimodule, uidx):
    return divmod(uidx, len(m.right.idempotents))


def bimodule_tensor(m: Bimodule, n: Bimodule, label=None):
    """(T, proj, sect) realizing T = m (x)_B n as a quotient of m (x) n.

    Raw index (i, j) -> i * dim n + j.  T inherits a lazy projectivity
    witness assembled from the witnesses of the factors.
    """
    if m.right is not n.left:
        raise AlgebraMismatch(
            f"tensor middle mismatch: {m.right.label} vs {n.left.label}")
    b = m.right
    raw = m.dim * n.dim
    cols = []
    for gi in b.generators():
        rm = m.right_action[gi]
        ln = n.left_action[gi]
        for i in range(m.dim):
            mi = rm.column(i)
            for j in range(n.dim):
                nj = ln.column(j)
                col = [Q0] * raw
                for k, x in enumerate(mi):
                    if x:
                        col[k * n.dim + j] += x
                for l, y in enumerate(nj):
                    if y:
                        col[i * n.dim + l] -= y
                if any(col):
                    cols.append(tuple(col))
    sub = Matrix.from_columns(cols, raw) if cols else Matrix.zero(raw, 0)
    proj, sect = quotient_basis(raw, sub)
    t_dim = proj.rows
    la = []
    for k in range(m.left.dim):
        colsk = []
        for c in range(t_dim):
            v = _apply_left_factor(m.left_action[k], sect.column(c), n.dim)
            colsk.append(proj.apply(v))
        la.append(Matrix.from_columns(colsk, t_dim))
    ra = []
    for l in range(n.right.dim):
        colsl = []
        for c in range(t_dim):
            v = _apply_right_factor(n.right_action[l], sect.column(c), n.dim)
            colsl.append(proj.apply(v))
        ra.append(Matrix.from_columns(colsl, t_dim))
    t = Bimodule(m.left, n.right, t_dim, la, ra,
                 label=label or f"{m.label}(x){n.label}", check=False)
    t._proj = lambda: _tensor_proj_data(t, m, n, proj, sect)
    return t, proj, sect


def _tensor_proj_data(t, m, n, proj, sect):
    pdm = proj_data(m)
    pdn = proj_data(n)
    if pdm is None or pdn is None:
        from .errors import NotPerfect
        raise NotPerfect("tensor factor without projectivity witness")
    b = m.right
    env_t = t.env
    n_right_fam = len(n.right.idempotents)
    # per-factor piece data in enveloping coordinates
    sm_blocks, sn_blocks = [], []
    for (uidx, gen, basis, _), (lo, hi) in zip(pdm.cover.pieces,
                                               pdm.cover.piece_ranges()):
        rows = [pdm.section.row(r) for r in range(lo, hi)]
        block = Matrix.from_rows(rows) if rows else Matrix.zero(0, m.dim)
        sm_blocks.append((uidx, gen, basis * block))
    for (vidx, gen, basis, _), (lo, hi) in zip(pdn.cover.pieces,
                                               pdn.cover.piece_ranges()):
        rows = [pdn.section.row(r) for r in range(lo, hi)]
        block = Matrix.from_rows(rows) if rows else Matrix.zero(0, n.dim)
        sn_blocks.append((vidx, gen, basis * block))
    # middle subspaces u_b B v_b and the new pieces
    pieces = []
    piece_meta = []  # (p, q, W solver, W basis, it)
    for p, (uidx, g_p, s_p) in enumerate(sm_blocks):
        ic, ib = _piece_factor_indices(m, uidx)
        u_b = m.right.idempotents[ib]
        for q, (vidx, h_q, s_q) in enumerate(sn_blocks):
            jb, ja = _piece_factor_indices(n, vidx)
            v_b = n.left.idempotents[jb]
            wcols, wsolver = [], SpanSolver(b.dim)
            ech = Echelon(b.dim)
            for k in range(b.dim):
                w = b.multiply(b.multiply(u_b, _unit_vector(b.dim, k)), v_b)
                row = {i: x for i, x in enumerate(w) if x}
                if row and ech.insert(_clear_denominators(dict(row))) is not None:
                    wcols.append(w)
                    wsolver.add(row)
            if not wcols:
                continue
            it = ic * n_right_fam + ja
            vb_hq = n.act_left(v_b).apply(h_q)
            for w in wcols:
                gp_w = m.act_right(w).apply(g_p)
                gen_t = proj.apply(_kron_vec_pair(gp_w, vb_hq))
                basis_t, solver_t = env_t.left_piece(it)
                pieces.append((it, tuple(gen_t), basis_t, solver_t))
            piece_meta.append((p, q, wsolver, len(wcols), it))
    # evaluation matrix
    ev_cols = []
    for it, gen_t, basis_t, _ in pieces:
        rt_cache = {}
        for c in range(basis_t.cols):
            z = basis_t.column(c)
            acc = [Q0] * t.dim
            for idx, coeff in enumerate(z):
                if coeff:
                    k, l = divmod(idx, t.right.dim)
                    if l not in rt_cache:
                        rt_cache[l] = t.right_action[l].apply(gen_t)
                    v = t.left_action[k].apply(rt_cache[l])
                    for r, x in enumerate(v):
                        if x:
                            acc[r] += coeff * x
            ev_cols.append(tuple(acc))
    ev = Matrix.from_columns(ev_cols, t.dim) if ev_cols else Matrix.zero(t.dim, 0)
    cover = Cover(t, pieces, ev)
    # section: walk raw tensors through s_n, absorb the middle, then s_m
    dim_f = ev.cols
    ranges = cover.piece_ranges()
    s_cols = []
    n_adim = n.right.dim
    m_bdim = m.right.dim
    sr_cache = {}
    for tau in range(t.dim):
        rawv = sect.column(tau)
        etvecs = {}
        accum = {}
        for idx, cval in enumerate(rawv):
            if not cval:
                continue
            i, j = divmod(idx, n.dim)
            for q, (vidx, h_q, s_q) in enumerate(sn_blocks):
                zeta = s_q.column(j)
                for en_idx, zval in enumerate(zeta):
                    if not zval:
                        continue
                    k, l = divmod(en_idx, n_adim)
                    for p, (uidx, g_p, s_p) in enumerate(sm_blocks):
                        key = (p, k)
                        if key not in sr_cache:
                            sr_cache[key] = s_p * m.right_action[k]
                        xi = sr_cache[key].column(i)
                        for em_idx, xval in enumerate(xi):
                            if not xval:
                                continue
                            kp, lp = divmod(em_idx, m_bdim)
                            akey = (p, q, kp, l)
                            wv = accum.setdefault(akey, [Q0] * m_bdim)
                            wv[lp] += cval * zval * xval
        piece_no = {}
        counter = 0
        for p, q, wsolver, wcount, it in piece_meta:
            piece_no[(p, q)] = (counter, wsolver, wcount, it)
            counter += wcount
        for (p, q, kp, l), wv in accum.items():
            if not any(wv):
                continue
            base, wsolver, wcount, it = piece_no[(p, q)]
            coeffs = wsolver.express({i: x for i, x in enumerate(wv) if x})
            assert coeffs is not None, "tensor middle fell outside u.B.v"
            for bi, gamma in enumerate(coeffs):
                if gamma:
                    et = etvecs.setdefault(base + bi, {})
                    eidx = kp * n_adim + l
                    et[eidx] = et.get(eidx, Q0) + gamma
        col = [Q0] * dim_f
        for pc_idx, et in etvecs.items():
            it, gen_t, basis_t, solver_t = pieces[pc_idx]
            coords = solver_t.express(et)
            assert coords is not None, "tensor section fell outside the piece"
            lo, hi = ranges[pc_idx]
            for r, x in enumerate(coords):
                col[lo + r] = x
        s_cols.append(tuple(col))
    section = Matrix.from_columns(s_cols, dim_f) if dim_f else Matrix.zero(0, t.dim)
    assert ev * section == Matrix.identity(t.dim), "tensor witness failed"
    return ProjData(cover, section)


def _kron_vec_pair(u, v):
    return tuple(x * y for x in u for y in v)


# -- duals ---------------------------------------------------------------------


def swap_env_coords(vec, dl, dr):
    """Reindex L (x) R^op coordinates (i, j) to R (x) L^op coordinates (j, i)."""
    out = [Q0] * (dl * dr)
    for idx, x in enumerate(vec):
        if x:
            i, j = divmod(idx, dr)
            out[j * dl + i] = x
    return tuple(out)


class DualData:
    """Basis functionals of Hom_env(M, env) and converters."""

    def __init__(self, functionals, solver, source):
        self.functionals = functionals  # list of Matrix (dim env x dim m)
        self.solver = solver
        self.source = source

    def express(self, fmat: Matrix):
        return self.solver.express({i: x for i, x in enumerate(fmat.data) if x})

    def functional_of(self, coords):
        acc = None
        for c, f in zip(coords, self.functionals):
            if c:
                acc = f.scale(c) if acc is None else acc + f.scale(c)
        if acc is None:
            e = self.source.env.dim
            return Matrix.zero(e, self.source.dim)
        return acc


def bimodule_dual(m: Bimodule, label=None):
    """(m_dual, dual_data): Hom_env(m, env) as a (right, left)-bimodule."""
    pd = proj_data(m)
    if pd is None:
        from .errors import NotPerfect
        raise NotPerfect(f"{m.label} has no projectivity witness")
    env = m.env
    dl, dr = m.left.dim, m.right.dim
    ranges = pd.cover.piece_ranges()
    s_blocks = []
    for (uidx, gen, basis, _), (lo, hi) in zip(pd.cover.pieces, ranges):
        rows = [pd.section.row(r) for r in range(lo, hi)]
        block = Matrix.from_rows(rows) if rows else Matrix.zero(0, m.dim)
        s_blocks.append((uidx, gen, basis * block))
    candidates = []
    for uidx, gen, s_p in s_blocks:
        rbasis, _ = env.right_piece(uidx)
        for c in range(rbasis.cols):
            w = rbasis.column(c)
            fmat = env.right_mult_matrix(w) * s_p
            candidates.append(fmat)
    ech = Echelon(env.dim * m.dim)
    basis_f = []
    solver = SpanSolver(env.dim * m.dim)
    for fmat in candidates:
        row = {i: x for i, x in enumerate(fmat.data) if x}
        if row and ech.insert(_clear_denominators(dict(row))) is not None:
            basis_f.append(fmat)
            solver.add(row)
    dim_d = len(basis_f)
    dd = DualData(basis_f, solver, m)
    # actions: (r . f . l)(x) = f(x) . (l (x) r)
    la, ra = [], []
    for ridx in range(m.right.dim):
        e = _kron_vec(m.left.unit, _unit_vector(m.right.dim, ridx))
        rm = env.right_mult_matrix(e)
        cols = [dd.express(rm * f) for f in basis_f]
        la.append(Matrix.from_columns([tuple(c) for c in cols], dim_d))
    for lidx in range(m.left.dim):
        e = _kron_vec(_unit_vector(m.left.dim, lidx), m.right.unit)
        rm = env.right_mult_matrix(e)
        cols = [dd.express(rm * f) for f in basis_f]
        ra.append(Matrix.from_columns([tuple(c) for c in cols], dim_d))
    md = Bimodule(m.right, m.left, dim_d, la, ra,
                  label=label or f"{m.label}^v", check=False)
    md._dual_data = dd
    md._proj = lambda: _dual_proj_data(md, m, dd, s_blocks)
    return md, dd


def _dual_proj_data(md, m, dd, s_blocks):
    env = m.env
    envd = md.env
    dl, dr = m.left.dim, m.right.dim
    n_left_fam = len(m.left.idempotents)
    pieces = []
    for uidx, gen, s_p in s_blocks:
        il, ir = _piece_factor_indices(m, uidx)
        itd = ir * n_left_fam + il
        basis_d, solver_d = envd.left_piece(itd)
        f0 = dd.express(s_p)
        assert f0 is not None
        pieces.append((itd, tuple(f0), basis_d, solver_d))
    ev_cols = []
    for (itd, f0, basis_d, _), (uidx, gen, s_p) in zip(pieces, s_blocks):
        for c in range(basis_d.cols):
            zp = basis_d.column(c)
            z = swap_env_coords(zp, dr, dl)  # back to L (x) R^op coords
            fmat = env.right_mult_matrix(z) * s_p
            col = dd.express(fmat)
            assert col is not None
            ev_cols.append(tuple(col))
    ev = Matrix.from_columns(ev_cols, md.dim) if ev_cols else Matrix.zero(md.dim, 0)
    cover = Cover(md, pieces, ev)
    ranges = cover.piece_ranges()
    s_cols = []
    for fidx in range(md.dim):
        f = dd.functionals[fidx]
        col = [Q0] * ev.cols
        for (itd, f0, basis_d, solver_d), (uidx, gen, s_p), (lo, hi) in zip(
                pieces, s_blocks, ranges):
            z = f.apply(gen)
            zp = swap_env_coords(z, dl, dr)
            coords = solver_d.express({i: x for i, x in enumerate(zp) if x})
            assert coords is not None, "dual section fell outside the piece"
            for r, x in enumerate(coords):
                col[lo + r] = x
        s_cols.append(tuple(col))
    section = Matrix.from_columns(s_cols, ev.cols) if ev.cols else Matrix.zero(0, md.dim)
    assert ev * section == Matrix.identity(md.dim), "dual witness failed"
    return ProjData(cover, section)


def double_dual_comparison(m: Bimodule, md: Bimodule, mdd: Bimodule):
    """Matrix of the canonical map m -> m^vv: x |-> (f |-> swap(f(x)))."""
    dd = md._dual_data
    ddd = mdd._dual_data
    dl, dr = m.left.dim, m.right.dim
    cols = []
    for i in range(m.dim):
        fmat_cols = []
        for f in dd.functionals:
            val = f.column(i)
            fmat_cols.append(swap_env_coords(val, dl, dr))
        fmat = Matrix.from_columns(fmat_cols, md.env.dim)
        coords = ddd.express(fmat)
        assert coords is not None, "double dual comparison escaped the basis"
        cols.append(tuple(coords))
    return Matrix.from_columns(cols, mdd.dim)


def left_coordinates(m: Bimodule):
    """Pairs (y, g): x = sum g(x).y with g: m -> left-algebra left-linear."""
    pd = proj_data(m)
    if pd is None:
        from .errors import NotPerfect
        raise NotPerfect(f"{m.label} has no projectivity witness")
    dl, dr = m.left.dim, m.right.dim
    out = []
    for (gen, phi) in pd.coordinates():
        for l in range(dr):
            y = m.right_action[l].apply(gen)
            rows = [phi.row(k * dr + l) for k in range(dl)]
            g = Matrix.from_rows(rows)
            if any(y) or not g.is_zero():
                out.append((y, g))
    return out


def right_coordinates(m: Bimodule):
    """Pairs (y, g): x = sum y.g(x) with g: m -> right-algebra right-linear."""
    pd = proj_data(m)
    if pd is None:
        from .errors import NotPerfect
        raise NotPerfect(f"{m.label} has no projectivity witness")
    dl, dr = m.left.dim, m.right.dim
    out = []
    for (gen, phi) in pd.coordinates():
        for k in range(dl):
            y = m.left_action[k].apply(gen)
            rows = [phi.row(k * dr + l) for l in range(dr)]
            g = Matrix.from_rows(rows)
            if any(y) or not g.is_zero():
                out.append((y, g))
    return out


# -- center and trace quotient ------------------------------------------------


def center(a: Algebra):
    """Basis columns of Z(A) = {x : xy = yx for all y}."""
    rows = []
    for i in range(a.dim):
        diff = a.left_mult[i] - a.right_mult[i]
        for r in range(a.dim):
            rows.append(diff.row(r))
    if not rows:
        return Matrix.identity(a.dim)
    stacked = Matrix.from_rows(rows)
    return nullspace_basis(stacked)


def trace_quotient(a: Algebra):
    """(projector, section) for A / [A, A]."""
    cols = []
    for i in range(a.dim):
        for j in range(a.dim):
            ei = _unit_vector(a.dim, i)
            ej = _unit_vector(a.dim, j)
            xy = a.multiply(ei, ej)
            yx = a.multiply(ej, ei)
            cols.append(tuple(x - y for x, y in zip(xy, yx)))
    sub = Matrix.from_columns(cols, a.dim)
    return quotient_basis(a.dim, sub)
