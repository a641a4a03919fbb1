"""Bounded complexes of bimodules, with the engine's single sign table.

SIGN TABLE (all other modules cite this, none re-derives signs):

  T1  differential on a tensor:    d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy
  T2  tensor of maps:              (f (x) g)(x (x) y) = (-1)^(|g| |x|) f(x) (x) g(y)
  H1  hom differential:            (D f) = d_target . f - (-1)^|f| f . d_source
  H2  degree-k chain map:          d . f = (-1)^k f . d   (cycles of H1)
  H3  nullhomotopy of such f:      f = d . h + (-1)^k h . d  for degree-(k-1) h
  C1  cone(f: C -> D)_n = C_{n+1} (+) D_n,  d(c, e) = (-d c, f(c) + d e)
  S1  shift: (C[k])_n = C_{n+k},  d_{C[k]} = (-1)^k d_C
  E1  evaluation against the dual pairs degree i with degree -i and
      carries the parity sign (-1)^i.

Cohomological indexing throughout; homological degree i is read from
cohomological degree -i.
"""

from __future__ import annotations

from .errors import AlgebraMismatch, NotPerfect
from .linalg import (Echelon, Matrix, Q0, Q1, SpanSolver,
                     _clear_denominators, nullspace_basis, quotient_basis)
from . import algebras as alg


class Complex:
    """Bounded complex of bimodules over a fixed algebra pair."""

    def __init__(self, terms, differentials, left, right, check=True):
        self.terms = dict(terms)                  # degree -> Bimodule
        self.diff = {n: d for n, d in differentials.items()
                     if n in self.terms and (n + 1) in self.terms}
        self.left = left
        self.right = right
        for n, t in self.terms.items():
            if t.left is not left or t.right is not right:
                raise AlgebraMismatch("complex term over wrong algebra pair")
        if check:
            self._check()

    def _check(self):
        for n, d in self.diff.items():
            if d.cols != self.terms[n].dim or d.rows != self.terms[n + 1].dim:
                raise ValueError(f"differential shape wrong at degree {n}")
            # module-linearity against generator actions
            src, tgt = self.terms[n], self.terms[n + 1]
            for gs, gt in zip(src.env_generator_actions(), tgt.env_generator_actions()):
                if d * gs != gt * d:
                    raise ValueError(f"differential at degree {n} is not a module map")
        for n in self.diff:
            if (n + 1) in self.diff:
                if not (self.diff[n + 1] * self.diff[n]).is_zero():
                    raise ValueError(f"d.d != 0 at degree {n}")

    def degrees(self):
        return sorted(self.terms)

    def dim(self, n):
        t = self.terms.get(n)
        return t.dim if t else 0

    def term(self, n):
        return self.terms.get(n)

    def differential(self, n):
        d = self.diff.get(n)
        if d is not None:
            return d
        return Matrix.zero(self.dim(n + 1), self.dim(n))

    def total_dim(self):
        return sum(t.dim for t in self.terms.values())

    def euler_characteristic(self):
        return sum((-1) ** (n % 2) * t.dim for n, t in self.terms.items())

    def __repr__(self):
        parts = ", ".join(f"{n}:{t.dim}" for n, t in sorted(self.terms.items()))
        return f"Complex({{{parts}}})"


def single_term_complex(m, degree=0, check=False):
    return Complex({degree: m}, {}, m.left, m.right, check=check)


class ChainMap:
    """Degree-k map of complexes; components[n]: source_n -> target_{n+k}."""

    def __init__(self, source, target, degree, components, check=True):
        self.source = source
        self.target = target
        self.degree = degree
        self.components = {n: m for n, m in components.items()
                           if m.rows and m.cols}
        if check:
            self._check()

    def component(self, n):
        c = self.components.get(n)
        if c is not None:
            return c
        return Matrix.zero(self.target.dim(n + self.degree), self.source.dim(n))

    def _check(self):
        k = self.degree
        sgn = Q1 if k % 2 == 0 else -Q1
        for n in self.source.degrees():
            lhs = self.target.differential(n + k) * self.component(n)
            rhs = (self.component(n + 1) * self.source.differential(n)).scale(sgn)
            if lhs != rhs:
                raise ValueError(f"not a chain map at degree {n}")
        for n, c in self.components.items():
            src = self.source.term(n)
            tgt = self.target.term(n + k)
            if src is None or tgt is None:
                raise ValueError("component outside both complexes")
            for gs, gt in zip(src.env_generator_actions(), tgt.env_generator_actions()):
                if c * gs != gt * c:
                    raise ValueError(f"component at degree {n} is not a module map")

    def is_zero(self):
        return all(c.is_zero() for c in self.components.values())

    def compose(self, other):
        """self . other (other applied first)."""
        if other.target is not self.source:
            raise AlgebraMismatch("chain maps not composable")
        comps = {}
        for n in other.source.degrees():
            m = self.component(n + other.degree) * other.component(n)
            if not m.is_zero():
                comps[n] = m
        return ChainMap(other.source, self.target, self.degree + other.degree,
                        comps, check=False)

    def add(self, other):
        if (other.source is not self.source or other.target is not self.target
                or other.degree != self.degree):
            raise AlgebraMismatch("chain map addition shape mismatch")
        comps = {}
        for n in set(self.components) | set(other.components):
            comps[n] = self.component(n) + other.component(n)
        return ChainMap(self.source, self.target, self.degree, comps, check=False)

    def scale(self, c):
        return ChainMap(self.source, self.target, self.degree,
                        {n: m.scale(c) for n, m in self.components.items()},
                        check=False)

    @staticmethod
    def identity(c):
        return ChainMap(c, c, 0, {n: Matrix.identity(c.dim(n)) for n in c.degrees()},
                        check=False)


# -- homology -----------------------------------------------------------------


def homology(c: Complex, n: int):
    """(dimension, cycle_section, class_projector) at degree n.

    cycle_section: H -> C_n lands in cycles; class_projector: C_n -> H kills
    boundaries and a fixed complement of the cycles; projector . section = id.
    """
    dn = c.differential(n)
    dprev = c.differential(n - 1)
    z = nullspace_basis(dn)                      # C_n columns spanning ker
    # boundaries inside kernel coordinates
    zsolver = SpanSolver(c.dim(n))
    for j in range(z.cols):
        zsolver.add({i: z[i, j] for i in range(z.rows) if z[i, j]})
    bcols = []
    for j in range(dprev.cols):
        col = dprev.column(j)
        coeffs = zsolver.express({i: x for i, x in enumerate(col) if x})
        if coeffs is None:
            raise ValueError("boundary not a cycle; complex is corrupt")
        bcols.append(tuple(coeffs))
    bmat = Matrix.from_columns(bcols, z.cols) if bcols else Matrix.zero(z.cols, 0)
    proj_q, sect_q = quotient_basis(z.cols, bmat)
    section = z * sect_q
    # projector on all of C_n: write each unit vector over (kernel basis +
    # a complement of the kernel); the complement part projects to 0
    ech = Echelon(c.dim(n))
    for j in range(z.cols):
        ech.insert(_clear_denominators(
            {i: z[i, j] for i in range(z.rows) if z[i, j]}))
    comp_rows = [i for i in range(c.dim(n)) if ech.insert({i: Q1}) is not None]
    solver = SpanSolver(c.dim(n))
    for j in range(z.cols):
        solver.add({i: z[i, j] for i in range(z.rows) if z[i, j]})
    for i in comp_rows:
        solver.add({i: Q1})
    proj_cols = []
    for i in range(c.dim(n)):
        coeffs = solver.express({i: Q1})
        kercoords = tuple(coeffs[:z.cols])
        proj_cols.append(proj_q.apply(kercoords))
    projector = Matrix.from_columns(proj_cols, proj_q.rows)
    return proj_q.rows, section, projector


def homology_dims(c: Complex):
    return {n: homology(c, n)[0] for n in c.degrees()}


# -- shift, sum, cone ----------------------------------------------------------


def shift(c: Complex, k: int):
    sgn = Q1 if k % 2 == 0 else -Q1
    terms = {n - k: t for n, t in c.terms.items()}
    diffs = {n - k: d.scale(sgn) for n, d in c.diff.items()}
    return Complex(terms, diffs, c.left, c.right, check=False)


def shift_map(f: ChainMap, k: int, shifted_source, shifted_target):
    comps = {n - k: m for n, m in f.components.items()}
    return ChainMap(shifted_source, shifted_target, f.degree, comps, check=False)


def direct_sum(c: Complex, d: Complex):
    if c.left is not d.left or c.right is not d.right:
        raise AlgebraMismatch("direct sum over different algebra pairs")
    terms = {}
    for n in set(c.terms) | set(d.terms):
        terms[n] = _sum_bimodule(c.term(n), d.term(n))
    diffs = {}
    for n in terms:
        if (n + 1) in terms:
            diffs[n] = _sum_matrix(c.differential(n), d.differential(n))
    return Complex(terms, diffs, c.left, c.right, check=False)


def _sum_bimodule(a, b):
    if a is None:
        return b
    if b is None:
        return a
    la = [alg._block_diag([x, y]) for x, y in zip(a.left_action, b.left_action)]
    ra = [alg._block_diag([x, y]) for x, y in zip(a.right_action, b.right_action)]
    ab = alg.Bimodule(a.left, a.right, a.dim + b.dim, la, ra,
                      label=f"{a.label}(+){b.label}", check=False)
    ab._proj = lambda: alg.sum_proj_data(ab, a, b)
    return ab


def _sum_matrix(x, y):
    return alg._block_diag([x, y])


def cone(f: ChainMap):
    """cone(f)_n = C_{n+1} (+) D_n with d(c, e) = (-dc, f(c) + de)."""
    if f.degree != 0:
        raise ValueError("cone needs a degree-0 chain map")
    c, d = f.source, f.target
    terms = {}
    lo = min(c.degrees() + d.degrees())
    hi = max(c.degrees() + d.degrees())
    for n in range(lo - 1, hi + 1):
        t = _sum_bimodule(c.term(n + 1), d.term(n))
        if t is not None and t.dim:
            terms[n] = t
    diffs = {}
    for n in terms:
        if (n + 1) not in terms:
            continue
        c1, d0 = c.dim(n + 1), d.dim(n)
        c2, d1 = c.dim(n + 2), d.dim(n + 1)
        rows = c2 + d1
        cols = c1 + d0
        m = [[Q0] * cols for _ in range(rows)]
        dc = c.differential(n + 1)
        for i in range(c2):
            for j in range(c1):
                if dc[i, j]:
                    m[i][j] = -dc[i, j]
        fc = f.component(n + 1)
        for i in range(d1):
            for j in range(c1):
                if fc[i, j]:
                    m[c2 + i][j] = fc[i, j]
        dd = d.differential(n)
        for i in range(d1):
            for j in range(d0):
                if dd[i, j]:
                    m[c2 + i][c1 + j] = dd[i, j]
        diffs[n] = Matrix.from_rows(m)
    return Complex(terms, diffs, c.left, c.right, check=False)


# -- tensor of complexes ---------------------------------------------------------


_TERM_TENSOR_CACHE = {}


def term_tensor(m, n):
    key = (id(m), id(n))
    hit = _TERM_TENSOR_CACHE.get(key)
    if hit is None:
        t, proj, sect = alg.bimodule_tensor(m, n)
        hit = (t, proj, sect, m, n)
        _TERM_TENSOR_CACHE[key] = hit
    return hit[0], hit[1], hit[2]


_TC_CACHE = {}


def tc_of(c, d):
    """Cached TensorComplex; object identity matters to every consumer."""
    key = (id(c), id(d))
    hit = _TC_CACHE.get(key)
    if hit is None:
        hit = (TensorComplex(c, d), c, d)
        _TC_CACHE[key] = hit
    return hit[0]


class TensorComplex:
    """Total complex of C (x)_B D with per-degree block data.

    blocks[n] = list of (i, j, offset, size); block (i, j) is the term
    tensor C_i (x)_B D_j, with quotient data available via term_tensor.
    Signs follow (T1).
    """

    def __init__(self, c: Complex, d: Complex):
        if c.right is not d.left:
            raise AlgebraMismatch("tensor of complexes over mismatched middle")
        self.c = c
        self.d = d
        self.blocks = {}
        terms = {}
        if not c.terms or not d.terms:
            self.complex = Complex({}, {}, c.left, d.right, check=False)
            return
        for n in range(min(c.degrees()) + min(d.degrees()),
                       max(c.degrees()) + max(d.degrees()) + 1):
            blocklist = []
            off = 0
            summand = None
            for i in c.degrees():
                j = n - i
                if d.dim(j) == 0 or c.dim(i) == 0:
                    continue
                t, _, _ = term_tensor(c.term(i), d.term(j))
                if t.dim == 0:
                    continue
                blocklist.append((i, j, off, t.dim))
                off += t.dim
                summand = t if summand is None else _sum_bimodule(summand, t)
            if blocklist:
                self.blocks[n] = blocklist
                terms[n] = summand
        diffs = {}
        for n in self.blocks:
            if (n + 1) not in self.blocks:
                continue
            rows = terms[n + 1].dim
            cols = terms[n].dim
            data = [[Q0] * cols for _ in range(rows)]
            for (i, j, off, size) in self.blocks[n]:
                t, proj, sect = term_tensor(self.c.term(i), self.d.term(j))
                # d_C part into block (i+1, j)
                tgt = self._find_block(n + 1, i + 1, j)
                if tgt is not None and self.c.dim(i + 1):
                    t2, proj2, _ = term_tensor(self.c.term(i + 1), self.d.term(j))
                    dc = self.c.differential(i)
                    for col in range(size):
                        v = alg._apply_left_factor(dc, sect.column(col), self.d.dim(j))
                        w = proj2.apply(v)
                        for r, x in enumerate(w):
                            if x:
                                data[tgt + r][off + col] += x
                # d_D part into block (i, j+1), sign (-1)^i
                tgt = self._find_block(n + 1, i, j + 1)
                if tgt is not None and self.d.dim(j + 1):
                    t3, proj3, _ = term_tensor(self.c.term(i), self.d.term(j + 1))
                    dd = self.d.differential(j)
                    sgn = Q1 if i % 2 == 0 else -Q1
                    for col in range(size):
                        v = alg._apply_right_factor(dd, sect.column(col), self.d.dim(j))
                        w = proj3.apply(v)
                        for r, x in enumerate(w):
                            if x:
                                data[tgt + r][off + col] += sgn * x
            diffs[n] = Matrix.from_rows([tuple(r) for r in data])
        self.complex = Complex(terms, diffs, c.left, d.right, check=False)

    def _find_block(self, n, i, j):
        for (bi, bj, off, size) in self.blocks.get(n, []):
            if bi == i and bj == j:
                return off
        return None


def tensor_over(c: Complex, d: Complex):
    """The convolution total complex (strictly perfect in, strictly perfect out)."""
    return TensorComplex(c, d).complex


def tensor_map(tc_src: TensorComplex, tc_tgt: TensorComplex, f: ChainMap, g: ChainMap):
    """(f (x) g) between tensor complexes, with the (T2) sign.

    f: tc_src.c -> tc_tgt.c and g: tc_src.d -> tc_tgt.d.
    """
    kf, kg = f.degree, g.degree
    comps = {}
    for n, blocklist in tc_src.blocks.items():
        rows = tc_tgt.complex.dim(n + kf + kg)
        cols = tc_src.complex.dim(n)
        if rows == 0 or cols == 0:
            continue
        data = [[Q0] * cols for _ in range(rows)]
        wrote = False
        for (i, j, off, size) in blocklist:
            tgt_off = tc_tgt._find_block(n + kf + kg, i + kf, j + kg)
            if tgt_off is None:
                continue
            fi = f.component(i)
            gj = g.component(j)
            if fi.rows == 0 or gj.rows == 0:
                continue
            _, proj_s, sect_s = term_tensor(tc_src.c.term(i), tc_src.d.term(j))
            _, proj_t, _ = term_tensor(tc_tgt.c.term(i + kf), tc_tgt.d.term(j + kg))
            sgn = Q1 if (kg * i) % 2 == 0 else -Q1
            for col in range(size):
                v = sect_s.column(col)
                v = alg._apply_left_factor(fi, v, tc_src.d.dim(j))
                v = alg._apply_right_factor(gj, v, tc_src.d.dim(j))
                w = proj_t.apply(v)
                for r, x in enumerate(w):
                    if x:
                        data[tgt_off + r][off + col] += sgn * x
                        wrote = True
        if wrote:
            comps[n] = Matrix.from_rows([tuple(r) for r in data])
    return ChainMap(tc_src.complex, tc_tgt.complex, kf + kg, comps, check=False)


# -- hom complexes --------------------------------------------------------------


class HomComplex:
    """Hom-complex between bimodule complexes over their shared context.

    Degree-n piece has a basis of blocks (i, basis element of Hom(C_i, D_{i+n}));
    realized as a Complex of plain vector spaces, with converters between
    coordinate vectors and ChainMap-shaped component dicts.
    """

    def __init__(self, source: Complex, target: Complex):
        if source.left is not target.left or source.right is not target.right:
            raise AlgebraMismatch("hom complex over different algebra pairs")
        for n in source.degrees():
            if not alg.is_projective(source.term(n)):
                raise NotPerfect(
                    f"hom source term in degree {n} is not projective")
        self.source = source
        self.target = target
        self.blocks = {}      # n -> list of (i, [hom basis matrices])
        self.offsets = {}     # (n, i) -> offset of block in degree n
        self._dims = {}
        for n in range(min(self._nrange()), max(self._nrange()) + 1):
            blocks = []
            off = 0
            for i in source.degrees():
                j = i + n
                if target.dim(j) == 0 or source.dim(i) == 0:
                    continue
                basis = alg.hom_basis(source.term(i), target.term(j))
                if basis:
                    self.offsets[(n, i)] = off
                    blocks.append((i, basis))
                    off += len(basis)
            if blocks:
                self.blocks[n] = blocks
                self._dims[n] = off
        terms = {n: alg.point_bimodule(d, label=f"hom^{n}")
                 for n, d in self._dims.items()}
        diffs = {}
        for n in sorted(self._dims):
            if (n + 1) not in self._dims:
                continue
            cols = []
            for i, basis in self.blocks[n]:
                for b in basis:
                    df = self._differential_of({i: b}, n)
                    cols.append(self.coordinates(df, n + 1))
            diffs[n] = Matrix.from_columns(cols, self._dims[n + 1])
        pt = alg.point_algebra()
        self.complex = Complex(terms, diffs, pt, pt, check=False)

    def _nrange(self):
        s, t = self.source, self.target
        lo = min(t.degrees()) - max(s.degrees())
        hi = max(t.degrees()) - min(s.degrees())
        return (lo, hi)

    def _differential_of(self, comps, n):
        """(H1): D(f) = d_target . f - (-1)^n f . d_source, as components.

        The degree-i output block is d . f_i - sgn f_{i+1} . d.
        """
        sgn = Q1 if n % 2 == 0 else -Q1
        out = {}
        for i in set(comps) | {d - 1 for d in comps}:
            total = None
            if i in comps:
                m = self.target.differential(i + n) * comps[i]
                if not m.is_zero():
                    total = m
            if (i + 1) in comps:
                m2 = (comps[i + 1] * self.source.differential(i)).scale(sgn)
                if not m2.is_zero():
                    total = m2.scale(-1) if total is None else total - m2
            if total is not None and not total.is_zero():
                out[i] = total
        return out

    def coordinates(self, comps, n):
        """Coordinate vector of a block-map dict at hom-degree n."""
        dim = self._dims.get(n, 0)
        vec = [Q0] * dim
        for i, m in comps.items():
            if m.is_zero():
                continue
            key = (n, i)
            if key not in self.offsets:
                raise ValueError("map has a component outside the hom complex")
            coeffs = alg.hom_coordinates(self.source.term(i),
                                         self.target.term(i + n), m)
            if coeffs is None:
                raise ValueError("component is not a module map")
            off = self.offsets[key]
            for k, x in enumerate(coeffs):
                vec[off + k] = x
        return tuple(vec)

    def components_from(self, vec, n):
        comps = {}
        for i, basis in self.blocks.get(n, []):
            off = self.offsets[(n, i)]
            m = Matrix.zero(self.target.dim(i + n), self.source.dim(i))
            for k, b in enumerate(basis):
                c = vec[off + k]
                if c:
                    m = m + b.scale(c)
            if not m.is_zero():
                comps[i] = m
        return comps

    def chain_map_from(self, vec, n):
        return ChainMap(self.source, self.target, n,
                        self.components_from(vec, n), check=False)


def hom_complex(c: Complex, d: Complex):
    """Hom complex; degreewise hom computes derived hom because the source
    is required to have projective terms."""
    return HomComplex(c, d)


# -- nullhomotopy (2-morphism equality) -----------------------------------------


def is_nullhomotopic(f: ChainMap):
    """Decide f = d h + (-1)^k h d for module-linear h of degree k-1 (H3)."""
    h = nullhomotopy(f)
    return h is not None


def nullhomotopy(f: ChainMap):
    """Return components of one homotopy h, or None."""
    k = f.degree
    src, tgt = f.source, f.target
    sgn = Q1 if k % 2 == 0 else -Q1
    # unknowns: coordinates over hom bases of Hom(src_n, tgt_{n+k-1})
    hs = {}
    offset = 0
    for n in src.degrees():
        if tgt.dim(n + k - 1) == 0:
            continue
        basis = alg.hom_basis(src.term(n), tgt.term(n + k - 1))
        if basis:
            hs[n] = (offset, basis)
            offset += len(basis)
    total = offset
    ech = Echelon(total + 1)
    aug = total
    rows = []
    for n in src.degrees():
        tdim, sdim = tgt.dim(n + k), src.dim(n)
        if tdim == 0 and f.component(n).is_zero():
            continue
        # equation at degree n: d h_n + sgn h_{n+1} d = f_n, entrywise
        for a in range(tdim):
            for b in range(sdim):
                row = {}
                if n in hs:
                    off, basis = hs[n]
                    dmat = tgt.differential(n + k - 1)
                    for t, bm in enumerate(basis):
                        v = Q0
                        for l in range(bm.rows):
                            if dmat[a, l] and bm[l, b]:
                                v += dmat[a, l] * bm[l, b]
                        if v:
                            row[off + t] = v
                if (n + 1) in hs:
                    off2, basis2 = hs[n + 1]
                    smat = src.differential(n)
                    for t, bm in enumerate(basis2):
                        v = Q0
                        for l in range(smat.rows):
                            if bm[a, l] and smat[l, b]:
                                v += bm[a, l] * smat[l, b]
                        if v:
                            row[off2 + t] = row.get(off2 + t, Q0) + sgn * v
                rhs = f.component(n)[a, b] if f.source.dim(n) and f.target.dim(n + k) else Q0
                if rhs:
                    row[aug] = rhs
                if row:
                    rows.append(row)
    for row in rows:
        ech.insert(row)
    if aug in ech.pivot_row:
        return None
    coeffs = [Q0] * total
    for p, row in ech.pivot_row.items():
        if p < aug:
            coeffs[p] = row.get(aug, Q0)
    out = {}
    for n, (off, basis) in hs.items():
        m = Matrix.zero(tgt.dim(n + k - 1), src.dim(n))
        for t, bm in enumerate(basis):
            if coeffs[off + t]:
                m = m + bm.scale(coeffs[off + t])
        if not m.is_zero():
            out[n] = m
    return out


def chain_maps_equal(f: ChainMap, g: ChainMap):
    """Equality modulo homotopy: the contract for all 2-morphism equality."""
    return is_nullhomotopic(f.add(g.scale(-1)))


# -- lifting through quasi-isomorphisms -----------------------------------------


class _HomVars:
    """Unknown chain-map components as coordinates over hom bases."""

    def __init__(self, src: Complex, tgt: Complex, degree, start):
        self.blocks = {}
        off = start
        for n in src.degrees():
            if tgt.dim(n + degree) == 0:
                continue
            basis = alg.hom_basis(src.term(n), tgt.term(n + degree))
            if basis:
                self.blocks[n] = (off, basis)
                off += len(basis)
        self.end = off
        self.src = src
        self.tgt = tgt
        self.degree = degree

    def entry_row(self, n, a, b, post=None, pre=None, sign=Q1, row=None):
        """Accumulate coefficients of entry (a, b) of post . f_n . pre."""
        if row is None:
            row = {}
        if n not in self.blocks:
            return row
        off, basis = self.blocks[n]
        for t, bm in enumerate(basis):
            if pre is None and post is None:
                v = bm[a, b]
            elif post is None:
                v = Q0
                for l in range(pre.rows):
                    if bm[a, l] and pre[l, b]:
                        v += bm[a, l] * pre[l, b]
            elif pre is None:
                v = Q0
                for l in range(bm.rows):
                    if post[a, l] and bm[l, b]:
                        v += post[a, l] * bm[l, b]
            else:
                v = Q0
                for l in range(post.cols):
                    if not post[a, l]:
                        continue
                    for l2 in range(pre.rows):
                        if bm[l, l2] and pre[l2, b]:
                            v += post[a, l] * bm[l, l2] * pre[l2, b]
            if v:
                row[off + t] = row.get(off + t, Q0) + sign * v
        return row

    def extract(self, coeffs):
        comps = {}
        for n, (off, basis) in self.blocks.items():
            m = Matrix.zero(self.tgt.dim(n + self.degree), self.src.dim(n))
            for t, bm in enumerate(basis):
                if coeffs[off + t]:
                    m = m + bm.scale(coeffs[off + t])
            if not m.is_zero():
                comps[n] = m
        return comps


def _solve_rows(rows, total):
    ech = Echelon(total + 1)
    for row in rows:
        ech.insert(row)
    if total in ech.pivot_row:
        return None
    coeffs = [Q0] * total
    for p, row in ech.pivot_row.items():
        if p < total:
            coeffs[p] = row.get(total, Q0)
    return coeffs


def lift_through(g: ChainMap, q: ChainMap):
    """f: g.source -> q.source with q . f ~ g (homotopic); None if impossible.

    q must be a degree-0 quasi-isomorphism onto g.target and g.source must
    have projective terms; then the lift exists and its homotopy class is
    unique.
    """
    if g.target is not q.target or q.degree != 0:
        raise AlgebraMismatch("lift shape mismatch")
    c, d, z = g.source, q.source, g.target
    k = g.degree
    fvars = _HomVars(c, d, k, 0)
    hvars = _HomVars(c, z, k - 1, fvars.end)
    total = hvars.end
    aug = total
    sgn_f = Q1 if k % 2 == 0 else -Q1
    sgn_h = Q1 if k % 2 == 0 else -Q1      # (H3) for degree-k defect
    rows = []
    # chain condition on f: d_D f_n - sgn_f f_{n+1} d_C = 0
    for n in c.degrees():
        tdim = d.dim(n + k + 1)
        if tdim == 0 and (n + 1) not in fvars.blocks:
            continue
        for a in range(tdim):
            for b in range(c.dim(n)):
                row = fvars.entry_row(n, a, b, post=d.differential(n + k))
                row = fvars.entry_row(n + 1, a, b, pre=c.differential(n),
                                      sign=-sgn_f, row=row)
                if row:
                    rows.append(row)
    # lift condition: q f_n - g_n = d_Z h_n + sgn_h h_{n+1} d_C
    for n in c.degrees():
        tdim = z.dim(n + k)
        if tdim == 0:
            continue
        gn = g.component(n)
        for a in range(tdim):
            for b in range(c.dim(n)):
                row = fvars.entry_row(n, a, b, post=q.component(n + k))
                row = hvars.entry_row(n, a, b, post=z.differential(n + k - 1),
                                      sign=-Q1, row=row)
                row = hvars.entry_row(n + 1, a, b, pre=c.differential(n),
                                      sign=-sgn_h, row=row)
                rhs = gn[a, b]
                if rhs:
                    row[aug] = rhs
                if row:
                    rows.append(row)
    coeffs = _solve_rows(rows, total)
    if coeffs is None:
        return None
    return ChainMap(c, d, k, fvars.extract(coeffs), check=False)


def colift_through(g: ChainMap, s: ChainMap):
    """f: s.target -> g.target with f . s ~ g; None if impossible.

    Dual to lift_through: s must be a degree-0 quasi-isomorphism out of
    g.source, with everything perfect.
    """
    if g.source is not s.source or s.degree != 0:
        raise AlgebraMismatch("colift shape mismatch")
    z, d, c = g.source, s.target, g.target
    k = g.degree
    fvars = _HomVars(d, c, k, 0)
    hvars = _HomVars(z, c, k - 1, fvars.end)
    total = hvars.end
    aug = total
    sgn_f = Q1 if k % 2 == 0 else -Q1
    sgn_h = Q1 if k % 2 == 0 else -Q1
    rows = []
    for n in d.degrees():
        tdim = c.dim(n + k + 1)
        if tdim == 0 and (n + 1) not in fvars.blocks:
            continue
        for a in range(tdim):
            for b in range(d.dim(n)):
                row = fvars.entry_row(n, a, b, post=c.differential(n + k))
                row = fvars.entry_row(n + 1, a, b, pre=d.differential(n),
                                      sign=-sgn_f, row=row)
                if row:
                    rows.append(row)
    # f s_n - g_n = d_C h_n + sgn h_{n+1} d_Z
    for n in z.degrees():
        tdim = c.dim(n + k)
        if tdim == 0:
            continue
        gn = g.component(n)
        for a in range(tdim):
            for b in range(z.dim(n)):
                row = fvars.entry_row(n, a, b, pre=s.component(n))
                row = hvars.entry_row(n, a, b, post=c.differential(n + k - 1),
                                      sign=-Q1, row=row)
                row = hvars.entry_row(n + 1, a, b, pre=z.differential(n),
                                      sign=-sgn_h, row=row)
                rhs = gn[a, b]
                if rhs:
                    row[aug] = rhs
                if row:
                    rows.append(row)
    coeffs = _solve_rows(rows, total)
    if coeffs is None:
        return None
    return ChainMap(d, c, k, fvars.extract(coeffs), check=False)
