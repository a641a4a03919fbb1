"""Hochschild homology and cohomology, the Mukai pairing, Chern characters,
Euler pairings and the Cardy identities.

HH_i(X) is read from degree -i of the hom complex from the anti-Serre
kernel to the identity kernel; HH^i(X) from degree i of the hom complex of
the identity kernel with itself.  All class coordinates refer to the bases
produced by the deterministic homology solver, so they are stable across
runs.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import SpaceMismatch
from .linalg import Matrix, Q0, Q1, quotient_basis, scalar
from . import algebras as alg
from . import complexes as cx
from . import kernels as kn


class HochschildClass:
    """An element of HH_degree(space) (homology) or HH^degree (cohomology)."""

    def __init__(self, space, variance, degree, coords):
        self.space = space
        self.variance = variance
        self.degree = degree
        self.coords = tuple(scalar(c) for c in coords)

    def __repr__(self):
        g = "HH_" if self.variance == "homology" else "HH^"
        return f"{g}{self.degree}({self.space.label}){list(self.coords)}"

    def __eq__(self, other):
        return (isinstance(other, HochschildClass)
                and self.space is other.space
                and self.variance == other.variance
                and self.degree == other.degree
                and self.coords == other.coords)

    def add(self, other):
        assert self == other or (self.space is other.space
                                 and self.degree == other.degree)
        return HochschildClass(self.space, self.variance, self.degree,
                               [a + b for a, b in zip(self.coords, other.coords)])

    def scale(self, c):
        c = scalar(c)
        return HochschildClass(self.space, self.variance, self.degree,
                               [c * a for a in self.coords])

    def is_zero(self):
        return all(c == 0 for c in self.coords)


class GradedData:
    """Homology of a hom complex with per-degree section/projector."""

    def __init__(self, homcomplex):
        self.hc = homcomplex
        self.data = {}
        for n in homcomplex.complex.degrees():
            dim, section, projector = cx.homology(homcomplex.complex, n)
            if dim:
                self.data[n] = (dim, section, projector)

    def dim(self, n):
        return self.data.get(n, (0, None, None))[0]

    def dims(self):
        return {n: d for n, (d, _, _) in self.data.items()}

    def chain_map(self, n, coords):
        dim, section, _ = self.data[n]
        vec = section.apply(tuple(coords))
        return self.hc.chain_map_from(vec, n)

    def coords_of_chain(self, f: cx.ChainMap, n):
        vec = self.hc.coordinates(f.components, n)
        dim, _, projector = self.data.get(n, (0, None, None))
        if dim == 0:
            if any(vec):
                # must still be a boundary for consistency
                pass
            return ()
        return tuple(projector.apply(vec))


_HH_CACHE = {}


def hh_data(space) -> GradedData:
    """Hochschild homology data: Hom(anti_serre, Id), HH_i at degree -i."""
    key = ("hh", id(space))
    if key not in _HH_CACHE:
        anti = space.anti_serre_kernel()
        idk = space.identity_kernel()
        hc = kn.two_morphism_space(anti, idk, 0)
        _HH_CACHE[key] = (GradedData(hc), space)
    return _HH_CACHE[key][0]


def hcoh_data(space) -> GradedData:
    """Hochschild cohomology data: Hom(Id, Id), HH^i at degree +i."""
    key = ("hcoh", id(space))
    if key not in _HH_CACHE:
        idk = space.identity_kernel()
        hc = kn.two_morphism_space(idk, idk, 0)
        _HH_CACHE[key] = (GradedData(hc), space)
    return _HH_CACHE[key][0]


def hh(space):
    """Graded dimensions of HH_bullet(space)."""
    data = hh_data(space)
    return {-n: d for n, d in data.dims().items()}


def hcoh(space):
    """Graded dimensions of HH^bullet(space)."""
    data = hcoh_data(space)
    return {n: d for n, d in data.dims().items()}


def hh_class(space, degree, coords):
    return HochschildClass(space, "homology", degree, coords)


def class_to_two_morphism(v: HochschildClass) -> kn.TwoMorphism:
    space = v.space
    if v.variance == "homology":
        data = hh_data(space)
        f = data.chain_map(-v.degree, v.coords)
        return kn.TwoMorphism(space.anti_serre_kernel(),
                              space.identity_kernel(), f)
    data = hcoh_data(space)
    f = data.chain_map(v.degree, v.coords)
    idk = space.identity_kernel()
    return kn.TwoMorphism(idk, idk, f)


def two_morphism_to_class(space, t: kn.TwoMorphism, variance="homology"):
    if variance == "homology":
        data = hh_data(space)
        n = t.degree
        coords = data.coords_of_chain(t.chain, n)
        return HochschildClass(space, "homology", -n, coords)
    data = hcoh_data(space)
    coords = data.coords_of_chain(t.chain, t.degree)
    return HochschildClass(space, "cohomology", t.degree, coords)


def hh_via_tor(space):
    """Independent oracle: homology of id_res (x)_{env} regular bimodule.

    The cyclic tensor (M (x) A) / (a m a' (x) n - m (x) a' n a) is taken
    termwise; dimensions must agree with hh() in every degree.
    """
    res, _ = space.id_resolution()
    a = space.algebra
    reg = space.regular
    pieces = {}
    for n in res.degrees():
        m = res.term(n)
        raw = m.dim * a.dim
        cols = []
        for gi in a.generators():
            gvec = tuple(Q1 if t == gi else Q0 for t in range(a.dim))
            lm = m.act_left(gvec)
            rm = m.act_right(gvec)
            la = a.left_mult_matrix(gvec)
            ra = a.right_mult_matrix(gvec)
            for i in range(m.dim):
                for j in range(a.dim):
                    col = [Q0] * raw
                    # (g . m) (x) n - m (x) (n . g)
                    for k, x in enumerate(lm.column(i)):
                        if x:
                            col[k * a.dim + j] += x
                    for l, y in enumerate(ra.column(j)):
                        if y:
                            col[i * a.dim + l] -= y
                    if any(col):
                        cols.append(tuple(col))
                    col = [Q0] * raw
                    # (m . g) (x) n - m (x) (g . n)
                    for k, x in enumerate(rm.column(i)):
                        if x:
                            col[k * a.dim + j] += x
                    for l, y in enumerate(la.column(j)):
                        if y:
                            col[i * a.dim + l] -= y
                    if any(col):
                        cols.append(tuple(col))
        sub = Matrix.from_columns(cols, raw) if cols else Matrix.zero(raw, 0)
        proj, sect = quotient_basis(raw, sub)
        pieces[n] = (proj, sect)
    pt = alg.point_algebra()
    terms = {n: alg.point_bimodule(p.rows, label=f"tor^{n}")
             for n, (p, s) in pieces.items()}
    diffs = {}
    for n in res.degrees():
        if (n + 1) not in pieces:
            continue
        projn1, _ = pieces[n + 1]
        projn, sectn = pieces[n]
        d = res.differential(n)
        cols = []
        for c in range(projn.rows):
            v = sectn.column(c)
            w = alg._apply_left_factor(d, v, a.dim)
            cols.append(projn1.apply(w))
        diffs[n] = Matrix.from_columns(cols, projn1.rows)
    c = cx.Complex({n: t for n, t in terms.items() if t.dim},
                  {n: d for n, d in diffs.items()}, pt, pt, check=False)
    out = {}
    for n in c.degrees():
        dim, _, _ = cx.homology(c, n)
        if dim:
            out[-n] = dim
    return out


# -- module action and ring structure ----------------------------------------


def hcoh_product(space, f: HochschildClass, g: HochschildClass):
    """Product on HH^bullet: composition of representatives, projected."""
    tf = class_to_two_morphism(f)
    tg = class_to_two_morphism(g)
    comp = tf.chain.compose(tg.chain)
    return two_morphism_to_class(
        space, kn.TwoMorphism(tg.source, tf.target, comp), "cohomology")


def module_action(f: HochschildClass, v: HochschildClass):
    """HH^bullet acting on HH_bullet by vertical composition."""
    if f.space is not v.space:
        raise SpaceMismatch("module action across spaces")
    tf = class_to_two_morphism(f)
    tv = class_to_two_morphism(v)
    comp = tf.chain.compose(tv.chain)
    return two_morphism_to_class(
        f.space, kn.TwoMorphism(tv.source, tf.target, comp), "homology")


def hcoh_unit(space):
    data = hcoh_data(space)
    idm = cx.ChainMap.identity(space.identity_kernel().complex)
    coords = data.coords_of_chain(idm, 0)
    return HochschildClass(space, "cohomology", 0, coords)


# -- pushforward / pullback ----------------------------------------------------


def one_point_class(pt_space):
    """The distinguished generator 1 in HH_0(pt)."""
    data = hh_data(pt_space)
    idm = cx.ChainMap.identity(pt_space.identity_kernel().complex)
    # anti_serre(pt) and Id(pt) are both Q in degree 0; the canonical map is
    # the identity matrix between them
    anti = pt_space.anti_serre_kernel()
    f = cx.ChainMap(anti.complex, pt_space.identity_kernel().complex, 0,
                    {0: Matrix.identity(1)}, check=False)
    coords = data.coords_of_chain(f, 0)
    return HochschildClass(pt_space, "homology", 0, coords)


def pushforward(phi: kn.Kernel, v: HochschildClass):
    """phi_*: HH(source) -> HH(target), the four-step bent composite."""
    x, y = phi.source, phi.target
    if v.space is not x:
        raise SpaceMismatch("pushforward class lives on the wrong space")
    tv = class_to_two_morphism(v)
    dk = kn.dual_kernel(phi)
    mg = kn.mirrored_gamma(phi)                 # anti_Y => phi . phi^v
    ins = kn.hcompose([kn.TwoMorphism.identity(phi), x.can2(),
                       kn.TwoMorphism.identity(dk)])
    skx = x.serre_kernel(verify=False)
    tail = kn.conv_kernel(skx.factors + dk.factors)
    act = kn.hcompose([kn.TwoMorphism.identity(phi), tv,
                       kn.TwoMorphism.identity(tail)])
    eps = kn.counit_eps(phi)                    # phi . serre_X . phi^v => Id_Y
    total = eps.compose(act.compose(ins.compose(mg)))
    return two_morphism_to_class(y, total, "homology")


def pullback(phi: kn.Kernel, w: HochschildClass):
    """phi^*: HH(target) -> HH(source)."""
    x, y = phi.source, phi.target
    if w.space is not y:
        raise SpaceMismatch("pullback class lives on the wrong space")
    tw = class_to_two_morphism(w)
    dk = kn.dual_kernel(phi)
    g = kn.gamma(phi)                            # anti_X => phi^v . phi
    ins = kn.hcompose([kn.TwoMorphism.identity(dk), y.can2(),
                       kn.TwoMorphism.identity(phi)])
    sky = y.serre_kernel(verify=False)
    tail = kn.conv_kernel(sky.factors + phi.factors)
    act = kn.hcompose([kn.TwoMorphism.identity(dk), tw,
                       kn.TwoMorphism.identity(tail)])
    epsm = kn.counit_eps_mirror(phi)             # phi^v . serre_Y . phi => Id_X
    total = epsm.compose(act.compose(ins.compose(g)))
    return two_morphism_to_class(x, total, "homology")


def pushforward_matrix(phi: kn.Kernel, degree=0):
    """Matrix of phi_* on HH_degree in the solver bases."""
    x, y = phi.source, phi.target
    dsrc = hh_data(x).dim(-degree)
    dtgt = hh_data(y).dim(-degree)
    cols = []
    for j in range(dsrc):
        coords = [Q1 if t == j else Q0 for t in range(dsrc)]
        img = pushforward(phi, hh_class(x, degree, coords))
        cols.append(img.coords if img.coords else (Q0,) * dtgt)
    return Matrix.from_columns(cols, dtgt) if cols else Matrix.zero(dtgt, 0)


def pullback_matrix(phi: kn.Kernel, degree=0):
    x, y = phi.source, phi.target
    dsrc = hh_data(y).dim(-degree)
    dtgt = hh_data(x).dim(-degree)
    cols = []
    for j in range(dsrc):
        coords = [Q1 if t == j else Q0 for t in range(dsrc)]
        img = pullback(phi, hh_class(y, degree, coords))
        cols.append(img.coords if img.coords else (Q0,) * dtgt)
    return Matrix.from_columns(cols, dtgt) if cols else Matrix.zero(dtgt, 0)


# -- Mukai pairing ---------------------------------------------------------------


def tau_r_class(v: HochschildClass) -> kn.TwoMorphism:
    """Id => serre, the right bending of a homology class."""
    x = v.space
    tv = class_to_two_morphism(v)
    can4 = x.can4()
    sk = x.serre_kernel(verify=False)
    step = kn.whisker(sk, tv)       # serre . anti => serre
    return step.compose(can4)


def tau_l_class(v: HochschildClass) -> kn.TwoMorphism:
    """Id => serre, the left bending."""
    x = v.space
    tv = class_to_two_morphism(v)
    can2 = x.can2()
    sk = x.serre_kernel(verify=False)
    step = kn.whisker(None, tv, sk)  # anti . serre => serre
    return step.compose(can2)


def mukai_pairing(v: HochschildClass, w: HochschildClass):
    """<v, w> = Tr(tau_R(v) . tau_L(w)), 0 when degrees do not cancel."""
    if v.space is not w.space:
        raise SpaceMismatch("mukai pairing across spaces")
    if v.degree + w.degree != 0:
        return Q0
    x = v.space
    tr_v = tau_r_class(v)
    tl_w = tau_l_class(w)
    sk = x.serre_kernel(verify=False)
    bent = kn.whisker(sk, tl_w)       # serre => serre . serre
    total = bent.compose(tr_v)        # Id => serre . serre
    return kn.serre_trace(x.identity_kernel(), total)


def pairing_matrix(space, i=0):
    """The pairing block HH_i x HH_{-i} -> Q in the solver bases."""
    di = hh_data(space).dim(-i)
    dj = hh_data(space).dim(i)
    rows = []
    for a in range(di):
        va = hh_class(space, i, [Q1 if t == a else Q0 for t in range(di)])
        row = []
        for b in range(dj):
            wb = hh_class(space, -i, [Q1 if t == b else Q0 for t in range(dj)])
            row.append(mukai_pairing(va, wb))
        rows.append(row)
    return Matrix.from_rows(rows) if rows else Matrix.zero(0, dj)


# -- modules as kernels, Chern character, Euler pairing --------------------------


_MODULE_KERNELS = {}


def module_kernel(space, pt_space, module: alg.Bimodule, label=None):
    """A left module over space.algebra as a strictly perfect kernel pt -> X."""
    key = (id(space), id(module))
    if key not in _MODULE_KERNELS:
        res, _ = alg.projective_resolution(module)
        a = kn.AtomicKernel(pt_space, space, res, label or module.label,
                            check=False)
        _MODULE_KERNELS[key] = (kn.conv_kernel((a,)), module, space)
    return _MODULE_KERNELS[key][0]


def chern(e: kn.Kernel, one: HochschildClass):
    """ch(E) = E_*(1) in HH_0."""
    return pushforward(e, one)


def chern_via_iota(e: kn.Kernel):
    """ch(E) = iota^E(Id_E); cross-check path."""
    return iota_upper(e, kn.TwoMorphism.identity(e))


def ext_data(x, e: kn.Kernel, f: kn.Kernel) -> GradedData:
    """Ext^bullet(E, F) as homology of the hom complex of resolutions."""
    hc = kn.two_morphism_space(e, f, 0)
    return GradedData(hc)


def euler(x, e: kn.Kernel, f: kn.Kernel):
    """chi(E, F) = sum (-1)^i dim Ext^i(E, F)."""
    data = ext_data(x, e, f)
    total = 0
    for n, d in data.dims().items():
        total += d if n % 2 == 0 else -d
    return Fraction(total)


def pt_serre_insert(pt_space):
    """The canonical Id_pt => Serre(pt) (both are Q in degree 0)."""
    return kn.point_serre_insert(pt_space)


def iota_lower(e: kn.Kernel, v: HochschildClass) -> kn.TwoMorphism:
    """iota_E(v): E => serre(X) . E."""
    x = e.target
    if v.space is not x:
        raise SpaceMismatch("iota_lower class on the wrong space")
    tv = class_to_two_morphism(v)
    step1 = kn.whisker(None, x.can4(), e)      # E => serre.anti.E
    sk = x.serre_kernel(verify=False)
    step2 = kn.hcompose([kn.TwoMorphism.identity(sk), tv,
                         kn.TwoMorphism.identity(e)])
    return step2.compose(step1)


def iota_upper(e: kn.Kernel, t: kn.TwoMorphism) -> HochschildClass:
    """iota^E(t) in HH_bullet(X) for t: E => E."""
    x = e.target
    pt_space = e.source
    mg = kn.mirrored_gamma(e)                  # anti_X => E . E^v
    dk = kn.dual_kernel(e)
    ins = pt_serre_insert(pt_space)
    mid = kn.hcompose([t, ins, kn.TwoMorphism.identity(dk)])
    eps = kn.counit_eps(e)                     # E . serre_pt . E^v => Id_X
    total = eps.compose(mid.compose(mg))
    return two_morphism_to_class(x, total, "homology")


def serre_trace_on_module(e: kn.Kernel, t: kn.TwoMorphism):
    """Tr of t: E => serre(X).E through the trace shape with Serre(pt)."""
    x = e.target
    sk = x.serre_kernel(verify=False)
    ins = pt_serre_insert(e.source)
    pre = kn.conv_kernel(sk.factors + e.factors)
    shaped = kn.whisker(pre, ins).compose(t)
    return kn.serre_trace(e, shaped)


def cardy_check(x, e: kn.Kernel, f: kn.Kernel, s: kn.TwoMorphism,
                t: kn.TwoMorphism):
    """(lhs, rhs) of the two-boundary trace identity.

    lhs: supertrace of (post-compose t, pre-compose s) on Ext^bullet(e, f),
    computed on homology of the hom complex.
    rhs: <iota^E(s), iota^F(t)> under the Mukai pairing.
    """
    data = ext_data(x, e, f)
    total = Q0
    for n, (dim, section, projector) in data.data.items():
        mat_cols = []
        for jv in range(dim):
            coords = [Q1 if q == jv else Q0 for q in range(dim)]
            cmap = data.chain_map(n, coords)
            conj = t.chain.compose(cmap.compose(s.chain))
            vec = data.hc.coordinates(conj.components, n)
            mat_cols.append(projector.apply(vec))
        m = Matrix.from_columns(mat_cols, dim)
        tr = sum((m[i, i] for i in range(dim)), Q0)
        total += tr if n % 2 == 0 else -tr
    lhs = total
    rhs = mukai_pairing(iota_upper(e, s), iota_upper(f, t))
    return lhs, rhs


# -- class functions on group-algebra spaces -------------------------------------


_REG_KERNELS = {}


def _regular_module_kernel(space, pt_space):
    key = id(space)
    if key not in _REG_KERNELS:
        a = space.algebra
        regmod = alg.module_as_bimodule(a, list(a.left_mult), f"reg({a.label})")
        _REG_KERNELS[key] = (module_kernel(space, pt_space, regmod), space)
    return _REG_KERNELS[key][0]


def class_function(space, pt_space, v: HochschildClass, reps):
    """Values of a degree-0 class at group elements, via Tr(iota_R(v) . m_g).

    reps: list of basis indices of group elements; the regular module is
    used as the probe, so for v = ch(V) this returns the character of V.
    """
    a = space.algebra
    rk = _regular_module_kernel(space, pt_space)
    il = iota_lower(rk, v)
    out = []
    for g in reps:
        gvec = tuple(Q1 if t == g else Q0 for t in range(a.dim))
        # right multiplication by g is a left-module endomorphism
        mg = cx.ChainMap(rk.complex, rk.complex, 0,
                         {0: a.right_mult_matrix(gvec)}, check=False)
        tmg = kn.TwoMorphism(rk, rk, mg)
        comp = il.compose(tmg)
        out.append(serre_trace_on_module(rk, comp))
    return out
