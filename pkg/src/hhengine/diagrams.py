"""Textual string-diagram terms: parse, typecheck, evaluate.

Grammar (UTF-8, whitespace-insensitive):

  term2 := atom2 | term2 ";" term2 | term2 "|" term2 | "(" term2 ")"
  atom2 := "id2(" term1 ")" | "gamma(" term1 ")" | "gamma'(" term1 ")"
         | "eps(" term1 ")" | "eps'(" term1 ")" | "hhclass(" name ")"
         | "tr(" term2 ")" | "ptr_l(" term2 ")" | "ptr_r(" term2 ")"
  term1 := "id1(" name ")" | "ker(" name ")" | "serre(" name ")"
         | "antiserre(" name ")" | "dual(" term1 ")" | term1 "∘" term1

";" binds loosest, then "|", then "∘".  "a ; b" composes vertically with a
at the bottom (diagrams read bottom to top); "a | b" composes horizontally
with a on the left.  Vertical composition matches boundaries up to the
eager normalization of the kernel layer: identity factors vanish, and
adjacent serre/anti-serre pairs are inserted or cancelled through the
canonical 2-morphisms.
"""

from __future__ import annotations

from .errors import BoundaryMismatch, DiagramSyntaxError, UnknownPrimitive
from . import kernels as kn
from . import hochschild as hh


# -- AST -----------------------------------------------------------------------


class Node:
    __slots__ = ("kind", "args", "span")

    def __init__(self, kind, args, span):
        self.kind = kind
        self.args = args
        self.span = span

    def __repr__(self):
        return f"Node({self.kind}, {self.args})"

    def __eq__(self, other):
        return (isinstance(other, Node) and self.kind == other.kind
                and list(self.args) == list(other.args))


ATOMS1 = ("id1", "ker", "serre", "antiserre", "dual")
ATOMS2 = ("id2", "gamma", "gamma'", "eps", "eps'", "hhclass",
          "tr", "ptr_l", "ptr_r")


def print_term(node: Node) -> str:
    k = node.kind
    if k == "seq":
        return " ; ".join(_wrap(a, ("seq",)) for a in node.args)
    if k == "beside":
        return " | ".join(_wrap(a, ("seq", "beside")) for a in node.args)
    if k == "compose1":
        return " ∘ ".join(_wrap(a, ("compose1",)) for a in node.args)
    if k == "name":
        return node.args[0]
    if k in ATOMS1 or k in ATOMS2:
        inner = ", ".join(print_term(a) for a in node.args)
        return f"{k}({inner})"
    raise UnknownPrimitive(k)


def _wrap(node, looser):
    s = print_term(node)
    return f"({s})" if node.kind in looser else s


# -- parser ----------------------------------------------------------------------


class _Scanner:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def loc(self, pos=None):
        p = self.pos if pos is None else pos
        line = self.text.count("\n", 0, p) + 1
        col = p - (self.text.rfind("\n", 0, p) + 1) + 1
        return line, col

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        self.skip_ws()
        if not self.text.startswith(ch, self.pos):
            line, col = self.loc()
            raise DiagramSyntaxError(f"expected {ch!r}", line, col)
        self.pos += len(ch)

    def word(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] in "_'"):
            self.pos += 1
        if self.pos == start:
            line, col = self.loc()
            raise DiagramSyntaxError("expected a name", line, col)
        return self.text[start:self.pos], start

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)


def parse(text: str) -> Node:
    sc = _Scanner(text)
    node = _parse_seq(sc)
    if not sc.at_end():
        line, col = sc.loc()
        raise DiagramSyntaxError("trailing input", line, col)
    return node


def _parse_seq(sc):
    parts = [_parse_beside(sc)]
    while sc.peek() == ";":
        sc.expect(";")
        parts.append(_parse_beside(sc))
    if len(parts) == 1:
        return parts[0]
    return Node("seq", parts, parts[0].span)


def _parse_beside(sc):
    parts = [_parse_atom2(sc)]
    while sc.peek() == "|":
        sc.expect("|")
        parts.append(_parse_atom2(sc))
    if len(parts) == 1:
        return parts[0]
    return Node("beside", parts, parts[0].span)


def _parse_atom2(sc):
    sc.skip_ws()
    start = sc.pos
    if sc.peek() == "(":
        sc.expect("(")
        inner = _parse_seq(sc)
        sc.expect(")")
        return inner
    w, wstart = sc.word()
    if w not in ATOMS2:
        line, col = sc.loc(wstart)
        if w in ATOMS1:
            raise DiagramSyntaxError(f"{w} is a 1-morphism primitive", line, col)
        raise UnknownPrimitive(f"{w} at line {line}, column {col}")
    sc.expect("(")
    if w == "hhclass":
        name, _ = sc.word()
        sc.expect(")")
        return Node("hhclass", [Node("name", [name], start)], start)
    if w in ("tr", "ptr_l", "ptr_r"):
        inner = _parse_seq(sc)
        sc.expect(")")
        return Node(w, [inner], start)
    inner = _parse_term1(sc)
    sc.expect(")")
    return Node(w, [inner], start)


def _parse_term1(sc):
    parts = [_parse_atom1(sc)]
    while True:
        sc.skip_ws()
        if sc.text.startswith("∘", sc.pos):
            sc.expect("∘")
            parts.append(_parse_atom1(sc))
        else:
            break
    if len(parts) == 1:
        return parts[0]
    return Node("compose1", parts, parts[0].span)


def _parse_atom1(sc):
    sc.skip_ws()
    start = sc.pos
    if sc.peek() == "(":
        sc.expect("(")
        inner = _parse_term1(sc)
        sc.expect(")")
        return inner
    w, wstart = sc.word()
    if w not in ATOMS1:
        line, col = sc.loc(wstart)
        raise UnknownPrimitive(f"{w} at line {line}, column {col}")
    sc.expect("(")
    if w == "dual":
        inner = _parse_term1(sc)
        sc.expect(")")
        return Node("dual", [inner], start)
    name, _ = sc.word()
    sc.expect(")")
    return Node(w, [Node("name", [name], start)], start)


# -- environment and realization ---------------------------------------------------


class Environment:
    """Named spaces, kernels and homology classes for evaluation."""

    def __init__(self, spaces=None, kernels=None, classes=None):
        self.spaces = dict(spaces or {})
        self.kernels = dict(kernels or {})
        self.classes = dict(classes or {})

    def space(self, name):
        if name not in self.spaces:
            raise UnknownPrimitive(f"unknown space {name!r}")
        return self.spaces[name]

    def kernel(self, name):
        if name not in self.kernels:
            raise UnknownPrimitive(f"unknown kernel {name!r}")
        return self.kernels[name]

    def hhclass(self, name):
        if name not in self.classes:
            raise UnknownPrimitive(f"unknown class {name!r}")
        return self.classes[name]


def realize_kernel(node: Node, env: Environment) -> kn.Kernel:
    k = node.kind
    if k == "id1":
        return env.space(node.args[0].args[0]).identity_kernel()
    if k == "ker":
        return env.kernel(node.args[0].args[0])
    if k == "serre":
        return env.space(node.args[0].args[0]).serre_kernel(verify=False)
    if k == "antiserre":
        return env.space(node.args[0].args[0]).anti_serre_kernel()
    if k == "dual":
        return kn.dual_kernel(realize_kernel(node.args[0], env))
    if k == "compose1":
        ks = [realize_kernel(a, env) for a in node.args]
        out = ks[-1]
        for x in reversed(ks[:-1]):
            out = kn.convolve(x, out)
        return out
    raise UnknownPrimitive(k)


# -- boundaries and reconciliation --------------------------------------------------


def _factor_descriptor(space_map, f):
    for name, sp in space_map.items():
        if sp.serre_kernel(verify=False).factors and \
                f is sp.serre_kernel(verify=False).factors[0]:
            return f"serre({name})"
        if sp.anti_serre_kernel().factors and \
                f is sp.anti_serre_kernel().factors[0]:
            return f"antiserre({name})"
    return f.label


def boundary_of(t: kn.TwoMorphism, env: Environment):
    """(bottom, top) as printable factor lists."""
    names = {}
    for n, k in env.kernels.items():
        for f in k.factors:
            names[id(f)] = f"ker({n})"
        if k._dual is not None:
            for f in k._dual.factors:
                names[id(f)] = f"dual(ker({n}))"
    def describe(kernel):
        if kernel.is_identity:
            return [f"id1({kernel.source.label})"]
        out = []
        for f in kernel.factors:
            out.append(names.get(id(f), _factor_descriptor(env.spaces, f)))
        return out
    return describe(t.source), describe(t.target)


def _serre_pair(space, order):
    sk = space.serre_kernel(verify=False).factors[0]
    anti = space.anti_serre_kernel().factors[0]
    return (anti, sk) if order == "anti_first" else (sk, anti)


def reconcile(src: kn.Kernel, tgt: kn.Kernel):
    """A canonical 2-morphism src => tgt built from Serre pair insertions
    and cancelations; None when the factor lists cannot be aligned."""
    if src is tgt:
        return kn.TwoMorphism.identity(src)
    steps = []
    cur = list(src.factors)
    goal = list(tgt.factors)
    i = 0
    guard = 0
    while True:
        guard += 1
        if guard > 60:
            return None
        if cur == goal:
            break
        # find first position where they disagree
        k = 0
        while k < min(len(cur), len(goal)) and cur[k] is goal[k]:
            k += 1
        # try cancel in cur at k
        did = False
        if k + 1 < len(cur):
            a, b = cur[k], cur[k + 1]
            step = _cancel_step(cur, k, a, b)
            if step is not None:
                steps.append(step)
                cur = cur[:k] + cur[k + 2:]
                did = True
        if not did and k + 1 < len(goal):
            a, b = goal[k], goal[k + 1]
            step = _insert_step(cur, k, a, b)
            if step is not None:
                steps.append(step)
                cur = cur[:k] + [a, b] + cur[k:]
                did = True
        if not did and k < len(goal):
            step = _point_insert_step(cur, k, goal[k])
            if step is not None:
                steps.append(step)
                cur = cur[:k] + [goal[k]] + cur[k:]
                did = True
        if not did and k < len(cur):
            step = _point_cancel_step(cur, k, cur[k])
            if step is not None:
                steps.append(step)
                cur = cur[:k] + cur[k + 1:]
                did = True
        if not did:
            return None
    out = None
    for s in steps:
        out = s if out is None else s.compose(out)
    if out is None:
        out = kn.TwoMorphism.identity(src)
    if out.target is not tgt:
        return None
    return out


def _pair_kind(a, b):
    for sp in _spaces_of(a):
        sk = sp.serre_kernel(verify=False).factors[0]
        anti = sp.anti_serre_kernel().factors[0]
        if a is anti and b is sk:
            return sp, "can2", "can6"
        if a is sk and b is anti:
            return sp, "can4", "can5"
    return None


def _spaces_of(f):
    return [f.source, f.target]


def _cancel_step(cur, k, a, b):
    info = _pair_kind(a, b)
    if info is None:
        return None
    sp, _, cancel = info
    can = sp.can6() if cancel == "can6" else sp.can5()
    left = kn.conv_kernel(tuple(cur[:k])) if k else None
    right = kn.conv_kernel(tuple(cur[k + 2:])) if k + 2 < len(cur) else None
    left = left if k else None
    return kn.whisker(left, can, right)


def _insert_step(cur, k, a, b):
    info = _pair_kind(a, b)
    if info is None:
        return None
    sp, ins, _ = info
    can = sp.can2() if ins == "can2" else sp.can4()
    left = kn.conv_kernel(tuple(cur[:k])) if k else None
    right = kn.conv_kernel(tuple(cur[k:])) if k < len(cur) else None
    return kn.whisker(left, can, right)


def _point_serre_space(f):
    """The space whose trivial Serre factor f is, or None."""
    for sp in _spaces_of(f):
        if sp.algebra.dim == 1 and \
                sp.serre_kernel(verify=False).factors and \
                f is sp.serre_kernel(verify=False).factors[0]:
            return sp
    return None


def _point_insert_step(cur, k, a):
    sp = _point_serre_space(a)
    if sp is None:
        return None
    can = kn.point_serre_insert(sp)
    left = kn.conv_kernel(tuple(cur[:k])) if k else None
    right = kn.conv_kernel(tuple(cur[k:])) if k < len(cur) else None
    return kn.whisker(left, can, right)


def _point_cancel_step(cur, k, a):
    sp = _point_serre_space(a)
    if sp is None:
        return None
    can = kn.point_serre_drop(sp)
    left = kn.conv_kernel(tuple(cur[:k])) if k else None
    right = kn.conv_kernel(tuple(cur[k + 1:])) if k + 1 < len(cur) else None
    return kn.whisker(left, can, right)


# -- evaluation ----------------------------------------------------------------------


def evaluate(node: Node, env: Environment):
    """A TwoMorphism, or an exact scalar for tr(...) terms."""
    k = node.kind
    if k == "id2":
        return kn.TwoMorphism.identity(realize_kernel(node.args[0], env))
    if k == "gamma":
        return kn.gamma(realize_kernel(node.args[0], env))
    if k == "gamma'":
        return kn.mirrored_gamma(realize_kernel(node.args[0], env))
    if k == "eps":
        return kn.counit_eps(realize_kernel(node.args[0], env))
    if k == "eps'":
        return kn.counit_eps_mirror(realize_kernel(node.args[0], env))
    if k == "hhclass":
        v = env.hhclass(node.args[0].args[0])
        return hh.class_to_two_morphism(v)
    if k == "beside":
        parts = [evaluate(a, env) for a in node.args]
        for p in parts:
            if not isinstance(p, kn.TwoMorphism):
                raise BoundaryMismatch("scalar inside a horizontal composite")
        return kn.hcompose(parts)
    if k == "seq":
        parts = [evaluate(a, env) for a in node.args]
        out = parts[0]
        for p in parts[1:]:
            if not isinstance(p, kn.TwoMorphism):
                raise BoundaryMismatch("scalar inside a vertical composite")
            med = reconcile(out.target, p.source)
            if med is None:
                bot, top = boundary_of(p, env)
                bot0, top0 = boundary_of(out, env)
                raise BoundaryMismatch(
                    f"cannot compose: top {top0} does not match bottom {bot}")
            out = p.compose(med.compose(out))
        return out
    if k == "tr":
        inner = evaluate(node.args[0], env)
        phi = inner.source
        x, y = phi.source, phi.target
        expected = kn.conv_kernel(y.serre_kernel(verify=False).factors
                                  + phi.factors
                                  + x.serre_kernel(verify=False).factors)
        med = reconcile(inner.target, expected)
        if med is None:
            raise BoundaryMismatch("tr() boundary is not serre . phi . serre")
        return kn.serre_trace(phi, med.compose(inner))
    if k == "ptr_l":
        inner = evaluate(node.args[0], env)
        src = inner.source
        if src.is_identity or not src.factors:
            raise BoundaryMismatch("ptr_l needs a non-identity source")
        strand = kn.conv_kernel((src.factors[0],))
        theta = kn.conv_kernel(tuple(src.factors[1:])) if src.factors[1:] \
            else src.source.identity_kernel()
        y = strand.target
        tgt = inner.target
        sky_f = y.serre_kernel(verify=False).factors
        if tgt.factors[:len(sky_f)] != sky_f or \
                tgt.factors[len(sky_f):len(sky_f) + 1] != strand.factors:
            raise BoundaryMismatch("ptr_l target is not serre . phi . psi")
        psi = kn.conv_kernel(tuple(tgt.factors[len(sky_f) + 1:])) \
            if tgt.factors[len(sky_f) + 1:] else strand.source.identity_kernel()
        return kn.partial_trace_left(inner, strand, theta, psi)
    if k == "ptr_r":
        inner = evaluate(node.args[0], env)
        src = inner.source
        if src.is_identity or not src.factors:
            raise BoundaryMismatch("ptr_r needs a non-identity source")
        strand = kn.conv_kernel((src.factors[-1],))
        theta = kn.conv_kernel(tuple(src.factors[:-1])) if src.factors[:-1] \
            else src.target.identity_kernel()
        x = strand.source
        tgt = inner.target
        skx_f = x.serre_kernel(verify=False).factors
        if tgt.factors[-len(skx_f):] != skx_f or \
                tgt.factors[-len(skx_f) - 1:-len(skx_f)] != strand.factors:
            raise BoundaryMismatch("ptr_r target is not psi . phi . serre")
        psi = kn.conv_kernel(tuple(tgt.factors[:-len(skx_f) - 1])) \
            if tgt.factors[:-len(skx_f) - 1] else strand.target.identity_kernel()
        return kn.partial_trace_right(inner, strand, theta, psi)
    raise UnknownPrimitive(k)


def typecheck(node: Node, env: Environment):
    """Boundary of the term; raises BoundaryMismatch on bad composites.

    Checking is semantic: the term is evaluated (the engine's composition
    machinery enforces exactly the published composability rules) and the
    boundary of the result is reported.  tr() terms report ('scalar',)."""
    out = evaluate(node, env)
    if isinstance(out, kn.TwoMorphism):
        return boundary_of(out, env)
    return ("scalar",)
