"""Text syntax for function elements, states and coefficient lists.

Functions are arithmetic expressions in one coordinate:

* ``u`` stands for ``1/(e^{cz} - 1)`` (trig domain), e.g. ``c*(u+1)``;
* ``z`` is the plain coordinate (rational domain), e.g. ``z^-1 + z``;
* ``c`` is the numeric parameter given by ``--c``.

Allowed: integer and rational literals, ``+ - * /`` (division by scalars
only), and ``^`` or ``**`` with integer exponents (negative exponents only
on ``z``).  States are sums of optionally scaled mode words applied to the
vacuum, e.g. ``a(-1)a(-2)|0>``, ``L(-2)|0> - 1/2*|0>``.  Modes are applied
right to left, so non-canonical words are normal ordered.
"""

from __future__ import annotations

import ast
import re
from fractions import Fraction

from .funring import FunctionElement, RationalDomain, TrigDomain, constant
from .vertex import AlgebraSpec, VAState, mode_action


class ParseError(ValueError):
    """Carries the offending token for diagnostics."""

    def __init__(self, message: str, token: str = ""):
        super().__init__(f"{message}: {token!r}" if token else message)
        self.token = token


def _domain_for(text: str, c: Fraction):
    names = set(re.findall(r"[A-Za-z_]\w*", text))
    unknown = names - {"u", "z", "c"}
    if unknown:
        raise ParseError("unknown name", sorted(unknown)[0])
    if "u" in names and "z" in names:
        raise ParseError("cannot mix u and z in one expression", "z")
    return RationalDomain() if "z" in names else TrigDomain(c)


def parse_function(text: str, c=1, domain=None) -> FunctionElement:
    """Parse ``text`` into a :class:`FunctionElement`.

    The domain follows the variable used; a constant expression takes
    ``domain`` (default: the trig domain at ``c``).
    """
    c = parse_scalar(str(c))
    src = text.strip()
    if not src:
        raise ParseError("empty expression")
    dom = _domain_for(src, c)
    if domain is not None and not re.search(r"\b[uz]\b", src):
        dom = domain
    try:
        tree = ast.parse(src.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        bad = src[exc.offset - 1] if exc.offset and exc.offset <= len(src) else src
        raise ParseError("syntax error", bad) from None
    ev = _Evaluator(dom, c, src)
    return ev.lift(ev.eval(tree.body))


class _Evaluator:
    def __init__(self, domain, c: Fraction, src: str):
        self.domain, self.c, self.src = domain, c, src

    def _token(self, node) -> str:
        seg = ast.get_source_segment(self.src.replace("^", "**"), node)
        return seg.replace("**", "^") if seg else type(node).__name__

    def scalar_of(self, v):
        if isinstance(v, FunctionElement):
            if v.degree() <= 0 and v.pole_order() == 0:
                return v.constant_term()
            return None
        return v

    def eval(self, node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ParseError("only integer literals are allowed", self._token(node))
            return Fraction(node.value)
        if isinstance(node, ast.Name):
            if node.id == "c":
                return self.c
            return FunctionElement(self.domain, {1: 1})
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = self.eval(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            return self.binop(node)
        raise ParseError("unsupported syntax", self._token(node))

    def lift(self, v) -> FunctionElement:
        return v if isinstance(v, FunctionElement) else constant(self.domain, v)

    def binop(self, node):
        left, right = self.eval(node.left), self.eval(node.right)
        op = node.op
        both_scalar = not isinstance(left, FunctionElement) and not isinstance(right, FunctionElement)
        if isinstance(op, ast.Add):
            return left + right if both_scalar else self.lift(left) + self.lift(right)
        if isinstance(op, ast.Sub):
            return left - right if both_scalar else self.lift(left) - self.lift(right)
        if isinstance(op, ast.Mult):
            if both_scalar:
                return left * right
            return self.lift(left) * self.lift(right)
        if isinstance(op, ast.Div):
            k = self.scalar_of(right)
            if k is None:
                raise ParseError("division only by constants", self._token(node.right))
            if k == 0:
                raise ParseError("division by zero", self._token(node.right))
            return left / k if both_scalar else self.lift(left) * (1 / Fraction(k))
        if isinstance(op, ast.Pow):
            e = self.scalar_of(right)
            if e is None or Fraction(e).denominator != 1:
                raise ParseError("exponent must be an integer", self._token(node.right))
            e = int(e)
            if both_scalar:
                return Fraction(left) ** e
            base = self.lift(left)
            if e >= 0:
                out = constant(self.domain, 1)
                for _ in range(e):
                    out = out * base
                return out
            if base.is_trig or len(base.coeffs) != 1:
                raise ParseError("negative powers only of z monomials", self._token(node))
            (k, coeff), = base.coeffs.items()
            return FunctionElement(self.domain, {k * e: Fraction(coeff) ** e})
        raise ParseError("unsupported operator", self._token(node))


def parse_scalar(text: str) -> Fraction:
    """``3``, ``-1/2``; decimals are rejected to keep everything exact."""
    t = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", t):
        raise ParseError("not an exact rational", t)
    return Fraction(t)


_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+(?:/\d+)?)\s*\*?\s*)?((?:[aL]\(\s*-?\d+\s*\)\s*)*)\|0>\s*")
_MODE = re.compile(r"([aL])\(\s*(-?\d+)\s*\)")


def parse_state(text: str, spec: AlgebraSpec) -> VAState:
    """Parse a sum of mode words on the vacuum in the algebra ``spec``."""
    pos, out, src = 0, VAState(), text.strip()
    if not src:
        raise ParseError("empty state")
    first = True
    while pos < len(src):
        m = _TERM.match(src, pos)
        if not m or m.end() == pos or (not first and not m.group(1)):
            raise ParseError("cannot parse state near", src[pos:pos + 12])
        sign = -1 if m.group(1) == "-" else 1
        coeff = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        state = VAState.vacuum()
        for sym, n in reversed(_MODE.findall(m.group(3))):
            if sym != spec.symbol:
                raise ParseError(f"mode symbol does not belong to {spec.kind}", f"{sym}({n})")
            state = mode_action(spec, int(n), state)
        out = out + state * (sign * coeff)
        pos, first = m.end(), False
    return out


def parse_p_spec(text: str) -> list[tuple[int, Fraction]]:
    """``"0:1, 2:-1/3"`` -> ``[(0, 1), (2, -1/3)]`` (derivative order : coefficient)."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        k, sep, coeff = item.partition(":")
        if not sep or not k.strip().isdigit():
            raise ParseError("expected k:coeff", item)
        out.append((int(k), parse_scalar(coeff)))
    return out
