"""Canonical expression trees for manufactured solutions.

A solution serializes to a prefix-notation string over the fixed alphabet
{+, *, sin, cos, exp, log, tanh, sinh, cosh, erf, atan2, sqrt, pow, I0}
with literal parameters, e.g. ``(+ (* 0.5 (sin (* 2.0 3.141592653589793 x))) ...)``.
Every atom kind lowers to a structurally distinctive template, so parsing
is exact: the template matcher reconstructs the original atoms (kind
labels can alias only between value-identical kinds whose parameter
ranges overlap, e.g. a high-frequency trig pair at the range boundary).

Trees evaluate numerically (numpy) or with jet scalars for exact
derivatives.  Node representation: float literals, the variable strings
"x"/"y", or ``(op, *args)`` tuples.
"""

from __future__ import annotations

import math

import numpy as np

from . import jets
from .atoms import Atom, Solution
from .special import bessel_i0, erf as erf_fn

PI = math.pi

OPS = ("+", "*", "sin", "cos", "exp", "log", "tanh", "sinh", "cosh",
       "erf", "atan2", "sqrt", "pow", "I0")


class ExprError(ValueError):
    pass


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _shift(var: str, center: float):
    return ("+", var, -center)


def _s2_origin():
    return ("+", ("pow", "x", 2.0), ("pow", "y", 2.0))


def _s2_center(cx: float, cy: float):
    return ("+", ("pow", _shift("x", cx), 2.0), ("pow", _shift("y", cy), 2.0))


def _monomial(c: float, i: int, j: int):
    factors = []
    if i == 1:
        factors.append("x")
    elif i > 1:
        factors.append(("pow", "x", float(i)))
    if j == 1:
        factors.append("y")
    elif j > 1:
        factors.append(("pow", "y", float(j)))
    if not factors:
        return c
    return ("*", c, *factors)


def _lin2(nx: float, ny: float):
    return ("+", ("*", nx, "x"), ("*", ny, "y"))


def _lin3(nx: float, ny: float, c: float):
    return ("+", ("*", nx, "x"), ("*", ny, "y"), c)


_POLY_EXPONENTS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3))


def _gaussian_expr(a: float, w: float, cx: float, cy: float):
    return ("*", a, ("exp", ("*", -w, _s2_center(cx, cy))))


def atom_to_expr(atom: Atom):
    k, p, v = atom.kind, atom.params, atom.variant
    if k == "poly":
        return ("+", *[_monomial(p[t], i, j) for t, (i, j) in enumerate(_POLY_EXPONENTS)])
    if k == "trig":
        return ("*", p[0], ("sin", ("*", p[1], PI, "x")))
    if k == "exp":
        return ("*", p[0], ("exp", ("*", p[1], "x")))
    if k == "log":
        return ("*", p[0], ("log", ("+", ("pow", "x", 2.0), 0.01)))
    if k == "hyper":
        return ("*", p[0], (("sinh", "cosh", "tanh")[v], "x"))
    if k == "special":
        if v == 0:
            return ("*", p[0], ("erf", "x"))
        return ("*", p[0], ("sqrt", ("+", ("pow", "x", 2.0), 0.1)))
    if k == "harmonic_polar":
        n = p[1]
        return (
            "*",
            p[0],
            ("pow", ("sqrt", _s2_origin()), n),
            ("cos", ("*", n, ("atan2", "y", "x"))),
        )
    if k == "plane_wave":
        return ("*", p[0], ("cos", ("*", p[1], _lin2(p[2], p[3]))))
    if k == "yukawa_i0":
        return ("*", p[0], ("I0", ("*", p[1], ("sqrt", _s2_origin()))))
    if k == "log_source":
        return ("*", p[0], ("log", ("sqrt", _s2_center(p[1], p[2]))))
    if k in ("gaussian_bump", "narrow_bump"):
        return _gaussian_expr(p[0], p[1], p[2], p[3])
    if k == "rational":
        return (
            "*",
            p[0],
            ("pow", ("+", 1.0, ("*", p[1], ("pow", "x", 2.0)), ("*", p[2], ("pow", "y", 2.0))), -1.0),
        )
    if k == "product":
        f1, f2 = ("sin", "cos", "tanh")[v // 3], ("sin", "cos", "tanh")[v % 3]
        return ("*", p[0], (f1, ("*", p[1], "x")), (f2, ("*", p[2], "y")))
    if k == "multi_rbf":
        m = int(p[0])
        return ("+", *[_gaussian_expr(*p[1 + 4 * i : 5 + 4 * i]) for i in range(m)])
    if k in ("high_freq_trig", "very_high_freq_trig"):
        return ("*", p[0], ("sin", ("*", p[1], PI, "x")), ("cos", ("*", p[2], PI, "y")))
    if k == "logsumexp":
        return ("*", p[0], ("log", ("+", ("exp", ("*", p[1], "x")), ("exp", ("*", p[2], "y")))))
    if k == "sech_bump":
        return (
            "*",
            p[0],
            ("pow", ("cosh", ("*", p[1], _shift("x", p[3]))), -2.0),
            ("pow", ("cosh", ("*", p[2], _shift("y", p[4]))), -2.0),
        )
    if k == "sharp_transition":
        return ("*", p[0], ("tanh", ("*", p[1], _lin3(p[2], p[3], -p[4]))))
    if k in ("h_polar", "h_high_n_polar"):
        n = p[1]
        trig = "cos" if v == 0 else "sin"
        return ("*", p[0], ("pow", _s2_origin(), n / 2.0), (trig, ("*", n, ("atan2", "y", "x"))))
    if k in ("h_exp_trig", "h_high_freq_exp_trig"):
        trig = "cos" if v == 0 else "sin"
        return ("*", p[0], ("exp", ("*", p[1], "x")), (trig, ("*", p[1], "y")))
    if k == "h_trig_hyp":
        vx = "sin" if v in (0, 1) else "cos"
        vy = "sinh" if v in (0, 2) else "cosh"
        return ("*", p[0], (vx, ("*", p[1], "x")), (vy, ("*", p[1], "y")))
    if k == "h_log_source":
        return ("*", p[0], 0.5, ("log", _s2_center(p[1], p[2])))
    if k == "h_linear":
        return ("+", ("*", p[0], "x"), ("*", p[1], "y"))
    if k == "h_bilinear":
        return ("*", p[0], "x", "y")
    if k == "h_arctan":
        a, e1x, e1y, d1, e2x, e2y, d2 = p
        return ("*", a, ("atan2", _lin3(e2x, e2y, d2), _lin3(e1x, e1y, d1)))
    if k == "h_inversion":
        a, cx, cy = p
        return ("*", a, _shift("x", cx), ("pow", _s2_center(cx, cy), -1.0))
    if k == "h_dipole":
        a, cx, cy = p
        diff = ("+", ("pow", _shift("x", cx), 2.0), ("*", -1.0, ("pow", _shift("y", cy), 2.0)))
        return ("*", a, diff, ("pow", _s2_center(cx, cy), -2.0))
    if k == "h_quadratic":
        a, c, s = p
        u = _lin2(c, s)
        w = _lin2(-s, c)
        if v == 0:
            return ("*", a, ("+", ("pow", u, 2.0), ("*", -1.0, ("pow", w, 2.0))))
        return ("*", a, 2.0, u, w)
    raise ExprError(f"no lowering for atom kind {k}")


def solution_to_expr(sol: Solution):
    return ("+", *[atom_to_expr(a) for a in sol.atoms])


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def to_string(node) -> str:
    if isinstance(node, float):
        return repr(node)
    if isinstance(node, str):
        return node
    return "(" + " ".join([node[0]] + [to_string(a) for a in node[1:]]) + ")"


def parse(text: str):
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise ExprError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise ExprError("unterminated form")
            op = tokens[pos]
            pos += 1
            if op not in OPS:
                raise ExprError(f"unknown operator {op!r}")
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(read())
            if pos >= len(tokens):
                raise ExprError("missing closing paren")
            pos += 1
            return (op, *args)
        if tok == ")":
            raise ExprError("unexpected )")
        if tok in ("x", "y"):
            return tok
        try:
            return float(tok)
        except ValueError as e:
            raise ExprError(f"bad token {tok!r}") from e

    node = read()
    if pos != len(tokens):
        raise ExprError("trailing tokens after expression")
    return node


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def eval_expr(node, x, y):
    if isinstance(node, float):
        return node
    if node == "x":
        return x
    if node == "y":
        return y
    op, args = node[0], node[1:]
    if op == "+":
        out = eval_expr(args[0], x, y)
        for a in args[1:]:
            out = out + eval_expr(a, x, y)
        return out
    if op == "*":
        out = eval_expr(args[0], x, y)
        for a in args[1:]:
            out = out * eval_expr(a, x, y)
        return out
    if op == "pow":
        return np.power(eval_expr(args[0], x, y), eval_expr(args[1], x, y))
    if op == "atan2":
        return np.arctan2(eval_expr(args[0], x, y), eval_expr(args[1], x, y))
    (arg,) = args
    v = eval_expr(arg, x, y)
    if op == "sin":
        return np.sin(v)
    if op == "cos":
        return np.cos(v)
    if op == "exp":
        return np.exp(v)
    if op == "log":
        return np.log(v)
    if op == "tanh":
        return np.tanh(v)
    if op == "sinh":
        return np.sinh(v)
    if op == "cosh":
        return np.cosh(v)
    if op == "erf":
        return erf_fn(v)
    if op == "sqrt":
        return np.sqrt(v)
    if op == "I0":
        return bessel_i0(v)
    raise ExprError(f"unknown op {op}")


def eval_expr_jet(node, x, y, degree: int = 4) -> jets.Jet:
    """Jet evaluation; I0-of-radius and log-sum-exp sub-trees are rewritten
    to their numerically robust forms before generic composition."""

    def ev(n):
        if isinstance(n, float):
            return n
        if n == "x":
            return jets.Jet.variable("x", x, degree)
        if n == "y":
            return jets.Jet.variable("y", y, degree)
        op, args = n[0], n[1:]
        if op == "I0" and isinstance(args[0], tuple) and args[0][0] == "*":
            inner = args[0]
            if len(inner) == 3 and isinstance(inner[1], float) and (
                isinstance(inner[2], tuple) and inner[2][0] == "sqrt"
            ):
                mu = inner[1]
                s = ev(inner[2][1])
                return jets.jet_i0_of_r2(s, mu)
        if (
            op == "log"
            and isinstance(args[0], tuple)
            and args[0][0] == "+"
            and len(args[0]) == 3
            and all(isinstance(a, tuple) and a[0] == "exp" for a in args[0][1:])
        ):
            return jets.jet_logaddexp(ev(args[0][1][1]), ev(args[0][2][1]))
        if op == "+":
            out = ev(args[0])
            for a in args[1:]:
                out = out + ev(a)
            return out
        if op == "*":
            out = ev(args[0])
            for a in args[1:]:
                out = out * ev(a)
            return out
        if op == "pow":
            return jets.jet_pow(ev(args[0]), args[1])
        if op == "atan2":
            return jets.jet_atan2(ev(args[0]), ev(args[1]))
        (arg,) = args
        j = ev(arg)
        if not isinstance(j, jets.Jet):
            j = jets.Jet.variable("x", np.zeros(np.shape(x)), degree) * 0.0 + j
        fn = {
            "sin": jets.jet_sin,
            "cos": jets.jet_cos,
            "exp": jets.jet_exp,
            "log": jets.jet_log,
            "tanh": jets.jet_tanh,
            "sinh": jets.jet_sinh,
            "cosh": jets.jet_cosh,
            "erf": jets.jet_erf,
            "sqrt": jets.jet_sqrt,
        }.get(op)
        if fn is None:
            raise ExprError(f"op {op} not supported on jets")
        return fn(j)

    out = ev(node)
    if not isinstance(out, jets.Jet):
        out = jets.Jet.variable("x", np.zeros(np.shape(x)), degree) * 0.0 + out
    return out


# ---------------------------------------------------------------------------
# template matching: expression operand -> Atom
# ---------------------------------------------------------------------------


def _is(node, op):
    return isinstance(node, tuple) and node[0] == op


def _num(node):
    return node if isinstance(node, float) else None


def _match_scaled_var(node, var):
    """("*", k, var) -> k"""
    if _is(node, "*") and len(node) == 3 and isinstance(node[1], float) and node[2] == var:
        return node[1]
    return None


def _match_pi_scaled_var(node, var):
    """("*", k, pi, var) -> k"""
    if (
        _is(node, "*")
        and len(node) == 4
        and isinstance(node[1], float)
        and node[2] == PI
        and node[3] == var
    ):
        return node[1]
    return None


def _match_shift(node, var):
    """("+", var, c) -> -c (the center)"""
    if _is(node, "+") and len(node) == 3 and node[1] == var and isinstance(node[2], float):
        return -node[2]
    return None


def _match_pow_var(node, var, expo):
    return _is(node, "pow") and len(node) == 3 and node[1] == var and node[2] == expo


def _match_s2_origin(node):
    return (
        _is(node, "+")
        and len(node) == 3
        and _match_pow_var(node[1], "x", 2.0)
        and _match_pow_var(node[2], "y", 2.0)
    )


def _match_s2_center(node):
    """returns (cx, cy) or None"""
    if not (_is(node, "+") and len(node) == 3):
        return None
    out = []
    for part, var in zip(node[1:], ("x", "y")):
        if not (_is(part, "pow") and len(part) == 3 and part[2] == 2.0):
            return None
        c = _match_shift(part[1], var)
        if c is None:
            return None
        out.append(c)
    return tuple(out)


def _match_lin2(node):
    if _is(node, "+") and len(node) == 3:
        nx = _match_scaled_var(node[1], "x")
        ny = _match_scaled_var(node[2], "y")
        if nx is not None and ny is not None:
            return nx, ny
    return None


def _match_lin3(node):
    if _is(node, "+") and len(node) == 4 and isinstance(node[3], float):
        nx = _match_scaled_var(node[1], "x")
        ny = _match_scaled_var(node[2], "y")
        if nx is not None and ny is not None:
            return nx, ny, node[3]
    return None


def _match_gaussian(node):
    """("*", a, ("exp", ("*", -w, s2c))) -> (a, w, cx, cy)"""
    if not (_is(node, "*") and len(node) == 3 and isinstance(node[1], float)):
        return None
    e = node[2]
    if not (_is(e, "exp") and _is(e[1], "*") and len(e[1]) == 3 and isinstance(e[1][1], float)):
        return None
    cts = _match_s2_center(e[1][2])
    if cts is None:
        return None
    return (node[1], -e[1][1], cts[0], cts[1])


def _match_unary_fn(node, names):
    """(name, arg) -> (name, arg)"""
    if isinstance(node, tuple) and node[0] in names and len(node) == 2:
        return node[0], node[1]
    return None


def _match_poly_term(node, i, j):
    """Monomial with exponents (i,j) -> coefficient, or None."""
    expected_factors = (1 if i else 0) + (1 if j else 0)
    if expected_factors == 0:
        return _num(node)
    if not (_is(node, "*") and len(node) == 2 + expected_factors):
        return None
    if not isinstance(node[1], float):
        return None
    factors = list(node[2:])
    for count, var in ((i, "x"), (j, "y")):
        if count == 0:
            continue
        f = factors.pop(0)
        if count == 1:
            if f != var:
                return None
        elif not _match_pow_var(f, var, float(count)):
            return None
    return node[1]


def match_atom(node) -> Atom:
    """Reconstruct the Atom from its canonical operand expression."""
    # sum-shaped operands: poly, h_linear, multi_rbf
    if _is(node, "+"):
        if len(node) == 11:
            coeffs = [_match_poly_term(t, i, j) for t, (i, j) in zip(node[1:], _POLY_EXPONENTS)]
            if all(c is not None for c in coeffs):
                return Atom("poly", tuple(coeffs))
        if len(node) == 3:
            lin = _match_lin2(node)
            if lin is not None:
                return Atom("h_linear", lin)
        gs = [_match_gaussian(t) for t in node[1:]]
        if 2 <= len(gs) <= 4 and all(g is not None for g in gs):
            params = [float(len(gs))]
            for g in gs:
                params.extend(g)
            return Atom("multi_rbf", tuple(params))
        raise ExprError("unmatched sum-shaped operand")

    if not (_is(node, "*") and len(node) >= 3 and isinstance(node[1], float)):
        raise ExprError("operand is not an amplitude-scaled product")
    a = node[1]
    rest = node[2:]

    if len(rest) == 1:
        (body,) = rest
        if _is(body, "sin"):
            k = _match_pi_scaled_var(body[1], "x")
            if k is not None:
                return Atom("trig", (a, k))
        if _is(body, "exp"):
            inner = body[1]
            b = _match_scaled_var(inner, "x")
            if b is not None:
                return Atom("exp", (a, b))
            g = _match_gaussian(node)
            if g is not None:
                kind = "gaussian_bump" if g[1] < 5.0 else "narrow_bump"
                return Atom(kind, g)
        if _is(body, "log"):
            inner = body[1]
            if (
                _is(inner, "+")
                and len(inner) == 3
                and _match_pow_var(inner[1], "x", 2.0)
                and inner[2] == 0.01
            ):
                return Atom("log", (a,))
            if _is(inner, "sqrt"):
                cts = _match_s2_center(inner[1])
                if cts is not None:
                    return Atom("log_source", (a, *cts))
            if (
                _is(inner, "+")
                and len(inner) == 3
                and _is(inner[1], "exp")
                and _is(inner[2], "exp")
            ):
                b = _match_scaled_var(inner[1][1], "x")
                c = _match_scaled_var(inner[2][1], "y")
                if b is not None and c is not None:
                    return Atom("logsumexp", (a, b, c))
        if isinstance(body, tuple) and body[0] in ("sinh", "cosh", "tanh") and body[1] == "x":
            return Atom("hyper", (a,), variant=("sinh", "cosh", "tanh").index(body[0]))
        if _is(body, "erf") and body[1] == "x":
            return Atom("special", (a,), variant=0)
        if _is(body, "sqrt"):
            inner = body[1]
            if (
                _is(inner, "+")
                and len(inner) == 3
                and _match_pow_var(inner[1], "x", 2.0)
                and inner[2] == 0.1
            ):
                return Atom("special", (a,), variant=1)
        if _is(body, "cos") and _is(body[1], "*") and len(body[1]) == 3:
            k = _num(body[1][1])
            lin = _match_lin2(body[1][2])
            if k is not None and lin is not None:
                return Atom("plane_wave", (a, k, *lin))
        if _is(body, "I0"):
            inner = body[1]
            if (
                _is(inner, "*")
                and len(inner) == 3
                and isinstance(inner[1], float)
                and _is(inner[2], "sqrt")
                and _match_s2_origin(inner[2][1])
            ):
                return Atom("yukawa_i0", (a, inner[1]))
        if _is(body, "pow") and len(body) == 3 and body[2] == -1.0:
            d = body[1]
            if (
                _is(d, "+")
                and len(d) == 4
                and d[1] == 1.0
                and _is(d[2], "*")
                and _is(d[3], "*")
            ):
                b = (
                    d[2][1]
                    if len(d[2]) == 3 and isinstance(d[2][1], float) and _match_pow_var(d[2][2], "x", 2.0)
                    else None
                )
                c = (
                    d[3][1]
                    if len(d[3]) == 3 and isinstance(d[3][1], float) and _match_pow_var(d[3][2], "y", 2.0)
                    else None
                )
                if b is not None and c is not None:
                    return Atom("rational", (a, b, c))
        if _is(body, "tanh") and _is(body[1], "*") and len(body[1]) == 3:
            k = _num(body[1][1])
            lin = _match_lin3(body[1][2])
            if k is not None and lin is not None:
                return Atom("sharp_transition", (a, k, lin[0], lin[1], -lin[2]))
        if _is(body, "atan2"):
            l2 = _match_lin3(body[1])
            l1 = _match_lin3(body[2])
            if l1 is not None and l2 is not None:
                return Atom("h_arctan", (a, l1[0], l1[1], l1[2], l2[0], l2[1], l2[2]))
        if _is(body, "+") and len(body) == 3 and _is(body[1], "pow") and _is(body[2], "*"):
            u = _match_lin2(body[1][1])
            neg = body[2]
            if (
                u is not None
                and body[1][2] == 2.0
                and len(neg) == 3
                and neg[1] == -1.0
                and _is(neg[2], "pow")
                and neg[2][2] == 2.0
            ):
                w = _match_lin2(neg[2][1])
                if w is not None and u[0] == w[1] and u[1] == -w[0]:
                    return Atom("h_quadratic", (a, u[0], u[1]), variant=0)

    if len(rest) == 2:
        b1, b2 = rest
        if b1 == "x" and b2 == "y":
            return Atom("h_bilinear", (a,))
        if isinstance(b1, float) and b1 == 0.5 and _is(b2, "log"):
            cts = _match_s2_center(b2[1])
            if cts is not None:
                return Atom("h_log_source", (a, *cts))
        if _is(b1, "pow") and _is(b1[1], "sqrt") and _match_s2_origin(b1[1][1]) and _is(b2, "cos"):
            n = _num(b1[2])
            inner = b2[1]
            if (
                n is not None
                and _is(inner, "*")
                and len(inner) == 3
                and inner[1] == n
                and _is(inner[2], "atan2")
            ):
                return Atom("harmonic_polar", (a, n))
        if _is(b1, "pow") and _match_s2_origin(b1[1]) and isinstance(b1[2], float):
            n = 2.0 * b1[2]
            trig = _match_unary_fn(b2, ("cos", "sin"))
            if trig is not None and _is(trig[1], "*") and trig[1][1] == n:
                kind = "h_polar" if n <= 6.0 else "h_high_n_polar"
                return Atom(kind, (a, n), variant=0 if trig[0] == "cos" else 1)
        if _is(b1, "exp"):
            k = _match_scaled_var(b1[1], "x")
            trig = _match_unary_fn(b2, ("cos", "sin"))
            if k is not None and trig is not None:
                ky = _match_scaled_var(trig[1], "y")
                if ky == k:
                    kind = "h_exp_trig" if abs(k) <= 3.5 else "h_high_freq_exp_trig"
                    return Atom(kind, (a, k), variant=0 if trig[0] == "cos" else 1)
        if _is(b1, "sin") or _is(b1, "cos"):
            kx = _match_pi_scaled_var(b1[1], "x") if b1[0] == "sin" else None
            if kx is not None and _is(b2, "cos"):
                ky = _match_pi_scaled_var(b2[1], "y")
                if ky is not None:
                    kind = "very_high_freq_trig" if min(kx, ky) >= 6.0 else "high_freq_trig"
                    return Atom(kind, (a, kx, ky))
            hyp = _match_unary_fn(b2, ("sinh", "cosh"))
            if hyp is not None:
                kx = _match_scaled_var(b1[1], "x")
                ky = _match_scaled_var(hyp[1], "y")
                if kx is not None and kx == ky:
                    variant = ("ss", "sc", "cs", "cc").index(
                        ("s" if b1[0] == "sin" else "c") + ("s" if hyp[0] == "sinh" else "c")
                    )
                    return Atom("h_trig_hyp", (a, kx), variant=variant)
        f1 = _match_unary_fn(b1, ("sin", "cos", "tanh"))
        f2 = _match_unary_fn(b2, ("sin", "cos", "tanh"))
        if f1 is not None and f2 is not None:
            k1 = _match_scaled_var(f1[1], "x")
            k2 = _match_scaled_var(f2[1], "y")
            if k1 is not None and k2 is not None:
                order = ("sin", "cos", "tanh")
                return Atom(
                    "product", (a, k1, k2), variant=order.index(f1[0]) * 3 + order.index(f2[0])
                )
        if _is(b1, "pow") and _is(b2, "pow") and b1[2] == -2.0 and b2[2] == -2.0:
            c1 = _match_unary_fn(b1[1], ("cosh",))
            c2 = _match_unary_fn(b2[1], ("cosh",))
            if c1 and c2 and _is(c1[1], "*") and _is(c2[1], "*"):
                b = _num(c1[1][1])
                c = _num(c2[1][1])
                x0 = _match_shift(c1[1][2], "x")
                y0 = _match_shift(c2[1][2], "y")
                if None not in (b, c, x0, y0):
                    return Atom("sech_bump", (a, b, c, x0, y0))
        x0 = _match_shift(b1, "x")
        if x0 is not None and _is(b2, "pow") and b2[2] == -1.0:
            cts = _match_s2_center(b2[1])
            if cts is not None and cts[0] == x0:
                return Atom("h_inversion", (a, *cts))
        if _is(b1, "+") and _is(b2, "pow") and b2[2] == -2.0:
            cts = _match_s2_center(b2[1])
            if (
                cts is not None
                and len(b1) == 3
                and _is(b1[1], "pow")
                and b1[1][2] == 2.0
                and _is(b1[2], "*")
                and b1[2][1] == -1.0
            ):
                return Atom("h_dipole", (a, *cts))

    if len(rest) == 3 and isinstance(rest[0], float) and rest[0] == 2.0:
        u = _match_lin2(rest[1])
        w = _match_lin2(rest[2])
        if u is not None and w is not None and u[0] == w[1] and u[1] == -w[0]:
            return Atom("h_quadratic", (a, u[0], u[1]), variant=1)

    raise ExprError("operand matched no atom template")


def solution_from_expr(node) -> Solution:
    if not _is(node, "+"):
        raise ExprError("solution expression must be a top-level sum")
    return Solution(tuple(match_atom(op) for op in node[1:]))


def solution_to_string(sol: Solution) -> str:
    return to_string(solution_to_expr(sol))


def solution_from_string(text: str) -> Solution:
    return solution_from_expr(parse(text))
