"""Immutable symbolic expressions in one spatial variable.

Nodes are value types: once built they never change, so subtrees can be
shared freely between expressions.  The factory helpers (:func:`add`,
:func:`mul`, ...) fold constants, drop algebraic no-ops, collect like terms
and powers at construction time, and intern structurally identical nodes.
That keeps the trees produced by repeated differentiation compact: shared
subgraphs stay shared instead of being copied.  Building nodes through the
class constructors directly is also supported; :func:`simplify` brings such
trees to the same normal form.

Evaluation is strict IEEE double arithmetic.  Named constants stay symbolic
until bound through :class:`Bindings`.
"""

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

__all__ = [
    "Expr", "Constant", "NamedConstant", "Variable", "Negate", "Add",
    "Multiply", "Divide", "Power", "Apply", "Bindings", "X", "FUNCTIONS",
    "ExprError", "ParseError", "UnknownFunctionError", "EvaluationError",
    "UnboundConstantError", "DomainError",
    "const", "named", "neg", "add", "mul", "div", "power", "apply_fn",
    "parse", "to_text", "evaluate", "evaluate_many", "differentiate",
    "simplify", "named_constants", "node_count", "clear_caches",
]

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "ln", "sqrt")


class ExprError(Exception):
    """Invalid expression construction or use."""


class ParseError(ExprError):
    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        detail = f"syntax error at byte {offset}: {message}"
        if expected is not None:
            detail += f" (expected {expected})"
        super().__init__(detail)


class UnknownFunctionError(ParseError):
    def __init__(self, name, offset):
        self.name = name
        ParseError.__init__(self, f"unknown function '{name}'", offset)


class EvaluationError(ExprError):
    """Evaluation could not produce a finite double."""


class UnboundConstantError(EvaluationError):
    pass


class DomainError(EvaluationError):
    pass


class Expr:
    """Base class for all expression nodes."""

    __slots__ = ("children", "_hash")

    def __setattr__(self, name, value):
        raise ExprError("expression nodes are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        # Iterative structural comparison; tolerates deep shared graphs.
        stack = [(self, other)]
        seen = set()
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            key = (id(a), id(b))
            if key in seen:
                continue
            seen.add(key)
            if type(a) is not type(b) or a._hash != b._hash:
                return False
            if a._payload() != b._payload():
                return False
            if len(a.children) != len(b.children):
                return False
            stack.extend(zip(a.children, b.children))
        return True

    def __hash__(self):
        return self._hash

    def _payload(self):
        return ()

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"<{type(self).__name__} {to_text(self)}>"

    # Arithmetic sugar; everything routes through the folding factories.
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(_as_expr(other)))

    def __rsub__(self, other):
        return add(_as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _as_expr(other))

    def __rtruediv__(self, other):
        return div(_as_expr(other), self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __neg__(self):
        return neg(self)


def _init(node, **attrs):
    for name, value in attrs.items():
        object.__setattr__(node, name, value)
    return node


class Constant(Expr):
    __slots__ = ("value",)

    def __new__(cls, value):
        value = float(value)
        if not math.isfinite(value):
            raise ExprError(f"constant must be finite, got {value!r}")
        return _init(object.__new__(cls), value=value, children=(),
                     _hash=hash(("C", value)))

    def _payload(self):
        return (self.value,)


class NamedConstant(Expr):
    __slots__ = ("name",)

    def __new__(cls, name):
        if not name or not isinstance(name, str):
            raise ExprError("named constant needs a non-empty name")
        if name == "x":
            raise ExprError("'x' is the variable, not a named constant")
        return _init(object.__new__(cls), name=name, children=(),
                     _hash=hash(("N", name)))

    def _payload(self):
        return (self.name,)


class Variable(Expr):
    __slots__ = ()

    def __new__(cls):
        return _init(object.__new__(cls), children=(), _hash=hash(("X",)))


class Negate(Expr):
    __slots__ = ()

    def __new__(cls, child):
        child = _as_expr(child)
        return _init(object.__new__(cls), children=(child,),
                     _hash=hash(("-", child._hash)))


class Add(Expr):
    __slots__ = ()

    def __new__(cls, children):
        kids = tuple(_as_expr(c) for c in children)
        if len(kids) < 2:
            raise ExprError("Add needs at least two children")
        return _init(object.__new__(cls), children=kids,
                     _hash=hash(("+",) + tuple(c._hash for c in kids)))


class Multiply(Expr):
    __slots__ = ()

    def __new__(cls, children):
        kids = tuple(_as_expr(c) for c in children)
        if len(kids) < 2:
            raise ExprError("Multiply needs at least two children")
        return _init(object.__new__(cls), children=kids,
                     _hash=hash(("*",) + tuple(c._hash for c in kids)))


class Divide(Expr):
    __slots__ = ()

    def __new__(cls, numerator, denominator):
        numerator = _as_expr(numerator)
        denominator = _as_expr(denominator)
        if isinstance(denominator, Constant) and denominator.value == 0.0:
            raise ExprError("denominator is the literal constant 0")
        return _init(object.__new__(cls), children=(numerator, denominator),
                     _hash=hash(("/", numerator._hash, denominator._hash)))


class Power(Expr):
    """Base raised to a fixed numeric exponent (int or real)."""

    __slots__ = ("exponent",)

    def __new__(cls, base, exponent):
        base = _as_expr(base)
        if isinstance(exponent, bool) or not isinstance(exponent, (int, float)):
            raise ExprError("exponent must be an int or float")
        if isinstance(exponent, float) and not math.isfinite(exponent):
            raise ExprError("exponent must be finite")
        return _init(object.__new__(cls), children=(base,), exponent=exponent,
                     _hash=hash(("^", base._hash, float(exponent))))

    def _payload(self):
        return (float(self.exponent),)


class Apply(Expr):
    """One of the built-in functions applied to a subexpression."""

    __slots__ = ("name",)

    def __new__(cls, name, argument):
        if name not in FUNCTIONS:
            raise ExprError(f"unknown function '{name}'")
        argument = _as_expr(argument)
        return _init(object.__new__(cls), name=name, children=(argument,),
                     _hash=hash(("f", name, argument._hash)))

    def _payload(self):
        return (self.name,)


X = Variable()


def _as_expr(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, bool):
        raise ExprError("cannot treat a bool as an expression")
    if isinstance(v, (int, float)):
        return const(v)
    raise ExprError(f"cannot treat {v!r} as an expression")


# ---------------------------------------------------------------------------
# Interning.  Structurally identical factory-built nodes are the same object.
# Keys hold child ids; the stored node keeps those children alive, so ids
# cannot be recycled while an entry exists.

_INTERN = {}


def _interned(key, build):
    node = _INTERN.get(key)
    if node is None:
        node = build()
        _INTERN[key] = node
    return node


def const(value):
    value = float(value)
    return _interned(("C", value), lambda: Constant(value))


def named(name):
    return _interned(("N", name), lambda: NamedConstant(name))


def neg(e):
    e = _as_expr(e)
    if isinstance(e, Constant):
        return const(-e.value)
    if isinstance(e, Negate):
        return e.children[0]
    if isinstance(e, Multiply) and isinstance(e.children[0], Constant):
        # Fold the sign into the leading coefficient so each value has one
        # canonical spelling (mul() and parse() produce this form already).
        return mul(const(-e.children[0].value), *e.children[1:])
    return _interned(("-", id(e)), lambda: Negate(e))


def _split_term(t):
    """Term -> (numeric coefficient, tuple of non-constant factors)."""
    coeff = 1.0
    while isinstance(t, Negate):
        coeff = -coeff
        t = t.children[0]
    if isinstance(t, Constant):
        return coeff * t.value, ()
    if isinstance(t, Multiply):
        core = []
        for f in t.children:
            if isinstance(f, Constant):
                coeff *= f.value
            else:
                core.append(f)
        return coeff, tuple(core)
    return coeff, (t,)


def _remul(coeff, core):
    if not core:
        return const(coeff)
    if len(core) == 1:
        body = core[0]
    else:
        body = _interned(("*",) + tuple(map(id, core)), lambda: Multiply(core))
    if coeff == 1.0:
        return body
    if coeff == -1.0:
        return neg(body)
    parts = (const(coeff),) + core
    return _interned(("*",) + tuple(map(id, parts)), lambda: Multiply(parts))


def _raw_nary(tag, cls, kids):
    return _interned((tag,) + tuple(map(id, kids)), lambda: cls(kids))


def add(*terms):
    """Sum with constant folding, zero dropping, and like-term collection."""
    flat = []
    for t in terms:
        t = _as_expr(t)
        if isinstance(t, Add):
            flat.extend(t.children)
        else:
            flat.append(t)
    total = 0.0
    groups = {}
    order = []
    for t in flat:
        coeff, core = _split_term(t)
        if not core:
            total += coeff
            continue
        key = tuple(map(id, core))
        if key in groups:
            groups[key][0] += coeff
        else:
            groups[key] = [coeff, core]
            order.append(key)
    if not math.isfinite(total) or any(not math.isfinite(groups[k][0]) for k in order):
        # Folding overflowed; keep the sum unmerged so evaluation reports it.
        return _raw_nary("+", Add, tuple(flat)) if len(flat) > 1 else flat[0]
    out = []
    if total != 0.0:
        out.append(const(total))
    for key in order:
        coeff, core = groups[key]
        if coeff == 0.0:
            continue
        out.append(_remul(coeff, core))
    if not out:
        return const(0.0)
    if len(out) == 1:
        return out[0]
    return _raw_nary("+", Add, tuple(out))


def mul(*factors):
    """Product with constant folding, zero annihilation, and power collection."""
    flat = []
    for f in factors:
        f = _as_expr(f)
        if isinstance(f, Multiply):
            flat.extend(f.children)
        else:
            flat.append(f)
    coeff = 1.0
    groups = {}
    order = []
    for f in flat:
        while isinstance(f, Negate):
            coeff = -coeff
            f = f.children[0]
        if isinstance(f, Constant):
            coeff *= f.value
            continue
        if isinstance(f, Power) and not isinstance(f.children[0], Constant):
            base, exp = f.children[0], f.exponent
        else:
            base, exp = f, 1
        key = id(base)
        if key in groups:
            groups[key][1] += exp
        else:
            groups[key] = [base, exp]
            order.append(key)
    if not math.isfinite(coeff):
        return _raw_nary("*", Multiply, tuple(flat)) if len(flat) > 1 else flat[0]
    if coeff == 0.0:
        return const(0.0)
    core = []
    for key in order:
        base, exp = groups[key]
        if exp == 0:
            continue
        core.append(base if exp == 1 else power(base, exp))
    return _remul(coeff, tuple(core))


def div(numerator, denominator):
    numerator = _as_expr(numerator)
    denominator = _as_expr(denominator)
    if isinstance(denominator, Constant):
        if denominator.value == 0.0:
            raise ExprError("denominator is the literal constant 0")
        if isinstance(numerator, Constant):
            folded = _finite_or_none(numerator.value / denominator.value)
            if folded is not None:
                return const(folded)
        if denominator.value == 1.0:
            return numerator
    if isinstance(numerator, Constant) and numerator.value == 0.0:
        return const(0.0)
    return _interned(("/", id(numerator), id(denominator)),
                     lambda: Divide(numerator, denominator))


def power(base, exponent):
    base = _as_expr(base)
    if isinstance(exponent, bool) or not isinstance(exponent, (int, float)):
        raise ExprError("exponent must be an int or float")
    if isinstance(exponent, float):
        if not math.isfinite(exponent):
            raise ExprError("exponent must be finite")
        if exponent.is_integer() and abs(exponent) <= 2**53:
            exponent = int(exponent)
    if isinstance(base, Constant):
        folded = _try_pow(base.value, exponent)
        if folded is not None:
            return const(folded)
    if exponent == 1:
        return base
    if exponent == 0 and not (isinstance(base, Constant) and base.value == 0.0):
        return const(1.0)
    return _interned(("^", id(base), float(exponent), type(exponent) is int),
                     lambda: Power(base, exponent))


def apply_fn(name, argument):
    argument = _as_expr(argument)
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function '{name}'")
    if isinstance(argument, Constant):
        try:
            folded = _finite_or_none(_FUNC_IMPL[name](argument.value))
        except (ValueError, OverflowError):
            folded = None
        if folded is not None:
            return const(folded)
    return _interned(("f", name, id(argument)), lambda: Apply(name, argument))


def _finite_or_none(v):
    return v if math.isfinite(v) else None


def _try_pow(base_value, exponent):
    try:
        if isinstance(exponent, int):
            v = base_value ** exponent
        else:
            v = math.pow(base_value, exponent)
    except (ValueError, OverflowError, ZeroDivisionError):
        return None
    return _finite_or_none(v)


_FUNC_IMPL = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan,
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
    "exp": math.exp, "ln": math.log, "sqrt": math.sqrt,
}

_FUNC_IMPL_NP = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "ln": np.log, "sqrt": np.sqrt,
}


# ---------------------------------------------------------------------------
# Traversal.  All walks are iterative with per-id memoisation so that deep,
# heavily shared graphs cost one visit per unique node.

def _fold_dag(root, visit):
    stack = [root]
    memo = {}
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        pending = [c for c in node.children if id(c) not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[id(node)] = visit(node, [memo[id(c)] for c in node.children])
    return memo[id(root)]


def _unique_nodes(root):
    stack = [root]
    seen = {}
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen[id(node)] = node
        stack.extend(node.children)
    return seen


def node_count(e):
    """Number of unique nodes in the graph (shared subtrees counted once)."""
    return len(_unique_nodes(e))


def named_constants(e):
    """Names of all named constants reachable from e."""
    return frozenset(n.name for n in _unique_nodes(e).values()
                     if isinstance(n, NamedConstant))


@dataclass(frozen=True)
class Bindings:
    """Values for the variable and for named constants."""

    x: float | None = None
    constants: Mapping[str, float] = field(default_factory=dict)

    def with_x(self, x):
        return Bindings(float(x), self.constants)


def _describe(node, limit=60):
    text = to_text(node)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def evaluate(e, b):
    """Evaluate to an IEEE double under the given bindings.

    Raises UnboundConstantError for free names without values and DomainError
    when an operation leaves the reals or the result is not finite.
    """

    def visit(node, kids):
        if isinstance(node, Constant):
            return node.value
        if isinstance(node, Variable):
            if b.x is None:
                raise UnboundConstantError("no value bound for x")
            return b.x
        if isinstance(node, NamedConstant):
            try:
                return float(b.constants[node.name])
            except KeyError:
                raise UnboundConstantError(
                    f"no value bound for constant '{node.name}'") from None
        if isinstance(node, Negate):
            return -kids[0]
        if isinstance(node, Add):
            acc = kids[0]
            for v in kids[1:]:
                acc += v
            return acc
        if isinstance(node, Multiply):
            acc = kids[0]
            for v in kids[1:]:
                acc *= v
            return acc
        if isinstance(node, Divide):
            if kids[1] == 0.0:
                raise DomainError(f"division by zero in '{_describe(node)}'")
            return kids[0] / kids[1]
        if isinstance(node, Power):
            try:
                if isinstance(node.exponent, int):
                    return kids[0] ** node.exponent
                return math.pow(kids[0], node.exponent)
            except ZeroDivisionError:
                raise DomainError(
                    f"zero raised to a negative power in '{_describe(node)}'") from None
            except (ValueError, OverflowError) as exc:
                raise DomainError(
                    f"invalid power of {kids[0]!r} in '{_describe(node)}': {exc}") from None
        if isinstance(node, Apply):
            try:
                return _FUNC_IMPL[node.name](kids[0])
            except (ValueError, OverflowError) as exc:
                raise DomainError(
                    f"{node.name} of {kids[0]!r} in '{_describe(node)}': {exc}") from None
        raise ExprError(f"cannot evaluate {type(node).__name__}")

    result = _fold_dag(e, visit)
    if not math.isfinite(result):
        raise DomainError(f"result of '{_describe(e)}' is not finite")
    return result


def evaluate_many(e, xs, constants=None):
    """Evaluate over a whole array of x values in one vectorised pass.

    Intermediate arrays are freed as soon as no remaining node needs them,
    so peak memory tracks the live frontier rather than the full graph.
    """
    xs = np.asarray(xs, dtype=float)
    constants = constants or {}

    # Topological order, children before parents.
    order = []
    state = {}
    stack = [e]
    while stack:
        node = stack[-1]
        mark = state.get(id(node), 0)
        if mark == 2:
            stack.pop()
            continue
        if mark == 0:
            state[id(node)] = 1
            stack.extend(c for c in node.children if state.get(id(c), 0) != 2)
            continue
        state[id(node)] = 2
        order.append(node)
        stack.pop()

    last_use = {}
    for i, node in enumerate(order):
        for c in node.children:
            last_use[id(c)] = i

    out = {}
    with np.errstate(divide="raise", invalid="raise", over="raise"):
        for i, node in enumerate(order):
            kids = [out[id(c)] for c in node.children]
            try:
                if isinstance(node, Constant):
                    v = node.value
                elif isinstance(node, Variable):
                    v = xs
                elif isinstance(node, NamedConstant):
                    if node.name not in constants:
                        raise UnboundConstantError(
                            f"no value bound for constant '{node.name}'")
                    v = float(constants[node.name])
                elif isinstance(node, Negate):
                    v = -kids[0]
                elif isinstance(node, Add):
                    acc = kids[0]
                    for k in kids[1:]:
                        acc = acc + k
                    v = acc
                elif isinstance(node, Multiply):
                    acc = kids[0]
                    for k in kids[1:]:
                        acc = acc * k
                    v = acc
                elif isinstance(node, Divide):
                    v = kids[0] / kids[1]
                elif isinstance(node, Power):
                    v = np.power(kids[0], node.exponent)
                elif isinstance(node, Apply):
                    v = _FUNC_IMPL_NP[node.name](kids[0])
                else:
                    raise ExprError(f"cannot evaluate {type(node).__name__}")
            except (FloatingPointError, ZeroDivisionError, ValueError,
                    OverflowError) as exc:
                raise DomainError(
                    f"domain violation in '{_describe(node)}': {exc}") from None
            out[id(node)] = v
            for c in node.children:
                if last_use.get(id(c)) == i and c is not e:
                    del out[id(c)]
    result = out[id(e)]
    if np.ndim(result) == 0:
        return np.full(xs.shape, float(result))
    return np.asarray(result, dtype=float)


# ---------------------------------------------------------------------------
# Differentiation with respect to x.

_DERIV_CACHE = {}


def differentiate(e, order=1):
    """Derivative d^order/dx^order as a new expression."""
    if isinstance(order, bool) or not isinstance(order, int) or order < 1:
        raise ExprError(f"derivative order must be a positive int, got {order!r}")
    for _ in range(order):
        e = _d1(e)
    return e


def _d1(root):
    stack = [root]
    memo = {}
    while stack:
        node = stack[-1]
        nid = id(node)
        if nid in memo:
            stack.pop()
            continue
        hit = _DERIV_CACHE.get(nid)
        if hit is not None and hit[0] is node:
            memo[nid] = hit[1]
            stack.pop()
            continue
        pending = [c for c in node.children if id(c) not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        d = _d1_node(node, [memo[id(c)] for c in node.children])
        _DERIV_CACHE[nid] = (node, d)
        memo[nid] = d
    return memo[id(root)]


def _d1_node(node, dk):
    if isinstance(node, (Constant, NamedConstant)):
        return const(0.0)
    if isinstance(node, Variable):
        return const(1.0)
    if isinstance(node, Negate):
        return neg(dk[0])
    if isinstance(node, Add):
        return add(*dk)
    if isinstance(node, Multiply):
        kids = node.children
        return add(*(mul(*kids[:i], d, *kids[i + 1:]) for i, d in enumerate(dk)))
    if isinstance(node, Divide):
        u, v = node.children
        du, dv = dk
        return div(add(mul(du, v), neg(mul(u, dv))), power(v, 2))
    if isinstance(node, Power):
        base = node.children[0]
        p = node.exponent
        return mul(const(p), power(base, p - 1), dk[0])
    if isinstance(node, Apply):
        u = node.children[0]
        du = dk[0]
        name = node.name
        if name == "sin":
            return mul(apply_fn("cos", u), du)
        if name == "cos":
            return neg(mul(apply_fn("sin", u), du))
        if name == "tan":
            return mul(add(const(1.0), power(node, 2)), du)
        if name == "sinh":
            return mul(apply_fn("cosh", u), du)
        if name == "cosh":
            return mul(apply_fn("sinh", u), du)
        if name == "tanh":
            return mul(add(const(1.0), neg(power(node, 2))), du)
        if name == "exp":
            return mul(node, du)
        if name == "ln":
            return div(du, u)
        if name == "sqrt":
            return div(du, mul(const(2.0), node))
    raise ExprError(f"cannot differentiate {type(node).__name__}")


# ---------------------------------------------------------------------------
# Simplification.  Deliberately weaker than the construction factories: only
# rewrites that cannot change IEEE rounding behaviour are applied, so the
# simplified tree evaluates bit-identically wherever the original is defined.
# (The factories additionally collect like terms and powers, which is exact
# algebra but can shift rounding; that is fine for freshly built trees and
# wrong for a function that promises not to perturb values.)

_SIMPLIFY_CACHE = {}


def _is_zero(e):
    return isinstance(e, Constant) and e.value == 0.0


def _is_one(e):
    return isinstance(e, Constant) and e.value == 1.0


def _merge_leading_constants(kids, combine, unit):
    """Left-fold the run of leading constants; exact because evaluation
    folds left too."""
    run = 0
    acc = unit
    while run < len(kids) and isinstance(kids[run], Constant):
        acc = combine(acc, kids[run].value)
        run += 1
    if run < 2 or not math.isfinite(acc):
        return kids
    return (const(acc),) + tuple(kids[run:])


def simplify(e):
    """Drop algebraic no-ops and fold constant subtrees.

    Applies constant folding, 0*a -> 0, 1*a -> a, a+0 -> a, a^1 -> a,
    a^0 -> 1 (a not the literal 0), double-negation removal, and flattening
    of nested sums and products.  Child order is preserved, so the result
    evaluates identically to the input at every point where the input is
    defined.
    """

    def visit(node, kids):
        nid = id(node)
        hit = _SIMPLIFY_CACHE.get(nid)
        if hit is not None and hit[0] is node:
            return hit[1]
        if isinstance(node, (Constant, NamedConstant, Variable)):
            s = node
        elif isinstance(node, Negate):
            s = neg(kids[0])
        elif isinstance(node, Add):
            flat = []
            for c in kids:
                flat.extend(c.children if isinstance(c, Add) else (c,))
            flat = [c for c in flat if not _is_zero(c)]
            flat = _merge_leading_constants(flat, lambda a, v: a + v, 0.0)
            if not flat:
                s = const(0.0)
            elif len(flat) == 1:
                s = flat[0]
            else:
                s = _raw_nary("+", Add, tuple(flat))
        elif isinstance(node, Multiply):
            flat = []
            for c in kids:
                flat.extend(c.children if isinstance(c, Multiply) else (c,))
            if any(_is_zero(c) for c in flat):
                s = const(0.0)
            else:
                flat = [c for c in flat if not _is_one(c)]
                flat = _merge_leading_constants(flat, lambda a, v: a * v, 1.0)
                if not flat:
                    s = const(1.0)
                elif len(flat) == 1:
                    s = flat[0]
                else:
                    s = _raw_nary("*", Multiply, tuple(flat))
        elif isinstance(node, Divide):
            num, den = kids
            if isinstance(den, Constant) and den.value == 0.0:
                # Folded denominator hit zero; keep the original denominator
                # so the error still surfaces at evaluation time.
                keep = node.children[1]
                s = _interned(("/", id(num), id(keep)), lambda: Divide(num, keep))
            elif isinstance(num, Constant) and isinstance(den, Constant):
                folded = _finite_or_none(num.value / den.value)
                s = const(folded) if folded is not None else \
                    _interned(("/", id(num), id(den)), lambda: Divide(num, den))
            elif _is_one(den):
                s = num
            else:
                s = _interned(("/", id(num), id(den)), lambda: Divide(num, den))
        elif isinstance(node, Power):
            base = kids[0]
            exp = node.exponent
            if isinstance(base, Constant):
                folded = _try_pow(base.value, exp)
                s = const(folded) if folded is not None else \
                    _interned(("^", id(base), float(exp), type(exp) is int),
                              lambda: Power(base, exp))
            elif exp == 1:
                s = base
            elif exp == 0:
                s = const(1.0)
            else:
                s = _interned(("^", id(base), float(exp), type(exp) is int),
                              lambda: Power(base, exp))
        elif isinstance(node, Apply):
            s = apply_fn(node.name, kids[0])
        else:
            raise ExprError(f"cannot simplify {type(node).__name__}")
        _SIMPLIFY_CACHE[nid] = (node, s)
        return s

    return _fold_dag(e, visit)


def clear_caches():
    """Drop interned nodes and memoised derivatives (mainly for tests)."""
    _INTERN.clear()
    _DERIV_CACHE.clear()
    _SIMPLIFY_CACHE.clear()


# ---------------------------------------------------------------------------
# Printing.  Output reparses to a tree with identical evaluation; for
# factory-built trees the reparse returns the very same interned nodes.

_PREC_ADD = 10
_PREC_NEG = 20
_PREC_MUL = 30
_PREC_POW = 40
_PREC_ATOM = 100


def _negative_product(node):
    return (
        isinstance(node, Multiply)
        and isinstance(node.children[0], Constant)
        and node.children[0].value < 0
    )


def _constant_text(value):
    # integral values print without a trailing ".0"; the cutoff keeps the
    # integer form exact (and short) in double precision
    if value.is_integer() and abs(value) <= 2.0 ** 53:
        return repr(int(value))
    return repr(value)


def to_text(e):
    def visit(node, kids):
        # each child entry is (text, that child's own precedence)
        def wrap(i, minimum):
            text, prec = kids[i]
            return f"({text})" if prec < minimum else text

        if isinstance(node, Constant):
            prec = _PREC_ATOM if node.value >= 0 else _PREC_NEG
            return _constant_text(node.value), prec
        if isinstance(node, NamedConstant):
            return node.name, _PREC_ATOM
        if isinstance(node, Variable):
            return "x", _PREC_ATOM
        if isinstance(node, Apply):
            return f"{node.name}({kids[0][0]})", _PREC_ATOM
        if isinstance(node, Negate):
            # quotients and products must stay grouped under the minus sign
            return "-" + wrap(0, _PREC_MUL + 1), _PREC_NEG
        if isinstance(node, Add):
            parts = [wrap(0, _PREC_ADD)]
            for i, c in enumerate(node.children[1:], start=1):
                text, _ = kids[i]
                if isinstance(c, Negate) or _negative_product(c):
                    # child text is "-<inner>"; render as subtraction
                    parts.append(" - " + text[1:])
                elif isinstance(c, Constant) and c.value < 0:
                    parts.append(" - " + _constant_text(-c.value))
                else:
                    parts.append(" + " + wrap(i, _PREC_ADD + 1))
            return "".join(parts), _PREC_ADD
        if isinstance(node, Multiply):
            if _negative_product(node):
                # let the coefficient's sign lead: "-2.0 * x", not "(-2.0) * x"
                parts = [kids[0][0]]
                prec = _PREC_NEG
            else:
                parts = [wrap(0, _PREC_MUL)]
                prec = _PREC_MUL
            for i in range(1, len(node.children)):
                parts.append(" * " + wrap(i, _PREC_MUL + 1))
            return "".join(parts), prec
        if isinstance(node, Divide):
            return f"{wrap(0, _PREC_MUL)} / {wrap(1, _PREC_MUL + 1)}", _PREC_MUL
        if isinstance(node, Power):
            exp = node.exponent
            exp_text = repr(exp) if exp >= 0 else f"({exp!r})"
            return f"{wrap(0, _PREC_POW + 1)} ^ {exp_text}", _PREC_POW
        raise ExprError(f"cannot print {type(node).__name__}")

    text, _ = _fold_dag(e, visit)
    return text


# ---------------------------------------------------------------------------
# Parsing.

_NUM_START = set("0123456789.")
_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_BODY = _IDENT_START | set("0123456789")


def _byte_offset(text, index):
    return len(text[:index].encode("utf-8"))


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch, _byte_offset(text, i)))
            i += 1
            continue
        if ch in _NUM_START:
            j = i
            while j < n and text[j] in "0123456789":
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j] in "0123456789":
                    j += 1
            if text[i:j] == ".":
                raise ParseError("stray '.'", _byte_offset(text, i),
                                 expected="a numeric literal")
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k] in "0123456789":
                    while k < n and text[k] in "0123456789":
                        k += 1
                    j = k
            tokens.append(("num", text[i:j], _byte_offset(text, i)))
            i = j
            continue
        if ch in _IDENT_START:
            j = i
            while j < n and text[j] in _IDENT_BODY:
                j += 1
            tokens.append(("ident", text[i:j], _byte_offset(text, i)))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", _byte_offset(text, i))
    tokens.append(("end", "", _byte_offset(text, n)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, what):
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"unexpected {self._show(tok)}", tok[2], expected=what)
        return self.take()

    @staticmethod
    def _show(tok):
        return "end of input" if tok[0] == "end" else f"{tok[1]!r}"

    def expression(self):
        terms = [self.term()]
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            terms.append(neg(rhs) if op == "-" else rhs)
        return add(*terms) if len(terms) > 1 else terms[0]

    def term(self):
        result = self.factor()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            rhs = self.factor()
            result = mul(result, rhs) if op == "*" else div(result, rhs)
        return result

    def factor(self):
        if self.peek()[0] == "-":
            self.take()
            return neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            caret = self.take()
            exponent = self.factor()
            if not isinstance(exponent, Constant):
                raise ParseError("exponent does not fold to a number",
                                 caret[2], expected="a numeric exponent")
            return power(base, exponent.value)
        return base

    def atom(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            value = float(tok[1])
            if not math.isfinite(value):
                raise ParseError(f"numeric literal {tok[1]!r} out of range", tok[2])
            return const(value)
        if tok[0] == "ident":
            self.take()
            if self.peek()[0] == "(":
                if tok[1] not in FUNCTIONS:
                    raise UnknownFunctionError(tok[1], tok[2])
                self.take()
                inner = self.expression()
                self.expect(")", "')'")
                return apply_fn(tok[1], inner)
            if tok[1] == "x":
                return X
            return named(tok[1])
        if tok[0] == "(":
            self.take()
            inner = self.expression()
            self.expect(")", "')'")
            return inner
        raise ParseError(f"unexpected {self._show(tok)}", tok[2],
                         expected="a number, a name, or '('")


def parse(text):
    """Parse expression text.

    Precedence, loosest first: ``+``/``-``, then ``*``/``/``, then unary
    minus, then ``^`` (right associative).  Parentheses group; the built-in
    functions are called as ``name(arg)``.  ``x`` is the variable; any other
    bare identifier becomes a named constant.  Exponents must fold to plain
    numbers at parse time.
    """
    p = _Parser(text)
    e = p.expression()
    p.expect("end", "end of input")
    return e
