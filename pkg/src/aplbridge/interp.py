"""1-origin APL-subset interpreter used as the local evaluation oracle.

Supported subset: ⍳ (monadic), ⍴ (monadic/dyadic), ⍉, ∊, ≢, reductions
f/ and f⌿ for f ∈ {+ × ⌈ ⌊ ∨ ∧}, elementwise + - × ÷ ⌈ ⌊ = ∨ ∧,
⊂ ⊃ ¨ to one level of enclosure, dfns {…} with ⍺ ⍵, assignment ←,
strict right-to-left evaluation.  Tradfns additionally support
:For/:In/:EndFor, :If/:EndIf, :Leave, ⋄ and modified assignment.

Everything outside the subset raises UnsupportedFeatureError — never a
silent wrong answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import lexer
from .headers import DefinitionError, parse_definition_line


class AplError(Exception):
    """Base class for evaluation errors."""


class RankError(AplError):
    pass


class LengthError(AplError):
    pass


class DomainError(AplError):
    pass


class AplNameError(AplError):
    pass


class SyntaxAplError(AplError):
    pass


class UnsupportedFeatureError(AplError):
    """Construct outside the supported subset."""


def _err(cls, primitive: str, message: str, *shapes):
    detail = f"{primitive}: {message}"
    if shapes:
        detail += " (shapes " + ", ".join(str(s) for s in shapes) + ")"
    return cls(detail)


@dataclass(frozen=True)
class Box:
    """One level of enclosure (⊂); deeper nesting is out of subset."""

    value: "AplValue"


@dataclass(frozen=True)
class AplValue:
    """Rank/shape/elements multidimensional array, row-major."""

    shape: tuple[int, ...]
    elements: tuple
    kind: str  # numeric | character | boxed

    def __post_init__(self):
        if math.prod(self.shape) != len(self.elements):
            raise ValueError("shape/element count mismatch")

    @property
    def rank(self) -> int:
        return len(self.shape)

    @property
    def is_scalar(self) -> bool:
        return self.shape == ()

    def tally(self) -> int:
        return 1 if self.is_scalar else self.shape[0]

    @classmethod
    def scalar(cls, x) -> "AplValue":
        return cls((), (x,), _kind_of([x]))

    @classmethod
    def vector(cls, xs: Sequence) -> "AplValue":
        xs = tuple(xs)
        return cls((len(xs),), xs, _kind_of(xs))

    @classmethod
    def matrix(cls, rows: Sequence[Sequence]) -> "AplValue":
        flat = tuple(x for row in rows for x in row)
        return cls((len(rows), len(rows[0]) if rows else 0), flat, _kind_of(flat))

    @classmethod
    def char_vector(cls, s: str) -> "AplValue":
        if len(s) == 1:
            return cls((), tuple(s), "character")
        return cls((len(s),), tuple(s), "character")

    def to_python(self):
        """Canonical output form: bare scalar, flat list, nested rows.
        Character vectors collapse to strings."""
        def conv(x):
            if isinstance(x, Box):
                return x.value.to_python()
            return x

        if self.is_scalar:
            return conv(self.elements[0])
        if self.rank == 1:
            if self.kind == "character":
                return "".join(self.elements)
            return [conv(x) for x in self.elements]
        if self.rank == 2:
            r, c = self.shape
            return [[conv(self.elements[i * c + j]) for j in range(c)] for i in range(r)]
        raise UnsupportedFeatureError(f"cannot serialize rank-{self.rank} value")


def _kind_of(xs) -> str:
    has_char = any(isinstance(x, str) for x in xs)
    has_num = any(isinstance(x, (int, float)) and not isinstance(x, bool) for x in xs)
    has_box = any(isinstance(x, Box) for x in xs)
    if has_box:
        if has_char or has_num:
            raise DomainError("mixed boxed and simple elements are unsupported")
        return "boxed"
    if has_char and has_num:
        raise DomainError("mixed character/numeric arrays are unsupported")
    return "character" if has_char else "numeric"


EMPTY_NUMERIC = AplValue((0,), (), "numeric")


def _norm_num(x):
    """Collapse floats that are exact integers back to int (÷ promotes,
    nothing else should leak floats into integer data)."""
    if isinstance(x, float) and x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def _fmt_num(x) -> str:
    if isinstance(x, float):
        text = repr(x)
    else:
        text = str(x)
    return text.replace("-", "¯")


def format_apl(value: AplValue) -> str:
    """Session-style display: scalars bare, vectors space-separated on one
    line (1-element vectors display like scalars), matrices one row per
    line, character arrays unquoted."""
    if value.kind == "boxed":
        inner = [format_apl(x.value if isinstance(x, Box) else AplValue.scalar(x)) for x in value.elements]
        return " ".join(inner)
    if value.kind == "character":
        if value.rank <= 1:
            return "".join(value.elements)
        r, c = value.shape
        return "\n".join("".join(value.elements[i * c : (i + 1) * c]) for i in range(r))
    if value.rank <= 1:
        return " ".join(_fmt_num(x) for x in value.elements)
    r, c = value.shape
    return "\n".join(
        " ".join(_fmt_num(value.elements[i * c + j]) for j in range(c)) for i in range(r)
    )


# --- scalar dyadic/monadic primitives ----------------------------------------


def _require_bool(x, glyph):
    if x not in (0, 1):
        raise _err(DomainError, glyph, f"expected boolean 0/1, got {x!r}")
    return x


def _num(x, glyph):
    if isinstance(x, str) or isinstance(x, Box):
        raise _err(DomainError, glyph, "numeric argument required")
    return x


def _divide(a, b):
    if b == 0:
        raise _err(DomainError, "÷", "division by zero")
    return _norm_num(a / b)


SCALAR_DYADIC: dict[str, Callable] = {
    "+": lambda a, b: _num(a, "+") + _num(b, "+"),
    "-": lambda a, b: _num(a, "-") - _num(b, "-"),
    "×": lambda a, b: _num(a, "×") * _num(b, "×"),
    "÷": lambda a, b: _divide(_num(a, "÷"), _num(b, "÷")),
    "⌈": lambda a, b: max(_num(a, "⌈"), _num(b, "⌈")),
    "⌊": lambda a, b: min(_num(a, "⌊"), _num(b, "⌊")),
    "=": lambda a, b: 1 if a == b and isinstance(a, str) == isinstance(b, str) else 0,
    "∨": lambda a, b: _require_bool(a, "∨") | _require_bool(b, "∨"),
    "∧": lambda a, b: _require_bool(a, "∧") & _require_bool(b, "∧"),
}

SCALAR_MONADIC: dict[str, Callable] = {
    "+": lambda a: _num(a, "+"),
    "-": lambda a: -_num(a, "-"),
    "×": lambda a: (0 if a == 0 else (1 if a > 0 else -1)) if not isinstance(a, str) else _num(a, "×"),
    "÷": lambda a: _divide(1, _num(a, "÷")),
    "⌈": lambda a: math.ceil(_num(a, "⌈")),
    "⌊": lambda a: math.floor(_num(a, "⌊")),
}

REDUCTION_IDENTITY = {"+": 0, "×": 1, "∨": 0, "∧": 1}
REDUCIBLE = {"+", "×", "⌈", "⌊", "∨", "∧"}


def _elementwise(glyph: str, left: AplValue, right: AplValue) -> AplValue:
    fn = SCALAR_DYADIC[glyph]
    if left.is_scalar and not right.is_scalar:
        a = left.elements[0]
        elems = tuple(_norm_num(fn(a, b)) for b in right.elements)
        return AplValue(right.shape, elems, _kind_of(elems) if elems else right.kind)
    if right.is_scalar and not left.is_scalar:
        b = right.elements[0]
        elems = tuple(_norm_num(fn(a, b)) for a in left.elements)
        return AplValue(left.shape, elems, _kind_of(elems) if elems else left.kind)
    if left.rank != right.rank:
        raise _err(RankError, glyph, "rank mismatch", left.shape, right.shape)
    if left.shape != right.shape:
        raise _err(LengthError, glyph, "shape mismatch", left.shape, right.shape)
    elems = tuple(_norm_num(fn(a, b)) for a, b in zip(left.elements, right.elements))
    return AplValue(left.shape, elems, _kind_of(elems) if elems else left.kind)


def _monadic_scalar(glyph: str, omega: AplValue) -> AplValue:
    fn = SCALAR_MONADIC[glyph]
    elems = tuple(_norm_num(fn(x)) for x in omega.elements)
    return AplValue(omega.shape, elems, _kind_of(elems) if elems else omega.kind)


# --- array primitives ---------------------------------------------------------


def _iota(omega: AplValue) -> AplValue:
    if not omega.is_scalar:
        raise UnsupportedFeatureError("⍳ with non-scalar argument (odometer) is unsupported")
    n = omega.elements[0]
    if isinstance(n, (str, Box)) or not float(n).is_integer() or n < 0:
        raise _err(DomainError, "⍳", f"expected non-negative integer, got {n!r}")
    n = int(n)
    return AplValue((n,), tuple(range(1, n + 1)), "numeric")


def _shape_of(omega: AplValue) -> AplValue:
    return AplValue((omega.rank,), tuple(omega.shape), "numeric")


def _reshape(alpha: AplValue, omega: AplValue) -> AplValue:
    if alpha.rank > 1:
        raise _err(RankError, "⍴", "left argument must be scalar or vector", alpha.shape)
    dims = []
    for d in alpha.elements:
        if isinstance(d, (str, Box)) or not float(d).is_integer() or d < 0:
            raise _err(DomainError, "⍴", f"bad dimension {d!r}")
        dims.append(int(d))
    shape = tuple(dims)
    total = math.prod(shape)
    if total == 0:
        return AplValue(shape, (), omega.kind)
    if not omega.elements:
        raise _err(DomainError, "⍴", "cannot reshape empty array to non-empty shape")
    src = omega.elements
    elems = tuple(src[i % len(src)] for i in range(total))
    return AplValue(shape, elems, omega.kind)


def _transpose(omega: AplValue) -> AplValue:
    if omega.rank <= 1:
        return omega
    if omega.rank != 2:
        raise UnsupportedFeatureError("⍉ beyond rank 2 is unsupported")
    r, c = omega.shape
    elems = tuple(omega.elements[i * c + j] for j in range(c) for i in range(r))
    return AplValue((c, r), elems, omega.kind)


def _tally(omega: AplValue) -> AplValue:
    return AplValue.scalar(omega.tally())


def _membership(alpha: AplValue, omega: AplValue) -> AplValue:
    pool = set()
    for x in omega.elements:
        if isinstance(x, Box):
            raise UnsupportedFeatureError("∊ over boxed arrays is unsupported")
        pool.add((isinstance(x, str), x))
    elems = tuple(1 if (isinstance(a, str), a) in pool else 0 for a in alpha.elements)
    return AplValue(alpha.shape, elems, "numeric")


def _enclose(omega: AplValue) -> AplValue:
    if omega.is_scalar and omega.kind != "boxed":
        return omega  # ⊂ on a simple scalar is the identity
    if omega.kind == "boxed":
        raise UnsupportedFeatureError("nested enclosure beyond one level is unsupported")
    return AplValue((), (Box(omega),), "boxed")


def _disclose(omega: AplValue) -> AplValue:
    if not omega.elements:
        if omega.kind == "character":
            return AplValue.scalar(" ")
        return AplValue.scalar(0)
    first = omega.elements[0]
    if isinstance(first, Box):
        return first.value
    return AplValue.scalar(first)


def _pick(alpha: AplValue, omega: AplValue) -> AplValue:
    if not alpha.is_scalar:
        raise UnsupportedFeatureError("⊃ with non-scalar path is unsupported")
    i = alpha.elements[0]
    if isinstance(i, (str, Box)) or not float(i).is_integer():
        raise _err(DomainError, "⊃", f"index must be an integer, got {i!r}")
    i = int(i)
    if not 1 <= i <= len(omega.elements):
        raise _err(DomainError, "⊃", f"INDEX out of range: {i} for {len(omega.elements)} elements")
    x = omega.elements[i - 1]
    if isinstance(x, Box):
        return x.value
    return AplValue.scalar(x)


def _reduce(glyph: str, axis_first: bool, omega: AplValue) -> AplValue:
    if glyph not in REDUCIBLE:
        raise UnsupportedFeatureError(f"reduction {glyph}/ is unsupported")
    fn = SCALAR_DYADIC[glyph]

    def fold(xs):
        if not xs:
            if glyph in REDUCTION_IDENTITY:
                return REDUCTION_IDENTITY[glyph]
            raise _err(DomainError, glyph + "/", "reduction of empty axis has no identity")
        acc = xs[-1]
        for x in reversed(xs[:-1]):  # right-to-left fold, per APL
            acc = _norm_num(fn(x, acc))
        return acc

    if omega.is_scalar:
        return omega
    if omega.rank == 1:
        return AplValue.scalar(fold(list(omega.elements)))
    if omega.rank == 2:
        r, c = omega.shape
        if axis_first:  # ⌿ reduces along the first axis -> length-c vector
            cols = [[omega.elements[i * c + j] for i in range(r)] for j in range(c)]
            return AplValue.vector([fold(col) for col in cols])
        rows = [[omega.elements[i * c + j] for j in range(c)] for i in range(r)]
        return AplValue.vector([fold(row) for row in rows])
    raise UnsupportedFeatureError("reduction beyond rank 2 is unsupported")


# --- functions and application -----------------------------------------------


@dataclass
class Dfn:
    """Single-expression dfn; guards are out of subset."""

    tokens: list
    source: str

    @property
    def valence(self) -> str:
        return "dyadic" if any(t.lexeme == "⍺" for t in self.tokens) else "monadic"


@dataclass
class Primitive:
    glyph: str


@dataclass
class Derived:
    """f/ f⌿ reductions and f¨ each."""

    operator: str
    operand: object  # Primitive or Dfn


class Env:
    """Identifier bindings; index origin fixed at 1."""

    INDEX_ORIGIN = 1

    def __init__(self, parent: "Env | None" = None):
        self.parent = parent
        self.bindings: dict[str, object] = {}

    def lookup(self, name: str):
        env = self
        while env is not None:
            if name in env.bindings:
                return env.bindings[name]
            env = env.parent
        raise AplNameError(f"undefined name: {name}")

    def bind(self, name: str, value):
        self.bindings[name] = value

    def has(self, name: str) -> bool:
        try:
            self.lookup(name)
            return True
        except AplNameError:
            return False


def _apply(fn, alpha: AplValue | None, omega: AplValue, env: Env) -> AplValue:
    if isinstance(fn, Primitive):
        return _apply_primitive(fn.glyph, alpha, omega)
    if isinstance(fn, Derived):
        return _apply_derived(fn, alpha, omega, env)
    if isinstance(fn, Dfn):
        if fn.valence == "dyadic" and alpha is None:
            raise _err(SyntaxAplError, "{}", "dyadic dfn called monadically")
        inner = Env(env)
        return _eval_tokens(fn.tokens, inner, alpha=alpha, omega=omega)
    if isinstance(fn, TradFn):
        return call_tradfn(fn, env, alpha, omega)
    raise SyntaxAplError(f"not a function: {fn!r}")


def _apply_primitive(glyph: str, alpha: AplValue | None, omega: AplValue) -> AplValue:
    if alpha is None:
        if glyph == "⍳":
            return _iota(omega)
        if glyph == "⍴":
            return _shape_of(omega)
        if glyph == "⍉":
            return _transpose(omega)
        if glyph == "≢":
            return _tally(omega)
        if glyph == "⊂":
            return _enclose(omega)
        if glyph == "⊃":
            return _disclose(omega)
        if glyph in SCALAR_MONADIC:
            return _monadic_scalar(glyph, omega)
        raise UnsupportedFeatureError(f"monadic {glyph} is unsupported")
    if glyph == "⍴":
        return _reshape(alpha, omega)
    if glyph == "∊":
        return _membership(alpha, omega)
    if glyph == "⊃":
        return _pick(alpha, omega)
    if glyph in SCALAR_DYADIC:
        return _elementwise(glyph, alpha, omega)
    raise UnsupportedFeatureError(f"dyadic {glyph} is unsupported")


def _items_of(value: AplValue) -> list[AplValue]:
    out = []
    for x in value.elements:
        out.append(x.value if isinstance(x, Box) else AplValue.scalar(x))
    return out


def _apply_derived(fn: Derived, alpha: AplValue | None, omega: AplValue, env: Env) -> AplValue:
    if fn.operator in ("/", "⌿"):
        if alpha is not None:
            raise UnsupportedFeatureError("n-wise reduction (dyadic f/) is unsupported")
        if not isinstance(fn.operand, Primitive):
            raise UnsupportedFeatureError("reduction over non-primitive functions is unsupported")
        return _reduce(fn.operand.glyph, fn.operator == "⌿", omega)
    if fn.operator == "¨":
        return _each(fn.operand, alpha, omega, env)
    raise UnsupportedFeatureError(f"operator {fn.operator} is unsupported")


def _each(operand, alpha: AplValue | None, omega: AplValue, env: Env) -> AplValue:
    """Apply operand between corresponding items, scalar-extending either
    side; results re-boxed unless every result is a simple scalar."""
    right_items = _items_of(omega)
    if alpha is None:
        results = [_apply(operand, None, it, env) for it in right_items]
        shape = omega.shape
    else:
        left_items = _items_of(alpha)
        if alpha.is_scalar and not omega.is_scalar:
            left_items = left_items * len(right_items)
            shape = omega.shape
        elif omega.is_scalar and not alpha.is_scalar:
            right_items = right_items * len(left_items)
            shape = alpha.shape
        else:
            if alpha.rank != omega.rank:
                raise _err(RankError, "¨", "rank mismatch", alpha.shape, omega.shape)
            if alpha.shape != omega.shape:
                raise _err(LengthError, "¨", "shape mismatch", alpha.shape, omega.shape)
            shape = alpha.shape
        results = [_apply(operand, a, b, env) for a, b in zip(left_items, right_items)]

    if shape == ():
        return results[0] if results[0].is_scalar else _enclose(results[0])
    if all(r.is_scalar and r.kind != "boxed" for r in results):
        elems = tuple(r.elements[0] for r in results)
        return AplValue(shape, elems, _kind_of(elems) if elems else "numeric")
    elems = tuple(Box(r) for r in results)
    return AplValue(shape, elems, "boxed")


# --- expression evaluation ----------------------------------------------------


def _parse_number(lexeme: str) -> int | float:
    text = lexeme.replace("¯", "-")
    try:
        if "." in text or "e" in text or "E" in text:
            return float(text)
        return int(text)
    except ValueError:
        raise SyntaxAplError(f"malformed number literal {lexeme!r}") from None


def _parse_char_literal(lexeme: str) -> AplValue:
    if len(lexeme) < 2 or not lexeme.endswith("'"):
        raise SyntaxAplError(f"unterminated character literal {lexeme!r}")
    body = lexeme[1:-1].replace("''", "'")
    return AplValue.char_vector(body) if body else AplValue((0,), (), "character")


def tokenize_expr(expr: str) -> list:
    toks = [t for t in lexer.lex(expr) if t.kind not in ("comment",) and t.lexeme != ""]
    for t in toks:
        if t.unknown:
            raise UnsupportedFeatureError(f"unknown codepoint {t.lexeme!r} at column {t.column}")
    return toks


def _find_matching_brace(tokens, start):
    depth = 0
    for i in range(start, len(tokens)):
        if tokens[i].lexeme == "{":
            depth += 1
        elif tokens[i].lexeme == "}":
            depth -= 1
            if depth == 0:
                return i
    raise SyntaxAplError("unmatched {")


def _find_matching_paren(tokens, start):
    depth = 0
    for i in range(start, len(tokens)):
        if tokens[i].lexeme == "(":
            depth += 1
        elif tokens[i].lexeme == ")":
            depth -= 1
            if depth == 0:
                return i
    raise SyntaxAplError("unmatched (")


@dataclass
class _Item:
    """Parsed expression item: a value, a function, or an operator."""

    kind: str  # value | func | operator | assign | name
    payload: object = None


def _items(tokens, env: Env, alpha, omega) -> list[_Item]:
    """Left-to-right conversion of tokens into values/functions/operators.
    Adjacent literal scalars strand into vectors; names resolve against
    the environment (or stay unresolved for assignment targets)."""
    items: list[_Item] = []
    i = 0
    pending: list = []  # literal strand under construction

    def flush():
        nonlocal pending
        if pending:
            if len(pending) == 1:
                items.append(_Item("value", pending[0]))
            else:
                elems = []
                for v in pending:
                    if v.is_scalar:
                        elems.append(v.elements[0])
                    else:
                        raise UnsupportedFeatureError("stranding non-scalars is unsupported")
                items.append(_Item("value", AplValue.vector(elems)))
            pending = []

    while i < len(tokens):
        t = tokens[i]
        if t.kind == "number-literal":
            if t.diagnostic:
                raise SyntaxAplError(f"malformed number literal {t.lexeme!r}: {t.diagnostic}")
            pending.append(AplValue.scalar(_parse_number(t.lexeme)))
            i += 1
            continue
        if t.kind == "character-literal":
            flush()
            items.append(_Item("value", _parse_char_literal(t.lexeme)))
            i += 1
            continue
        if t.lexeme == "(":
            flush()
            j = _find_matching_paren(tokens, i)
            items.append(_Item("value", _eval_tokens(tokens[i + 1 : j], env, alpha, omega)))
            i = j + 1
            continue
        if t.lexeme == "{":
            flush()
            j = _find_matching_brace(tokens, i)
            body = tokens[i + 1 : j]
            if any(b.lexeme == ":" or b.kind == "separator" for b in body):
                raise UnsupportedFeatureError("dfn guards / multi-statement dfn bodies are unsupported")
            src = lexer.reconstruct(body)
            items.append(_Item("func", Dfn(body, src)))
            i = j + 1
            continue
        if t.lexeme == "⍺" or t.lexeme == "⍵":
            flush()
            val = alpha if t.lexeme == "⍺" else omega
            if val is None:
                raise SyntaxAplError(f"{t.lexeme} used outside a dfn body")
            items.append(_Item("value", val))
            i += 1
            continue
        if t.kind == "identifier":
            flush()
            items.append(_Item("name", t.lexeme))
            i += 1
            continue
        if t.lexeme == "←":
            flush()
            items.append(_Item("assign"))
            i += 1
            continue
        if t.kind == "glyph" and t.lexeme in lexer.OPERATORS:
            flush()
            items.append(_Item("operator", t.lexeme))
            i += 1
            continue
        if t.kind == "glyph":
            flush()
            items.append(_Item("func", Primitive(t.lexeme)))
            i += 1
            continue
        if t.kind == "control-word":
            raise UnsupportedFeatureError(f"control word {t.lexeme} outside a tradfn body")
        raise SyntaxAplError(f"unexpected token {t.lexeme!r} at column {t.column}")
    flush()
    return items


def _resolve_name(item: _Item, env: Env) -> _Item:
    bound = env.lookup(item.payload)
    if isinstance(bound, AplValue):
        return _Item("value", bound)
    return _Item("func", bound)


def _eval_items(items: list[_Item], env: Env, alpha, omega) -> AplValue:
    # assignment: Name ← expr (also modified assignment Name f ← expr)
    if items and items[0].kind == "name":
        if len(items) >= 2 and items[1].kind == "assign":
            rhs = items[2:]
            if len(rhs) == 1 and rhs[0].kind == "func":
                env.bind(items[0].payload, rhs[0].payload)
                return AplValue.scalar(1)  # function assignment has no array value
            if len(rhs) == 1 and rhs[0].kind == "name":
                bound = env.lookup(rhs[0].payload)
                env.bind(items[0].payload, bound)
                return bound if isinstance(bound, AplValue) else AplValue.scalar(1)
            value = _eval_items(rhs, env, alpha, omega)
            env.bind(items[0].payload, value)
            return value
        if (
            len(items) >= 3
            and items[1].kind == "func"
            and items[2].kind == "assign"
        ):
            rhs = _eval_items(items[3:], env, alpha, omega)
            current = env.lookup(items[0].payload)
            if not isinstance(current, AplValue):
                raise SyntaxAplError(f"{items[0].payload} is not a value")
            env.bind(items[0].payload, _apply(items[1].payload, current, rhs, env))
            return env.lookup(items[0].payload)

    if not items:
        raise SyntaxAplError("empty expression")

    # dfn or named-function assignment handled above; now right-to-left
    resolved = [(_resolve_name(it, env) if it.kind == "name" else it) for it in items]

    i = len(resolved) - 1
    it = resolved[i]
    if it.kind != "value":
        # a trailing function with no right argument is a syntax error in
        # this subset (no function trains)
        raise SyntaxAplError("expression must end in a value")
    right = it.payload
    i -= 1
    while i >= 0:
        it = resolved[i]
        if it.kind == "operator":
            if i == 0 or resolved[i - 1].kind != "func":
                raise SyntaxAplError(f"operator {it.payload} lacks a function operand")
            fn = Derived(it.payload, resolved[i - 1].payload)
            i -= 2
        elif it.kind == "func":
            fn = it.payload
            i -= 1
        else:
            raise SyntaxAplError("two adjacent values without a function")
        left = None
        if i >= 0 and resolved[i].kind == "value":
            left = resolved[i].payload
            i -= 1
        right = _apply(fn, left, right, env)
    return right


def _eval_tokens(tokens, env: Env, alpha=None, omega=None) -> AplValue:
    return _eval_items(_items(tokens, env, alpha, omega), env, alpha, omega)


def eval_expr(expr: str, env: Env | None = None, alpha: AplValue | None = None,
              omega: AplValue | None = None) -> AplValue:
    """Evaluate one or more ⋄-separated APL expressions; returns the value
    of the last one."""
    env = env or Env()
    result = None
    for line in expr.splitlines():
        stmts = _split_statements(tokenize_expr(line))
        for stmt in stmts:
            if not stmt:
                continue
            result = _eval_tokens(stmt, env, alpha, omega)
    if result is None:
        raise SyntaxAplError("empty expression")
    return result


def _split_statements(tokens) -> list[list]:
    out: list[list] = [[]]
    for t in tokens:
        if t.kind == "separator":
            out.append([])
        else:
            out[-1].append(t)
    return out


# --- tradfns -------------------------------------------------------------------


@dataclass
class TradFn:
    name: str
    valence: str
    left_name: str | None
    right_name: str | None
    result_name: str
    body: list[list]  # statements, each a token list


SUPPORTED_CONTROL = {":For", ":In", ":EndFor", ":If", ":EndIf", ":Leave"}


def parse_tradfn(defn: str) -> TradFn:
    lines = [ln for ln in defn.splitlines() if ln.strip() and not ln.strip().startswith("⍝")]
    if not lines:
        raise SyntaxAplError("empty tradfn definition")
    header = parse_definition_line(lines[0])
    if header.is_dfn:
        raise SyntaxAplError("dfn passed to parse_tradfn")
    if header.result_name is None:
        raise SyntaxAplError("tradfn header must name a result")
    stmts: list[list] = []
    for line in lines[1:]:
        if line.strip() == "∇":
            continue
        for stmt in _split_statements(tokenize_expr(line)):
            if stmt:
                stmts.append(stmt)
    for stmt in stmts:
        for t in stmt:
            if t.kind == "control-word" and t.lexeme not in SUPPORTED_CONTROL:
                raise UnsupportedFeatureError(f"control word {t.lexeme} is unsupported")
    return TradFn(
        name=header.name,
        valence=header.valence,
        left_name=header.left_name,
        right_name=header.right_name,
        result_name=header.result_name,
        body=stmts,
    )


class _LeaveLoop(Exception):
    pass


def _truthy(value: AplValue) -> bool:
    if not value.elements:
        return False
    x = value.elements[0]
    if isinstance(x, (str, Box)):
        raise _err(DomainError, ":If", "condition must be numeric")
    return x != 0


def _find_matching_control(stmts, start, open_word, close_word):
    depth = 0
    for i in range(start, len(stmts)):
        first = stmts[i][0]
        if first.kind == "control-word":
            if first.lexeme == open_word:
                depth += 1
            elif first.lexeme == close_word:
                depth -= 1
                if depth == 0:
                    return i
    raise SyntaxAplError(f"unmatched {open_word}")


def _exec_block(stmts, env: Env):
    pc = 0
    while pc < len(stmts):
        stmt = stmts[pc]
        first = stmt[0]
        if first.kind == "control-word":
            word = first.lexeme
            if word == ":For":
                # :For name :In expr
                if len(stmt) < 4 or stmt[1].kind != "identifier" or stmt[2].lexeme != ":In":
                    raise SyntaxAplError(":For expects `:For name :In expr`")
                var = stmt[1].lexeme
                seq = _eval_tokens(stmt[3:], env)
                end = _find_matching_control(stmts, pc, ":For", ":EndFor")
                body = stmts[pc + 1 : end]
                try:
                    for item in _items_of(seq):
                        env.bind(var, item)
                        _exec_block(body, env)
                except _LeaveLoop:
                    pass
                pc = end + 1
                continue
            if word == ":If":
                cond = _eval_tokens(stmt[1:], env)
                end = _find_matching_control(stmts, pc, ":If", ":EndIf")
                if _truthy(cond):
                    _exec_block(stmts[pc + 1 : end], env)
                pc = end + 1
                continue
            if word == ":Leave":
                raise _LeaveLoop()
            if word in (":EndFor", ":EndIf", ":In"):
                raise SyntaxAplError(f"stray {word}")
            raise UnsupportedFeatureError(f"control word {word} is unsupported")
        _eval_tokens(stmt, env)
        pc += 1


def call_tradfn(fn: TradFn, env: Env, alpha: AplValue | None, omega: AplValue) -> AplValue:
    local = Env(env)
    if fn.valence == "dyadic":
        if alpha is None:
            raise _err(SyntaxAplError, fn.name, "dyadic tradfn called monadically")
        local.bind(fn.left_name, alpha)
    local.bind(fn.right_name, omega)
    _exec_block(fn.body, local)
    if not local.has(fn.result_name):
        raise AplNameError(f"tradfn {fn.name} never assigned its result {fn.result_name}")
    result = local.lookup(fn.result_name)
    if not isinstance(result, AplValue):
        raise _err(DomainError, fn.name, "result is not an array value")
    return result


def eval_tradfn(defn: str, env: Env | None = None, *, alpha: AplValue | None = None,
                omega: AplValue) -> AplValue:
    """Parse and call a tradfn in one step."""
    fn = parse_tradfn(defn)
    return call_tradfn(fn, env or Env(), alpha, omega)


# --- io-case driving -----------------------------------------------------------


def load_function(source: str, env: Env | None = None) -> tuple[str, object, Env]:
    """Parse a function definition (dfn assignment or tradfn lines) and
    bind it; returns (name, function, env)."""
    env = env or Env()
    lines = [ln for ln in source.splitlines() if ln.strip() and not ln.strip().startswith("⍝")]
    first_line = lines[0].strip() if lines else ""
    if "{" in first_line:
        defn = parse_definition_line(first_line)
        toks = tokenize_expr(first_line)
        # bind via normal assignment evaluation so nested dfns also work
        start = next(i for i, t in enumerate(toks) if t.lexeme == "{")
        end = _find_matching_brace(toks, start)
        body = toks[start + 1 : end]
        fn = Dfn(body, lexer.reconstruct(body))
        env.bind(defn.name, fn)
        return defn.name, fn, env
    fn = parse_tradfn(source)
    env.bind(fn.name, fn)
    return fn.name, fn, env


def run_io_case(function_source: str, io, env: Env | None = None) -> AplValue:
    """Evaluate an IO case's argument expressions, apply the function,
    and return the oracle result.

    ``io`` needs attributes/keys AplLeftArg (optional) and AplRightArg.
    """
    env = env or Env()
    name, fn, env = load_function(function_source, env)
    left_src = io.get("AplLeftArg") if isinstance(io, dict) else getattr(io, "apl_left_arg", None)
    right_src = io.get("AplRightArg") if isinstance(io, dict) else getattr(io, "apl_right_arg", None)
    if right_src is None:
        raise _err(DomainError, name, "io case lacks AplRightArg")
    omega = eval_expr(right_src, env)
    alpha = eval_expr(left_src, env) if left_src else None
    return _apply(fn, alpha, omega, env)
