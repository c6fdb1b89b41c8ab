"""APL type-header and definition-line parsing, C# signature rendering.

Headers follow the comment grammar ``⍝ [⍺ : TYPE] ⍵ : TYPE → TYPE`` where
``TYPE`` is ``BASE``, ``BASE[]`` (vector) or ``BASE[,]`` (matrix).  The
monadic form (no ⍺ clause) is our minimal extension; the upstream
convention only documents the dyadic one.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# Base-kind registry: APL header kind -> C# type.  Unknown kinds are hard
# errors, never silently mapped to object.
BASE_KINDS: dict[str, str] = {
    "INT": "int",
    "BOOL": "bool",
    "CHAR": "char",
    "DOUBLE": "double",
    "STRING": "string",
}

MAX_RANK = 2


class HeaderError(ValueError):
    """Malformed header grammar; carries the offending column."""

    def __init__(self, message: str, column: int = 0):
        super().__init__(message)
        self.column = column


class UnsupportedTypeError(HeaderError):
    """Base kind not in the registry."""


class DefinitionError(ValueError):
    """A tradfn/dfn definition line could not be parsed."""


@dataclass(frozen=True)
class ArgType:
    base: str
    rank: int  # 0 scalar, 1 vector, 2 matrix

    def __post_init__(self):
        if self.base not in BASE_KINDS:
            raise UnsupportedTypeError(f"unsupported base kind {self.base!r}")
        if not 0 <= self.rank <= MAX_RANK:
            raise HeaderError(f"rank {self.rank} out of range 0..{MAX_RANK}")

    def csharp(self) -> str:
        t = BASE_KINDS[self.base]
        return t + ("", "[]", "[,]")[self.rank]

    def apl(self) -> str:
        return self.base + ("", "[]", "[,]")[self.rank]


@dataclass(frozen=True)
class HeaderTypes:
    """The typed portion of a header: (left?, right, result)."""

    left: ArgType | None
    right: ArgType
    result: ArgType

    @property
    def valence(self) -> str:
        return "dyadic" if self.left is not None else "monadic"


@dataclass(frozen=True)
class FunctionHeader:
    name: str
    valence: str  # monadic | dyadic
    right: ArgType
    result: ArgType
    left: ArgType | None = None
    left_name: str = "y"
    right_name: str = "x"
    result_name: str = "r"

    def __post_init__(self):
        if (self.valence == "dyadic") != (self.left is not None):
            raise HeaderError("valence dyadic iff left argument present")
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", self.name):
            raise HeaderError(f"name {self.name!r} is not a legal APL/C# identifier")


_TYPE_RE = re.compile(r"([A-Z]+)(\[,?\])?")


def _parse_type(text: str, offset: int) -> ArgType:
    m = _TYPE_RE.fullmatch(text.strip())
    if not m:
        raise HeaderError(f"malformed type {text.strip()!r}", column=offset)
    base, suffix = m.group(1), m.group(2)
    if base not in BASE_KINDS:
        raise UnsupportedTypeError(f"unsupported base kind {base!r}", column=offset)
    rank = 0 if suffix is None else (1 if suffix == "[]" else 2)
    return ArgType(base, rank)


def parse_header(comment_line: str) -> HeaderTypes:
    """Parse ``⍝ [⍺ : TYPE] ⍵ : TYPE → TYPE`` into its typed parts."""
    if not comment_line.lstrip().startswith("⍝"):
        raise HeaderError("header line must begin with ⍝", column=1)
    body = comment_line.lstrip()[1:]
    base_col = len(comment_line) - len(comment_line.lstrip()) + 2

    if "→" not in body:
        raise HeaderError("missing result arrow →", column=base_col + len(body))
    args_part, _, result_part = body.partition("→")
    result = _parse_type(result_part, base_col + body.index("→") + 1)

    left: ArgType | None = None
    clauses = []
    for clause in args_part.split("⍵"):
        clauses.append(clause)
    if len(clauses) != 2:
        raise HeaderError("expected exactly one ⍵ clause", column=base_col)
    alpha_part, omega_part = clauses

    alpha_part = alpha_part.strip()
    if alpha_part:
        if not alpha_part.startswith("⍺"):
            raise HeaderError("left clause must start with ⍺", column=base_col)
        rest = alpha_part[1:].strip()
        if not rest.startswith(":"):
            raise HeaderError("expected : after ⍺", column=base_col + 1)
        left = _parse_type(rest[1:], base_col + 2)

    omega_part = omega_part.strip()
    if not omega_part.startswith(":"):
        raise HeaderError("expected : after ⍵", column=base_col + args_part.index("⍵") + 1)
    right = _parse_type(omega_part[1:], base_col + args_part.index("⍵") + 2)

    return HeaderTypes(left=left, right=right, result=result)


_TRADFN_RE = re.compile(
    r"^\s*(?:∇\s*)?(?P<result>[A-Za-z_][\w]*)\s*←\s*"
    r"(?:(?P<left>[A-Za-z_][\w]*)\s+)?"
    r"(?P<name>[A-Za-z_][\w]*)"
    r"(?:\s+(?P<right>[A-Za-z_][\w]*))?\s*$"
)
_DFN_RE = re.compile(r"^\s*(?P<name>[A-Za-z_][\w]*)\s*←\s*\{(?P<body>.*)\}\s*$")


@dataclass(frozen=True)
class DefinitionLine:
    name: str
    valence: str
    left_name: str | None = None
    right_name: str | None = None
    result_name: str | None = None
    is_dfn: bool = False


def parse_definition_line(line: str) -> DefinitionLine:
    """Extract name, valence, and argument identifiers from a tradfn
    header (``r ← y f x``) or a dfn assignment (``Name ← { ... }``)."""
    m = _DFN_RE.match(line)
    if m:
        body = m.group("body")
        valence = "dyadic" if "⍺" in body else "monadic"
        return DefinitionLine(name=m.group("name"), valence=valence, is_dfn=True)

    m = _TRADFN_RE.match(line)
    if m:
        if m.group("right") is None and m.group("left") is None:
            raise DefinitionError(f"niladic or ambiguous definition line: {line!r}")
        if m.group("right") is None:
            # `r ← f x` parses with left=f-candidate; reinterpret: the
            # token before the last identifier is the function name
            name, right = m.group("left"), m.group("name")
            return DefinitionLine(
                name=name, valence="monadic", right_name=right, result_name=m.group("result")
            )
        valence = "dyadic" if m.group("left") else "monadic"
        return DefinitionLine(
            name=m.group("name"),
            valence=valence,
            left_name=m.group("left"),
            right_name=m.group("right"),
            result_name=m.group("result"),
        )
    raise DefinitionError(f"cannot parse definition line: {line!r}")


def make_function_header(
    name: str, types: HeaderTypes, defn: DefinitionLine | None = None
) -> FunctionHeader:
    """Combine parsed types with (optional) tradfn naming; defaults are
    y (left), x (right), r (result)."""
    return FunctionHeader(
        name=name,
        valence=types.valence,
        left=types.left,
        right=types.right,
        result=types.result,
        left_name=(defn.left_name if defn and defn.left_name else "y"),
        right_name=(defn.right_name if defn and defn.right_name else "x"),
        result_name=(defn.result_name if defn and defn.result_name else "r"),
    )


def render_csharp_signature(header: FunctionHeader, static: bool = True) -> str:
    """Render the C# method signature, dyadic order (left, right)."""
    mods = "public static" if static else "public"
    params = []
    if header.left is not None:
        params.append(f"{header.left.csharp()} {header.left_name}")
    params.append(f"{header.right.csharp()} {header.right_name}")
    return f"{mods} {header.result.csharp()} {header.name}({', '.join(params)})"


def render_csharp_class(header: FunctionHeader, body: str = "") -> str:
    """Wrap a signature in its `<Name>Util` utility class."""
    sig = render_csharp_signature(header)
    inner = body if body else "throw new NotImplementedException();"
    return (
        f"public class {header.name}Util\n"
        "{\n"
        f"    {sig}\n"
        "    {\n"
        f"        {inner}\n"
        "    }\n"
        "}\n"
    )


def render_runtime_dispatch_skeleton(name: str) -> str:
    """Alternative object-typed rendering: one method, runtime type checks."""
    return (
        f"public static object {name}(object y, object x)\n"
        "{\n"
        "    switch (y, x)\n"
        "    {\n"
        "        // one case per (left, right) runtime type pair\n"
        "        default: throw new ArgumentException(\"unsupported argument types\");\n"
        "    }\n"
        "}"
    )


_SIG_RE = re.compile(
    r"^\s*public\s+(?:static\s+)?(?P<ret>[\w\[\],]+)\s+(?P<name>\w+)\s*\((?P<params>[^)]*)\)\s*$"
)
_CS_TO_ARG = {v + s: ArgType(k, r) for k, v in BASE_KINDS.items() for r, s in enumerate(("", "[]", "[,]"))}


def parse_csharp_signature(sig: str) -> FunctionHeader:
    """Recognizer for rendered signatures; used for re-parse consistency
    checks."""
    m = _SIG_RE.match(sig)
    if not m:
        raise HeaderError(f"unrecognized C# signature: {sig!r}")
    result = _CS_TO_ARG.get(m.group("ret"))
    if result is None:
        raise UnsupportedTypeError(f"unsupported return type {m.group('ret')!r}")
    params = [p.strip() for p in m.group("params").split(",") if p.strip()]
    # `int[,] y` splits on the comma inside `[,]`; re-join such fragments
    fixed: list[str] = []
    for p in params:
        if fixed and fixed[-1].endswith("["):
            fixed[-1] += "," + p
        else:
            fixed.append(p)
    args = []
    names = []
    for p in fixed:
        type_text, _, pname = p.rpartition(" ")
        arg = _CS_TO_ARG.get(type_text.strip())
        if arg is None:
            raise UnsupportedTypeError(f"unsupported parameter type {type_text!r}")
        args.append(arg)
        names.append(pname)
    if len(args) == 1:
        return FunctionHeader(
            name=m.group("name"), valence="monadic", right=args[0], result=result,
            right_name=names[0],
        )
    if len(args) == 2:
        return FunctionHeader(
            name=m.group("name"), valence="dyadic", left=args[0], right=args[1],
            result=result, left_name=names[0], right_name=names[1],
        )
    raise HeaderError(f"expected 1 or 2 parameters, got {len(args)}")


def normalize_signature(sig: str) -> str:
    """Normalization used when comparing rendered signatures against
    externally printed ones: collapse whitespace, drop `static`."""
    sig = re.sub(r"\bstatic\s+", "", sig)
    sig = re.sub(r"\s+", " ", sig.strip())
    sig = re.sub(r"\s*([(),])\s*", r"\1", sig)
    return sig.replace(",", ", ").replace("[, ]", "[,]")


# --- overload expansion ------------------------------------------------------


def membership_result_rule(left_rank: int, right_rank: int) -> ArgType | None:
    """y ∊ x: boolean result whose shape follows the left argument.  The
    all-scalar pair needs no overload and is omitted."""
    if left_rank == 0 and right_rank == 0:
        return None
    return ArgType("BOOL", left_rank)


def elementwise_result_rule(base: str):
    """Result base fixed, rank follows the left argument; excludes nothing."""

    def rule(left_rank: int, right_rank: int) -> ArgType | None:
        return ArgType(base, left_rank)

    return rule


def expand_overloads(
    name: str,
    base_left: str,
    base_right: str,
    result_rule,
    max_rank: int = MAX_RANK,
) -> list[str]:
    """One rendered signature per (left-rank, right-rank) pair, in
    (left, right) lexicographic order.  A rule returning None vetoes a
    pair (the membership rule vetoes scalar∊scalar, matching the
    published overload set)."""
    if max_rank > MAX_RANK:
        raise HeaderError(f"max_rank {max_rank} exceeds {MAX_RANK}")
    sigs = []
    for lr in range(max_rank + 1):
        for rr in range(max_rank + 1):
            result = result_rule(lr, rr)
            if result is None:
                continue
            header = FunctionHeader(
                name=name,
                valence="dyadic",
                left=ArgType(base_left, lr),
                right=ArgType(base_right, rr),
                result=result,
            )
            sigs.append(render_csharp_signature(header))
    return sigs
