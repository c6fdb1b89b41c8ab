import re

import pytest

from aplbridge.headers import (
    ArgType,
    FunctionHeader,
    HeaderError,
    UnsupportedTypeError,
    expand_overloads,
    elementwise_result_rule,
    make_function_header,
    membership_result_rule,
    normalize_signature,
    parse_csharp_signature,
    parse_definition_line,
    parse_header,
    render_csharp_class,
    render_csharp_signature,
    render_runtime_dispatch_skeleton,
)

# Table-driven reference recognizer for the header grammar, built first
# as an independent oracle for parse_header.
_ORACLE_TYPE = re.compile(r"^(INT|BOOL|CHAR|DOUBLE|STRING)(\[\]|\[,\])?$")


def oracle_parse(line):
    m = re.match(r"^\s*⍝\s*(?:⍺\s*:\s*(\S+)\s+)?⍵\s*:\s*(\S+)\s*→\s*(\S+)\s*$", line)
    if not m:
        return None
    out = []
    for text in m.groups():
        if text is None:
            out.append(None)
            continue
        tm = _ORACLE_TYPE.match(text)
        if not tm:
            return None
        rank = {None: 0, "[]": 1, "[,]": 2}[tm.group(2)]
        out.append((tm.group(1), rank))
    return tuple(out)


def test_parse_dyadic_vector_header():
    t = parse_header("⍝ ⍺ : INT[]   ⍵ : INT[]   → INT")
    assert t.valence == "dyadic"
    assert t.left == ArgType("INT", 1)
    assert t.right == ArgType("INT", 1)
    assert t.result == ArgType("INT", 0)


def test_parse_minimal_monadic():
    t = parse_header("⍝ ⍵ : INT → INT")
    assert t.valence == "monadic"
    assert t.left is None
    assert t.right == ArgType("INT", 0)
    assert t.result == ArgType("INT", 0)


@pytest.mark.parametrize(
    "line",
    [
        "⍝ ⍺ : BOOL[,] ⍵ : CHAR[] → DOUBLE[,]",
        "⍝ ⍺ : INT ⍵ : STRING → BOOL",
        "⍝ ⍵ : DOUBLE[] → DOUBLE",
        "⍝ ⍺ : CHAR[] ⍵ : CHAR[] → INT[,]",
    ],
)
def test_parse_agrees_with_oracle(line):
    left, right, result = oracle_parse(line)
    t = parse_header(line)
    assert (t.left.base, t.left.rank) if t.left else None == left
    if left is None:
        assert t.left is None
    else:
        assert (t.left.base, t.left.rank) == left
    assert (t.right.base, t.right.rank) == right
    assert (t.result.base, t.result.rank) == result


def test_parse_errors():
    with pytest.raises(HeaderError):
        parse_header("r ← y f x")  # not a comment line
    with pytest.raises(HeaderError):
        parse_header("⍝ ⍵ : INT")  # missing arrow
    with pytest.raises(UnsupportedTypeError):
        parse_header("⍝ ⍵ : QUAT → INT")
    err = None
    try:
        parse_header("⍝ ⍵ : INT")
    except HeaderError as e:
        err = e
    assert err is not None and err.column > 0


def test_definition_line_tradfn():
    d = parse_definition_line("r ← y xMsInt x")
    assert (d.name, d.valence) == ("xMsInt", "dyadic")
    assert (d.left_name, d.right_name, d.result_name) == ("y", "x", "r")


def test_definition_line_dfn():
    d = parse_definition_line("Rank ← { ⍴⍴⍵ }")
    assert (d.name, d.valence, d.is_dfn) == ("Rank", "monadic", True)


def test_definition_line_monadic_tradfn():
    d = parse_definition_line("r←or v")
    assert (d.name, d.valence) == ("or", "monadic")
    assert (d.right_name, d.result_name) == ("v", "r")


def test_render_membership_signature():
    h = FunctionHeader(
        name="xMsInt", valence="dyadic",
        left=ArgType("INT", 0), right=ArgType("INT", 1), result=ArgType("BOOL", 0),
    )
    assert render_csharp_signature(h, static=False) == "public bool xMsInt(int y, int[] x)"
    assert render_csharp_signature(h) == "public static bool xMsInt(int y, int[] x)"


def test_render_monadic_matrix():
    h = FunctionHeader(name="Rank", valence="monadic",
                       right=ArgType("INT", 2), result=ArgType("INT", 0))
    # derived by the stated mapping rules, cross-checked by re-parsing
    sig = render_csharp_signature(h, static=False)
    assert sig == "public int Rank(int[,] x)"
    back = parse_csharp_signature(sig)
    assert back.right == h.right and back.result == h.result


def test_render_string_scalars():
    h = FunctionHeader(name="Eq", valence="dyadic",
                       left=ArgType("STRING", 0), right=ArgType("STRING", 0),
                       result=ArgType("BOOL", 0))
    assert render_csharp_signature(h, static=False) == "public bool Eq(string y, string x)"


def test_reparse_consistency():
    for left_rank in range(3):
        for right_rank in range(3):
            h = FunctionHeader(
                name="F", valence="dyadic",
                left=ArgType("DOUBLE", left_rank), right=ArgType("CHAR", right_rank),
                result=ArgType("INT", 1),
            )
            back = parse_csharp_signature(render_csharp_signature(h))
            assert (back.left, back.right, back.result) == (h.left, h.right, h.result)


PUBLISHED_MEMBERSHIP_OVERLOADS = [
    "public bool xMsInt(int y, int[] x)",
    "public bool[] xMsInt(int[] y, int x)",
    "public bool[] xMsInt(int[] y, int[] x)",
    "public bool[,] xMsInt(int[,] y, int x)",
    "public bool[,] xMsInt(int[,] y, int[] x)",
    "public bool xMsInt(int y, int[,] x)",
    "public bool[] xMsInt(int[] y, int[,] x)",
    "public bool[,] xMsInt(int[,] y, int[,] x)",
]


def test_membership_overloads_match_published_set():
    sigs = expand_overloads("xMsInt", "INT", "INT", membership_result_rule, max_rank=2)
    got = {normalize_signature(s) for s in sigs}
    want = {normalize_signature(s) for s in PUBLISHED_MEMBERSHIP_OVERLOADS}
    assert got == want
    assert len(sigs) == 8


def test_overloads_max_rank_zero():
    sigs = expand_overloads("F", "INT", "INT", elementwise_result_rule("INT"), max_rank=0)
    assert len(sigs) == 1


def test_overloads_max_rank_one():
    # (2 choices)^2 rank pairs
    sigs = expand_overloads("F", "INT", "INT", elementwise_result_rule("INT"), max_rank=1)
    assert len(sigs) == 4
    assert len(set(sigs)) == 4


def test_overloads_square_count_for_nonvetoing_rules():
    for r in range(3):
        sigs = expand_overloads("F", "BOOL", "DOUBLE", elementwise_result_rule("INT"), max_rank=r)
        assert len(sigs) == (r + 1) ** 2
        assert len(set(sigs)) == (r + 1) ** 2


def test_render_injective_over_distinct_headers():
    rendered = set()
    count = 0
    for base in ("INT", "BOOL"):
        for lr in range(3):
            for rr in range(3):
                h = FunctionHeader(
                    name="G", valence="dyadic",
                    left=ArgType(base, lr), right=ArgType(base, rr),
                    result=ArgType("INT", 0),
                )
                rendered.add(render_csharp_signature(h))
                count += 1
    assert len(rendered) == count


def test_class_wrapper_names_util_class():
    h = FunctionHeader(name="xIsectr", valence="dyadic",
                       left=ArgType("INT", 2), right=ArgType("INT", 2),
                       result=ArgType("INT", 2))
    text = render_csharp_class(h)
    assert "public class xIsectrUtil" in text


def test_runtime_dispatch_skeleton():
    text = render_runtime_dispatch_skeleton("xMsInt")
    assert "public static object xMsInt(object y, object x)" in text
    assert "switch (y, x)" in text


def test_make_function_header_default_names():
    t = parse_header("⍝ ⍺ : INT ⍵ : INT[] → BOOL")
    h = make_function_header("xMsInt", t)
    assert (h.left_name, h.right_name, h.result_name) == ("y", "x", "r")
