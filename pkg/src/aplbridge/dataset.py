"""APL↔C# parallel-corpus loading, validation, splitting, and subsetting.

Corpora are JSON Lines: one datapoint object per line.  Loading is
diagnostic-driven — schema violations are reported with line numbers and
the offending line skipped, never a hard stop.  Unknown fields round-trip
untouched.
"""

from __future__ import annotations

import json
import os
import random
import tempfile
from collections import Counter
from dataclasses import dataclass, field

from . import lexer


@dataclass
class IoCase:
    method_name: str
    apl_right_arg: str
    apl_left_arg: str | None = None
    csharp_arg: str = ""
    output: object = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: dict) -> "IoCase":
        known = {"method_name", "AplLeftArg", "AplRightArg", "CSharpArg", "Output"}
        return cls(
            method_name=obj["method_name"],
            apl_left_arg=obj.get("AplLeftArg"),
            apl_right_arg=obj["AplRightArg"],
            csharp_arg=obj.get("CSharpArg", ""),
            output=obj.get("Output"),
            extra={k: v for k, v in obj.items() if k not in known},
        )

    def to_json(self) -> dict:
        obj: dict = {"method_name": self.method_name}
        if self.apl_left_arg is not None:
            obj["AplLeftArg"] = self.apl_left_arg
        obj["AplRightArg"] = self.apl_right_arg
        obj["CSharpArg"] = self.csharp_arg
        obj["Output"] = self.output
        obj.update(self.extra)
        return obj

    @property
    def dyadic(self) -> bool:
        return self.apl_left_arg is not None


@dataclass
class Datapoint:
    apl: str
    csharp: str
    io: list[IoCase] = field(default_factory=list)
    nl_description: str | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, obj: dict) -> "Datapoint":
        known = {"apl", "csharp", "io", "nl_description"}
        apl = obj["apl"]
        csharp = obj["csharp"]
        if not apl or not csharp:
            raise ValueError("apl and csharp must be non-empty")
        return cls(
            apl=apl,
            csharp=csharp,
            io=[IoCase.from_json(c) for c in obj.get("io", [])],
            nl_description=obj.get("nl_description"),
            extra={k: v for k, v in obj.items() if k not in known},
        )

    def to_json(self) -> dict:
        obj: dict = {"apl": self.apl, "csharp": self.csharp,
                     "io": [c.to_json() for c in self.io]}
        if self.nl_description is not None:
            obj["nl_description"] = self.nl_description
        obj.update(self.extra)
        return obj

    @property
    def ident(self) -> str:
        return self.extra.get("id") or _first_defn_name(self.apl) or ""

    @property
    def valence(self) -> str:
        if any(c.dyadic for c in self.io):
            return "dyadic"
        if self.io:
            return "monadic"
        return "unknown"


def _first_defn_name(apl: str) -> str | None:
    from .headers import DefinitionError, parse_definition_line

    for line in apl.splitlines():
        line = line.strip()
        if not line or line.startswith("⍝"):
            continue
        try:
            return parse_definition_line(line).name
        except DefinitionError:
            return None
    return None


@dataclass
class Diagnostic:
    line: int
    severity: str  # error | warning
    message: str

    def to_json(self) -> dict:
        return {"line": self.line, "severity": self.severity, "message": self.message}


@dataclass
class LoadResult:
    points: list[Datapoint]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


def load(path) -> LoadResult:
    points: list[Datapoint] = []
    diagnostics: list[Diagnostic] = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                diagnostics.append(Diagnostic(lineno, "error", f"invalid JSON: {exc}"))
                continue
            try:
                points.append(Datapoint.from_json(obj))
            except (KeyError, TypeError, ValueError) as exc:
                key = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
                diagnostics.append(Diagnostic(lineno, "error", f"bad datapoint: {key}"))
    return LoadResult(points, diagnostics)


def save(points: list[Datapoint], path) -> None:
    """Whole-file atomic write (temp file then rename)."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".jsonl.tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            for p in points:
                f.write(json.dumps(p.to_json(), ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class SplitSpec:
    train: float
    valid: float
    test: float
    seed: int = 0

    def __post_init__(self):
        if min(self.train, self.valid, self.test) < 0:
            raise ValueError("split ratios must be non-negative")
        if abs(self.train + self.valid + self.test - 1.0) > 1e-9:
            raise ValueError("split ratios must sum to 1")


def split(points: list[Datapoint], spec: SplitSpec):
    """Deterministic disjoint exhaustive partition.  Counts use largest
    remainder so e.g. a 49/143 test ratio yields exactly 49 test points."""
    order = list(points)
    random.Random(spec.seed).shuffle(order)
    n = len(order)
    ratios = (spec.train, spec.valid, spec.test)
    floors = [int(n * r) for r in ratios]
    remainders = [n * r - f for r, f in zip(ratios, floors)]
    leftover = n - sum(floors)
    for i in sorted(range(3), key=lambda i: -remainders[i])[:leftover]:
        floors[i] += 1
    a, b, _ = floors
    return order[:a], order[a : a + b], order[a + b :]


def subset(train: list[Datapoint], n: int, seed: int = 0) -> list[Datapoint]:
    """Nested scaling subsets: subset(m) ⊆ subset(n) for m ≤ n under the
    same seed (one shuffle, prefix take)."""
    if not 0 <= n <= len(train):
        raise ValueError(f"subset size {n} out of range 0..{len(train)}")
    order = list(train)
    random.Random(seed).shuffle(order)
    return order[:n]


def stats(points: list[Datapoint]) -> dict:
    valences = Counter(p.valence for p in points)
    io_counts = Counter(len(p.io) for p in points)
    token_lengths = [len([t for t in lexer.lex(p.apl) if t.kind != "comment"]) for p in points]
    hist: Counter = Counter()
    for n in token_lengths:
        hist[_bucket(n)] += 1
    return {
        "count": len(points),
        "valence": dict(valences),
        "io_cases_total": sum(len(p.io) for p in points),
        "io_case_histogram": {str(k): v for k, v in sorted(io_counts.items())},
        "token_length_histogram": {k: hist[k] for k in sorted(hist, key=_bucket_key)},
        "with_nl_description": sum(1 for p in points if p.nl_description),
    }


def _bucket(n: int) -> str:
    lo = (n // 25) * 25
    return f"{lo}-{lo + 24}"


def _bucket_key(label: str) -> int:
    return int(label.split("-")[0])


def export_sft(points: list[Datapoint], include_nl: bool = False) -> list[dict]:
    """Prompt/completion export in the chat-role structure used for
    fine-tuning; no training loop lives here."""
    from .strategies import SYSTEM_PROMPT, build_user_message, OUTPUT_FORMAT_PREFIX

    records = []
    for p in points:
        user = build_user_message(
            p.apl, signatures=None,
            nl_description=p.nl_description if include_nl else None,
            rag_context=None,
        )
        records.append(
            {
                "messages": [
                    {"role": "system", "content": SYSTEM_PROMPT},
                    {"role": "user", "content": user},
                    {"role": "assistant", "content": OUTPUT_FORMAT_PREFIX + p.csharp},
                ]
            }
        )
    return records
