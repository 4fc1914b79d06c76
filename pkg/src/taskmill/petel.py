"""The PeTEL prediction-task expression language.

A task names a grouping entity, one filter, one aggregator, and search
parameters (prediction window, lead, feature history). This module defines
the operator inventory and type rules, the three-line text form with its
parser and canonical renderer, the natural-language translation, and the
semantic validity check.

Canonical text uses the short operator spellings (``eq_fil``); the longer
``eq_filter`` family is accepted as input aliases. The parser also accepts
the whole expression on one line with comma-separated clauses.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import InvalidTask, ParseError, UnknownOperator
from .schema import AttributeKind, Schema, canonical_name


class FilterOp(Enum):
    ALL = "all_fil"
    GREATER = "greater_fil"
    LESS = "less_fil"
    EQ = "eq_fil"
    NEQ = "neq_fil"


class AggOp(Enum):
    COUNT = "count_agg"
    SUM = "sum_agg"
    AVG = "avg_agg"
    MIN = "min_agg"
    MAX = "max_agg"
    MAJORITY = "majority_agg"


# operator/kind compatibility (the type rules of the language)
NUMERIC_FILTER_OPS = frozenset({FilterOp.GREATER, FilterOp.LESS})
CATEGORY_FILTER_OPS = frozenset({FilterOp.EQ, FilterOp.NEQ})
NUMERIC_AGG_OPS = frozenset({AggOp.SUM, AggOp.AVG, AggOp.MIN, AggOp.MAX})

FILTER_KINDS: dict[FilterOp, frozenset[AttributeKind]] = {
    FilterOp.ALL: frozenset(),
    FilterOp.GREATER: frozenset({AttributeKind.NUMERICAL}),
    FilterOp.LESS: frozenset({AttributeKind.NUMERICAL}),
    FilterOp.EQ: frozenset({AttributeKind.CATEGORICAL, AttributeKind.ENTITY}),
    FilterOp.NEQ: frozenset({AttributeKind.CATEGORICAL, AttributeKind.ENTITY}),
}

AGG_KINDS: dict[AggOp, frozenset[AttributeKind]] = {
    AggOp.COUNT: frozenset(),
    AggOp.SUM: frozenset({AttributeKind.NUMERICAL}),
    AggOp.AVG: frozenset({AttributeKind.NUMERICAL}),
    AggOp.MIN: frozenset({AttributeKind.NUMERICAL}),
    AggOp.MAX: frozenset({AttributeKind.NUMERICAL}),
    AggOp.MAJORITY: frozenset({AttributeKind.CATEGORICAL, AttributeKind.ENTITY}),
}

_FILTER_ALIASES = {op.value: op for op in FilterOp}
_FILTER_ALIASES.update({op.value + "ter": op for op in FilterOp})  # eq_filter etc.
_AGG_ALIASES = {op.value: op for op in AggOp}


@dataclass(frozen=True)
class AttrRef:
    """An attribute used on the right-hand side of a filter comparison."""

    name: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", canonical_name(self.name))


Threshold = float | str | AttrRef | None


@dataclass(frozen=True)
class FilterExpr:
    op: FilterOp
    attribute: str | None = None
    threshold: Threshold = None

    def __post_init__(self) -> None:
        if self.attribute is not None:
            object.__setattr__(self, "attribute", canonical_name(self.attribute))
        if self.op is FilterOp.ALL:
            if self.attribute is not None or self.threshold is not None:
                raise ValueError("all_fil takes no attribute or threshold")
            return
        if self.attribute is None:
            raise ValueError(f"{self.op.value} requires an attribute")
        if isinstance(self.threshold, bool):
            raise ValueError("boolean threshold not supported")
        if self.op in NUMERIC_FILTER_OPS and isinstance(self.threshold, str):
            raise ValueError(f"{self.op.value} threshold must be numeric")
        if self.op in CATEGORY_FILTER_OPS and isinstance(self.threshold, float):
            raise ValueError(f"{self.op.value} threshold must be a category literal")

    @property
    def resolved(self) -> bool:
        return self.op is FilterOp.ALL or self.threshold is not None


@dataclass(frozen=True)
class AggExpr:
    op: AggOp
    attribute: str | None = None

    def __post_init__(self) -> None:
        if self.attribute is not None:
            object.__setattr__(self, "attribute", canonical_name(self.attribute))
        if self.op is AggOp.COUNT and self.attribute is not None:
            raise ValueError("count_agg takes no attribute")
        if self.op is not AggOp.COUNT and self.attribute is None:
            raise ValueError(f"{self.op.value} requires an attribute")


_SECONDS_PER_UNIT = {"d": 86400, "h": 3600, "m": 60}


def parse_duration(text: str) -> int:
    m = re.fullmatch(r"(\d+)([dhm])", text.strip())
    if m is None:
        raise ValueError(f"bad duration {text!r}, expected INTEGER followed by d, h, or m")
    return int(m.group(1)) * _SECONDS_PER_UNIT[m.group(2)]


def format_duration(seconds: int) -> str:
    for unit, size in (("d", 86400), ("h", 3600), ("m", 60)):
        if seconds % size == 0:
            return f"{seconds // size}{unit}"
    raise ValueError(f"duration not a whole number of minutes: {seconds}")


@dataclass(frozen=True)
class SearchParams:
    """Window/lead/history durations, stored as whole-minute seconds."""

    window: int = 86400
    lead: int = 0
    history: int = 7 * 86400

    def __post_init__(self) -> None:
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.lead < 0:
            raise ValueError("lead must be non-negative")
        if self.history <= 0:
            raise ValueError("history must be positive")
        for v in (self.window, self.lead, self.history):
            if v % 60 != 0:
                raise ValueError("durations must be whole minutes")


DEFAULT_PARAMS = SearchParams()


@dataclass(frozen=True)
class Task:
    """One task expression; identity is a stable hash of the canonical text."""

    entity: str
    filter: FilterExpr
    agg: AggExpr
    params: SearchParams = DEFAULT_PARAMS
    id: str = field(init=False, compare=False, default="")

    def __post_init__(self) -> None:
        object.__setattr__(self, "entity", canonical_name(self.entity))
        text = render_petel(self)
        digest = hashlib.blake2b(text.encode(), digest_size=8).hexdigest()
        object.__setattr__(self, "id", digest)

    def signature(self) -> frozenset[tuple[str, str]]:
        """Role-tagged slot set used by the diversity measure."""
        parts = {("entity", self.entity), ("filter_op", self.filter.op.value),
                 ("agg_op", self.agg.op.value)}
        if self.filter.attribute is not None:
            parts.add(("filter_attr", self.filter.attribute))
        if self.agg.attribute is not None:
            parts.add(("agg_attr", self.agg.attribute))
        return frozenset(parts)


@dataclass(frozen=True)
class ValidityResult:
    valid: bool
    score: float
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class ValidityRule:
    """Blocklist pattern (or attribute-pair allowance) for semantic checks.

    A ``block`` rule rejects any task matching every field that is set.
    An ``allow_pair`` rule whitelists one attribute-pair comparison, which
    is otherwise always rejected.
    """

    rule_id: str
    action: str = "block"
    filter_op: FilterOp | None = None
    filter_attribute: str | None = None
    agg_op: AggOp | None = None
    agg_attribute: str | None = None
    pair: tuple[str, str] | None = None

    def matches(self, task: Task) -> bool:
        if self.action != "block":
            return False
        if self.filter_op is not None and task.filter.op is not self.filter_op:
            return False
        if self.filter_attribute is not None and task.filter.attribute != canonical_name(self.filter_attribute):
            return False
        if self.agg_op is not None and task.agg.op is not self.agg_op:
            return False
        if self.agg_attribute is not None and task.agg.attribute != canonical_name(self.agg_attribute):
            return False
        return True

    def allows_pair(self, a: str, b: str) -> bool:
        if self.action != "allow_pair" or self.pair is None:
            return False
        want = {canonical_name(self.pair[0]), canonical_name(self.pair[1])}
        return {canonical_name(a), canonical_name(b)} == want


# ---------------------------------------------------------------------------
# rendering

def _format_literal(value: float | str) -> str:
    if isinstance(value, float):
        return repr(value)
    return f"'{value}'"


def _render_filter(f: FilterExpr) -> str:
    if f.op is FilterOp.ALL:
        return "NONE"
    if f.threshold is None:
        return f"{f.op.value}(<{f.attribute}>)"
    if isinstance(f.threshold, AttrRef):
        return f"{f.op.value}(<{f.attribute}>, <{f.threshold.name}>)"
    return f"{f.op.value}(<{f.attribute}, {_format_literal(f.threshold)}>)"


def render_petel(task: Task) -> str:
    """Canonical text form; parsing it back yields an equal task."""
    agg_arg = "None" if task.agg.attribute is None else f"<{task.agg.attribute}>"
    lines = [
        f"Entity: {task.entity}",
        f"Filter: {_render_filter(task.filter)}",
        f"Aggregator: {task.agg.op.value}({agg_arg})",
    ]
    if task.params != DEFAULT_PARAMS:
        p = task.params
        lines.append(
            "Params: window={},lead={},history={}".format(
                format_duration(p.window), format_duration(p.lead), format_duration(p.history)
            )
        )
    return "\n".join(lines)


def render_petel_inline(task: Task) -> str:
    """Single-line display form with comma-separated clauses."""
    return ", ".join(render_petel(task).split("\n"))


# ---------------------------------------------------------------------------
# parsing

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_CLAUSE_SPLIT = re.compile(r",\s*(?=(?:Filter|Aggregator|Params)\s*:)")


def _split_lines(text: str) -> list[str]:
    lines: list[str] = []
    for raw in text.strip().splitlines():
        raw = raw.strip()
        if not raw:
            continue
        lines.extend(part.strip() for part in _CLAUSE_SPLIT.split(raw))
    return lines


def _parse_literal(text: str, line_no: int) -> float | str | AttrRef:
    text = text.strip()
    m = re.fullmatch(r"'([^']*)'", text)
    if m:
        return m.group(1)
    m = re.fullmatch(rf"<\s*({_IDENT})\s*>", text)
    if m:
        return AttrRef(m.group(1))
    try:
        return float(text)
    except ValueError:
        raise ParseError(line_no, f"number, quoted literal, or <ATTRIBUTE>, got {text!r}") from None


def _parse_filter(body: str, line_no: int) -> FilterExpr:
    if body.strip() == "NONE":
        return FilterExpr(FilterOp.ALL)
    m = re.fullmatch(rf"({_IDENT})\s*\((.*)\)", body.strip())
    if m is None:
        raise ParseError(line_no, "NONE or a filter call like greater_fil(<ATTRIBUTE>)")
    op_name, args = m.group(1), m.group(2).strip()
    op = _FILTER_ALIASES.get(op_name)
    if op is None:
        raise UnknownOperator(op_name)
    if op is FilterOp.ALL:
        if args.lower() in ("", "none"):
            return FilterExpr(op)
        raise ParseError(line_no, "all_fil takes no arguments")

    # forms: <A> | <A, literal> | <A>, <B>
    m = re.fullmatch(rf"<\s*({_IDENT})\s*>", args)
    if m:
        return FilterExpr(op, m.group(1))
    m = re.fullmatch(rf"<\s*({_IDENT})\s*,\s*(.+?)\s*>", args)
    if m:
        return FilterExpr(op, m.group(1), _parse_literal(m.group(2), line_no))
    m = re.fullmatch(rf"<\s*({_IDENT})\s*>\s*,\s*(.+)", args)
    if m:
        return FilterExpr(op, m.group(1), _parse_literal(m.group(2), line_no))
    raise ParseError(line_no, "filter arguments like <ATTRIBUTE>, <ATTRIBUTE, literal>, or <A>, <B>")


def _parse_agg(body: str, line_no: int) -> AggExpr:
    m = re.fullmatch(rf"({_IDENT})\s*\((.*)\)", body.strip())
    if m is None:
        raise ParseError(line_no, "an aggregator call like max_agg(<ATTRIBUTE>)")
    op_name, arg = m.group(1), m.group(2).strip()
    op = _AGG_ALIASES.get(op_name)
    if op is None:
        raise UnknownOperator(op_name)
    if arg.lower() == "none" or arg == "":
        if op is not AggOp.COUNT:
            raise ParseError(line_no, f"{op.value} requires an attribute argument")
        return AggExpr(op)
    m = re.fullmatch(rf"<\s*({_IDENT})\s*>", arg)
    if m is None:
        raise ParseError(line_no, "None or <ATTRIBUTE> as the aggregator argument")
    if op is AggOp.COUNT:
        raise ParseError(line_no, "count_agg takes None, not an attribute")
    return AggExpr(op, m.group(1))


def _parse_params(body: str, line_no: int) -> SearchParams:
    m = re.fullmatch(
        r"window=(\d+[dhm])\s*,\s*lead=(\d+[dhm])\s*,\s*history=(\d+[dhm])", body.strip()
    )
    if m is None:
        raise ParseError(line_no, "window=DURATION,lead=DURATION,history=DURATION")
    return SearchParams(
        window=parse_duration(m.group(1)),
        lead=parse_duration(m.group(2)),
        history=parse_duration(m.group(3)),
    )


def parse_petel(text: str) -> Task:
    """Parse task text (three-line or single-line comma form) into a Task."""
    lines = _split_lines(text)
    if len(lines) < 3:
        raise ParseError(len(lines), "three clauses: Entity, Filter, Aggregator")
    if len(lines) > 4:
        raise ParseError(5, "at most four clauses")

    def clause(i: int, keyword: str) -> str:
        m = re.fullmatch(rf"{keyword}\s*:\s*(.*)", lines[i])
        if m is None:
            raise ParseError(i + 1, f"{keyword}: ...")
        return m.group(1).strip()

    entity_body = clause(0, "Entity")
    m = re.fullmatch(rf"<\s*({_IDENT})\s*>|({_IDENT})", entity_body)
    if m is None:
        raise ParseError(1, "an entity attribute name, optionally in angle brackets")
    entity = m.group(1) or m.group(2)

    filt = _parse_filter(clause(1, "Filter"), 2)
    agg = _parse_agg(clause(2, "Aggregator"), 3)
    params = _parse_params(clause(3, "Params"), 4) if len(lines) == 4 else DEFAULT_PARAMS
    return Task(entity=entity, filter=filt, agg=agg, params=params)


# ---------------------------------------------------------------------------
# natural-language rendering

_AGG_PHRASES = {
    AggOp.COUNT: "the number of records",
    AggOp.MAX: "the maximum <{a}>",
    AggOp.MIN: "the minimum <{a}>",
    AggOp.SUM: "the total <{a}>",
    AggOp.AVG: "the average of <{a}>",
    AggOp.MAJORITY: "the majority of <{a}>",
}

_FILTER_RELATIONS = {
    FilterOp.GREATER: "greater than",
    FilterOp.LESS: "less than",
    FilterOp.EQ: "equal to",
    FilterOp.NEQ: "not equal to",
}


def _nl_literal(value: Threshold) -> str:
    if value is None:
        return "__"
    if isinstance(value, AttrRef):
        return f"<{value.name}>"
    if isinstance(value, float):
        return f"{value:g}"
    return f"'{value}'"


def render_nl(task: Task, schema: Schema, rules: Sequence[ValidityRule] = ()) -> str:
    """Translate a valid task into its generated description."""
    result = check_validity(task, schema, rules)
    if not result.valid:
        raise InvalidTask(result.reasons)
    agg_phrase = _AGG_PHRASES[task.agg.op].format(a=task.agg.attribute)
    text = f"For each <{task.entity}> predict {agg_phrase}"
    if task.agg.attribute is not None:
        text += " in all related records"
    if task.filter.op is not FilterOp.ALL:
        relation = _FILTER_RELATIONS[task.filter.op]
        text += f" with <{task.filter.attribute}> {relation} {_nl_literal(task.filter.threshold)}"
    return text


# ---------------------------------------------------------------------------
# validity

def check_validity(task: Task, schema: Schema, rules: Sequence[ValidityRule] = ()) -> ValidityResult:
    """Semantic validity of a structurally well-formed task.

    Structural typing (operator arity, threshold literal types) is enforced
    at construction; this checks the task against a concrete schema: the
    attributes exist, operator/kind compatibility holds, the grouping
    attribute is an entity, the filter does not target the grouping entity,
    attribute-pair comparisons are whitelisted, and no blocklist rule
    matches. Invalidity is a result, not an error.
    """
    reasons: list[str] = []

    entity_kind = schema.kind_of(task.entity)
    if entity_kind is None:
        reasons.append("unknown-entity")
    elif entity_kind is not AttributeKind.ENTITY:
        reasons.append("entity-not-entity")

    f = task.filter
    if f.op is not FilterOp.ALL:
        kind = schema.kind_of(f.attribute)
        if kind is None:
            reasons.append("unknown-attribute")
        elif kind not in FILTER_KINDS[f.op]:
            reasons.append("filter-kind-mismatch")
        if f.attribute == task.entity:
            reasons.append("filter-on-entity")
        if isinstance(f.threshold, AttrRef):
            ref_kind = schema.kind_of(f.threshold.name)
            if ref_kind is None:
                reasons.append("unknown-attribute")
            if not any(r.allows_pair(f.attribute, f.threshold.name) for r in rules):
                reasons.append("attribute-pair-comparison")

    a = task.agg
    if a.attribute is not None:
        kind = schema.kind_of(a.attribute)
        if kind is None:
            reasons.append("unknown-attribute")
        elif kind not in AGG_KINDS[a.op]:
            reasons.append("agg-kind-mismatch")

    for rule in rules:
        if rule.matches(task):
            reasons.append(f"blocklist:{rule.rule_id}")

    unique = tuple(dict.fromkeys(reasons))
    valid = not unique
    return ValidityResult(valid=valid, score=1.0 if valid else 0.0, reasons=unique)
