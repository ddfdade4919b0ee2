"""Language definitions: sorts, operators and their binding arities.

A language is described by a small line-oriented text document:

    sort s
    sort e
    op let : (e, e.s) s
    op exp : (e) s
    op plus : (e, e) e
    litop num : int e
    litop var : name e

``op`` declares an operator with a parenthesised list of valences; a
valence ``x y.b`` binds one variable per sort left of the dot and has
body sort ``b``.  ``litop`` declares a parameterised leaf operator whose
single parameter is an integer or a name.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

PARAM_NONE = "none"
PARAM_INT = "int"
PARAM_NAME = "name"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class SpecError(ValueError):
    """Raised for malformed or inconsistent language documents."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownOperatorError(SpecError):
    pass


@dataclass(frozen=True, slots=True)
class Sort:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Valence:
    """One argument position: the sorts it binds plus its body sort."""

    binds: tuple[Sort, ...]
    body_sort: Sort

    def __str__(self) -> str:
        if not self.binds:
            return self.body_sort.name
        return " ".join(s.name for s in self.binds) + "." + self.body_sort.name


@dataclass(frozen=True, slots=True)
class OperatorDecl:
    name: str
    result_sort: Sort
    args: tuple[Valence, ...]
    param_kind: str = PARAM_NONE  # PARAM_NONE | PARAM_INT | PARAM_NAME
    # "user" for declared operators, "cursor"/"hole" for editor extensions.
    role: str = "user"

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_cursor(self) -> bool:
        return self.role == "cursor"

    @property
    def is_hole(self) -> bool:
        return self.role == "hole"

    def __str__(self) -> str:
        if self.param_kind != PARAM_NONE:
            return f"litop {self.name} : {self.param_kind} {self.result_sort}"
        args = ", ".join(str(v) for v in self.args)
        return f"op {self.name} : ({args}) {self.result_sort}"


@dataclass(frozen=True)
class LanguageSpec:
    sorts: tuple[Sort, ...]
    operators: tuple[OperatorDecl, ...]
    editor_extended: bool = False
    _by_name: dict[str, OperatorDecl] = field(
        default_factory=dict, repr=False, compare=False
    )

    def __post_init__(self):
        table = {op.name: op for op in self.operators}
        object.__setattr__(self, "_by_name", table)

    def sort(self, name: str) -> Sort:
        for s in self.sorts:
            if s.name == name:
                return s
        raise SpecError(f"unknown sort {name!r}")

    def has_sort(self, name: str) -> bool:
        return any(s.name == name for s in self.sorts)

    def operator(self, name: str) -> OperatorDecl:
        op = self._by_name.get(name)
        if op is None:
            raise UnknownOperatorError(f"unknown operator {name!r}")
        return op

    def has_operator(self, name: str) -> bool:
        return name in self._by_name

    def cursor_op(self, sort: Sort) -> OperatorDecl:
        return self.operator(f"cursor_{sort.name}")

    def hole_op(self, sort: Sort) -> OperatorDecl:
        return self.operator(f"hole_{sort.name}")

    def user_operators(self) -> tuple[OperatorDecl, ...]:
        return tuple(op for op in self.operators if op.role == "user")


def _check_reserved(name: str, sort_names: set[str], line: int | None) -> None:
    for prefix in ("cursor_", "hole_"):
        if name.startswith(prefix) and name[len(prefix):] in sort_names:
            raise SpecError(f"operator name {name!r} is reserved", line)


def _parse_valence(text: str, sorts: dict[str, Sort], line: int) -> Valence:
    text = text.strip()
    if not text:
        raise SpecError("empty valence", line)
    if "." in text:
        bound, _, body = text.partition(".")
        bind_names = bound.split()
    else:
        bind_names, body = [], text
    body = body.strip()
    for n in [*bind_names, body]:
        if n not in sorts:
            raise SpecError(f"undeclared sort {n!r} in valence", line)
    return Valence(tuple(sorts[n] for n in bind_names), sorts[body])


def load_spec(document: str) -> LanguageSpec:
    """Parse and validate a language document.  The result is not yet
    editor-extended (no cursor/hole operators)."""
    sorts: dict[str, Sort] = {}
    operators: list[OperatorDecl] = []
    op_lines: dict[str, int] = {}

    for lineno, raw in enumerate(document.splitlines(), start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        keyword, _, rest = text.partition(" ")
        rest = rest.strip()
        if keyword == "sort":
            if not _IDENT.match(rest):
                raise SpecError(f"bad sort name {rest!r}", lineno)
            if rest in sorts:
                raise SpecError(f"duplicate sort {rest!r}", lineno)
            sorts[rest] = Sort(rest)
        elif keyword in ("op", "litop"):
            name, sep, sig = rest.partition(":")
            name = name.strip()
            if not sep:
                raise SpecError("missing ':' in operator declaration", lineno)
            if not _IDENT.match(name):
                raise SpecError(f"bad operator name {name!r}", lineno)
            if name in op_lines:
                raise SpecError(f"duplicate operator {name!r}", lineno)
            sig = sig.strip()
            if keyword == "op":
                m = re.match(r"\((.*)\)\s*([A-Za-z_][A-Za-z0-9_]*)\Z", sig)
                if not m:
                    raise SpecError(f"bad operator signature {sig!r}", lineno)
                arg_text, result = m.group(1).strip(), m.group(2)
                if result not in sorts:
                    raise SpecError(f"undeclared sort {result!r}", lineno)
                valences = tuple(
                    _parse_valence(part, sorts, lineno)
                    for part in arg_text.split(",")
                ) if arg_text else ()
                operators.append(OperatorDecl(name, sorts[result], valences))
            else:
                parts = sig.split()
                if len(parts) != 2 or parts[0] not in (PARAM_INT, PARAM_NAME):
                    raise SpecError(f"bad litop signature {sig!r}", lineno)
                kind, result = parts
                if result not in sorts:
                    raise SpecError(f"undeclared sort {result!r}", lineno)
                operators.append(
                    OperatorDecl(name, sorts[result], (), param_kind=kind)
                )
            op_lines[name] = lineno
        else:
            raise SpecError(f"unknown keyword {keyword!r}", lineno)

    sort_names = set(sorts)
    for op in operators:
        _check_reserved(op.name, sort_names, op_lines[op.name])
    return LanguageSpec(tuple(sorts.values()), tuple(operators))


def serialize_spec(spec: LanguageSpec) -> str:
    """Inverse of load_spec.  Only unextended specs serialize; cursor and
    hole operators are an in-memory construction, never document text."""
    if spec.editor_extended:
        raise SpecError("cannot serialize an editor-extended spec")
    lines = [f"sort {s.name}" for s in spec.sorts]
    lines += [str(op) for op in spec.operators]
    return "\n".join(lines) + "\n"


def editor_extend(spec: LanguageSpec) -> LanguageSpec:
    """Add hole_<s> and cursor_<s> operators for every sort.

    hole_<s> is a nullary operator of sort s; cursor_<s> takes a single
    non-binding argument of sort s.  Extending twice is an error.
    """
    if spec.editor_extended:
        raise SpecError("spec is already editor-extended")
    extra: list[OperatorDecl] = []
    for s in spec.sorts:
        extra.append(OperatorDecl(f"hole_{s.name}", s, (), role="hole"))
        extra.append(
            OperatorDecl(f"cursor_{s.name}", s, (Valence((), s),), role="cursor")
        )
    return LanguageSpec(spec.sorts, spec.operators + tuple(extra), True)


def lookup_operator(spec: LanguageSpec, name: str, param=None) -> OperatorDecl:
    """Resolve an operator reference, validating its literal parameter."""
    decl = spec.operator(name)
    if decl.param_kind == PARAM_NONE:
        if param is not None:
            raise SpecError(f"operator {name!r} takes no literal")
    else:
        if param is None:
            raise SpecError(f"operator {name!r} requires a literal")
        if decl.param_kind == PARAM_INT and not isinstance(param, int):
            raise SpecError(f"operator {name!r} requires an integer literal")
        if decl.param_kind == PARAM_NAME and not isinstance(param, str):
            raise SpecError(f"operator {name!r} requires a name literal")
    return decl


# Transcription of the two-sort arithmetic/let language used throughout
# the docs and tests; also shipped as data/letlang.edspec.
LETLANG_DOCUMENT = """\
sort s
sort e
op let : (e, e.s) s
op exp : (e) s
op plus : (e, e) e
litop num : int e
litop var : name e
"""
