"""Reading and writing ``.dtp`` problem files.

The format is line oriented. Tokens are separated by whitespace, the
punctuation ``{ } : |`` always stands alone, and ``#`` starts a comment::

    problem "medical-diagnosis"
    chance D { d ~d }
    decision T { t ~t } observes { S }
    cpt P | D {
      d  : 0.80 0.20
      ~d : 0.15 0.85
    }
    utility { T P D } {
      t p d : 10
      ...
    }
    order { D P S }

``problem`` must come first; the other sections may appear in any order.
Inside ``cpt`` and ``utility`` blocks each row ends at the end of its line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from decprune.errors import ProblemError
from decprune.model import (
    Cpt,
    Problem,
    UtilityTable,
    Variable,
    VarKind,
    validate_problem,
)

PUNCT = "{}:|"


@dataclass(frozen=True)
class Token:
    kind: str  # "word", "string", "punct", "newline", "eof"
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    lines = text.splitlines() or [""]
    for lineno, raw in enumerate(lines, start=1):
        i = 0
        n = len(raw)
        while i < n:
            ch = raw[i]
            if ch == "#":
                break
            if ch.isspace():
                i += 1
                continue
            if ch in PUNCT:
                tokens.append(Token("punct", ch, lineno, i + 1))
                i += 1
                continue
            if ch == '"':
                end = raw.find('"', i + 1)
                if end < 0:
                    raise ProblemError(
                        "E_SYNTAX", "unterminated string", line=lineno, column=i + 1
                    )
                tokens.append(Token("string", raw[i + 1 : end], lineno, i + 1))
                i = end + 1
                continue
            start = i
            while i < n and not raw[i].isspace() and raw[i] not in PUNCT + '#"':
                i += 1
            tokens.append(Token("word", raw[start:i], lineno, start + 1))
        tokens.append(Token("newline", "\n", lineno, n + 1))
    last = tokens[-1]
    tokens.append(Token("eof", "", last.line, last.column))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.pos = 0
        self.positions: dict[tuple, tuple[int, int]] = {}

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def skip_newlines(self) -> None:
        while self.tok.kind == "newline":
            self.pos += 1

    def error(self, expected: str, tok: Token | None = None) -> ProblemError:
        tok = tok or self.tok
        found = {"eof": "end of input", "newline": "end of line"}.get(
            tok.kind, repr(tok.text)
        )
        return ProblemError(
            "E_SYNTAX",
            f"expected {expected}, found {found}",
            line=tok.line,
            column=tok.column,
        )

    def expect_punct(self, ch: str) -> Token:
        self.skip_newlines()
        if self.tok.kind != "punct" or self.tok.text != ch:
            raise self.error(f"'{ch}'")
        return self.advance()

    def expect_word(self, what: str = "a name") -> Token:
        self.skip_newlines()
        if self.tok.kind != "word":
            raise self.error(what)
        return self.advance()

    def at_punct(self, ch: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == ch

    def word_list(self) -> list[Token]:
        """``{ w1 w2 ... }``, newlines allowed."""
        self.expect_punct("{")
        out = []
        while True:
            self.skip_newlines()
            if self.at_punct("}"):
                self.advance()
                return out
            out.append(self.expect_word())

    def number(self) -> float:
        tok = self.tok
        if tok.kind != "word":
            raise self.error("a number")
        try:
            x = float(tok.text)
        except ValueError:
            raise self.error("a number") from None
        if not math.isfinite(x):
            raise self.error("a finite number")
        self.advance()
        return x

    # -- grammar -----------------------------------------------------------

    def parse(self) -> Problem:
        self.skip_newlines()
        tok = self.tok
        if tok.kind != "word" or tok.text != "problem":
            raise self.error("'problem'")
        self.advance()
        if self.tok.kind != "string":
            raise self.error("a quoted problem name")
        name = self.advance().text

        variables: list[Variable] = []
        observations: dict[str, tuple[str, ...]] = {}
        cpts: dict[str, Cpt] = {}
        utility: UtilityTable | None = None
        order: tuple[str, ...] = ()
        arity: list[tuple] = []

        while True:
            self.skip_newlines()
            tok = self.tok
            if tok.kind == "eof":
                break
            if tok.kind != "word":
                raise self.error("a section keyword")
            key = tok.text
            if key in ("chance", "decision"):
                self.advance()
                var_tok = self.expect_word("a variable name")
                values = tuple(t.text for t in self.word_list())
                kind = VarKind.CHANCE if key == "chance" else VarKind.DECISION
                variables.append(Variable(var_tok.text, kind, values))
                self.positions.setdefault(
                    ("variable", var_tok.text), (var_tok.line, var_tok.column)
                )
                if kind is VarKind.DECISION:
                    observed: tuple[str, ...] = ()
                    if self.tok.kind == "word" and self.tok.text == "observes":
                        self.advance()
                        observed = tuple(t.text for t in self.word_list())
                    observations[var_tok.text] = observed
            elif key == "cpt":
                self.advance()
                cpt = self.cpt(arity)
                if cpt.child in cpts:
                    raise ProblemError(
                        "E_SYNTAX",
                        f"second cpt for {cpt.child!r}",
                        line=tok.line,
                        column=tok.column,
                    )
                cpts[cpt.child] = cpt
                self.positions[("cpt", cpt.child)] = (tok.line, tok.column)
            elif key == "utility":
                self.advance()
                if utility is not None:
                    raise ProblemError(
                        "E_SYNTAX", "second utility section",
                        line=tok.line, column=tok.column,
                    )
                utility = self.utility()
                self.positions[("utility",)] = (tok.line, tok.column)
            elif key == "order":
                self.advance()
                order = tuple(t.text for t in self.word_list())
                self.positions[("order",)] = (tok.line, tok.column)
            else:
                raise self.error("'chance', 'decision', 'cpt', 'utility' or 'order'")

        if utility is None:
            raise ProblemError(
                "E_SYNTAX", "missing utility section", line=self.tok.line,
                column=self.tok.column,
            )
        frames = {v.name: v.frame for v in variables}
        for child, line, column, n_probs in arity:
            if child in frames and n_probs != len(frames[child]):
                raise ProblemError(
                    "E_SYNTAX",
                    f"arity: row has {n_probs} probabilities but {child} has "
                    f"{len(frames[child])} values",
                    line=line,
                    column=column,
                )
        problem = Problem(
            name=name,
            variables=tuple(variables),
            cpts=cpts,
            utility=utility,
            observations=observations,
            causal_order=order,
        )
        try:
            return validate_problem(problem)
        except ProblemError as exc:
            where = exc.where
            while where:
                if where in self.positions:
                    raise exc.located(*self.positions[where]) from None
                where = where[:-1]
            raise

    def cpt(self, arity: list[tuple]) -> Cpt:
        child = self.expect_word("a variable name").text
        parents: list[str] = []
        if self.at_punct("|"):
            self.advance()
            while self.tok.kind == "word":
                parents.append(self.advance().text)
            if not parents:
                raise self.error("a parent variable name")
        self.expect_punct("{")
        rows: dict[tuple[str, ...], tuple[float, ...]] = {}
        while True:
            self.skip_newlines()
            if self.at_punct("}"):
                self.advance()
                break
            start = self.tok
            key = []
            while self.tok.kind == "word":
                key.append(self.advance().text)
            if not self.at_punct(":"):
                raise self.error("':' after the parent values")
            if len(key) != len(parents):
                raise ProblemError(
                    "E_SYNTAX",
                    f"arity: row names {len(key)} parent values, cpt {child} has "
                    f"{len(parents)} parents",
                    line=start.line,
                    column=start.column,
                )
            self.advance()
            probs = []
            while self.tok.kind == "word":
                probs.append(self.number())
            if not probs:
                raise self.error("a probability")
            if self.tok.kind not in ("newline", "eof") and not self.at_punct("}"):
                raise self.error("end of row")
            if tuple(key) in rows:
                raise ProblemError(
                    "E_SYNTAX", f"duplicate row {tuple(key)} in cpt {child}",
                    line=start.line, column=start.column,
                )
            rows[tuple(key)] = tuple(probs)
            arity.append((child, start.line, start.column, len(probs)))
            self.positions[("cpt", child, tuple(key))] = (start.line, start.column)
        return Cpt(child=child, parents=tuple(parents), rows=rows)

    def utility(self) -> UtilityTable:
        scope = tuple(t.text for t in self.word_list())
        self.expect_punct("{")
        entries: dict[tuple[str, ...], float] = {}
        while True:
            self.skip_newlines()
            if self.at_punct("}"):
                self.advance()
                break
            start = self.tok
            key = []
            while self.tok.kind == "word":
                key.append(self.advance().text)
            if not self.at_punct(":"):
                raise self.error("':' after the scope values")
            if len(key) != len(scope):
                raise ProblemError(
                    "E_SYNTAX",
                    f"arity: utility row names {len(key)} values, scope has "
                    f"{len(scope)}",
                    line=start.line,
                    column=start.column,
                )
            self.advance()
            value = self.number()
            if self.tok.kind not in ("newline", "eof") and not self.at_punct("}"):
                raise self.error("end of row")
            if tuple(key) in entries:
                raise ProblemError(
                    "E_SYNTAX", f"duplicate utility row {tuple(key)}",
                    line=start.line, column=start.column,
                )
            entries[tuple(key)] = value
            self.positions[("utility", tuple(key))] = (start.line, start.column)
        return UtilityTable(scope=scope, entries=entries)


def parse_problem(text: str) -> Problem:
    """Parse and validate a ``.dtp`` document.

    Raises:
        ProblemError: ``E_SYNTAX`` with line and column for grammar errors;
            validation errors carry the position of the offending section
            or row when it can be traced.
    """
    return _Parser(text).parse()


def load_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def bundled_problem_text(name: str = "medical-diagnosis") -> str:
    return (resources.files("decprune") / "data" / f"{name}.dtp").read_text("utf-8")


def medical_diagnosis() -> Problem:
    """The bundled medical diagnosis problem."""
    return parse_problem(bundled_problem_text("medical-diagnosis"))


def _num(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def render_problem(problem: Problem) -> str:
    """Inverse of :func:`parse_problem` up to layout and comments."""
    out = [f'problem "{problem.name}"', ""]
    for var in problem.variables:
        line = f"{var.kind.value} {var.name} {{ {' '.join(var.frame)} }}"
        if var.kind is VarKind.DECISION:
            observed = problem.observations.get(var.name, ())
            line += f" observes {{ {' '.join(observed)} }}"
        out.append(line)
    for name in problem.chance_variables:
        cpt = problem.cpts[name]
        head = f"cpt {name}" + (f" | {' '.join(cpt.parents)}" if cpt.parents else "")
        out += ["", head + " {"]
        for key, row in cpt.rows.items():
            lead = " ".join(key) + " " if key else ""
            out.append(f"  {lead}: {' '.join(_num(p) for p in row)}")
        out.append("}")
    out += ["", f"utility {{ {' '.join(problem.utility.scope)} }} {{"]
    for key, value in problem.utility.entries.items():
        out.append(f"  {' '.join(key)} : {_num(value)}")
    out.append("}")
    if problem.causal_order:
        out += ["", f"order {{ {' '.join(problem.causal_order)} }}"]
    return "\n".join(out) + "\n"
