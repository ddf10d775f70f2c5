"""Error type shared by validation, parsing, building and solving."""

from __future__ import annotations


class ProblemError(ValueError):
    """A decision problem, tree or input file is malformed.

    ``code`` is one of the stable ``E_*`` identifiers (``E_CPT_ROW_SUM``,
    ``E_SYNTAX``, ...). ``where`` is an optional structural locator used by
    the parser to attach ``line``/``column`` after validation fails.
    """

    def __init__(
        self,
        code: str,
        message: str,
        *,
        line: int | None = None,
        column: int | None = None,
        where: tuple | None = None,
    ) -> None:
        self.code = code
        self.message = message
        self.line = line
        self.column = column
        self.where = where
        super().__init__(str(self))

    def __str__(self) -> str:
        pos = ""
        if self.line is not None:
            pos = f" at line {self.line}"
            if self.column is not None:
                pos += f", column {self.column}"
        return f"{self.code}{pos}: {self.message}"

    def located(self, line: int, column: int | None = None) -> ProblemError:
        return ProblemError(
            self.code, self.message, line=line, column=column, where=self.where
        )
