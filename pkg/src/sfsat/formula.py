"""In-memory CNF formulas and DIMACS CNF reading/writing.

Clauses are stored in a flat literal array plus an index pointer (CSR layout),
so million-clause formulas stay cheap while still allowing mixed widths for
parsed external files.
"""

from __future__ import annotations

import io
import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

log = logging.getLogger(__name__)


class DimacsError(ValueError):
    """Malformed DIMACS input."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimacsWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Formula:
    """A multiset of clauses over variables ``1..n``.

    ``literals[indptr[j]:indptr[j + 1]]`` is clause ``j``; literal ``-x``
    is the negation of variable ``x``. Duplicated clauses are kept.
    """

    n: int
    literals: np.ndarray
    indptr: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lits = np.ascontiguousarray(self.literals, dtype=np.int64)
        ptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        object.__setattr__(self, "literals", lits)
        object.__setattr__(self, "indptr", ptr)
        lits.flags.writeable = False
        ptr.flags.writeable = False
        if ptr.ndim != 1 or ptr.size < 1 or ptr[0] != 0 or ptr[-1] != lits.size:
            raise ValueError("indptr does not describe the literal array")
        if lits.size:
            if np.any(lits == 0):
                raise ValueError("literal 0 is not allowed")
            if np.abs(lits).max() > self.n:
                raise ValueError("literal exceeds the variable count")

    @classmethod
    def from_array(cls, n, clauses, metadata=None):
        """Build from an ``(m, k)`` integer array of fixed-width clauses."""
        arr = np.asarray(clauses, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("expected an (m, k) array")
        m, k = arr.shape
        return cls(n, arr.reshape(-1), np.arange(m + 1, dtype=np.int64) * k, dict(metadata or {}))

    @classmethod
    def from_clauses(cls, n, clauses: Iterable[Iterable[int]], metadata=None):
        lits: list[int] = []
        ptr = [0]
        for clause in clauses:
            lits.extend(int(l) for l in clause)
            ptr.append(len(lits))
        return cls(n, np.array(lits, dtype=np.int64), np.array(ptr, dtype=np.int64), dict(metadata or {}))

    @property
    def m(self) -> int:
        return self.indptr.size - 1

    @property
    def size(self) -> int:
        """Total number of literal occurrences, |F|."""
        return int(self.literals.size)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def width(self) -> int | None:
        """Common clause width, or None for an empty or mixed-width formula."""
        w = self.widths
        if w.size == 0 or np.any(w != w[0]):
            return None
        return int(w[0])

    def as_array(self) -> np.ndarray:
        """Clauses as an ``(m, k)`` array (fixed-width formulas only)."""
        k = self.width
        if k is None:
            if self.m == 0:
                return np.zeros((0, 0), dtype=np.int64)
            raise ValueError("formula has mixed clause widths")
        return self.literals.reshape(self.m, k)

    def clauses(self) -> list[tuple[int, ...]]:
        lits = self.literals.tolist()
        ptr = self.indptr.tolist()
        return [tuple(lits[ptr[j]:ptr[j + 1]]) for j in range(self.m)]

    def __iter__(self):
        return iter(self.clauses())

    def __len__(self):
        return self.m

    def __eq__(self, other):
        if not isinstance(other, Formula):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.literals, other.literals)
        )

    def __repr__(self):
        return f"Formula(n={self.n}, m={self.m}, width={self.width})"

    def subset(self, mask) -> "Formula":
        """Formula made of the clauses selected by a boolean mask."""
        mask = np.asarray(mask, dtype=bool)
        w = self.widths[mask]
        rows = np.repeat(mask, self.widths)
        ptr = np.zeros(w.size + 1, dtype=np.int64)
        np.cumsum(w, out=ptr[1:])
        return Formula(self.n, self.literals[rows], ptr, dict(self.metadata))


def canonical_clauses(formula: Formula) -> list[tuple[int, ...]]:
    """Clauses with literals sorted by variable index, then sign (negative first)."""
    return [tuple(sorted(c, key=lambda l: (abs(l), l))) for c in formula.clauses()]


def distinct_clause_count(formula: Formula) -> int:
    k = formula.width
    if k is not None and formula.m:
        arr = formula.as_array()
        order = np.lexsort((arr, np.abs(arr)))
        canon = np.take_along_axis(arr, order, axis=1)
        return int(np.unique(canon, axis=0).shape[0])
    return len(set(canonical_clauses(formula)))


def write_dimacs(formula: Formula, stream=None, metadata: Mapping | None = None):
    """Serialize ``formula`` as DIMACS CNF.

    Comment lines ``c key = value`` come first (from ``formula.metadata`` then
    ``metadata``), then the ``p cnf`` header and one zero-terminated clause per
    line. Writes ASCII bytes to ``stream`` if given, otherwise returns them.
    """
    meta = dict(formula.metadata)
    meta.update(metadata or {})
    out = io.StringIO()
    for key, value in meta.items():
        out.write(f"c {key} = {value}\n")
    out.write(f"p cnf {formula.n} {formula.m}\n")
    lits = formula.literals
    k = formula.width
    if k is not None:
        body = np.empty((formula.m, k + 1), dtype=np.int64)
        body[:, :k] = formula.as_array()
        body[:, k] = 0
        np.savetxt(out, body, fmt="%d", delimiter=" ")
    else:
        for c in formula.clauses():
            out.write(" ".join(map(str, c + (0,))) + "\n")
    data = out.getvalue().encode("ascii")
    if stream is None:
        return data
    stream.write(data)
    return None


def _iter_lines(source):
    if isinstance(source, (bytes, bytearray)):
        yield from bytes(source).decode("ascii", errors="replace").splitlines()
    elif isinstance(source, str):
        yield from source.splitlines()
    else:
        for line in source:
            if isinstance(line, bytes):
                line = line.decode("ascii", errors="replace")
            yield line.rstrip("\r\n")


def read_dimacs_metadata(source) -> dict[str, str]:
    """Collect ``c key = value`` comment pairs preceding the clauses."""
    meta = {}
    for line in _iter_lines(source):
        s = line.strip()
        if s.startswith("c") and "=" in s:
            key, _, value = s[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif s.startswith("p"):
            break
    return meta


def parse_dimacs(source, strict_count=False) -> Formula:
    """Parse DIMACS CNF from bytes, text, or an iterable of lines.

    Clauses may span lines; ``%`` ends the clause section (SATLIB files).
    A clause-count mismatch with the header only warns unless
    ``strict_count``; the actual clauses win.
    """
    n = None
    declared_m = None
    lits: list[int] = []
    ptr = [0]
    pending = 0
    for lineno, line in enumerate(_iter_lines(source), start=1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("%"):
            break
        if s.startswith("p"):
            if n is not None:
                raise DimacsError("duplicated 'p cnf' header", lineno)
            fields = s.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise DimacsError(f"bad header {s!r}", lineno)
            try:
                n, declared_m = int(fields[2]), int(fields[3])
            except ValueError:
                raise DimacsError(f"bad header {s!r}", lineno) from None
            if n < 0 or declared_m < 0:
                raise DimacsError("negative header count", lineno)
            continue
        if n is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for tok in s.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"non-integer token {tok!r}", lineno) from None
            if lit == 0:
                ptr.append(len(lits))
                pending = 0
                continue
            if abs(lit) > n:
                raise DimacsError(f"literal {lit} out of range for n={n}", lineno)
            lits.append(lit)
            pending += 1
    if n is None:
        raise DimacsError("missing 'p cnf' header")
    if pending:
        # unterminated final clause
        ptr.append(len(lits))
    m = len(ptr) - 1
    if m != declared_m:
        msg = f"header declares {declared_m} clauses, found {m}"
        if strict_count:
            raise DimacsError(msg)
        warnings.warn(msg, DimacsWarning, stacklevel=2)
    return Formula(n, np.array(lits, dtype=np.int64), np.array(ptr, dtype=np.int64))


def read_dimacs(path) -> Formula:
    with open(path, "rb") as fh:
        formula = parse_dimacs(fh)
    with open(path, "rb") as fh:
        meta = read_dimacs_metadata(fh)
    return Formula(formula.n, formula.literals, formula.indptr, meta)
