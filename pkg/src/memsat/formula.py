"""3-CNF formulas, DIMACS I/O and assignment checking."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np


class FormulaError(ValueError):
    """A formula violates a structural invariant."""


class DimacsError(ValueError):
    """Malformed DIMACS input."""


class Literal(NamedTuple):
    var: int  # 0-based
    sign: int  # +1 or -1

    def to_dimacs(self) -> int:
        return self.sign * (self.var + 1)

    @classmethod
    def from_dimacs(cls, lit: int) -> Literal:
        if lit == 0:
            raise DimacsError("literal 0 is a terminator, not a variable")
        return cls(abs(lit) - 1, 1 if lit > 0 else -1)


Clause = tuple[Literal, Literal, Literal]
Assignment = tuple[bool, ...]


def _check_clause(clause: Sequence[Literal], num_vars: int, index: int) -> Clause:
    if len(clause) != 3:
        raise FormulaError(f"clause {index}: expected 3 literals, got {len(clause)}")
    lits = tuple(Literal(int(v), int(s)) for v, s in clause)
    for lit in lits:
        if lit.sign not in (1, -1):
            raise FormulaError(f"clause {index}: sign must be +1 or -1, got {lit.sign}")
        if not 0 <= lit.var < num_vars:
            raise FormulaError(
                f"clause {index}: variable {lit.var + 1} outside 1..{num_vars}"
            )
    if len({lit.var for lit in lits}) != 3:
        raise FormulaError(f"clause {index}: repeated variable")
    return lits  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class Formula:
    """Immutable 3-CNF instance.

    Besides the clause list, construction precomputes flat arrays used by the
    solver kernels: ``lit_var``/``lit_sign`` of shape ``(M, 3)`` and a CSR
    incidence map (``inc_ptr``, ``inc_clause``, ``inc_pos``) listing, for each
    variable, the clauses it occurs in and its position inside each one.
    """

    num_vars: int
    clauses: tuple[Clause, ...]
    lit_var: np.ndarray = field(init=False, repr=False)
    lit_sign: np.ndarray = field(init=False, repr=False)
    inc_ptr: np.ndarray = field(init=False, repr=False)
    inc_clause: np.ndarray = field(init=False, repr=False)
    inc_pos: np.ndarray = field(init=False, repr=False)

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[Sequence[int]]]):
        if num_vars < 3:
            raise FormulaError(f"need at least 3 variables, got {num_vars}")
        checked = tuple(_check_clause(c, num_vars, i) for i, c in enumerate(clauses))
        if not checked:
            raise FormulaError("formula has no clauses")
        object.__setattr__(self, "num_vars", int(num_vars))
        object.__setattr__(self, "clauses", checked)

        lit_var = np.array([[l.var for l in c] for c in checked], dtype=np.int64)
        lit_sign = np.array([[l.sign for l in c] for c in checked], dtype=np.int64)
        inc_ptr, inc_clause, inc_pos = _build_incidence(lit_var, num_vars)
        for name, arr in (
            ("lit_var", lit_var),
            ("lit_sign", lit_sign),
            ("inc_ptr", inc_ptr),
            ("inc_clause", inc_clause),
            ("inc_pos", inc_pos),
        ):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def incidence(self, n: int) -> list[tuple[int, int]]:
        """``(clause index, position)`` pairs for variable ``n``."""
        lo, hi = self.inc_ptr[n], self.inc_ptr[n + 1]
        return list(zip(self.inc_clause[lo:hi].tolist(), self.inc_pos[lo:hi].tolist()))

    def as_dimacs_lists(self) -> list[list[int]]:
        return [[lit.to_dimacs() for lit in c] for c in self.clauses]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        return self.num_vars == other.num_vars and self.clauses == other.clauses

    def __hash__(self) -> int:
        return hash((self.num_vars, self.clauses))

    def __repr__(self) -> str:
        return f"Formula(num_vars={self.num_vars}, num_clauses={self.num_clauses})"


def _build_incidence(lit_var: np.ndarray, num_vars: int):
    flat = lit_var.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=num_vars)
    inc_ptr = np.zeros(num_vars + 1, dtype=np.int64)
    np.cumsum(counts, out=inc_ptr[1:])
    inc_clause = (order // 3).astype(np.int64)
    inc_pos = (order % 3).astype(np.int64)
    return inc_ptr, inc_clause, inc_pos


def parse_dimacs(text: bytes | str) -> Formula:
    """Parse DIMACS CNF restricted to 3-literal clauses.

    Clauses may span lines; each ends at a ``0`` token. A ``%`` line (SATLIB
    trailer) ends the clause section.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("ascii")
        except UnicodeDecodeError as exc:
            raise DimacsError("DIMACS input must be ASCII") from exc

    header: tuple[int, int] | None = None
    clauses: list[list[Literal]] = []
    current: list[Literal] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: malformed header {line!r}") from exc
            if header[0] < 0 or header[1] < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad token {tok!r}") from exc
            if lit == 0:
                _close_clause(current, header[0], len(clauses), lineno)
                clauses.append(current)
                current = []
            else:
                current.append(Literal.from_dimacs(lit))

    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("last clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise DimacsError(f"header declares {header[1]} clauses, found {len(clauses)}")
    try:
        return Formula(header[0], clauses)
    except FormulaError as exc:
        raise DimacsError(str(exc)) from exc


def _close_clause(lits: list[Literal], num_vars: int, index: int, lineno: int) -> None:
    if len(lits) != 3:
        raise DimacsError(f"line {lineno}: clause {index} has {len(lits)} literals, need 3")
    if len({l.var for l in lits}) != 3:
        raise DimacsError(f"line {lineno}: clause {index} repeats a variable")
    for l in lits:
        if l.var >= num_vars:
            raise DimacsError(
                f"line {lineno}: variable {l.var + 1} exceeds header count {num_vars}"
            )


def emit_dimacs(f: Formula) -> bytes:
    lines = [f"p cnf {f.num_vars} {f.num_clauses}"]
    lines += [" ".join(str(x) for x in c) + " 0" for c in f.as_dimacs_lists()]
    return ("\n".join(lines) + "\n").encode("ascii")


def clause_satisfied(f: Formula, values: np.ndarray) -> np.ndarray:
    """Boolean mask over clauses for a Boolean vector ``values``."""
    lit_true = values[f.lit_var] == (f.lit_sign > 0)
    return lit_true.any(axis=1)


def evaluate(f: Formula, a: Sequence[bool]) -> tuple[bool, int]:
    """Return ``(satisfied, number of unsatisfied clauses)``."""
    values = np.asarray(a, dtype=bool)
    if values.shape != (f.num_vars,):
        raise FormulaError(
            f"assignment has length {values.size}, formula has {f.num_vars} variables"
        )
    unsat = int(f.num_clauses - np.count_nonzero(clause_satisfied(f, values)))
    return unsat == 0, unsat


def brute_force_satisfiable(f: Formula, chunk_bits: int = 16) -> Assignment | None:
    """Exhaustive search over all 2**N assignments; intended for N <= ~24.

    Returns the first satisfying assignment in binary counting order, or None.
    """
    n = f.num_vars
    if n > 30:
        raise ValueError(f"exhaustive search over 2**{n} assignments refused")
    total = 1 << n
    step = 1 << min(chunk_bits, n)
    want = (f.lit_sign > 0).astype(np.uint64)
    var = f.lit_var.astype(np.uint64)
    for start in range(0, total, step):
        a = np.arange(start, start + step, dtype=np.uint64)
        ok = np.ones(step, dtype=bool)
        for m in range(f.num_clauses):
            sat = np.zeros(step, dtype=bool)
            for k in range(3):
                sat |= ((a >> var[m, k]) & np.uint64(1)) == want[m, k]
            ok &= sat
            if not ok.any():
                break
        hits = np.flatnonzero(ok)
        if hits.size:
            x = int(a[hits[0]])
            return tuple(bool((x >> i) & 1) for i in range(n))
    return None
