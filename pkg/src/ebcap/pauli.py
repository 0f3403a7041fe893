"""Pauli strings in symplectic form and [n,1] stabilizer codes.

Qubit ``i`` (1-based in text, 0-based in code) maps to bit ``i`` of the
``x_bits``/``z_bits`` integers.  Phases are dropped everywhere.

Code-file grammar (UTF-8, one directive per line)::

    file       := { line }
    line       := blank | comment | directive [ comment ]
    comment    := "#" <anything up to end of line>
    directive  := "n" INT
                | "name" TEXT
                | "g" PAULI          # generator, in measurement order
                | "X" PAULI          # logical X
                | "Z" PAULI          # logical Z
    PAULI      := n characters from {I, X, Y, Z}; qubit 1 first

``n`` must appear before any Pauli line; ``X`` and ``Z`` appear exactly once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ebcap.bellalg import BellLabel

_PAULI_CHARS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


@dataclass(frozen=True)
class PauliString:
    n: int
    x_bits: int = 0
    z_bits: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"qubit count must be positive, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x_bits < limit and 0 <= self.z_bits < limit):
            raise ValueError(f"bit masks do not fit in {self.n} qubits")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliString":
        """``kind`` acting on 0-based ``qubit``."""
        x, z = _PAULI_CHARS[kind]
        return cls(n, x << qubit, z << qubit)

    @property
    def support(self) -> frozenset[int]:
        mask = self.x_bits | self.z_bits
        return frozenset(i for i in range(self.n) if mask >> i & 1)

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    @property
    def last_qubit(self) -> int:
        """1-based index of the highest qubit in the support (0 for identity)."""
        return (self.x_bits | self.z_bits).bit_length()

    def bit_strings(self) -> tuple[str, str]:
        """``(x, z)`` as 0/1 strings, qubit 1 first."""
        return (
            "".join(str(self.x_bits >> i & 1) for i in range(self.n)),
            "".join(str(self.z_bits >> i & 1) for i in range(self.n)),
        )

    def __mul__(self, other: "PauliString") -> "PauliString":
        _check_same_n(self, other)
        return PauliString(self.n, self.x_bits ^ other.x_bits, self.z_bits ^ other.z_bits)

    def __str__(self) -> str:
        chars = "IXZY"
        return "".join(chars[(self.x_bits >> i & 1) | (self.z_bits >> i & 1) << 1] for i in range(self.n))


def _check_same_n(p: PauliString, q: PauliString) -> None:
    if p.n != q.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {q.n}")


def parse_pauli(text: str, n: int | None = None) -> PauliString:
    text = text.strip()
    if n is not None and len(text) != n:
        raise ValueError(f"Pauli string {text!r} has length {len(text)}, expected {n}")
    if not text:
        raise ValueError("empty Pauli string")
    x = z = 0
    for i, ch in enumerate(text):
        try:
            xb, zb = _PAULI_CHARS[ch]
        except KeyError:
            raise ValueError(f"invalid Pauli character {ch!r} at position {i + 1}") from None
        x |= xb << i
        z |= zb << i
    return PauliString(len(text), x, z)


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_same_n(p, q)
    return ((p.x_bits & q.z_bits) ^ (p.z_bits & q.x_bits)).bit_count() % 2 == 0


def gf2_rank(rows: Iterable[int]) -> int:
    """Rank over GF(2) of integer-encoded row vectors."""
    basis: list[int] = []
    for row in rows:
        for b in basis:
            row = min(row, row ^ b)
        if row:
            basis.append(row)
    return len(basis)


@dataclass(frozen=True)
class StabilizerCode:
    n: int
    generators: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    name: str = field(default="", compare=False)

    @property
    def num_generators(self) -> int:
        return len(self.generators)


def validate_code(code: StabilizerCode) -> str | None:
    """Return ``None`` for a valid [n,1] code, else a description of the first problem."""
    ops = list(code.generators) + [code.logical_x, code.logical_z]
    for idx, op in enumerate(ops):
        if op.n != code.n:
            return f"operator {idx + 1} acts on {op.n} qubits, code has {code.n}"
    if len(code.generators) != code.n - 1:
        return f"an [n,1] code needs {code.n - 1} generators, got {len(code.generators)}"
    gens = code.generators
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if not commutes(gens[i], gens[j]):
                return f"generators g{i + 1} and g{j + 1} anticommute"
    rows = [g.x_bits | g.z_bits << code.n for g in gens]
    rank = gf2_rank(rows)
    if rank != len(gens):
        return f"generators are not independent (GF(2) rank {rank} < {len(gens)})"
    for name, logical in (("X", code.logical_x), ("Z", code.logical_z)):
        for i, g in enumerate(gens):
            if not commutes(logical, g):
                return f"logical {name} anticommutes with g{i + 1}"
    if commutes(code.logical_x, code.logical_z):
        return "logical X and logical Z commute"
    return None


def syndrome(error: PauliString, code: StabilizerCode) -> tuple[int, ...]:
    """Bit ``i`` is 1 iff measuring ``g_{i+1}`` returns -1."""
    return tuple(0 if commutes(error, g) else 1 for g in code.generators)


def syndrome_index(error: PauliString, code: StabilizerCode) -> int:
    """Syndrome packed into an int, ``g1`` in the least significant bit."""
    return sum(bit << i for i, bit in enumerate(syndrome(error, code)))


def logical_class(error: PauliString, code: StabilizerCode) -> BellLabel:
    amplitude = 0 if commutes(error, code.logical_z) else 1
    phase = 0 if commutes(error, code.logical_x) else 1
    return BellLabel.from_bits(phase, amplitude)


def uses_schedule(code: StabilizerCode) -> tuple[int, ...]:
    """Channel uses needed before each generator can be measured."""
    out = []
    reach = 0
    for g in code.generators:
        reach = max(reach, g.last_qubit)
        out.append(reach)
    return tuple(out)


def builtin_cat(n: int) -> StabilizerCode:
    if n < 2:
        raise ValueError(f"cat code needs n >= 2, got {n}")
    gens = tuple(PauliString(n, 0, 0b11 << i) for i in range(n - 1))
    full = (1 << n) - 1
    z_mask = full if n % 2 else full >> 1
    return StabilizerCode(n, gens, PauliString(n, full, 0), PauliString(n, 0, z_mask), name=f"cat{n}")


SHOR9_GENERATORS = (
    "ZZIIIIIII",
    "IZZIIIIII",
    "IIIZZIIII",
    "IIIIZZIII",
    "XXXXXXIII",
    "IIIIIIZZI",
    "IIIIIIIZZ",
    "IIIXXXXXX",
)


def builtin_shor9() -> StabilizerCode:
    return StabilizerCode(
        9,
        tuple(parse_pauli(g, 9) for g in SHOR9_GENERATORS),
        logical_x=parse_pauli("Z" * 9),
        logical_z=parse_pauli("X" * 9),
        name="shor9",
    )


def builtin_code(name: str) -> StabilizerCode:
    """Look up ``shor9`` or ``cat<N>``."""
    if name == "shor9":
        return builtin_shor9()
    m = re.fullmatch(r"cat(\d+)", name)
    if m:
        return builtin_cat(int(m.group(1)))
    raise ValueError(f"unknown builtin code {name!r} (expected 'shor9' or 'cat<N>')")


def render_code(code: StabilizerCode) -> str:
    lines = []
    if code.name:
        lines.append(f"name {code.name}")
    lines.append(f"n {code.n}")
    lines.extend(f"g {g}" for g in code.generators)
    lines.append(f"X {code.logical_x}")
    lines.append(f"Z {code.logical_z}")
    return "\n".join(lines) + "\n"


class CodeFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_code_file(text: str) -> StabilizerCode:
    n: int | None = None
    name = ""
    gens: list[PauliString] = []
    logicals: dict[str, PauliString] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key, args = parts[0], parts[1:]
        if key == "name":
            name = " ".join(args)
            continue
        if len(args) != 1:
            raise CodeFileError(f"expected '{key} <value>'", lineno)
        if key == "n":
            if n is not None:
                raise CodeFileError("duplicate 'n' line", lineno)
            try:
                n = int(args[0])
            except ValueError:
                raise CodeFileError(f"bad qubit count {args[0]!r}", lineno) from None
            if n < 2:
                raise CodeFileError(f"qubit count must be at least 2, got {n}", lineno)
        elif key in ("g", "X", "Z"):
            if n is None:
                raise CodeFileError("'n' must precede Pauli lines", lineno)
            try:
                op = parse_pauli(args[0], n)
            except ValueError as exc:
                raise CodeFileError(str(exc), lineno) from None
            if key == "g":
                gens.append(op)
            elif key in logicals:
                raise CodeFileError(f"duplicate '{key}' line", lineno)
            else:
                logicals[key] = op
        else:
            raise CodeFileError(f"unknown directive {key!r}", lineno)
    if n is None:
        raise CodeFileError("missing 'n' line")
    missing = [k for k in ("X", "Z") if k not in logicals]
    if missing:
        raise CodeFileError(f"missing X/Z line ({', '.join(missing)} absent)")
    code = StabilizerCode(n, tuple(gens), logicals["X"], logicals["Z"], name=name)
    problem = validate_code(code)
    if problem:
        raise CodeFileError(f"invalid code: {problem}")
    return code


def code_from_operators(
    generators: Sequence[str], logical_x: str, logical_z: str, name: str = ""
) -> StabilizerCode:
    n = len(logical_x)
    return StabilizerCode(
        n,
        tuple(parse_pauli(g, n) for g in generators),
        parse_pauli(logical_x, n),
        parse_pauli(logical_z, n),
        name=name,
    )
