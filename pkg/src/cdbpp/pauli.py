"""Pauli strings, weighted Pauli sums and the small amount of algebra we need.

Strings are stored as two bitplanes (``x`` and ``z``) laid out so that qubit 0
is the most significant bit of an ``n``-bit integer.  That matches the
statevector index convention used by :mod:`cdbpp.simulator`, so a string can be
applied to a state without any re-ordering.

    letter  x  z
    I       0  0
    X       1  0
    Y       1  1
    Z       0  1
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

DEFAULT_TOL = 1e-12

_LETTERS = "IXYZ"
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_LETTER_OF = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}

# single-qubit products a*b = phase * c, phase as a power of i
_PRODUCT: dict[tuple[str, str], tuple[int, str]] = {}
for _a in _LETTERS:
    _PRODUCT[("I", _a)] = (0, _a)
    _PRODUCT[(_a, "I")] = (0, _a)
    _PRODUCT[(_a, _a)] = (0, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1, _c)
    _PRODUCT[(_b, _a)] = (3, _c)

_PHASES = (1 + 0j, 1j, -1 + 0j, -1j)

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliError(ValueError):
    """Raised on malformed strings or mismatched qubit counts."""


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PauliError(f"qubit count must be positive, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise PauliError("bitplanes do not fit in n qubits")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse a dense label such as ``"XIZY"`` (qubit 0 leftmost)."""
        if not label:
            raise PauliError("empty Pauli label")
        x = z = 0
        for ch in label.upper():
            if ch not in _BITS:
                raise PauliError(f"unknown Pauli letter {ch!r}")
            bx, bz = _BITS[ch]
            x = (x << 1) | bx
            z = (z << 1) | bz
        return cls(len(label), x, z)

    @classmethod
    def from_sparse(cls, n: int, ops: dict[int, str]) -> PauliString:
        """Build from ``{qubit: letter}``; unlisted qubits are identity."""
        letters = ["I"] * n
        for q, ch in ops.items():
            if not 0 <= q < n:
                raise PauliError(f"qubit {q} out of range for n={n}")
            letters[q] = ch
        return cls.from_label("".join(letters))

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n, 0, 0)

    def _mask(self, q: int) -> int:
        return 1 << (self.n - 1 - q)

    def letter(self, q: int) -> str:
        m = self._mask(q)
        return _LETTER_OF[(int(bool(self.x & m)), int(bool(self.z & m)))]

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in range(self.n))

    @property
    def ops(self) -> str:
        return self.label

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.n) if (self.x | self.z) & self._mask(q))

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def is_diagonal(self) -> bool:
        return self.x == 0

    def sort_key(self) -> tuple:
        """Canonical order: qubit support first, then the letters on it."""
        sup = self.support
        return (sup, tuple(_LETTERS.index(self.letter(q)) for q in sup))

    def commutes_with(self, other: PauliString) -> bool:
        _check_n(self.n, other.n)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def to_matrix(self) -> np.ndarray:
        out = np.ones((1, 1), dtype=complex)
        for q in range(self.n):
            out = np.kron(out, _MATRICES[self.letter(q)])
        return out

    def __str__(self) -> str:
        sup = self.support
        if not sup:
            return "I"
        return "".join(f"{self.letter(q)}{q}" for q in sup)

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"


def _check_n(a: int, b: int) -> None:
    if a != b:
        raise PauliError(f"qubit count mismatch: {a} != {b}")


def multiply(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, c)`` with ``a @ b == phase * c``."""
    _check_n(a.n, b.n)
    power = 0
    for q in range(a.n):
        p, _ = _PRODUCT[(a.letter(q), b.letter(q))]
        power += p
    return _PHASES[power % 4], PauliString(a.n, a.x ^ b.x, a.z ^ b.z)


@dataclass(frozen=True)
class PauliTerm:
    coeff: complex
    string: PauliString

    def __post_init__(self) -> None:
        c = complex(self.coeff)
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise PauliError(f"non-finite coefficient {self.coeff!r}")
        object.__setattr__(self, "coeff", c)

    @property
    def n(self) -> int:
        return self.string.n

    def __str__(self) -> str:
        return f"{_fmt_coeff(self.coeff)}*{self.string}"


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return repr(c.real)
    return repr(c)


@dataclass(frozen=True)
class PauliSum:
    n: int
    terms: tuple[PauliTerm, ...] = ()

    def __post_init__(self) -> None:
        terms = tuple(self.terms)
        for t in terms:
            _check_n(self.n, t.n)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[complex, str | PauliString]]) -> PauliSum:
        terms = []
        for c, s in pairs:
            ps = s if isinstance(s, PauliString) else PauliString.from_label(s)
            terms.append(PauliTerm(c, ps))
        return cls(n, tuple(terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[PauliTerm]:
        return iter(self.terms)

    def __add__(self, other: PauliSum) -> PauliSum:
        _check_n(self.n, other.n)
        return PauliSum(self.n, self.terms + other.terms)

    def scale(self, factor: complex) -> PauliSum:
        return PauliSum(self.n, tuple(PauliTerm(t.coeff * factor, t.string) for t in self.terms))

    def strings(self) -> set[str]:
        return {t.string.label for t in self.terms}

    def coefficients(self) -> dict[str, complex]:
        return {t.string.label: t.coeff for t in simplify(self, 0.0).terms}

    @property
    def is_diagonal(self) -> bool:
        return all(t.string.is_diagonal for t in self.terms)

    def to_matrix(self) -> np.ndarray:
        dim = 1 << self.n
        out = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            out += t.coeff * t.string.to_matrix()
        return out

    def diagonal(self) -> np.ndarray:
        """Diagonal of a Z/I-only sum as a real vector over basis indices."""
        if not self.is_diagonal:
            raise PauliError("diagonal() needs a sum of Z/I strings")
        idx = np.arange(1 << self.n, dtype=np.int64)
        out = np.zeros(1 << self.n)
        for t in self.terms:
            parity = np.bitwise_count(idx & t.string.z) & 1
            out += t.coeff.real * (1 - 2 * parity.astype(np.float64))
        return out

    def to_text(self) -> str:
        """One ``coeff_re coeff_im STRING`` line per term."""
        return "".join(
            f"{t.coeff.real!r} {t.coeff.imag!r} {t.string.label}\n" for t in self.terms
        )

    @classmethod
    def from_text(cls, text: str) -> PauliSum:
        pairs: list[tuple[complex, str]] = []
        n = None
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise PauliError(f"line {lineno}: expected 're im STRING', got {line!r}")
            re_, im_, label = parts
            if n is None:
                n = len(label)
            elif len(label) != n:
                raise PauliError(f"line {lineno}: string length {len(label)} != {n}")
            pairs.append((complex(float(re_), float(im_)), label))
        if n is None:
            raise PauliError("empty Pauli sum text; qubit count unknown")
        return cls.from_pairs(n, pairs)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(t) for t in self.terms)


def simplify(s: PauliSum, tol: float = DEFAULT_TOL) -> PauliSum:
    """Merge like strings, drop ``|coeff| <= tol`` and sort canonically."""
    if tol < 0:
        raise PauliError("tolerance must be non-negative")
    acc: dict[PauliString, complex] = {}
    for t in s.terms:
        acc[t.string] = acc.get(t.string, 0j) + t.coeff
    kept = [PauliTerm(c, p) for p, c in acc.items() if abs(c) > tol]
    kept.sort(key=lambda t: t.string.sort_key())
    return PauliSum(s.n, tuple(kept))


def commutator(a: PauliTerm | PauliSum, b: PauliTerm | PauliSum, tol: float = DEFAULT_TOL) -> PauliSum:
    """``[a, b] = ab - ba`` as a simplified sum.

    Anticommuting strings give ``2ab``; commuting strings cancel.
    """
    sa = a if isinstance(a, PauliSum) else PauliSum(a.n, (a,))
    sb = b if isinstance(b, PauliSum) else PauliSum(b.n, (b,))
    _check_n(sa.n, sb.n)
    out: list[PauliTerm] = []
    for ta in sa.terms:
        for tb in sb.terms:
            if ta.string.commutes_with(tb.string):
                continue
            phase, prod = multiply(ta.string, tb.string)
            out.append(PauliTerm(2 * phase * ta.coeff * tb.coeff, prod))
    return simplify(PauliSum(sa.n, tuple(out)), tol)


def nc_first_order(h_mixer: PauliSum, h_cost: PauliSum, tol: float = DEFAULT_TOL) -> PauliSum:
    """First-order nested-commutator gauge potential structure.

    With ``H(lam) = (1 - lam) Hm + lam Hc`` the first-order term is
    ``i [H(lam), dH/dlam]``, and the ``lam`` dependence cancels exactly:
    ``[(1-lam)Hm + lam Hc, Hc - Hm] = [Hm, Hc]``.  So the result is
    ``i [Hm, Hc]``, returned with its coefficients; callers that only want the
    term families can discard them.
    """
    _check_n(h_mixer.n, h_cost.n)
    if not h_cost.is_diagonal:
        raise PauliError("cost Hamiltonian must contain only Z/I letters")
    for t in h_mixer.terms:
        s = t.string
        if s.weight != 1 or s.z != 0:
            raise PauliError(f"mixer term {s} is not a single-qubit X")
    return simplify(commutator(h_mixer, h_cost, tol).scale(1j), tol)

