"""Exact dense simulation of small registers of d-level systems.

A register of k qudits with d levels each is a complex amplitude vector
of length d**k, indexed by base-d digit strings with qudit 0 as the most
significant digit. Everything is simulated exactly (dense linear algebra,
no sampling shortcuts), which is what makes the probability-1 claims of
the protocol checkable rather than merely plausible.

Operations never mutate their inputs. Each returns a fresh register, so
states can be passed around and reused like values.

Two measurement bases appear throughout: V1 is the computational basis
{|0>, ..., |d-1>} and V2 is its Fourier image {QFT|0>, ..., QFT|d-1>}.
A V2 measurement is realized as an inverse Fourier rotation of the
target, a computational measurement, and a forward rotation back. That
is a true projection onto the V2 basis: the posterior's measured factor
is QFT|r>, and repeating the measurement reproduces r with certainty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

# Hard ceiling on the amplitude-vector length d**k. Construction past it
# fails loudly instead of swallowing memory. Module level so a caller who
# knows what they are doing can raise it.
DIM_CAP = 2**22

# Normalization drift allowed before a register is rejected as invalid.
NORM_TOL = 1e-9


class BasisKind(Enum):
    """Measurement basis tag: computational (V1) or its Fourier image (V2)."""

    V1 = "V1"
    V2 = "V2"


@dataclass(eq=False)
class QuditRegister:
    """State vector of k qudits, d levels each.

    amplitudes[x] is the coefficient of the basis state whose base-d
    digits are the expansion of x, qudit 0 most significant. The vector
    must be normalized; construction rejects anything off by more than
    NORM_TOL in squared magnitude.
    """

    d: int
    k: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"need at least 2 levels per qudit, got d={self.d}")
        if self.k < 1:
            raise ValueError(f"need at least 1 qudit, got k={self.k}")
        _check_cap(self.d, self.k)
        amp = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amp.size != self.d**self.k:
            raise ValueError(
                f"amplitude vector has length {amp.size}, expected {self.d}**{self.k}"
            )
        norm_sq = float(np.sum(np.abs(amp) ** 2))
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized: |psi|^2 = {norm_sq!r}")
        self.amplitudes = amp

    @property
    def dim(self) -> int:
        return self.d**self.k

    def digits_of(self, index: int) -> tuple[int, ...]:
        """Base-d digit tuple (qudit 0 first) of a flat amplitude index."""
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} out of range for dimension {self.dim}")
        digits = []
        for _ in range(self.k):
            index, rem = divmod(index, self.d)
            digits.append(rem)
        return tuple(reversed(digits))

    def __repr__(self) -> str:  # amplitudes are too long to echo
        return f"QuditRegister(d={self.d}, k={self.k})"


@dataclass(frozen=True)
class MeasurementOutcome:
    """Sampled value of one qudit together with the collapsed register."""

    value: int
    posterior: QuditRegister


def _check_cap(d: int, k: int) -> None:
    dim = d**k
    if dim > DIM_CAP:
        raise ValueError(f"register dimension {d}**{k} = {dim} exceeds cap {DIM_CAP}")


def _check_target(reg: QuditRegister, target: int) -> None:
    if not 0 <= target < reg.k:
        raise ValueError(f"target qudit {target} out of range for k={reg.k}")


@lru_cache(maxsize=None)
def _qft_matrix(d: int) -> np.ndarray:
    # Entry (l, r) = exp(2*pi*i * l*r / d) / sqrt(d). Reducing l*r mod d
    # before exponentiating keeps every phase argument in [0, 2*pi).
    lr = np.outer(np.arange(d), np.arange(d)) % d
    mat = np.exp(2j * np.pi * lr / d) / math.sqrt(d)
    mat.setflags(write=False)
    return mat


@lru_cache(maxsize=None)
def _iqft_matrix(d: int) -> np.ndarray:
    mat = _qft_matrix(d).conj().T.copy()
    mat.setflags(write=False)
    return mat


def _apply_single(reg: QuditRegister, mat: np.ndarray, target: int) -> QuditRegister:
    """Apply a d x d unitary to one qudit of the register."""
    _check_target(reg, target)
    psi = reg.amplitudes.reshape((reg.d,) * reg.k)
    psi = np.moveaxis(np.tensordot(mat, psi, axes=(1, target)), 0, target)
    return QuditRegister(reg.d, reg.k, psi.reshape(-1))


def basis_state(d: int, digits) -> QuditRegister:
    """Computational basis state |digits[0], digits[1], ...>."""
    digits = tuple(int(x) for x in digits)
    if not digits:
        raise ValueError("digit sequence must be non-empty")
    for x in digits:
        if not 0 <= x < d:
            raise ValueError(f"digit {x} out of range for d={d}")
    _check_cap(d, len(digits))
    index = 0
    for x in digits:
        index = index * d + x
    amp = np.zeros(d ** len(digits), dtype=np.complex128)
    amp[index] = 1.0
    return QuditRegister(d, len(digits), amp)


def omega_state(d: int, n: int) -> QuditRegister:
    """Equal superposition of |r>|r>...|r> over r, on n qudits.

    This GHZ-like state is what each summation round starts from: the
    sum of the computational digits is 0 with certainty, yet each single
    digit alone is uniform.
    """
    if n < 2:
        raise ValueError(f"the shared state spans at least 2 qudits, got n={n}")
    _check_cap(d, n)
    amp = np.zeros(d**n, dtype=np.complex128)
    # index of |r,r,...,r> is r * (1 + d + ... + d^(n-1))
    stride = (d**n - 1) // (d - 1)
    amp[np.arange(d) * stride] = 1.0 / math.sqrt(d)
    return QuditRegister(d, n, amp)


def apply_qft(reg: QuditRegister, target: int) -> QuditRegister:
    """Fourier transform on one qudit: |r> -> sum_l exp(2*pi*i*l*r/d)|l>/sqrt(d)."""
    return _apply_single(reg, _qft_matrix(reg.d), target)


def apply_iqft(reg: QuditRegister, target: int) -> QuditRegister:
    """Inverse Fourier transform on one qudit (conjugate transpose of the QFT)."""
    return _apply_single(reg, _iqft_matrix(reg.d), target)


def apply_shift(reg: QuditRegister, target: int, s: int) -> QuditRegister:
    """Cyclic shift on one qudit: |r> -> |(r + s) mod d>."""
    _check_target(reg, target)
    if not 0 <= s < reg.d:
        raise ValueError(f"shift amount {s} out of range for d={reg.d}")
    psi = reg.amplitudes.reshape((reg.d,) * reg.k)
    return QuditRegister(reg.d, reg.k, np.roll(psi, s, axis=target).reshape(-1))


def outcome_distribution(reg: QuditRegister, target: int, basis: BasisKind) -> np.ndarray:
    """Exact probability of each outcome when measuring one qudit.

    Returns a length-d vector. For V2 the distribution is computed on the
    inverse-rotated state, which is the same thing as projecting onto the
    Fourier basis directly.
    """
    _check_target(reg, target)
    if basis is BasisKind.V2:
        reg = apply_iqft(reg, target)
    psi = reg.amplitudes.reshape((reg.d,) * reg.k)
    probs = np.abs(psi) ** 2
    other_axes = tuple(ax for ax in range(reg.k) if ax != target)
    if other_axes:
        probs = probs.sum(axis=other_axes)
    return probs


def measure(reg: QuditRegister, target: int, basis: BasisKind, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective measurement of one qudit in the given basis.

    V1 samples the computational digit of the target and collapses it.
    V2 rotates by the inverse Fourier transform, measures computationally
    and rotates back, so the posterior's target factor is QFT|value>.
    """
    if basis is BasisKind.V2:
        rotated = apply_iqft(reg, target)
        value, posterior = _measure_computational(rotated, target, rng)
        return MeasurementOutcome(value, apply_qft(posterior, target))
    value, posterior = _measure_computational(reg, target, rng)
    return MeasurementOutcome(value, posterior)


def _measure_computational(reg: QuditRegister, target: int, rng: np.random.Generator):
    probs = outcome_distribution(reg, target, BasisKind.V1)
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    value = int(rng.choice(reg.d, p=probs))
    psi = reg.amplitudes.reshape((reg.d,) * reg.k)
    collapsed = np.zeros_like(psi)
    sel = (slice(None),) * target + (value,)
    collapsed[sel] = psi[sel]
    collapsed = collapsed.reshape(-1)
    collapsed = collapsed / np.linalg.norm(collapsed)
    return value, QuditRegister(reg.d, reg.k, collapsed)


def approx_equal(a: QuditRegister, b: QuditRegister, tol: float = 1e-9) -> bool:
    """State equality up to global phase: |<a|b>| >= 1 - tol."""
    if a.d != b.d or a.k != b.k:
        raise ValueError(f"cannot compare registers of shape ({a.d},{a.k}) and ({b.d},{b.k})")
    return abs(np.vdot(a.amplitudes, b.amplitudes)) >= 1.0 - tol
