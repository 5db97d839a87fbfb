"""Threat models against the original protocol.

Two adversaries matter here. The first is a malicious dealer P1 who
replaces every shared entangled state with inverse-Fourier product
states: the honest encoding (Fourier rotation, shift by the digit,
computational readout) then collapses each fake particle to the basis
state |(r + digit) mod d> with certainty, so every announced result
hands P1 the digit once he subtracts his own fabrication value r. The
decoys stay genuine, so the transmission check of the original protocol
sees a clean channel and the theft leaves no trace there.

The second is an outside eavesdropper running intercept-resend in a
uniformly random basis. She learns announced-basis values at the price
of disturbing half the decoys she guesses wrong, which is exactly what
the decoy check is built to catch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .protocol import (
    ProtocolConfig,
    RoundState,
    check_decoys,
    compute_sum,
    encode_and_measure,
    insert_decoys,
    validate_secrets,
)
from .qudit import BasisKind, QuditRegister, apply_iqft, basis_state, measure


@dataclass(frozen=True)
class IqftAttackPlan:
    """The dealer's fabrication choices.

    r_choices[j] is the value r used to fabricate every recipient's fake
    particle in round j. announce_correct_sum picks what P1 publishes at
    the end: True back-computes a first-party result that makes the
    published sum come out right (the stealthy play), False publishes an
    arbitrary draw.
    """

    r_choices: tuple[int, ...]
    announce_correct_sum: bool = True

    @classmethod
    def uniform(cls, d: int, rounds: int, rng: np.random.Generator,
                announce_correct_sum: bool = True) -> "IqftAttackPlan":
        values = tuple(int(x) for x in rng.integers(0, d, size=rounds))
        return cls(values, announce_correct_sum)


@dataclass(frozen=True)
class FabricatedRound:
    """One round's worth of fake particles, keyed by recipient (2..n)."""

    index: int
    r: int
    particles: dict[int, RoundState]


@dataclass(frozen=True)
class IqftAttackReport:
    """What the dealer saw, stole and published in one attack run."""

    announced: dict[int, tuple[int, ...]]
    recovered: dict[int, tuple[int, ...]]
    success: bool
    decoy_error_rates: dict[int, float]
    announced_sum: tuple[int, ...]
    sum_correct: bool


def fake_particle(d: int, r: int) -> QuditRegister:
    """The forged single-qudit state: the inverse Fourier transform of |r>."""
    if not 0 <= r < d:
        raise ValueError(f"fabrication value {r} out of range for d={d}")
    return apply_iqft(basis_state(d, [r]), 0)


def recover_secret_digit(announced: int, r: int, d: int) -> int:
    """Undo the fabrication offset: the stolen digit is (announced - r) mod d."""
    if not 0 <= announced < d:
        raise ValueError(f"announced value {announced} out of range for d={d}")
    if not 0 <= r < d:
        raise ValueError(f"fabrication value {r} out of range for d={d}")
    return (announced - r) % d


def fabricate_rounds(cfg: ProtocolConfig, plan: IqftAttackPlan) -> list[FabricatedRound]:
    """Build the dealer's fake product states for every round of the plan."""
    rounds = []
    for j, r in enumerate(plan.r_choices):
        if not 0 <= r < cfg.d:
            raise ValueError(f"fabrication value {r} out of range for d={cfg.d}")
        particles = {
            i: RoundState(j, fake_particle(cfg.d, r), owners=(i,))
            for i in range(2, cfg.n + 1)
        }
        rounds.append(FabricatedRound(j, r, particles))
    return rounds


def run_iqft_attack_original(cfg: ProtocolConfig, secrets,
                             plan: IqftAttackPlan | None = None,
                             rng: np.random.Generator | None = None) -> IqftAttackReport:
    """One run of the original protocol with the forging dealer in P1's seat.

    The honest participants behave exactly as in the honest run: they
    check genuine decoys (seeing a clean channel), encode their digits
    with the usual operations and announce their results. P1 recovers
    every digit by subtracting the fabrication values.

    secrets[0] is P1's own string; it only matters for the published sum.
    """
    validate_secrets(cfg, secrets)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if plan is None:
        plan = IqftAttackPlan.uniform(cfg.d, cfg.m, rng)
    if len(plan.r_choices) != cfg.m:
        raise ValueError(f"plan covers {len(plan.r_choices)} rounds, need m={cfg.m}")
    fabricated = fabricate_rounds(cfg, plan)

    # decoys are genuine, so the transmission check sees nothing
    decoy_regs, decoy_recs = insert_decoys(cfg, rng)
    rates = {i: check_decoys(decoy_recs[i], decoy_regs[i], rng) for i in range(2, cfg.n + 1)}

    announced: dict[int, tuple[int, ...]] = {}
    for i in range(2, cfg.n + 1):
        values = []
        for j, fab in enumerate(fabricated):
            value, _ = encode_and_measure(fab.particles[i], i, secrets[i - 1].digits[j], rng)
            values.append(value)
        announced[i] = tuple(values)
    recovered = {
        i: tuple(recover_secret_digit(v, plan.r_choices[j], cfg.d)
                 for j, v in enumerate(announced[i]))
        for i in range(2, cfg.n + 1)
    }
    success = all(recovered[i] == tuple(secrets[i - 1].digits) for i in range(2, cfg.n + 1))

    true_sum = compute_sum([s.digits for s in secrets], cfg.d)
    if plan.announce_correct_sum:
        # R1 = k_1 - (n-1) r cancels the fabrication offsets in the total
        p1_row = [
            (secrets[0].digits[j] - (cfg.n - 1) * plan.r_choices[j]) % cfg.d
            for j in range(cfg.m)
        ]
        announced_sum = tuple(compute_sum([p1_row] + [list(announced[i]) for i in range(2, cfg.n + 1)], cfg.d))
    else:
        announced_sum = tuple(int(x) for x in rng.integers(0, cfg.d, size=cfg.m))
    return IqftAttackReport(
        announced=announced,
        recovered=recovered,
        success=success,
        decoy_error_rates=rates,
        announced_sum=announced_sum,
        sum_correct=announced_sum == tuple(true_sum),
    )


def eve_intercept_resend(particles, rng: np.random.Generator) -> list[QuditRegister]:
    """Measure every in-transit particle in a uniformly random basis.

    particles is a sequence of (register, qudit) pairs; payload particles
    that are still entangled with the rest of a round are addressed by
    their qudit inside the shared register. The post-measurement register
    is returned in input order, which is exactly what a resent particle
    looks like to the receiver: the measured factor is the basis state
    Eve observed.
    """
    out = []
    for reg, q in particles:
        basis = BasisKind.V1 if int(rng.integers(2)) == 0 else BasisKind.V2
        out.append(measure(reg, q, basis, rng).posterior)
    return out
