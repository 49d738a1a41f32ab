"""Sealing through a human-invertible one-way function.

The one-way function f maps k-bit strings to opaque image tokens. Here it is
simulated by a keyed Feistel permutation, so injectivity holds by
construction, and the "only a human can invert it" property becomes a
capability split: ``CaptchaFunction`` can only evaluate forward, while the
separate ``HumanOracle`` holds inversion access and logs every query it ever
answers. Oracle use is incoherent by design, which is the whole point of the
construction.

A message y is sealed as the uniform superposition over all k0-bit pads r of
|r> on register B paired with the token of

    encode(y, r) = f(s || t),   s = y xor G(r),   t = r xor H(s)

on register C. G and H are fixed public hash-derived functions, so sealed
states and golden vectors are reproducible bit for bit from the context key.

All bit strings are handled as Python ints with widths fixed by the context
parameters: y has n bits, r has k0 bits, f inputs have k = n + k0 bits.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .protocols import OAEP, SealedInstance, UnsealSpec
from .states import (
    DimensionTooLarge,
    Label,
    ProjPartition,
    SparseState,
    measure_partition,
    squared_overlap,
)

#: Reference context key; fixes f, G, and H so golden vectors never drift.
REFERENCE_MASTER_KEY = bytes(range(32))

#: Largest sealed-state support, 2**16 branches.
SUPPORT_CAP = 1 << 16

TOKEN_PREFIX = "img_"
_FEISTEL_ROUNDS = 4


class OaepError(Exception):
    pass


class LengthMismatch(OaepError):
    """A value does not fit the bit width fixed by the parameters."""


class OracleUnavailable(OaepError):
    """The context was built forward-only; nothing can invert f."""


class DegenerateUWarning(UserWarning):
    """The excluded set covers every pad, leaving no useless-pad projector."""


@dataclass(frozen=True)
class OaepParams:
    """Security parameters: k-bit f inputs, k0-bit pads, n-bit messages."""

    k: int
    k0: int
    n: int

    def __post_init__(self) -> None:
        if self.n != self.k - self.k0:
            raise ValueError("parameters must satisfy n = k - k0")
        if not 1 <= self.k0 <= 16:
            raise ValueError("k0 must be between 1 and 16 at desk scale")
        if self.n < 1:
            raise ValueError("message length n must be positive")


def _prf_bits(key: bytes, label: bytes, value: int, value_bits: int, out_bits: int) -> int:
    """Deterministic hash expansion of ``value`` to exactly ``out_bits`` bits."""
    if out_bits <= 0:
        return 0
    data = value.to_bytes(max(1, (value_bits + 7) // 8), "big")
    out = b""
    counter = 0
    while 8 * len(out) < out_bits:
        out += hashlib.sha256(
            key + b"|" + label + b"|" + counter.to_bytes(4, "big") + data
        ).digest()
        counter += 1
    return int.from_bytes(out, "big") >> (8 * len(out) - out_bits)


def _round_mix(key: bytes, rnd: int, value: int, value_bits: int, out_bits: int) -> int:
    return _prf_bits(key, b"round" + bytes([rnd]), value, value_bits, out_bits)


def _feistel_forward(key: bytes, k: int, x: int) -> int:
    wl, wr = k // 2, k - k // 2
    left, right = x >> wr, x & ((1 << wr) - 1)
    for rnd in range(_FEISTEL_ROUNDS):
        left, right, wl, wr = (
            right,
            left ^ _round_mix(key, rnd, right, wr, wl),
            wr,
            wl,
        )
    return (left << wr) | right


def _feistel_inverse(key: bytes, k: int, x: int) -> int:
    widths = [(k // 2, k - k // 2)]
    for _ in range(_FEISTEL_ROUNDS):
        wl, wr = widths[-1]
        widths.append((wr, wl))
    wl, wr = widths[-1]
    left, right = x >> wr, x & ((1 << wr) - 1)
    for rnd in reversed(range(_FEISTEL_ROUNDS)):
        wl, wr = widths[rnd]
        left, right = right ^ _round_mix(key, rnd, left, wr, wl), left
    return (left << wr) | right


class CaptchaFunction:
    """Forward-only capability for the keyed one-to-one token map."""

    def __init__(self, key: bytes, k: int):
        self._key = key
        self.k = k

    def forward(self, x: int) -> str:
        if not 0 <= x < (1 << self.k):
            raise LengthMismatch(f"input must be a {self.k}-bit value")
        value = _feistel_forward(self._key, self.k, x)
        return f"{TOKEN_PREFIX}{value:0{(self.k + 3) // 4}x}"

    def check_injective(self) -> bool:
        """Exhaustive injectivity check; intended for small k only."""
        seen = set()
        for x in range(1 << self.k):
            token = self.forward(x)
            if token in seen:
                return False
            seen.add(token)
        return True


def token_payload(token: str, k: int) -> int:
    if not token.startswith(TOKEN_PREFIX):
        raise ValueError(f"malformed token {token!r}")
    value = int(token[len(TOKEN_PREFIX):], 16)
    if not 0 <= value < (1 << k):
        raise ValueError(f"token payload out of range for k={k}")
    return value


class HumanOracle:
    """Inversion capability with a mandatory, append-only query log.

    Every ``invert`` call records the shown token before answering; the log is
    never truncated. Inversion is exact (the idealized perfect human).
    """

    def __init__(self, key: bytes, k: int):
        self._key = key
        self.k = k
        self._log: list[str] = []

    @property
    def query_log(self) -> tuple[str, ...]:
        return tuple(self._log)

    def invert(self, token: str) -> int:
        value = token_payload(token, self.k)
        self._log.append(token)
        return _feistel_inverse(self._key, self.k, value)


@dataclass(frozen=True)
class OaepContext:
    """Parameters plus the f/G/H instances and optional inversion oracle."""

    params: OaepParams
    master_key: bytes
    captcha: CaptchaFunction
    human: HumanOracle | None
    g_key: bytes
    h_key: bytes

    @classmethod
    def create(
        cls,
        k0: int,
        n: int,
        master_key: bytes = REFERENCE_MASTER_KEY,
        with_human: bool = True,
    ) -> "OaepContext":
        params = OaepParams(k=n + k0, k0=k0, n=n)
        captcha_key = hashlib.sha256(master_key + b"|captcha").digest()
        g_key = hashlib.sha256(master_key + b"|G").digest()
        h_key = hashlib.sha256(master_key + b"|H").digest()
        captcha = CaptchaFunction(captcha_key, params.k)
        human = HumanOracle(captcha_key, params.k) if with_human else None
        return cls(params, master_key, captcha, human, g_key, h_key)

    def g(self, r: int) -> int:
        """Pad expander G: k0 bits in, n bits out."""
        if not 0 <= r < (1 << self.params.k0):
            raise LengthMismatch(f"r must be a {self.params.k0}-bit value")
        return _prf_bits(self.g_key, b"G", r, self.params.k0, self.params.n)

    def h(self, s: int) -> int:
        """Digest H: n bits in, k0 bits out."""
        if not 0 <= s < (1 << self.params.n):
            raise LengthMismatch(f"s must be a {self.params.n}-bit value")
        return _prf_bits(self.h_key, b"H", s, self.params.n, self.params.k0)


def context_to_dict(ctx: OaepContext) -> dict:
    def key_id(key: bytes) -> str:
        return hashlib.sha256(key).hexdigest()[:12]

    return {
        "k": ctx.params.k,
        "k0": ctx.params.k0,
        "n": ctx.params.n,
        "key_ids": {
            "master": ctx.master_key.hex(),
            "captcha": key_id(ctx.captcha._key),
            "g": key_id(ctx.g_key),
            "h": key_id(ctx.h_key),
        },
    }


def context_from_dict(data: Mapping, with_human: bool = True) -> OaepContext:
    return OaepContext.create(
        k0=int(data["k0"]),
        n=int(data["n"]),
        master_key=bytes.fromhex(data["key_ids"]["master"]),
        with_human=with_human,
    )


def encode(y: int, r: int, ctx: OaepContext) -> str:
    """Token for message y under pad r: f(y xor G(r) || r xor H(y xor G(r)))."""
    params = ctx.params
    if not 0 <= y < (1 << params.n):
        raise LengthMismatch(f"y must be an {params.n}-bit value")
    if not 0 <= r < (1 << params.k0):
        raise LengthMismatch(f"r must be a {params.k0}-bit value")
    s = y ^ ctx.g(r)
    t = r ^ ctx.h(s)
    return ctx.captcha.forward((s << params.k0) | t)


def decode_preimage(ctx: OaepContext, x: int) -> tuple[int, int]:
    """Undo the pad arithmetic on a recovered f preimage; returns (y, r)."""
    params = ctx.params
    s = x >> params.k0
    t = x & ((1 << params.k0) - 1)
    r = t ^ ctx.h(s)
    y = s ^ ctx.g(r)
    return y, r


def _pad_label(r: int, k0: int) -> Label:
    return format(r, f"0{k0}b")


def seal_oaep(y: int, ctx: OaepContext) -> SealedInstance:
    """Uniform superposition of |r> paired with the token encoding y under r.

    The honest unseal measures register C and passes the token to the human
    oracle; the quantum measurement alone pins down no message, so the decode
    table marks every token outcome as garbage.
    """
    params = ctx.params
    if not 0 <= y < (1 << params.n):
        raise LengthMismatch(f"y must be an {params.n}-bit value")
    support = 1 << params.k0
    if support > SUPPORT_CAP:
        raise DimensionTooLarge(f"support {support} exceeds cap {SUPPORT_CAP}")
    amp = 1.0 / math.sqrt(float(support))
    amps = {}
    tokens = []
    for r in range(support):
        token = encode(y, r, ctx)
        tokens.append(token)
        amps[(_pad_label(r, params.k0), token)] = amp
    reference = SparseState(amps)
    unseal = UnsealSpec(
        pre_unitary=None,
        partition=ProjPartition.finest(tokens),
        decode={token: None for token in tokens},
    )
    instance_params = {
        "k": params.k,
        "k0": params.k0,
        "n": params.n,
        "key": ctx.master_key.hex(),
        "y": y,
    }
    return SealedInstance(OAEP, reference, unseal, instance_params)


def unseal_oaep(inst: SealedInstance, ctx: OaepContext, rng_seed: int) -> tuple[int, int]:
    """Measure register C, show the token to the human, undo the padding.

    Returns (y, r); exactly one oracle query is spent per call.
    """
    if inst.protocol != OAEP:
        raise ValueError(f"instance protocol is {inst.protocol!r}, not oaep")
    if ctx.human is None:
        raise OracleUnavailable("context has no inversion access")
    token, _post, _dist = measure_partition(
        inst.reference, inst.unseal.partition, rng_seed
    )
    x = ctx.human.invert(token)
    return decode_preimage(ctx, x)


def r_set(ctx: OaepContext, y: int, queries: Iterable[str] | None = None) -> set[int]:
    """Pads whose encoding of y was ever shown to the human.

    Recomputed from the query log (or an explicit token collection) by
    scanning all 2**k0 pads.
    """
    if queries is None:
        if ctx.human is None:
            raise OracleUnavailable("context has no oracle log to scan")
        queries = ctx.human.query_log
    shown = set(queries)
    if not shown:
        return set()
    return {r for r in range(1 << ctx.params.k0) if encode(y, r, ctx) in shown}


def tu_overlap(inst: SealedInstance, excluded: set[int]) -> float:
    """Squared overlap between the full-pad and useless-pad superpositions.

    Computed from the actual state vectors. When ``excluded`` covers every
    pad the useless-pad state does not exist; by convention the overlap is 0
    and ``DegenerateUWarning`` is emitted.
    """
    k0 = inst.params["k0"]
    support = 1 << k0
    bad = {r for r in excluded if not 0 <= r < support}
    if bad:
        raise ValueError(f"excluded pads out of range: {sorted(bad)}")
    if len(excluded) >= support:
        warnings.warn(
            "excluded set covers every pad; overlap is 0 by convention",
            DegenerateUWarning,
        )
        return 0.0
    excluded_labels = {_pad_label(r, k0) for r in excluded}
    kept = {
        key: a
        for key, a in inst.reference.amps.items()
        if key[0] not in excluded_labels
    }
    norm = math.sqrt(sum(abs(a) ** 2 for a in kept.values()))
    useless = SparseState({key: a / norm for key, a in kept.items()})
    return squared_overlap(inst.reference, useless)


def useless_query_bound(ctx: OaepContext | OaepParams, excluded: set[int]) -> float:
    """Probability mass by which the full-pad test can diverge, |R| / 2**k0."""
    params = ctx.params if isinstance(ctx, OaepContext) else ctx
    support = 1 << params.k0
    if len(excluded) > support:
        raise ValueError("excluded set larger than the pad space")
    return len(excluded) / support


def golden_vector_lines(ctx: OaepContext, pairs: Sequence[tuple[int, int]]) -> list[str]:
    """Reference vectors, one "y_hex r_hex token_hex" line per (y, r) pair."""
    params = ctx.params
    yw = (params.n + 3) // 4
    rw = (params.k0 + 3) // 4
    lines = []
    for y, r in pairs:
        token = encode(y, r, ctx)
        payload = token_payload(token, params.k)
        lines.append(f"{y:0{yw}x} {r:0{rw}x} {payload:0{(params.k + 3) // 4}x}")
    return lines


def write_golden_vectors(path, ctx: OaepContext, pairs: Sequence[tuple[int, int]]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for line in golden_vector_lines(ctx, pairs):
            fh.write(line + "\n")


def read_golden_vectors(path) -> list[tuple[int, int, int]]:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            y_hex, r_hex, token_hex = line.split()
            rows.append((int(y_hex, 16), int(r_hex, 16), int(token_hex, 16)))
    return rows
