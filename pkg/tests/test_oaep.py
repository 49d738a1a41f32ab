import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qseal.adversary import basis_cheat
from qseal.oaep import (
    DegenerateUWarning,
    LengthMismatch,
    OaepContext,
    OaepParams,
    OracleUnavailable,
    decode_preimage,
    encode,
    golden_vector_lines,
    r_set,
    read_golden_vectors,
    seal_oaep,
    token_payload,
    tu_overlap,
    unseal_oaep,
    useless_query_bound,
)
from qseal.protocols import verify_return
from qseal.states import Ensemble, SparseState, measure_partition

GOLDEN_PATH = Path(__file__).parent / "data" / "oaep_golden.txt"


class TestParams:
    def test_accepts_consistent_sizes(self):
        p = OaepParams(k=24, k0=8, n=16)
        assert (p.k, p.k0, p.n) == (24, 8, 16)

    def test_rejects_inconsistent_sizes(self):
        with pytest.raises(ValueError):
            OaepParams(k=24, k0=8, n=15)

    def test_rejects_oversized_pad(self):
        with pytest.raises(ValueError):
            OaepParams(k=33, k0=17, n=16)

    def test_rejects_empty_message_width(self):
        with pytest.raises(ValueError):
            OaepParams(k=8, k0=8, n=0)


class TestCaptchaFunction:
    def test_injective_exhaustively(self):
        ctx = OaepContext.create(k0=4, n=8)  # k = 12
        assert ctx.captcha.check_injective()

    def test_forward_range_checked(self):
        ctx = OaepContext.create(k0=4, n=8)
        with pytest.raises(LengthMismatch):
            ctx.captcha.forward(1 << 12)

    def test_tokens_are_opaque_strings(self):
        ctx = OaepContext.create(k0=4, n=8)
        token = ctx.captcha.forward(123)
        assert token.startswith("img_")
        assert token_payload(token, 12) < (1 << 12)

    def test_malformed_token_rejected(self):
        with pytest.raises(ValueError):
            token_payload("not_a_token", 12)

    def test_different_keys_different_maps(self):
        a = OaepContext.create(k0=4, n=8, master_key=b"a" * 32)
        b = OaepContext.create(k0=4, n=8, master_key=b"b" * 32)
        tokens_a = [a.captcha.forward(x) for x in range(16)]
        tokens_b = [b.captcha.forward(x) for x in range(16)]
        assert tokens_a != tokens_b


class TestEncode:
    def test_round_trip_exhaustive_small(self):
        ctx = OaepContext.create(k0=4, n=6)
        seen = set()
        for y in range(1 << 6):
            for r in range(1 << 4):
                token = encode(y, r, ctx)
                assert token not in seen
                seen.add(token)
                x = ctx.human.invert(token)
                assert decode_preimage(ctx, x) == (y, r)

    @given(y=st.integers(0, 2**16 - 1), r=st.integers(0, 2**8 - 1))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_reference_params(self, y, r):
        ctx = OaepContext.create(k0=8, n=16)
        x = ctx.human.invert(encode(y, r, ctx))
        assert decode_preimage(ctx, x) == (y, r)

    def test_tokens_distinct_across_pads(self):
        ctx = OaepContext.create(k0=10, n=6)
        tokens = {encode(33, r, ctx) for r in range(1 << 10)}
        assert len(tokens) == 1 << 10

    def test_length_mismatch(self):
        ctx = OaepContext.create(k0=4, n=8)
        with pytest.raises(LengthMismatch):
            encode(1 << 8, 0, ctx)
        with pytest.raises(LengthMismatch):
            encode(0, 1 << 4, ctx)

    def test_golden_vectors_frozen(self):
        ctx = OaepContext.create(k0=8, n=16)
        frozen = read_golden_vectors(GOLDEN_PATH)
        pairs = [(y, r) for y, r, _ in frozen]
        regenerated = golden_vector_lines(ctx, pairs)
        on_disk = [line.strip() for line in GOLDEN_PATH.read_text().splitlines() if line]
        assert regenerated == on_disk
        assert token_payload(encode(0, 0, ctx), 24) == 0x5EAB73


class TestSealOaep:
    def test_minimal_pad_gives_two_branches(self):
        ctx = OaepContext.create(k0=1, n=8)
        inst = seal_oaep(0x2B, ctx)
        assert len(inst.reference.amps) == 2
        for amp in inst.reference.amps.values():
            assert amp == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-15)

    def test_reference_structure(self):
        ctx = OaepContext.create(k0=8, n=16)
        inst = seal_oaep(0x1234, ctx)
        assert len(inst.reference.amps) == 256
        norm = sum(abs(a) ** 2 for a in inst.reference.amps.values())
        assert norm == pytest.approx(1.0, abs=1e-9)
        for (pad_label, token), _ in inst.reference.amps.items():
            r = int(pad_label, 2)
            assert encode(0x1234, r, ctx) == token

    @pytest.mark.parametrize("k0", [1, 4, 8])
    def test_honest_return_fully_accepted(self, k0):
        ctx = OaepContext.create(k0=k0, n=8)
        inst = seal_oaep(0x5A, ctx)
        _, accept = verify_return(inst, Ensemble.pure(inst.reference), 0)
        assert accept == 1.0

    def test_all_token_outcomes_marked_garbage(self):
        inst = seal_oaep(1, OaepContext.create(k0=2, n=4))
        assert set(inst.unseal.decode.values()) == {None}

    def test_message_range_checked(self):
        ctx = OaepContext.create(k0=4, n=8)
        with pytest.raises(LengthMismatch):
            seal_oaep(1 << 8, ctx)


class TestUnsealOaep:
    def test_recovers_message_on_every_branch(self):
        y = 0x9C
        ctx = OaepContext.create(k0=8, n=8)
        for r in range(256):
            x = ctx.human.invert(encode(y, r, ctx))
            assert decode_preimage(ctx, x) == (y, r)

    def test_sampled_unseal_matches_measured_branch(self):
        y = 0x31
        for seed in range(8):
            ctx = OaepContext.create(k0=4, n=8)
            inst = seal_oaep(y, ctx)
            token, _, _ = measure_partition(
                inst.reference, inst.unseal.partition, seed
            )
            got_y, got_r = unseal_oaep(inst, ctx, seed)
            assert got_y == y
            assert encode(y, got_r, ctx) == token

    def test_query_log_grows_by_one_per_unseal(self):
        ctx = OaepContext.create(k0=4, n=8)
        inst = seal_oaep(7, ctx)
        assert len(ctx.human.query_log) == 0
        for expected in (1, 2, 3):
            unseal_oaep(inst, ctx, rng_seed=expected)
            assert len(ctx.human.query_log) == expected

    def test_log_snapshot_is_immutable(self):
        ctx = OaepContext.create(k0=2, n=4)
        inst = seal_oaep(1, ctx)
        before = ctx.human.query_log
        unseal_oaep(inst, ctx, 0)
        assert len(before) == 0
        assert len(ctx.human.query_log) == 1

    def test_forward_only_context_cannot_unseal(self):
        sealing_ctx = OaepContext.create(k0=4, n=8)
        inst = seal_oaep(5, sealing_ctx)
        forward_only = OaepContext.create(k0=4, n=8, with_human=False)
        assert encode(5, 3, forward_only) == encode(5, 3, sealing_ctx)
        with pytest.raises(OracleUnavailable):
            unseal_oaep(inst, forward_only, 0)

    def test_wrong_protocol_rejected(self):
        from qseal.protocols import seal_naive

        ctx = OaepContext.create(k0=4, n=8)
        with pytest.raises(ValueError):
            unseal_oaep(seal_naive("M"), ctx, 0)


class TestUsefulPadSet:
    def test_empty_log_gives_empty_set(self):
        ctx = OaepContext.create(k0=4, n=8)
        assert r_set(ctx, 0) == set()

    def test_recomputed_from_log(self):
        ctx = OaepContext.create(k0=4, n=8)
        inst = seal_oaep(0xAB, ctx)
        _, r = unseal_oaep(inst, ctx, 3)
        assert r_set(ctx, 0xAB) == {r}

    def test_explicit_queries_accepted(self):
        ctx = OaepContext.create(k0=4, n=8, with_human=False)
        tokens = [encode(0xAB, r, ctx) for r in (2, 9)]
        assert r_set(ctx, 0xAB, queries=tokens) == {2, 9}

    def test_needs_a_log_or_queries(self):
        ctx = OaepContext.create(k0=4, n=8, with_human=False)
        with pytest.raises(OracleUnavailable):
            r_set(ctx, 0)


class TestProjectorOverlap:
    def test_empty_exclusion_gives_unit_overlap(self):
        inst = seal_oaep(0, OaepContext.create(k0=4, n=8, with_human=False))
        assert tu_overlap(inst, set()) == pytest.approx(1.0, abs=1e-12)

    def test_single_exclusion(self):
        inst = seal_oaep(0, OaepContext.create(k0=4, n=8, with_human=False))
        assert tu_overlap(inst, {3}) == pytest.approx(15.0 / 16.0, abs=1e-12)

    def test_full_exclusion_is_degenerate(self):
        inst = seal_oaep(0, OaepContext.create(k0=2, n=4, with_human=False))
        with pytest.warns(DegenerateUWarning):
            assert tu_overlap(inst, {0, 1, 2, 3}) == 0.0

    def test_out_of_range_pad_rejected(self):
        inst = seal_oaep(0, OaepContext.create(k0=2, n=4, with_human=False))
        with pytest.raises(ValueError):
            tu_overlap(inst, {4})

    @pytest.mark.parametrize("k0", [4, 6, 8])
    @pytest.mark.parametrize("size", [0, 1, 4])
    def test_state_computation_matches_closed_form(self, k0, size):
        ctx = OaepContext.create(k0=k0, n=8, with_human=False)
        inst = seal_oaep(17, ctx)
        excluded = set(range(size))
        assert tu_overlap(inst, excluded) == pytest.approx(
            1.0 - useless_query_bound(ctx, excluded), abs=1e-12
        )


class TestUselessQueryBound:
    def test_closed_form_values(self):
        ctx8 = OaepContext.create(k0=8, n=8, with_human=False)
        ctx12 = OaepContext.create(k0=12, n=8, with_human=False)
        assert useless_query_bound(ctx8, set(range(4))) == 4 / 256
        assert useless_query_bound(ctx12, set(range(4))) == 4 / 4096
        assert useless_query_bound(ctx8, set()) == 0.0

    def test_halves_per_pad_bit(self):
        previous = None
        for k0 in range(4, 11):
            ctx = OaepContext.create(k0=k0, n=8, with_human=False)
            value = useless_query_bound(ctx, set(range(4)))
            if previous is not None:
                assert value == pytest.approx(previous / 2.0, abs=1e-12)
            previous = value

    def test_accepts_params_directly(self):
        assert useless_query_bound(OaepParams(k=12, k0=4, n=8), {0}) == 1 / 16


class TestBasisCheatOnSealedTokens:
    @pytest.mark.parametrize("k0", [2, 4, 8])
    def test_detection_is_exponentially_close_to_one(self, k0):
        ctx = OaepContext.create(k0=k0, n=8, with_human=False)
        report = basis_cheat(seal_oaep(0x11, ctx))
        assert report.s == pytest.approx(1.0 - 2.0**-k0, abs=1e-12)
        assert report.p == 0.0
        assert report.bound == 1.0
        assert report.margin >= -1e-9


class TestFootnoteCounterexample:
    def test_classical_branch_is_accepted_rarely_but_queries_are_useful(self):
        # Read the message (one oracle query), then hand back the collapsed
        # classical branch: acceptance is exactly one over the pad count,
        # yet the recorded query set is maximally useful.
        y = 0x77
        ctx = OaepContext.create(k0=8, n=8)
        inst = seal_oaep(y, ctx)
        got_y, r = unseal_oaep(inst, ctx, rng_seed=5)
        assert got_y == y
        branch = SparseState({(format(r, "08b"), encode(y, r, ctx)): 1.0})
        _, accept = verify_return(inst, Ensemble.pure(branch), 0)
        assert accept == pytest.approx(2.0**-8, abs=1e-12)
        useful = r_set(ctx, y)
        assert useful == {r}
        assert useless_query_bound(ctx, useful) == pytest.approx(
            2.0**-8, abs=1e-15
        )


class TestContextSerialization:
    def test_round_trip_preserves_behaviour(self):
        from qseal.oaep import context_from_dict, context_to_dict

        ctx = OaepContext.create(k0=4, n=8, master_key=b"k" * 32)
        data = context_to_dict(ctx)
        assert data["k"] == 12 and data["k0"] == 4 and data["n"] == 8
        again = context_from_dict(data)
        for r in range(4):
            assert encode(9, r, again) == encode(9, r, ctx)
