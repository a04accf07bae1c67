import numpy as np
import pytest

from pounce.checkpoint import (CheckpointError, PolicyCheckpoint,
                               blocks_with_prefix, default_morphology,
                               load_checkpoint, save_checkpoint)


def sample_ckpt():
    rng = np.random.default_rng(0)
    return PolicyCheckpoint(
        stage="pmc",
        blocks={"pmc/encoder/W": rng.standard_normal((4, 3)),
                "pmc/decoder/b": rng.standard_normal(5),
                "pmc/codebook/embeddings": rng.standard_normal((8, 2))},
        morphology=default_morphology(),
        metadata={"steps": 1234, "config_hash": "abc", "parents": []})


def test_round_trip_byte_identical():
    ckpt = sample_ckpt()
    data = save_checkpoint(ckpt)
    loaded = load_checkpoint(data)
    assert save_checkpoint(loaded) == data
    for k, v in ckpt.blocks.items():
        np.testing.assert_array_equal(loaded.blocks[k], v)
    assert loaded.stage == "pmc"
    assert loaded.metadata["steps"] == 1234


def test_magic_and_version_checked():
    data = save_checkpoint(sample_ckpt())
    with pytest.raises(CheckpointError):
        load_checkpoint(b"NOTMAGIC" + data[8:])
    bad_version = data[:7] + b"\x63\x00\x00\x00" + data[11:]
    with pytest.raises(CheckpointError):
        load_checkpoint(bad_version)


def test_checksum_detects_corruption():
    data = bytearray(save_checkpoint(sample_ckpt()))
    data[-3] ^= 0xFF
    with pytest.raises(CheckpointError):
        load_checkpoint(bytes(data))


def test_morphology_mismatch_rejected():
    data = save_checkpoint(sample_ckpt())
    wrong = dict(default_morphology())
    wrong["joints"] = 12
    with pytest.raises(CheckpointError):
        load_checkpoint(data, expected_morphology=wrong)
    load_checkpoint(data, expected_morphology=default_morphology())


def test_unknown_stage_rejected():
    ckpt = sample_ckpt()
    ckpt.stage = "mystery"
    with pytest.raises(CheckpointError):
        save_checkpoint(ckpt)


def test_prefix_subset():
    ckpt = sample_ckpt()
    sub = blocks_with_prefix(ckpt, "pmc/decoder/")
    assert list(sub) == ["pmc/decoder/b"]
    with pytest.raises(CheckpointError):
        blocks_with_prefix(ckpt, "nothing/")


def test_policy_arrays_survive_round_trip():
    from pounce.pmc import PmcPolicy
    policy = PmcPolicy(np.random.default_rng(1))
    ckpt = PolicyCheckpoint(stage="pmc", blocks=policy.state_arrays(),
                            morphology=default_morphology(), metadata={})
    loaded = load_checkpoint(save_checkpoint(ckpt))
    policy2 = PmcPolicy(np.random.default_rng(2))
    policy2.load_arrays(loaded.blocks)
    for (n1, p1), (n2, p2) in zip(policy.named_parameters(),
                                  policy2.named_parameters()):
        assert n1 == n2
        np.testing.assert_array_equal(p1.data, p2.data)
