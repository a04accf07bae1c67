"""Versioned binary policy checkpoints.

Layout: 7-byte magic `LAPCKPT`, u32 format version, u64 header length,
canonical-JSON header (stage, morphology descriptor, training metadata,
block index), then the raw float64 little-endian parameter blocks. The
header stores per-block CRC32 checksums, shapes, and byte offsets, so
save -> load -> save is byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import struct
import zlib

import numpy as np

MAGIC = b"LAPCKPT"
FORMAT_VERSION = 1
STAGES = ("pmc", "epmc", "epmc-uniform", "sepmc", "recovery")


class CheckpointError(ValueError):
    pass


def default_morphology() -> dict:
    from .pmc.obs import FUTURE_DIM, OBS_VERSION, PROPRIO_DIM
    return {"joints": 8, "legs": 4, "proprio_dim": PROPRIO_DIM,
            "future_dim": FUTURE_DIM, "obs_version": OBS_VERSION}


@dataclasses.dataclass
class PolicyCheckpoint:
    stage: str
    blocks: dict                  # name -> float64 ndarray
    morphology: dict
    metadata: dict                # steps, config_hash, parents, ...

    def validate(self):
        if self.stage not in STAGES:
            raise CheckpointError(f"unknown stage {self.stage!r}")
        for name, arr in self.blocks.items():
            if arr.dtype != np.float64:
                raise CheckpointError(f"block {name} must be float64")
        return self


def save_checkpoint(ckpt: PolicyCheckpoint) -> bytes:
    ckpt.validate()
    names = sorted(ckpt.blocks)
    payload = b"".join(np.ascontiguousarray(ckpt.blocks[n]).tobytes() for n in names)
    index = []
    offset = 0
    for n in names:
        arr = np.ascontiguousarray(ckpt.blocks[n])
        raw = arr.tobytes()
        index.append({"name": n, "shape": list(arr.shape), "offset": offset,
                      "length": len(raw), "crc32": zlib.crc32(raw)})
        offset += len(raw)
    header = json.dumps({
        "stage": ckpt.stage,
        "morphology": ckpt.morphology,
        "metadata": ckpt.metadata,
        "blocks": index,
    }, sort_keys=True, separators=(",", ":")).encode()
    return (MAGIC + struct.pack("<I", FORMAT_VERSION)
            + struct.pack("<Q", len(header)) + header + payload)


def load_checkpoint(data: bytes,
                    expected_morphology: dict | None = None) -> PolicyCheckpoint:
    if data[:7] != MAGIC:
        raise CheckpointError("bad magic; not a policy checkpoint")
    version, = struct.unpack_from("<I", data, 7)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported format version {version}")
    hlen, = struct.unpack_from("<Q", data, 11)
    header = json.loads(data[19:19 + hlen].decode())
    payload = data[19 + hlen:]
    blocks = {}
    for entry in header["blocks"]:
        raw = payload[entry["offset"]:entry["offset"] + entry["length"]]
        if zlib.crc32(raw) != entry["crc32"]:
            raise CheckpointError(f"checksum mismatch in block {entry['name']}")
        blocks[entry["name"]] = np.frombuffer(raw, dtype=np.float64) \
            .reshape(entry["shape"]).copy()
    ckpt = PolicyCheckpoint(stage=header["stage"], blocks=blocks,
                            morphology=header["morphology"],
                            metadata=header["metadata"]).validate()
    if expected_morphology is not None and ckpt.morphology != expected_morphology:
        raise CheckpointError(
            f"morphology mismatch: checkpoint {ckpt.morphology}, "
            f"expected {expected_morphology}")
    return ckpt


def write_checkpoint(path, ckpt: PolicyCheckpoint):
    with open(path, "wb") as f:
        f.write(save_checkpoint(ckpt))


def read_checkpoint(path, expected_morphology: dict | None = None) -> PolicyCheckpoint:
    with open(path, "rb") as f:
        return load_checkpoint(f.read(), expected_morphology)


def blocks_with_prefix(ckpt: PolicyCheckpoint, prefix: str) -> dict:
    """Subset a checkpoint's blocks (frozen-decoder extraction)."""
    out = {k: v for k, v in ckpt.blocks.items() if k.startswith(prefix)}
    if not out:
        raise CheckpointError(f"no blocks under prefix {prefix!r}")
    return out
