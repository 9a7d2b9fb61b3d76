"""Network checkpoints: named parameter tensors plus the architecture config.

File layout: ``b"SCKP"`` magic, uint32 version, uint64 header length, a JSON
header (role, config, training metadata, tensor manifest), then the raw
little-endian tensor payload in manifest order. Round-trips are bit-exact, so
a reloaded network reproduces forward outputs exactly.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
import torch
from torch import nn

from shapeseg.exceptions import CheckpointError
from shapeseg.networks.cae import CaeConfig, Decoder, Encoder
from shapeseg.networks.discriminator import Discriminator, DiscriminatorConfig
from shapeseg.networks.generator import Generator, GeneratorConfig

MAGIC = b"SCKP"
VERSION = 1

AnyConfig = Union[GeneratorConfig, CaeConfig, DiscriminatorConfig]

_ROLE_CONFIG: dict[str, type] = {
    "generator": GeneratorConfig,
    "encoder": CaeConfig,
    "decoder": CaeConfig,
    "discriminator": DiscriminatorConfig,
}
_ROLE_MODULE = {
    "generator": Generator,
    "encoder": Encoder,
    "decoder": Decoder,
    "discriminator": Discriminator,
}


@dataclass
class NetworkCheckpoint:
    role: str
    config: AnyConfig
    parameters: dict[str, np.ndarray]
    training_meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.role not in _ROLE_CONFIG:
            raise CheckpointError(f"unknown role {self.role!r}, expected one of {sorted(_ROLE_CONFIG)}")
        expected = _ROLE_CONFIG[self.role]
        if not isinstance(self.config, expected):
            raise CheckpointError(
                f"role {self.role!r} requires a {expected.__name__}, got {type(self.config).__name__}"
            )

    def validate_parameters(self) -> None:
        """Check names and shapes against a freshly built architecture."""
        reference = build_module(self.role, self.config).state_dict()
        missing = sorted(set(reference) - set(self.parameters))
        extra = sorted(set(self.parameters) - set(reference))
        if missing or extra:
            raise CheckpointError(
                f"parameter names do not match {self.role} architecture: "
                f"missing {missing[:4]}, unexpected {extra[:4]}"
            )
        for name, ref in reference.items():
            got = self.parameters[name].shape
            if tuple(got) != tuple(ref.shape):
                raise CheckpointError(
                    f"parameter {name!r}: shape {tuple(got)} does not match expected {tuple(ref.shape)}"
                )

    def content_id(self) -> str:
        """Short content hash over role, config and parameter bytes."""
        digest = hashlib.sha256()
        digest.update(self.role.encode())
        digest.update(json.dumps(_config_to_dict(self.config), sort_keys=True).encode())
        for name in sorted(self.parameters):
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(self.parameters[name]).tobytes())
        return digest.hexdigest()[:16]


def build_module(role: str, config: AnyConfig) -> nn.Module:
    if role not in _ROLE_MODULE:
        raise CheckpointError(f"unknown role {role!r}")
    return _ROLE_MODULE[role](config)


def checkpoint_from_module(role: str, module: nn.Module, training_meta: dict | None = None) -> NetworkCheckpoint:
    params = {
        name: tensor.detach().cpu().numpy().copy()
        for name, tensor in module.state_dict().items()
    }
    return NetworkCheckpoint(
        role=role, config=module.config, parameters=params, training_meta=dict(training_meta or {})
    )


def module_from_checkpoint(ckpt: NetworkCheckpoint, expected_role: str | None = None) -> nn.Module:
    if expected_role is not None and ckpt.role != expected_role:
        raise CheckpointError(f"checkpoint role is {ckpt.role!r}, expected {expected_role!r}")
    ckpt.validate_parameters()
    module = build_module(ckpt.role, ckpt.config)
    state = {name: torch.from_numpy(np.ascontiguousarray(arr)) for name, arr in ckpt.parameters.items()}
    module.load_state_dict(state)
    return module


def _config_to_dict(config: AnyConfig) -> dict:
    return asdict(config)


def _config_from_dict(role: str, data: dict) -> AnyConfig:
    cls = _ROLE_CONFIG[role]
    if "input_size" in data:
        data = dict(data, input_size=tuple(data["input_size"]))
    return cls(**data)


def save_checkpoint(ckpt: NetworkCheckpoint, path: Path | str) -> None:
    ckpt.validate_parameters()
    manifest = []
    chunks = []
    for name in sorted(ckpt.parameters):
        arr = np.ascontiguousarray(ckpt.parameters[name])
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        raw = arr.tobytes()
        manifest.append(
            {"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape), "nbytes": len(raw)}
        )
        chunks.append(raw)
    header = json.dumps(
        {
            "role": ckpt.role,
            "config": _config_to_dict(ckpt.config),
            "training_meta": ckpt.training_meta,
            "tensors": manifest,
        }
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for raw in chunks:
            fh.write(raw)


def load_checkpoint(path: Path | str) -> NetworkCheckpoint:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic {raw[:4]!r})")
    version = struct.unpack("<I", raw[4:8])[0]
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    header_len = struct.unpack("<Q", raw[8:16])[0]
    header_end = 16 + header_len
    if header_end > len(raw):
        raise CheckpointError(f"{path}: truncated header (expected {header_len} bytes at offset 16)")
    header = json.loads(raw[16:header_end].decode("utf-8"))
    role = header["role"]
    if role not in _ROLE_CONFIG:
        raise CheckpointError(f"{path}: unknown role {role!r}")
    config = _config_from_dict(role, header["config"])
    parameters: dict[str, np.ndarray] = {}
    offset = header_end
    for entry in header["tensors"]:
        end = offset + entry["nbytes"]
        if end > len(raw):
            raise CheckpointError(
                f"{path}: truncated payload for tensor {entry['name']!r} at offset {offset}"
            )
        arr = np.frombuffer(raw[offset:end], dtype=np.dtype(entry["dtype"]))
        parameters[entry["name"]] = arr.reshape(entry["shape"]).copy()
        offset = end
    ckpt = NetworkCheckpoint(
        role=role, config=config, parameters=parameters, training_meta=header.get("training_meta", {})
    )
    ckpt.validate_parameters()
    return ckpt
