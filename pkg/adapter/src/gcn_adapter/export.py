"""File-in/file-out export: TSPLIB instance + model checkpoint -> plain-text
probability-matrix file (line one holds n, then n rows of n reals).

The adapter talks to the solver only through these two file formats; no
in-process binding, so the solver side never needs a deep-learning runtime.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .model import DEFAULT_CONFIG, ResidualGatedGCNModel, infer_edge_probabilities

MODEL_SIZES = (20, 50, 100)


class AdapterError(Exception):
    pass


class SizeMismatchError(AdapterError):
    """The pretrained models are defined for graphs of one fixed dimension."""


class CheckpointError(AdapterError):
    pass


def parse_euc2d_tsplib(path) -> np.ndarray:
    """Minimal EUC_2D TSPLIB reader; returns the (n, 2) coordinate array."""
    dimension = None
    coords = None
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        key, _, value = line.partition(":")
        key = key.strip().upper()
        if key == "DIMENSION":
            dimension = int(value.strip())
        elif key == "EDGE_WEIGHT_TYPE" and value.strip().upper() != "EUC_2D":
            raise AdapterError(f"unsupported EDGE_WEIGHT_TYPE {value.strip()!r}")
        elif key == "NODE_COORD_SECTION":
            if dimension is None:
                raise AdapterError("NODE_COORD_SECTION before DIMENSION")
            coords = np.zeros((dimension, 2))
            for k in range(dimension):
                parts = lines[i + k].split()
                coords[int(parts[0]) - 1] = (float(parts[1]), float(parts[2]))
            i += dimension
    if coords is None:
        raise AdapterError(f"no NODE_COORD_SECTION in {path}")
    return coords


def load_checkpoint(path, model_size: int) -> ResidualGatedGCNModel:
    """Build the network and load weights from a checkpoint file.

    Accepts either a bare state dict or a dict holding `model_state_dict`
    (the convention of the published training code), with an optional
    `config` entry; absent config fields fall back to the published layout
    (300-dim embeddings, 30 layers). `module.` prefixes from DataParallel
    training are stripped.
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as err:
        raise CheckpointError(f"cannot read checkpoint {path}: {err}")
    if isinstance(payload, dict) and "model_state_dict" in payload:
        state = payload["model_state_dict"]
        config = dict(payload.get("config", {}))
    elif isinstance(payload, dict):
        state = payload
        config = {}
    else:
        raise CheckpointError(f"unrecognized checkpoint structure in {path}")
    state = {k.removeprefix("module."): v for k, v in state.items()}
    config = {**DEFAULT_CONFIG, **config, "num_nodes": model_size}
    model = ResidualGatedGCNModel(config)
    try:
        model.load_state_dict(state)
    except RuntimeError as err:
        raise CheckpointError(f"checkpoint does not match the model layout: {err}")
    return model


def save_checkpoint(model: ResidualGatedGCNModel, path) -> None:
    torch.save({"config": model.config, "model_state_dict": model.state_dict()}, path)


def render_matrix(p: np.ndarray) -> str:
    lines = [str(p.shape[0])]
    for row in p:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def export_probabilities(tsplib_file, model_size: int, checkpoint_path, out_file) -> Path:
    """Run inference on one instance and write its probability-matrix file."""
    if model_size not in MODEL_SIZES:
        raise SizeMismatchError(f"model size must be one of {MODEL_SIZES}, got {model_size}")
    coords = parse_euc2d_tsplib(tsplib_file)
    if coords.shape[0] != model_size:
        raise SizeMismatchError(
            f"instance has {coords.shape[0]} vertices but the model is defined "
            f"for dimension {model_size}")
    model = load_checkpoint(checkpoint_path, model_size)
    probs = infer_edge_probabilities(model, coords).numpy().astype(float)
    out_file = Path(out_file)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    out_file.write_text(render_matrix(probs), encoding="utf-8")
    return out_file
