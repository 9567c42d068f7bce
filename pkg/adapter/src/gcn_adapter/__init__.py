"""Adapter around pretrained graph-convolutional TSP models: loads a
checkpoint, runs edge-probability inference on one TSPLIB instance, and writes
the plain-text probability-matrix file the solver consumes."""

from .export import (AdapterError, CheckpointError, MODEL_SIZES, SizeMismatchError,
                     export_probabilities, load_checkpoint, parse_euc2d_tsplib,
                     save_checkpoint)
from .model import (DEFAULT_CONFIG, ResidualGatedGCNModel, edge_inputs,
                    infer_edge_probabilities)

__version__ = "0.1.0"
