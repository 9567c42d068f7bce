import pytest
import torch

from gcn_adapter import ResidualGatedGCNModel, save_checkpoint

# small layout so inference is instant; the published models use 300/30/3
DEMO_CONFIG = {"hidden_dim": 16, "num_layers": 3, "mlp_layers": 2, "num_nodes": 20}


@pytest.fixture(scope="session")
def demo_checkpoint(tmp_path_factory):
    """Seeded randomly initialized checkpoint: exercises the full export chain
    (loading, inference, file contract) without the real pretrained weights."""
    torch.manual_seed(0)
    model = ResidualGatedGCNModel(DEMO_CONFIG)
    path = tmp_path_factory.mktemp("ckpt") / "demo_tsp20.tar"
    save_checkpoint(model, path)
    return path
