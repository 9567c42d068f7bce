"""Residual gated graph convolutional network for edge-probability inference.

The architecture follows the publicly released pretrained TSP models: node
coordinates and edge features (distance plus a categorical k-NN tag) are
embedded into a hidden space, passed through a stack of gated message-passing
layers with residual connections and batch norm, and an MLP head scores every
edge with the probability of belonging to an optimal tour. Parameter names
match the public checkpoints so their state dicts load directly.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

# layout of the published models: 300-dim embeddings, 30 message-passing layers
DEFAULT_CONFIG = {
    "node_dim": 2,
    "voc_edges_in": 3,   # edge tags: 0 = far, 1 = k-NN neighbor, 2 = self
    "voc_edges_out": 2,  # per-edge logits: (not in tour, in tour)
    "hidden_dim": 300,
    "num_layers": 30,
    "mlp_layers": 3,
    "aggregation": "mean",
    "num_neighbors": -1,  # -1: fully connected input graph
}


class BatchNormNode(nn.Module):
    def __init__(self, hidden_dim: int):
        super().__init__()
        self.batch_norm = nn.BatchNorm1d(hidden_dim, track_running_stats=False)

    def forward(self, x):
        # x: B x V x H; BatchNorm1d wants the feature axis second
        return self.batch_norm(x.transpose(1, 2).contiguous()).transpose(1, 2)


class BatchNormEdge(nn.Module):
    def __init__(self, hidden_dim: int):
        super().__init__()
        self.batch_norm = nn.BatchNorm2d(hidden_dim, track_running_stats=False)

    def forward(self, e):
        # e: B x V x V x H
        return self.batch_norm(e.permute(0, 3, 1, 2).contiguous()).permute(0, 2, 3, 1)


class NodeFeatures(nn.Module):
    """x_i' = U x_i + aggregation over j of gate_ij * (V x_j)."""

    def __init__(self, hidden_dim: int, aggregation: str = "mean"):
        super().__init__()
        self.aggregation = aggregation
        self.U = nn.Linear(hidden_dim, hidden_dim, True)
        self.V = nn.Linear(hidden_dim, hidden_dim, True)

    def forward(self, x, edge_gate):
        Ux = self.U(x)
        Vx = self.V(x).unsqueeze(1)  # B x 1 x V x H
        gateVx = edge_gate * Vx
        if self.aggregation == "mean":
            return Ux + torch.sum(gateVx, dim=2) / (1e-20 + torch.sum(edge_gate, dim=2))
        return Ux + torch.sum(gateVx, dim=2)


class EdgeFeatures(nn.Module):
    """e_ij' = U e_ij + V x_i + V x_j."""

    def __init__(self, hidden_dim: int):
        super().__init__()
        self.U = nn.Linear(hidden_dim, hidden_dim, True)
        self.V = nn.Linear(hidden_dim, hidden_dim, True)

    def forward(self, x, e):
        Ue = self.U(e)
        Vx = self.V(x)
        return Ue + Vx.unsqueeze(1) + Vx.unsqueeze(2)


class ResidualGatedGCNLayer(nn.Module):
    """One round of message passing: the dense sigmoid gate over edge features
    filters neighbor information; both streams are batch-normed, relu'd, and
    added back to their inputs."""

    def __init__(self, hidden_dim: int, aggregation: str = "mean"):
        super().__init__()
        self.node_feat = NodeFeatures(hidden_dim, aggregation)
        self.edge_feat = EdgeFeatures(hidden_dim)
        self.bn_node = BatchNormNode(hidden_dim)
        self.bn_edge = BatchNormEdge(hidden_dim)

    def forward(self, x, e):
        e_tmp = self.edge_feat(x, e)
        edge_gate = torch.sigmoid(e_tmp)
        x_tmp = self.node_feat(x, edge_gate)
        e = e + F.relu(self.bn_edge(e_tmp))
        x = x + F.relu(self.bn_node(x_tmp))
        return x, e


class MLP(nn.Module):
    def __init__(self, hidden_dim: int, output_dim: int, num_layers: int):
        super().__init__()
        self.U = nn.ModuleList(nn.Linear(hidden_dim, hidden_dim, True)
                               for _ in range(max(0, num_layers - 1)))
        self.V = nn.Linear(hidden_dim, output_dim, True)

    def forward(self, h):
        for layer in self.U:
            h = F.relu(layer(h))
        return self.V(h)


class ResidualGatedGCNModel(nn.Module):
    def __init__(self, config: dict):
        super().__init__()
        cfg = {**DEFAULT_CONFIG, **config}
        self.config = cfg
        hidden = cfg["hidden_dim"]
        self.nodes_coord_embedding = nn.Linear(cfg["node_dim"], hidden, bias=False)
        self.edges_values_embedding = nn.Linear(1, hidden // 2, bias=False)
        self.edges_embedding = nn.Embedding(cfg["voc_edges_in"], hidden // 2)
        self.gcn_layers = nn.ModuleList(
            ResidualGatedGCNLayer(hidden, cfg["aggregation"])
            for _ in range(cfg["num_layers"]))
        self.mlp_edges = MLP(hidden, cfg["voc_edges_out"], cfg["mlp_layers"])

    def forward(self, x_edges, x_edges_values, x_nodes_coord):
        """x_edges: B x V x V int tags; x_edges_values: B x V x V distances;
        x_nodes_coord: B x V x 2. Returns B x V x V x voc_edges_out logits."""
        x = self.nodes_coord_embedding(x_nodes_coord)
        e_vals = self.edges_values_embedding(x_edges_values.unsqueeze(3))
        e_tags = self.edges_embedding(x_edges)
        e = torch.cat((e_vals, e_tags), dim=3)
        for layer in self.gcn_layers:
            x, e = layer(x, e)
        return self.mlp_edges(e)


def edge_inputs(coords, num_neighbors: int = -1):
    """Distance matrix and categorical edge tags for one instance.

    Tags: 2 on the diagonal, 1 for k-nearest neighbors (or everywhere when
    num_neighbors is -1), 0 otherwise.
    """
    coords = torch.as_tensor(coords, dtype=torch.float32)
    dist = torch.cdist(coords.unsqueeze(0), coords.unsqueeze(0)).squeeze(0)
    n = coords.shape[0]
    if num_neighbors is None or num_neighbors < 0 or num_neighbors >= n - 1:
        tags = torch.ones((n, n), dtype=torch.long)
    else:
        tags = torch.zeros((n, n), dtype=torch.long)
        knn = torch.argsort(dist, dim=1)[:, 1:num_neighbors + 1]
        tags.scatter_(1, knn, 1)
    tags.fill_diagonal_(2)
    return dist, tags


def infer_edge_probabilities(model: ResidualGatedGCNModel, coords) -> torch.Tensor:
    """Symmetrized per-edge probabilities for one instance, zero diagonal."""
    model.eval()
    dist, tags = edge_inputs(coords, model.config.get("num_neighbors", -1))
    with torch.no_grad():
        logits = model(tags.unsqueeze(0), dist.unsqueeze(0),
                       torch.as_tensor(coords, dtype=torch.float32).unsqueeze(0))
        probs = torch.softmax(logits, dim=3)[0, :, :, 1]
    probs = (probs + probs.T) / 2.0
    probs.fill_diagonal_(0.0)
    return probs.clamp_(0.0, 1.0)
