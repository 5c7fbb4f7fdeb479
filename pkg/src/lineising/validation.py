"""Input coercion for the estimator classes."""
from __future__ import annotations

import os

import numpy as np
from sklearn.utils import check_array

from .graph import Graph, GraphError, graph_from_edges, named_graph, parse_edge_list
from .signatures import ModelParams


def check_graph(X) -> Graph:
    """Accept a Graph, a generator spec ("hex:2"), an edge-list path, a networkx graph or a (k, 2) edge array."""
    if isinstance(X, Graph):
        return X
    if isinstance(X, (str, os.PathLike)):
        if os.path.exists(X):
            with open(X) as fh:
                return parse_edge_list(fh.read())
        return named_graph(str(X))
    if hasattr(X, "nodes") and hasattr(X, "edges"):
        nodes = sorted(X.nodes())
        idx = {v: i for i, v in enumerate(nodes)}
        return Graph(len(nodes), tuple((idx[u], idx[v]) for u, v in X.edges()))
    arr = check_array(X, dtype=np.int64, ensure_min_samples=0)
    if arr.shape[1] != 2:
        raise GraphError("edge array must have shape (k, 2)")
    return graph_from_edges(arr.tolist())


def check_params(g: Graph, beta, nu) -> ModelParams:
    params = ModelParams(beta, nu if np.ndim(nu) == 0 else tuple(np.asarray(nu, dtype=float)))
    params.edge_fields(g.m)  # length check for per-edge fields
    return params


def check_seed(random_state) -> int:
    """Integer master seed; ``None`` draws fresh entropy."""
    if random_state is None:
        return int(np.random.SeedSequence().entropy % (1 << 63))
    if isinstance(random_state, (int, np.integer)) and random_state >= 0:
        return int(random_state)
    raise ValueError("random_state must be a nonnegative integer or None")
