"""Antiferromagnetic Ising model on line graphs, sampled through half-edge configurations."""
from .chains import ChainConfig, ChainResult, HalfEdgeState, draw_samples, run_chain, sample_gibbs, transition_matrix
from .estimator import AnnealSchedule, EstimateReport, estimate_Z, measure_omega_ratio
from .graph import Graph, GraphError, hex_torus, line_graph, named_graph, parse_edge_list, serialize_edge_list
from .models import LineGraphIsingSampler, PartitionFunctionEstimator
from .oracle import exact_gibbs, exact_H0, exact_H2, exact_summary, exact_Z_vertex_model, tv_distance
from .signatures import ModelParams, Signature, ising_signature
from .windability import is_windable, matrix_A, matrix_B, solve_pinning

__version__ = "0.1.0"
