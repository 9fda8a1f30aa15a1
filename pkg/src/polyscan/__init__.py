"""Maximum-likelihood polyline maps from 2-D laser range scans.

The extraction step connects neighboring scan endpoints and greedily
removes the vertex with the least measurement-probability error until a
stopping rule holds; the optimization step refines the surviving vertex
positions by derivative-free direct search. Baseline simplifiers, a scan
simulator, evaluation metrics, and a CLI round out the package.
"""

from ._kernels import backend_name
from .baselines import endpoint_clusters, ief, sam, visvalingam
from .extraction import (ExtractionConfig, InvalidRemovalError,
                         build_initial_map, extract, rays_affected,
                         vertex_removal_error)
from .geometry import (Point2, Polyline, PolylineMap, Ray,
                       first_intersection_distance, ray_segment_intersection,
                       residual)
from .metrics import (DegenerateEstimateError, EvalReport,
                      NoIntersectingRaysError, a_value, a_value_report,
                      f_value, rmse)
from .optimization import (OptimizerOptions, VertexParameterization,
                           nelder_mead, objective, optimize)
from .scan import Scan
from .sensor_model import (ConstantNoise, NoIntersectionError, NoiseModel,
                           ray_log_likelihood, scan_log_likelihood)
from .simulator import (GroundTruthPolygon, SimConfig, random_polygon,
                        simulate_scan, star_polygon)

__version__ = "0.1.0"

__all__ = [
    "ConstantNoise", "DegenerateEstimateError", "EvalReport",
    "ExtractionConfig", "GroundTruthPolygon", "InvalidRemovalError",
    "NoIntersectingRaysError", "NoIntersectionError", "NoiseModel",
    "OptimizerOptions", "Point2", "Polyline", "PolylineMap", "Ray",
    "Scan", "SimConfig", "VertexParameterization", "a_value",
    "a_value_report", "backend_name", "build_initial_map",
    "endpoint_clusters", "extract", "f_value", "first_intersection_distance",
    "ief", "nelder_mead", "objective", "optimize", "random_polygon",
    "ray_log_likelihood", "ray_segment_intersection", "rays_affected",
    "residual", "rmse", "sam", "scan_log_likelihood", "simulate_scan",
    "star_polygon", "vertex_removal_error", "visvalingam",
]
