"""Last-passage percolation on marked planar Poisson clouds (Hammersley model with random weights)."""
from .geometry import (Cone, ShapeFunction, TruncatedCylinder, cone_contains, curvature_gap,
                       cylinder_side_edge_points, shape_value, transversal_deviation)
from .lpp import (Geodesic, PassageField, brute_force_last_passage, geodesic, last_passage,
                  passage_field, r_out_member)
from .points import (ConfigurationError, MarkedPoint, PointCloud, Region, apply_hyperbolic_map,
                     replica_seed, sample_cloud)
from .rays import (BusemannSample, RayApproximation, approx_alpha_ray, busemann, coalescence_point)
from .weights import (Bernoulli, Dirac, Empirical, Exponential, UniformInterval, WeightLaw,
                      has_exponential_moment, make_law, sample_weight, sqrt_tail_integral)

__version__ = "0.1.0"
