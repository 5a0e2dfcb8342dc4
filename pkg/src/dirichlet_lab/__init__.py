"""Local Dirichlet integrals of distance-type outer functions on the unit circle."""
from ._quad import QuadConfig
from .capacity import (CapacityReport, CriterionVerdict, cantor_capacity_series, cyclicity_check,
                       energy_divergence, polarity_check, sublevel_gauge)
from .carleson import (ArcScan, MultiplierVerdict, OneBoxReport, ars_boundary_test, ars_box_test,
                       cantor_gauge, gauge_integral_finite, multiplier_verdict, necessary_log_test,
                       one_box_test)
from .circle_sets import (AnglePoint, CantorSpec, CircleSet, Gap, build_cantor, build_point_sequence,
                          build_theta_sequence, component_of, dist_to_set, finite_set, gap_counting,
                          pushforward_integral, region_gamma, region_sigma, single_point,
                          sublevel_length, sublevel_set)
from .local_dirichlet import (EnergyResult, LocalDirichletBreakdown, UntrustedRegime, dirichlet_energy,
                              dirichlet_mu, douglas_local, rs_local, rs_local_many, rs_regional)
from .measures import BoundaryMeasure, DiskMeasure, dist_power, from_weight, lebesgue
from .outer_functions import OuterDistanceFunction, boundary_modulus, carleson_check, evaluate_interior
from .set_classes import ClassReport, beta_exponent, k_test, kset_equivalents, l_test
from .weights import (GrowthGauge, Weight, certify, constant_weight, log_power_weight, power_gauge,
                      power_weight, t_log_gauge)

__version__ = "0.1.0"
