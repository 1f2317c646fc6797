"""Capacity bounds for additive signal-dependent noise channels Y = X + sigma(X) Z."""
from .channel import (ChannelSpec, Constraint, ConstraintKind, DensityInput, DiscreteInput,
                      Monotonicity, NoiseModel, SigmaProfile, conditional_density,
                      conditional_entropy, sample)
from .errors import (ASDNError, DomainError, EmptyTail, HypothesisFailed, NoConvergence,
                     NonFinite, NonMonotoneSigma, NotADensity, NotConvex, NotIncreasing,
                     StepFailed, UnboundedSupport, UnsupportedConstraintCombination)
from .infinity import (Detection, PackingWitness, build_packing, check_finiteness_hypotheses,
                       detect_infinite_capacity, witness_mi_growth)
from .lower import (lower_bound_maj, lower_bound_maj_constrained, lower_bound_psi,
                    verify_majorization_condition)
from .oracle import (CapacityEstimate, DiscretizedChannel, blahut_arimoto, discretize,
                     mc_mutual_information, mutual_information)
from .quadrature import QuadratureConfig, differential_entropy, integrate
from .report import BoundKind, BoundReport, HypothesisResult, Status
from .transforms import MonotoneTransform, entropy_transform_check, phi, psi
from .upper import maximize_covariance, symkl_bound_at, upper_bound_closed_form

__version__ = "0.1.0"
