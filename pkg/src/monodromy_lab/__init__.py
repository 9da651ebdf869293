"""Numerical monodromy of u'' + Q(t, h) u = 0 along complex contours, exact
perturbation series for the monodromy, and a genus-2 Fuchsian laboratory."""

from .jets import (BranchAmbiguityError, CriticalPointError, Jet, RationalFn,
                   SingularJetError, mobius_jet, pair_from_z, schwarzian,
                   z_from_pair)
from .matrizant import (CoefficientCapError, MatrizantSeries, compute_series,
                        pair_kernel)
from .mobius import (GroupPresentation, MobiusError, MobiusMap, Signature,
                     SL2Matrix, classify, generator_labels, koebe_relators,
                     relation_residual, validate_signature)
from .path_ode import (ArcSegment, CoefficientField, ContourError,
                       FundamentalPair, LineSegment, Loop, Path,
                       StiffnessError, integrate_pair, monodromy,
                       transfer_matrix)
from .variation import (ConvergenceReport, MonodromyFamily, direct_monodromy,
                        conjugation_identity_residual, first_variation_z,
                        monodromy_family, plane_automorphy,
                        verify_monodromy_family)
from .fuchsian import (GroupEnumeration, OctagonGroup, ThetaDifferential,
                       automorphy_residual, build_octagon_group,
                       developing_monodromy, enumerate_group,
                       holomorphy_residual, theta_series, xi_factor)

__version__ = "0.1.0"
