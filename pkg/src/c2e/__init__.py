"""Numerical verification of compatibility complexes for the
conformal-to-Einstein operator and its projective analogue.

The package is organized bottom-up:

* :mod:`c2e.jets`       -- truncated multivariate Taylor arithmetic;
* :mod:`c2e.tensors`    -- tensor-valued jets, contraction, symmetry
  projections (including the Cartan hook projection);
* :mod:`c2e.geometry`   -- metric charts and the curvature pipeline;
* :mod:`c2e.conformal`  -- the conformal-to-Einstein operator, Weyl
  inversion, obstructions and the modified operator zoo;
* :mod:`c2e.homology`   -- operator complexes, equivalence data and their
  numerical verification;
* :mod:`c2e.projective` -- the projective mirror of the above;
* :mod:`c2e.nullframes` -- 4D Lorentzian double-null frame algebra,
  Newman-Penrose scalars and the Petrov filtration;
* :mod:`c2e.cli`        -- a batch driver emitting JSON reports.
"""

from .errors import StructuralError, BudgetError, NumericError
from .jets import Jet
from .tensors import TensorJet, ShapeSpec, CONFORMAL, PROJECTIVE
from .geometry import (MetricChart, CurvaturePack, curvature_pack,
                       ConformalScale, builtin_charts, get_chart)
from .conformal import (E0, Ek, weyl_inversion, obstruction_pack,
                        identity_suite, ONE_SOLUTION, NO_SOLUTION,
                        NOT_GENERIC)
from .homology import (ComplexSpec, EquivalenceData, check_complex,
                       check_equivalence, build_onesol_complex,
                       build_nosol_complex, build_bgg_complex,
                       lift_compatibility)
from .projective import (ProjectiveChart, ProjectivePack, projective_pack,
                         projective_weyl_inversion, E0_proj, ops_proj,
                         build_onesol_proj_complex, projective_suite)
from .nullframes import (NullFrame, make_frame, canonical_frame, NPScalars,
                         np_scalars, reconstruct_weyl, petrov_classify,
                         quadratic_invariant, cubic_invariants, hook_basis,
                         weyl_map_matrix, genericity_rank)

__version__ = "0.1.0"
