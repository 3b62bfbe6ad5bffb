"""Local-unitary orbit analysis of pure n-qubit states."""
from .canonical_forms import CanonicalForm3, EquivVerdict, SchmidtForm, canonical_3q, lu_equivalent, schmidt_2q
from .config import OptimizerConfig, RankPolicy, RunConfig
from .errors import (CatalogError, DimensionError, NumericalError, OrbitForgeError, ParameterError, StateParseError,
                     UnsupportedSizeError)
from .invariants import (ContractionPattern, builtin_patterns, evaluate_invariant, fingerprint,
                         functional_independence, invariance_test)
from .lie_action import (LieElement, count_bounds, generators, invariant_count, orbit_dimension, stabilizer_basis,
                         tangent_matrix, tangent_vector)
from .orbit_classify import bracket, classify_stabilizer, family4_case_table, flip_symmetry
from .statespace import QubitState, catalog_state, embed_real, parse_state, random_state, unembed_real

__version__ = "0.1.0"
